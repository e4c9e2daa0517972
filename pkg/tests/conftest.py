"""Shared fixtures and independent oracle implementations.

The oracles here deliberately avoid the package's own code paths: partial
traces by explicit index summation, and the two-qubit spin-flip spectrum via
the Hermitian square-root construction, so tests cross-check rather than echo
the implementation.
"""

import numpy as np
import pytest

from entshare.states import PureState


def oracle_reduce(amps: np.ndarray, dims, keep) -> np.ndarray:
    """Reduced density matrix by direct summation over the traced basis."""
    dims = list(dims)
    keep = sorted(keep)
    traced = [i for i in range(len(dims)) if i not in keep]
    dk = int(np.prod([dims[i] for i in keep]))
    psi = amps.reshape(dims)
    rho = np.zeros((dk, dk), dtype=complex)
    tr_shapes = [range(dims[i]) for i in traced]
    import itertools

    for assign in itertools.product(*tr_shapes):
        slicer = [slice(None)] * len(dims)
        for ax, val in zip(traced, assign):
            slicer[ax] = val
        block = psi[tuple(slicer)].reshape(-1)
        rho += np.outer(block, block.conj())
    return rho


_SY = np.array([[0, -1j], [1j, 0]])
_YY = np.kron(_SY, _SY)


def oracle_spin_flip_spectrum(rho: np.ndarray) -> np.ndarray:
    """Spin-flip lambdas via the Hermitian sqrt(sqrt(rho) rho~ sqrt(rho)) route."""
    w, v = np.linalg.eigh(rho)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    tilde = _YY @ rho.conj() @ _YY
    inner = sq @ tilde @ sq
    lam2 = np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0, None)
    return np.sort(np.sqrt(lam2))[::-1]


def oracle_wootters(rho: np.ndarray) -> float:
    lam = oracle_spin_flip_spectrum(rho)
    return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))


def oracle_lambda_sum(rho: np.ndarray) -> float:
    return float(oracle_spin_flip_spectrum(rho).sum())


def random_two_qubit_mixed(seed: int, rank: int) -> np.ndarray:
    """Induced-measure random two-qubit state of the given rank."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((4, rank)) + 1j * rng.standard_normal((4, rank))
    z /= np.linalg.norm(z)
    return z @ z.conj().T


@pytest.fixture
def bell() -> PureState:
    return PureState(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2))
