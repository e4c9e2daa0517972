"""Bipartite correlation measures: exact closed forms and a convex-roof optimizer.

Built-in measures are the concurrence and the two assistance measures built on
it (concurrence of assistance, and the assistance measure used for the
polygamy bounds). On two qubits everything has a closed form via the
spin-flip spectrum; pure states are exact at any dimension; all remaining
mixed-state cases are estimated by the convex-roof optimizer, flagged as
estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import (
    DimensionError,
    InvalidParameterError,
    InvalidPartitionError,
    OptimizerConfigError,
)
from .states import Bipartition, DensityMatrix, PureState

EXACT = "exact"
UPPER_ESTIMATE = "upper-estimate"
LOWER_ESTIMATE = "lower-estimate"

_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_YY = np.kron(_SY, _SY)


@dataclass(frozen=True)
class MeasureValue:
    """A measure evaluation plus how much to trust it."""

    value: float
    exactness: str
    optimizer_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0:
            raise InvalidParameterError(f"measure value must be non-negative, got {self.value}")
        if self.exactness not in (EXACT, UPPER_ESTIMATE, LOWER_ESTIMATE):
            raise InvalidParameterError(f"unknown exactness flag {self.exactness!r}")
        if self.exactness == EXACT and self.optimizer_meta:
            raise InvalidParameterError("exact values carry no optimizer metadata")

    @property
    def exact(self) -> bool:
        return self.exactness == EXACT


@dataclass(frozen=True)
class OptimizerConfig:
    """Convex-roof optimizer settings.

    ensemble_size None means rank + 2; the two spare ensemble members matter
    for separable states, whose optimal decompositions can need more members
    than the rank.
    """

    ensemble_size: int | None = None
    restarts: int = 16
    max_iters: int = 500
    tol: float = 1e-8
    seed: int = 17

    def margin(self) -> float:
        """Comparison margin for estimate-backed inequalities."""
        return 10.0 * self.tol + 1e-9

    @classmethod
    def from_dict(cls, doc: dict) -> OptimizerConfig:
        known = {f for f in cls.__dataclass_fields__}
        bad = set(doc) - known
        if bad:
            raise OptimizerConfigError(f"unknown optimizer settings: {sorted(bad)}")
        return cls(**doc)


DEFAULT_OPT = OptimizerConfig()


@dataclass(frozen=True)
class CorrelationMeasure:
    """A named bipartite measure with its configured exponent powers.

    beta_max is the largest exponent for which the power-sum lower-bound
    relation is taken to hold, x_min the smallest exponent for the power-sum
    upper-bound relation. Both are per-measure configuration.
    """

    name: str
    beta_max: float = 2.0
    x_min: float = 2.0
    mode: str = "exact-preferred"

    def __post_init__(self):
        if self.beta_max <= 0 or self.x_min <= 0:
            raise InvalidParameterError("beta_max and x_min must be positive")

    @property
    def assistance(self) -> bool:
        return self.name in ("concurrence_assistance", "tau_assistance")


CONCURRENCE = CorrelationMeasure("concurrence")
CONCURRENCE_ASSISTANCE = CorrelationMeasure("concurrence_assistance")
TAU_ASSISTANCE = CorrelationMeasure("tau_assistance")

_MEASURES = {m.name: m for m in (CONCURRENCE, CONCURRENCE_ASSISTANCE, TAU_ASSISTANCE)}


def get_measure(name: str) -> CorrelationMeasure:
    try:
        return _MEASURES[name]
    except KeyError:
        raise InvalidParameterError(
            f"unsupported measure {name!r}; built-ins: {sorted(_MEASURES)}"
        ) from None


def _cut_shape(state_dims: tuple[int, ...], cut: Bipartition) -> tuple[list[int], int, int]:
    """Permutation bringing side_a parties first, plus the two side dimensions."""
    n = len(state_dims)
    if not cut.covers(n):
        raise InvalidPartitionError(
            f"cut {sorted(cut.side_a)}|{sorted(cut.side_b)} does not cover parties 0..{n - 1}"
        )
    order = sorted(cut.side_a) + sorted(cut.side_b)
    da = math.prod(state_dims[i] for i in cut.side_a)
    db = math.prod(state_dims[i] for i in cut.side_b)
    return order, da, db


def _cut_matrix(state: PureState, cut: Bipartition) -> np.ndarray:
    """Amplitudes reshaped to a (side_a x side_b) matrix."""
    order, da, db = _cut_shape(state.dims, cut)
    t = state.amplitudes.reshape(state.dims).transpose(order)
    return t.reshape(da, db)


def concurrence_pure(state: PureState, cut: Bipartition) -> MeasureValue:
    """sqrt(2 (1 - tr rho_A^2)) across the cut; exact."""
    m = _cut_matrix(state, cut)
    s2 = np.linalg.svd(m, compute_uv=False) ** 2
    val = 2.0 * max(0.0, 1.0 - float(np.sum(s2**2)))
    return MeasureValue(math.sqrt(val), EXACT)


def _spin_flip_spectrum(rho: DensityMatrix) -> np.ndarray:
    """Spin-flip lambdas as singular values of Y^T (sy x sy) Y with rho = Y Y^H.

    Equivalent to the square roots of the eigenvalues of rho rho~, but exact
    for rank-deficient states where the non-Hermitian eigenvalue route loses
    half the working precision.
    """
    if rho.dims != (2, 2):
        raise DimensionError(f"two-qubit operator required, got dims {rho.dims}")
    w, v = rho.eigensystem()
    keep = w > 1e-15
    y = v[:, keep] * np.sqrt(w[keep])
    t = y.T @ _YY.real @ y
    lam = np.zeros(4)
    sv = np.linalg.svd(t, compute_uv=False)
    lam[: sv.size] = sv
    return lam


def wootters_concurrence(rho: DensityMatrix) -> MeasureValue:
    """Two-qubit mixed-state concurrence, max(0, l1 - l2 - l3 - l4)."""
    lam = _spin_flip_spectrum(rho)
    return MeasureValue(max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3])), EXACT)


def assistance_2q(rho: DensityMatrix) -> MeasureValue:
    """Two-qubit assistance value, l1 + l2 + l3 + l4."""
    lam = _spin_flip_spectrum(rho)
    return MeasureValue(float(lam.sum()), EXACT)


def measure_bipartite(
    measure: CorrelationMeasure,
    state: PureState | DensityMatrix,
    cut: Bipartition,
    opt: OptimizerConfig = DEFAULT_OPT,
) -> MeasureValue:
    """Dispatch a measure across a cut: exact where possible, roof estimate otherwise.

    Exact paths: globally pure states (assistance measures reduce to the pure
    concurrence there: the ensemble is forced), and 2x2 mixed states via the
    spin-flip closed forms.
    """
    if measure.name not in _MEASURES:
        raise InvalidParameterError(f"unsupported measure {measure.name!r}")
    if isinstance(state, PureState):
        return concurrence_pure(state, cut)
    pure = state.as_pure()
    if pure is not None:
        return concurrence_pure(pure, cut)
    order, da, db = _cut_shape(state.dims, cut)
    if da == 2 and db == 2:
        two_qubit = _permute_density(state, order)
        return assistance_2q(two_qubit) if measure.assistance else wootters_concurrence(two_qubit)
    direction = "maximize" if measure.assistance else "minimize"
    return convex_roof(state, cut, None, direction, opt)


def _permute_density(rho: DensityMatrix, order: list[int]) -> DensityMatrix:
    n = len(rho.dims)
    dims = [rho.dims[i] for i in order]
    perm = list(order) + [n + i for i in order]
    t = rho.matrix.reshape(rho.dims + rho.dims).transpose(perm)
    d = math.prod(dims)
    return DensityMatrix(t.reshape(d, d), tuple(dims))


# --- convex-roof optimizer ----------------------------------------------------
#
# Every size-m ensemble of rho arises as psi_k = sum_j W_kj sqrt(mu_j) |e_j>
# with W the first r columns of an m x m unitary, parameterized as the
# exponential of an anti-Hermitian matrix (m^2 real parameters). The average
# concurrence is sum_k of the degree-2 homogeneous pure value
# c_k = sqrt(2 (|psi_k|^4 - tr rhoA_k^2)), smoothed near its kinks so L-BFGS
# gets an exact analytic gradient; reported values are always re-evaluated
# unsmoothed, so a minimize result is a true achievable ensemble average.


def _theta_to_antiherm(theta: np.ndarray, m: int) -> np.ndarray:
    a = np.zeros((m, m), dtype=complex)
    iu = np.triu_indices(m, 1)
    npair = len(iu[0])
    re, im, di = theta[:npair], theta[npair : 2 * npair], theta[2 * npair :]
    a[iu] = re + 1j * im
    a[(iu[1], iu[0])] = -re + 1j * im
    a[np.diag_indices(m)] = 1j * di
    return a


def _members(theta, vfac, m, r, da, db):
    a = _theta_to_antiherm(theta, m)
    lam, v = np.linalg.eigh(a / 1j)
    ph = np.exp(1j * lam)
    u = (v * ph) @ v.conj().T
    w = u[:, :r]
    psi = vfac @ w.T
    mem = psi.T.reshape(m, da, db)
    return mem, (lam, v, ph, w)


def _member_values(mem) -> np.ndarray:
    g = np.einsum("kab,kcb->kac", mem, mem.conj())
    t = np.einsum("kaa->k", g).real
    f = np.einsum("kab,kba->k", g, g).real
    return np.sqrt(np.maximum(2.0 * (t * t - f), 0.0))


def _roof_objective(theta, vfac, m, r, da, db, sign, eps2):
    """Smoothed ensemble average and its gradient in the theta parameters."""
    mem, (lam, v, ph, _) = _members(theta, vfac, m, r, da, db)
    g = np.einsum("kab,kcb->kac", mem, mem.conj())
    t = np.einsum("kaa->k", g).real
    f = np.einsum("kab,kba->k", g, g).real
    c2 = np.maximum(2.0 * (t * t - f), 0.0)
    ce = np.sqrt(c2 + eps2)
    val = sign * float(ce.sum())

    ti_minus_g = t[:, None, None] * np.eye(da)[None, :, :] - g
    k = 4.0 / ce[:, None, None] * np.einsum("kab,kbc->kac", ti_minus_g, mem)
    kap = k.reshape(m, da * db)
    gw = (kap.conj() @ vfac).conj()
    gu = np.zeros((m, m), dtype=complex)
    gu[:, :r] = gw
    p = v.conj().T @ gu @ v
    dl = lam[:, None] - lam[None, :]
    close = np.abs(dl) < 1e-12
    gam = np.where(close, ph[:, None] * np.ones_like(dl), (ph[:, None] - ph[None, :]) / (1j * np.where(close, 1.0, dl)))
    s = v.conj() @ (p.conj() * gam) @ v.T
    iu = np.triu_indices(m, 1)
    g_re = np.real(s[iu] - s[(iu[1], iu[0])])
    g_im = -np.imag(s[iu] + s[(iu[1], iu[0])])
    g_di = -np.imag(np.diag(s))
    return val, sign * np.concatenate([g_re, g_im, g_di])


def convex_roof(
    rho: DensityMatrix,
    cut: Bipartition,
    pure_fn,
    direction: str,
    opt: OptimizerConfig = DEFAULT_OPT,
) -> MeasureValue:
    """Optimize the ensemble-average pure measure over all decompositions of rho.

    pure_fn None selects the built-in pure concurrence across the cut (fast,
    analytic gradient); a custom callable PureState -> float is evaluated
    per ensemble member without gradients. Returns the best value across
    restarts: an upper estimate when minimizing, a lower estimate when
    maximizing. Deterministic for a fixed (seed, restarts); ties go to the
    earliest restart.
    """
    if direction not in ("minimize", "maximize"):
        raise InvalidParameterError(f"direction must be minimize or maximize, got {direction!r}")
    order, da, db = _cut_shape(rho.dims, cut)
    w, v = rho.eigensystem()
    keep = w > 1e-12
    r = int(np.count_nonzero(keep))
    m = opt.ensemble_size if opt.ensemble_size is not None else r + 2
    if m < r:
        raise OptimizerConfigError(f"ensemble_size {m} is below the state rank {r}")
    vfac = v[:, keep] * np.sqrt(w[keep])
    flag = UPPER_ESTIMATE if direction == "minimize" else LOWER_ESTIMATE

    if r == 1:
        base = PureState(vfac[:, 0] / np.linalg.norm(vfac[:, 0]), rho.dims)
        val = concurrence_pure(base, cut).value if pure_fn is None else float(pure_fn(base))
        return MeasureValue(max(0.0, val), flag, {"restarts": 0, "rank": 1, "iterations": 0})

    # gather map: column in cut order = column[original order] at these indices
    flatperm = np.arange(vfac.shape[0]).reshape(rho.dims).transpose(order).reshape(-1)
    vfac_cut = vfac[flatperm, :]
    sign = 1.0 if direction == "minimize" else -1.0

    if pure_fn is None:
        def value_at(theta):
            mem, _ = _members(theta, vfac_cut, m, r, da, db)
            return float(_member_values(mem).sum())

        objective = lambda theta: _roof_objective(theta, vfac_cut, m, r, da, db, sign, 1e-12)
        jac = True
    else:
        def value_at(theta):
            mem, _ = _members(theta, vfac, m, r, 1, vfac.shape[0])
            total = 0.0
            for k in range(m):
                vec = mem[k].reshape(-1)
                p = float(np.vdot(vec, vec).real)
                if p > 1e-14:
                    total += p * float(pure_fn(PureState(vec / math.sqrt(p), rho.dims)))
            return total

        objective = lambda theta: sign * value_at(theta)
        jac = None

    rng = np.random.default_rng(opt.seed)
    best = math.inf
    best_meta = {}
    for rs in range(opt.restarts):
        x0 = np.zeros(m * m) if rs == 0 else rng.standard_normal(m * m) * 0.7
        res = minimize(
            objective,
            x0,
            jac=jac,
            method="L-BFGS-B",
            options={"maxiter": opt.max_iters, "ftol": opt.tol * 1e-4, "gtol": 1e-10},
        )
        val = value_at(res.x)
        if sign * val < best:
            best = sign * val
            best_meta = {"restarts": opt.restarts, "best_restart": rs,
                         "iterations": int(res.nit), "converged": bool(res.success)}
    return MeasureValue(max(0.0, sign * best), flag, best_meta)
