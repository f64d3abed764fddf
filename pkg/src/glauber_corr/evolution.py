"""Time stepping of correlation functions and the audits run on trajectories.

A trajectory is ``(P_delta_star)**n k0`` for ``n = 0 .. [t_end / delta]``.
Norms are logged at every step, while full states are kept only every
``stride`` steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .configs import SymFn, norm_K_C
from .lattice import DomainError, DomainSpec, Potential, c_phi
from .operators import OperatorParams, step_matrix, truncation_tail_bound
from .regime import nu_star

EPS = np.finfo(float).eps


class EvolutionError(FloatingPointError):
    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite value at step {step}")


def default_delta(max_order: int) -> float:
    return min(0.05, 0.5 / max_order) if max_order > 0 else 0.05


def num_steps(t_end: float, delta: float) -> int:
    """``[t_end / delta]``, robust to the rounding of e.g. ``8 / 0.02``."""
    if t_end < 0:
        raise DomainError("t_end must be nonnegative")
    ratio = t_end / delta
    n = math.floor(ratio)
    if ratio - n > 1 - 1e-9:
        n += 1
    return n


@dataclass
class Trajectory:
    delta: float
    times: list[float] = field(default_factory=list)
    states: list[SymFn] = field(default_factory=list)
    step_times: list[float] = field(default_factory=list)
    norm_C: list[float] = field(default_factory=list)
    norm_alphaC: list[float] = field(default_factory=list)
    dist_ref_C: list[float] = field(default_factory=list)
    operations: int = 0

    @property
    def final(self) -> SymFn:
        return self.states[-1]

    def norm_rows(self):
        return zip(self.step_times, self.norm_C, self.norm_alphaC, self.dist_ref_C)


def _weighted_max(v: np.ndarray, scale: np.ndarray) -> float:
    return float(np.max(np.abs(v) * scale))


def evolve_star(k0: SymFn, t_end: float, params: OperatorParams, pot: Potential, dom: DomainSpec,
                stride: int = 1, *, C: float, alpha: float = 1.0,
                k_ref: SymFn | None = None) -> Trajectory:
    """Iterate the dual one-step map, logging ``||k_t||`` in the C and alpha*C norms."""
    if stride < 1:
        raise DomainError("stride must be positive")
    if not np.all(np.isfinite(k0.values)):
        raise EvolutionError(0, "initial condition has non-finite entries")
    if not C > 1 or not alpha * C > 1:
        raise DomainError("need C > 1 and alpha*C > 1")
    n = num_steps(t_end, params.delta)
    orders = k0.basis.orders.astype(float)
    scale_C = float(C) ** -orders
    scale_aC = float(alpha * C) ** -orders
    P = step_matrix(params, pot, dom, k0.max_order, dual=True)
    ref = None if k_ref is None else k_ref.truncate(k0.max_order).values

    traj = Trajectory(params.delta)
    v = np.array(k0.values)
    for j in range(n + 1):
        if j > 0:
            with np.errstate(over="ignore", invalid="ignore"):
                v = P @ v
            traj.operations += 2 * P.nnz
            if not np.all(np.isfinite(v)):
                raise EvolutionError(j)
        t = j * params.delta
        traj.step_times.append(t)
        traj.norm_C.append(_weighted_max(v, scale_C))
        traj.norm_alphaC.append(_weighted_max(v, scale_aC))
        traj.dist_ref_C.append(math.nan if ref is None else _weighted_max(v - ref, scale_C))
        if j % stride == 0 or j == n:
            traj.times.append(t)
            traj.states.append(SymFn(k0.basis, v))
    return traj


def evolve_forward(G0: SymFn, t_end: float, params: OperatorParams, pot: Potential,
                   dom: DomainSpec) -> SymFn:
    P = step_matrix(params, pot, dom, G0.max_order, dual=False)
    v = np.array(G0.values)
    for j in range(1, num_steps(t_end, params.delta) + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            v = P @ v
        if not np.all(np.isfinite(v)):
            raise EvolutionError(j)
    return SymFn(G0.basis, v)


@dataclass
class AuditResult:
    value: float
    bound: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.value <= self.bound + self.tolerance

    @property
    def margin(self) -> float:
        return self.bound + self.tolerance - self.value


def contraction_tolerance(params: OperatorParams, pot: Potential, dom: DomainSpec, C: float,
                          max_order: int, nnz: int = 0) -> float:
    """Truncation tail of the kernel integrals for a unit-norm input, plus round-off."""
    cap = params.resolved_xi_cap(max_order)
    return truncation_tail_bound(1.0, C, c_phi(pot, dom), cap) + 10 * EPS * nnz


def contraction_audit(samples, params: OperatorParams, pot: Potential, dom: DomainSpec,
                      C: float) -> AuditResult:
    """Worst ``||P k|| / ||k||`` over samples vanishing at the empty configuration."""
    samples = list(samples)
    if not samples:
        raise DomainError("no samples")
    nu = nu_star(params.z, C, c_phi(pot, dom))
    worst = 0.0
    P = None
    for k in samples:
        if k(()) != 0:
            raise DomainError("contraction audit needs k(empty) = 0")
        den = norm_K_C(k, C)
        if den == 0:
            raise DomainError("zero sample: ratio undefined")
        if P is None:
            P = step_matrix(params, pot, dom, k.max_order)
        worst = max(worst, norm_K_C(SymFn(k.basis, P @ k.values), C) / den)
    tol = contraction_tolerance(params, pot, dom, C, samples[0].max_order, P.nnz)
    return AuditResult(worst, 1 - (1 - nu) * params.delta, tol)


@dataclass
class DecayReport:
    times: np.ndarray
    errors: np.ndarray
    rate: float
    tolerance: float
    slope: float = math.nan
    fit_window: tuple[float, float] = (math.nan, math.nan)
    trivially_converged: bool = False

    @property
    def e0(self) -> float:
        return float(self.errors[0])

    def envelope(self) -> np.ndarray:
        return np.exp(-self.rate * self.times) * self.e0

    @property
    def bound_ok(self) -> bool:
        return bool(np.all(self.errors <= self.envelope() + 10 * self.tolerance))

    @property
    def slope_ok(self) -> bool:
        if self.trivially_converged:
            return True
        return self.slope <= -self.rate + 0.05

    @property
    def passed(self) -> bool:
        return self.bound_ok and self.slope_ok


def fit_log_slope(times: np.ndarray, errors: np.ndarray, floor: float) -> tuple[float, tuple[float, float]]:
    """Least-squares slope of ``log e`` over the middle third of the span where ``e > floor``."""
    above = np.flatnonzero(errors > floor)
    if above.size == 0:
        return math.nan, (math.nan, math.nan)
    # first contiguous run from the start
    stop = above[0]
    while stop + 1 < errors.size and errors[stop + 1] > floor:
        stop += 1
    t0, t1 = times[above[0]], times[stop]
    lo, hi = t0 + (t1 - t0) / 3, t0 + 2 * (t1 - t0) / 3
    sel = (times >= lo) & (times <= hi) & (errors > floor)
    if sel.sum() < 2:
        return math.nan, (lo, hi)
    slope = np.polyfit(times[sel], np.log(errors[sel]), 1)[0]
    return float(slope), (float(lo), float(hi))


def ergodic_decay_report(k0: SymFn, k_mu: SymFn, t_end: float, params: OperatorParams,
                         pot: Potential, dom: DomainSpec, C: float,
                         tolerance: float | None = None) -> DecayReport:
    """Distance of the trajectory to ``k_mu`` against the guaranteed exponential envelope.

    Unless given, the tolerance is the closure defect of ``k_mu`` under one step,
    summed over the contraction: ``||P k_mu - k_mu|| / ((1 - nu*) delta)``.
    """
    nu = nu_star(params.z, C, c_phi(pot, dom))
    rate = 1 - nu
    k_mu = k_mu.truncate(k0.max_order)
    traj = evolve_star(k0, t_end, params, pot, dom, stride=max(1, num_steps(t_end, params.delta)),
                       C=C, k_ref=k_mu)
    if tolerance is None:
        P = step_matrix(params, pot, dom, k0.max_order)
        defect = norm_K_C(SymFn(k_mu.basis, P @ k_mu.values - k_mu.values), C)
        tolerance = defect / (rate * params.delta) + 10 * EPS * traj.operations
    times = np.asarray(traj.step_times)
    errors = np.asarray(traj.dist_ref_C)
    rep = DecayReport(times, errors, rate, tolerance)
    if errors[0] == 0:
        rep.trivially_converged = True
        return rep
    rep.slope, rep.fit_window = fit_log_slope(times, errors, 100 * tolerance)
    return rep


def invariance_audit(traj: Trajectory, alpha: float, C: float, tolerance: float = 0.0) -> AuditResult:
    """Largest ``||k_t||`` in the alpha*C norm over the snapshots, against its initial value."""
    values = [norm_K_C(k, alpha * C) for k in traj.states]
    return AuditResult(max(values), values[0], tolerance + 10 * EPS * max(traj.operations, 1))
