"""Independent ground truth for the hierarchy engine.

* exact finite-volume Gibbs correlation functions by enumerating all ``2**M``
  lattice configurations;
* a Gillespie simulation of the lattice birth-death chain;
* a positive-definiteness probe built from local occupation patterns.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .configs import PairingWeights, SymFn, as_config, basis_for, norm_K_C, subsets
from .lattice import DomainError, DomainSpec, Potential, c_phi
from .operators import apply_L_hat_star, truncation_tail_bound

MAX_ENUMERATION_SITES = 16


@dataclass(frozen=True)
class GibbsSpec:
    z: float
    pot: Potential
    dom: DomainSpec

    def __post_init__(self):
        if not self.z > 0:
            raise DomainError("activity must be positive")
        if self.dom.num_sites > MAX_ENUMERATION_SITES:
            raise DomainError(
                f"enumeration over 2^{self.dom.num_sites} configurations refused "
                f"(limit {MAX_ENUMERATION_SITES} sites)")

    @property
    def particle_weight(self) -> float:
        return self.z * self.dom.volume_element


def _occupations(M: int) -> np.ndarray:
    masks = np.arange(1 << M, dtype=np.int64)
    return ((masks[:, None] >> np.arange(M)) & 1).astype(float)


def gibbs_probabilities(spec: GibbsSpec) -> np.ndarray:
    """Probability of every configuration, indexed by its site bitmask."""
    M = spec.dom.num_sites
    occ = _occupations(M)
    phi = spec.pot.interaction_table(M)
    energy = 0.5 * np.einsum("ci,ij,cj->c", occ, phi, occ)
    log_w = occ.sum(axis=1) * math.log(spec.particle_weight) - energy
    log_w -= log_w.max()
    weights = np.exp(log_w)
    return weights / math.fsum(weights)


def exact_gibbs_correlations(spec: GibbsSpec, max_order: int) -> SymFn:
    """Correlation function ``k(eta) = P(eta inside gamma) / h**|eta|`` of the lattice gas."""
    M = spec.dom.num_sites
    probs = gibbs_probabilities(spec)
    masks = np.arange(1 << M, dtype=np.int64)
    basis = basis_for(M, max_order)
    h = spec.dom.volume_element
    vals = np.empty(len(basis))
    for i, eta in enumerate(basis.configs):
        m = sum(1 << x for x in eta)
        vals[i] = math.fsum(probs[(masks & m) == m]) / h ** len(eta)
    return SymFn(basis, vals)


def gibbs_fixed_point_residual(k_mu: SymFn, params, pot: Potential, dom: DomainSpec,
                               C: float) -> float:
    """``||L_hat_star k_mu||`` in the K_C norm; zero for an exact stationary state."""
    return norm_K_C(apply_L_hat_star(k_mu, params, pot, dom), C)


def gibbs_residual_tolerance(k_mu: SymFn, params, pot: Potential, dom: DomainSpec,
                             C: float) -> float:
    """Analytic tail of the dropped kernel orders plus round-off."""
    cap = params.resolved_xi_cap(k_mu.max_order)
    tail = truncation_tail_bound(norm_K_C(k_mu, C), C, c_phi(pot, dom), cap)
    return tail + 10 * np.finfo(float).eps * len(k_mu.basis) * dom.num_sites


# Monte Carlo


@dataclass(frozen=True)
class McConfig:
    dom: DomainSpec
    pot: Potential
    z: float
    t_end: float
    burn_in: float = 0.0
    seed: int = 0
    replicas: int = 1
    batches: int = 20

    def __post_init__(self):
        if self.z < 0 or not math.isfinite(self.z):
            raise DomainError(f"activity must be finite and >= 0, got {self.z}")
        if not self.t_end > self.burn_in >= 0:
            raise DomainError("need t_end > burn_in >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.replicas < 1:
            raise DomainError("replicas must be positive")
        if self.batches < 2:
            raise DomainError("need at least two batches for standard errors")


@dataclass
class McResult:
    estimate: SymFn
    stderr: SymFn
    events: int
    absorbed: bool
    seed: int
    replicas: int

    def to_csv(self) -> str:
        lines = ["order,sites,estimate,stderr"]
        for (eta, v), s in zip(self.estimate.items(), self.stderr.values.tolist()):
            lines.append(f"{len(eta)},{' '.join(map(str, eta))},{v:.17g},{s:.17g}")
        return "\n".join(lines) + "\n"


def _replica_path(cfg: McConfig, rng: np.random.Generator, initial=()):
    """One Gillespie path; returns the visited states (bitmasks), holding times, event count."""
    M = cfg.dom.num_sites
    h = cfg.dom.volume_element
    phi = cfg.pot.interaction_table(M)
    occ = np.zeros(M, dtype=bool)
    occ[list(initial)] = True
    energy = phi @ occ
    zh = cfg.z * h
    t = 0.0
    states, starts = [], []
    events = 0
    absorbed = False
    chunk = 4096
    expo = rng.standard_exponential(chunk)
    unif = rng.random(chunk)
    j = 0
    while t < cfg.t_end:
        with np.errstate(over="ignore", invalid="ignore"):
            rates = np.where(occ, 1.0, zh * np.exp(-energy))
            cum = np.cumsum(rates)
        total = cum[-1]
        if not math.isfinite(total):
            raise OverflowError(f"total event rate overflowed at t={t}")
        states.append(int(np.dot(occ, 1 << np.arange(M))))
        starts.append(t)
        if total == 0.0:
            absorbed = True
            break
        if j == chunk:
            expo = rng.standard_exponential(chunk)
            unif = rng.random(chunk)
            j = 0
        t += expo[j] / total
        x = min(int(np.searchsorted(cum, unif[j] * total, side="right")), M - 1)
        j += 1
        if t >= cfg.t_end:
            break
        if occ[x]:
            occ[x] = False
            energy -= phi[x]
        else:
            occ[x] = True
            energy += phi[x]
        if t > cfg.burn_in:
            events += 1
    starts = np.asarray(starts)
    ends = np.append(starts[1:], cfg.t_end)
    return np.asarray(states, dtype=np.int64), starts, ends, events, absorbed


def mc_birth_death(cfg: McConfig, n_est: int = 2, initial=()) -> McResult:
    """Time-averaged correlation estimates of the lattice birth-death chain.

    Every site carries rate 1 when occupied (death) and ``z h exp(-E)`` when
    empty (birth). After ``burn_in`` the occupation of each tuple is averaged
    over time and divided by ``h**n``. Standard errors come from equal-time
    batches pooled over replicas.
    """
    M = cfg.dom.num_sites
    h = cfg.dom.volume_element
    basis = basis_for(M, n_est)
    masks = np.array([sum(1 << x for x in eta) for eta in basis.configs], dtype=np.int64)
    edges = np.linspace(cfg.burn_in, cfg.t_end, cfg.batches + 1)
    batch_means = []
    total_events = 0
    absorbed_any = False
    for r in range(cfg.replicas):
        rng = np.random.Generator(np.random.Philox(cfg.seed ^ r))
        states, starts, ends, events, absorbed = _replica_path(cfg, rng, initial)
        total_events += events
        absorbed_any |= absorbed
        lo = np.maximum(starts[:, None], edges[None, :-1])
        hi = np.minimum(ends[:, None], edges[None, 1:])
        overlap = np.clip(hi - lo, 0.0, None)
        hit = ((states[:, None] & masks[None, :]) == masks[None, :]).astype(float)
        batch_means.append(overlap.T @ hit / np.diff(edges)[:, None])
    means = np.vstack(batch_means) / h ** basis.orders.astype(float)
    est = means.mean(axis=0)
    se = means.std(axis=0, ddof=1) / math.sqrt(means.shape[0])
    return McResult(SymFn(basis, est), SymFn(basis, se), total_events, absorbed_any,
                    cfg.seed, cfg.replicas)


# positivity


MAX_PROBE_WINDOW = 10


@dataclass
class PositivityReport:
    window: tuple[int, ...]
    patterns: dict[tuple[int, ...], float]
    tolerance: float

    @property
    def min_value(self) -> float:
        return min(self.patterns.values())

    @property
    def total(self) -> float:
        return math.fsum(self.patterns.values())

    @property
    def passed(self) -> bool:
        return self.min_value >= -self.tolerance


def pattern_observable(xi, window) -> Callable[[tuple[int, ...]], float]:
    """Indicator that the configuration restricted to ``window`` equals ``xi``."""
    xi, window = frozenset(xi), frozenset(window)
    return lambda gamma: float(frozenset(gamma) & window == xi)


def pattern_quasi_observable(xi, eta) -> float:
    """Closed form of ``k_inverse`` of :func:`pattern_observable` at ``eta`` inside the window."""
    xi, eta = set(xi), set(eta)
    if not xi <= eta:
        return 0.0
    return float((-1) ** (len(eta) - len(xi)))


def positivity_probe(k: SymFn, window, weights: PairingWeights) -> PositivityReport:
    """Probabilities of every occupation pattern of ``window`` under the measure with correlation ``k``.

    The tolerance bounds what truncation at ``max_order`` can hide: for a genuine
    correlation function ``w^|eta| k(eta)`` is monotone under inclusion, so the
    first dropped order is bounded through the stored top order and caps the
    truncated inclusion-exclusion sum.
    """
    window = as_config(window)
    if len(window) > MAX_PROBE_WINDOW:
        raise DomainError(f"window of {len(window)} sites exceeds {MAX_PROBE_WINDOW}")
    for x in window:
        if not 0 <= x < k.basis.num_sites:
            raise DomainError(f"site {x} outside the box")
    w = weights.weight_per_point
    N = k.max_order
    mass = {eta: w ** len(eta) * k(eta) for eta in subsets(window)}
    patterns = {}
    for xi in subsets(window):
        outer = [y for y in window if y not in xi]
        patterns[xi] = math.fsum(
            pattern_quasi_observable(xi, xi + extra) * mass[as_config(xi + extra)]
            for extra in subsets(outer))

    def top(eta):
        return min(abs(mass[zeta]) for zeta in itertools.combinations(eta, N))

    tail = 0.0
    for xi in subsets(window):
        if len(xi) > N:
            tail = max(tail, top(xi))
            continue
        outer = [y for y in window if y not in xi]
        dropped = math.fsum(top(as_config(xi + extra))
                            for extra in itertools.combinations(outer, N + 1 - len(xi)))
        tail = max(tail, dropped)
    return PositivityReport(window, patterns, tail + 1e-9)
