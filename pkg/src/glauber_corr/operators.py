"""Hierarchy operators of the Glauber dynamics on the truncated lattice space.

Every operator is linear on the finite basis of configurations, so it is
materialized once as a sparse matrix and applied by a mat-vec. The four
builders below are written independently from their own formulas; the
duality between ``L_hat``/``L_hat_star`` and ``P_delta``/``P_delta_star`` is
therefore a genuine check, not a construction.

Lattice conventions shared by all four:

* with ``on_site="exclude"`` the inner configurations (the ``x`` of the birth
  term, the ``omega`` and ``xi`` integrals) avoid the occupied sites; with
  ``on_site="hard-core"`` they may land there and pick up the Mayer factor -1;
* the inner integrals carrying the ``exp(-phi) - 1`` kernel are capped at
  ``xi_cap`` points, the rest of the bookkeeping only by ``max_order``;
* functions are read as 0 above ``max_order``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse

from .configs import SymFn, basis_for, norm_K_C, subsets
from .lattice import DomainError, DomainSpec, Potential

DEFAULT_XI_CAP = 3

ON_SITE_MODES = ("exclude", "hard-core")


@dataclass(frozen=True)
class OperatorParams:
    """Activity, time step, inner-integral cap and diagonal convention.

    ``on_site="exclude"`` drops every term where an integrated point sits on
    an occupied site (continuum quadrature; the Poisson field ``z**|eta|`` is
    an exact fixed point at zero potential). ``on_site="hard-core"`` keeps
    those terms with the lattice-gas factor ``exp(-inf) - 1 = -1``; the
    operators are then the exact hierarchy of the lattice birth-death chain
    sampled by :mod:`glauber_corr.oracles`.
    """

    z: float
    delta: float = 0.05
    xi_cap: int | None = None
    on_site: str = "exclude"

    def __post_init__(self):
        if not self.z > 0:
            raise DomainError(f"activity z must be positive, got {self.z}")
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if self.xi_cap is not None and self.xi_cap < 0:
            raise DomainError("xi_cap must be nonnegative")
        if self.on_site not in ON_SITE_MODES:
            raise DomainError(f"on_site must be one of {ON_SITE_MODES}, got {self.on_site!r}")

    @property
    def hard_core(self) -> bool:
        return self.on_site == "hard-core"

    def resolved_xi_cap(self, max_order: int) -> int:
        if self.xi_cap is None:
            return min(max_order, DEFAULT_XI_CAP)
        if self.xi_cap > max_order:
            raise DomainError(f"xi_cap {self.xi_cap} exceeds max_order {max_order}")
        return self.xi_cap


class _Kernel:
    """Pair tables shared by the builders.

    A point sitting on an occupied site has infinite energy (lattice gas);
    the builders only ask for such terms in hard-core mode.
    """

    def __init__(self, pot: Potential, dom: DomainSpec):
        M = dom.num_sites
        self.M = M
        self.h = dom.volume_element
        self.phi = pot.interaction_table(M)
        self.neighbors = [frozenset(np.flatnonzero(self.phi[x] > 0).tolist()) for x in range(M)]

    def energy(self, y: int, omega) -> float:
        return math.fsum(self.phi[y, w] for w in omega)

    def boltzmann(self, y: int, omega) -> float:
        if y in omega:
            return 0.0
        return math.exp(-self.energy(y, omega))

    def mayer(self, y: int, omega) -> float:
        """``exp(-E(y, omega)) - 1``, accurate for small energies."""
        if y in omega:
            return -1.0
        return math.expm1(-self.energy(y, omega))

    def interacts(self, y: int, omega) -> bool:
        return y in omega or not self.neighbors[y].isdisjoint(omega)


def _csr(entries, n: int) -> sparse.csr_matrix:
    if entries:
        rows, cols, vals = zip(*entries)
    else:
        rows, cols, vals = (), (), ()
    mat = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    return mat


def _merge(*parts) -> tuple[int, ...]:
    return tuple(sorted(itertools.chain(*parts)))


@lru_cache(maxsize=64)
def l_hat_matrix(dom: DomainSpec, pot: Potential, z: float, max_order: int,
                 xi_cap: int, hard_core: bool = False) -> sparse.csr_matrix:
    basis = basis_for(dom.num_sites, max_order)
    ker = _Kernel(pot, dom)
    index = basis.index
    entries = []
    for i, eta in enumerate(basis.configs):
        if eta:
            entries.append((i, i, -float(len(eta))))
        eta_set = set(eta)
        outside = [x for x in range(ker.M) if x not in eta_set]
        for xi in subsets(eta, max_order - 1):
            zeta = tuple(y for y in eta if y not in xi)
            if len(zeta) > xi_cap:
                continue
            # the Mayer product over zeta vanishes unless x interacts with every point of it
            xs = [x for x in outside if all(ker.interacts(y, (x,)) for y in zeta)]
            if hard_core:
                xs += [x for x in zeta if all(ker.interacts(y, (x,)) for y in zeta)]
            for x in xs:
                val = z * ker.h * ker.boltzmann(x, xi)
                for y in zeta:
                    val *= ker.mayer(y, (x,))
                entries.append((i, index[_merge(xi, (x,))], val))
    return _csr(entries, len(basis))


@lru_cache(maxsize=64)
def l_hat_star_matrix(dom: DomainSpec, pot: Potential, z: float, max_order: int,
                      xi_cap: int, hard_core: bool = False) -> sparse.csr_matrix:
    basis = basis_for(dom.num_sites, max_order)
    ker = _Kernel(pot, dom)
    index = basis.index
    entries = []
    for i, eta in enumerate(basis.configs):
        if not eta:
            continue
        entries.append((i, i, -float(len(eta))))
        for x in eta:
            rest = tuple(y for y in eta if y != x)
            base = z * ker.boltzmann(x, rest)
            cap = min(xi_cap, max_order - len(rest))
            cand = sorted(ker.neighbors[x] - set(eta))
            if hard_core:
                cand = sorted(cand + [x])
            for m in range(cap + 1):
                for xi in itertools.combinations(cand, m):
                    val = base * ker.h ** m
                    for y in xi:
                        val *= ker.mayer(y, (x,))
                    entries.append((i, index[_merge(rest, xi)], val))
    return _csr(entries, len(basis))


@lru_cache(maxsize=64)
def p_delta_matrix(dom: DomainSpec, pot: Potential, z: float, delta: float, max_order: int,
                   xi_cap: int, hard_core: bool = False) -> sparse.csr_matrix:
    basis = basis_for(dom.num_sites, max_order)
    ker = _Kernel(pot, dom)
    index = basis.index
    entries = []
    zdh = z * delta * ker.h
    for i, eta in enumerate(basis.configs):
        eta_set = set(eta)
        outside = [x for x in range(ker.M) if x not in eta_set]
        for xi in subsets(eta):
            zeta = tuple(y for y in eta if y not in xi)
            if len(zeta) > xi_cap:
                continue
            pool = sorted(outside + list(zeta)) if hard_core else outside
            for m in range(max_order - len(xi) + 1):
                for omega in itertools.combinations(pool, m):
                    if not all(ker.interacts(y, omega) for y in zeta):
                        continue
                    val = (1 - delta) ** len(xi) * zdh ** m
                    for y in xi:
                        val *= ker.boltzmann(y, omega)
                    for y in zeta:
                        val *= ker.mayer(y, omega)
                    entries.append((i, index[_merge(xi, omega)], val))
    return _csr(entries, len(basis))


@lru_cache(maxsize=64)
def p_delta_star_matrix(dom: DomainSpec, pot: Potential, z: float, delta: float, max_order: int,
                        xi_cap: int, hard_core: bool = False) -> sparse.csr_matrix:
    basis = basis_for(dom.num_sites, max_order)
    ker = _Kernel(pot, dom)
    index = basis.index
    entries = []
    for i, eta in enumerate(basis.configs):
        eta_set = set(eta)
        for omega in subsets(eta):
            rest = tuple(y for y in eta if y not in omega)
            base = (1 - delta) ** len(rest) * (z * delta) ** len(omega)
            for y in rest:
                base *= ker.boltzmann(y, omega)
            cap = min(xi_cap, max_order - len(rest))
            reach = set().union(*(ker.neighbors[w] for w in omega)) - eta_set
            if hard_core:
                reach |= set(omega)
            reach = sorted(reach)
            mayer = {y: ker.mayer(y, omega) for y in reach}
            for m in range(cap + 1):
                for xi in itertools.combinations(reach, m):
                    val = base * ker.h ** m
                    for y in xi:
                        val *= mayer[y]
                    entries.append((i, index[_merge(rest, xi)], val))
    return _csr(entries, len(basis))


def _apply(mat: sparse.csr_matrix, f: SymFn) -> SymFn:
    return SymFn(f.basis, mat @ f.values)


def _check_input(f: SymFn, dom: DomainSpec) -> None:
    if f.basis.num_sites != dom.num_sites:
        raise DomainError(f"function lives on {f.basis.num_sites} sites, domain has {dom.num_sites}")


def apply_L_hat(G: SymFn, params: OperatorParams, pot: Potential, dom: DomainSpec) -> SymFn:
    _check_input(G, dom)
    n = G.max_order
    return _apply(l_hat_matrix(dom, pot, params.z, n, params.resolved_xi_cap(n), params.hard_core), G)


def apply_L_hat_star(k: SymFn, params: OperatorParams, pot: Potential, dom: DomainSpec) -> SymFn:
    _check_input(k, dom)
    n = k.max_order
    return _apply(l_hat_star_matrix(dom, pot, params.z, n, params.resolved_xi_cap(n),
                                    params.hard_core), k)


def apply_P_delta(G: SymFn, params: OperatorParams, pot: Potential, dom: DomainSpec) -> SymFn:
    _check_input(G, dom)
    n = G.max_order
    return _apply(p_delta_matrix(dom, pot, params.z, params.delta, n,
                                 params.resolved_xi_cap(n), params.hard_core), G)


def apply_P_delta_star(k: SymFn, params: OperatorParams, pot: Potential,
                       dom: DomainSpec) -> SymFn:
    _check_input(k, dom)
    n = k.max_order
    return _apply(p_delta_star_matrix(dom, pot, params.z, params.delta, n,
                                      params.resolved_xi_cap(n), params.hard_core), k)


def step_matrix(params: OperatorParams, pot: Potential, dom: DomainSpec,
                max_order: int, dual: bool = True) -> sparse.csr_matrix:
    """The one-step map ``P_delta_star`` (or ``P_delta``) as a matrix."""
    cap = params.resolved_xi_cap(max_order)
    build = p_delta_star_matrix if dual else p_delta_matrix
    return build(dom, pot, params.z, params.delta, max_order, cap, params.hard_core)


def generator_residual(k: SymFn, params: OperatorParams, pot: Potential, dom: DomainSpec,
                       C: float) -> float:
    """``|| (P_delta_star k - k) / delta - L_hat_star k ||`` in the K_C norm."""
    stepped = apply_P_delta_star(k, params, pot, dom)
    gen = apply_L_hat_star(k, params, pot, dom)
    diff = SymFn(k.basis, (stepped.values - k.values) / params.delta - gen.values)
    return norm_K_C(diff, C)


def truncation_tail_bound(k_norm: float, C: float, c_phi: float, cap: int) -> float:
    """Analytic bound ``||k|| (C c_phi)^(N+1) / (N+1)! exp(C c_phi)`` on dropped kernel orders."""
    x = C * c_phi
    return k_norm * x ** (cap + 1) / math.factorial(cap + 1) * math.exp(x)
