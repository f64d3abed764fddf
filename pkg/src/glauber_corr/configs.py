"""Finite configurations and truncated symmetric functions on them.

A :class:`SymFn` stores one value per configuration (sorted site tuple) of
size at most ``max_order``. Integrals against the Lebesgue-Poisson measure
become sums over sorted tuples weighted by ``h**(d*n)``; the ``1/n!`` of the
measure cancels the ``n!`` orderings of each tuple.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .lattice import DomainError

Config = tuple[int, ...]

MAX_K_TRANSFORM_SIZE = 30
MAX_WINDOW = 20


def as_config(sites: Iterable[int]) -> Config:
    """Sorted tuple of distinct sites; rejects repeated sites."""
    eta = tuple(sorted(sites))
    if any(a == b for a, b in zip(eta, eta[1:])):
        raise DomainError(f"configuration {eta} has a repeated site")
    return eta


def subsets(eta: Sequence[int], max_size: int | None = None) -> Iterator[Config]:
    """All sub-configurations of ``eta`` (including the empty one and ``eta``)."""
    top = len(eta) if max_size is None else min(max_size, len(eta))
    for n in range(top + 1):
        yield from itertools.combinations(eta, n)


class Basis:
    """Enumeration of all configurations in ``{0..M-1}`` with at most ``N`` points."""

    def __init__(self, num_sites: int, max_order: int):
        if max_order < 0 or max_order > num_sites:
            raise DomainError(f"max_order {max_order} must lie in [0, {num_sites}]")
        self.num_sites = num_sites
        self.max_order = max_order
        self.configs: list[Config] = [
            c for n in range(max_order + 1) for c in itertools.combinations(range(num_sites), n)
        ]
        self.index: dict[Config, int] = {c: i for i, c in enumerate(self.configs)}
        self.orders = np.array([len(c) for c in self.configs], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.configs)

    def __repr__(self) -> str:
        return f"Basis(num_sites={self.num_sites}, max_order={self.max_order}, size={len(self)})"

    def order_slice(self, n: int) -> slice:
        start = sum(math.comb(self.num_sites, j) for j in range(n))
        return slice(start, start + math.comb(self.num_sites, n))

    def weights(self, weight_per_point: float) -> np.ndarray:
        """Lebesgue-Poisson volume element of each basis configuration."""
        return weight_per_point ** self.orders.astype(float)


@lru_cache(maxsize=None)
def basis_for(num_sites: int, max_order: int) -> Basis:
    return Basis(num_sites, max_order)


@dataclass(frozen=True)
class PairingWeights:
    weight_per_point: float

    def __post_init__(self):
        if not self.weight_per_point > 0:
            raise DomainError("weight_per_point must be positive")


class SymFn:
    """Symmetric function on finite configurations, truncated at ``max_order``.

    Values are read-only; reading above ``max_order`` yields 0.
    """

    __slots__ = ("basis", "values")

    def __init__(self, basis: Basis, values: np.ndarray | Sequence[float]):
        vals = np.array(values, dtype=float)
        if vals.shape != (len(basis),):
            raise ValueError(f"expected {len(basis)} values, got shape {vals.shape}")
        vals.flags.writeable = False
        self.basis = basis
        self.values = vals

    @classmethod
    def zeros(cls, basis: Basis) -> "SymFn":
        return cls(basis, np.zeros(len(basis)))

    @classmethod
    def from_function(cls, basis: Basis, f: Callable[[Config], float]) -> "SymFn":
        return cls(basis, [f(c) for c in basis.configs])

    @classmethod
    def from_mapping(cls, basis: Basis, entries: Mapping[Iterable[int], float]) -> "SymFn":
        vals = np.zeros(len(basis))
        for eta, v in entries.items():
            eta = as_config(eta)
            if len(eta) <= basis.max_order:
                vals[basis.index[eta]] = v
        return cls(basis, vals)

    @classmethod
    def indicator_empty(cls, basis: Basis) -> "SymFn":
        return cls.from_mapping(basis, {(): 1.0})

    @classmethod
    def poisson(cls, basis: Basis, z: float) -> "SymFn":
        """Correlation function ``z**|eta|`` of a Poisson field with intensity ``z``."""
        return cls(basis, float(z) ** basis.orders.astype(float))

    @property
    def max_order(self) -> int:
        return self.basis.max_order

    def __call__(self, eta: Iterable[int]) -> float:
        eta = as_config(eta)
        if len(eta) > self.basis.max_order:
            return 0.0
        return float(self.values[self.basis.index[eta]])

    def order(self, n: int) -> np.ndarray:
        if n > self.basis.max_order:
            return np.zeros(0)
        return self.values[self.basis.order_slice(n)]

    def items(self) -> Iterator[tuple[Config, float]]:
        return zip(self.basis.configs, self.values.tolist())

    def _check(self, other: "SymFn") -> None:
        if other.basis is not self.basis and (
            other.basis.num_sites != self.basis.num_sites
            or other.basis.max_order != self.basis.max_order
        ):
            raise ValueError("SymFn operands live on different bases")

    def __add__(self, other: "SymFn") -> "SymFn":
        self._check(other)
        return SymFn(self.basis, self.values + other.values)

    def __sub__(self, other: "SymFn") -> "SymFn":
        self._check(other)
        return SymFn(self.basis, self.values - other.values)

    def __mul__(self, c: float) -> "SymFn":
        return SymFn(self.basis, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "SymFn":
        return SymFn(self.basis, -self.values)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SymFn)
            and other.basis.num_sites == self.basis.num_sites
            and other.basis.max_order == self.basis.max_order
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"SymFn(M={self.basis.num_sites}, N_max={self.max_order})"

    def truncate(self, max_order: int) -> "SymFn":
        """Restrict to a smaller order cap (or zero-extend to a larger one)."""
        basis = basis_for(self.basis.num_sites, max_order)
        return SymFn.from_function(basis, self)

    # flat (order, sites, value) table, 17 significant digits
    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["order", "sites", "value"])
        for eta, v in self.items():
            writer.writerow([len(eta), " ".join(map(str, eta)), format(v, ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, num_sites: int, max_order: int | None = None) -> "SymFn":
        rows = list(csv.DictReader(io.StringIO(text)))
        top = max((int(r["order"]) for r in rows), default=0) if max_order is None else max_order
        basis = basis_for(num_sites, top)
        vals = np.zeros(len(basis))
        for r in rows:
            eta = as_config(int(s) for s in r["sites"].split())
            if len(eta) != int(r["order"]):
                raise ValueError(f"order column disagrees with sites {eta}")
            if len(eta) <= top:
                vals[basis.index[eta]] = float(r["value"])
        return cls(basis, vals)


def lp_exponent(f: Callable[[int], float], eta: Iterable[int]) -> float:
    """Product of ``f`` over the points of ``eta``; 1 on the empty configuration."""
    return math.prod(f(x) for x in eta)


def lp_integral(F: SymFn, weights: PairingWeights) -> float:
    return math.fsum(F.values * F.basis.weights(weights.weight_per_point))


def k_transform(G: SymFn | Callable[[Config], float], gamma: Iterable[int]) -> float:
    """``sum_{eta subset gamma} G(eta)``; orders above ``G``'s cap contribute 0."""
    gamma = as_config(gamma)
    if len(gamma) > MAX_K_TRANSFORM_SIZE:
        raise DomainError(f"|gamma| = {len(gamma)} exceeds {MAX_K_TRANSFORM_SIZE}")
    cap = G.max_order if isinstance(G, SymFn) else None
    return math.fsum(G(eta) for eta in subsets(gamma, cap))


def k_inverse(F: Callable[[Config], float], eta: Iterable[int],
              window: Iterable[int] | None = None) -> float:
    """Moebius inversion ``sum_{xi subset eta} (-1)^{|eta \\ xi|} F(xi)``."""
    eta = as_config(eta)
    if window is not None:
        window = set(window)
        if len(window) > MAX_WINDOW:
            raise DomainError(f"window of {len(window)} sites exceeds {MAX_WINDOW}")
        if not window.issuperset(eta):
            raise DomainError(f"{eta} is not inside the window")
    elif len(eta) > MAX_WINDOW:
        raise DomainError(f"|eta| = {len(eta)} exceeds {MAX_WINDOW}")
    n = len(eta)
    return math.fsum((-1) ** (n - len(xi)) * F(xi) for xi in subsets(eta))


def k_transform_table(G: Callable[[Config], float], window: Sequence[int]) -> dict[Config, float]:
    """``KG`` on every sub-configuration of ``window``."""
    return {gamma: k_transform(G, gamma) for gamma in subsets(as_config(window))}


def k_inverse_table(F: Mapping[Config, float], window: Sequence[int]) -> dict[Config, float]:
    window = as_config(window)
    if len(window) > MAX_WINDOW:
        raise DomainError(f"window of {len(window)} sites exceeds {MAX_WINDOW}")
    return {eta: k_inverse(F.__getitem__, eta) for eta in subsets(window)}


def norm_L_C(G: SymFn, C: float, weights: PairingWeights) -> float:
    if not C > 1:
        raise DomainError(f"C must exceed 1, got {C}")
    w = G.basis.weights(C * weights.weight_per_point)
    return math.fsum(np.abs(G.values) * w)


def norm_K_C(k: SymFn, C: float) -> float:
    if not C > 1:
        raise DomainError(f"C must exceed 1, got {C}")
    return float(np.max(np.abs(k.values) * float(C) ** (-k.basis.orders.astype(float))))


def pairing(G: SymFn, k: SymFn, weights: PairingWeights) -> float:
    """``<<G, k>>``; if the caps differ the smaller one applies."""
    if G.basis.num_sites != k.basis.num_sites:
        raise ValueError("pairing of functions on different boxes")
    if G.max_order != k.max_order:
        top = min(G.max_order, k.max_order)
        G, k = G.truncate(top), k.truncate(top)
    return math.fsum(G.values * k.values * G.basis.weights(weights.weight_per_point))


def minlos_identity_check(H: Callable[[Config, Config, Config], float], num_sites: int,
                          max_total_order: int, weights: PairingWeights) -> tuple[float, float]:
    """Both sides of the Minlos summation identity by direct enumeration.

    Left: ``sum_eta w^|eta| sum_{xi subset eta} H(xi, eta \\ xi, eta)``.
    Right: ``sum_{xi, eta disjoint} w^{|xi|+|eta|} H(xi, eta, xi u eta)``.
    Both run over configurations with at most ``max_total_order`` points.
    """
    w = weights.weight_per_point
    basis = basis_for(num_sites, max_total_order)
    lhs = []
    for eta in basis.configs:
        for xi in subsets(eta):
            rest = tuple(y for y in eta if y not in xi)
            lhs.append(w ** len(eta) * H(xi, rest, eta))
    rhs = []
    sites = range(num_sites)
    for n_xi in range(max_total_order + 1):
        for xi in itertools.combinations(sites, n_xi):
            free = [y for y in sites if y not in xi]
            for n_eta in range(max_total_order - n_xi + 1):
                for eta in itertools.combinations(free, n_eta):
                    rhs.append(w ** (n_xi + n_eta) * H(xi, eta, as_config(xi + eta)))
    return math.fsum(lhs), math.fsum(rhs)
