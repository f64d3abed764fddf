"""Discretized box and tabulated pair potential.

Sites are ``x_i = i * h`` for ``i = 0..M-1`` (free boundary). A potential is a
table ``phi(r)`` over lattice distances ``r = 0..R`` and vanishes beyond ``R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class DomainError(ValueError):
    """A site index or domain parameter is outside its admissible range."""


@dataclass(frozen=True)
class DomainSpec:
    num_sites: int
    spacing: float
    dimension: int = 1
    boundary: str = "free"

    def __post_init__(self):
        if self.num_sites < 2:
            raise DomainError(f"num_sites must be >= 2, got {self.num_sites}")
        if not self.spacing > 0:
            raise DomainError(f"spacing must be > 0, got {self.spacing}")
        if self.dimension != 1:
            raise DomainError("only dimension 1 is implemented")
        if self.boundary != "free":
            raise DomainError(f"unsupported boundary {self.boundary!r}")

    @property
    def volume_element(self) -> float:
        """Lebesgue weight of one site, ``h**d``."""
        return self.spacing ** self.dimension

    @property
    def length(self) -> float:
        return (self.num_sites - 1) * self.spacing

    def coordinates(self) -> np.ndarray:
        return np.arange(self.num_sites) * self.spacing

    def check_site(self, x: int) -> None:
        if not 0 <= x < self.num_sites:
            raise DomainError(f"site {x} outside [0, {self.num_sites})")

    def center_sites(self, n: int) -> tuple[int, ...]:
        """The ``n`` consecutive sites closest to the middle of the box."""
        if not 0 <= n <= self.num_sites:
            raise DomainError(f"cannot take {n} sites from {self.num_sites}")
        start = (self.num_sites - n) // 2
        return tuple(range(start, start + n))


@dataclass(frozen=True)
class Potential:
    """Even, nonnegative, finite-range pair potential ``phi(|i - j|)``.

    ``values[r]`` is the interaction of two particles ``r`` lattice steps apart.
    ``values[0]`` only enters ``c_phi``; configurations never put two particles
    on one site.
    """

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise DomainError("potential table must contain phi(0)")
        for r, v in enumerate(vals):
            if not (v >= 0 and math.isfinite(v)):
                raise DomainError(f"phi({r}) = {v} must be finite and >= 0")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls) -> "Potential":
        return cls((0.0,))

    @classmethod
    def step(cls, height: float, range_sites: int, origin: float | None = None) -> "Potential":
        """Constant ``height`` for ``|r| <= range_sites``.

        ``origin`` overrides ``phi(0)``; a lattice gas never uses it in the
        dynamics, but it contributes to ``c_phi``.
        """
        vals = [float(height)] * (range_sites + 1)
        if origin is not None:
            vals[0] = float(origin)
        return cls(tuple(vals))

    @property
    def range_sites(self) -> int:
        return len(self.values) - 1

    def __call__(self, r: int) -> float:
        r = abs(r)
        return self.values[r] if r < len(self.values) else 0.0

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)

    def interaction_table(self, num_sites: int) -> np.ndarray:
        """``phi(|i - j|)`` for all site pairs, zero on the diagonal."""
        idx = np.arange(num_sites)
        dist = np.abs(idx[:, None] - idx[None, :])
        table = np.zeros((num_sites, num_sites))
        mask = (dist > 0) & (dist <= self.range_sites)
        table[mask] = np.asarray(self.values)[dist[mask]]
        return table


def _check_config(eta: Iterable[int], dom: DomainSpec | None) -> tuple[int, ...]:
    eta = tuple(eta)
    if dom is not None:
        for y in eta:
            dom.check_site(y)
    return eta


def relative_energy(x: int, eta: Sequence[int], pot: Potential,
                    dom: DomainSpec | None = None) -> float:
    """Interaction energy ``sum_{y in eta} phi(x - y)`` of a new particle at ``x``."""
    eta = _check_config(eta, dom)
    if dom is not None:
        dom.check_site(x)
    if x in eta:
        raise DomainError(f"site {x} already occupied; remove it before evaluating")
    return math.fsum(pot(x - y) for y in eta)


def pair_energy(eta: Sequence[int], pot: Potential, dom: DomainSpec | None = None) -> float:
    eta = _check_config(eta, dom)
    return math.fsum(pot(eta[j] - eta[i]) for i in range(len(eta)) for j in range(i + 1, len(eta)))


def boltzmann_factor(x: int, eta: Sequence[int], pot: Potential,
                     dom: DomainSpec | None = None) -> float:
    return math.exp(-relative_energy(x, eta, pot, dom))


def c_phi(pot: Potential, dom: DomainSpec) -> float:
    """Lattice quadrature of ``int (1 - exp(-phi(x))) dx`` over the whole support."""
    terms = [-math.expm1(-pot(j)) for j in range(-pot.range_sites, pot.range_sites + 1)]
    return dom.volume_element * math.fsum(terms)
