"""Parameter conditions for contraction, invariance and ergodicity.

All functions are pure and work on the scalars ``z`` (activity), ``C`` (norm
weight) and ``c_phi`` (integrated Mayer function). Checks return
:class:`Check` records carrying the bound and the margin ``bound - value``
rather than raising, so reports can show every inequality at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .lattice import DomainError

LOW_ACTIVITY_BOUND = 1.0 / (2.0 * math.e)
ROOT_TOL = 1e-12


class RegimeError(DomainError):
    """A parameter condition fails; ``inequality`` names it and ``margin`` is bound minus value."""

    def __init__(self, inequality: str, margin: float, message: str = ""):
        self.inequality = inequality
        self.margin = margin
        super().__init__(message or f"{inequality} violated (margin {margin:.6g})")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    bound: float
    strict: bool = False

    @property
    def margin(self) -> float:
        return self.bound - self.value

    def require(self) -> None:
        if not self.passed:
            raise RegimeError(self.name, self.margin)


def _check_C(C: float) -> None:
    if not C > 1:
        raise DomainError(f"C must exceed 1, got {C}")


def contraction_bounds(C: float, c_phi: float) -> tuple[float, float]:
    """``(C exp(-C c_phi), 2C exp(-2C c_phi))``."""
    _check_C(C)
    return C * math.exp(-C * c_phi), 2 * C * math.exp(-2 * C * c_phi)


def check_contraction_condition(z: float, C: float, c_phi: float) -> tuple[Check, tuple[float, float]]:
    b1, b2 = contraction_bounds(C, c_phi)
    bound = min(b1, b2)
    return Check("contraction", z <= bound, z, bound), (b1, b2)


def check_new_z(z: float, C: float, c_phi: float) -> Check:
    """Strict version of the first bound, required only when ``C c_phi <= ln 2``."""
    bound = C * math.exp(-C * c_phi)
    if C * c_phi > math.log(2):
        return Check("new_z", True, z, bound, strict=True)
    return Check("new_z", z < bound, z, bound, strict=True)


def _xexp(x: float) -> float:
    return x * math.exp(-x)


def _bisect(f, lo: float, hi: float, tol: float = ROOT_TOL) -> float:
    """Root of an increasing-or-decreasing ``f`` bracketed by ``[lo, hi]``."""
    flo = f(lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            break
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def roots_xexp(c: float) -> tuple[float, float]:
    """The two solutions ``x1 < 1 < x2`` of ``x exp(-x) = c``."""
    if not 0 < c < 1 / math.e:
        raise DomainError(f"x exp(-x) = {c} needs 0 < c < 1/e")
    g = lambda x: _xexp(x) - c  # noqa: E731
    x1 = _bisect(g, 0.0, 1.0)
    upper = 2.0
    while _xexp(upper) >= c:
        upper *= 2
    x2 = _bisect(g, 1.0, upper)
    return x1, x2


def alpha0(z: float, C: float, c_phi: float) -> float:
    """Lower end of the admissible ``alpha`` interval."""
    _check_C(C)
    if c_phi == 0:
        return max(0.5, 1.0 / C)
    check_contraction_condition(z, C, c_phi)[0].require()
    check_new_z(z, C, c_phi).require()
    x1, _ = roots_xexp(z * c_phi)
    cc = C * c_phi
    if cc > 1:
        a0 = max(0.5, 1.0 / cc, 1.0 / C)
    elif x1 < cc:
        a0 = max(0.5, x1 / cc, 1.0 / C)
    else:
        raise RegimeError("alpha0 case split", cc - x1, f"C*c_phi = {cc} does not exceed x1 = {x1}")
    if not a0 < 1:
        raise RegimeError("alpha0 < 1", 1 - a0)
    return a0


def alpha_chain(alpha: float, z: float, C: float, c_phi: float) -> bool:
    """``x1 < a C c < C c < 2 a C c < 2 C c <= x2``."""
    x1, x2 = roots_xexp(z * c_phi)
    cc = C * c_phi
    return x1 < alpha * cc < cc < 2 * alpha * cc < 2 * cc <= x2


def nu_star(z: float, C: float, c_phi: float) -> float:
    """Smallest admissible strict-contraction parameter ``z exp(C c_phi) / C``."""
    _check_C(C)
    nu = z * math.exp(C * c_phi) / C
    if not nu < 1:
        raise RegimeError("nu* < 1", 1 - nu)
    return nu


def check_nu_condition(z: float, C: float, c_phi: float, nu: float) -> Check:
    b1, b2 = contraction_bounds(C, c_phi)
    bound = min(nu * b1, b2)
    # nu = nu* makes the first bound equal to z up to rounding
    ok = z <= bound * (1 + 1e-12) and 0 < nu < 1
    return Check("nu-contraction", ok, z, bound)


def check_low_activity(z: float, c_phi: float) -> Check:
    return Check("low-activity", z * c_phi < LOW_ACTIVITY_BOUND, z * c_phi, LOW_ACTIVITY_BOUND, strict=True)


@dataclass
class RegimeParams:
    """Validated ``(z, C, c_phi)`` plus the derived quantities.

    ``alpha=None`` picks the midpoint of ``(alpha0, 1)``; ``nu=None`` picks ``nu*``.
    """

    z: float
    C: float
    c_phi: float
    alpha: float | None = None
    nu: float | None = None
    alpha0: float = field(init=False)
    x1: float = field(init=False)
    x2: float = field(init=False)

    def __post_init__(self):
        if not self.z > 0:
            raise DomainError("z must be positive")
        if self.c_phi < 0:
            raise DomainError("c_phi must be nonnegative")
        self.alpha0 = alpha0(self.z, self.C, self.c_phi)
        if self.c_phi > 0:
            self.x1, self.x2 = roots_xexp(self.z * self.c_phi)
        else:
            self.x1, self.x2 = 0.0, math.inf
        if self.alpha is None:
            self.alpha = 0.5 * (self.alpha0 + 1)
        if not self.alpha0 < self.alpha < 1:
            raise RegimeError("alpha in (alpha0, 1)", min(self.alpha - self.alpha0, 1 - self.alpha))
        if self.c_phi > 0 and not alpha_chain(self.alpha, self.z, self.C, self.c_phi):
            raise RegimeError("alpha chain", 0.0)
        nus = nu_star(self.z, self.C, self.c_phi)
        if self.nu is None:
            self.nu = nus
        elif not nus <= self.nu < 1:
            raise RegimeError("nu in [nu*, 1)", self.nu - nus)
        check_nu_condition(self.z, self.C, self.c_phi, self.nu).require()

    @property
    def rate(self) -> float:
        return 1 - self.nu


def regime_report(z: float, C: float, c_phi: float) -> dict:
    """Every condition and derived quantity, without raising."""
    cond, (b1, b2) = check_contraction_condition(z, C, c_phi)
    checks = [cond, check_new_z(z, C, c_phi), check_low_activity(z, c_phi)]
    nu = z * math.exp(C * c_phi) / C
    checks.append(Check("nu* < 1", nu < 1, nu, 1.0, strict=True))
    out = {"z": z, "C": C, "c_phi": c_phi, "bound_1": b1, "bound_2": b2, "nu_star": nu,
           "rate": 1 - nu, "checks": checks}
    if 0 < z * c_phi < 1 / math.e:
        out["x1"], out["x2"] = roots_xexp(z * c_phi)
    try:
        out["alpha0"] = alpha0(z, C, c_phi)
    except DomainError as exc:
        out["alpha0_error"] = str(exc)
    return out
