"""Characteristic triplets of infinitely divisible laws and their arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import measures as M
from .errors import FlavorMismatch, ValidationError
from .measures import LevyMeasure, levy_measures_close, levy_quadrature, sigma_centering

FREE = "free"
CLASSICAL = "classical"
FLAVORS = (FREE, CLASSICAL)


@dataclass(frozen=True)
class FreeTriplet:
    """Triplet ``(a, b, r)`` read through the free (default) or classical Lévy-Khintchine formula."""

    a: float
    b: float
    r: LevyMeasure = field(default_factory=LevyMeasure)
    flavor: str = FREE

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValidationError("triplet components must be finite")
        if self.b < 0:
            raise ValidationError(f"second-order part b must be >= 0, got {self.b}")
        if self.flavor not in FLAVORS:
            raise ValidationError(f"flavor must be one of {FLAVORS}")

    @property
    def is_zero(self) -> bool:
        return self.a == 0.0 and self.b == 0.0 and self.r.is_zero


@dataclass(frozen=True)
class CumulantVector:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    @property
    def order(self) -> int:
        return len(self.values)

    def __getitem__(self, j):
        return self.values[j]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def zero_triplet(flavor: str = FREE) -> FreeTriplet:
    return FreeTriplet(0.0, 0.0, LevyMeasure(), flavor)


def dirac(c: float, flavor: str = FREE) -> FreeTriplet:
    """Triplet of the point mass at ``c``."""
    return FreeTriplet(c, 0.0, LevyMeasure(), flavor)


def semicircle(variance: float = 1.0, mean: float = 0.0) -> FreeTriplet:
    return FreeTriplet(mean, variance, LevyMeasure())


def free_poisson(rate: float = 1.0, jump: float = 1.0) -> FreeTriplet:
    """Free Poisson law with the given rate and jump size (rate 1, jump 1 is mp_1)."""
    return FreeTriplet(rate * sigma_centering(jump), 0.0, LevyMeasure(atoms=((jump, rate),)))


def _same_flavor(u: FreeTriplet, v: FreeTriplet) -> None:
    if u.flavor != v.flavor:
        raise FlavorMismatch(f"cannot combine {u.flavor} and {v.flavor} triplets")


def triplet_add(u: FreeTriplet, v: FreeTriplet) -> FreeTriplet:
    """Triplet of ``nu_u ⊞ nu_v`` (or ``mu_u * mu_v`` for the classical flavor)."""
    _same_flavor(u, v)
    return FreeTriplet(u.a + v.a, u.b + v.b, u.r + v.r, u.flavor)


def triplet_sum(items: Sequence[FreeTriplet], flavor: str = FREE) -> FreeTriplet:
    total = zero_triplet(flavor)
    for u in items:
        total = triplet_add(total, u)
    return total


def triplet_weighted(w: float, u: FreeTriplet) -> FreeTriplet:
    """``(w a, w b, w r)`` for ``w >= 0``: the law at time ``w`` of the Lévy process through ``u``."""
    if w < 0:
        raise ValidationError("triplet weights must be nonnegative")
    return FreeTriplet(w * u.a, w * u.b, u.r.weighted(w), u.flavor)


def triplet_scale(c: float, u: FreeTriplet) -> FreeTriplet:
    """Triplet of the dilated law ``D_c nu``."""
    if c == 0:
        return zero_triplet(u.flavor)
    if c == 1:
        return u
    shift = 0.0 if u.r.is_zero else levy_quadrature(u.r, M.sigma_shift(c))
    return FreeTriplet(c * u.a + shift, c * c * u.b, u.r.image(c), u.flavor)


def bp_lambda(u: FreeTriplet) -> FreeTriplet:
    """Bercovici-Pata map: classical triplet reinterpreted as a free one."""
    if u.flavor != CLASSICAL:
        raise FlavorMismatch("bp_lambda expects a classical triplet")
    return replace(u, flavor=FREE)


def bp_lambda_inv(u: FreeTriplet) -> FreeTriplet:
    if u.flavor != FREE:
        raise FlavorMismatch("bp_lambda_inv expects a free triplet")
    return replace(u, flavor=CLASSICAL)


def _cumulants(u: FreeTriplet, p: int) -> CumulantVector:
    if p < 1:
        raise ValidationError("cumulant order must be >= 1")
    r = u.r
    values = [u.a + levy_quadrature(r, M.t_minus_sigma())]
    if p >= 2:
        values.append(u.b + levy_quadrature(r, M.moment(2)))
    for n in range(3, p + 1):
        values.append(levy_quadrature(r, M.moment(n)))
    return CumulantVector(values)


def free_cumulants_from_triplet(u: FreeTriplet, p: int) -> CumulantVector:
    """Free cumulants ``kappa_1..kappa_p`` read off the free Lévy-Khintchine formula."""
    if u.flavor != FREE:
        raise FlavorMismatch("free cumulants need a free triplet")
    return _cumulants(u, p)


def classical_cumulants_from_triplet(u: FreeTriplet, p: int) -> CumulantVector:
    """Classical cumulants (derivatives of the log characteristic function at 0)."""
    if u.flavor != CLASSICAL:
        raise FlavorMismatch("classical cumulants need a classical triplet")
    return _cumulants(u, p)


def control_constant(u: FreeTriplet) -> float:
    """``|a| + b + ∫ min(1, t^2) r(dt)``."""
    return abs(u.a) + u.b + (0.0 if u.r.is_zero else levy_quadrature(u.r, M.min1sq()))


def triplets_close(u: FreeTriplet, v: FreeTriplet, atol: float = 1e-9, levy_tol: float = 1e-7) -> bool:
    """Drift and Gaussian part to ``atol`` (relative to scale), Lévy parts via the comparison menu."""
    if u.flavor != v.flavor:
        return False
    scale_a = max(1.0, abs(u.a), abs(v.a))
    scale_b = max(1.0, u.b, v.b)
    if abs(u.a - v.a) > atol * scale_a or abs(u.b - v.b) > atol * scale_b:
        return False
    return levy_measures_close(u.r, v.r, levy_tol)
