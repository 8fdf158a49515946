"""Integrals of deterministic piecewise-polynomial functions against a free Lévy basis.

On a cell where the integrand is a constant ``alpha`` the contribution is
the seed dilated by ``alpha`` and weighted by the cell's control mass. On
cells without jumps the drift and Gaussian parts of a polynomial integrand
are integrated exactly. Polynomial integrands on cells with jumps are
replaced by a midpoint step approximation with ``refine`` sub-cells, since
the image of ``rho ⊗ kappa`` under ``(x, t) -> f(x) t`` leaves the finite
Lévy-measure family.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import integrate

from . import measures as M
from .errors import NotIntegrable, NotRepresentable, ValidationError
from .levy_basis import Cell, SeedField, SetExpr, _weighted_sum, interval
from .measures import levy_quadrature
from .transforms import _free_ct_value, eval_free_ct
from .triplets import FreeTriplet, triplet_scale, zero_triplet

log = logging.getLogger(__name__)

DEFAULT_REFINE = 64


@dataclass(frozen=True)
class PiecewisePolynomial:
    """``f(x) = sum_k coeffs[k] x**k`` on each ``[lo, hi)``; zero elsewhere."""

    pieces: tuple = ()  # (lo, hi, coeffs)

    def __post_init__(self):
        pieces = []
        for lo, hi, coeffs in self.pieces:
            lo, hi = float(lo), float(hi)
            coeffs = tuple(float(c) for c in np.atleast_1d(coeffs))
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValidationError(f"integrand piece needs finite lo < hi, got [{lo}, {hi})")
            if not coeffs or not all(math.isfinite(c) for c in coeffs):
                raise ValidationError("integrand coefficients must be finite and nonempty")
            while len(coeffs) > 1 and coeffs[-1] == 0.0:
                coeffs = coeffs[:-1]
            pieces.append((lo, hi, coeffs))
        pieces.sort()
        for (l1, h1, _), (l2, h2, _) in zip(pieces, pieces[1:]):
            if l2 < h1:
                raise ValidationError("integrand pieces must be disjoint")
        object.__setattr__(self, "pieces", tuple(pieces))

    @classmethod
    def step(cls, pieces: Sequence) -> "PiecewisePolynomial":
        """From ``(lo, hi, value)`` triples."""
        return cls(tuple((lo, hi, (v,)) for lo, hi, v in pieces))

    @classmethod
    def indicator(cls, E: SetExpr, value: float = 1.0) -> "PiecewisePolynomial":
        return cls(tuple((lo, hi, (value,)) for lo, hi in E.intervals))

    @property
    def is_step(self) -> bool:
        return all(len(c) == 1 for _, _, c in self.pieces)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for lo, hi, c in self.pieces:
            mask = (x >= lo) & (x < hi)
            out = np.where(mask, npoly.polyval(x, c), out)
        return out if out.ndim else float(out)

    def scaled(self, c: float) -> "PiecewisePolynomial":
        return PiecewisePolynomial(tuple((lo, hi, tuple(c * k for k in co)) for lo, hi, co in self.pieces))

    def restrict(self, E: SetExpr) -> "PiecewisePolynomial":
        """``f * 1_E``."""
        out = []
        for lo, hi, co in self.pieces:
            for a, b in (interval(lo, hi) & E).intervals:
                out.append((a, b, co))
        return PiecewisePolynomial(tuple(out))

    def __add__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        edges = sorted({e for lo, hi, _ in self.pieces + other.pieces for e in (lo, hi)})
        out = []
        for a, b in zip(edges, edges[1:]):
            mid = 0.5 * (a + b)
            co = np.zeros(1)
            hit = False
            for lo, hi, c in self.pieces + other.pieces:
                if lo <= mid < hi:
                    co = npoly.polyadd(co, c)
                    hit = True
            if hit:
                out.append((a, b, tuple(co)))
        return PiecewisePolynomial(tuple(out))

    def support(self) -> SetExpr:
        return SetExpr(tuple((lo, hi) for lo, hi, c in self.pieces if any(c)))


def step_approximation(f: PiecewisePolynomial, refine: int) -> tuple:
    """Midpoint step function on ``refine`` equal sub-pieces per non-constant piece, with its sup error."""
    if refine < 1:
        raise ValidationError("refine must be >= 1")
    out = []
    err = 0.0
    for lo, hi, c in f.pieces:
        if len(c) == 1:
            out.append((lo, hi, c))
            continue
        edges = np.linspace(lo, hi, refine + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            val = float(npoly.polyval(0.5 * (a + b), c))
            out.append((float(a), float(b), (val,)))
            xs = np.linspace(a, b, 33)
            err = max(err, float(np.max(np.abs(npoly.polyval(xs, c) - val))))
    return PiecewisePolynomial(tuple(out)), err


def _overlaps(field: SeedField, f: PiecewisePolynomial):
    """Yield ``(cell, lo, hi, coeffs)`` for every nonempty cell ∩ piece."""
    for c in field.cells:
        for lo, hi, co in f.pieces:
            a, b = max(lo, c.lo), min(hi, c.hi)
            if a < b:
                yield c, a, b, co


def _poly_integral(coeffs, a: float, b: float) -> float:
    anti = npoly.polyint(coeffs)
    return float(npoly.polyval(b, anti) - npoly.polyval(a, anti))


@dataclass(frozen=True)
class IntegrabilityReport:
    drift: float
    gaussian: float
    jumps: float

    @property
    def integrable(self) -> bool:
        return all(math.isfinite(v) for v in (self.drift, self.gaussian, self.jumps))


def _drift_density(seed: FreeTriplet, alpha: float) -> float:
    """``alpha theta + ∫ (sigma(alpha t) - alpha sigma(t)) rho(dt)``."""
    val = alpha * seed.a
    if alpha != 0.0 and alpha != 1.0 and not seed.r.is_zero:
        val += levy_quadrature(seed.r, M.sigma_shift(alpha))
    return val


def _jump_activity(seed: FreeTriplet, alpha: float) -> float:
    if alpha == 0.0 or seed.r.is_zero:
        return 0.0
    return levy_quadrature(seed.r, M.min1_scaled(alpha))


def _nested(fn, a: float, b: float) -> float:
    val, _ = integrate.quad(fn, a, b, epsabs=1e-13, epsrel=1e-11, limit=200)
    return float(val)


def integrability_check(field: SeedField, f: PiecewisePolynomial) -> IntegrabilityReport:
    """The three integrability quantities (drift, Gaussian, jump activity) by nested quadrature."""
    drift = gauss = jumps = 0.0
    for c, a, b, co in _overlaps(field, f):
        seed = c.seed
        k = c.kappa_density
        gauss += k * seed.b * _poly_integral(npoly.polymul(co, co), a, b)
        if len(co) == 1:
            drift += k * (b - a) * abs(_drift_density(seed, co[0]))
            jumps += k * (b - a) * _jump_activity(seed, co[0])
        elif seed.r.is_zero:
            drift += k * abs(seed.a) * _nested(lambda x: abs(npoly.polyval(x, co)), a, b)
        else:
            drift += k * _nested(lambda x: abs(_drift_density(seed, float(npoly.polyval(x, co)))), a, b)
            jumps += k * _nested(lambda x: _jump_activity(seed, float(npoly.polyval(x, co))), a, b)
    for atom in field.kappa_atoms:
        alpha = float(f(atom.x))
        seed = atom.seed
        drift += atom.mass * abs(_drift_density(seed, alpha))
        gauss += atom.mass * alpha * alpha * seed.b
        jumps += atom.mass * _jump_activity(seed, alpha)
    return IntegrabilityReport(drift, gauss, jumps)


def _field_contributions(field: SeedField, f: PiecewisePolynomial, refine: int | None):
    """Weighted seed contributions ``(weight, triplet)`` plus exact (Theta, Sigma) extras."""
    parts = []
    extra_a = extra_b = 0.0
    step_cache: dict = {}
    for c, a, b, co in _overlaps(field, f):
        seed = c.seed
        k = c.kappa_density
        if len(co) == 1:
            if co[0] != 0.0:
                parts.append((k * (b - a), triplet_scale(co[0], seed)))
        elif seed.r.is_zero:
            extra_a += k * seed.a * _poly_integral(co, a, b)
            extra_b += k * seed.b * _poly_integral(npoly.polymul(co, co), a, b)
        else:
            if refine is None:
                raise NotRepresentable("polynomial integrand on a cell with jumps needs a refinement budget")
            key = (a, b, co)
            if key not in step_cache:
                step_cache[key] = step_approximation(PiecewisePolynomial(((a, b, co),)), refine)
            approx, err = step_cache[key]
            if err > 0:
                log.info("step approximation of integrand on [%g, %g): sup error %.3g", a, b, err)
            for lo, hi, (alpha,) in approx.pieces:
                if alpha != 0.0:
                    parts.append((k * (hi - lo), triplet_scale(alpha, seed)))
    for atom in field.kappa_atoms:
        alpha = float(f(atom.x))
        if alpha != 0.0:
            parts.append((atom.mass, triplet_scale(alpha, atom.seed)))
    return parts, extra_a, extra_b


def integral_triplet(field: SeedField, f: PiecewisePolynomial, refine: int | None = DEFAULT_REFINE) -> FreeTriplet:
    """Free triplet ``(a_f, sigma_f^2, F_f)`` of the integral of ``f`` against the basis."""
    report = integrability_check(field, f) if not f.is_step else None
    if report is not None and not report.integrable:
        raise NotIntegrable(f"integrand fails the integrability conditions: {report}")
    parts, extra_a, extra_b = _field_contributions(field, f, refine)
    total = _weighted_sum(parts)
    if extra_a or extra_b:
        total = FreeTriplet(total.a + extra_a, total.b + extra_b, total.r)
    return total


def _seed_ct_integral(seed: FreeTriplet, co, a: float, b: float, z: complex) -> complex:
    """``∫_a^b C_seed(f(x) z) dx`` for polynomial ``f``."""
    if len(co) == 1:
        return (b - a) * _free_ct_value(seed, co[0] * z)
    if seed.r.is_zero:
        # C(w) = theta w + sigma2 w^2 is polynomial in x
        lin = _poly_integral(co, a, b)
        sq = _poly_integral(npoly.polymul(co, co), a, b)
        return seed.a * z * lin + seed.b * z * z * sq

    def part(x, which):
        v = _free_ct_value(seed, float(npoly.polyval(x, co)) * z)
        return v.real if which == 0 else v.imag

    re_ = _nested(lambda x: part(x, 0), a, b)
    im_ = _nested(lambda x: part(x, 1), a, b)
    return complex(re_, im_)


def integral_ct_direct(field: SeedField, f: PiecewisePolynomial, z: complex) -> complex:
    """``∫ C_{seed(x)}(f(x) z) kappa(dx)`` evaluated by quadrature over ``x``."""
    total = 0j
    for c, a, b, co in _overlaps(field, f):
        total += c.kappa_density * _seed_ct_integral(c.seed, co, a, b, z)
    for atom in field.kappa_atoms:
        total += atom.mass * _free_ct_value(atom.seed, float(f(atom.x)) * z)
    return total


def integral_ct_check(
    field: SeedField,
    f: PiecewisePolynomial,
    z_grid: Sequence[complex],
    refine: int | None = DEFAULT_REFINE,
) -> float:
    """Max relative gap between the transform of the integral triplet and the direct kernel integral."""
    u = integral_triplet(field, f, refine)
    worst = 0.0
    for z in z_grid:
        lhs = eval_free_ct(u, z)
        rhs = integral_ct_direct(field, f, z)
        scale = max(abs(lhs), abs(rhs))
        if scale > 0:
            worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def density_field(field: SeedField, f: PiecewisePolynomial, refine: int | None = None) -> SeedField:
    """Field of ``E -> ∫ f 1_E dM``.

    Step integrands are represented exactly. Polynomial pieces need
    ``refine``; they are replaced by their midpoint step approximation and
    the sup-norm error is logged.
    """
    if not f.is_step:
        if refine is None:
            raise NotRepresentable("non-step integrand needs a refinement budget for density_field")
        f, err = step_approximation(f, refine)
        log.info("density_field: step approximation sup error %.3g", err)
    cells = []
    for c, a, b, co in _overlaps(field, f):
        alpha = co[0]
        if alpha == 0.0:
            continue
        seed = triplet_scale(alpha, c.seed)
        if seed.is_zero:
            continue
        cells.append(Cell(a, b, seed.a, seed.b, seed.r, c.kappa_density))
    atoms = []
    for atom in field.kappa_atoms:
        alpha = float(f(atom.x))
        seed = triplet_scale(alpha, atom.seed) if alpha != 0.0 else zero_triplet()
        if not seed.is_zero:
            atoms.append(atom.with_seed(seed))
    return SeedField(tuple(cells), tuple(atoms), field.carrier)
