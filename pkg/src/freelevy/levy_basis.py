"""Free Lévy bases over finite unions of half-open intervals.

A basis is stored through its seed field: on each cell the seed triplet
``(theta, sigma2, rho)`` is constant and the control measure has constant
Lebesgue density ``kappa_density``; point masses of the control measure
carry their own seeds. The triplet of a set ``E`` is then the
``kappa``-weighted sum of seeds over ``E``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import DegenerateCell, NotInvertible, OutOfCarrier, ValidationError, ZeroLaw
from .measures import LevyMeasure
from .triplets import FREE, FreeTriplet, control_constant

# ---------------------------------------------------------------------------
# Sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SetExpr:
    """Finite disjoint union of half-open intervals ``[lo, hi)`` in normal form."""

    intervals: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalize(self.intervals))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def length(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    def contains(self, x: float) -> bool:
        return any(lo <= x < hi for lo, hi in self.intervals)

    def issubset(self, other: "SetExpr") -> bool:
        return set_diff(self, other).is_empty

    def bounds(self) -> tuple:
        if self.is_empty:
            raise ValidationError("empty set has no bounds")
        return self.intervals[0][0], self.intervals[-1][1]

    def __or__(self, other):
        return set_union(self, other)

    def __and__(self, other):
        return set_intersect(self, other)

    def __sub__(self, other):
        return set_diff(self, other)

    def __str__(self):
        return format_set(self)


def _normalize(raw: Iterable) -> tuple:
    ivs = []
    for lo, hi in raw:
        lo, hi = float(lo), float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValidationError("intervals must be bounded")
        if lo < hi:
            ivs.append((lo, hi))
    ivs.sort()
    out: list = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)


def set_normalize(raw: Iterable) -> SetExpr:
    return SetExpr(tuple(raw))


def interval(lo: float, hi: float) -> SetExpr:
    return SetExpr(((lo, hi),))


EMPTY = SetExpr()


def set_union(a: SetExpr, b: SetExpr) -> SetExpr:
    return SetExpr(a.intervals + b.intervals)


def set_intersect(a: SetExpr, b: SetExpr) -> SetExpr:
    out = []
    i = j = 0
    A, B = a.intervals, b.intervals
    while i < len(A) and j < len(B):
        lo = max(A[i][0], B[j][0])
        hi = min(A[i][1], B[j][1])
        if lo < hi:
            out.append((lo, hi))
        if A[i][1] < B[j][1]:
            i += 1
        else:
            j += 1
    return SetExpr(tuple(out))


def set_diff(a: SetExpr, b: SetExpr) -> SetExpr:
    out = []
    for lo, hi in a.intervals:
        cur = lo
        for blo, bhi in b.intervals:
            if bhi <= cur or blo >= hi:
                continue
            if blo > cur:
                out.append((cur, blo))
            cur = max(cur, bhi)
            if cur >= hi:
                break
        if cur < hi:
            out.append((cur, hi))
    return SetExpr(tuple(out))


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_INTERVAL_RE = re.compile(r"\[\s*(" + _NUM + r")\s*,\s*(" + _NUM + r")\s*\)")


def parse_set(text: str) -> SetExpr:
    """Parse ``"[0,1)∪[2,3)"`` (``+`` also accepted as union, ``∅`` or ``""`` for the empty set)."""
    text = text.strip()
    if text in ("", "∅", "{}"):
        return EMPTY
    parts = re.split(r"\s*(?:∪|\+(?=\s*\[))\s*", text)
    ivs = []
    for part in parts:
        m = _INTERVAL_RE.fullmatch(part.strip())
        if not m:
            raise ValidationError(f"cannot parse interval {part!r} in set expression {text!r}")
        lo, hi = float(m.group(1)), float(m.group(2))
        if not lo < hi:
            raise ValidationError(f"interval [{lo},{hi}) is empty or reversed")
        ivs.append((lo, hi))
    return SetExpr(tuple(ivs))


def format_set(s: SetExpr) -> str:
    if s.is_empty:
        return "∅"
    return "∪".join(f"[{lo!r},{hi!r})" for lo, hi in s.intervals)


# ---------------------------------------------------------------------------
# Seed fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    """Interval ``[lo, hi)`` with constant seed and constant control density."""

    lo: float
    hi: float
    theta: float
    sigma2: float
    rho: LevyMeasure
    kappa_density: float

    def __post_init__(self):
        for name in ("lo", "hi", "theta", "sigma2", "kappa_density"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.lo < self.hi:
            raise ValidationError(f"cell needs lo < hi, got [{self.lo}, {self.hi})")
        if self.sigma2 < 0:
            raise ValidationError("sigma2 must be >= 0")
        if not self.kappa_density > 0:
            raise ValidationError("kappa_density must be > 0 on cells")

    @property
    def seed(self) -> FreeTriplet:
        return FreeTriplet(self.theta, self.sigma2, self.rho)

    @property
    def kappa_mass(self) -> float:
        return self.kappa_density * (self.hi - self.lo)

    def with_seed(self, seed: FreeTriplet, kappa_density: float | None = None, lo=None, hi=None) -> "Cell":
        return Cell(
            self.lo if lo is None else lo,
            self.hi if hi is None else hi,
            seed.a,
            seed.b,
            seed.r,
            self.kappa_density if kappa_density is None else kappa_density,
        )


@dataclass(frozen=True)
class KappaAtom:
    """Point mass of the control measure at ``x`` with its own seed."""

    x: float
    mass: float
    theta: float
    sigma2: float
    rho: LevyMeasure

    def __post_init__(self):
        for name in ("x", "mass", "theta", "sigma2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.mass > 0:
            raise ValidationError("kappa atoms need mass > 0")
        if self.sigma2 < 0:
            raise ValidationError("sigma2 must be >= 0")

    @property
    def seed(self) -> FreeTriplet:
        return FreeTriplet(self.theta, self.sigma2, self.rho)

    def with_seed(self, seed: FreeTriplet, mass: float | None = None, x: float | None = None) -> "KappaAtom":
        return KappaAtom(self.x if x is None else x, self.mass if mass is None else mass, seed.a, seed.b, seed.r)


@dataclass(frozen=True)
class SeedField:
    """Cells sorted by position and pairwise disjoint; atoms at distinct points of the carrier.

    ``carrier`` defaults to the union of the cells (plus a unit interval
    around each atom not already covered).
    """

    cells: tuple = ()
    kappa_atoms: tuple = ()
    carrier: SetExpr | None = None

    def __post_init__(self):
        cells = tuple(sorted(self.cells, key=lambda c: c.lo))
        for c1, c2 in zip(cells, cells[1:]):
            if c2.lo < c1.hi:
                raise ValidationError(f"cells [{c1.lo},{c1.hi}) and [{c2.lo},{c2.hi}) overlap")
        atoms = tuple(sorted(self.kappa_atoms, key=lambda a: a.x))
        for a1, a2 in zip(atoms, atoms[1:]):
            if a1.x == a2.x:
                raise ValidationError(f"two kappa atoms at x={a1.x}")
        carrier = self.carrier
        if carrier is None:
            carrier = SetExpr(tuple((c.lo, c.hi) for c in cells))
            loose = [(a.x, a.x + 1.0) for a in atoms if not carrier.contains(a.x)]
            carrier = carrier | SetExpr(tuple(loose))
        cover = SetExpr(tuple((c.lo, c.hi) for c in cells))
        if not cover.issubset(carrier):
            raise ValidationError("cells must lie inside the carrier")
        for a in atoms:
            if not carrier.contains(a.x):
                raise ValidationError(f"kappa atom at {a.x} outside the carrier")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "kappa_atoms", atoms)
        object.__setattr__(self, "carrier", carrier)

    def kappa(self, E: SetExpr) -> float:
        """Stored control measure of ``E``."""
        total = 0.0
        for c in self.cells:
            total += c.kappa_density * _overlap(c.lo, c.hi, E)
        total += sum(a.mass for a in self.kappa_atoms if E.contains(a.x))
        return total


def _overlap(lo: float, hi: float, E: SetExpr) -> float:
    total = 0.0
    for elo, ehi in E.intervals:
        a, b = max(lo, elo), min(hi, ehi)
        if a < b:
            total += b - a
    return total


def _check_within(field: SeedField, E: SetExpr) -> SetExpr:
    """``E`` clipped to the carrier; overhangs beyond rounding slivers are an error."""
    outside = E - field.carrier
    if not outside.is_empty:
        scale = max(1.0, *(abs(x) for iv in E.intervals for x in iv))
        if any(hi - lo > 64 * np.finfo(float).eps * scale for lo, hi in outside.intervals):
            raise OutOfCarrier(f"set {format_set(E)} is not contained in the carrier {format_set(field.carrier)}")
        E = E & field.carrier
    return E


def seed_components(field: SeedField, E: SetExpr):
    """Weighted seed list ``[(weight, seed), ...]`` whose sum is the triplet of ``E``."""
    E = _check_within(field, E)
    out = []
    for c in field.cells:
        w = c.kappa_density * _overlap(c.lo, c.hi, E)
        if w > 0:
            out.append((w, c.seed))
    for a in field.kappa_atoms:
        if E.contains(a.x):
            out.append((a.mass, a.seed))
    return out


def _weighted_sum(parts) -> FreeTriplet:
    a = b = 0.0
    atoms: list = []
    near: list = []
    body: list = []
    for w, seed in parts:
        a += w * seed.a
        b += w * seed.b
        if not seed.r.is_zero:
            r = seed.r.weighted(w)
            atoms += r.atoms
            near += r.near_zero
            body += r.body
    return FreeTriplet(a, b, LevyMeasure(tuple(atoms), tuple(near), tuple(body)))


def triplet_of_set(field: SeedField, E: SetExpr) -> FreeTriplet:
    """``(Theta(E), Sigma(E), F_E)`` with each part the kappa-integral of the seeds over ``E``."""
    return _weighted_sum(seed_components(field, E))


def _seed_control(seed: FreeTriplet) -> float:
    return control_constant(seed)


def control_measure(field: SeedField, E: SetExpr) -> float:
    """``|Theta|(E) + Sigma(E) + ∫ min(1, t^2) F_E(dt)`` recomputed from the seeds (not the stored kappa)."""
    return float(sum(w * _seed_control(seed) for w, seed in seed_components(field, E)))


def canonicalize_field(field: SeedField, strict: bool = False) -> SeedField:
    """Rescale seeds so that ``|theta| + sigma2 + ∫ min(1,t^2) rho = 1`` everywhere.

    Zero-seed cells carry no mass and are dropped (``strict=True`` raises
    :class:`DegenerateCell` instead).
    """
    cells = []
    for c in field.cells:
        k = _seed_control(c.seed)
        if k == 0:
            if strict:
                raise DegenerateCell(f"cell [{c.lo},{c.hi}) has a zero seed")
            continue
        cells.append(Cell(c.lo, c.hi, c.theta / k, c.sigma2 / k, c.rho.weighted(1.0 / k), c.kappa_density * k))
    atoms = []
    for a in field.kappa_atoms:
        k = _seed_control(a.seed)
        if k == 0:
            if strict:
                raise DegenerateCell(f"kappa atom at {a.x} has a zero seed")
            continue
        atoms.append(KappaAtom(a.x, a.mass * k, a.theta / k, a.sigma2 / k, a.rho.weighted(1.0 / k)))
    return SeedField(tuple(cells), tuple(atoms), field.carrier)


def is_canonical(field: SeedField, tol: float = 1e-9) -> bool:
    seeds = [c.seed for c in field.cells] + [a.seed for a in field.kappa_atoms]
    return all(abs(_seed_control(s) - 1.0) <= tol for s in seeds)


def _as_density_cells(eta) -> list:
    if isinstance(eta, SetExpr):
        return [(lo, hi, 1.0) for lo, hi in eta.intervals]
    out = []
    for item in eta:
        lo, hi, d = (item[0], item[1], 1.0) if len(item) == 2 else item
        out.append((float(lo), float(hi), float(d)))
    return out


def make_factorizable(nu: FreeTriplet, eta) -> SeedField:
    """Basis with constant seed ``nu / c_nu`` and control ``c_nu * eta``.

    ``eta`` is a :class:`SetExpr` (Lebesgue measure on it) or a list of
    ``(lo, hi, density)`` pieces.
    """
    if nu.flavor != FREE:
        raise ValidationError("make_factorizable needs a free triplet")
    c = control_constant(nu)
    if c == 0:
        raise ZeroLaw("the point mass at 0 has no factorizable basis (c_nu = 0)")
    cells = []
    for lo, hi, d in _as_density_cells(eta):
        if d < 0:
            raise ValidationError("eta density must be nonnegative")
        if d == 0:
            continue
        cells.append(Cell(lo, hi, nu.a / c, nu.b / c, nu.r.weighted(1.0 / c), c * d))
    return SeedField(tuple(cells))


def semicircular_basis(eta=None) -> SeedField:
    from .triplets import semicircle

    return make_factorizable(semicircle(), eta if eta is not None else interval(0.0, 1.0))


def free_poisson_basis(eta=None) -> SeedField:
    from .triplets import free_poisson

    return make_factorizable(free_poisson(), eta if eta is not None else interval(0.0, 1.0))


# ---------------------------------------------------------------------------
# Pushforward and concentration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PiecewiseLinearMap:
    """Continuous piecewise-linear map through ``(knots[i], values[i])``."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size < 2:
            raise ValidationError("knots and values must be equal-length 1-d sequences (>= 2 points)")
        if np.any(np.diff(k) <= 0):
            raise ValidationError("knots must be strictly increasing")
        dv = np.diff(v)
        if not (np.all(dv > 0) or np.all(dv < 0)):
            raise NotInvertible("map is not strictly monotone")
        object.__setattr__(self, "knots", tuple(float(x) for x in k))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @classmethod
    def affine(cls, slope: float, shift: float, lo: float, hi: float) -> "PiecewiseLinearMap":
        return cls((lo, hi), (slope * lo + shift, slope * hi + shift))

    @property
    def increasing(self) -> bool:
        return self.values[1] > self.values[0]

    @property
    def domain(self) -> SetExpr:
        return interval(self.knots[0], self.knots[-1])

    def __call__(self, x):
        return np.interp(x, self.knots, self.values)

    def inverse(self) -> "PiecewiseLinearMap":
        if self.increasing:
            return PiecewiseLinearMap(self.values, self.knots)
        return PiecewiseLinearMap(self.values[::-1], self.knots[::-1])

    def pieces(self):
        """``(lo, hi, slope, intercept)`` for each linear piece."""
        out = []
        for (x0, x1), (y0, y1) in zip(zip(self.knots, self.knots[1:]), zip(self.values, self.values[1:])):
            s = (y1 - y0) / (x1 - x0)
            out.append((x0, x1, s, y0 - s * x0))
        return out

    def image(self, E: SetExpr) -> SetExpr:
        # endpoints go through the same evaluation as pushed cells, so adjacent
        # pieces meet exactly
        ivs = []
        for lo, hi, _, _ in self.pieces():
            for elo, ehi in E.intervals:
                a, b = max(lo, elo), min(hi, ehi)
                if a < b:
                    y0, y1 = sorted((float(self(a)), float(self(b))))
                    ivs.append((y0, y1))
        return SetExpr(tuple(ivs))

    def preimage(self, H: SetExpr) -> SetExpr:
        ivs = []
        for lo, hi, s, c in self.pieces():
            for hlo, hhi in H.intervals:
                a, b = sorted(((hlo - c) / s, (hhi - c) / s))
                a, b = max(a, lo), min(b, hi)
                if a < b:
                    ivs.append((a, b))
        return SetExpr(tuple(ivs))


def pushforward_field(field: SeedField, phi: PiecewiseLinearMap) -> SeedField:
    """Field of ``H -> M(phi^{-1}(H))``: cells mapped, control density divided by ``|phi'|``."""
    if not field.carrier.issubset(phi.domain):
        raise NotInvertible("map must be defined on the whole carrier")
    cells = []
    for c in field.cells:
        for lo, hi, s, icpt in phi.pieces():
            a, b = max(lo, c.lo), min(hi, c.hi)
            if a >= b:
                continue
            y0, y1 = sorted((float(phi(a)), float(phi(b))))
            cells.append(c.with_seed(c.seed, c.kappa_density / abs(s), lo=y0, hi=y1))
    atoms = [a.with_seed(a.seed, x=float(phi(a.x))) for a in field.kappa_atoms]
    return SeedField(tuple(cells), tuple(atoms), phi.image(field.carrier))


def concentrate_field(field: SeedField, A: SetExpr) -> SeedField:
    """Field of ``E -> M(A ∩ E)``; the carrier is unchanged."""
    cells = []
    for c in field.cells:
        for lo, hi in (interval(c.lo, c.hi) & A).intervals:
            cells.append(replace(c, lo=lo, hi=hi))
    atoms = [a for a in field.kappa_atoms if A.contains(a.x)]
    return SeedField(tuple(cells), tuple(atoms), field.carrier)


# ---------------------------------------------------------------------------
# Signed measures on the line
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SignedSetMeasure:
    """Piecewise-constant Lebesgue density on cells plus signed point masses."""

    cells: tuple = ()  # (lo, hi, density)
    atoms: tuple = ()  # (x, mass)

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(sorted((float(a), float(b), float(d)) for a, b, d in self.cells)))
        object.__setattr__(self, "atoms", tuple(sorted((float(x), float(m)) for x, m in self.atoms)))

    def __call__(self, E: SetExpr) -> float:
        total = 0.0
        for lo, hi, d in self.cells:
            total += d * _overlap(lo, hi, E)
        total += sum(m for x, m in self.atoms if E.contains(x))
        return total

    def positive_part(self) -> "SignedSetMeasure":
        return SignedSetMeasure(
            tuple(c for c in self.cells if c[2] > 0), tuple(a for a in self.atoms if a[1] > 0)
        )

    def negative_part(self) -> "SignedSetMeasure":
        return SignedSetMeasure(
            tuple((lo, hi, -d) for lo, hi, d in self.cells if d < 0),
            tuple((x, -m) for x, m in self.atoms if m < 0),
        )

    def total_variation(self, E: SetExpr) -> float:
        return self.positive_part()(E) + self.negative_part()(E)

