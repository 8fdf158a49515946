"""Atomic/diffuse decomposition of free completely random measures and the Lévy-Itô split of a basis."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import measures as M
from .cumulants import MomentVector
from .errors import DivergentIntegral, MissingMoments, NegativeLawInPositiveMode, ValidationError
from .levy_basis import (
    Cell,
    KappaAtom,
    SeedField,
    SetExpr,
    SignedSetMeasure,
    _overlap,
    canonicalize_field,
    interval,
    triplet_of_set,
)
from .measures import LevyMeasure, levy_quadrature
from .triplets import FreeTriplet, free_cumulants_from_triplet, triplet_add

log = logging.getLogger(__name__)

POSITIVE = "positive"
SIGNED = "signed"


@dataclass(frozen=True)
class AtomLaw:
    """Point component of a completely random measure: its location, law and positivity flag."""

    x: float
    law: FreeTriplet | MomentVector
    positive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))


@dataclass(frozen=True)
class FCRMModel:
    diffuse: SeedField
    atoms: tuple = ()

    def __post_init__(self):
        atoms = tuple(sorted(self.atoms, key=lambda a: a.x))
        for a1, a2 in zip(atoms, atoms[1:]):
            if a1.x == a2.x:
                raise ValidationError(f"two point components at x={a1.x}")
        object.__setattr__(self, "atoms", atoms)


def law_cumulants(law, p: int) -> tuple:
    """First ``p`` free cumulants of a triplet-backed or moment-backed law."""
    if isinstance(law, FreeTriplet):
        try:
            return tuple(free_cumulants_from_triplet(law, p))
        except DivergentIntegral as exc:
            raise MissingMoments(str(exc)) from exc
    if isinstance(law, MomentVector):
        if len(law) < p:
            raise MissingMoments(f"law has {len(law)} moments, {p} needed")
        m = law.values
        out = [m[0]]
        if p >= 2:
            out.append(m[1] - m[0] ** 2)
        if p >= 3:
            raise ValidationError("moment-backed laws only provide the first two cumulants here")
        return tuple(out)
    raise ValidationError(f"unsupported law type {type(law).__name__}")


def _cumulant(law, j: int) -> float:
    return float(law_cumulants(law, j)[j - 1])


def _diffuse_cumulant(diffuse: SeedField, E: SetExpr, j: int) -> float:
    if E.is_empty:
        return 0.0
    return float(free_cumulants_from_triplet(triplet_of_set(diffuse, E), j)[j - 1])


def first_cumulant_measure(model: FCRMModel, E: SetExpr) -> float:
    """``mu_1(E)``: first free cumulant of ``M(E)``, summed over point and diffuse components."""
    total = sum(_cumulant(a.law, 1) for a in model.atoms if E.contains(a.x))
    return total + _diffuse_cumulant(model.diffuse, E, 1)


def second_cumulant_measure(model: FCRMModel, E: SetExpr) -> float:
    """``mu_2(E)``: variance of ``M(E)``."""
    total = 0.0
    for a in model.atoms:
        if E.contains(a.x):
            k2 = _cumulant(a.law, 2)
            if k2 < -1e-12:
                raise ValidationError(f"law at {a.x} has negative variance {k2}")
            total += max(k2, 0.0)
    return total + _diffuse_cumulant(model.diffuse, E, 2)


# ---------------------------------------------------------------------------
# Positivity
# ---------------------------------------------------------------------------


def _subordinator_like(u: FreeTriplet) -> bool:
    """Sufficient condition for support in ``[0, inf)``: no Gaussian part, jumps on (0, inf) with
    ``∫_0^1 t r(dt) < inf`` and nonnegative drift after removing the compensator."""
    if u.b != 0.0 or u.r.charges_negative():
        return False
    try:
        comp = levy_quadrature(u.r, M.sigma()) if not u.r.is_zero else 0.0
    except DivergentIntegral:
        return False
    return u.a - comp >= -1e-12


def law_support_nonnegative(u: FreeTriplet, points: int = 801) -> bool:
    """Is the law of ``u`` carried by ``[0, inf)``? Structural test first, then the density estimate."""
    if _subordinator_like(u):
        return True
    from .transforms import density_from_triplet

    k1, k2 = free_cumulants_from_triplet(u, 2)
    half = abs(k1) + 4.0 * math.sqrt(k2) + 2.0 * u.r.support_bound() + 1.0
    grid = np.linspace(-half, half, points)
    dens = density_from_triplet(u, grid)
    neg = grid < -1e-9
    mass_neg = float(np.trapezoid(dens.density[neg], grid[neg])) if neg.sum() > 1 else 0.0
    atom_neg = sum(m for x, m in dens.atoms if x < -1e-9)
    return mass_neg + atom_neg < 1e-6


def _check_positive(model: FCRMModel) -> None:
    for a in model.atoms:
        if not a.positive:
            raise NegativeLawInPositiveMode(f"point component at {a.x} is not flagged positive")
        if isinstance(a.law, FreeTriplet):
            if not law_support_nonnegative(a.law):
                raise NegativeLawInPositiveMode(f"law at {a.x} charges (-inf, 0)")
        elif a.law[0] < 0:
            raise NegativeLawInPositiveMode(f"law at {a.x} has negative mean")
    for c in model.diffuse.cells:
        w = c.kappa_mass
        if not law_support_nonnegative(FreeTriplet(w * c.theta, w * c.sigma2, c.rho.weighted(w))):
            raise NegativeLawInPositiveMode(f"diffuse part on [{c.lo},{c.hi}) charges (-inf, 0)")
    for k in model.diffuse.kappa_atoms:
        if not law_support_nonnegative(FreeTriplet(k.mass * k.theta, k.mass * k.sigma2, k.rho.weighted(k.mass))):
            raise NegativeLawInPositiveMode(f"diffuse kappa atom at {k.x} charges (-inf, 0)")


# ---------------------------------------------------------------------------
# Kingman decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AtomicComponent:
    x: float
    law: FreeTriplet | MomentVector
    mu_mass: float

    def coefficient(self, E: SetExpr) -> float:
        """``mu(A ∩ E) / mu(A)`` for the atom ``A = {x}``: 1 if ``x`` in ``E`` else 0."""
        return 1.0 if E.contains(self.x) else 0.0


@dataclass(frozen=True)
class KingmanDecomposition:
    mode: str
    atomic: tuple
    diffuse: SeedField
    dropped: tuple = ()

    def first_cumulant(self, E: SetExpr) -> float:
        total = sum(a.coefficient(E) * _cumulant(a.law, 1) for a in self.atomic)
        return total + _diffuse_cumulant(self.diffuse, E, 1)

    def second_cumulant(self, E: SetExpr) -> float:
        total = sum(a.coefficient(E) * _cumulant(a.law, 2) for a in self.atomic)
        return total + _diffuse_cumulant(self.diffuse, E, 2)

    def mu_density(self, cell: Cell) -> float:
        """Lebesgue density of the diffuse control measure ``mu_c`` on a cell."""
        k = cell.kappa_density
        k1, k2 = free_cumulants_from_triplet(cell.seed, 2)
        if self.mode == POSITIVE:
            return k * k1
        return k * (abs(k1) + k2)

    def mu_diffuse(self, E: SetExpr) -> float:
        return float(sum(self.mu_density(c) * _overlap(c.lo, c.hi, E) for c in self.diffuse.cells))


def _mu_mass(law, mode: str) -> float:
    if mode == POSITIVE:
        return _cumulant(law, 1)
    k1, k2 = law_cumulants(law, 2)
    return abs(k1) + k2


def _combine_laws(l1, l2):
    if isinstance(l1, FreeTriplet) and isinstance(l2, FreeTriplet):
        return triplet_add(l1, l2)
    c1 = law_cumulants(l1, 2)
    c2 = law_cumulants(l2, 2)
    k1, k2 = c1[0] + c2[0], c1[1] + c2[1]
    return MomentVector((k1, k2 + k1 * k1))


def kingman_decompose(model: FCRMModel, mode: str = POSITIVE) -> KingmanDecomposition:
    """Split into point components with 0/1 coefficients and a diffuse free Lévy basis.

    Point masses of the diffuse field's control measure are moved to the
    atomic part; components of zero ``mu``-mass are dropped and reported.
    """
    if mode not in (POSITIVE, SIGNED):
        raise ValidationError("mode must be 'positive' or 'signed'")
    if mode == POSITIVE:
        _check_positive(model)
    laws: dict = {}
    for a in model.atoms:
        laws[a.x] = a.law
    for k in model.diffuse.kappa_atoms:
        law = FreeTriplet(k.mass * k.theta, k.mass * k.sigma2, k.rho.weighted(k.mass))
        laws[k.x] = _combine_laws(laws[k.x], law) if k.x in laws else law
    atomic, dropped = [], []
    for x in sorted(laws):
        law = laws[x]
        mass = _mu_mass(law, mode)
        if mass == 0.0:
            log.info("point component at %g has zero mu-mass; its law must be the point mass at 0", x)
            dropped.append(x)
            continue
        atomic.append(AtomicComponent(x, law, mass))
    diffuse = SeedField(model.diffuse.cells, (), model.diffuse.carrier)
    return KingmanDecomposition(mode, tuple(atomic), diffuse, tuple(dropped))


def equal_mu_split(decomp: KingmanDecomposition, E: SetExpr, n: int) -> list:
    """Split ``E`` into ``n`` consecutive pieces of equal diffuse ``mu``-measure."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    segs = []  # (lo, hi, density) pieces of E carrying mu
    for c in decomp.diffuse.cells:
        d = decomp.mu_density(c)
        for lo, hi in (interval(c.lo, c.hi) & E).intervals:
            if d > 0:
                segs.append((lo, hi, d))
    segs.sort()
    total = sum((hi - lo) * d for lo, hi, d in segs)
    if total <= 0:
        raise ValidationError("set carries no diffuse mu-mass")
    cum = np.concatenate([[0.0], np.cumsum([(hi - lo) * d for lo, hi, d in segs])])

    def locate(target):
        j = min(int(np.searchsorted(cum, target, side="right")) - 1, len(segs) - 1)
        lo, hi, d = segs[j]
        return j, min(hi, lo + (target - cum[j]) / d)

    pieces = []
    start = (0, segs[0][0])
    for i in range(1, n + 1):
        end = (len(segs) - 1, segs[-1][1]) if i == n else locate(total * i / n)
        ivs = []
        j0, x0 = start
        j1, x1 = end
        for j in range(j0, j1 + 1):
            lo = x0 if j == j0 else segs[j][0]
            hi = x1 if j == j1 else segs[j][1]
            if lo < hi:
                ivs.append((lo, hi))
        pieces.append(SetExpr(tuple(ivs)))
        start = end
    return pieces


@dataclass(frozen=True)
class NullArrayReport:
    ns: tuple
    bounds: tuple  # max_j mu_c(E_j) / eps for each n
    scaled: tuple  # n * bound / (n0 * bound0)
    factor: float

    @property
    def passed(self) -> bool:
        return all(1.0 / self.factor <= s <= self.factor for s in self.scaled)


def null_array_check(
    decomp: KingmanDecomposition, E: SetExpr, eps: float = 0.1, ns: Sequence[int] = (2, 4, 8), factor: float = 1.5
) -> NullArrayReport:
    """Markov tail bound ``max_j mu_c(E_j) / eps`` over equal-``mu`` splits; it should decay like ``1/n``.

    ``mu_c(E_j)`` is recomputed from the triplet of each piece, so the check
    also exercises the split and the cumulant bookkeeping.
    """
    bounds = []
    for n in ns:
        worst = 0.0
        for piece in equal_mu_split(decomp, E, n):
            u = triplet_of_set(decomp.diffuse, piece)
            k1, k2 = free_cumulants_from_triplet(u, 2)
            mu = k1 if decomp.mode == POSITIVE else abs(k1) + k2
            worst = max(worst, mu / eps)
        bounds.append(worst)
    scaled = tuple(n * b / (ns[0] * bounds[0]) for n, b in zip(ns, bounds))
    return NullArrayReport(tuple(ns), tuple(bounds), scaled, factor)


# ---------------------------------------------------------------------------
# Lévy-Itô
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevyItoParts:
    drift: SignedSetMeasure
    gaussian: SeedField
    jumps: SeedField
    compensated_drift: SignedSetMeasure | None = None

    def triplet(self, E: SetExpr) -> FreeTriplet:
        """Recombined triplet ``(Theta(E), Sigma(E), F_E)``."""
        g = triplet_of_set(self.gaussian, E)
        j = triplet_of_set(self.jumps, E)
        return FreeTriplet(self.drift(E), g.b, j.r)


def _compensator(rho: LevyMeasure) -> float | None:
    if rho.is_zero:
        return 0.0
    try:
        levy_quadrature(rho, M.abs_sigma())
        return levy_quadrature(rho, M.sigma())
    except DivergentIntegral:
        return None


def levy_ito_split(field: SeedField) -> LevyItoParts:
    """Drift measure, semicircular part and jump part of a basis.

    When every seed has ``∫ |sigma| d rho < inf`` the compensated drift
    ``Theta - ∫ sigma dF`` is reported as well.
    """
    drift_cells, drift_atoms = [], []
    g_cells, g_atoms, j_cells, j_atoms = [], [], [], []
    comp_cells, comp_atoms = [], []
    compensable = True
    for c in field.cells:
        if c.theta != 0.0:
            drift_cells.append((c.lo, c.hi, c.theta * c.kappa_density))
        if c.sigma2 > 0:
            g_cells.append(Cell(c.lo, c.hi, 0.0, c.sigma2, LevyMeasure(), c.kappa_density))
        if not c.rho.is_zero:
            j_cells.append(Cell(c.lo, c.hi, 0.0, 0.0, c.rho, c.kappa_density))
        comp = _compensator(c.rho)
        if comp is None:
            compensable = False
        else:
            comp_cells.append((c.lo, c.hi, c.kappa_density * (c.theta - comp)))
    for a in field.kappa_atoms:
        if a.theta != 0.0:
            drift_atoms.append((a.x, a.mass * a.theta))
        if a.sigma2 > 0:
            g_atoms.append(KappaAtom(a.x, a.mass, 0.0, a.sigma2, LevyMeasure()))
        if not a.rho.is_zero:
            j_atoms.append(KappaAtom(a.x, a.mass, 0.0, 0.0, a.rho))
        comp = _compensator(a.rho)
        if comp is None:
            compensable = False
        else:
            comp_atoms.append((a.x, a.mass * (a.theta - comp)))
    compensated = SignedSetMeasure(tuple(comp_cells), tuple(comp_atoms)) if compensable else None
    return LevyItoParts(
        SignedSetMeasure(tuple(drift_cells), tuple(drift_atoms)),
        SeedField(tuple(g_cells), tuple(g_atoms), field.carrier),
        SeedField(tuple(j_cells), tuple(j_atoms), field.carrier),
        compensated,
    )


def recombine(parts: LevyItoParts) -> SeedField:
    """Single field with the same set triplets as ``parts`` (canonical form)."""
    edges = set()
    for lo, hi, _ in parts.drift.cells:
        edges |= {lo, hi}
    for f in (parts.gaussian, parts.jumps):
        for c in f.cells:
            edges |= {c.lo, c.hi}
    edges = sorted(edges)
    cells = []
    for lo, hi in zip(edges, edges[1:]):
        mid = 0.5 * (lo + hi)
        theta = sum(d for a, b, d in parts.drift.cells if a <= mid < b)
        sigma2 = sum(c.sigma2 * c.kappa_density for c in parts.gaussian.cells if c.lo <= mid < c.hi)
        rho = LevyMeasure()
        for c in parts.jumps.cells:
            if c.lo <= mid < c.hi:
                rho = rho + c.rho.weighted(c.kappa_density)
        if theta or sigma2 or not rho.is_zero:
            cells.append(Cell(lo, hi, theta, sigma2, rho, 1.0))
    xs = sorted({x for x, _ in parts.drift.atoms} | {a.x for f in (parts.gaussian, parts.jumps) for a in f.kappa_atoms})
    atoms = []
    for x in xs:
        theta = sum(m for y, m in parts.drift.atoms if y == x)
        sigma2 = sum(a.sigma2 * a.mass for a in parts.gaussian.kappa_atoms if a.x == x)
        rho = LevyMeasure()
        for a in parts.jumps.kappa_atoms:
            if a.x == x:
                rho = rho + a.rho.weighted(a.mass)
        if theta or sigma2 or not rho.is_zero:
            atoms.append(KappaAtom(x, 1.0, theta, sigma2, rho))
    return canonicalize_field(SeedField(tuple(cells), tuple(atoms), parts.gaussian.carrier))


def truncate_small_jumps(field: SeedField, eps: float) -> SeedField:
    """Jump field with each seed's Lévy measure restricted to ``|t| > eps``.

    Its set triplets are ``(0, 0, F_E restricted to |t| > eps)``; the drift
    and Gaussian parts of ``field`` are not included.
    """
    if not eps > 0:
        raise ValidationError("eps must be > 0")
    cells = []
    for c in field.cells:
        r = c.rho.restrict_outside(eps) if not c.rho.is_zero else c.rho
        if not r.is_zero:
            cells.append(Cell(c.lo, c.hi, 0.0, 0.0, r, c.kappa_density))
    atoms = []
    for a in field.kappa_atoms:
        r = a.rho.restrict_outside(eps) if not a.rho.is_zero else a.rho
        if not r.is_zero:
            atoms.append(KappaAtom(a.x, a.mass, 0.0, 0.0, r))
    return SeedField(tuple(cells), tuple(atoms), field.carrier)
