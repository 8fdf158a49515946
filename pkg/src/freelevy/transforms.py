"""Free cumulant transform, R-transform, Cauchy transform and spectral densities.

The Cauchy transform of a freely infinitely divisible law is obtained from
its triplet by solving ``G = 1 / (z - R(G))`` on the lower half-plane. The
solver works on whole arrays of ``z`` at once; it evaluates ``R`` through a
fixed discretization of ``t^2 r(dt)`` (exact for atoms, high-order Gauss
rules for densities) so that a grid of several hundred points costs a
handful of matrix-vector products per iteration.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba
import numpy as np
from scipy import integrate, special

from . import measures as M
from .errors import DomainError, FlavorMismatch, NoConvergence, ValidationError
from .measures import levy_quadrature
from .triplets import CLASSICAL, FREE, FreeTriplet

log = logging.getLogger(__name__)

DEFAULT_EPS_LADDER = (1e-3, 1e-4, 1e-5)
ATOM_THRESHOLD = 1e-3


def _require_free(u: FreeTriplet) -> None:
    if u.flavor != FREE:
        raise FlavorMismatch("expected a free triplet")


def _free_ct_value(u: FreeTriplet, z: complex) -> complex:
    """Free Lévy-Khintchine expression at any non-real ``z`` (or 0)."""
    z = complex(z)
    if z == 0:
        return 0j
    val = u.a * z + u.b * z * z
    if not u.r.is_zero:
        val += levy_quadrature(u.r, M.ct_kernel(z))
    return val


def eval_free_ct(u: FreeTriplet, z: complex) -> complex:
    """Free cumulant transform ``C(z) = a z + b z^2 + ∫ (1/(1-tz) - 1 - z sigma(t)) r(dt)`` for ``Im z < 0``."""
    _require_free(u)
    z = complex(z)
    if not z.imag < 0:
        raise DomainError(f"free cumulant transform is evaluated on Im z < 0, got {z}")
    return _free_ct_value(u, z)


def _r_value(u: FreeTriplet, w: complex) -> complex:
    w = complex(w)
    val = u.a + u.b * w
    if not u.r.is_zero:
        val += levy_quadrature(u.r, M.r_kernel(w))
    return val


def eval_r_transform(u: FreeTriplet, w: complex, allow_real: bool = False) -> complex:
    """R-transform ``a + b w + ∫ (t^2 w/(1-tw) + t - sigma(t)) r(dt)``, so that ``C(z) = z R(z)``.

    ``allow_real`` extends the evaluation to real ``w`` with ``1 - t w`` bounded
    away from 0 (used in tests at small ``|w|``).
    """
    _require_free(u)
    w = complex(w)
    if not (w.imag < 0 or allow_real):
        raise DomainError(f"R-transform is evaluated on Im w < 0, got {w}")
    return _r_value(u, w)


def eval_classical_cf(u: FreeTriplet, y: float) -> complex:
    """Classical characteristic function ``exp(i a y - b y^2/2 + ∫ (e^{ity} - 1 - i y sigma(t)) r(dt))``."""
    if u.flavor != CLASSICAL:
        raise FlavorMismatch("eval_classical_cf expects a classical triplet")
    y = float(y)
    expo = 1j * u.a * y - 0.5 * u.b * y * y
    if not u.r.is_zero:
        expo += levy_quadrature(u.r, M.cf_kernel(y))
    return complex(np.exp(expo))


# ---------------------------------------------------------------------------
# Discretized R for the fixed-point solver
# ---------------------------------------------------------------------------

_GL_NODES = 16
_BODY_PANELS = 48
_NEAR_ZERO_LEVELS = 48


@dataclass(frozen=True)
class RRule:
    """``R(w) = const + b w + sum_j wt_j * w / (1 - t_j w)`` with ``wt_j`` discretizing ``t^2 r(dt)``."""

    const: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray

    def __call__(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        out = self.const + self.b * w
        if self.nodes.size:
            out = out + _kernel_sum(w.ravel(), self.nodes, self.weights, False).reshape(w.shape)
        return out

    def derivative(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        out = np.full(w.shape, self.b, dtype=complex)
        if self.nodes.size:
            out = out + _kernel_sum(w.ravel(), self.nodes, self.weights, True).reshape(w.shape)
        return out


@numba.njit(cache=True, nogil=True)
def _kernel_sum(w, nodes, weights, derivative):
    # sum_j wt_j w/(1 - t_j w), or its w-derivative sum_j wt_j/(1 - t_j w)^2
    out = np.empty(w.size, dtype=np.complex128)
    for i in range(w.size):
        wi = w[i]
        acc = 0j
        for j in range(nodes.size):
            d = 1.0 - nodes[j] * wi
            if derivative:
                acc += weights[j] / (d * d)
            else:
                acc += weights[j] * wi / d
        out[i] = acc
    return out


def _gl(lo, hi, n=_GL_NODES):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def build_r_rule(u: FreeTriplet) -> RRule:
    _require_free(u)
    r = u.r
    const = u.a + (levy_quadrature(r, M.t_minus_sigma()) if not r.is_zero else 0.0)
    nodes: list = []
    weights: list = []
    for t, m in r.atoms:
        nodes.append(np.array([t]))
        weights.append(np.array([m * t * t]))
    for p in r.body:
        edges = np.linspace(p.lo, p.hi, _BODY_PANELS + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            x, w = _gl(lo, hi)
            nodes.append(x)
            weights.append(w * x * x * p.density(x))
    for nz in r.near_zero:
        expo = 1.0 - nz.alpha  # t^2 * t^(-1-alpha)
        inner = nz.eps0 * 2.0**-_NEAR_ZERO_LEVELS
        xj, wj = special.roots_jacobi(_GL_NODES, 0.0, expo)
        # weight (1+x)^expo on [-1,1] mapped to (0, inner)
        x_in = 0.5 * inner * (xj + 1.0)
        w_in = wj * (0.5 * inner) ** (1.0 + expo)
        levels = [(nz.eps0 * 2.0 ** -(k + 1), nz.eps0 * 2.0**-k) for k in range(_NEAR_ZERO_LEVELS)]
        for sign, c in ((1.0, nz.c_plus), (-1.0, nz.c_minus)):
            if c == 0:
                continue
            nodes.append(sign * x_in)
            weights.append(c * w_in)
            for lo, hi in levels:
                x, w = _gl(lo, hi)
                nodes.append(sign * x)
                weights.append(c * w * x**expo)
    if nodes:
        t = np.concatenate(nodes)
        wt = np.concatenate(weights)
    else:
        t = np.zeros(0)
        wt = np.zeros(0)
    return RRule(float(const), u.b, t, wt)


def solve_cauchy(
    u: FreeTriplet | RRule,
    z,
    G0=None,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    damping: float = 0.5,
    newton_after: int = 200,
):
    """Vectorized subordination solve of ``G = 1/(z - R(G))`` for ``Im z > 0``.

    Returns ``(G, residual, converged_mask)``. The residual is
    ``|G - 1/(z - R(G))| / max(1, |G|)``.
    """
    rule = u if isinstance(u, RRule) else build_r_rule(u)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag <= 0):
        raise DomainError("Cauchy transform is evaluated on Im z > 0")
    G = (1.0 / z) if G0 is None else np.array(G0, dtype=complex, copy=True)
    G = _project(G)
    damp = np.full(z.shape, damping)

    def residual(Gv, zv):
        T = 1.0 / (zv - rule(Gv))
        return np.abs(Gv - T) / np.maximum(1.0, np.abs(Gv)), T

    res, T = residual(G, z)
    for it in range(max_iter):
        todo = np.nonzero(res > tol)[0]
        if todo.size == 0:
            break
        Ga, za, Ta, ra = G[todo], z[todo], T[todo], res[todo]
        if it < newton_after:
            cand = _project((1.0 - damp[todo]) * Ga + damp[todo] * Ta)
            new_res, new_T = residual(cand, za)
            worse = new_res > ra
            damp[todo[worse]] = np.maximum(damp[todo[worse]] * 0.5, 1.0 / 64.0)
        else:
            Rg = rule(Ga)
            denom = za - Rg
            F = Ga - 1.0 / denom
            dF = 1.0 - rule.derivative(Ga) / denom**2
            step = -F / dF
            cand = _project(Ga + step)
            new_res, new_T = residual(cand, za)
            lam = 1.0
            for _ in range(30):
                bad = ~(new_res < ra) & (new_res > tol)
                if not bad.any():
                    break
                lam *= 0.5
                trial = _project(Ga[bad] + lam * step[bad])
                tr, tT = residual(trial, za[bad])
                cand[bad], new_res[bad], new_T[bad] = trial, tr, tT
        G[todo], res[todo], T[todo] = cand, new_res, new_T
    return G, res, res <= tol


def _project(G: np.ndarray) -> np.ndarray:
    """Keep iterates strictly inside the lower half-plane."""
    floor = 1e-300 + 1e-15 * np.abs(G)
    return np.where(G.imag < -floor, G, G.real - 1j * floor)


def cauchy_from_triplet(u: FreeTriplet, z: complex, tol: float = 1e-12, max_iter: int = 10_000) -> complex:
    """Cauchy transform ``G(z) = ∫ 1/(z - x) nu(dx)`` of the law with free triplet ``u``, ``Im z > 0``."""
    _require_free(u)
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"Cauchy transform is evaluated on Im z > 0, got {z}")
    G, res, ok = solve_cauchy(u, np.array([z]), tol=tol, max_iter=max_iter)
    if not ok[0]:
        raise NoConvergence(f"subordination iteration did not converge at z={z}", residual=float(res[0]))
    return complex(G[0])


# ---------------------------------------------------------------------------
# Spectral densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralDensity:
    """Grid-sampled law: continuous density, total CDF and separately recorded atoms."""

    grid: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    support_estimate: tuple
    atoms: tuple = ()
    flagged: tuple = ()

    @property
    def continuous_cdf(self) -> np.ndarray:
        return _cumtrapz(self.grid, self.density)

    def cdf_at(self, x) -> np.ndarray:
        """Model CDF at ``x``: stored continuous part interpolated, atoms added exactly."""
        x = np.asarray(x, dtype=float)
        cont = self.cdf - self._atom_steps(self.grid)
        out = np.interp(x, self.grid, cont, left=0.0, right=cont[-1])
        return out + self._atom_steps(x)

    def cdf_left(self, x) -> np.ndarray:
        """Left limit ``F(x-)``."""
        x = np.asarray(x, dtype=float)
        return self.cdf_at(x) - sum((m * (x == loc) for loc, m in self.atoms), np.zeros_like(x))

    def _atom_steps(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for loc, mass in self.atoms:
            out = out + mass * (x >= loc)
        return out

    @property
    def total_mass(self) -> float:
        return float(self.continuous_cdf[-1] + sum(m for _, m in self.atoms))

    def moment(self, n: int) -> float:
        cont = float(integrate.trapezoid(self.grid**n * self.density, self.grid))
        return cont + sum(m * loc**n for loc, m in self.atoms)


def _cumtrapz(x, y):
    out = np.zeros_like(x, dtype=float)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


def _finish_density(grid, density, atoms, flagged=()) -> SpectralDensity:
    density = np.maximum(np.asarray(density, dtype=float), 0.0)
    cont = _cumtrapz(grid, density)
    cdf = cont.copy()
    for loc, mass in atoms:
        cdf = cdf + mass * (grid >= loc)
    peak = float(density.max()) if density.size else 0.0
    idx = np.nonzero(density > 1e-6 * peak)[0] if peak > 0 else np.array([], dtype=int)
    lo_hi = [float(grid[idx[0]]), float(grid[idx[-1]])] if idx.size else []
    lo_hi += [loc for loc, _ in atoms]
    support = (min(lo_hi), max(lo_hi)) if lo_hi else (math.nan, math.nan)
    return SpectralDensity(grid, density, cdf, support, tuple(atoms), tuple(flagged))


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be a strictly increasing 1-d array with at least 2 points")
    return grid


def density_from_triplet(
    u: FreeTriplet,
    grid,
    eps_ladder: Sequence[float] = DEFAULT_EPS_LADDER,
    tol: float = 1e-12,
) -> SpectralDensity:
    """Stieltjes inversion ``-Im G(x + i eps)/pi`` with first-order Richardson extrapolation in ``eps``.

    Atoms are detected at grid points only; put known atom locations on the grid.
    """
    _require_free(u)
    grid = _check_grid(grid)
    ladder = [float(e) for e in eps_ladder]
    if len(ladder) < 2 or any(e <= 0 for e in ladder) or any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValidationError("eps_ladder must be a decreasing sequence of at least two positive numbers")
    rule = build_r_rule(u)
    # continuation from a comfortable height down to the ladder
    warm = [10.0 ** k for k in range(0, int(math.floor(math.log10(ladder[0]))), -1)]
    G = None
    flagged = np.zeros(grid.shape, dtype=bool)
    samples = []
    for eps in warm + ladder:
        z = grid + 1j * eps
        G, res, ok = solve_cauchy(rule, z, G0=G, tol=tol)
        if eps in ladder:
            samples.append((eps, G.copy()))
            flagged |= ~ok
    if flagged.any():
        log.warning("Cauchy solver did not converge at %d grid points", int(flagged.sum()))

    (e1, G1), (e2, G2) = samples[-2], samples[-1]
    f1 = -G1.imag / math.pi
    f2 = -G2.imag / math.pi
    density = (e1 * f2 - e2 * f1) / (e1 - e2)

    # an atom keeps eps*|Im G| constant along the ladder; an integrable
    # singularity of the density makes it decay like a power of eps
    weights = np.array([eps * np.abs(Gs.imag) for eps, Gs in samples])
    atom_hits = np.all(weights > ATOM_THRESHOLD, axis=0) & (weights[-1] >= 0.5 * weights[0])
    # points where -Im G still grows markedly down the ladder sit on an
    # integrable singularity; their extrapolated value is not a density sample
    f0 = -samples[0][1].imag / math.pi
    singular = ~atom_hits & (f2 > 1.5 * f1) & (f1 > 1.5 * f0) & (f2 > 1.0)
    atoms = [(float(grid[i]), float(e2 * abs(G2[i].imag))) for i in np.nonzero(atom_hits)[0]]
    bad = atom_hits | singular
    for i in np.nonzero(bad)[0]:
        nb = [j for j in (i - 1, i + 1) if 0 <= j < grid.size and not bad[j]]
        density[i] = float(np.mean(density[nb])) if nb else 0.0
    return _finish_density(grid, density, atoms, tuple(int(i) for i in np.nonzero(flagged)[0]))


# ---------------------------------------------------------------------------
# Closed-form laws
# ---------------------------------------------------------------------------


def semicircle_pdf(t, center: float = 0.0, radius: float = 2.0):
    """``2/(pi l^2) sqrt(l^2 - (t-c)^2)`` on ``[c-l, c+l]``."""
    t = np.asarray(t, dtype=float)
    inside = np.clip(radius**2 - (t - center) ** 2, 0.0, None)
    return 2.0 / (math.pi * radius**2) * np.sqrt(inside)


def semicircle_cdf(t, center: float = 0.0, radius: float = 2.0):
    u = np.clip((np.asarray(t, dtype=float) - center) / radius, -1.0, 1.0)
    return 0.5 + (u * np.sqrt(1.0 - u * u) + np.arcsin(u)) / math.pi


def mp_edges(lam: float) -> tuple:
    return (1.0 - math.sqrt(lam)) ** 2, (1.0 + math.sqrt(lam)) ** 2


def mp_pdf(t, lam: float = 1.0):
    """Absolutely continuous part of the free Poisson law with rate ``lam`` (jump size 1)."""
    s, u = mp_edges(lam)
    t = np.asarray(t, dtype=float)
    inside = np.clip((t - s) * (u - t), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where((t > 0) & (inside > 0), np.sqrt(inside) / (2.0 * math.pi * np.where(t > 0, t, 1.0)), 0.0)
    return val


def mp_atom(lam: float) -> float:
    return max(0.0, 1.0 - lam)


def _pdf_cdf(pdf: Callable, grid: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Cumulative integral of a compactly supported pdf on [lo, hi] at the grid points."""
    pts = np.clip(grid, lo, hi)
    out = np.zeros_like(grid)
    acc = 0.0
    prev = lo
    for i, x in enumerate(pts):
        if x > prev:
            acc += integrate.quad(lambda t: float(pdf(t)), prev, x, limit=200)[0]
            prev = x
        out[i] = acc
    return out


def semicircle_law(grid, variance: float = 1.0, mean: float = 0.0) -> SpectralDensity:
    grid = _check_grid(grid)
    radius = 2.0 * math.sqrt(variance)
    dens = semicircle_pdf(grid, mean, radius)
    cdf = semicircle_cdf(grid, mean, radius)
    return SpectralDensity(grid, dens, cdf, (mean - radius, mean + radius), ())


def marchenko_pastur_law(grid, lam: float = 1.0) -> SpectralDensity:
    grid = _check_grid(grid)
    s, u = mp_edges(lam)
    dens = mp_pdf(grid, lam)
    cont = _pdf_cdf(lambda t: mp_pdf(t, lam), grid, s, u)
    atoms = ((0.0, mp_atom(lam)),) if lam < 1 else ()
    cdf = cont + sum((m * (grid >= loc) for loc, m in atoms), np.zeros_like(grid))
    return SpectralDensity(grid, dens, cdf, (0.0 if atoms else s, u), atoms)


# ---------------------------------------------------------------------------
# Weak-convergence diagnostic
# ---------------------------------------------------------------------------

DEFAULT_EPS_GRID = (1e-1, 1e-2, 1e-3, 1e-4)
DEFAULT_Y_GRID = tuple(-(10.0 ** k) for k in np.linspace(-1, 1, 9))
DEFAULT_BUMPS = tuple((s * c, c / 2) for c in (0.25, 0.5, 1.0, 2.0, 4.0) for s in (-1.0, 1.0))


@dataclass
class ConvergenceReport:
    """Finite-sequence evidence for the three triplet conditions and the transform condition."""

    drift_gaps: list
    levy_gaps: list
    brackets: list
    ct_gaps: list
    eps_grid: tuple
    y_grid: tuple
    tolerances: dict
    sup_ct_near_zero: float
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "drift_gaps": self.drift_gaps,
            "levy_gaps": self.levy_gaps,
            "brackets": self.brackets,
            "ct_gaps": self.ct_gaps,
            "eps_grid": list(self.eps_grid),
            "y_grid": list(self.y_grid),
            "tolerances": self.tolerances,
            "sup_ct_near_zero": self.sup_ct_near_zero,
            "checks": self.checks,
            "passed": self.passed,
        }


def convergence_diagnostic(
    seq: Sequence[FreeTriplet],
    target: FreeTriplet,
    tol: float = 1e-3,
    eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
    y_grid: Sequence[float] = DEFAULT_Y_GRID,
    bumps: Sequence[tuple] = DEFAULT_BUMPS,
    tolerances: dict | None = None,
) -> ConvergenceReport:
    """Evaluate the triplet and transform criteria for weak convergence along ``seq``.

    Pass/fail is decided at the final index; the per-index values are kept
    so trends can be inspected. This is evidence on finite data, not a
    decision about a limit.
    """
    if not seq:
        raise ValidationError("convergence_diagnostic needs a nonempty sequence")
    for u in list(seq) + [target]:
        _require_free(u)
    tols = {"drift": tol, "levy": tol, "bracket": tol, "transform": tol}
    if tolerances:
        tols.update(tolerances)
    bump_fns = [M.bump(c, w) for c, w in bumps]
    target_bumps = [levy_quadrature(target.r, g) for g in bump_fns]
    target_ct = [_free_ct_value(target, 1j * y) for y in y_grid]

    drift_gaps, levy_gaps, brackets, ct_gaps = [], [], [], []
    for u in seq:
        drift_gaps.append(abs(u.a - target.a))
        levy_gaps.append(max((abs(levy_quadrature(u.r, g) - tv) for g, tv in zip(bump_fns, target_bumps)), default=0.0))
        brackets.append([abs(u.b - target.b + levy_quadrature(u.r, M.sq_window(e))) for e in eps_grid])
        ct_gaps.append(max(abs(_free_ct_value(u, 1j * y) - cv) for y, cv in zip(y_grid, target_ct)))
    y_small = max(y_grid)  # closest to 0 from below
    sup_small = max(abs(_free_ct_value(u, 1j * y_small)) for u in seq)
    checks = {
        "drift": drift_gaps[-1] <= tols["drift"],
        "levy": levy_gaps[-1] <= tols["levy"],
        "bracket": brackets[-1][-1] <= tols["bracket"],
        "transform": ct_gaps[-1] <= tols["transform"],
    }
    return ConvergenceReport(
        drift_gaps, levy_gaps, brackets, ct_gaps, tuple(eps_grid), tuple(y_grid), tols, sup_small, checks
    )
