"""Finitely parametrized Lévy measures and quadrature against them.

A :class:`LevyMeasure` is a sum of three kinds of components:

* point atoms ``(t, mass)`` with ``t != 0``;
* near-zero power pieces ``c |t|**(-1 - alpha)`` on ``(-eps0, 0)`` and
  ``(0, eps0)`` (infinite activity when ``c > 0``);
* body pieces: ``|t|**power * poly(t)`` on a bounded half-open interval
  lying on one side of the origin.

Every integral against such a measure goes through :func:`levy_quadrature`,
which takes one of the integrands built by the factories at the bottom of
this module. Integrands carry their behaviour at the origin so that the
near-zero pieces can be integrated with an algebraic weight instead of a
naive (and divergent-looking) quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import integrate

from .errors import DivergentIntegral, QuadratureBudgetExceeded, ValidationError

# per-call target; the public contract is 1e-10 + 1e-8*|result|
_EPSABS = 1e-14
_EPSREL = 1e-12
_ACCEPT_ABS = 1e-11
_ACCEPT_REL = 1e-9
_LIMITS = (200, 4000, 2**16)


def sigma_centering(t):
    """Continuous truncation ``t -> clip(t, -1, 1)``.

    Works on scalars and arrays; odd, continuous and 1-Lipschitz.
    """
    if np.ndim(t) == 0:
        t = float(t)
        return -1.0 if t < -1.0 else (1.0 if t > 1.0 else t)
    return np.clip(np.asarray(t, dtype=float), -1.0, 1.0)


@dataclass(frozen=True)
class NearZero:
    """Density ``c_plus t**(-1-alpha)`` on (0, eps0) and ``c_minus |t|**(-1-alpha)`` on (-eps0, 0)."""

    alpha: float
    c_plus: float
    c_minus: float
    eps0: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < 2.0):
            raise ValidationError(f"near-zero exponent alpha must lie in [0, 2), got {self.alpha}")
        if self.c_plus < 0 or self.c_minus < 0:
            raise ValidationError("near-zero coefficients must be nonnegative")
        if not (self.eps0 > 0 and math.isfinite(self.eps0)):
            raise ValidationError("near-zero cutoff eps0 must be positive and finite")

    def density(self, t: float) -> float:
        if t == 0 or abs(t) >= self.eps0:
            return 0.0
        c = self.c_plus if t > 0 else self.c_minus
        return c * abs(t) ** (-1.0 - self.alpha)

    def tail_mass(self, eps: float) -> float:
        """Mass of ``{eps < |t| < eps0}``, closed form."""
        if eps >= self.eps0:
            return 0.0
        c = self.c_plus + self.c_minus
        if self.alpha == 0.0:
            return c * math.log(self.eps0 / eps)
        return c * (eps ** -self.alpha - self.eps0 ** -self.alpha) / self.alpha


@dataclass(frozen=True)
class DensityPiece:
    """``|t|**power * sum(coeffs[k] t**k)`` on ``[lo, hi)``."""

    lo: float
    hi: float
    coeffs: tuple
    power: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ValidationError(f"body piece needs finite lo < hi, got [{self.lo}, {self.hi})")
        if self.lo < 0 < self.hi:
            raise ValidationError("body piece must not straddle 0")
        if self.power != 0.0 and min(abs(self.lo), abs(self.hi)) == 0.0:
            raise ValidationError("power-law body pieces must stay away from 0 (use near_zero)")
        if not self.coeffs:
            raise ValidationError("body piece needs at least one coefficient")

    def density(self, t):
        t = np.asarray(t, dtype=float)
        val = npoly.polyval(t, self.coeffs)
        if self.power != 0.0:
            val = val * np.abs(t) ** self.power
        return val


@dataclass(frozen=True)
class LevyMeasure:
    """Lévy measure in normal form (see module docstring).

    The constructor normalizes: atoms sorted and merged, near-zero pieces with
    the same ``(alpha, eps0)`` merged, body pieces of equal power split onto
    elementary intervals with summed coefficients, zero pieces dropped.
    """

    atoms: tuple = ()
    near_zero: tuple = ()
    body: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", _normal_atoms(self.atoms))
        object.__setattr__(self, "near_zero", _normal_near_zero(self.near_zero))
        object.__setattr__(self, "body", _normal_body(self.body))
        for piece in self.body:
            _check_nonnegative(piece)

    # -- basic queries -------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not (self.atoms or self.near_zero or self.body)

    @property
    def has_infinite_activity(self) -> bool:
        return bool(self.near_zero)

    def support_bound(self) -> float:
        """Largest ``|t|`` charged by the measure (0 for the zero measure)."""
        vals = [abs(t) for t, _ in self.atoms]
        vals += [nz.eps0 for nz in self.near_zero]
        vals += [max(abs(p.lo), abs(p.hi)) for p in self.body]
        return max(vals, default=0.0)

    def charges_negative(self) -> bool:
        return (
            any(t < 0 for t, _ in self.atoms)
            or any(nz.c_minus > 0 for nz in self.near_zero)
            or any(p.hi <= 0 for p in self.body)
        )

    def density(self, t: float) -> float:
        """Absolutely continuous part at ``t`` (atoms excluded)."""
        val = sum(nz.density(t) for nz in self.near_zero)
        for p in self.body:
            if p.lo <= t < p.hi:
                val += float(p.density(t))
        return val

    # -- algebra -------------------------------------------------------
    def __add__(self, other: "LevyMeasure") -> "LevyMeasure":
        if not isinstance(other, LevyMeasure):
            return NotImplemented
        return LevyMeasure(
            self.atoms + other.atoms,
            self.near_zero + other.near_zero,
            self.body + other.body,
        )

    def weighted(self, w: float) -> "LevyMeasure":
        """The measure ``w * r`` for ``w >= 0``."""
        if w < 0:
            raise ValidationError("Lévy measures can only be weighted by w >= 0")
        if w == 0:
            return LevyMeasure()
        return LevyMeasure(
            tuple((t, w * m) for t, m in self.atoms),
            tuple(NearZero(nz.alpha, w * nz.c_plus, w * nz.c_minus, nz.eps0) for nz in self.near_zero),
            tuple(DensityPiece(p.lo, p.hi, tuple(w * c for c in p.coeffs), p.power) for p in self.body),
        )

    def image(self, c: float) -> "LevyMeasure":
        """Image measure under ``t -> c t`` (``c != 0``)."""
        if c == 0:
            raise ValidationError("image under t -> 0*t is not a Lévy measure; drop the measure instead")
        if c == 1:
            return self
        ac = abs(c)
        atoms = tuple((c * t, m) for t, m in self.atoms)
        near = []
        for nz in self.near_zero:
            scale = ac ** nz.alpha
            cp, cm = nz.c_plus * scale, nz.c_minus * scale
            if c < 0:
                cp, cm = cm, cp
            near.append(NearZero(nz.alpha, cp, cm, ac * nz.eps0))
        body = []
        for p in self.body:
            # density of s = c t is g(s/c)/|c|
            factor = ac ** (-1.0 - p.power)
            coeffs = tuple(coef * factor * c ** (-k) for k, coef in enumerate(p.coeffs))
            lo, hi = sorted((c * p.lo, c * p.hi))
            body.append(DensityPiece(lo, hi, coeffs, p.power))
        return LevyMeasure(atoms, tuple(near), tuple(body))

    def restrict_outside(self, eps: float) -> "LevyMeasure":
        """Restriction to ``{|t| > eps}``."""
        if eps <= 0:
            raise ValidationError("truncation level must be positive")
        atoms = tuple((t, m) for t, m in self.atoms if abs(t) > eps)
        body = []
        for nz in self.near_zero:
            if eps >= nz.eps0:
                continue
            power = -1.0 - nz.alpha
            if nz.c_plus > 0:
                body.append(DensityPiece(eps, nz.eps0, (nz.c_plus,), power))
            if nz.c_minus > 0:
                # |t|**power is even, so the constant coefficient carries over
                body.append(DensityPiece(-nz.eps0, -eps, (nz.c_minus,), power))
        for p in self.body:
            if p.lo >= 0:
                lo, hi = max(p.lo, eps), p.hi
            else:
                lo, hi = p.lo, min(p.hi, -eps)
            if lo < hi:
                body.append(DensityPiece(lo, hi, p.coeffs, p.power))
        return LevyMeasure(atoms, (), tuple(body))

    def restrict_inside(self, eps: float) -> "LevyMeasure":
        """Restriction to ``{0 < |t| <= eps}``; only used for diagnostics, so power pieces stay allowed."""
        atoms = tuple((t, m) for t, m in self.atoms if abs(t) <= eps)
        near = []
        body = []
        for nz in self.near_zero:
            if eps >= nz.eps0:
                near.append(nz)
            else:
                near.append(NearZero(nz.alpha, nz.c_plus, nz.c_minus, eps))
        for p in self.body:
            lo, hi = (p.lo, min(p.hi, eps)) if p.lo >= 0 else (max(p.lo, -eps), p.hi)
            if lo < hi:
                body.append(DensityPiece(lo, hi, p.coeffs, p.power))
        return LevyMeasure(atoms, tuple(near), tuple(body))


def _normal_atoms(atoms) -> tuple:
    merged: dict[float, float] = {}
    for t, m in atoms:
        t, m = float(t), float(m)
        if t == 0.0:
            raise ValidationError("a Lévy measure has no atom at 0")
        if not (m > 0 and math.isfinite(m)) or not math.isfinite(t):
            raise ValidationError(f"atom masses must be positive and finite, got ({t}, {m})")
        merged[t] = merged.get(t, 0.0) + m
    return tuple(sorted(merged.items()))


def _normal_near_zero(pieces) -> tuple:
    merged: dict[tuple, list] = {}
    for nz in pieces:
        if isinstance(nz, dict):
            nz = NearZero(**nz)
        key = (float(nz.alpha), float(nz.eps0))
        acc = merged.setdefault(key, [0.0, 0.0])
        acc[0] += nz.c_plus
        acc[1] += nz.c_minus
    out = [NearZero(a, cp, cm, e) for (a, e), (cp, cm) in merged.items() if cp > 0 or cm > 0]
    return tuple(sorted(out, key=lambda nz: (nz.alpha, nz.eps0)))


def _trim(coeffs: Sequence[float]) -> tuple:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0.0:
        coeffs.pop()
    return tuple(coeffs)


def _normal_body(pieces) -> tuple:
    groups: dict[float, list] = {}
    for p in pieces:
        if isinstance(p, dict):
            p = DensityPiece(p["lo"], p["hi"], tuple(p["coeffs"]), p.get("power", 0.0))
        groups.setdefault(float(p.power), []).append(p)
    out = []
    for power in sorted(groups):
        group = groups[power]
        cuts = sorted({x for p in group for x in (p.lo, p.hi)})
        elementary = []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            acc: list[float] = []
            for p in group:
                if p.lo <= lo and hi <= p.hi:
                    if len(acc) < len(p.coeffs):
                        acc.extend([0.0] * (len(p.coeffs) - len(acc)))
                    for k, c in enumerate(p.coeffs):
                        acc[k] += c
            acc_t = _trim(acc)
            if not acc_t:
                continue
            if elementary and elementary[-1][1] == lo and elementary[-1][2] == acc_t:
                elementary[-1] = (elementary[-1][0], hi, acc_t)
            else:
                elementary.append((lo, hi, acc_t))
        out.extend(DensityPiece(lo, hi, c, power) for lo, hi, c in elementary)
    return tuple(sorted(out, key=lambda p: (p.lo, p.hi, p.power)))


def _check_nonnegative(piece: DensityPiece) -> None:
    x = np.linspace(piece.lo, piece.hi, 33)
    vals = piece.density(x)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.min(vals) < -1e-12 * scale:
        raise ValidationError(f"body piece density is negative somewhere on [{piece.lo}, {piece.hi})")


# ---------------------------------------------------------------------------
# Integrands
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Integrand:
    """A function of the jump size ``t`` with declared behaviour at 0.

    ``order`` is the power with ``g(t) = O(|t|**order)`` at the origin and
    ``reduced(t) = g(t) / |t|**order`` must be smooth on ``0 < |t| <= 1``
    between the declared ``breaks``. ``g`` vanishes on ``|t| < zero_radius``.
    """

    name: str
    func: Callable
    order: int = 2
    reduced: Callable | None = None
    breaks: tuple = ()
    zero_radius: float = 0.0
    is_complex: bool = False


def min1sq() -> Integrand:
    return Integrand("min(1,t^2)", lambda t: min(1.0, t * t), 2, lambda t: 1.0, (-1.0, 1.0))


def t_minus_sigma() -> Integrand:
    return Integrand("t-sigma(t)", lambda t: t - sigma_centering(t), 2, None, (-1.0, 1.0), zero_radius=1.0)


def moment(n: int) -> Integrand:
    if n < 0:
        raise ValidationError("moment order must be nonnegative")
    k = min(n, 2)
    if n >= 2:
        red = lambda t: t ** (n - 2)
    elif n == 1:
        red = lambda t: 1.0 if t > 0 else -1.0
    else:
        red = lambda t: 1.0
    return Integrand(f"t^{n}", lambda t: t**n, k, red)


def sigma() -> Integrand:
    return Integrand("sigma(t)", sigma_centering, 1, lambda t: 1.0 if t > 0 else -1.0, (-1.0, 1.0))


def abs_sigma() -> Integrand:
    return Integrand("|sigma(t)|", lambda t: abs(sigma_centering(t)), 1, lambda t: 1.0, (-1.0, 1.0))


def sq_window(eps: float) -> Integrand:
    return Integrand(
        f"t^2 1[|t|<={eps}]",
        lambda t: t * t if abs(t) <= eps else 0.0,
        2,
        lambda t: 1.0 if abs(t) <= eps else 0.0,
        (-eps, eps),
    )


def tail_indicator(eps: float) -> Integrand:
    return Integrand(f"1[|t|>{eps}]", lambda t: 1.0 if abs(t) > eps else 0.0, 0, None, (-eps, eps), zero_radius=eps)


def sigma_tail(eps: float) -> Integrand:
    return Integrand(
        f"sigma(t) 1[|t|>{eps}]",
        lambda t: sigma_centering(t) if abs(t) > eps else 0.0,
        0,
        None,
        (-1.0, 1.0, -eps, eps),
        zero_radius=eps,
    )


def sigma_shift(c: float) -> Integrand:
    """``sigma(c t) - c sigma(t)``; vanishes for ``|t| <= min(1, 1/|c|)``."""
    if c == 0:
        return Integrand("0", lambda t: 0.0, 0, None, (), zero_radius=math.inf)
    radius = min(1.0, 1.0 / abs(c))
    br = (-1.0, 1.0, -1.0 / abs(c), 1.0 / abs(c))
    return Integrand(
        f"sigma({c}t)-{c}sigma(t)",
        lambda t: sigma_centering(c * t) - c * sigma_centering(t),
        0,
        None,
        br,
        zero_radius=radius,
    )


def min1_scaled(c: float) -> Integrand:
    """``min(1, c^2 t^2)``."""
    if c == 0:
        return Integrand("0", lambda t: 0.0, 0, None, (), zero_radius=math.inf)
    inv = 1.0 / abs(c)
    return Integrand(
        f"min(1,({c}t)^2)",
        lambda t: min(1.0, c * c * t * t),
        2,
        lambda t: c * c if abs(t) <= inv else 1.0 / (t * t),
        (-inv, inv),
    )


def r_kernel(w: complex) -> Integrand:
    """``t/(1-tw) - sigma(t)``, written as ``t^2 w/(1-tw) + (t - sigma(t))``."""
    w = complex(w)

    def g(t):
        return t * t * w / (1.0 - t * w) + (t - sigma_centering(t))

    return Integrand(f"R-kernel({w})", g, 2, lambda t: w / (1.0 - t * w), (-1.0, 1.0), is_complex=True)


def ct_kernel(z: complex) -> Integrand:
    """``1/(1-tz) - 1 - z sigma(t)``."""
    z = complex(z)

    def g(t):
        return t * z / (1.0 - t * z) - z * sigma_centering(t)

    return Integrand(f"C-kernel({z})", g, 2, lambda t: z * z / (1.0 - t * z), (-1.0, 1.0), is_complex=True)


def _cf_reduced(t: float, y: float) -> complex:
    u = t * y
    if abs(u) < 1e-3:
        # (e^{iu} - 1 - iu) / u^2 series
        series = -0.5 - 1j * u / 6.0 + u * u / 24.0 + 1j * u**3 / 120.0
        return series * y * y
    return (complex(math.cos(u) - 1.0, math.sin(u) - u)) / (t * t)


def cf_kernel(y: float) -> Integrand:
    """``exp(i t y) - 1 - i y sigma(t)``."""
    y = float(y)

    def g(t):
        return complex(math.cos(t * y) - 1.0, math.sin(t * y) - y * sigma_centering(t))

    return Integrand(f"cf-kernel({y})", g, 2, lambda t: _cf_reduced(t, y), (-1.0, 1.0), is_complex=True)


def bump(center: float, width: float) -> Integrand:
    """Triangular hat of height 1; continuous, bounded, zero near the origin."""
    if not (0 < width < abs(center)):
        raise ValidationError("bump must vanish in a neighbourhood of 0")

    def g(t):
        return max(0.0, 1.0 - abs(t - center) / width)

    return Integrand(
        f"bump({center},{width})",
        g,
        0,
        None,
        (center - width, center, center + width),
        zero_radius=abs(center) - width,
    )


def from_callable(name: str, func: Callable, order: int, reduced: Callable | None = None,
                  breaks: Iterable[float] = (), zero_radius: float = 0.0, is_complex: bool = False) -> Integrand:
    """Escape hatch for integrands outside the fixed menu."""
    return Integrand(name, func, order, reduced, tuple(breaks), zero_radius, is_complex)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def _quad_real(fn, lo, hi, weight=None, wvar=None) -> float:
    last_err = math.inf
    for limit in _LIMITS:
        res = integrate.quad(
            fn, lo, hi, epsabs=_EPSABS, epsrel=_EPSREL, limit=limit, weight=weight, wvar=wvar, full_output=1
        )
        val, err, info = res[0], res[1], res[2]
        ier = 0 if len(res) == 3 else 1
        if ier == 0 or err <= _ACCEPT_ABS + _ACCEPT_REL * abs(val):
            return val
        last_err = err
        if info.get("last", limit) < limit:
            # not a subdivision-budget problem; more budget will not help
            break
    raise QuadratureBudgetExceeded(
        f"adaptive quadrature on [{lo}, {hi}] did not reach tolerance (error estimate {last_err:.3g})"
    )


def _quad(fn, lo, hi, is_complex, weight=None, wvar=None):
    if lo >= hi:
        return 0.0
    if is_complex:
        re = _quad_real(lambda t: fn(t).real, lo, hi, weight, wvar)
        im = _quad_real(lambda t: fn(t).imag, lo, hi, weight, wvar)
        return complex(re, im)
    return _quad_real(fn, lo, hi, weight, wvar)


def _split_points(lo: float, hi: float, breaks: Iterable[float]) -> list:
    inner = sorted({b for b in breaks if lo < b < hi})
    return [lo, *inner, hi]


def _integrate_regular(fn, lo, hi, breaks, is_complex):
    pts = _split_points(lo, hi, breaks)
    total = 0j if is_complex else 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += _quad(fn, a, b, is_complex)
    return total


def _remove_zero_region(lo: float, hi: float, radius: float) -> list:
    """Parts of [lo, hi) with |t| >= radius."""
    if radius <= 0:
        return [(lo, hi)]
    parts = []
    if lo < -radius:
        parts.append((lo, min(hi, -radius)))
    if hi > radius:
        parts.append((max(lo, radius), hi))
    return parts


def _near_zero_side(g: Integrand, c: float, alpha: float, eps0: float, sign: float):
    """Integral of g(sign*s) c s^(-1-alpha) over s in (0, eps0)."""
    if c == 0.0:
        return 0.0
    zero = 0j if g.is_complex else 0.0

    def dens_fn(s):
        return g.func(sign * s) * c * s ** (-1.0 - alpha)

    if g.zero_radius > 0:
        if g.zero_radius >= eps0:
            return zero
        brk = [sign * b for b in g.breaks]
        return _integrate_regular(dens_fn, g.zero_radius, eps0, brk, g.is_complex)
    exponent = g.order - 1.0 - alpha
    if exponent <= -1.0:
        raise DivergentIntegral(
            f"integrand {g.name} is not integrable against c|t|^(-1-{alpha}) near 0"
        )
    positive_breaks = [sign * b for b in g.breaks if sign * b > 0]
    s1 = min([eps0, 1.0, *positive_breaks])
    if g.reduced is None:
        raise DivergentIntegral(f"integrand {g.name} lacks a reduced form near 0")
    red = g.reduced
    # the value at 0+ against s^exponent is done in closed form; the algebraic
    # rule only sees the remainder, which vanishes at 0 (keeps alpha near 1 stable)
    tiny = 1e-300  # the rule also samples s = 0; stay on the correct side of it
    r0 = red(sign * tiny)
    head = c * r0 * s1 ** (exponent + 1.0) / (exponent + 1.0)
    head += _quad(lambda s: c * (red(sign * max(s, tiny)) - r0), 0.0, s1, g.is_complex, weight="alg", wvar=(exponent, 0.0))
    tail = zero
    if s1 < eps0:
        brk = [sign * b for b in g.breaks]
        tail = _integrate_regular(dens_fn, s1, eps0, brk, g.is_complex)
    return head + tail


def levy_quadrature(r: LevyMeasure, g: Integrand):
    """``∫ g(t) r(dt)``.

    Atoms are summed exactly, body pieces use adaptive Gauss-Kronrod and the
    near-zero pieces an algebraic-weight rule on ``g(t)/|t|**order``. Raises
    :class:`DivergentIntegral` when ``g`` decays too slowly at 0 for an
    infinite-activity piece.
    """
    total = 0j if g.is_complex else 0.0
    for t, m in r.atoms:
        total += m * g.func(t)
    for p in r.body:
        dens = p.density
        fn = lambda t, dens=dens: g.func(t) * float(dens(t))
        for lo, hi in _remove_zero_region(p.lo, p.hi, g.zero_radius):
            total += _integrate_regular(fn, lo, hi, g.breaks, g.is_complex)
    for nz in r.near_zero:
        total += _near_zero_side(g, nz.c_plus, nz.alpha, nz.eps0, 1.0)
        total += _near_zero_side(g, nz.c_minus, nz.alpha, nz.eps0, -1.0)
    return total


# ---------------------------------------------------------------------------
# Comparison
# ---------------------------------------------------------------------------

_WINDOW_EDGES = (-50.0, -10.0, -3.0, -1.0, -0.3, -0.1, -0.01, 0.0, 0.01, 0.1, 0.3, 1.0, 3.0, 10.0, 50.0)


def _window(lo: float, hi: float) -> Integrand:
    # min(1,t^2) restricted to [lo, hi); lo or hi may be 0
    def g(t):
        return min(1.0, t * t) if lo <= t < hi else 0.0

    def red(t):
        return (1.0 if abs(t) <= 1 else 1.0 / (t * t)) if lo <= t < hi else 0.0

    return Integrand(f"window[{lo},{hi})", g, 2, red, (lo, hi, -1.0, 1.0))


def comparison_menu() -> list:
    """Fixed integrand menu used to compare Lévy measures with different parametrizations."""
    menu = [min1sq(), t_minus_sigma(), moment(2), sq_window(0.5), tail_indicator(0.5), tail_indicator(1.0)]
    menu += [_window(a, b) for a, b in zip(_WINDOW_EDGES[:-1], _WINDOW_EDGES[1:])]
    return menu


def levy_measures_close(r1: LevyMeasure, r2: LevyMeasure, tol: float = 1e-7) -> bool:
    """Atoms compared up to rounding, everything else through the comparison menu."""
    if len(r1.atoms) != len(r2.atoms):
        return False
    for (t1, m1), (t2, m2) in zip(r1.atoms, r2.atoms):
        if not (math.isclose(t1, t2, rel_tol=1e-12, abs_tol=1e-15) and math.isclose(m1, m2, rel_tol=1e-12, abs_tol=1e-15)):
            return False
    return levy_measure_discrepancy(r1, r2) <= tol


def levy_measure_discrepancy(r1: LevyMeasure, r2: LevyMeasure) -> float:
    """Max over the comparison menu of the relative quadrature difference."""
    worst = 0.0
    for g in comparison_menu():
        try:
            v1, v2 = levy_quadrature(r1, g), levy_quadrature(r2, g)
        except DivergentIntegral:
            continue
        worst = max(worst, abs(v1 - v2) / max(1.0, abs(v1), abs(v2)))
    return worst
