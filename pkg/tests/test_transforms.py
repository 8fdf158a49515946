import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy import integrate

from conftest import random_triplet, seeds
from freelevy.cumulants import free_cumulants_to_moments
from freelevy.errors import DomainError, FlavorMismatch, ValidationError
from freelevy.measures import DensityPiece, LevyMeasure, NearZero
from freelevy.transforms import (
    build_r_rule,
    cauchy_from_triplet,
    convergence_diagnostic,
    density_from_triplet,
    eval_classical_cf,
    eval_free_ct,
    eval_r_transform,
    marchenko_pastur_law,
    mp_edges,
    mp_pdf,
    semicircle_cdf,
    semicircle_law,
    semicircle_pdf,
    solve_cauchy,
)
from freelevy.triplets import (
    CLASSICAL,
    FreeTriplet,
    dirac,
    free_cumulants_from_triplet,
    free_poisson,
    semicircle,
    triplet_add,
    triplet_scale,
    zero_triplet,
)

Z_GRID = [0.3 - 0.2j, -1.5 - 1j, 2 - 0.05j, -0.1j, 4 - 3j, -0.7 - 0.4j]


def test_free_ct_examples():
    assert eval_free_ct(semicircle(), -1j) == pytest.approx(-1)
    assert eval_free_ct(free_poisson(), -1j) == pytest.approx(-0.5 - 0.5j, abs=1e-14)
    assert eval_free_ct(dirac(1.3), 0.4 - 2j) == pytest.approx(1.3 * (0.4 - 2j))
    with pytest.raises(DomainError):
        eval_free_ct(semicircle(), 1j)
    with pytest.raises(DomainError):
        eval_free_ct(semicircle(), 2.0)
    with pytest.raises(FlavorMismatch):
        eval_free_ct(dirac(0.0, CLASSICAL), -1j)


def test_r_transform_examples():
    assert eval_r_transform(semicircle(), -1j) == pytest.approx(-1j)
    assert eval_r_transform(free_poisson(), -0.5j) == pytest.approx(1 / (1 + 0.5j), abs=1e-14)
    assert eval_r_transform(dirac(-0.8), -3j) == pytest.approx(-0.8)
    with pytest.raises(DomainError):
        eval_r_transform(semicircle(), 0.1)
    assert eval_r_transform(free_poisson(), 0.1, allow_real=True) == pytest.approx(1 / 0.9)


def test_classical_cf_examples():
    g = FreeTriplet(0, 1, flavor=CLASSICAL)
    assert eval_classical_cf(g, 1.0) == pytest.approx(math.exp(-0.5))
    assert eval_classical_cf(dirac(0.7, CLASSICAL), 2.0) == pytest.approx(cmath.exp(1.4j))
    p = FreeTriplet(1, 0, LevyMeasure(atoms=((1.0, 1.0),)), CLASSICAL)
    assert eval_classical_cf(p, math.pi) == pytest.approx(math.exp(-2), abs=1e-14)


def test_classical_cf_of_gaussian_with_variance():
    g = FreeTriplet(0.5, 2.0, flavor=CLASSICAL)
    y = 0.9
    assert eval_classical_cf(g, y) == pytest.approx(cmath.exp(0.5j * y - y * y))


def test_cauchy_examples():
    z = 0.7 + 1.1j
    assert cauchy_from_triplet(zero_triplet(), z) == pytest.approx(1 / z)
    assert cauchy_from_triplet(semicircle(), 2j) == pytest.approx(-1j * (math.sqrt(2) - 1), abs=1e-12)
    with pytest.raises(DomainError):
        cauchy_from_triplet(semicircle(), 1 - 1j)


def _quad_cauchy(pdf, lo, hi, z):
    re = integrate.quad(lambda x: (1 / (z - x)).real * pdf(x), lo, hi, limit=400, epsabs=1e-13)[0]
    im = integrate.quad(lambda x: (1 / (z - x)).imag * pdf(x), lo, hi, limit=400, epsabs=1e-13)[0]
    return complex(re, im)


def test_cauchy_semicircle_against_quadrature():
    for z in (2j, 1.5 + 0.3j, -3 + 0.01j):
        ref = _quad_cauchy(lambda x: semicircle_pdf(x), -2, 2, z)
        assert cauchy_from_triplet(semicircle(), z) == pytest.approx(ref, abs=1e-8)


def test_cauchy_mp1_against_quadrature():
    z = 2 + 2j
    ref = _quad_cauchy(lambda x: mp_pdf(x, 1.0), 0, 4, z)
    assert cauchy_from_triplet(free_poisson(), z) == pytest.approx(ref, abs=1e-8)


def test_cauchy_mp_half_includes_atom():
    z = 1 + 0.5j
    lo, hi = mp_edges(0.5)
    ref = _quad_cauchy(lambda x: mp_pdf(x, 0.5), lo, hi, z) + 0.5 / z
    assert cauchy_from_triplet(free_poisson(0.5), z) == pytest.approx(ref, abs=1e-8)


def test_solver_residual_and_sign():
    u = triplet_add(semicircle(0.5), free_poisson(2.0, -0.7))
    z = np.array([0.1 + 1e-5j, 3 + 1e-3j, -2 + 0.5j, 10j])
    G, res, ok = solve_cauchy(u, z)
    assert ok.all() and (res <= 1e-12).all()
    assert (G.imag < 0).all()
    rule = build_r_rule(u)
    np.testing.assert_allclose(G, 1 / (z - rule(G)), atol=1e-11)


def test_density_examples():
    d = density_from_triplet(semicircle(), [-3.0, -1.0, 0.0, 1.0, 3.0])
    assert d.density[2] == pytest.approx(1 / math.pi, abs=1e-6)
    assert d.density[0] == pytest.approx(0.0, abs=1e-6) and d.density[-1] == pytest.approx(0.0, abs=1e-6)
    d = density_from_triplet(free_poisson(), [0.5, 1.0, 2.0])
    assert d.density[1] == pytest.approx(math.sqrt(3) / (2 * math.pi), abs=1e-5)


def test_density_grid_and_ladder_validation():
    with pytest.raises(ValidationError):
        density_from_triplet(semicircle(), [0.0, 0.0, 1.0])
    with pytest.raises(ValidationError):
        density_from_triplet(semicircle(), [0.0, 1.0], eps_ladder=(1e-4, 1e-3))


def test_density_detects_mp_atom():
    grid = np.linspace(-0.5, 3.5, 801)
    d = density_from_triplet(free_poisson(0.5), grid)
    assert len(d.atoms) == 1
    x, mass = d.atoms[0]
    assert x == pytest.approx(0.0, abs=1e-9) and mass == pytest.approx(0.5, abs=2e-3)
    assert d.total_mass == pytest.approx(1.0, abs=5e-3)
    assert (np.diff(d.cdf) >= -1e-12).all()


def test_density_no_spurious_atom_at_hard_edge():
    d = density_from_triplet(free_poisson(), np.linspace(-0.5, 4.5, 501))
    assert d.atoms == ()


@pytest.mark.parametrize("lam", [1.0, 0.5, 2.0])
def test_closed_form_mp_law_mass(lam):
    grid = np.linspace(-0.5, mp_edges(lam)[1] + 0.5, 2001)
    law = marchenko_pastur_law(grid, lam)
    assert law.cdf_at(grid[-1])[()] == pytest.approx(1.0, abs=1e-8)


def test_semicircle_law_cdf():
    grid = np.linspace(-3, 3, 601)
    law = semicircle_law(grid, variance=2.0, mean=0.5)
    np.testing.assert_allclose(law.cdf, semicircle_cdf(grid, 0.5, 2 * math.sqrt(2)), atol=1e-12)


def test_inversion_consistency_ten_points():
    u = triplet_add(semicircle(0.6), FreeTriplet(0.2, 0, LevyMeasure(atoms=((1.5, 0.4),), body=(DensityPiece(-1.0, -0.3, (0.5,)),))))
    grid = np.linspace(-6, 8, 2801)
    d = density_from_triplet(u, grid)
    assert d.atoms == ()
    rng = np.random.default_rng(3)
    for _ in range(10):
        z = complex(rng.uniform(-3, 4), rng.uniform(0.3, 2.0))
        ref = np.trapezoid(d.density / (z - grid), grid)
        assert abs(ref - cauchy_from_triplet(u, z)) <= 1e-4


def _moments_from_density(d, n):
    return [d.moment(k) for k in range(1, n + 1)]


@pytest.mark.parametrize(
    "u",
    [
        semicircle(),
        free_poisson(),
        triplet_add(semicircle(0.3, 0.2), free_poisson(1.5, -0.6)),
        FreeTriplet(-0.3, 0.2, LevyMeasure(body=(DensityPiece(0.5, 1.5, (0.8,)), DensityPiece(-1.2, -0.2, (0.3, 0.2))))),
    ],
)
def test_density_moments_match_cumulant_pipeline(u):
    k = free_cumulants_from_triplet(u, 6)
    m = free_cumulants_to_moments(k).values
    grid = np.linspace(-8, 9, 3401)
    d = density_from_triplet(u, grid)
    got = _moments_from_density(d, 6)
    for a, b in zip(got, m):
        assert abs(a - b) <= 1e-3 * max(1.0, abs(b))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_ct_equals_z_times_r(seed):
    rng = np.random.default_rng(seed)
    u = random_triplet(rng, near_zero=bool(rng.random() < 0.5))
    for z in Z_GRID:
        c = eval_free_ct(u, z)
        zr = z * eval_r_transform(u, z)
        assert abs(c - zr) <= 1e-10 * max(abs(c), 1e-300) + 1e-14


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_ct_additive(seed):
    rng = np.random.default_rng(seed)
    u, v = random_triplet(rng), random_triplet(rng, near_zero=True)
    for z in Z_GRID:
        lhs = eval_free_ct(triplet_add(u, v), z)
        rhs = eval_free_ct(u, z) + eval_free_ct(v, z)
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_ct_scaling(seed):
    rng = np.random.default_rng(seed)
    u = random_triplet(rng, near_zero=bool(rng.random() < 0.5))
    c = float(rng.choice([-1, 1]) * rng.uniform(0.2, 3.0))
    v = triplet_scale(c, u)
    for z in Z_GRID:
        lhs = eval_free_ct(v, z)
        # real triplets give C(conj z) = conj C(z), which covers c < 0
        rhs = eval_free_ct(u, c * z) if c > 0 else eval_free_ct(u, (c * z).conjugate()).conjugate()
        assert abs(lhs - rhs) <= 1e-8 * max(abs(rhs), 1.0)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_cauchy_against_its_own_equation(seed):
    # R evaluated by adaptive quadrature, independent of the solver's discrete rule
    rng = np.random.default_rng(seed)
    u = random_triplet(rng)
    z = complex(rng.uniform(-3, 3), rng.uniform(0.2, 3))
    G = cauchy_from_triplet(u, z)
    assert G.imag < 0
    assert abs(G - 1 / (z - eval_r_transform(u, G))) <= 1e-9


def test_diagnostic_constant_sequence():
    u = triplet_add(semicircle(), free_poisson(0.5, 2.0))
    rep = convergence_diagnostic([u, u, u], u)
    assert rep.passed
    assert max(rep.drift_gaps + rep.levy_gaps + rep.ct_gaps) == 0
    assert all(x == 0 for row in rep.brackets for x in row)


def test_diagnostic_gaussian_bracket_is_one_over_n():
    seq = [FreeTriplet(0, 1 + 1 / n, LevyMeasure()) for n in range(1, 11)]
    rep = convergence_diagnostic(seq, semicircle(), tolerances={"bracket": 0.2, "transform": 11.0})
    assert rep.brackets[-1] == pytest.approx([0.1] * len(rep.eps_grid))
    assert rep.passed
    strict = convergence_diagnostic(seq, semicircle())
    assert not strict.checks["bracket"]


def test_diagnostic_detects_wrong_target():
    seq = [semicircle()] * 3
    rep = convergence_diagnostic(seq, semicircle(2.0))
    assert not rep.passed


def test_diagnostic_rejects_empty():
    with pytest.raises(ValidationError):
        convergence_diagnostic([], semicircle())


def test_diagnostic_truncated_jumps():
    r = LevyMeasure(near_zero=(NearZero(0.5, 0.1, 0.1, 1.0),), atoms=((2.0, 0.3),))
    target = FreeTriplet(0.0, 0.0, r)
    seq = [FreeTriplet(0.0, 0.0, r.restrict_outside(1.0 / n)) for n in (10, 100, 1000, 10_000, 100_000)]
    rep = convergence_diagnostic(seq, target)
    assert rep.passed
    assert rep.ct_gaps[-1] < rep.ct_gaps[0]
