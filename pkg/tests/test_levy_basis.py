import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_field, seeds
from freelevy.errors import NotInvertible, OutOfCarrier, ValidationError, ZeroLaw
from freelevy.levy_basis import (
    EMPTY,
    Cell,
    KappaAtom,
    PiecewiseLinearMap,
    SeedField,
    SignedSetMeasure,
    canonicalize_field,
    concentrate_field,
    control_measure,
    format_set,
    free_poisson_basis,
    interval,
    is_canonical,
    make_factorizable,
    parse_set,
    pushforward_field,
    semicircular_basis,
    set_diff,
    set_intersect,
    set_normalize,
    set_union,
    triplet_of_set,
)
from freelevy.measures import LevyMeasure
from freelevy.transforms import convergence_diagnostic
from freelevy.triplets import (
    FreeTriplet,
    free_poisson,
    semicircle,
    triplet_add,
    triplets_close,
    zero_triplet,
)


def random_subset(rng, carrier, k=2):
    lo, hi = carrier.bounds()
    raw = []
    for _ in range(k):
        a, b = np.sort(rng.uniform(lo, hi, 2))
        raw.append((float(a), float(b)))
    return set_normalize(raw) & carrier


def exact_parts_equal(u, v, rel=1e-12):
    scale = max(1.0, abs(u.a), abs(v.a), u.b, v.b)
    return abs(u.a - v.a) <= rel * scale and abs(u.b - v.b) <= rel * scale


# -- sets ---------------------------------------------------------------------


def test_set_examples():
    assert set_union(interval(0, 1), interval(1, 2)) == interval(0, 2)
    assert set_diff(interval(0, 2), interval(1, 3)) == interval(0, 1)
    assert set_intersect(interval(0, 1), interval(2, 3)).is_empty


def test_set_normal_form_unique():
    a = set_normalize([(2, 3), (0, 1), (0.5, 1.5)])
    assert a.intervals == ((0.0, 1.5), (2.0, 3.0))
    assert set_normalize([(1, 1), (3, 2)]) == EMPTY


def test_parse_and_format_round_trip():
    s = parse_set("[0,1)∪[2,3.5)")
    assert s.intervals == ((0.0, 1.0), (2.0, 3.5))
    assert parse_set(format_set(s)) == s
    assert parse_set("∅").is_empty
    assert parse_set("[0,1) + [1,2)") == interval(0, 2)
    with pytest.raises(ValidationError):
        parse_set("(0,1]")


interval_lists = st.lists(
    st.tuples(st.integers(-20, 20), st.integers(1, 10)).map(lambda t: (t[0] / 4, (t[0] + t[1]) / 4)), max_size=4
)


@given(interval_lists, interval_lists, interval_lists)
def test_set_algebra_laws(ra, rb, rc):
    a, b, c = set_normalize(ra), set_normalize(rb), set_normalize(rc)
    assert (a | b) == (b | a) and (a & b) == (b & a)
    assert (a & (b | c)) == ((a & b) | (a & c))
    assert ((a - b) | (a & b)) == a
    assert (a - b).length() + (a & b).length() == pytest.approx(a.length())
    assert (a | b).length() == pytest.approx(a.length() + b.length() - (a & b).length())


# -- triplets of sets ------------------------------------------------------------


def test_triplet_of_set_examples():
    g = semicircular_basis(interval(0, 4))
    assert triplet_of_set(g, interval(0, 2)) == FreeTriplet(0, 2, LevyMeasure())
    assert triplet_of_set(g, EMPTY) == zero_triplet()
    p = free_poisson_basis(interval(0, 3))
    assert triplets_close(triplet_of_set(p, interval(1, 2)), free_poisson())


def test_out_of_carrier():
    with pytest.raises(OutOfCarrier):
        triplet_of_set(semicircular_basis(), interval(0.5, 1.5))


def test_control_measure_examples():
    assert control_measure(semicircular_basis(), interval(0, 1)) == 1.0
    assert control_measure(free_poisson_basis(), interval(0, 1)) == 2.0
    assert control_measure(free_poisson_basis(), EMPTY) == 0.0


def test_factorizable_examples():
    g = semicircular_basis()
    (c,) = g.cells
    assert (c.theta, c.sigma2, c.rho.is_zero, c.kappa_density) == (0, 1, True, 1)
    p = free_poisson_basis()
    (c,) = p.cells
    assert (c.theta, c.sigma2, c.rho.atoms, c.kappa_density) == (0.5, 0, ((1.0, 0.5),), 2.0)
    d = make_factorizable(FreeTriplet(1, 0), interval(0, 1))
    assert (d.cells[0].theta, d.cells[0].kappa_density) == (1.0, 1.0)
    with pytest.raises(ZeroLaw):
        make_factorizable(zero_triplet(), interval(0, 1))


def test_factorizable_with_density_eta():
    nu = triplet_add(semicircle(0.5, -0.2), free_poisson(0.7, 1.8))
    f = make_factorizable(nu, [(0.0, 1.0, 2.0), (1.0, 3.0, 0.5)])
    E = interval(0.5, 2.0)
    eta = 2.0 * 0.5 + 0.5 * 1.0
    u = triplet_of_set(f, E)
    assert u.a == pytest.approx(eta * nu.a) and u.b == pytest.approx(eta * nu.b)
    assert triplets_close(u, FreeTriplet(eta * nu.a, eta * nu.b, nu.r.weighted(eta)))
    assert is_canonical(f)


def test_canonicalize_examples():
    g = semicircular_basis()
    assert canonicalize_field(g) == g
    f = SeedField((Cell(0, 1, 0, 4, LevyMeasure(), 1.0),))
    (c,) = canonicalize_field(f).cells
    assert (c.sigma2, c.kappa_density) == (1.0, 4.0)
    z = SeedField((Cell(0, 1, 0, 0, LevyMeasure(), 1.0), Cell(1, 2, 0, 1, LevyMeasure(), 1.0)))
    assert len(canonicalize_field(z).cells) == 1


def test_pushforward_examples():
    g = semicircular_basis(interval(0, 2))
    ident = PiecewiseLinearMap((0.0, 2.0), (0.0, 2.0))
    assert pushforward_field(g, ident) == g
    shifted = pushforward_field(g, PiecewiseLinearMap.affine(1.0, 1.0, 0.0, 2.0))
    assert triplet_of_set(shifted, interval(1, 3)) == FreeTriplet(0, 2, LevyMeasure())
    doubled = pushforward_field(g, PiecewiseLinearMap.affine(2.0, 0.0, 0.0, 2.0))
    assert doubled.cells[0].kappa_density == 0.5
    assert triplet_of_set(doubled, interval(0, 1)) == triplet_of_set(g, interval(0, 0.5))


def test_pushforward_rejects_non_monotone():
    with pytest.raises(NotInvertible):
        PiecewiseLinearMap((0.0, 1.0, 2.0), (0.0, 1.0, 0.5))


def test_concentrate_examples():
    g = semicircular_basis(interval(0, 3))
    assert concentrate_field(g, g.carrier) == g
    assert concentrate_field(g, EMPTY).cells == ()
    c = concentrate_field(g, interval(0, 1))
    assert triplet_of_set(c, interval(0.5, 2)) == FreeTriplet(0, 0.5, LevyMeasure())


def test_signed_measure_hahn_jordan():
    m = SignedSetMeasure(cells=((0, 1, 2.0), (1, 2, -1.0)), atoms=((0.5, -0.3), (1.5, 0.4)))
    E = interval(0, 2)
    assert m(E) == pytest.approx(2.0 - 1.0 - 0.3 + 0.4)
    assert m.positive_part()(E) == pytest.approx(2.4)
    assert m.negative_part()(E) == pytest.approx(1.3)
    assert m.total_variation(E) == pytest.approx(3.7)


def test_field_validation():
    with pytest.raises(ValidationError):
        SeedField((Cell(0, 2, 0, 1, LevyMeasure(), 1.0), Cell(1, 3, 0, 1, LevyMeasure(), 1.0)))
    with pytest.raises(ValidationError):
        Cell(0, 1, 0, 1, LevyMeasure(), 0.0)
    with pytest.raises(ValidationError):
        KappaAtom(0.5, -1.0, 0, 0, LevyMeasure())


# -- properties -------------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_finite_additivity(seed):
    rng = np.random.default_rng(seed)
    f = random_field(rng, near_zero=bool(rng.random() < 0.3))
    E1 = random_subset(rng, f.carrier)
    E2 = random_subset(rng, f.carrier) - E1
    whole = triplet_of_set(f, E1 | E2)
    parts = triplet_add(triplet_of_set(f, E1), triplet_of_set(f, E2))
    assert exact_parts_equal(whole, parts)
    assert triplets_close(whole, parts)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_canonical_control_measure_matches_stored_kappa(seed):
    rng = np.random.default_rng(seed)
    f = canonicalize_field(random_field(rng, body=True))
    assert is_canonical(f)
    for _ in range(3):
        E = random_subset(rng, f.carrier)
        assert control_measure(f, E) == pytest.approx(f.kappa(E), abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_canonicalize_preserves_triplets(seed):
    rng = np.random.default_rng(seed)
    f = random_field(rng)
    g = canonicalize_field(f)
    E = random_subset(rng, f.carrier)
    u, v = triplet_of_set(f, E), triplet_of_set(g, E)
    assert exact_parts_equal(u, v, rel=1e-12)
    assert triplets_close(u, v)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_concentrate_equals_intersection(seed):
    rng = np.random.default_rng(seed)
    f = random_field(rng)
    A = random_subset(rng, f.carrier, k=3)
    c = concentrate_field(f, A)
    E = random_subset(rng, f.carrier)
    assert triplets_close(triplet_of_set(c, E), triplet_of_set(f, A & E))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_pushforward_matches_preimage(seed):
    rng = np.random.default_rng(seed)
    f = random_field(rng)
    lo, hi = f.carrier.bounds()
    knots = np.linspace(lo - 0.5, hi + 0.5, 4)
    steps = rng.uniform(0.3, 3.0, 3)
    vals = np.concatenate([[0.0], np.cumsum(steps)])
    if rng.random() < 0.5:
        vals = -vals
    phi = PiecewiseLinearMap(tuple(knots), tuple(vals))
    g = pushforward_field(f, phi)
    H = random_subset(rng, g.carrier)
    u = triplet_of_set(g, H)
    v = triplet_of_set(f, phi.preimage(H))
    assert exact_parts_equal(u, v, rel=1e-10)
    assert triplets_close(u, v, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_seed_recovery_for_factorizable(seed):
    rng = np.random.default_rng(seed)
    nu = FreeTriplet(float(rng.uniform(-1, 1)), float(rng.uniform(0, 1)), LevyMeasure(atoms=((float(rng.uniform(0.2, 2)), 0.5),)))
    f = make_factorizable(nu, interval(0, 2))
    c = nu.a and abs(nu.a) + nu.b + min(1.0, nu.r.atoms[0][0] ** 2) * 0.5
    cell = f.cells[0]
    assert cell.theta == pytest.approx(nu.a / c) and cell.sigma2 == pytest.approx(nu.b / c)


def test_continuity_at_empty_set():
    f = random_field(np.random.default_rng(5), n_cells=2)
    lo = f.cells[0].lo
    seq = [triplet_of_set(f, interval(lo, lo + 0.5 ** k)) for k in range(2, 30, 3)]
    for u in seq[-1:]:
        assert abs(u.a) < 1e-6 and u.b < 1e-6
    rep = convergence_diagnostic(seq, zero_triplet())
    assert rep.passed
