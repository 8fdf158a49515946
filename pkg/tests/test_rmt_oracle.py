import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freelevy.cumulants import free_cumulants_to_moments
from freelevy.errors import NotHermitian, SizeMismatch, ValidationError
from freelevy.measures import LevyMeasure
from freelevy.rmt_oracle import (
    EigenSample,
    free_convolve_oracle,
    gue_matrix,
    haar_unitary,
    hermitian_eigenvalues,
    ks_distance,
    sample_fid_matrix,
    sample_gue,
    sample_wishart,
    stream,
)
from freelevy.transforms import marchenko_pastur_law, semicircle_law
from freelevy.triplets import FreeTriplet, free_cumulants_from_triplet, free_poisson, semicircle


def semicircle_grid(variance, pad=1.0):
    r = 2.0 * variance**0.5
    return semicircle_law(np.linspace(-r - pad, r + pad, 4001), variance)


def mp_grid(lam):
    return marchenko_pastur_law(np.linspace(-0.5, (1 + lam**0.5) ** 2 + 1.0, 4001), lam)


# -- eigensolver --------------------------------------------------------------------


def test_eigenvalue_examples():
    assert np.allclose(hermitian_eigenvalues(np.eye(3)), [1, 1, 1])
    assert np.allclose(hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    assert np.allclose(hermitian_eigenvalues([[0, 1], [1, 0]]), [-1, 1])


def test_eigensolver_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eigenvalues([[0, 1], [0, 0]])
    with pytest.raises(ValidationError):
        hermitian_eigenvalues(np.zeros((2, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 60), st.integers(0, 2**32 - 1))
def test_eigensolver_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    H = gue_matrix(n, 1.0, rng)
    ours = hermitian_eigenvalues(H)
    ref = np.linalg.eigvalsh(H)
    assert np.all(np.diff(ours) >= 0)
    assert np.max(np.abs(ours - ref)) <= 1e-10 * max(1.0, np.linalg.norm(H, 2))


def test_eigensolver_residual_spot_check():
    H = gue_matrix(80, 1.0, np.random.default_rng(3))
    norm = np.linalg.norm(H, 2)
    _, vecs = np.linalg.eigh(H)
    ours = hermitian_eigenvalues(H)
    for k in range(0, 80, 17):
        v = vecs[:, k]
        assert np.linalg.norm(H @ v - ours[k] * v) <= 1e-9 * norm


def test_eigensolver_degenerate_spectra():
    U = haar_unitary(40, np.random.default_rng(1))
    D = np.repeat([-1.0, 0.0, 2.5], [10, 20, 10])
    H = (U * D) @ U.conj().T
    H = (H + H.conj().T) / 2
    assert np.max(np.abs(hermitian_eigenvalues(H) - np.sort(D))) < 1e-12 * 40


# -- ensembles --------------------------------------------------------------------


def test_gue_against_semicircle():
    s = sample_gue(512, 1.0, seed=7)
    assert s.n == 512 and np.all(np.diff(s.eigenvalues) >= 0)
    assert ks_distance(s, semicircle_grid(1.0)) < 0.08


def test_gue_1024_against_semicircle():
    assert ks_distance(sample_gue(1024, 1.0, seed=1), semicircle_grid(1.0)) < 0.05


def test_gue_zero_variance():
    assert np.all(sample_gue(8, 0.0, seed=1).eigenvalues == 0)


@pytest.mark.parametrize("n", [2, 17, 128])
def test_trace_conservation(n):
    H = gue_matrix(n, 2.0, stream(4, "gue"))
    assert abs(hermitian_eigenvalues(H).sum() - np.trace(H).real) <= 1e-8 * n


def test_wishart_against_mp():
    s = sample_wishart(512, 1.0, seed=3)
    assert np.all(s.eigenvalues >= 0)
    assert ks_distance(s, mp_grid(1.0)) < 0.08


def test_wishart_atom_at_zero():
    s = sample_wishart(512, 0.5, seed=3)
    frac = np.mean(s.eigenvalues <= 1e-8)
    assert abs(frac - 0.5) <= 0.05
    assert ks_distance(s, mp_grid(0.5)) < 0.08


def test_fid_reductions():
    g = sample_fid_matrix(FreeTriplet(0, 1), 256, seed=2)
    assert ks_distance(g, semicircle_grid(1.0)) < 0.1
    c = sample_fid_matrix(FreeTriplet(1.75, 0), 16, seed=2)
    assert np.allclose(c.eigenvalues, 1.75, atol=1e-14)


def test_fid_free_poisson_against_mp():
    s = sample_fid_matrix(free_poisson(), 512, seed=5)
    assert ks_distance(s, mp_grid(1.0)) < 0.09


@pytest.mark.parametrize(
    "u",
    [
        free_poisson(0.7, 1.5),
        semicircle(0.3, 0.5),
        FreeTriplet(0.2, 0.3, LevyMeasure(atoms=((-1.0, 0.5), (2.0, 0.25)))),
    ],
    ids=["poisson", "semicircle", "mixed"],
)
def test_fid_moments_match_cumulant_prediction(u):
    n = 512
    s = sample_fid_matrix(u, n, seed=11)
    pred = free_cumulants_to_moments(free_cumulants_from_triplet(u, 4)).values
    for p in range(1, 5):
        # lower bound for E|X|^p
        scale = max(1.0, abs(pred[p - 1]), pred[1] ** (p / 2))
        assert abs(s.moment(p) - pred[p - 1]) <= 5 / np.sqrt(n) * scale, (p, s.moment(p), pred[p - 1])


# -- free convolution --------------------------------------------------------------


def test_convolution_examples():
    a = sample_gue(64, 1.0, seed=1)
    zero = EigenSample(np.zeros(64), "zero")
    assert np.allclose(free_convolve_oracle(a, zero, seed=3).eigenvalues, a.eigenvalues, atol=1e-12)
    shift = EigenSample(np.full(64, 2.0), "const")
    assert np.allclose(free_convolve_oracle(shift, a, seed=3).eigenvalues, a.eigenvalues + 2.0, atol=1e-12)
    with pytest.raises(SizeMismatch):
        free_convolve_oracle(a, sample_gue(32, 1.0))


def test_convolution_of_gue_pair():
    a, b = sample_gue(512, 1.0, seed=1), sample_gue(512, 1.0, seed=2)
    s = free_convolve_oracle(a, b, seed=3)
    assert ks_distance(s, semicircle_grid(2.0)) < 0.08
    # swapping the arguments gives an indistinguishable ESD
    t = free_convolve_oracle(b, a, seed=3)
    gap = np.max(np.abs(np.searchsorted(t.eigenvalues, s.eigenvalues, side="right") / 512 - np.arange(1, 513) / 512))
    assert gap < 2 / np.sqrt(512)


def test_haar_unitary_is_unitary():
    U = haar_unitary(50, np.random.default_rng(0))
    assert np.allclose(U @ U.conj().T, np.eye(50), atol=1e-12)


# -- KS distance and determinism ---------------------------------------------------


def test_ks_quantile_sample_is_within_one_over_n():
    law = semicircle_grid(1.0)
    n = 300
    q = (np.arange(n) + 0.5) / n
    x = np.interp(q, law.cdf, law.grid)
    assert ks_distance(EigenSample(x, "quantiles"), law) <= 1 / n + 1e-3


def test_ks_no_overlap_is_one():
    law = semicircle_grid(1.0)
    assert ks_distance(EigenSample(np.full(5, 100.0), "far"), law) == pytest.approx(1.0)


def test_ks_counts_model_atoms():
    law = mp_grid(0.5)
    x = np.concatenate([np.zeros(50), np.interp((np.arange(50) + 0.5) / 50 * 0.5 + 0.5, law.cdf, law.grid)])
    assert ks_distance(EigenSample(np.sort(x), "mixed"), law) <= 0.03


def test_determinism():
    for make in (
        lambda: sample_gue(64, 1.0, seed=9),
        lambda: sample_wishart(64, 0.5, seed=9),
        lambda: sample_fid_matrix(free_poisson(2.0), 64, seed=9),
    ):
        assert make().eigenvalues.tobytes() == make().eigenvalues.tobytes()
    assert sample_gue(64, seed=1).eigenvalues.tobytes() != sample_gue(64, seed=2).eigenvalues.tobytes()


def test_streams_are_independent_by_component():
    a = stream(1, "gue").random(4)
    b = stream(1, "wishart").random(4)
    assert not np.allclose(a, b)
    assert np.array_equal(stream(1, "gue").random(4), a)
