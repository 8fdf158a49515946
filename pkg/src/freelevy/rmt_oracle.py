"""Random-matrix ensembles used as an independent Monte Carlo check of the analytic laws.

Eigenvalues come from an in-repo solver: Householder reduction of the
Hermitian matrix to a complex tridiagonal one, a diagonal phase change that
makes the off-diagonal real, then implicit-shift QL on the real symmetric
tridiagonal matrix.

Random streams are Philox generators keyed by ``(seed, component)`` so that
every ingredient of a sample has its own reproducible stream.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from . import measures as M
from .errors import NoConvergence, NotHermitian, SizeMismatch, ValidationError
from .measures import LevyMeasure, levy_quadrature
from .transforms import SpectralDensity
from .triplets import FREE, FreeTriplet

log = logging.getLogger(__name__)

GUE = "gue"
WISHART = "wishart"
FID = "fid"


def stream(seed: int, component: str) -> np.random.Generator:
    """Counter-based generator for one named component of a seeded computation."""
    key = int.from_bytes(hashlib.blake2b(component.encode(), digest_size=8).digest(), "little")
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(key,))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# Eigensolver
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _householder_tridiagonal(A):
    """Reduce Hermitian ``A`` (overwritten) to tridiagonal form; returns (diag, |offdiag|)."""
    n = A.shape[0]
    d = np.zeros(n)
    e = np.zeros(n)
    v = np.zeros(n, dtype=np.complex128)
    p = np.zeros(n, dtype=np.complex128)
    for k in range(n - 2):
        m0 = k + 1
        norm2 = 0.0
        for i in range(m0, n):
            norm2 += A[i, k].real ** 2 + A[i, k].imag ** 2
        norm = math.sqrt(norm2)
        d[k] = A[k, k].real
        if norm == 0.0:
            e[k] = 0.0
            continue
        x0 = A[m0, k]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 > 0 else 1.0 + 0.0j
        alpha = -phase * norm
        # v = x - alpha e1, normalized
        for i in range(m0, n):
            v[i] = A[i, k]
        v[m0] = v[m0] - alpha
        vn2 = 0.0
        for i in range(m0, n):
            vn2 += v[i].real ** 2 + v[i].imag ** 2
        vn = math.sqrt(vn2)
        for i in range(m0, n):
            v[i] = v[i] / vn
        # p = A v on the trailing block (A Hermitian, use full storage)
        for i in range(m0, n):
            s = 0.0j
            for j in range(m0, n):
                s += A[i, j] * v[j]
            p[i] = s
        K = 0.0j
        for i in range(m0, n):
            K += v[i].conjugate() * p[i]
        Kr = K.real
        # w = 2p - 2K v ; A -= v w* + w v*
        for i in range(m0, n):
            p[i] = 2.0 * p[i] - 2.0 * Kr * v[i]
        for i in range(m0, n):
            vi = v[i]
            wi = p[i]
            for j in range(m0, n):
                A[i, j] -= vi * p[j].conjugate() + wi * v[j].conjugate()
        e[k] = abs(alpha)
    if n >= 2:
        d[n - 2] = A[n - 2, n - 2].real
        e[n - 2] = abs(A[n - 1, n - 2])
    d[n - 1] = A[n - 1, n - 1].real
    return d, e


@numba.njit(cache=True)
def _tridiagonal_ql(d, e, max_sweeps):
    """Eigenvalues of the symmetric tridiagonal matrix (d, e); e[i] couples i and i+1.

    Returns a status flag: 0 on success, 1 if some eigenvalue exceeded the sweep budget.
    """
    n = d.shape[0]
    anorm = 0.0
    for i in range(n):
        anorm = max(anorm, abs(d[i]) + abs(e[i]))
    floor = 2.220446049250313e-16 * anorm
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 2.220446049250313e-16 * dd or abs(e[m]) <= floor:
                    break
                m += 1
            if m == l:
                break
            if it == max_sweeps:
                return 1
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def hermitian_eigenvalues(matrix, max_sweeps: int = 60) -> np.ndarray:
    """Sorted eigenvalues of a Hermitian matrix."""
    A = np.array(matrix, dtype=np.complex128, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError("matrix must be square")
    n = A.shape[0]
    if n == 0:
        return np.zeros(0)
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.conj().T)) > 1e-12 * scale:
        raise NotHermitian("matrix is not Hermitian within 1e-12")
    if n == 1:
        return np.array([A[0, 0].real])
    d, e = _householder_tridiagonal(A)
    e[n - 1] = 0.0
    if _tridiagonal_ql(d, e, max_sweeps):
        raise NoConvergence("tridiagonal QL exceeded its sweep budget")
    return np.sort(d)


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenSample:
    eigenvalues: np.ndarray
    kind: str
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.eigenvalues.size)

    def moment(self, p: int) -> float:
        return float(np.mean(self.eigenvalues**p))


def _check_n(n: int) -> None:
    if int(n) != n or n < 2:
        raise ValidationError("matrix size n must be an integer >= 2")


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Entries with ``E|x|^2 = 1``."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def gue_matrix(n: int, variance: float, rng: np.random.Generator) -> np.ndarray:
    """Hermitian matrix with entry variance ``variance / n``."""
    X = _complex_gaussian(rng, (n, n))
    H = (X + X.conj().T) / 2.0
    return H * math.sqrt(2.0 * variance / n)


def sample_gue(n: int, variance: float = 1.0, seed: int = 0) -> EigenSample:
    _check_n(n)
    if variance < 0:
        raise ValidationError("variance must be >= 0")
    H = gue_matrix(n, variance, stream(seed, "gue"))
    return EigenSample(hermitian_eigenvalues(H), GUE, seed, {"variance": variance})


def sample_wishart(n: int, lam: float = 1.0, seed: int = 0) -> EigenSample:
    """``(1/n) X X*`` with ``X`` of size ``n x round(lam n)``; the limit law has mean ``lam``."""
    _check_n(n)
    if not lam > 0:
        raise ValidationError("aspect ratio lam must be > 0")
    m = max(1, int(round(lam * n)))
    X = _complex_gaussian(stream(seed, "wishart"), (n, m))
    W = X @ X.conj().T / n
    W = (W + W.conj().T) / 2.0
    # positive semidefinite: negative values are rounding noise
    ev = np.maximum(hermitian_eigenvalues(W), 0.0)
    return EigenSample(ev, WISHART, seed, {"lam": lam, "m": m})


def _piece_mass(piece: M.DensityPiece) -> float:
    return levy_quadrature(LevyMeasure(body=(piece,)), M.from_callable("one", lambda t: 1.0, 0))


def _sample_piece(piece: M.DensityPiece, k: int, rng: np.random.Generator, table: int = 4097) -> np.ndarray:
    """Inverse-CDF sampling from a tabulated density piece."""
    if piece.power != 0.0:
        a, b = sorted((abs(piece.lo), abs(piece.hi)))
        mag = np.geomspace(a, b, table)
        grid = np.sort(np.sign(piece.hi) * mag)
    else:
        grid = np.linspace(piece.lo, piece.hi, table)
    dens = np.maximum(piece.density(grid), 0.0)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    return np.interp(rng.random(k), cdf, grid)


def sample_jumps(r: LevyMeasure, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` draws from the normalized finite measure ``r`` (atoms and body pieces)."""
    comps = [("atom", t, m) for t, m in r.atoms] + [("body", p, _piece_mass(p)) for p in r.body]
    if r.near_zero:
        raise ValidationError("sample_jumps needs a finite measure (truncate near-zero pieces first)")
    masses = np.array([c[2] for c in comps])
    if k == 0 or masses.sum() == 0:
        return np.zeros(0)
    counts = rng.multinomial(k, masses / masses.sum())
    out = []
    for (kind, obj, _), cnt in zip(comps, counts):
        if cnt == 0:
            continue
        out.append(np.full(cnt, obj) if kind == "atom" else _sample_piece(obj, int(cnt), rng))
    draws = np.concatenate(out)
    return rng.permutation(draws)


def fid_matrix(u: FreeTriplet, n: int, eps: float, seed: int) -> np.ndarray:
    """``a I + sqrt(b) GUE + sum_i t_i v_i v_i* - (∫_{|t|>eps} sigma dr) I`` with Poisson(n r(|t|>eps)) jumps."""
    if u.flavor != FREE:
        raise ValidationError("sample_fid_matrix needs a free triplet")
    H = np.eye(n, dtype=np.complex128) * u.a
    if u.b > 0:
        H = H + gue_matrix(n, u.b, stream(seed, "fid.gue"))
    if not u.r.is_zero:
        if not eps > 0:
            raise ValidationError("eps must be > 0")
        r = u.r.restrict_outside(eps)
        if not r.is_zero:
            mass = levy_quadrature(r, M.from_callable("one", lambda t: 1.0, 0))
            P = int(stream(seed, "fid.count").poisson(n * mass))
            t = sample_jumps(r, P, stream(seed, "fid.jumps"))
            V = _complex_gaussian(stream(seed, "fid.vectors"), (n, P))
            V /= np.linalg.norm(V, axis=0, keepdims=True)
            H = H + (V * t) @ V.conj().T
            H = H - np.eye(n) * levy_quadrature(r, M.sigma())
    return (H + H.conj().T) / 2.0


def sample_fid_matrix(u: FreeTriplet, n: int, eps: float = 1e-3, seed: int = 0) -> EigenSample:
    _check_n(n)
    H = fid_matrix(u, n, eps, seed)
    return EigenSample(hermitian_eigenvalues(H), FID, seed, {"eps": eps})


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = _complex_gaussian(rng, (n, n))
    Q, R = np.linalg.qr(Z)
    diag = np.diagonal(R)
    phases = diag / np.abs(diag)
    return Q * phases


def free_convolve_oracle(A: EigenSample, B: EigenSample, seed: int = 0) -> EigenSample:
    """Eigenvalues of ``diag(A) + U diag(B) U*`` with ``U`` Haar distributed."""
    if A.n != B.n:
        raise SizeMismatch(f"samples have sizes {A.n} and {B.n}")
    U = haar_unitary(A.n, stream(seed, "haar"))
    H = np.diag(A.eigenvalues).astype(np.complex128) + (U * B.eigenvalues) @ U.conj().T
    H = (H + H.conj().T) / 2.0
    return EigenSample(hermitian_eigenvalues(H), "convolution", seed, {})


def ks_distance(sample: EigenSample, law: SpectralDensity, atom_snap: float = 1e-9) -> float:
    """``sup |F_empirical - F_model|`` with model atoms included in the CDF.

    Sample points within ``atom_snap * max(1, max|x|)`` of a model atom count as
    lying on it.
    """
    x = np.asarray(sample.eigenvalues, dtype=float)
    n = x.size
    if n == 0:
        raise ValidationError("empty sample")
    # eigenvalues that equal an atom of the model up to rounding are put on it
    snap = atom_snap * max(1.0, float(np.max(np.abs(x))))
    for loc, _ in law.atoms:
        x = np.where(np.abs(x - loc) <= snap, loc, x)
    x = np.sort(x)
    lo, hi = law.grid[0], law.grid[-1]
    outside = int(np.sum((x < lo) | (x > hi)))
    if outside:
        log.warning("%d of %d sample points fall outside the model grid [%g, %g]; CDF clamped", outside, n, lo, hi)
    if outside == n:
        log.warning("sample and model grid do not overlap")
    F = law.cdf_at(x)
    F_left = law.cdf_left(x)
    # ties in the sample: use the last index of each run for the upper step
    upper = np.searchsorted(x, x, side="right") / n
    lower = np.searchsorted(x, x, side="left") / n
    return float(max(np.max(np.abs(upper - F)), np.max(np.abs(F_left - lower)), 0.0))
