"""Gaussian machinery: continuous elliptical Gaussians over H, the width
family used by the average-case reductions, discrete Gaussians over lattice
cosets, coset discretization, and smoothing-parameter bounds.

Width conventions: a one-dimensional width r means the density
r^-1 exp(-pi x^2 / r^2), i.e. variance r^2 / (2*pi).  Elliptical width vectors
are indexed in the slot layout and must carry equal widths on conjugate pairs
(the per-dimension k <-> m-k flip); the sampler draws independent reals in the
orthonormal h basis and maps them back to power-basis coefficients.

Samplers take an explicit numpy Generator and are bit-reproducible under a
fixed seed.  Nothing here is constant time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .params import RingParams, conjugate_flip
from .embedding import h_combine, sigma_inverse
from . import stats as _stats

__all__ = [
    "GaussianSpec",
    "UpsilonDraw",
    "sample_continuous",
    "sample_continuous_batch",
    "sample_widths_batch",
    "sample_upsilon",
    "sample_gamma21",
    "gamma21_cdf",
    "sample_discrete_gaussian",
    "discretize",
    "dual_units_to_coeffs",
    "coeffs_to_dual_units",
    "smoothing_bound",
]

SPHERICAL = "spherical"
ELLIPTICAL = "elliptical"


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    """An elliptical Gaussian over H given by its per-slot width vector."""

    params: RingParams
    r: np.ndarray
    kind: str

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.shape != (self.params.total_degree_n,):
            raise ValueError(f"width vector must have length {self.params.total_degree_n}")
        if np.any(r <= 0):
            raise ValueError("widths must be positive")
        flip = np.asarray(conjugate_flip(self.params))
        if not np.array_equal(r, r[flip]):
            raise ValueError("widths must match on conjugate slot pairs")
        r.flags.writeable = False
        object.__setattr__(self, "r", r)

    @classmethod
    def spherical(cls, params: RingParams, r: float) -> "GaussianSpec":
        return cls(params, np.full(params.total_degree_n, float(r)), SPHERICAL)

    @classmethod
    def elliptical(cls, params: RingParams, r_vec) -> "GaussianSpec":
        return cls(params, np.asarray(r_vec, dtype=float), ELLIPTICAL)

    @property
    def r_max(self) -> float:
        return float(np.max(self.r))

    def widened(self, extra: "GaussianSpec") -> "GaussianSpec":
        """Spec of the sum of independent draws: widths add in squares."""
        return GaussianSpec.elliptical(self.params, np.sqrt(self.r**2 + extra.r**2))


@dataclass(frozen=True)
class UpsilonDraw:
    """One draw from the width-randomizing family: r_j^2 = alpha^2 (1 + sqrt(n) x_j)
    with x ~ Gamma(2,1), one shared draw per conjugate orbit."""

    spec: GaussianSpec
    gamma_draws: np.ndarray


@lru_cache(maxsize=None)
def _h_to_coeff_matrix(params: RingParams) -> np.ndarray:
    """Real matrix taking h-basis coordinates to power-basis coefficients."""
    n = params.total_degree_n
    cols = []
    for j in range(n):
        c = np.zeros(n)
        c[j] = 1.0
        cols.append(sigma_inverse(params, h_combine(params, c), tol=1e-6))
    return np.array(cols).T


def sample_continuous(spec: GaussianSpec, rng: np.random.Generator) -> np.ndarray:
    """One draw, returned as a real power-basis coefficient vector."""
    return sample_continuous_batch(spec, rng, 1)[0]


def sample_continuous_batch(
    spec: GaussianSpec, rng: np.random.Generator, count: int
) -> np.ndarray:
    """(count, n) independent draws.  Coordinate j in the h basis is a centered
    normal with standard deviation r_j / sqrt(2*pi)."""
    return sample_widths_batch(spec.params, spec.r, rng, count)


def sample_widths_batch(
    params: RingParams, widths, rng: np.random.Generator, count: int
) -> np.ndarray:
    """Raw width-vector variant of the elliptical sampler (entries >= 0; a zero
    width pins its coordinate).  Used by transformations that complete widths."""
    widths = np.asarray(widths, dtype=float)
    scale = widths / math.sqrt(2 * math.pi)
    draws = rng.standard_normal((count, params.total_degree_n)) * scale
    return draws @ _h_to_coeff_matrix(params).T


def sample_gamma21(rng: np.random.Generator, size=None):
    """Gamma(2,1) as the sum of two inverse-CDF exponentials."""
    u1 = 1.0 - rng.random(size)
    u2 = 1.0 - rng.random(size)
    return -(np.log(u1) + np.log(u2))


def gamma21_cdf(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, 1.0 - (1.0 + x) * np.exp(-x), 0.0)


def sample_upsilon(
    alpha: float, params: RingParams, rng: np.random.Generator
) -> UpsilonDraw:
    """Draw an elliptical width vector with r_j^2 = alpha^2 (1 + sqrt(n) x_j).

    Conjugate-pair slots share a single Gamma(2,1) draw (the symmetry the width
    family demands); all other draws are independent."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    n = params.total_degree_n
    flip = conjugate_flip(params)
    x = np.zeros(n)
    for j in range(n):
        if j <= flip[j]:
            v = float(sample_gamma21(rng))
            x[j] = v
            x[flip[j]] = v
    r = alpha * np.sqrt(1.0 + math.sqrt(n) * x)
    return UpsilonDraw(GaussianSpec.elliptical(params, r), x)


# --- discrete Gaussians -----------------------------------------------------------


def _sample_diagonal(
    scales: np.ndarray, shift: np.ndarray, r: float, rng: np.random.Generator, count: int
) -> np.ndarray:
    """Per-coordinate exact sampling for an orthogonal (diagonal) lattice: each
    coordinate is c*k + u with k from the integer Gaussian table."""
    out = np.empty((count, len(scales)))
    # shared table when every coordinate looks the same (the common R^dual case)
    if np.all(scales == scales[0]) and np.all(shift == shift[0]):
        k, probs = _integer_table(float(scales[0]), float(shift[0]), r)
        draws = rng.choice(k, size=(count, len(scales)), p=probs)
        return scales[0] * draws + shift[0]
    for i, (c, u) in enumerate(zip(scales, shift)):
        k, probs = _integer_table(float(c), float(u), r)
        out[:, i] = c * rng.choice(k, size=count, p=probs) + u
    return out


@lru_cache(maxsize=512)
def _integer_table_cached(c: float, u: float, r: float):
    center = -u / c
    halfwidth = int(math.ceil(6 * r / abs(c))) + 1
    k = np.arange(math.floor(center) - halfwidth, math.ceil(center) + halfwidth + 1)
    x = c * k + u
    logp = -math.pi * x**2 / r**2
    p = np.exp(logp - np.max(logp))
    return k, p / np.sum(p)


def _integer_table(c: float, u: float, r: float):
    return _integer_table_cached(c, u, r)


def sample_discrete_gaussian(
    basis,
    coset_shift,
    r: float,
    rng: np.random.Generator,
    size: int | None = None,
    max_points: int = 2_000_000,
) -> np.ndarray:
    """Points of Lambda + u with probability proportional to
    exp(-pi ||x||^2 / r^2); one (n,) point, or a (size, n) batch.

    Diagonal bases use exact per-coordinate tables; general full-rank bases use
    exhaustive enumeration out to ||nearest|| + 6 r sqrt(n), beyond which the
    truncated mass is far below every test tolerance.
    """
    B = np.asarray(basis, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("need a square basis (rows = vectors)")
    n = B.shape[0]
    u = np.zeros(n) if coset_shift is None else np.asarray(coset_shift, dtype=float)
    if r <= 0:
        raise ValueError("r must be positive")
    count = 1 if size is None else int(size)
    off = B - np.diag(np.diag(B))
    if not np.any(off):
        out = _sample_diagonal(np.diag(B), u, r, rng, count)
        return out[0] if size is None else out
    G = B @ B.T
    if abs(np.linalg.det(G)) < 1e-12:
        raise ValueError("degenerate basis")
    Binv = np.linalg.inv(B)
    center = -u @ Binv
    z0 = np.rint(center)
    radius = float(np.linalg.norm(z0 @ B + u)) + 6 * r * math.sqrt(n)
    bounds = np.floor(radius * np.sqrt(np.abs(np.diag(np.linalg.inv(G)))) + 1).astype(int)
    dims = 2 * bounds + 1
    total = int(np.prod(dims.astype(object)))
    if total > max_points:
        raise ValueError(f"enumeration too large ({total} points)")
    ids = np.arange(total)
    Z = np.array(np.unravel_index(ids, dims)).T - bounds + z0.astype(int)
    X = Z @ B + u
    d2 = np.einsum("ij,ij->i", X, X)
    keep = d2 <= radius**2
    X, d2 = X[keep], d2[keep]
    logp = -math.pi * d2 / r**2
    p = np.exp(logp - np.max(logp))
    p /= np.sum(p)
    picks = X[rng.choice(len(X), size=count, p=p)]
    return picks[0] if size is None else picks


# --- coset discretization ----------------------------------------------------------


def coeffs_to_dual_units(params: RingParams, x) -> np.ndarray:
    """Power-basis coefficients of K -> coordinates w.r.t. the scaled dual basis
    (multiply by prod n_i; power-of-two conductors only)."""
    if not params.is_power_of_two():
        raise ValueError("dual coordinates need power-of-two conductors")
    return np.asarray(x, dtype=float) * math.prod(params.degrees_n)


def dual_units_to_coeffs(params: RingParams, y) -> np.ndarray:
    if not params.is_power_of_two():
        raise ValueError("dual coordinates need power-of-two conductors")
    return np.asarray(y, dtype=float) / math.prod(params.degrees_n)


def discretize(params: RingParams, x, p: int, w) -> np.ndarray:
    """Round a real K coefficient vector to the nearest point of w + p*R^dual.

    Rounding is coordinate-wise in the scaled dual basis; ties go to the even
    quotient (numpy rint).  Returns the integer dual-unit coordinate vector;
    ``dual_units_to_coeffs`` converts back to K coefficients.
    """
    if p < 1:
        raise ValueError("p must be a positive integer")
    xd = coeffs_to_dual_units(params, x)
    w = np.broadcast_to(np.asarray(w, dtype=float), xd.shape)
    quot = np.rint((xd - w) / p)
    return (w + p * quot).astype(np.int64)


# --- smoothing parameter ------------------------------------------------------------


def smoothing_bound(basis, epsilon: float) -> float:
    """Usable upper bound for the smoothing parameter of a real-coordinate
    lattice: min( sqrt(ln(n/eps)) * lambda_n,  sqrt(n) / lambda_1(dual) ),
    where the second term applies only for eps >= 2^(-2n)."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    B = np.asarray(basis, dtype=float)
    inst = _stats.from_real_basis(B, "smoothing")
    n = inst.n
    lam_n = _stats.brute_force_lambda_n(inst)
    bound = math.sqrt(math.log(n / epsilon)) * lam_n
    if epsilon >= 2.0 ** (-2 * n):
        dual = _stats.from_real_basis(np.linalg.inv(B).T, "smoothing-dual")
        radius = max(1e-9, dual.det() ** (1 / n))
        for _ in range(40):
            try:
                _, lam1_dual = _stats.brute_force_lambda1(dual, radius_bound=radius)
                bound = min(bound, math.sqrt(n) / lam1_dual)
                break
            except ValueError:
                radius *= 2
    return bound
