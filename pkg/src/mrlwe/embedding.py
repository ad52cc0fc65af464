"""Canonical embedding of the tensor ring into H, and its geometry.

The embedding sends a coefficient vector to its evaluations at every tuple of
primitive complex roots (omega_{m_1}^{k_1}, ..., omega_{m_l}^{k_l}), with
omega_m = exp(2*pi*i/m) and k_i running over Z_{m_i}^* in ascending order --
the same slot layout the mod-q transforms use.  It is the Kronecker product of
per-dimension Vandermonde maps, so it is invertible dimension by dimension.

Everything is double precision with stated tolerances; the dense n x n oracles
(matrix inverse, determinant, dual-basis comparison) are only wired up for
n <= 16 where they are exact enough to serve as cross-checks.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .params import RingParams, conjugate_flip, g_units

__all__ = [
    "EmbeddedVector",
    "DualScale",
    "sigma",
    "sigma_inverse",
    "lp_norm",
    "trace",
    "norm_field",
    "h_basis",
    "h_coords",
    "h_combine",
    "dual_lattice_check",
    "discriminant",
    "embedding_matrix",
    "embedding_det_check",
    "pure_tensor_coeffs",
    "embedded_to_csv",
]

SYMMETRY_TOL = 1e-9


@lru_cache(maxsize=None)
def _dim_vandermonde(m: int) -> np.ndarray:
    """V[t, e] = omega_m^(g[t] * e) for the units g of Z_m in ascending order."""
    units = g_units(m)
    n = len(units)
    omega = cmath.exp(2j * math.pi / m)
    return np.array([[omega ** (k * e) for e in range(n)] for k in units])


@lru_cache(maxsize=None)
def _dim_vandermonde_inv(m: int) -> np.ndarray:
    return np.linalg.inv(_dim_vandermonde(m))


@lru_cache(maxsize=None)
def _dim_h_basis(m: int) -> np.ndarray:
    """Columns = orthonormal basis of H_i in the ascending-unit coordinate order.

    For m <= 2 the single embedding is real.  Otherwise the coordinates come in
    conjugate pairs (position of k, position of m-k); the pair spans two real
    basis vectors: (e_p + e_pbar)/sqrt(2) at index p and i(e_p - e_pbar)/sqrt(2)
    at index pbar."""
    units = g_units(m)
    n = len(units)
    if m <= 2:
        return np.eye(n, dtype=complex)
    H = np.zeros((n, n), dtype=complex)
    pos = {k: t for t, k in enumerate(units)}
    s = 1 / math.sqrt(2)
    for k in units:
        if k > m - k:
            continue
        p, pbar = pos[k], pos[m - k]
        H[p, p] = s
        H[pbar, p] = s
        H[p, pbar] = 1j * s
        H[pbar, pbar] = -1j * s
    return H


@dataclass(frozen=True)
class DualScale:
    """The scalar t with t*R = R^dual in the power-of-two configuration."""

    numerator: int
    denominator: int

    @classmethod
    def for_params(cls, params: RingParams) -> "DualScale":
        if not params.is_power_of_two():
            raise ValueError(
                "dual scale is only available for power-of-two conductors"
            )
        return cls(1, math.prod(params.degrees_n))

    @property
    def value(self) -> float:
        return self.numerator / self.denominator


@dataclass(frozen=True, eq=False)
class EmbeddedVector:
    params: RingParams
    coords: np.ndarray

    def symmetry_defect(self) -> float:
        """Max deviation from conjugate symmetry (coordinate at the flipped
        multi-index vs the conjugate)."""
        flip = np.asarray(conjugate_flip(self.params))
        return float(np.max(np.abs(self.coords[flip] - np.conj(self.coords))))

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coords))))
        return self.symmetry_defect() <= tol * scale


def _apply_complex_axis(T: np.ndarray, M: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(T, axis, 0)
    flat = moved.reshape(moved.shape[0], -1)
    res = (M @ flat).reshape((M.shape[0],) + moved.shape[1:])
    return np.moveaxis(res, 0, axis)


def _tensor(vec: np.ndarray, params: RingParams) -> np.ndarray:
    return np.asarray(vec).reshape(params.degrees_n, order="F")


def _flatten(T: np.ndarray) -> np.ndarray:
    return T.reshape(-1, order="F")


def sigma(params: RingParams, coeffs) -> EmbeddedVector:
    """Evaluate a (rational/real) coefficient vector at all primitive root tuples."""
    T = _tensor(np.asarray(coeffs, dtype=float), params).astype(complex)
    for axis, m in enumerate(params.moduli_m):
        T = _apply_complex_axis(T, _dim_vandermonde(m), axis)
    return EmbeddedVector(params, _flatten(T))


def sigma_inverse(params: RingParams, vec, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Per-dimension inverse Vandermonde solves; returns the real coefficient
    vector.  Raises if the input is not conjugate-symmetric within tolerance."""
    ev = vec if isinstance(vec, EmbeddedVector) else EmbeddedVector(params, np.asarray(vec, dtype=complex))
    if not ev.is_symmetric(tol):
        raise ValueError(
            f"input violates conjugate symmetry (defect {ev.symmetry_defect():.3e})"
        )
    T = _tensor(ev.coords, params)
    for axis, m in enumerate(params.moduli_m):
        T = _apply_complex_axis(T, _dim_vandermonde_inv(m), axis)
    flat = _flatten(T)
    return np.real(flat)


def lp_norm(params: RingParams, coeffs, p: float = 2) -> float:
    """l_p norm of the embedded vector, p in [1, inf]."""
    if not (p >= 1):
        raise ValueError(f"p must be in [1, inf], got {p}")
    v = np.abs(sigma(params, coeffs).coords)
    if math.isinf(p):
        return float(np.max(v))
    return float(np.sum(v**p) ** (1 / p))


def trace(params: RingParams, coeffs) -> float:
    """Sum of the embedding coordinates (real up to roundoff)."""
    return float(np.real(np.sum(sigma(params, coeffs).coords)))


def norm_field(params: RingParams, coeffs) -> float:
    """Product of the embedding coordinates (the field norm)."""
    return float(np.real(np.prod(sigma(params, coeffs).coords)))


# --- the real orthonormal basis of H ----------------------------------------


def h_basis(params: RingParams) -> np.ndarray:
    """Columns = the n orthonormal basis vectors of H, tensored per dimension."""
    out = np.array([[1.0 + 0j]])
    # Kronecker product honouring first-dimension-fastest flattening
    for m in params.moduli_m:
        out = np.kron(_dim_h_basis(m), out)
    return out


def h_coords(params: RingParams, vec) -> np.ndarray:
    """Coordinates of an H vector in the h basis (real for symmetric inputs)."""
    T = _tensor(np.asarray(vec, dtype=complex), params)
    for axis, m in enumerate(params.moduli_m):
        T = _apply_complex_axis(T, _dim_h_basis(m).conj().T, axis)
    return np.real(_flatten(T))


def h_combine(params: RingParams, coords) -> np.ndarray:
    """Inverse of h_coords: real h coordinates -> vector in H (complex coords)."""
    T = _tensor(np.asarray(coords, dtype=float).astype(complex), params)
    for axis, m in enumerate(params.moduli_m):
        T = _apply_complex_axis(T, _dim_h_basis(m), axis)
    return _flatten(T)


# --- exact discriminant and dense oracles ------------------------------------


@lru_cache(maxsize=None)
def _disc_cyclotomic(m: int) -> int:
    """|disc Q(zeta_m)| = m^phi(m) / prod_{p | m} p^(phi(m)/(p-1))."""
    phi = len(g_units(m))
    num = m**phi
    mm = m
    p = 2
    while p * p <= mm:
        if mm % p == 0:
            num //= p ** (phi // (p - 1))
            while mm % p == 0:
                mm //= p
        p += 1 + (p & 1)
    if mm > 1:
        num //= mm ** (phi // (mm - 1))
    return num


def discriminant(params: RingParams) -> int:
    """|disc| of the tensor ring: square of the fundamental volume of sigma(R)."""
    n = params.total_degree_n
    out = 1
    for m, n_i in zip(params.moduli_m, params.degrees_n):
        out *= _disc_cyclotomic(m) ** (n // n_i)
    return out


def embedding_matrix(params: RingParams) -> np.ndarray:
    """Rows = sigma of the tensor power-basis monomials (dense, n <= 16)."""
    n = params.total_degree_n
    if n > 16:
        raise ValueError("dense embedding matrix is an n <= 16 oracle")
    rows = []
    for e in range(n):
        coeffs = np.zeros(n)
        coeffs[e] = 1.0
        rows.append(sigma(params, coeffs).coords)
    return np.array(rows)


def embedding_det_check(params: RingParams) -> tuple[float, float]:
    """(dense |det|, per-dimension product-power |det|) of the embedding matrix."""
    dense = abs(np.linalg.det(embedding_matrix(params).T))
    n = params.total_degree_n
    prod = 1.0
    for m, n_i in zip(params.moduli_m, params.degrees_n):
        d = abs(np.linalg.det(_dim_vandermonde(m)))
        prod *= d ** (n / n_i)
    return float(dense), float(prod)


@dataclass(frozen=True)
class DualCheckReport:
    params: RingParams
    unimodular_ok: bool
    max_integrality_defect: float
    det_defect: float
    trace_integrality_defect: float

    @property
    def passed(self) -> bool:
        return self.unimodular_ok and self.trace_integrality_defect < 1e-6


def dual_lattice_check(
    params: RingParams, tol: float = 1e-6, rng: np.random.Generator | None = None
) -> DualCheckReport:
    """Check sigma((1/prod n_i) R) == conjugate of the dual lattice of sigma(R).

    Basis-level comparison: the change-of-basis between the scaled embedded
    basis and the conjugated classical dual basis must be integral with
    |det| = 1.  Also spot-checks Tr(x*y) in Z for x in R, y in (1/prod n_i) R.
    """
    if not params.is_power_of_two():
        raise ValueError("dual check supports power-of-two conductors only")
    n = params.total_degree_n
    if n > 16:
        raise ValueError("dual check is an n <= 16 oracle")
    t = DualScale.for_params(params).value
    B = embedding_matrix(params)  # rows = sigma(monomials)
    # rows of Y span the classical dual: <y_i, b_j>_herm = delta_ij
    Y = np.linalg.inv(B.conj().T)
    U = (t * B) @ np.linalg.inv(np.conj(Y))
    U_int = np.rint(np.real(U))
    defect = float(np.max(np.abs(U - U_int)))
    det = abs(np.linalg.det(U_int))
    unimodular = defect <= tol and abs(det - 1.0) <= 1e-6
    rng = rng or np.random.default_rng(0)
    worst = 0.0
    for _ in range(64):
        x = rng.integers(-5, 6, n).astype(float)
        y = rng.integers(-5, 6, n).astype(float) * t
        tr = np.real(np.sum(sigma(params, x).coords * sigma(params, y).coords))
        worst = max(worst, abs(tr - round(tr)))
    return DualCheckReport(params, unimodular, defect, abs(det - 1.0), worst)


# --- misc helpers --------------------------------------------------------------


def pure_tensor_coeffs(params: RingParams, factors) -> np.ndarray:
    """Coefficient vector of the outer product of per-dimension elements."""
    factors = [np.asarray(f) for f in factors]
    if len(factors) != params.l:
        raise ValueError(f"expected {params.l} factors")
    T = factors[0]
    for f in factors[1:]:
        T = np.multiply.outer(T, f)
    return _flatten(T)


def embedded_to_csv(vec: EmbeddedVector, path) -> None:
    """Write (j, re, im) rows, 1-based j in index_map order."""
    with open(path, "w") as fh:
        fh.write("j,re,im\n")
        for j, z in enumerate(vec.coords, start=1):
            fh.write(f"{j},{z.real!r},{z.imag!r}\n")
