"""Arithmetic in R_q = Z_q[x_1..x_l]/(Phi_m1(x_1), ..., Phi_ml(x_l)).

Elements carry one of two representations:

* ``coeff``: coordinates in the tensor power basis, flattened so the first
  dimension varies fastest (see params.index_map).
* ``slot``: values at the evaluation points (w_1^{k_1}, ..., w_l^{k_l}) with
  k_i running over Z_{m_i}^* in ascending order, flattened the same way.

The two are exchanged by an exact number-theoretic transform: a radix-2
negacyclic NTT along power-of-two dimensions, a dense Vandermonde solve along
general ones.  ``mul`` multiplies slot-wise; ``mul_schoolbook`` is the
independent O(n^2) convolution oracle kept for cross-checking.

Coefficient residues live in [0, q).  Arrays use int64 whenever every
intermediate provably fits, otherwise Python-int object arrays (q is capped at
62 bits by params).  This is a research artifact: nothing here is constant
time and no attempt is made to hide secrets from timing channels.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .params import RingParams, g_units, validate

__all__ = [
    "RingElement",
    "AutomorphismIndex",
    "ring_element",
    "from_slot_values",
    "zero",
    "one",
    "constant",
    "monomial",
    "random_element",
    "add",
    "sub",
    "neg",
    "mul",
    "mul_schoolbook",
    "to_slots",
    "from_slots",
    "apply_automorphism",
    "slot_permutation",
    "invert",
    "crt_basis",
    "cyclotomic_poly",
    "element_to_bytes",
    "element_from_bytes",
]

_INT64_MAX = 2**63 - 1


# --- cyclotomic polynomials over Z ------------------------------------------


def _poly_divide_exact(num: list[int], den: list[int]) -> list[int]:
    """Exact division of integer polynomials (ascending coefficients)."""
    num = list(num)
    dn, dd = len(num) - 1, len(den) - 1
    out = [0] * (dn - dd + 1)
    for k in range(dn - dd, -1, -1):
        c = num[dd + k]
        if c % den[dd] != 0:
            raise ArithmeticError("non-exact polynomial division")
        c //= den[dd]
        out[k] = c
        for j in range(dd + 1):
            num[k + j] -= c * den[j]
    if any(num):
        raise ArithmeticError("non-exact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Coefficients of Phi_m over Z, ascending degree, monic."""
    if m == 1:
        return (-1, 1)
    poly = [0] * (m + 1)
    poly[0], poly[m] = -1, 1  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            poly = _poly_divide_exact(poly, list(cyclotomic_poly(d)))
    return tuple(poly)


@lru_cache(maxsize=None)
def _power_table(m: int) -> np.ndarray:
    """Row t = integer coefficients of x^t mod Phi_m, for t in [0, m)."""
    phi = cyclotomic_poly(m)
    n = len(phi) - 1
    rows = np.zeros((m, n), dtype=object)
    cur = [0] * n
    cur[0] = 1
    for t in range(m):
        rows[t] = cur
        # multiply by x, reduce the overflowing x^n term via Phi
        top = cur[n - 1]
        cur = [0] + cur[:-1]
        if top:
            for j in range(n):
                cur[j] -= top * phi[j]
    return rows


# --- per-parameter transform context ----------------------------------------


def _bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        out[i] = int(format(i, f"0{bits}b")[::-1], 2) if bits else 0
    return out


_DENSE_CUTOFF = 128


def _mod_pow_vector(base: int, count: int, q: int, dtype) -> np.ndarray:
    out = np.zeros(count, dtype=object)
    acc = 1
    for e in range(count):
        out[e] = acc
        acc = acc * base % q
    return out.astype(dtype)


class _Dim:
    """Precomputed transform data for one tensor dimension.

    Three strategies, all producing slots in ascending-unit order:
    dense Vandermonde matmul (small or general conductors), a six-step
    decomposition of the cyclic NTT (large power-of-two, narrow modulus),
    and a radix-2 stage loop (large power-of-two, wide modulus)."""

    def __init__(self, m: int, n: int, w: int, q: int, dtype):
        self.m, self.n, self.w, self.q = m, n, w, q
        self.pow2 = m & (m - 1) == 0
        self.phi = cyclotomic_poly(m)
        self._v_inv = None
        if not self.pow2 or n <= _DENSE_CUTOFF:
            self.strategy = "dense"
            units = g_units(m)
            V = np.zeros((n, n), dtype=object)
            for t, k in enumerate(units):
                V[t] = _mod_pow_vector(pow(w, k, q), n, q, object)
            self.V = V.astype(dtype)
            if self.pow2:
                # analytic inverse: V^-1[e, t] = n^-1 * w^-(2t+1)e
                w_inv = pow(w, q - 2, q)
                n_inv = pow(n, q - 2, q)
                Vi = np.zeros((n, n), dtype=object)
                for t in range(n):
                    Vi[:, t] = _mod_pow_vector(pow(w_inv, 2 * t + 1, q), n, q, object)
                self._v_inv = (Vi * n_inv % q).astype(dtype)
            return
        # power-of-two, n >= 256: twisted cyclic NTT machinery
        psi = w  # order 2n; slot t is evaluation at psi^(2t+1)
        self.psi_pow = _mod_pow_vector(psi, n, q, dtype)
        self.psi_inv_pow = _mod_pow_vector(pow(psi, q - 2, q), n, q, dtype)
        self.n_inv = pow(n, q - 2, q)
        omega = pow(psi, 2, q)
        omega_inv = pow(omega, q - 2, q)
        n1 = 1 << ((n.bit_length() - 1 + 1) // 2)
        n2 = n // n1
        # the six-step matmuls run exactly in float64 (BLAS) iff every
        # accumulated dot product stays below 2^53
        if dtype != object and max(n1, n2) * (q - 1) ** 2 < 2**53:
            self.strategy = "sixstep"
            self.n1, self.n2 = n1, n2
            self.six = self._six_tables(omega, n1, n2, q, dtype)
            self.six_inv = self._six_tables(omega_inv, n1, n2, q, dtype)
        else:
            self.strategy = "radix2"
            self.bitrev = _bit_reverse_permutation(n)
            self.stage_tw = {}
            self.stage_tw_inv = {}
            size = 2
            while size <= n:
                half, step = size // 2, n // size
                self.stage_tw[size] = _mod_pow_vector(
                    pow(omega, step, q), half, q, dtype
                )
                self.stage_tw_inv[size] = _mod_pow_vector(
                    pow(omega_inv, step, q), half, q, dtype
                )
                size *= 2

    @staticmethod
    def _six_tables(omega: int, n1: int, n2: int, q: int, dtype):
        w1 = pow(omega, n2, q)  # order n1
        w2 = pow(omega, n1, q)  # order n2
        D1 = np.array(
            [[pow(w1, t * e, q) for e in range(n1)] for t in range(n1)],
            dtype=np.float64,
        )
        D2 = np.array(
            [[pow(w2, e * t, q) for t in range(n2)] for e in range(n2)],
            dtype=np.float64,
        )
        TW = np.array(
            [[pow(omega, t1 * e2, q) for e2 in range(n2)] for t1 in range(n1)],
            dtype=np.int64,
        )
        return D1, D2, TW

    @property
    def V_inv(self):
        if self._v_inv is None:
            self._v_inv = _mod_matrix_inverse(self.V, self.q).astype(self.V.dtype)
        return self._v_inv


@lru_cache(maxsize=None)
def _context(params: RingParams) -> "_RingContext":
    return _RingContext(params)


class _RingContext:
    def __init__(self, params: RingParams):
        report = validate(params)
        if not report.valid:
            raise ValueError(f"invalid ring parameters: {report}")
        q = params.q
        self.params = params
        self.q = q
        # int64 is safe for the NTT butterflies iff q^2 + q < 2^63
        self.dtype = np.int64 if (q - 1) ** 2 + q < _INT64_MAX else object
        self.dims = [
            _Dim(m, n, w, q, self.dtype)
            for m, n, w in zip(params.moduli_m, params.degrees_n, params.roots_w)
        ]
        self.shape = tuple(params.degrees_n)

    def coerce(self, vec) -> np.ndarray:
        arr = np.asarray(vec)
        if arr.dtype == object or self.dtype == object:
            arr = np.asarray(arr, dtype=object) % self.q
            return arr if self.dtype == object else arr.astype(self.dtype)
        if not np.issubdtype(arr.dtype, np.integer):
            raise TypeError(f"ring data must be integral, got {arr.dtype}")
        return arr.astype(np.int64) % self.q


def _mod_matrix_inverse(M: np.ndarray, q: int) -> np.ndarray:
    """Inverse of a matrix over Z_q by Gauss-Jordan elimination (exact)."""
    n = M.shape[0]
    A = [[int(x) % q for x in row] for row in M]
    I = [[int(i == j) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] % q != 0), None)
        if piv is None:
            raise ArithmeticError("matrix not invertible mod q")
        A[col], A[piv] = A[piv], A[col]
        I[col], I[piv] = I[piv], I[col]
        inv = pow(A[col][col], q - 2, q)
        A[col] = [x * inv % q for x in A[col]]
        I[col] = [x * inv % q for x in I[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [(x - f * y) % q for x, y in zip(A[r], A[col])]
                I[r] = [(x - f * y) % q for x, y in zip(I[r], I[col])]
    return np.array(I, dtype=object)


# --- axis helpers -------------------------------------------------------------


def _tensor(vec: np.ndarray, shape) -> np.ndarray:
    return vec.reshape(shape, order="F")


def _flatten(T: np.ndarray) -> np.ndarray:
    return T.reshape(-1, order="F")


def _matmul_mod(M: np.ndarray, B: np.ndarray, modulus: int) -> np.ndarray:
    """(M @ B) % modulus; exact for arbitrary magnitudes via object fallback."""
    rows, inner = M.shape
    bound = inner * (modulus - 1) * (modulus - 1)
    if (
        M.dtype != object
        and B.dtype != object
        and bound < _INT64_MAX
    ):
        return (M.astype(np.int64) @ B.astype(np.int64)) % modulus
    Mo = M.astype(object)
    Bo = B.astype(object) % modulus
    out = np.empty((rows,) + B.shape[1:], dtype=object)
    for r in range(rows):
        out[r] = (Mo[r].reshape((inner,) + (1,) * (B.ndim - 1)) * Bo).sum(axis=0) % modulus
    return out


def _apply_matrix_axis(T: np.ndarray, M: np.ndarray, axis: int, modulus: int) -> np.ndarray:
    moved = np.moveaxis(T, axis, 0)
    flat = moved.reshape(moved.shape[0], -1)
    res = _matmul_mod(M, flat, modulus)
    res = res.reshape((M.shape[0],) + moved.shape[1:])
    return np.moveaxis(res, 0, axis)


def _ntt_core(block: np.ndarray, dim: _Dim, q: int, inverse: bool) -> np.ndarray:
    """Cyclic size-n NTT along the last axis of an (M, n) block; the input is
    left untouched (the bit-reversal gather copies), output order is natural."""
    n = dim.n
    a = block[:, dim.bitrev]
    size = 2
    while size <= n:
        half = size // 2
        tw = (dim.stage_tw_inv if inverse else dim.stage_tw)[size]
        b = a.reshape(-1, n // size, size)
        lo = b[..., :half]
        hi = b[..., half:]
        t = hi * tw
        t %= q
        hi[...] = lo - t
        hi %= q
        lo += t
        lo %= q
        size *= 2
    return a


def _six_step(block: np.ndarray, tables, n1: int, n2: int, q: int) -> np.ndarray:
    """Cyclic DFT along the last axis of an (M, n1*n2) block, natural in/out.

    The matmuls run in float64 (exact by the < 2^53 accumulation guard)."""
    D1, D2, TW = tables
    m = block.shape[0]
    A = block.reshape(m, n1, n2).astype(np.float64)
    B = np.matmul(D1, A).astype(np.int64)
    B %= q
    B *= TW
    B %= q
    C = np.matmul(B.astype(np.float64), D2).astype(np.int64)
    C %= q
    return C.transpose(0, 2, 1).reshape(m, n1 * n2)  # flat index t1 + n1*t2


def _forward_axis(T: np.ndarray, dim: _Dim, axis: int, q: int) -> np.ndarray:
    if dim.strategy == "dense":
        return _apply_matrix_axis(T, dim.V, axis, q)
    moved = np.moveaxis(T, axis, -1)
    shape = moved.shape
    block = np.ascontiguousarray(moved).reshape(-1, dim.n)
    block = block * dim.psi_pow % q
    if dim.strategy == "sixstep":
        block = _six_step(block, dim.six, dim.n1, dim.n2, q)
    else:
        block = _ntt_core(block, dim, q, inverse=False)
    return np.moveaxis(block.reshape(shape), -1, axis)


def _inverse_axis(T: np.ndarray, dim: _Dim, axis: int, q: int) -> np.ndarray:
    if dim.strategy == "dense":
        return _apply_matrix_axis(T, dim.V_inv, axis, q)
    moved = np.moveaxis(T, axis, -1)
    shape = moved.shape
    block = np.ascontiguousarray(moved).reshape(-1, dim.n)
    if dim.strategy == "sixstep":
        block = _six_step(block, dim.six_inv, dim.n1, dim.n2, q)
    else:
        block = _ntt_core(block, dim, q, inverse=True)
    block = block * dim.n_inv % q
    block = block * dim.psi_inv_pow % q
    return np.moveaxis(block.reshape(shape), -1, axis)


# --- the element type ---------------------------------------------------------

COEFF = "coeff"
SLOT = "slot"


@dataclass(frozen=True, eq=False)
class RingElement:
    """An element of R_q in coefficient or slot representation.

    Immutable: the data array is frozen at construction.  All entries are
    canonical residues in [0, q).
    """

    params: RingParams
    rep: str
    data: np.ndarray

    def __post_init__(self):
        ctx = _context(self.params)
        arr = ctx.coerce(self.data)
        if arr.shape != (self.params.total_degree_n,):
            raise ValueError(
                f"expected {self.params.total_degree_n} entries, got {arr.shape}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        if self.rep not in (COEFF, SLOT):
            raise ValueError(f"unknown representation {self.rep!r}")

    # arithmetic ---------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        if isinstance(other, int):
            return scalar_mul(self, other)
        return mul(self, other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        if self.params != other.params:
            return False
        a, b = self, other
        if a.rep != b.rep:
            b = to_slots(b) if a.rep == SLOT else from_slots(b)
        return bool(np.array_equal(a.data, b.data))

    def to_slots(self) -> "RingElement":
        return to_slots(self)

    def from_slots(self) -> "RingElement":
        return from_slots(self)

    def coeffs(self) -> np.ndarray:
        return (self if self.rep == COEFF else from_slots(self)).data

    def slots(self) -> np.ndarray:
        return (self if self.rep == SLOT else to_slots(self)).data

    def __repr__(self):
        return f"RingElement({self.params}, {self.rep}, {list(self.data)})"


@dataclass(frozen=True)
class AutomorphismIndex:
    """A unit tuple (k_1..k_l), k_i in Z_{m_i}^*, naming x_i -> x_i^{k_i}."""

    k: tuple[int, ...]

    @classmethod
    def create(cls, params: RingParams, k) -> "AutomorphismIndex":
        k = tuple(int(v) % m for v, m in zip(k, params.moduli_m))
        if len(k) != params.l:
            raise ValueError(f"expected {params.l} entries")
        for v, m in zip(k, params.moduli_m):
            if np.gcd(v, m) != 1:
                raise ValueError(f"{v} is not a unit mod {m}")
        return cls(k)

    def inverse(self, params: RingParams) -> "AutomorphismIndex":
        return AutomorphismIndex(
            tuple(pow(v, -1, m) for v, m in zip(self.k, params.moduli_m))
        )


# --- constructors --------------------------------------------------------------


def ring_element(params: RingParams, coeffs) -> RingElement:
    return RingElement(params, COEFF, np.asarray(coeffs))


def from_slot_values(params: RingParams, values) -> RingElement:
    return RingElement(params, SLOT, np.asarray(values))


def zero(params: RingParams, rep: str = COEFF) -> RingElement:
    return RingElement(params, rep, np.zeros(params.total_degree_n, dtype=np.int64))


def one(params: RingParams) -> RingElement:
    return constant(params, 1)


def constant(params: RingParams, c: int) -> RingElement:
    vec = np.zeros(params.total_degree_n, dtype=object)
    vec[0] = c
    return RingElement(params, COEFF, vec)


def monomial(params: RingParams, exponents, c: int = 1) -> RingElement:
    """c * prod_i x_i^{e_i} with 0 <= e_i < n_i."""
    exponents = tuple(int(e) for e in exponents)
    flat = 0
    for e, n_i, stride in zip(exponents, params.degrees_n, params.strides):
        if not 0 <= e < n_i:
            raise ValueError(f"exponent {e} out of range [0, {n_i})")
        flat += e * stride
    vec = np.zeros(params.total_degree_n, dtype=object)
    vec[flat] = c
    return RingElement(params, COEFF, vec)


def random_element(params: RingParams, rng: np.random.Generator) -> RingElement:
    return RingElement(
        params, COEFF, rng.integers(0, params.q, params.total_degree_n, dtype=np.int64)
    )


# --- ring operations ------------------------------------------------------------


def _check_pair(a: RingElement, b: RingElement, same_rep: bool):
    if a.params != b.params:
        raise ValueError("parameter mismatch")
    if same_rep and a.rep != b.rep:
        raise ValueError(f"representation mismatch: {a.rep} vs {b.rep}")


def add(a: RingElement, b: RingElement) -> RingElement:
    _check_pair(a, b, same_rep=True)
    return RingElement(a.params, a.rep, (a.data + b.data) % a.params.q)


def sub(a: RingElement, b: RingElement) -> RingElement:
    _check_pair(a, b, same_rep=True)
    return RingElement(a.params, a.rep, (a.data - b.data) % a.params.q)


def neg(a: RingElement) -> RingElement:
    return RingElement(a.params, a.rep, (-a.data) % a.params.q)


def scalar_mul(a: RingElement, c: int) -> RingElement:
    return RingElement(a.params, a.rep, a.data * (c % a.params.q) % a.params.q)


def to_slots(a: RingElement) -> RingElement:
    if a.rep == SLOT:
        return a
    return RingElement(a.params, SLOT, slots_of_vector(a.params, a.data))


def from_slots(a: RingElement) -> RingElement:
    if a.rep == COEFF:
        return a
    return RingElement(a.params, COEFF, vector_from_slots(a.params, a.data))


def slots_of_vector(params: RingParams, vec: np.ndarray) -> np.ndarray:
    """Evaluation transform on a plain residue vector (index_map layout)."""
    ctx = _context(params)
    T = _tensor(ctx.coerce(vec), ctx.shape)
    for axis, dim in enumerate(ctx.dims):
        T = _forward_axis(T, dim, axis, ctx.q)
    return _flatten(T)


def vector_from_slots(params: RingParams, vec: np.ndarray) -> np.ndarray:
    ctx = _context(params)
    T = _tensor(ctx.coerce(vec), ctx.shape)
    for axis, dim in enumerate(ctx.dims):
        T = _inverse_axis(T, dim, axis, ctx.q)
    return _flatten(T)


def _batch_transform(params: RingParams, mat: np.ndarray, inverse: bool) -> np.ndarray:
    """Apply the slot transform to every row of a (count, n) residue matrix."""
    ctx = _context(params)
    mat = ctx.coerce(np.asarray(mat))
    count = mat.shape[0]
    T = mat.T.reshape(ctx.shape + (count,), order="F")
    for axis, dim in enumerate(ctx.dims):
        T = (_inverse_axis if inverse else _forward_axis)(T, dim, axis, ctx.q)
    return T.reshape((params.total_degree_n, count), order="F").T


def slots_of_batch(params: RingParams, mat: np.ndarray) -> np.ndarray:
    return _batch_transform(params, mat, inverse=False)


def batch_from_slots(params: RingParams, mat: np.ndarray) -> np.ndarray:
    return _batch_transform(params, mat, inverse=True)


def mul(a: RingElement, b: RingElement) -> RingElement:
    """Product in R_q via slot-wise multiplication."""
    _check_pair(a, b, same_rep=False)
    q = a.params.q
    prod = to_slots(a).data * to_slots(b).data % q
    out = RingElement(a.params, SLOT, prod)
    if a.rep == COEFF and b.rep == COEFF:
        return from_slots(out)
    return out


# --- schoolbook oracle ------------------------------------------------------------


def _full_convolve(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Exact full l-dimensional integer convolution by naive shift-and-add."""
    out_shape = tuple(sa + sb - 1 for sa, sb in zip(A.shape, B.shape))
    use_i64 = False
    if A.dtype != object and B.dtype != object:
        amax = max(1, int(np.max(np.abs(A))))
        bmax = max(1, int(np.max(np.abs(B))))
        use_i64 = min(A.size, B.size) * amax * bmax < _INT64_MAX
    out = np.zeros(out_shape, dtype=np.int64 if use_i64 else object)
    Bc = B.astype(np.int64) if use_i64 else B.astype(object)
    for idx in np.ndindex(A.shape):
        v = int(A[idx])
        if v:
            sl = tuple(slice(i, i + s) for i, s in zip(idx, B.shape))
            out[sl] += v * Bc
    return out


def _reduce_axis_mod_phi(T: np.ndarray, dim: _Dim, axis: int) -> np.ndarray:
    """Divide out Phi_m along one axis (exact integer synthetic division)."""
    n = dim.n
    moved = np.moveaxis(T, axis, 0)
    if moved.shape[0] <= n:
        pad = n - moved.shape[0]
        if pad:
            moved = np.concatenate(
                [moved, np.zeros((pad,) + moved.shape[1:], dtype=moved.dtype)], axis=0
            )
        return np.moveaxis(moved, 0, axis)
    if dim.pow2:
        # x^n = -1: fold the high block down with a sign flip
        out = moved[:n].copy()
        hi = moved[n:]
        out[: hi.shape[0]] = out[: hi.shape[0]] - hi
        return np.moveaxis(out, 0, axis)
    moved = moved.astype(object).copy()
    phi = dim.phi
    for deg in range(moved.shape[0] - 1, n - 1, -1):
        c = moved[deg]
        if isinstance(c, np.ndarray):
            c = c.copy()  # moved[deg] is about to be zeroed
        moved[deg] = 0
        for j in range(n):
            if phi[j]:
                moved[deg - n + j] = moved[deg - n + j] - phi[j] * c
    return np.moveaxis(moved[:n], 0, axis)


def multiply_integer_coeffs(params: RingParams, a_coeffs, b_coeffs) -> np.ndarray:
    """Exact product of two integer coefficient vectors in R (no modulus)."""
    shape = tuple(params.degrees_n)
    ctx = _context(params)
    A = _tensor(np.asarray(a_coeffs, dtype=object), shape)
    B = _tensor(np.asarray(b_coeffs, dtype=object), shape)
    T = _full_convolve(A, B)
    for axis, dim in enumerate(ctx.dims):
        T = _reduce_axis_mod_phi(T, dim, axis)
    return _flatten(T)


def mul_schoolbook(a: RingElement, b: RingElement) -> RingElement:
    """Naive convolution with explicit reduction by each Phi_m; test oracle."""
    _check_pair(a, b, same_rep=False)
    ctx = _context(a.params)
    shape = ctx.shape
    A = _tensor(a.coeffs(), shape)
    B = _tensor(b.coeffs(), shape)
    T = _full_convolve(A, B)
    for axis, dim in enumerate(ctx.dims):
        T = _reduce_axis_mod_phi(T, dim, axis)
    return RingElement(a.params, COEFF, _flatten(T) % a.params.q)


# --- automorphisms -----------------------------------------------------------------


def automorphism_dim_matrix(m: int, k: int) -> np.ndarray:
    """Integer matrix of x -> x^k on Z[x]/Phi_m in the power basis (columns =
    images of monomials).  Entries are plain integers, usable mod any modulus."""
    table = _power_table(m)
    n = table.shape[1]
    M = np.zeros((n, n), dtype=object)
    for e in range(n):
        M[:, e] = table[(e * k) % m]
    return M


def apply_automorphism_vector(
    params: RingParams, k: AutomorphismIndex, vec: np.ndarray, modulus: int
) -> np.ndarray:
    """Apply x_i -> x_i^{k_i} to a coefficient vector mod the given modulus.

    Works for R_q vectors (modulus=q) and for fixed-point torus numerators
    (modulus = q * 2^f): the substitution matrices are integral because the
    automorphisms preserve the ring and its scaled dual."""
    T = _tensor(np.asarray(vec, dtype=object) % modulus, tuple(params.degrees_n))
    for axis, (m, k_i) in enumerate(zip(params.moduli_m, k.k)):
        M = automorphism_dim_matrix(m, k_i)
        T = _apply_matrix_axis(T, M, axis, modulus)
    return _flatten(T)


def apply_automorphism(a: RingElement, k: AutomorphismIndex) -> RingElement:
    """x_i -> x_i^{k_i}.  Coefficient inputs use substitution, slot inputs use
    the predicted slot permutation; the two paths agree."""
    k = AutomorphismIndex.create(a.params, k.k)
    if a.rep == COEFF:
        out = apply_automorphism_vector(a.params, k, a.data, a.params.q)
        return RingElement(a.params, COEFF, out)
    perm = slot_permutation(a.params, k)
    return RingElement(a.params, SLOT, a.data[perm])


def slot_permutation(params: RingParams, k: AutomorphismIndex) -> np.ndarray:
    """Permutation pi with new_slots = old_slots[pi]: the automorphism moves the
    value at evaluation point j*k to point j, i.e. pi[pos(j)] = pos(j*k)."""
    from .params import slot_position, slot_units

    n = params.total_degree_n
    perm = np.zeros(n, dtype=np.int64)
    for j in range(n):
        units = slot_units(params, j)
        src = tuple(u * ki % m for u, ki, m in zip(units, k.k, params.moduli_m))
        perm[j] = slot_position(params, src)
    return perm


# --- inversion and CRT basis ----------------------------------------------------------


def invert(a: RingElement) -> RingElement | None:
    """Multiplicative inverse, or None when some slot vanishes (zero divisor)."""
    q = a.params.q
    s = to_slots(a).data
    if np.any(s == 0):
        return None
    inv = np.array([pow(int(v), q - 2, q) for v in s], dtype=object)
    out = RingElement(a.params, SLOT, inv)
    return from_slots(out) if a.rep == COEFF else out


def crt_basis(params: RingParams) -> list[RingElement]:
    """Idempotents c_j with slot vector = j-th unit vector; sum w_j c_j inverts
    the evaluation isomorphism."""
    n = params.total_degree_n
    out = []
    for j in range(n):
        e = np.zeros(n, dtype=np.int64)
        e[j] = 1
        out.append(from_slots(RingElement(params, SLOT, e)))
    return out


# --- serialization -----------------------------------------------------------------


def element_to_bytes(a: RingElement) -> bytes:
    """n little-endian 8-byte unsigned residues, coefficient order = index_map order."""
    return np.asarray(a.coeffs(), dtype="<u8").tobytes()


def element_from_bytes(params: RingParams, blob: bytes) -> RingElement:
    vec = np.frombuffer(blob, dtype="<u8").astype(object)
    return RingElement(params, COEFF, vec)
