"""Sample distributions for the multivariate ring-LWE problem.

A continuous sample is a pair (a, b): a is uniform in R_q and b lives on the
torus K_R / R^dual.  Torus elements are stored as fixed-point numerators in
dual-basis coordinates: the integer vector b_num represents the coset
b_num / (q * 2^f) mod 1 per coordinate, with f fraction bits (default 24).
With that scaling the signal part (a*s)/q is exactly representable, b_num/2^f
is the canonical lift to K_R / (q R^dual), and the discretization
transformation is exact integer arithmetic.

Secrets and discrete b components are elements of R^dual_q and are stored as
mod-q residue vectors in the same dual-basis coordinates (power-of-two
conductors only, where R^dual is the ring scaled by 1/prod n_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ring
from .gaussian import GaussianSpec, sample_continuous_batch
from .params import RingParams

__all__ = [
    "F_DEFAULT",
    "RlweSample",
    "DiscreteRlweSample",
    "SecretKey",
    "HybridLevel",
    "random_secret",
    "sample_rlwe",
    "sample_rlwe_batch",
    "sample_uniform_pair",
    "sample_uniform_batch",
    "sample_hybrid",
    "sample_hybrid_batch",
    "to_discrete",
    "to_normal_form",
    "NormalFormResult",
    "StreamExhausted",
    "scaled_residuals",
    "integer_slot_residuals",
]

F_DEFAULT = 24


def _check_power_of_two(params: RingParams):
    if not params.is_power_of_two():
        raise ValueError("torus arithmetic needs power-of-two conductors")


def _torus_dtype(params: RingParams, f: int):
    return np.int64 if (params.q << f) < 2**62 else object


@dataclass(frozen=True, eq=False)
class RlweSample:
    """(a, b) with b a fixed-point torus numerator mod q*2^f."""

    a: ring.RingElement
    b: np.ndarray
    f: int = F_DEFAULT

    def __post_init__(self):
        params = self.a.params
        mod = params.q << self.f
        arr = np.asarray(self.b, dtype=object) % mod
        arr = arr.astype(_torus_dtype(params, self.f))
        arr.flags.writeable = False
        object.__setattr__(self, "b", arr)

    @property
    def params(self) -> RingParams:
        return self.a.params


@dataclass(frozen=True, eq=False)
class DiscreteRlweSample:
    """(a, b) in R_q x R^dual_q; b is a mod-q residue vector in dual units."""

    a: ring.RingElement
    b: ring.RingElement


@dataclass(frozen=True, eq=False)
class SecretKey:
    """s in R^dual_q, stored as a mod-q ring element in dual-basis units."""

    s: ring.RingElement


@dataclass(frozen=True)
class HybridLevel:
    j: int

    def validate(self, params: RingParams) -> "HybridLevel":
        if not 0 <= self.j <= params.total_degree_n:
            raise ValueError(f"level must lie in [0, {params.total_degree_n}]")
        return self


def random_secret(params: RingParams, rng: np.random.Generator) -> SecretKey:
    return SecretKey(ring.random_element(params, rng))


def _error_numerators(
    psi: GaussianSpec | None,
    params: RingParams,
    rng: np.random.Generator,
    count: int,
    f: int,
) -> np.ndarray:
    """round(e * N * q * 2^f): the fixed-point dual-unit error contributions."""
    if psi is None:
        return np.zeros((count, params.total_degree_n), dtype=np.int64)
    scale = math.prod(params.degrees_n) * params.q * (1 << f)
    e = sample_continuous_batch(psi, rng, count)
    return np.rint(e * scale).astype(np.int64)


def sample_rlwe_batch(
    s: SecretKey,
    psi: GaussianSpec | None,
    params: RingParams,
    rng: np.random.Generator,
    count: int,
    f: int = F_DEFAULT,
) -> list[RlweSample]:
    """count independent samples: a uniform, b = (a*s)/q + e mod 1.

    psi=None injects zero error (the degenerate test hook)."""
    _check_power_of_two(params)
    n = params.total_degree_n
    a_batch = rng.integers(0, params.q, (count, n), dtype=np.int64)
    prod_slots = ring.slots_of_batch(params, a_batch) * s.s.slots() % params.q
    prod = ring.batch_from_slots(params, prod_slots)
    b = prod.astype(object) * (1 << f) + _error_numerators(psi, params, rng, count, f)
    mod = params.q << f
    out = []
    for i in range(count):
        out.append(
            RlweSample(ring.RingElement(params, ring.COEFF, a_batch[i]), b[i] % mod, f)
        )
    return out


def sample_rlwe(
    s: SecretKey,
    psi: GaussianSpec | None,
    params: RingParams,
    rng: np.random.Generator,
    f: int = F_DEFAULT,
) -> RlweSample:
    return sample_rlwe_batch(s, psi, params, rng, 1, f)[0]


def sample_uniform_batch(
    params: RingParams, rng: np.random.Generator, count: int, f: int = F_DEFAULT
) -> list[RlweSample]:
    """Uniform over R_q x T at fixed-point precision f."""
    _check_power_of_two(params)
    n = params.total_degree_n
    a_batch = rng.integers(0, params.q, (count, n), dtype=np.int64)
    mod = params.q << f
    if mod < 2**62:
        b_batch = rng.integers(0, mod, (count, n), dtype=np.int64)
    else:
        hi = rng.integers(0, params.q, (count, n), dtype=np.int64).astype(object)
        lo = rng.integers(0, 1 << f, (count, n), dtype=np.int64)
        b_batch = (hi << f) + lo
    return [
        RlweSample(ring.RingElement(params, ring.COEFF, a_batch[i]), b_batch[i], f)
        for i in range(count)
    ]


def sample_uniform_pair(
    params: RingParams, rng: np.random.Generator, f: int = F_DEFAULT
) -> RlweSample:
    return sample_uniform_batch(params, rng, 1, f)[0]


def _hybrid_offsets(
    params: RingParams, rng: np.random.Generator, count: int, j: int, f: int
) -> np.ndarray:
    """Numerators of h/q where h has slots 1..j uniform and the rest zero."""
    n = params.total_degree_n
    h_slots = np.zeros((count, n), dtype=np.int64)
    if j > 0:
        h_slots[:, :j] = rng.integers(0, params.q, (count, j), dtype=np.int64)
    h = ring.batch_from_slots(params, h_slots)
    return h.astype(object) * (1 << f)


def sample_hybrid_batch(
    s: SecretKey,
    psi: GaussianSpec | None,
    level: HybridLevel | int,
    params: RingParams,
    rng: np.random.Generator,
    count: int,
    f: int = F_DEFAULT,
) -> list[RlweSample]:
    """Randomize the first j slots of the b component of fresh samples."""
    j = (level.j if isinstance(level, HybridLevel) else int(level))
    HybridLevel(j).validate(params)
    base = sample_rlwe_batch(s, psi, params, rng, count, f)
    if j == 0:
        return base
    offs = _hybrid_offsets(params, rng, count, j, f)
    mod = params.q << f
    return [
        RlweSample(smp.a, (smp.b.astype(object) + off) % mod, f)
        for smp, off in zip(base, offs)
    ]


def sample_hybrid(
    s: SecretKey,
    psi: GaussianSpec | None,
    level: HybridLevel | int,
    params: RingParams,
    rng: np.random.Generator,
    f: int = F_DEFAULT,
) -> RlweSample:
    return sample_hybrid_batch(s, psi, level, params, rng, 1, f)[0]


# --- analysis helpers ---------------------------------------------------------


def scaled_residuals(samples, s: SecretKey) -> np.ndarray:
    """(count, n) real residuals (q*b - a*s) mod q, coordinate-wise in [0, q).

    For honest samples this is h + q*e mod q: integer offsets plus the scaled
    error."""
    params = samples[0].params
    f = samples[0].f
    mod = params.q << f
    a_batch = np.array([smp.a.coeffs() for smp in samples])
    prod_slots = ring.slots_of_batch(params, a_batch) * s.s.slots() % params.q
    prod = ring.batch_from_slots(params, prod_slots)
    b_batch = np.array([smp.b for smp in samples], dtype=object)
    num = (b_batch - prod.astype(object) * (1 << f)) % mod
    return np.asarray(num, dtype=float) / float(1 << f)


def integer_slot_residuals(samples, s: SecretKey):
    """Split residuals into integer slot values and fractional parts.

    Returns (slots, frac): slots is the (count, n) slot transform of the
    rounded residual (exactly the hybrid offsets when the scaled error stays
    below 1/2), frac the per-coefficient remainders in [-1/2, 1/2)."""
    params = samples[0].params
    rho = scaled_residuals(samples, s)
    rounded = np.rint(rho).astype(np.int64) % params.q
    frac = rho - np.rint(rho)
    return ring.slots_of_batch(params, rounded), frac


# --- discretization -----------------------------------------------------------


def _round_ratio_half_even(num: np.ndarray, den: int) -> np.ndarray:
    """round(num / den) with ties to the even quotient; exact integers."""
    base = num // den
    rem = num - base * den
    twice = 2 * rem
    up = (twice > den) | ((twice == den) & (base % 2 == 1))
    return base + up.astype(base.dtype)


def to_discrete(sample: RlweSample, p: int, w, params: RingParams) -> DiscreteRlweSample:
    """Map a continuous pair to R_q x R^dual_q: a -> p*a, b -> round of p times
    the canonical mod-q lift of b into the coset w + p R^dual.

    Uniform input pairs map to uniform output pairs; honest pairs keep the
    relation b - a*s = round(p * e)_{w + p R^dual} (mod q R^dual) exactly.
    """
    if math.gcd(p, params.q) != 1:
        raise ValueError(f"p = {p} and q = {params.q} must be coprime")
    f = sample.f
    n = params.total_degree_n
    w = np.broadcast_to(np.asarray(w, dtype=object), (n,))
    a_out = ring.scalar_mul(sample.a, p)
    num = p * sample.b.astype(object) - w * (1 << f)
    quot = _round_ratio_half_even(num, p << f)
    b_out = (w + p * quot) % params.q
    return DiscreteRlweSample(a_out, ring.RingElement(params, ring.COEFF, b_out))


# --- normal form ----------------------------------------------------------------


class StreamExhausted(RuntimeError):
    """No invertible leading element was found within the retry cap."""


@dataclass(frozen=True)
class NormalFormResult:
    pivot: DiscreteRlweSample
    consumed: int
    transformed: list[DiscreteRlweSample]

    @property
    def retries(self) -> int:
        return self.consumed - 1


def to_normal_form(samples, params: RingParams) -> NormalFormResult:
    """Rewrite a discrete stream so the effective secret is the pivot's error.

    Consumes leading samples until one with invertible a is found (capped), and
    maps every later (a, b) to (a' = -a * a0^{-1}, b' = b + a' * b0); the new
    pairs satisfy b' = a' * e0 + e where e0 is the consumed sample's error.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least 2 samples")
    q, n = params.q, params.total_degree_n
    cap = 64 * math.ceil(1.0 / (1.0 - 1.0 / q) ** n)
    pivot = None
    consumed = 0
    for smp in samples[: min(cap, len(samples))]:
        consumed += 1
        inv = ring.invert(smp.a)
        if inv is not None:
            pivot = (smp, inv)
            break
    if pivot is None:
        raise StreamExhausted(
            f"no invertible leading element in {consumed} samples (cap {cap})"
        )
    (p0, a0_inv) = pivot
    out = []
    for smp in samples[consumed:]:
        a_new = ring.neg(ring.mul(smp.a, a0_inv))
        b_new = ring.add(smp.b, ring.mul(a_new, p0.b))
        out.append(DiscreteRlweSample(a_new, b_new))
    return NormalFormResult(p0, consumed, out)
