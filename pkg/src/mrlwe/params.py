"""Ring and security parameters for the tensor cyclotomic ring Z_q[x_1..x_l]/(Phi_m1,...,Phi_ml).

A parameter set is the tuple (m_1, ..., m_l, q).  Everything downstream needs q
to be a prime with q = 1 (mod m_i) for every conductor, so that each
x^{m_i} - 1 splits into distinct linear factors mod q and the quotient ring is
isomorphic to Z_q^n via its evaluation (slot) representation.

Index conventions, fixed once and used by every other module:

* The torsion units Z_{m_i}^* are enumerated in ascending order of residues;
  ``g_units(m)[t]`` is the unit attached to slot position t of dimension i.
* Multi-indices flatten with the FIRST dimension varying fastest:
  stride_i = n_1 * ... * n_{i-1} (with an empty product = 1).  ``index_map``
  and ``index_unmap`` expose the 1-based form of this bijection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "RingParams",
    "SecurityParams",
    "ValidationReport",
    "RateReport",
    "validate",
    "check_theorem_rates",
    "index_map",
    "index_unmap",
    "euler_phi",
    "is_prime",
    "find_prime",
    "format_params",
    "parse_params",
]

MAX_Q_BITS = 62  # products of residues must fit a 128-bit intermediate


def euler_phi(m: int) -> int:
    """Euler totient by trial-division factoring (m is desk-scale)."""
    if m < 1:
        raise ValueError(f"phi undefined for {m}")
    result, n, p = m, m, 2
    while p * p <= n:
        if n % p == 0:
            result -= result // p
            while n % p == 0:
                n //= p
        p += 1 + (p & 1)
    if n > 1:
        result -= result // n
    return result


_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for n < 2^64."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def find_prime(lower: int, multiple_of: int = 1) -> int:
    """Smallest prime p >= lower with p = 1 (mod multiple_of)."""
    p = lower + (1 - lower) % multiple_of
    while not is_prime(p):
        p += multiple_of
    return p


def _factor(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 + (p & 1)
    if n > 1:
        out.append(n)
    return out


def _smallest_generator(q: int) -> int:
    """Smallest generator of (Z/q)^* for prime q, by trial (deterministic)."""
    phi = q - 1
    prime_factors = _factor(phi)
    for g in range(2, q):
        if all(pow(g, phi // p, q) != 1 for p in prime_factors):
            return g
    raise ValueError(f"no generator modulo {q}")


def multiplicative_order(x: int, q: int) -> int:
    """Order of x in (Z/q)^*, by brute force over divisors of q-1."""
    if math.gcd(x, q) != 1:
        raise ValueError(f"{x} is not a unit mod {q}")
    order = 1
    acc = x % q
    while acc != 1:
        acc = acc * x % q
        order += 1
    return order


@lru_cache(maxsize=None)
def g_units(m: int) -> tuple[int, ...]:
    """Units of Z_m in ascending order; position t of a slot axis <-> g_units(m)[t]."""
    return tuple(k for k in range(1, m + 1) if math.gcd(k, m) == 1)


@dataclass(frozen=True)
class RingParams:
    """The tuple (m_1..m_l, q) plus derived degrees and per-dimension roots.

    ``roots_w`` is None when (m, q) does not admit the full CRT splitting;
    ``validate`` reports the reasons.  Instances are immutable and hashable,
    so derived transform tables can be cached per parameter set.
    """

    moduli_m: tuple[int, ...]
    q: int
    degrees_n: tuple[int, ...]
    total_degree_n: int
    roots_w: tuple[int, ...] | None

    @classmethod
    def create(cls, moduli_m, q: int) -> "RingParams":
        moduli_m = tuple(int(m) for m in moduli_m)
        if not moduli_m or any(m < 2 for m in moduli_m):
            raise ValueError("need a nonempty conductor list with every m_i >= 2")
        q = int(q)
        degrees = tuple(euler_phi(m) for m in moduli_m)
        total = math.prod(degrees)
        roots: tuple[int, ...] | None = None
        if (
            is_prime(q)
            and q.bit_length() <= MAX_Q_BITS
            and all(q % m == 1 for m in moduli_m)
        ):
            g = _smallest_generator(q)
            roots = tuple(pow(g, (q - 1) // m, q) for m in moduli_m)
        return cls(moduli_m, q, degrees, total, roots)

    @property
    def l(self) -> int:
        return len(self.moduli_m)

    @property
    def strides(self) -> tuple[int, ...]:
        out, acc = [], 1
        for n_i in self.degrees_n:
            out.append(acc)
            acc *= n_i
        return tuple(out)

    def is_power_of_two(self) -> bool:
        return all(m & (m - 1) == 0 for m in self.moduli_m)

    def __str__(self) -> str:
        return format_params(self)


@dataclass(frozen=True)
class SecurityParams:
    """Gaussian rate alpha, spherical rate xi and the sample budget l."""

    alpha: float
    xi: float
    sample_budget_l: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.xi < self.alpha:
            raise ValueError(f"xi must be >= alpha, got xi={self.xi} alpha={self.alpha}")
        if self.sample_budget_l < 1:
            raise ValueError("sample budget must be a positive integer")


def spherical_rate(alpha: float, n: int, samples_l: int) -> float:
    """xi = alpha * (n*l / log(n*l))^(1/4), the bounded-sample spherical rate."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    nl = n * samples_l
    if nl < 2:
        raise ValueError("need n*l >= 2")
    return alpha * (nl / math.log(nl)) ** 0.25


@dataclass(frozen=True)
class ValidationReport:
    params: RingParams
    failures: tuple[str, ...]

    @property
    def valid(self) -> bool:
        return not self.failures

    def __str__(self) -> str:
        head = f"{format_params(self.params)}: "
        if self.valid:
            return head + f"valid (n = {self.params.total_degree_n})"
        return head + "invalid\n" + "\n".join(f"  - {f}" for f in self.failures)


def validate(params: RingParams) -> ValidationReport:
    """Check primality, congruences and root orders; empty failure list iff
    the modulus splits completely in every dimension."""
    failures: list[str] = []
    q = params.q
    if not is_prime(q):
        failures.append(f"q = {q} is not prime")
    if q.bit_length() > MAX_Q_BITS:
        failures.append(f"q needs {q.bit_length()} bits, limit is {MAX_Q_BITS}")
    for m in params.moduli_m:
        if q % m != 1:
            failures.append(f"q = {q} is not congruent to 1 mod m_i = {m} ({q % m} mod {m})")
    if params.total_degree_n != math.prod(euler_phi(m) for m in params.moduli_m):
        failures.append("total degree does not match the product of the phi(m_i)")
    if not failures:
        if params.roots_w is None:
            failures.append("no per-dimension roots were derived")
        else:
            for m, w in zip(params.moduli_m, params.roots_w):
                if multiplicative_order(w, q) != m:
                    failures.append(f"root {w} does not have exact order {m} mod {q}")
    return ValidationReport(params, tuple(failures))


@dataclass(frozen=True)
class RateReport:
    alpha_below_rate: bool  # alpha < sqrt(log n / n)
    alpha_q_large_enough: bool  # alpha * q >= c * sqrt(log n)
    xi: float
    rate_bound: float
    alpha_q: float
    alpha_q_bound: float

    @property
    def ok(self) -> bool:
        return self.alpha_below_rate and self.alpha_q_large_enough


def check_theorem_rates(
    params: RingParams, sec: SecurityParams, c: float = 1.0
) -> RateReport:
    """Evaluate the main-theorem rate constraints for (params, sec).

    Logs are natural.  The omega(sqrt(log n)) growth condition is checked
    against the configurable constant c (default 1) at the given n.
    """
    n = params.total_degree_n
    rate_bound = math.sqrt(math.log(n) / n)
    aq_bound = c * math.sqrt(math.log(n))
    aq = sec.alpha * params.q
    xi = spherical_rate(sec.alpha, n, sec.sample_budget_l)
    return RateReport(
        alpha_below_rate=sec.alpha < rate_bound,
        alpha_q_large_enough=aq >= aq_bound,
        xi=xi,
        rate_bound=rate_bound,
        alpha_q=aq,
        alpha_q_bound=aq_bound,
    )


# --- multi-index <-> flat index -------------------------------------------


def index_map(params: RingParams, multi_index) -> int:
    """1-based multi-index (j_1..j_l), j_i in [1, n_i] -> flat j in [1, n]."""
    multi_index = tuple(int(j) for j in multi_index)
    if len(multi_index) != params.l:
        raise ValueError(f"expected {params.l} indices, got {len(multi_index)}")
    flat = 1
    for j_i, n_i, stride in zip(multi_index, params.degrees_n, params.strides):
        if not 1 <= j_i <= n_i:
            raise ValueError(f"index {j_i} out of range [1, {n_i}]")
        flat += (j_i - 1) * stride
    return flat


def index_unmap(params: RingParams, flat: int) -> tuple[int, ...]:
    """Inverse of ``index_map``."""
    if not 1 <= flat <= params.total_degree_n:
        raise ValueError(f"flat index {flat} out of range [1, {params.total_degree_n}]")
    rem = flat - 1
    out = []
    for n_i in params.degrees_n:
        out.append(rem % n_i + 1)
        rem //= n_i
    return tuple(out)


def slot_units(params: RingParams, flat0: int) -> tuple[int, ...]:
    """0-based flat slot position -> the tuple of units (k_1..k_l) it evaluates at."""
    rem = flat0
    out = []
    for m, n_i in zip(params.moduli_m, params.degrees_n):
        out.append(g_units(m)[rem % n_i])
        rem //= n_i
    return tuple(out)


def slot_position(params: RingParams, units) -> int:
    """Inverse of ``slot_units``: unit tuple -> 0-based flat slot position."""
    flat = 0
    for k, m, stride in zip(units, params.moduli_m, params.strides):
        flat += g_units(m).index(k % m) * stride
    return flat


def conjugate_flip(params: RingParams) -> tuple[int, ...]:
    """Permutation pairing each slot with its complex conjugate (k_i -> m_i - k_i
    in every dimension; dimensions with m_i <= 2 are fixed)."""
    n = params.total_degree_n
    out = []
    for j in range(n):
        units = slot_units(params, j)
        flipped = tuple((m - k) % m if m > 2 else k for k, m in zip(units, params.moduli_m))
        out.append(slot_position(params, flipped))
    return tuple(out)


# --- canonical text form ----------------------------------------------------


def format_params(params: RingParams) -> str:
    return "m=" + "x".join(str(m) for m in params.moduli_m) + f";q={params.q}"


def parse_params(text: str) -> RingParams:
    """Parse the canonical text form, e.g. ``m=4x4;q=13``."""
    try:
        m_part, q_part = text.strip().split(";")
        if not m_part.startswith("m=") or not q_part.startswith("q="):
            raise ValueError
        moduli = tuple(int(tok) for tok in m_part[2:].split("x"))
        q = int(q_part[2:])
    except ValueError as exc:
        raise ValueError(f"malformed parameter string {text!r}") from exc
    return RingParams.create(moduli, q)
