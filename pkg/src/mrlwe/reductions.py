"""Executable sample transformations behind the search-to-decision chain.

Each operation here rewrites sample streams the way the corresponding
reduction step does, with oracles as synchronous callbacks under explicit
sample budgets, so every distribution-level claim can be checked empirically
at toy parameters.  Slot (prime-ideal) indices are 1-based throughout, and
hybrid level j means "slots 1..j randomized".

The oracles used by the tests and the experiment driver are planted: they are
built from a known secret or a known structural feature, never from actual
cryptanalysis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ring, rlwe
from .gaussian import GaussianSpec, sample_gamma21, sample_widths_batch
from .params import RingParams, conjugate_flip, slot_units

__all__ = [
    "Oracle",
    "ReductionTranscript",
    "OracleTooWeak",
    "NoGapFound",
    "transport_to_ideal",
    "transport_index",
    "search_from_qi",
    "decision_from_search_step",
    "solve_qi_with_wdlwe",
    "worst_to_average_randomize",
    "sample_randomizer_widths",
    "spherical_randomize",
    "spherical_ratio_ok",
    "hybrid_walk",
    "planted_exact_qi_solver",
    "planted_wdlwe_distinguisher",
    "planted_slot_distinguisher",
    "random_coin_oracle",
]

QI_SOLVER = "qi-lwe-solver"
WDLWE = "wdlwe-distinguisher"
DLWE = "dlwe-distinguisher"


@dataclass(frozen=True)
class Oracle:
    """A synchronous callback consuming one bounded batch of samples."""

    kind: str
    fn: Callable
    sample_budget: int


class OracleTooWeak(RuntimeError):
    pass


class NoGapFound(RuntimeError):
    def __init__(self, message, profile):
        super().__init__(message)
        self.profile = profile


@dataclass
class ReductionTranscript:
    seed_hex: str = ""
    steps: list[dict] = field(default_factory=list)

    def record(self, **step):
        self.steps.append(step)

    def dump(self, path):
        with open(path, "w") as fh:
            if self.seed_hex:
                fh.write(json.dumps({"seed": self.seed_hex}) + "\n")
            for step in self.steps:
                fh.write(json.dumps(step, sort_keys=True) + "\n")


# --- ideal transport ----------------------------------------------------------


def transport_index(
    params: RingParams, target_i: int, source_j: int
) -> ring.AutomorphismIndex:
    """The unit tuple k with tau_k(q_source) = q_target (k = source * target^-1
    in every dimension)."""
    n = params.total_degree_n
    if not (1 <= target_i <= n and 1 <= source_j <= n):
        raise ValueError("slot indices are 1-based in [1, n]")
    src = slot_units(params, source_j - 1)
    tgt = slot_units(params, target_i - 1)
    k = tuple(
        s * pow(t, -1, m) % m for s, t, m in zip(src, tgt, params.moduli_m)
    )
    return ring.AutomorphismIndex.create(params, k)


def transport_to_ideal(
    sample: rlwe.RlweSample, target_i: int, source_j: int, params: RingParams
) -> rlwe.RlweSample:
    """Apply (tau_k(a), tau_k(b)) for the unit k moving ideal source_j onto
    target_i; a stream from the base distribution with secret s becomes one
    with secret tau_k(s) and the permuted width vector."""
    k = transport_index(params, target_i, source_j)
    a_new = ring.apply_automorphism(sample.a, k)
    mod = params.q << sample.f
    b_new = ring.apply_automorphism_vector(params, k, sample.b, mod)
    return rlwe.RlweSample(a_new, b_new, sample.f)


def search_from_qi(
    oracle: Oracle,
    draw: Callable[[int], list],
    params: RingParams,
    transcript: ReductionTranscript | None = None,
) -> rlwe.SecretKey:
    """Recover the full secret from an oracle that solves the problem relative
    to one fixed prime ideal.

    For every slot j the stream is transported onto the oracle's ideal, the
    oracle answers with the transported secret's residue there, and the answer
    is carried back through the inverse automorphism; the n residues are then
    recombined (slot values determine the element through the idempotent
    basis).  Exact whenever the oracle is exact.
    """
    if oracle.kind != QI_SOLVER:
        raise ValueError(f"need a {QI_SOLVER}, got {oracle.kind}")
    i = oracle.fn.slot_index
    n, q = params.total_degree_n, params.q
    acc = ring.zero(params)
    for j in range(1, n + 1):
        k = transport_index(params, i, j)
        batch = [transport_to_ideal(s, i, j, params) for s in draw(oracle.sample_budget)]
        try:
            t = int(oracle.fn(batch)) % q
        except Exception as exc:
            raise OracleTooWeak(f"oracle failed at slot {j}: {exc}") from exc
        lift = np.zeros(n, dtype=np.int64)
        lift[i - 1] = t
        carried = ring.apply_automorphism(
            ring.from_slot_values(params, lift), k.inverse(params)
        )
        acc = ring.add(acc, ring.from_slots(carried) if carried.rep == ring.SLOT else carried)
        if transcript is not None:
            transcript.record(step="transport", source=j, target=i, answer=t)
    return rlwe.SecretKey(acc)


def planted_exact_qi_solver(slot_index: int, params: RingParams) -> Oracle:
    """Exact q_i solver for (near-)noiseless streams: reads the secret residue
    off one sample with an invertible slot value.  Knows no secret; it solves
    the algebra directly, which is exact when the error is zero and correct
    w.h.p. while q * error stays below 1/2."""

    def fn(batch):
        q = params.q
        for smp in batch:
            u = np.rint(np.asarray(smp.b, dtype=float) / float(1 << smp.f)).astype(
                np.int64
            ) % q
            a_slot = int(smp.a.slots()[slot_index - 1])
            if a_slot == 0:
                continue
            b_slot = int(ring.slots_of_vector(params, u)[slot_index - 1])
            return b_slot * pow(a_slot, q - 2, q) % q
        raise OracleTooWeak("no sample with an invertible slot value in budget")

    fn.slot_index = slot_index
    return Oracle(QI_SOLVER, fn, sample_budget=8)


# --- search-to-decision --------------------------------------------------------


def decision_from_search_step(
    sample: rlwe.RlweSample,
    g: int,
    j: int,
    params: RingParams,
    rng: np.random.Generator,
    v_override: np.ndarray | None = None,
) -> rlwe.RlweSample:
    """(a, b) -> (a + v, b + (h + v*g)/q): v uniform on slot j and zero on the
    others, h uniform on slots < j and zero elsewhere, g a residue guess lifted
    to slot j.  A correct guess yields the level j-1 hybrid, any wrong guess
    the level j hybrid.  v_override is a test hook (slot-j value of v)."""
    n, q, f = params.total_degree_n, params.q, sample.f
    v_slots = np.zeros(n, dtype=np.int64)
    v_slots[j - 1] = int(rng.integers(0, q)) if v_override is None else int(v_override)
    h_slots = np.zeros(n, dtype=np.int64)
    if j > 1:
        h_slots[: j - 1] = rng.integers(0, q, j - 1)
    vg_slots = np.zeros(n, dtype=np.int64)
    vg_slots[j - 1] = v_slots[j - 1] * (int(g) % q) % q
    v = ring.from_slots(ring.from_slot_values(params, v_slots))
    offset = ring.vector_from_slots(params, (h_slots + vg_slots) % q)
    a_new = ring.add(sample.a, v)
    mod = q << f
    b_new = (sample.b.astype(object) + offset.astype(object) * (1 << f)) % mod
    return rlwe.RlweSample(a_new, b_new, f)


def solve_qi_with_wdlwe(
    oracle: Oracle,
    draw: Callable[[int], list],
    j: int,
    params: RingParams,
    rng: np.random.Generator,
    repetitions: int = 8,
    max_rounds: int = 3,
    transcript: ReductionTranscript | None = None,
) -> int:
    """Enumerate all q residue guesses; return the guess whose transformed
    stream the worst-case-decision oracle separates from the rest.

    Ascending enumeration, smallest separated guess wins; unresolved ties are
    rerun with doubled repetitions; an undistinguished profile raises
    OracleTooWeak.
    """
    if oracle.kind != WDLWE:
        raise ValueError(f"need a {WDLWE}, got {oracle.kind}")
    q = params.q
    reps = repetitions
    for round_ in range(max_rounds):
        hits = np.zeros(q)
        for g in range(q):
            for _ in range(reps):
                batch = [
                    decision_from_search_step(s, g, j, params, rng)
                    for s in draw(oracle.sample_budget)
                ]
                hits[g] += int(oracle.fn(batch)) == j - 1
        probs = hits / reps
        radius = math.sqrt(math.log(2 / 0.01) / (2 * reps))
        order = np.argsort(-probs, kind="stable")
        best, second = order[0], order[1]
        if transcript is not None:
            transcript.record(
                step="wdlwe-scan", round=round_, reps=reps, probs=probs.tolist()
            )
        if probs[best] - probs[second] > 2 * radius:
            return int(best)
        reps *= 2
    raise OracleTooWeak("no residue guess separated from the rest")


def planted_wdlwe_distinguisher(
    s: rlwe.SecretKey, j: int, params: RingParams, batch: int = 8
) -> Oracle:
    """Perfect worst-case-decision oracle for planted-secret test streams:
    inspects the integer slot residual at position j and answers j-1 exactly
    when it is degenerate (zero) across the whole batch."""

    def fn(samples):
        slots, _ = rlwe.integer_slot_residuals(samples, s)
        return j - 1 if not np.any(slots[:, j - 1]) else j

    return Oracle(WDLWE, fn, sample_budget=batch)


# --- worst-case to average-case ---------------------------------------------------


def sample_randomizer_widths(
    alpha: float, params: RingParams, rng: np.random.Generator
) -> np.ndarray:
    """Width completion rule for the randomizing transformation:
    r_j^2 = alpha^2 sqrt(n) x_j, one Gamma(2,1) draw per conjugate orbit."""
    n = params.total_degree_n
    flip = conjugate_flip(params)
    x = np.zeros(n)
    for idx in range(n):
        if idx <= flip[idx]:
            v = float(sample_gamma21(rng))
            x[idx] = v
            x[flip[idx]] = v
    return alpha * (n**0.25) * np.sqrt(x)


def worst_to_average_randomize(
    sample: rlwe.RlweSample,
    s_prime: rlwe.SecretKey | None,
    r_prime: np.ndarray | None,
    k: int,
    params: RingParams,
    rng: np.random.Generator,
) -> rlwe.RlweSample:
    """(a, b) -> (a, b + (a*s' + h)/q + e'): h uniform on slots <= k and zero
    elsewhere, e' an independent elliptical draw with widths r_prime.  Level j
    input with secret s and widths r becomes level max(k, j) with secret s+s'
    and widths sqrt(r^2 + r_prime^2)."""
    rlwe.HybridLevel(k).validate(params)
    n, q, f = params.total_degree_n, params.q, sample.f
    mod = q << f
    b = sample.b.astype(object)
    if s_prime is not None:
        prod = ring.mul(sample.a, s_prime.s).coeffs().astype(object)
        b = b + prod * (1 << f)
    if k > 0:
        h_slots = np.zeros(n, dtype=np.int64)
        h_slots[:k] = rng.integers(0, q, k)
        b = b + ring.vector_from_slots(params, h_slots).astype(object) * (1 << f)
    if r_prime is not None:
        widths = np.asarray(r_prime, dtype=float)
        e = sample_widths_batch(params, widths, rng, 1)[0]
        scale = math.prod(params.degrees_n) * q * (1 << f)
        b = b + np.rint(e * scale).astype(np.int64)
    return rlwe.RlweSample(sample.a, b % mod, f)


def spherical_ratio_ok(alpha: float, xi: float, n: int, samples_l: int):
    """The width-ratio bound behind the bounded-sample spherical variant:
    xi / sqrt(xi^2 - alpha^2) <= 1 + sqrt(log(nl)/nl)."""
    nl = n * samples_l
    lhs = xi / math.sqrt(xi**2 - alpha**2)
    rhs = 1 + math.sqrt(math.log(nl) / nl)
    return lhs, rhs, lhs <= rhs


def spherical_randomize(
    samples: list[rlwe.RlweSample],
    s_prime: rlwe.SecretKey | None,
    k: int,
    xi: float,
    r_spec: GaussianSpec,
    params: RingParams,
    rng: np.random.Generator,
) -> list[rlwe.RlweSample]:
    """Apply the randomizing transformation to an l-tuple with completion
    widths r'_i^2 = xi^2 - r_i^2, shared s', fresh h and e' per sample; the
    combined error is spherical with rate xi."""
    r = np.asarray(r_spec.r, dtype=float)
    if xi < float(np.max(r)):
        raise ValueError(f"xi = {xi} is below max r_i = {np.max(r)}: completion impossible")
    widths = np.sqrt(np.maximum(xi**2 - r**2, 0.0))
    return [
        worst_to_average_randomize(s, s_prime, widths, k, params, rng)
        for s in samples
    ]


# --- the hybrid walk ----------------------------------------------------------------


def hybrid_walk(
    oracle: Oracle,
    s: rlwe.SecretKey,
    psi: GaussianSpec | None,
    params: RingParams,
    rng: np.random.Generator,
    trials: int = 40,
    delta: float = 0.01,
    transcript: ReductionTranscript | None = None,
) -> int:
    """Estimate the oracle's acceptance probability at every hybrid level and
    return the level j whose adjacent pair (j-1, j) is statistically separated
    (largest gap).  Raises NoGapFound with the full profile otherwise."""
    if oracle.kind != DLWE:
        raise ValueError(f"need a {DLWE}, got {oracle.kind}")
    n = params.total_degree_n
    acc = np.zeros(n + 1)
    for level in range(n + 1):
        hits = 0
        for _ in range(trials):
            batch = rlwe.sample_hybrid_batch(
                s, psi, level, params, rng, oracle.sample_budget
            )
            hits += bool(oracle.fn(batch))
        acc[level] = hits / trials
    radius = math.sqrt(math.log(2 / delta) / (2 * trials))
    gaps = np.abs(np.diff(acc))
    if transcript is not None:
        transcript.record(step="hybrid-walk", acceptance=acc.tolist(), radius=radius)
    best = int(np.argmax(gaps))
    if gaps[best] > 2 * radius:
        return best + 1
    raise NoGapFound("no adjacent pair separated at this confidence", acc.tolist())


def planted_slot_distinguisher(
    s: rlwe.SecretKey,
    watch_slot: int,
    params: RingParams,
    batch: int = 8,
    degenerate_frac: float = 0.8,
) -> Oracle:
    """Synthetic decision oracle keyed on one slot: accepts while the integer
    residual at watch_slot stays degenerate for most of the batch."""

    def fn(samples):
        slots, _ = rlwe.integer_slot_residuals(samples, s)
        return float(np.mean(slots[:, watch_slot - 1] == 0)) >= degenerate_frac

    return Oracle(DLWE, fn, sample_budget=batch)


def random_coin_oracle(
    rng: np.random.Generator, kind: str = DLWE, batch: int = 8, j: int = 1
) -> Oracle:
    """An oracle with zero advantage (negative control); worst-case-decision
    flavour answers j-1 or j uniformly."""

    def fn(samples):
        coin = int(rng.integers(0, 2))
        if kind == WDLWE:
            return j - coin
        return bool(coin)

    return Oracle(kind, fn, sample_budget=batch)
