"""Encrypted 2D negacyclic filtering over a bivariate ring.

A deliberately minimal symmetric scheme: ciphertexts mask the plaintext with a
ring-LWE style product plus t-scaled noise, homomorphic addition is
component-wise and one multiplication is supported by letting the ciphertext
grow to three components (no relinearization, no modulus switching).  A w x h
image packs into Z_q[x, y] / (x^w + 1, y^h + 1); the ring product of two
packed images is their 2D negacyclic convolution, which is what the filtering
demo exercises.

Illustrative only: the parameters make no security claim whatsoever, and the
noise-growth prediction is an engineering heuristic (documented inline), not a
proven bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ring
from .gaussian import sample_discrete_gaussian
from .params import RingParams, find_prime

__all__ = [
    "DemoKey",
    "Ciphertext",
    "demo_params",
    "keygen",
    "encrypt",
    "decrypt",
    "add_ct",
    "mul_ct",
    "measured_noise",
    "image_to_element",
    "element_to_image",
    "negacyclic_convolve_2d",
    "KERNELS",
    "read_pgm",
    "write_pgm",
]

DEFAULT_T = 257
NOISE_WIDTH = 3.0  # one-dimensional Gaussian width of fresh errors

KERNELS = {
    "identity": np.array([[1]], dtype=np.int64),
    "blur3": np.ones((3, 3), dtype=np.int64),
}


def demo_params(width: int, height: int, q: int | None = None) -> RingParams:
    """Ring for w x h images: conductors (2w, 2h), q the smallest admissible
    prime above 2^26 unless given."""
    for side in (width, height):
        if side < 2 or side & (side - 1):
            raise ValueError("image sides must be powers of two >= 2")
    m = (2 * width, 2 * height)
    if q is None:
        q = find_prime(1 << 26, max(m))
    return RingParams.create(m, q)


@dataclass(frozen=True)
class DemoKey:
    params: RingParams
    s: ring.RingElement
    t: int


@dataclass(frozen=True)
class Ciphertext:
    """Components p_k with decryption sum_k (-1)^k p_k s^k = t*e + msg (mod q).

    noise_sigma is the running per-coefficient noise estimate (in t units);
    noise_bits = log2(budget / 6*sigma) must stay positive for decryption."""

    parts: tuple
    t: int
    noise_sigma: float

    @property
    def params(self) -> RingParams:
        return self.parts[0].params

    @property
    def noise_bits(self) -> float:
        budget = self.params.q / (2 * self.t)
        return math.log2(budget) - math.log2(max(6 * self.noise_sigma, 1e-9))


def keygen(params: RingParams, t: int = DEFAULT_T, rng=None) -> DemoKey:
    rng = rng or np.random.default_rng()
    if math.gcd(t, params.q) != 1:
        raise ValueError("plaintext modulus must be coprime to q")
    return DemoKey(params, ring.random_element(params, rng), t)


def _noise_element(params: RingParams, rng) -> ring.RingElement:
    n = params.total_degree_n
    e = sample_discrete_gaussian(np.eye(n), None, NOISE_WIDTH, rng)
    return ring.RingElement(params, ring.COEFF, np.rint(e).astype(np.int64))


def encrypt(msg: ring.RingElement, key: DemoKey, rng) -> Ciphertext:
    """c = (a*s + t*e + msg, a); decrypt(encrypt(m)) = m while budget holds."""
    params = key.params
    a = ring.random_element(params, rng)
    body = ring.add(
        ring.add(ring.mul(a, key.s), ring.scalar_mul(_noise_element(params, rng), key.t)),
        msg,
    )
    sigma = NOISE_WIDTH / math.sqrt(2 * math.pi)  # per-coefficient std of e itself
    ct = Ciphertext((body, a), key.t, sigma)
    if ct.noise_bits <= 0:
        raise ValueError("parameters too tight: fresh ciphertext already undecryptable")
    return ct


def decrypt(ct: Ciphertext, key: DemoKey) -> ring.RingElement:
    params = key.params
    acc = ring.zero(params)
    s_pow = ring.one(params)
    for k, part in enumerate(ct.parts):
        term = ring.mul(part, s_pow)
        acc = ring.add(acc, term) if k % 2 == 0 else ring.sub(acc, term)
        s_pow = ring.mul(s_pow, key.s)
    vals = acc.coeffs().astype(object)
    centered = np.where(vals > params.q // 2, vals - params.q, vals)
    return ring.RingElement(params, ring.COEFF, np.asarray(centered) % ct.t)


def add_ct(c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    if c1.t != c2.t or c1.params != c2.params:
        raise ValueError("ciphertexts are incompatible")
    la, lb = len(c1.parts), len(c2.parts)
    parts = []
    for k in range(max(la, lb)):
        if k < la and k < lb:
            parts.append(ring.add(c1.parts[k], c2.parts[k]))
        else:
            parts.append(c1.parts[k] if k < la else c2.parts[k])
    return Ciphertext(tuple(parts), c1.t, math.hypot(c1.noise_sigma, c2.noise_sigma))


def mul_ct(c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    """Ring product of the plaintexts (2D negacyclic convolution of packed
    images); ciphertext degree grows, no relinearization."""
    if c1.t != c2.t or c1.params != c2.params:
        raise ValueError("ciphertexts are incompatible")
    la, lb = len(c1.parts), len(c2.parts)
    parts = [ring.zero(c1.params) for _ in range(la + lb - 1)]
    for i in range(la):
        for j in range(lb):
            parts[i + j] = ring.add(parts[i + j], ring.mul(c1.parts[i], c2.parts[j]))
    # Heuristic noise model (NOT a proven bound): with per-coefficient noise
    # sigmas s1, s2 and message coefficients bounded by t/2, the product noise
    # e1*m2 + e2*m1 + t*e1*e2 has per-coefficient std about
    # sqrt(n) * sqrt(s1^2 (t/2)^2 + s2^2 (t/2)^2 + t^2 s1^2 s2^2)
    n = c1.params.total_degree_n
    t = c1.t
    s1, s2 = c1.noise_sigma, c2.noise_sigma
    sigma = math.sqrt(n * ((s1 * t / 2) ** 2 + (s2 * t / 2) ** 2 + (t * s1 * s2) ** 2))
    out = Ciphertext(tuple(parts), t, sigma)
    if out.noise_bits <= 0:
        raise ValueError("noise budget exhausted by multiplication")
    return out


def measured_noise(ct: Ciphertext, key: DemoKey, plaintext: ring.RingElement) -> float:
    """Max |centered(phase - msg)| / t: the actual noise magnitude in t units."""
    params = key.params
    acc = ring.zero(params)
    s_pow = ring.one(params)
    for k, part in enumerate(ct.parts):
        term = ring.mul(part, s_pow)
        acc = ring.add(acc, term) if k % 2 == 0 else ring.sub(acc, term)
        s_pow = ring.mul(s_pow, key.s)
    diff = ring.sub(acc, plaintext).coeffs().astype(object)
    centered = np.where(diff > params.q // 2, diff - params.q, diff)
    return float(np.max(np.abs(centered.astype(float)))) / ct.t


# --- image packing and the plaintext oracle -------------------------------------


def image_to_element(params: RingParams, img: np.ndarray) -> ring.RingElement:
    """Row-major pixels to coefficients: pixel (row r, col c) is the coefficient
    of x^c y^r, which is exactly the index_map order."""
    h, w = img.shape
    if (w, h) != params.degrees_n:
        raise ValueError(f"image {w}x{h} does not match ring degrees {params.degrees_n}")
    return ring.RingElement(params, ring.COEFF, img.reshape(-1).astype(np.int64))


def element_to_image(params: RingParams, elt: ring.RingElement, t: int) -> np.ndarray:
    w, h = params.degrees_n
    return (elt.coeffs().astype(np.int64) % t).reshape(h, w)


def negacyclic_convolve_2d(img: np.ndarray, kernel: np.ndarray, t: int) -> np.ndarray:
    """Plaintext oracle: out[r, c] = sum_{dr, dc} kernel[dr, dc] *
    img[r - dr, c - dc] with wrap-around sign flips (x^w = -1, y^h = -1),
    reduced mod t.  Kept independent of the ring transforms on purpose."""
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.int64)
    img = img.astype(np.int64)
    for dr in range(kernel.shape[0]):
        for dc in range(kernel.shape[1]):
            k = int(kernel[dr, dc])
            if k == 0:
                continue
            rolled = np.roll(np.roll(img, dr, axis=0), dc, axis=1)
            signs = np.ones((h, w), dtype=np.int64)
            if dr:
                signs[:dr, :] *= -1  # rows that wrapped around y^h = -1
            if dc:
                signs[:, :dc] *= -1
            out += k * rolled * signs
    return out % t


# --- PGM (P5, 8-bit) --------------------------------------------------------------


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    i = 0
    while len(tokens) < 4:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        tokens.append(data[i:j])
        i = j
    if tokens[0] != b"P5":
        raise ValueError("only binary (P5) PGM is supported")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise ValueError("only 8-bit PGM is supported")
    i += 1  # single whitespace after maxval
    pixels = np.frombuffer(data[i : i + w * h], dtype=np.uint8)
    if pixels.size != w * h:
        raise ValueError("truncated PGM payload")
    return pixels.reshape(h, w).astype(np.int64)


def write_pgm(path, img: np.ndarray) -> None:
    img = np.asarray(img)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(np.clip(img, 0, 255).astype(np.uint8).tobytes())
