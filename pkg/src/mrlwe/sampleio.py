"""Binary serialization of sample streams (the MRLW container).

Layout, all little-endian:

    magic   "MRLW"
    version u16 (currently 1)
    l       u8
    m_i     u32 * l
    q       u64
    f       u8   (fraction bits; 0 marks a discrete R_q x R^dual_q stream)
    count   u64
    then per sample: n u64 coefficients of a, n u64 numerators of b

Numerators are the fixed-point torus values mod q * 2^f, so q * 2^f must fit
in 64 bits.  Coefficient order is the index_map order everywhere.
"""

from __future__ import annotations

import struct

import numpy as np

from . import ring, rlwe
from .params import RingParams

__all__ = ["write_samples", "read_samples", "MAGIC", "VERSION"]

MAGIC = b"MRLW"
VERSION = 1


def _pack_header(params: RingParams, f: int, count: int) -> bytes:
    head = [MAGIC, struct.pack("<H", VERSION), struct.pack("<B", params.l)]
    head += [struct.pack("<I", m) for m in params.moduli_m]
    head += [struct.pack("<Q", params.q), struct.pack("<B", f), struct.pack("<Q", count)]
    return b"".join(head)


def write_samples(path, params: RingParams, samples) -> None:
    """Write continuous (RlweSample) or discrete (DiscreteRlweSample) streams."""
    samples = list(samples)
    if not samples:
        raise ValueError("refusing to write an empty stream")
    first = samples[0]
    discrete = isinstance(first, rlwe.DiscreteRlweSample)
    f = 0 if discrete else first.f
    if (params.q << f) >= 1 << 64:
        raise ValueError("q * 2^f does not fit the 64-bit container")
    with open(path, "wb") as fh:
        fh.write(_pack_header(params, f, len(samples)))
        for smp in samples:
            fh.write(ring.element_to_bytes(smp.a))
            b = smp.b.coeffs() if discrete else smp.b
            fh.write(np.asarray(b, dtype="<u8").tobytes())


def read_samples(path):
    """Read a stream; returns (params, f, samples).  f = 0 yields discrete
    samples, anything else continuous fixed-point samples."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ValueError("not an MRLW file")
    (version,) = struct.unpack_from("<H", blob, 4)
    if version != VERSION:
        raise ValueError(f"unsupported version {version}")
    (l,) = struct.unpack_from("<B", blob, 6)
    off = 7
    moduli = []
    for _ in range(l):
        (m,) = struct.unpack_from("<I", blob, off)
        moduli.append(m)
        off += 4
    (q,) = struct.unpack_from("<Q", blob, off)
    off += 8
    (f,) = struct.unpack_from("<B", blob, off)
    off += 1
    (count,) = struct.unpack_from("<Q", blob, off)
    off += 8
    params = RingParams.create(moduli, q)
    n = params.total_degree_n
    expect = off + count * 2 * n * 8
    if len(blob) != expect:
        raise ValueError(f"truncated stream: {len(blob)} != {expect} bytes")
    out = []
    for _ in range(count):
        a = ring.element_from_bytes(params, blob[off : off + 8 * n])
        off += 8 * n
        b = np.frombuffer(blob[off : off + 8 * n], dtype="<u8").astype(object)
        off += 8 * n
        if f == 0:
            out.append(rlwe.DiscreteRlweSample(a, ring.RingElement(params, ring.COEFF, b)))
        else:
            out.append(rlwe.RlweSample(a, b, f))
    return params, f, out
