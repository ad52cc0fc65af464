import numpy as np
import pytest

from mrlwe import embedding as emb
from mrlwe import ring
from mrlwe.params import RingParams, conjugate_flip


def test_sigma_of_one_and_x(p4_13):
    assert np.allclose(emb.sigma(p4_13, [1.0, 0.0]).coords, 1.0)
    sx = emb.sigma(p4_13, [0.0, 1.0]).coords
    assert np.allclose(sx, [1j, -1j])  # evaluation at (i, -i), units (1, 3)


def test_sigma_is_multiplicative(p88_17, rng):
    n = p88_17.total_degree_n
    for _ in range(500):
        a = rng.integers(-50, 51, n)
        b = rng.integers(-50, 51, n)
        ab = ring.multiply_integer_coeffs(p88_17, a, b).astype(float)
        lhs = emb.sigma(p88_17, ab).coords
        rhs = emb.sigma(p88_17, a.astype(float)).coords * emb.sigma(p88_17, b.astype(float)).coords
        scale = max(1.0, np.max(np.abs(rhs)))
        assert np.max(np.abs(lhs - rhs)) / scale <= 1e-9


def test_sigma_is_additive(p88_17, rng):
    n = p88_17.total_degree_n
    a = rng.integers(-50, 51, n).astype(float)
    b = rng.integers(-50, 51, n).astype(float)
    lhs = emb.sigma(p88_17, a + b).coords
    rhs = emb.sigma(p88_17, a).coords + emb.sigma(p88_17, b).coords
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1.0, np.max(np.abs(rhs)))


def test_sigma_inverse_roundtrip(p44_13, rng):
    for _ in range(100):
        a = rng.integers(-1000, 1001, 4).astype(float)
        back = emb.sigma_inverse(p44_13, emb.sigma(p44_13, a))
        assert np.max(np.abs(back - a)) <= 1e-9 * max(1.0, np.max(np.abs(a)))


def test_sigma_inverse_equals_dense_solve(p88_17, rng):
    B = emb.embedding_matrix(p88_17)  # rows = sigma(monomials)
    a = rng.integers(-100, 101, 16).astype(float)
    v = emb.sigma(p88_17, a)
    dense = np.linalg.solve(B.T, v.coords)
    assert np.max(np.abs(np.real(dense) - emb.sigma_inverse(p88_17, v))) < 1e-8


def test_conjugate_symmetry_and_rejection(p88_17, rng):
    a = rng.integers(-99, 100, 16).astype(float)
    v = emb.sigma(p88_17, a)
    assert v.is_symmetric()
    flip = np.asarray(conjugate_flip(p88_17))
    assert np.max(np.abs(v.coords[flip] - np.conj(v.coords))) < 1e-9
    bad = v.coords.copy()
    bad[0] += 1.0  # breaks the pairing
    with pytest.raises(ValueError):
        emb.sigma_inverse(p88_17, bad)


def test_lp_norms(p88_17):
    e0 = [1.0] + [0.0] * 15
    assert emb.lp_norm(p88_17, e0, np.inf) == pytest.approx(1.0)
    assert emb.lp_norm(p88_17, e0, 2) == pytest.approx(4.0)  # sqrt(n)
    x = np.zeros(16)
    x[1] = 1.0  # a monomial: roots on the unit circle
    assert emb.lp_norm(p88_17, x, 2) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        emb.lp_norm(p88_17, e0, 0.5)


def test_trace_and_norm(p4_13, p44_13, rng):
    assert emb.trace(p4_13, [1.0, 0.0]) == pytest.approx(2.0)
    assert emb.norm_field(p4_13, [1.0, 0.0]) == pytest.approx(1.0)
    assert emb.trace(p4_13, [0.0, 1.0]) == pytest.approx(0.0, abs=1e-12)
    for _ in range(25):
        f1 = rng.integers(-9, 10, 2).astype(float)
        f2 = rng.integers(-9, 10, 2).astype(float)
        tensor = emb.pure_tensor_coeffs(p44_13, [f1, f2])
        lhs = emb.trace(p44_13, tensor)
        rhs = emb.trace(p4_13, f1) * emb.trace(p4_13, f2)
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_h_basis_orthonormal_and_real_span(p88_17, rng):
    H = emb.h_basis(p88_17)
    gram = H.conj().T @ H
    assert np.max(np.abs(gram - np.eye(16))) <= 1e-12
    flip = np.asarray(conjugate_flip(p88_17))
    for j in range(16):
        col = H[:, j]
        assert np.max(np.abs(col[flip] - np.conj(col))) <= 1e-12  # lies in H
    for _ in range(20):
        a = rng.integers(-50, 51, 16).astype(float)
        c = emb.h_coords(p88_17, emb.sigma(p88_17, a).coords)
        # h_coords discards an imaginary part; verify it reconstructs exactly
        v = emb.h_combine(p88_17, c)
        assert np.max(np.abs(v - emb.sigma(p88_17, a).coords)) < 1e-9


def test_embedding_det_formula(p88_17, p44_13):
    for params in (p44_13, p88_17):
        dense, prod = emb.embedding_det_check(params)
        assert dense > 0
        assert dense == pytest.approx(prod, rel=1e-9)
        assert dense**2 == pytest.approx(emb.discriminant(params), rel=1e-9)


def test_discriminant_exact_values(p44_13):
    assert emb.discriminant(RingParams.create((4,), 13)) == 4
    assert emb.discriminant(RingParams.create((8,), 17)) == 256  # n^n with n=4
    assert emb.discriminant(p44_13) == 256
    assert emb.discriminant(RingParams.create((3,), 13)) == 3


def test_dual_scale(p44_13):
    ds = emb.DualScale.for_params(p44_13)
    assert (ds.numerator, ds.denominator) == (1, 4)
    with pytest.raises(ValueError):
        emb.DualScale.for_params(RingParams.create((3, 4), 13))


def test_dual_lattice_check(p44_13):
    trivial = emb.dual_lattice_check(RingParams.create((2,), 3))
    assert trivial.passed  # R = Z is self-dual
    rep = emb.dual_lattice_check(p44_13)
    assert rep.unimodular_ok
    assert rep.max_integrality_defect <= 1e-6
    assert rep.trace_integrality_defect <= 1e-6
    assert rep.passed
    with pytest.raises(ValueError):
        emb.dual_lattice_check(RingParams.create((3, 4), 13))


def test_trace_pairing_with_scaled_dual(p44_13, rng):
    t = emb.DualScale.for_params(p44_13).value
    for _ in range(50):
        x = rng.integers(-9, 10, 4).astype(float)
        y = rng.integers(-9, 10, 4).astype(float) * t
        tr = np.real(np.sum(emb.sigma(p44_13, x).coords * emb.sigma(p44_13, y).coords))
        assert abs(tr - round(tr)) < 1e-9


def test_csv_export(tmp_path, p4_13):
    v = emb.sigma(p4_13, [1.0, 2.0])
    path = tmp_path / "embedded.csv"
    emb.embedded_to_csv(v, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "j,re,im"
    assert len(lines) == 3
    assert lines[1].startswith("1,")
