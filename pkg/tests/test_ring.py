import itertools

import numpy as np
import pytest

from mrlwe import ring
from mrlwe.params import RingParams, find_prime, g_units
from mrlwe.ring import (
    AutomorphismIndex,
    apply_automorphism,
    crt_basis,
    cyclotomic_poly,
    element_from_bytes,
    element_to_bytes,
    from_slots,
    invert,
    monomial,
    mul,
    mul_schoolbook,
    one,
    random_element,
    slot_permutation,
    slots_of_batch,
    to_slots,
    zero,
)

RING_CASES = [((8, 8), 17), ((4, 4), 13), ((16, 8), 97), ((3, 4), 13), ((5,), 11), ((2, 4), 13)]


def test_cyclotomic_polynomials():
    assert cyclotomic_poly(1) == (-1, 1)
    assert cyclotomic_poly(2) == (1, 1)
    assert cyclotomic_poly(3) == (1, 1, 1)
    assert cyclotomic_poly(4) == (1, 0, 1)
    assert cyclotomic_poly(8) == (1, 0, 0, 0, 1)
    assert cyclotomic_poly(12) == (1, 0, -1, 0, 1)


def test_add_neutral_and_inverse(p88_17, rng):
    a = random_element(p88_17, rng)
    assert a + zero(p88_17) == a
    assert a + (-a) == zero(p88_17)


def test_add_commutes_with_slot_transform(p88_17, rng):
    for _ in range(20):
        a, b = random_element(p88_17, rng), random_element(p88_17, rng)
        assert to_slots(a + b) == to_slots(a) + to_slots(b)


def test_rep_and_params_mismatch(p88_17, p44_13, rng):
    a = random_element(p88_17, rng)
    with pytest.raises(ValueError):
        ring.add(a, to_slots(a))
    with pytest.raises(ValueError):
        ring.add(a, random_element(p44_13, rng))
    with pytest.raises(ValueError):
        ring.mul(a, random_element(p44_13, rng))


def test_constant_has_constant_slots(p44_13):
    assert np.all(one(p44_13).slots() == 1)


def test_slots_of_x_single_dim(p4_13):
    # slots of x are (w, w^3) in ascending-unit order
    w = p4_13.roots_w[0]
    x = monomial(p4_13, (1,))
    assert list(x.slots()) == [w, pow(w, 3, 13)]
    assert {int(v) for v in x.slots()} == {5, 8}  # the two order-4 roots mod 13


def test_roundtrip_exact(p88_17, rng):
    for _ in range(1000):
        a = random_element(p88_17, rng)
        assert from_slots(to_slots(a)) == a


def test_x_squared_is_minus_one(p44_13):
    x = monomial(p44_13, (1, 0))
    sq = mul(x, x)
    expect = np.zeros(4, dtype=np.int64)
    expect[0] = 12
    assert list(sq.coeffs()) == list(expect)


def test_x_plus_y_times_x_minus_y_vanishes(p44_13):
    x, y = monomial(p44_13, (1, 0)), monomial(p44_13, (0, 1))
    assert mul(x + y, x - y) == zero(p44_13)


@pytest.mark.parametrize("moduli,q", RING_CASES)
def test_mul_matches_schoolbook(moduli, q, rng):
    params = RingParams.create(moduli, q)
    for _ in range(60):
        a, b = random_element(params, rng), random_element(params, rng)
        assert mul(a, b) == mul_schoolbook(a, b)


def test_schoolbook_negacyclic_wraparound(p4_13):
    # x^(n-1) * x = x^n = -1 for a power-of-two conductor
    hi = monomial(p4_13, (1,))
    got = mul_schoolbook(hi, hi)
    assert list(got.coeffs()) == [12, 0]


def test_schoolbook_unit_and_commutativity(p88_17, rng):
    a, b = random_element(p88_17, rng), random_element(p88_17, rng)
    assert mul_schoolbook(a, one(p88_17)) == a
    assert mul_schoolbook(a, b) == mul_schoolbook(b, a)


def test_automorphism_identity(p88_17, rng):
    k = AutomorphismIndex.create(p88_17, (1, 1))
    a = random_element(p88_17, rng)
    assert apply_automorphism(a, k) == a
    assert np.array_equal(slot_permutation(p88_17, k), np.arange(16))


def test_automorphism_negates_x(p4_13):
    x = monomial(p4_13, (1,))
    got = apply_automorphism(x, AutomorphismIndex.create(p4_13, (3,)))
    assert list(got.coeffs()) == [0, 12]  # x^3 = -x mod x^2 + 1


def test_automorphism_rejects_non_units(p4_13):
    with pytest.raises(ValueError):
        AutomorphismIndex.create(p4_13, (2,))


def test_substitution_equals_slot_permutation_exhaustive(p88_17, rng):
    for k in itertools.product(g_units(8), g_units(8)):
        ki = AutomorphismIndex.create(p88_17, k)
        a = random_element(p88_17, rng)
        via_subst = apply_automorphism(a, ki)
        via_perm = from_slots(apply_automorphism(to_slots(a), ki))
        assert via_subst == via_perm
        assert apply_automorphism(via_subst, ki.inverse(p88_17)) == a


def test_slot_permutation_group_action(p88_17):
    units = list(itertools.product(g_units(8), g_units(8)))
    perms = {
        k: slot_permutation(p88_17, AutomorphismIndex.create(p88_17, k)) for k in units
    }
    for k in units:
        assert sorted(perms[k]) == list(range(16))  # bijection
    for k1 in units:
        for k2 in units:
            prod = tuple(a * b % 8 for a, b in zip(k1, k2))
            # applying k1 then k2 composes the gathers in reverse order
            composed = perms[k1][perms[k2]]
            assert np.array_equal(composed, perms[prod]), (k1, k2)


def test_invert_one_and_zero_divisor(p44_13):
    assert invert(one(p44_13)) == one(p44_13)
    p44_17 = RingParams.create((4, 4), 17)
    xy = monomial(p44_17, (1, 0)) + monomial(p44_17, (0, 1))
    # one slot evaluates to 4 + 13 = 0 mod 17
    assert 0 in xy.slots()
    assert invert(xy) is None


def test_invert_correct_when_defined(p44_13, rng):
    hits = 0
    for _ in range(300):
        a = random_element(p44_13, rng)
        inv = invert(a)
        if inv is not None:
            hits += 1
            assert mul(a, inv) == one(p44_13)
        else:
            assert 0 in a.slots()
    assert hits > 0


def test_invertible_fraction_matches_slot_product(p44_13, rng):
    # uniform element <-> uniform slots; invertible iff no slot is zero
    mats = rng.integers(0, 13, (100_000, 4), dtype=np.int64)
    slots = slots_of_batch(p44_13, mats)
    frac = np.mean(np.all(slots != 0, axis=1))
    assert frac == pytest.approx((1 - 1 / 13) ** 4, abs=0.01)


def test_crt_basis(p44_13, rng):
    basis = crt_basis(p44_13)
    acc = zero(p44_13)
    for c in basis:
        acc = acc + c
    assert acc == one(p44_13)
    assert mul(basis[0], basis[0]) == basis[0]
    assert mul(basis[0], basis[1]) == zero(p44_13)
    for _ in range(20):
        w = rng.integers(0, 13, 4)
        combo = zero(p44_13)
        for wj, cj in zip(w, basis):
            combo = combo + ring.scalar_mul(cj, int(wj))
        assert combo == from_slots(ring.from_slot_values(p44_13, w))


def test_serialization_roundtrip(p88_17, rng):
    a = random_element(p88_17, rng)
    blob = element_to_bytes(a)
    assert len(blob) == 16 * 8
    assert element_from_bytes(p88_17, blob) == a


def test_wide_modulus_object_path(rng):
    q = find_prime(1 << 40, 4)
    params = RingParams.create((4,), q)
    a, b = random_element(params, rng), random_element(params, rng)
    assert from_slots(to_slots(a)) == a
    assert mul(a, b) == mul_schoolbook(a, b)
    assert element_from_bytes(params, element_to_bytes(a)) == a


def test_invalid_params_rejected(rng):
    bad = RingParams.create((8,), 7)
    with pytest.raises(ValueError):
        zero(bad)
