import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrlwe.params import (
    RingParams,
    SecurityParams,
    check_theorem_rates,
    euler_phi,
    find_prime,
    format_params,
    g_units,
    index_map,
    index_unmap,
    is_prime,
    multiplicative_order,
    parse_params,
    slot_position,
    slot_units,
    spherical_rate,
    validate,
)


def test_validate_accepts_4_4_13(p44_13):
    report = validate(p44_13)
    assert report.valid
    assert p44_13.total_degree_n == 4


def test_validate_rejects_8_4_7():
    report = validate(RingParams.create((8, 4), 7))
    assert not report.valid
    assert any("mod m_i = 8" in f for f in report.failures)


def test_validate_8_8_17_and_root_orders(p88_17):
    assert validate(p88_17).valid
    assert p88_17.total_degree_n == 16
    for w in p88_17.roots_w:
        assert multiplicative_order(w, 17) == 8
    # 3 generates the full group mod 17, so it is not an order-8 root
    assert multiplicative_order(3, 17) == 16


def _count_roots_of_unity(m, q):
    return sum(1 for x in range(1, q) if pow(x, m, q) == 1)


@pytest.mark.parametrize("q", [2, 3, 5, 7, 13, 17, 31, 73, 97])
def test_validate_matches_linear_splitting_bruteforce(q):
    # x^m - 1 splits into m distinct linear factors mod prime q iff it has m
    # distinct roots, which is exactly what validate must accept
    for m in range(2, 17):
        splits = is_prime(q) and _count_roots_of_unity(m, q) == m
        assert validate(RingParams.create((m,), q)).valid == splits


def test_precondition_on_moduli():
    with pytest.raises(ValueError):
        RingParams.create((), 13)
    with pytest.raises(ValueError):
        RingParams.create((1, 4), 13)


def test_rate_report_numbers():
    params = RingParams.create((32,), 257)
    sec = SecurityParams(0.1, spherical_rate(0.1, 16, 4), 4)
    rep = check_theorem_rates(params, sec)
    assert rep.alpha_below_rate  # 0.1 < sqrt(ln 16 / 16)
    assert rep.rate_bound == pytest.approx(np.sqrt(np.log(16) / 16))
    assert rep.xi == pytest.approx(0.1 * (64 / np.log(64)) ** 0.25)
    # alpha * q = 25.7 >= sqrt(ln 16)
    assert rep.alpha_q_large_enough


def test_rate_fails_for_large_alpha():
    params = RingParams.create((32,), 257)
    sec = SecurityParams(1.0, spherical_rate(1.0, 16, 1), 1)
    assert not check_theorem_rates(params, sec).alpha_below_rate


def test_security_params_invariants():
    with pytest.raises(ValueError):
        SecurityParams(0.0, 1.0, 1)
    with pytest.raises(ValueError):
        SecurityParams(0.5, 0.4, 1)
    with pytest.raises(ValueError):
        SecurityParams(0.5, 0.5, 0)


def test_index_map_basics(p44_13):
    assert index_map(p44_13, (1, 1)) == 1
    # stride of the second dimension is n_1
    assert index_map(p44_13, (2, 1)) == 2
    assert index_map(p44_13, (1, 2)) == 3
    with pytest.raises(ValueError):
        index_map(p44_13, (0, 1))
    with pytest.raises(ValueError):
        index_map(p44_13, (1, 5))


def test_index_map_matches_printed_formula():
    params = RingParams.create((16, 4, 8), 97)  # degrees (8, 2, 4)
    degrees = params.degrees_n
    for multi in itertools.product(*(range(1, n + 1) for n in degrees)):
        j = 1
        stride = 1
        for j_i, n_i in zip(multi, degrees):
            j += (j_i - 1) * stride
            stride *= n_i
        assert index_map(params, multi) == j


def test_index_map_exhaustive_bijection():
    params = RingParams.create((16, 4, 8), 97)
    n = params.total_degree_n
    seen = {index_map(params, index_unmap(params, j)) for j in range(1, n + 1)}
    assert seen == set(range(1, n + 1))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 256))
def test_index_unmap_roundtrip_property(flat):
    params = RingParams.create((32, 32), 12289)  # degrees (16, 16), n = 256
    assert index_map(params, index_unmap(params, flat)) == flat


def test_slot_units_roundtrip(p88_17):
    for j in range(p88_17.total_degree_n):
        assert slot_position(p88_17, slot_units(p88_17, j)) == j
    assert slot_units(p88_17, 0) == (1, 1)
    assert g_units(8) == (1, 3, 5, 7)


def test_text_form_roundtrip(p44_13):
    assert format_params(p44_13) == "m=4x4;q=13"
    assert parse_params("m=4x4;q=13") == p44_13
    with pytest.raises(ValueError):
        parse_params("moduli=4;q=13")
    with pytest.raises(ValueError):
        parse_params("m=4x4,q=13")


def test_primes_and_phi():
    assert [euler_phi(m) for m in (2, 3, 4, 8, 9, 12, 16)] == [1, 2, 2, 4, 6, 4, 8]
    assert is_prime(2) and is_prime(40961) and not is_prime(40963 * 3)
    assert not is_prime(1)
    assert find_prime(1 << 14, 8192) == 40961
    assert find_prime(3, 1) == 3


def test_q_bit_limit():
    big = find_prime(1 << 63, 4)
    assert not validate(RingParams.create((4,), big)).valid
