import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otstego import hashfamily as hf
from otstego.hashfamily import FamilyError, FamilyParams


def test_keygen_reproducible():
    p = FamilyParams(64, 8, 2.0 ** -10)
    a = hf.keygen(p, random.Random(9))
    b = hf.keygen(p, random.Random(9))
    assert a.seed == b.seed
    assert a.seed < 1 << p.seed_bits


def test_seed_length_example():
    p = FamilyParams(2**20, 64, 2.0 ** -40)
    assert p.seed_bits == 184
    assert p.seed_bits <= 2 * (20 + 64 // 2 + 40) + 2


@pytest.mark.parametrize("m,t,eps", [(100, 6, 0.01), (2**12, 20, 2.0**-30), (777, 31, 0.3)])
def test_seed_length_scaling(m, t, eps):
    base = FamilyParams(m, t, eps).seed_bits
    assert FamilyParams(m, t, eps / 2).seed_bits == base + 2
    assert FamilyParams(m, t + 2, eps).seed_bits == base + 2


def test_field_degree_is_minimal():
    for m, t, eps in [(8, 2, 0.25), (1000, 10, 1e-6), (12, 4, 0.25)]:
        r = hf.field_degree(m, t, eps)
        # m / 2^r <= eps * 2^(-t/2), squared to stay rational
        assert (Fraction(2**r) * Fraction(eps)) ** 2 >= m * m * 2**t
        assert (Fraction(2 ** (r - 1)) * Fraction(eps)) ** 2 < m * m * 2**t


def test_eval_is_pure():
    p = FamilyParams(40, 4, 0.1, alphabet_size=4)
    f = hf.keygen(p, random.Random(1))
    assert [f.eval(3, 2) for _ in range(3)] == [f.eval(3, 2)] * 3


def test_extreme_positions():
    p = FamilyParams(40, 4, 0.1, alphabet_size=4)
    f = hf.keygen(p, random.Random(1))
    assert f.eval_index(0) == (f.b & 1)  # a^0 = 1
    assert f.eval_index(39) in (0, 1)
    with pytest.raises(FamilyError):
        f.eval_index(40)
    with pytest.raises(FamilyError):
        f.eval(11, 0)


@pytest.mark.parametrize("m,t,s", [(4, 2, 1), (64, 6, 8), (1000, 20, 10), (3 * 257, 300, 3)])
def test_materialize_matches_lazy(m, t, s):
    p = FamilyParams(m, t, 2.0 ** -8, alphabet_size=s)
    f = hf.keygen(p, random.Random(m))
    lazy = np.array([f.eval_index(j) for j in range(m)], dtype=np.uint8)
    assert np.array_equal(f.materialize(), lazy)
    assert np.array_equal(f.materialize(baby_steps=1), lazy)
    assert np.array_equal(f.table.reshape(-1), lazy)


def test_key_block_round_trip():
    p = FamilyParams(90, 10, 0.001, alphabet_size=9)
    f = hf.keygen(p, random.Random(3))
    data = f.to_bytes()
    g, used = hf.KeyedFunction.from_bytes(data, alphabet_size=9)
    assert used == len(data)
    assert g.seed == f.seed and g.params == f.params
    assert g.to_bytes() == data


def test_key_block_rejects_garbage():
    p = FamilyParams(90, 10, 0.001)
    data = bytearray(hf.keygen(p, random.Random(3)).to_bytes())
    with pytest.raises(FamilyError):
        hf.KeyedFunction.from_bytes(b"XXXX" + bytes(data[4:]))
    with pytest.raises(FamilyError):
        hf.KeyedFunction.from_bytes(bytes(data[:-1]))


def test_bias_of_ideal_and_point_mass():
    assert hf.measure_bias(hf.all_functions_table(6), 3) == 0
    for t in (1, 2, 3, 4):
        assert hf.measure_bias(hf.constant_table(8), t) == 2 - Fraction(2, 2**t)


def test_construction_bias_within_budget():
    p = FamilyParams(8, 2, 0.25)
    assert hf.measure_family_bias(p) <= Fraction(1, 4)


def test_every_seed_enumerated_once():
    p = FamilyParams(6, 2, 0.4)
    rows = np.concatenate(list(hf.sample_space_table(p)))
    assert rows.shape == (2**p.seed_bits, 6)
    f = hf.KeyedFunction(p, 37)
    assert np.array_equal(rows[37], f.materialize())


def test_adaptive_advantage_bounded_by_bias():
    p = FamilyParams(6, 3, 0.25)
    table = np.concatenate(list(hf.sample_space_table(p)))
    assert hf.adaptive_advantage(table, 3) <= hf.measure_bias(table, 3)
    point = hf.constant_table(6)
    assert hf.adaptive_advantage(point, 3) == Fraction(7, 8)


def test_size_guard():
    with pytest.raises(FamilyError):
        hf.measure_bias(np.zeros((2, 64), dtype=np.uint8), 2)
    with pytest.raises(FamilyError):
        hf.measure_family_bias(FamilyParams(16, 4, 1e-6))


def test_key_length_report():
    p = FamilyParams.for_stegosystem(1000, 256, 2.0 ** -40)
    rep = hf.key_length(p)
    assert rep.seed_bits == p.seed_bits
    assert rep.prf_baseline_bits == pytest.approx(1000 * 40 * (8 + np.log2(1000)))
    assert rep.improvement > 1


def test_bad_params():
    with pytest.raises(FamilyError):
        FamilyParams(2, 3, 0.1)
    with pytest.raises(FamilyError):
        FamilyParams(8, 2, 1.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**60), st.integers(1, 30))
def test_bitstream_key_matches_seed(bits, blocks):
    p = FamilyParams.for_stegosystem(blocks, 4, 2.0 ** -10)
    bits %= 1 << p.seed_bits
    f = hf.from_bitstream(p, bits)
    assert f.a == bits >> p.r and f.b == bits & ((1 << p.r) - 1)
    j = bits % p.domain_size
    assert f.table.reshape(-1)[j] == f.eval_index(j)
