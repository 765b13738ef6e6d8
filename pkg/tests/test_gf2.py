import random

import pytest

from otstego import gf2
from otstego._irreducible import LOW_WEIGHT_IRREDUCIBLE


def test_clmul_matches_schoolbook():
    rng = random.Random(0)
    for bits in (3, 60, 700, 5000):
        a, b = rng.getrandbits(bits), rng.getrandbits(bits)
        assert gf2.clmul(a, b) == gf2._clmul_small(a, b)


def test_square_spreads_bits():
    rng = random.Random(1)
    for bits in (1, 64, 1000):
        a = rng.getrandbits(bits)
        assert gf2.square(a) == gf2._clmul_small(a, a)


def test_divmod_identity():
    rng = random.Random(2)
    a, b = rng.getrandbits(300), rng.getrandbits(90) | 1
    q, r = gf2.poly_divmod(a, b)
    assert gf2.clmul(q, b) ^ r == a
    assert gf2.degree(r) < gf2.degree(b)


def test_field_multiplicative_group_order():
    mod = gf2.irreducible(13)
    rng = random.Random(3)
    x = rng.getrandbits(13) or 1
    assert mod.pow(x, 2**13 - 1) == 1
    assert mod.mul(x, mod.pow(x, 2**13 - 2)) == 1


def test_mulx_and_sqr_agree_with_mul():
    mod = gf2.irreducible(163)
    rng = random.Random(4)
    a = rng.getrandbits(163)
    assert mod.mulx(a) == mod.mul(a, 2)
    assert mod.sqr(a) == mod.mul(a, a)


@pytest.mark.parametrize("r", [2, 3, 8, 17, 64, 113, 233, 256])
def test_table_entries_irreducible(r):
    assert gf2.is_irreducible(LOW_WEIGHT_IRREDUCIBLE[r])


def test_reducible_detected():
    assert not gf2.is_irreducible((4, 2, 0))  # (x^2+x+1)^2
    assert not gf2.is_irreducible((8, 0))


def test_swan_is_sound_on_small_degrees():
    for n in range(3, 90):
        for k in range(1, n):
            if gf2.swan_excludes(n, k):
                assert not gf2._rabin(gf2.Modulus((n, k, 0)))


def test_small_irreducible_count():
    # number of irreducible polynomials of degree 1..16 over GF(2)
    assert len(gf2.small_irreducibles()) == 8800


@pytest.mark.parametrize("r", [40, 97, 150, 200, 256])
def test_search_reproduces_table(r):
    assert gf2.search_irreducible(r) == LOW_WEIGHT_IRREDUCIBLE[r]


def test_search_beyond_table_and_cache(tmp_path, monkeypatch):
    monkeypatch.setenv(gf2.CACHE_ENV, str(tmp_path))
    gf2.irreducible.cache_clear()
    mod = gf2.irreducible(300)
    assert gf2._rabin(mod)
    assert (tmp_path / "moduli.json").exists()
    assert gf2._cached(300) == mod.exponents
    gf2.irreducible.cache_clear()


def test_cache_rejects_tampered_entry(tmp_path, monkeypatch):
    monkeypatch.setenv(gf2.CACHE_ENV, str(tmp_path))
    (tmp_path / "moduli.json").write_text('{"300": [300, 2, 0]}')
    assert gf2._cached(300) is None
