"""Binary polynomial arithmetic and the fields GF(2^r).

Polynomials over GF(2) are packed into Python ints: bit ``i`` holds the
coefficient of ``x**i``.  Large carry-less products go through an ordinary
integer multiplication after spreading every bit into its own 16- or 32-bit
slot, so slot sums never carry into their neighbours and the parity of each
slot is the GF(2) coefficient.
"""

from __future__ import annotations

import json
import os
from functools import lru_cache
from pathlib import Path

import numpy as np

try:
    import gmpy2

    _mpz = gmpy2.mpz
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _mpz = int

from ._irreducible import LOW_WEIGHT_IRREDUCIBLE

# low / high nibble of a byte with a zero interleaved after each bit
_SPREAD_LOW = bytes(sum(((b >> i) & 1) << (2 * i) for i in range(4)) for b in range(256))
_SPREAD_HIGH = bytes(sum(((b >> (i + 4)) & 1) << (2 * i) for i in range(4)) for b in range(256))

_SMALL = 64


def degree(a: int) -> int:
    """Degree of ``a``; the zero polynomial has degree -1."""
    return a.bit_length() - 1


def _clmul_small(a: int, b: int) -> int:
    if a.bit_length() < b.bit_length():
        a, b = b, a
    out = 0
    while b:
        low = b & -b
        out ^= a << (low.bit_length() - 1)
        b ^= low
    return out


def _spread(x: int, nbits: int, dtype: str) -> int:
    raw = np.frombuffer(x.to_bytes((nbits + 7) // 8, "little"), np.uint8)
    bits = np.unpackbits(raw, bitorder="little").astype(dtype)
    return _mpz(int.from_bytes(bits.tobytes(), "little"))


def _collect(z, nslots: int, dtype: str) -> int:
    width = np.dtype(dtype).itemsize
    raw = int(z).to_bytes(nslots * width, "little")
    parity = (np.frombuffer(raw, dtype) & 1).astype(np.uint8)
    return int.from_bytes(np.packbits(parity, bitorder="little").tobytes(), "little")


def clmul(a: int, b: int) -> int:
    """Carry-less product of two binary polynomials."""
    if a.bit_length() <= _SMALL or b.bit_length() <= _SMALL:
        return _clmul_small(a, b)
    na, nb = a.bit_length(), b.bit_length()
    dtype = "<u2" if min(na, nb) < (1 << 16) else "<u4"
    z = _spread(a, na, dtype) * _spread(b, nb, dtype)
    return _collect(z, na + nb, dtype)


def square(a: int) -> int:
    """``a * a`` over GF(2); squaring is linear so no multiplication is needed."""
    raw = a.to_bytes((a.bit_length() + 7) // 8, "little")
    out = bytearray(2 * len(raw))
    out[0::2] = raw.translate(_SPREAD_LOW)
    out[1::2] = raw.translate(_SPREAD_HIGH)
    return int.from_bytes(out, "little")


def poly_divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    q = 0
    db = b.bit_length()
    while a.bit_length() >= db:
        shift = a.bit_length() - db
        q ^= 1 << shift
        a ^= b << shift
    return q, a


def poly_gcd(a: int, b: int) -> int:
    while b:
        db = b.bit_length()
        while a.bit_length() >= db:
            a ^= b << (a.bit_length() - db)
        a, b = b, a
    return a


class Modulus:
    """A sparse irreducible polynomial and arithmetic in GF(2)[x] modulo it.

    ``exponents`` lists the nonzero terms in decreasing order, e.g.
    ``(8, 4, 3, 1, 0)`` for x^8 + x^4 + x^3 + x + 1.
    """

    def __init__(self, exponents):
        exponents = tuple(sorted(set(int(e) for e in exponents), reverse=True))
        if len(exponents) < 2 or exponents[-1] != 0:
            raise ValueError(f"not a usable modulus: {exponents}")
        self.exponents = exponents
        self.degree = exponents[0]
        self.low = exponents[1:]
        self.mask = (1 << self.degree) - 1
        self.value = sum(1 << e for e in exponents)

    def __repr__(self):
        return f"Modulus({self.exponents})"

    def __eq__(self, other):
        return isinstance(other, Modulus) and other.exponents == self.exponents

    def __hash__(self):
        return hash(self.exponents)

    def reduce(self, p: int) -> int:
        r = self.degree
        while p >> r:
            hi = p >> r
            p &= self.mask
            for e in self.low:
                p ^= hi << e
        return p

    def mul(self, a: int, b: int) -> int:
        return self.reduce(clmul(a, b))

    def sqr(self, a: int) -> int:
        return self.reduce(square(a))

    def mulx(self, a: int) -> int:
        a <<= 1
        if a >> self.degree:
            a ^= self.value
        return a

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            raise ValueError("negative exponent")
        result = 1
        base = self.reduce(a)
        for bit in bin(e)[2:]:
            result = self.sqr(result)
            if bit == "1":
                result = self.mul(result, base)
        return result


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(exponents, small_factor_degree: int = 16) -> bool:
    """Rabin's test, preceded by a cheap screen for factors of low degree."""
    mod = Modulus(exponents)
    r = mod.degree
    if r == 1:
        return True
    x = 2
    screen = min(small_factor_degree, r // 2)
    checkpoints = {r // q for q in _prime_factors(r)}
    acc = 1
    u = x
    for i in range(1, r + 1):
        u = mod.sqr(u)
        if u == x and i < r:
            return False
        if i <= screen:
            acc = mod.mul(acc, u ^ x)
            if i == screen and poly_gcd(mod.value, acc) != 1:
                return False
        if i in checkpoints and poly_gcd(mod.value, u ^ x) != 1:
            return False
    return u == x


def swan_excludes(n: int, k: int) -> bool:
    """True when Swan's theorem shows x^n + x^k + 1 has an even number of factors."""
    if n % 2 == 0 and k % 2 == 0:
        return True  # a perfect square
    if n % 2 == 1 and k % 2 == 1:
        k = n - k
    if n % 2 == 0:
        return n != 2 * k and (n * k // 2) % 4 in (0, 1)
    if (2 * n) % k:
        return n % 8 in (3, 5)
    return n % 8 in (1, 7)


SCREEN_DEGREE = 16


@lru_cache(maxsize=1)
def small_irreducibles(max_degree: int = SCREEN_DEGREE) -> np.ndarray:
    """Every irreducible polynomial of degree 1..max_degree, by sieving products."""
    size = 1 << (max_degree + 1)
    composite = np.zeros(size, dtype=bool)
    everything = np.arange(size, dtype=np.int64)
    for a in range(2, 1 << (max_degree // 2 + 1)):
        if composite[a]:
            continue
        da = a.bit_length() - 1
        others = everything[2 : 1 << (max_degree - da + 1)]
        prod = np.zeros_like(others)
        for i in range(da + 1):
            if (a >> i) & 1:
                prod ^= others << i
        composite[prod] = True
    composite[:2] = True
    return np.flatnonzero(~composite).astype(np.int64)


class _Screen:
    """Trial division of sparse candidates of one degree by all small irreducibles.

    Keeps x^e mod g for every small g as a vector, so testing a candidate is
    a handful of XORs over that vector.
    """

    def __init__(self, r: int):
        self.g = small_irreducibles()
        self.deg = np.array([int(x).bit_length() - 1 for x in self.g], dtype=np.int64)
        self.rows = [np.ones_like(self.g)]
        self.top = self._power(r)

    def _mulx(self, v):
        v = v << 1
        return v ^ (((v >> self.deg) & 1) * self.g)

    def _mulmod(self, a, b):
        out = np.zeros_like(a)
        for i in range(int(self.deg.max())):
            out ^= ((b >> i) & 1) * a
            a = self._mulx(a)
        return out

    def _power(self, e: int):
        result = np.ones_like(self.g)
        base = self._mulx(np.ones_like(self.g))
        for bit in bin(e)[2:]:
            result = self._mulmod(result, result)
            if bit == "1":
                result = self._mulmod(result, base)
        return result

    def row(self, k: int):
        while len(self.rows) <= k:
            self.rows.append(self._mulx(self.rows[-1]))
        return self.rows[k]

    def passes(self, exponents) -> bool:
        acc = self.top.copy()
        for e in exponents[1:]:
            acc ^= self.row(e)
        return bool(np.all(acc != 0))


def _rabin(mod: Modulus) -> bool:
    r = mod.degree
    x = 2
    checkpoints = {r // q for q in _prime_factors(r)}
    u = x
    for i in range(1, r + 1):
        u = mod.sqr(u)
        if u == x and i < r:
            return False
        if i in checkpoints and poly_gcd(mod.value, u ^ x) != 1:
            return False
    return u == x


def _candidates(r: int):
    for k in range(1, r // 2 + 1):
        yield (r, k, 0)
    for k3 in range(3, r):
        for k2 in range(2, k3):
            for k1 in range(1, k2):
                yield (r, k3, k2, k1, 0)


def search_irreducible(r: int) -> tuple[int, ...]:
    """Lowest-weight irreducible of degree ``r``.

    Trinomials x^r + x^k + 1 are tried with k increasing; failing those,
    pentanomials x^r + x^k3 + x^k2 + x^k1 + 1 ordered by k3, then k2, then k1.
    Candidates are filtered by Swan's theorem and by trial division before
    the full test.
    """
    if r < 1:
        raise ValueError("degree must be positive")
    if r == 1:
        return (1, 0)
    screen = _Screen(r) if r > 2 * SCREEN_DEGREE else None
    for exps in _candidates(r):
        if len(exps) == 3 and swan_excludes(r, exps[1]):
            continue
        if screen is None:
            if is_irreducible(exps):
                return exps
        elif screen.passes(exps) and _rabin(Modulus(exps)):
            return exps
    raise ArithmeticError(f"no irreducible trinomial or pentanomial of degree {r}")


CACHE_ENV = "OTSTEGO_CACHE_DIR"


def _cache_file() -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if root == "":
        return None
    if root is None:
        root = Path(os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache") / "otstego"
    return Path(root) / "moduli.json"


def _cached(r: int) -> tuple[int, ...] | None:
    path = _cache_file()
    try:
        entry = json.loads(path.read_text())[str(r)] if path else None
    except (OSError, ValueError, KeyError, TypeError):
        return None
    if not isinstance(entry, list) or not entry or entry[0] != r:
        return None
    exps = tuple(int(e) for e in entry)
    return exps if _rabin(Modulus(exps)) else None


def _remember(r: int, exps: tuple[int, ...]) -> None:
    path = _cache_file()
    if path is None:
        return
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        try:
            known = json.loads(path.read_text())
        except (OSError, ValueError):
            known = {}
        known[str(r)] = list(exps)
        tmp = path.with_suffix(f".{os.getpid()}.tmp")
        tmp.write_text(json.dumps(known, sort_keys=True))
        os.replace(tmp, path)
    except OSError:
        pass


@lru_cache(maxsize=None)
def irreducible(r: int) -> Modulus:
    """The fixed field modulus for GF(2^r).

    Shipped table entry for r <= 256; beyond that the lowest-weight search,
    memoized on disk (re-verified on load) because it takes seconds for
    r in the thousands.
    """
    exps = LOW_WEIGHT_IRREDUCIBLE.get(r)
    if exps is None:
        exps = _cached(r)
    if exps is None:
        exps = search_irreducible(r)
        _remember(r, exps)
    return Modulus(exps)
