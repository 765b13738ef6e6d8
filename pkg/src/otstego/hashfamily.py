"""Almost t-wise independent Boolean functions from the powering sample space.

A key is a pair (a, b) of elements of GF(2^r).  The function value at domain
position j is the GF(2) inner product <a^j, b> of their coordinate vectors in
the polynomial basis.  Every nonempty parity over positions S is then the
inner product of b with sum_{j in S} a^j, a nonzero polynomial in a of degree
below m, so it is biased by at most (m - 1) / 2^r.  A sample space with bias
eta restricted to any t positions is within L1 distance 2^(t/2) * eta of
uniform, which is how r is sized from (m, t, epsilon).
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import gf2

KEY_MAGIC = b"OTKF"
KEY_VERSION = 1
_HEADER = struct.Struct(">4sHQQdQ")

# exhaustive measurement guards
MAX_BIAS_DOMAIN = 16
MAX_BIAS_T = 4
MAX_BIAS_SEED_BITS = 24


class FamilyError(ValueError):
    pass


def field_degree(domain_size: int, t: int, epsilon: float) -> int:
    """Smallest r with domain_size / 2^r <= epsilon * 2^(-t/2), decided exactly."""
    eps = Fraction(epsilon)
    # (2^r * eps)^2 >= m^2 * 2^t, all integers/rationals
    target = Fraction(domain_size**2 * 2**t)
    r = max(1, math.floor(math.log2(domain_size) + t / 2 + math.log2(1 / epsilon)) - 2)
    while Fraction(4**r) * eps * eps < target:
        r += 1
    while r > 1 and Fraction(4 ** (r - 1)) * eps * eps >= target:
        r -= 1
    return r


@dataclass(frozen=True)
class FamilyParams:
    """Size of an (m, t, epsilon)-independent family.

    ``alphabet_size`` only fixes how pairs (i, sigma) map onto positions:
    position = (i - 1) * alphabet_size + rank(sigma).
    """

    domain_size: int
    t: int
    epsilon: float
    alphabet_size: int = 1

    def __post_init__(self):
        if self.t < 1 or self.domain_size < self.t:
            raise FamilyError(f"need m >= t >= 1, got m={self.domain_size}, t={self.t}")
        if not 0.0 < self.epsilon < 1.0:
            raise FamilyError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.alphabet_size < 1 or self.domain_size % self.alphabet_size:
            raise FamilyError("alphabet_size must divide the domain size")

    @classmethod
    def for_stegosystem(cls, blocks: int, alphabet_size: int, epsilon: float) -> FamilyParams:
        """Domain {1..blocks} x alphabet, independence order 2 * blocks."""
        return cls(blocks * alphabet_size, 2 * blocks, epsilon, alphabet_size)

    @property
    def domain_bits(self) -> float:
        return math.log2(self.domain_size)

    @property
    def blocks(self) -> int:
        return self.domain_size // self.alphabet_size

    @cached_property
    def r(self) -> int:
        return field_degree(self.domain_size, self.t, self.epsilon)

    @property
    def seed_bits(self) -> int:
        return 2 * self.r

    def position(self, i: int, rank: int) -> int:
        if not 1 <= i <= self.blocks or not 0 <= rank < self.alphabet_size:
            raise FamilyError(f"position ({i}, {rank}) outside 1..{self.blocks} x 0..{self.alphabet_size - 1}")
        return (i - 1) * self.alphabet_size + rank


def _element_bits(x: int, r: int) -> np.ndarray:
    raw = np.frombuffer(x.to_bytes((r + 7) // 8, "little"), np.uint8)
    return np.unpackbits(raw, bitorder="little")[:r]


def _hankel_sequence(b: int, mod: gf2.Modulus) -> np.ndarray:
    """h[s] = <x^s mod f, b> for s = 0 .. 2r-2."""
    r = mod.degree
    h = np.zeros(2 * r - 1, dtype=np.uint8)
    h[:r] = _element_bits(b, r)
    step = r - mod.low[0]
    s = r
    while s < 2 * r - 1:
        stop = min(s + step, 2 * r - 1)
        acc = np.zeros(stop - s, dtype=np.uint8)
        for e in mod.low:
            acc ^= h[s - r + e : stop - r + e]
        h[s:stop] = acc
        s = stop
    return h


@dataclass(frozen=True)
class KeyedFunction:
    """One member of the family; ``seed`` holds a (high r bits) then b."""

    params: FamilyParams
    seed: int

    def __post_init__(self):
        if not 0 <= self.seed < (1 << self.params.seed_bits):
            raise FamilyError("seed does not fit in the family's seed length")

    @property
    def modulus(self) -> gf2.Modulus:
        return gf2.irreducible(self.params.r)

    @property
    def a(self) -> int:
        return self.seed >> self.params.r

    @property
    def b(self) -> int:
        return self.seed & ((1 << self.params.r) - 1)

    def eval_index(self, j: int) -> int:
        """Bit at a raw domain position, computed lazily by square-and-multiply."""
        if not 0 <= j < self.params.domain_size:
            raise FamilyError(f"position {j} outside 0..{self.params.domain_size - 1}")
        return (self.modulus.pow(self.a, j) & self.b).bit_count() & 1

    def eval(self, i: int, rank: int) -> int:
        """f_i(sigma) for block i (1-based) and symbol rank."""
        return self.eval_index(self.params.position(i, rank))

    @cached_property
    def table(self) -> np.ndarray:
        """All m bits, shape (blocks, alphabet_size); see :meth:`materialize`."""
        p = self.params
        return self.materialize().reshape(p.blocks, p.alphabet_size)

    def materialize(self, baby_steps: int | None = None) -> np.ndarray:
        """Every position's bit via baby-step/giant-step powers of a.

        With j = q*K + u, <a^(qK) a^u, b> = G_q^T H B_u where H is the Hankel
        matrix of h[s] = <x^s mod f, b>, so only about 2*sqrt(m) field
        multiplications are needed and the rest is one matrix product.
        """
        m, r = self.params.domain_size, self.params.r
        mod = self.modulus
        a = self.a
        K = baby_steps or max(1, math.isqrt(m) // 2)
        K = min(K, m)
        Q = -(-m // K)
        baby = [1]
        for _ in range(K - 1):
            baby.append(mod.mul(baby[-1], a))
        stride = mod.mul(baby[-1], a)
        giant = [1]
        for _ in range(Q - 1):
            giant.append(mod.mul(giant[-1], stride))
        B = np.stack([_element_bits(x, r) for x in baby]).astype(np.float32)
        G = np.stack([_element_bits(x, r) for x in giant]).astype(np.float32)
        H = np.lib.stride_tricks.sliding_window_view(_hankel_sequence(self.b, mod), r)
        HB = np.empty((r, K), dtype=np.float32)
        chunk = max(1, (1 << 22) // r)
        for lo in range(0, r, chunk):
            HB[lo : lo + chunk] = np.mod(H[lo : lo + chunk].astype(np.float32) @ B.T, 2)
        S = np.mod(G @ HB, 2).astype(np.uint8)
        return S.reshape(-1)[:m]

    def to_bytes(self) -> bytes:
        p = self.params
        header = _HEADER.pack(KEY_MAGIC, KEY_VERSION, p.domain_size, p.t, p.epsilon, p.r)
        nbits = p.seed_bits
        nbytes = (nbits + 7) // 8
        # seed bits left-aligned, zero padded at the end
        return header + (self.seed << (8 * nbytes - nbits)).to_bytes(nbytes, "big")

    @classmethod
    def from_bytes(cls, data: bytes, alphabet_size: int = 1) -> tuple[KeyedFunction, int]:
        """Parse a key block; returns the function and the number of bytes used."""
        if len(data) < _HEADER.size:
            raise FamilyError("truncated key header")
        magic, version, m, t, eps, r = _HEADER.unpack_from(data)
        if magic != KEY_MAGIC or version != KEY_VERSION:
            raise FamilyError("not a keyed-function block")
        params = FamilyParams(m, t, eps, alphabet_size)
        if params.r != r:
            raise FamilyError(f"field degree {r} does not match parameters (expected {params.r})")
        nbits = 2 * r
        nbytes = (nbits + 7) // 8
        end = _HEADER.size + nbytes
        if len(data) < end:
            raise FamilyError("truncated key seed")
        raw = int.from_bytes(data[_HEADER.size : end], "big")
        pad = 8 * nbytes - nbits
        if raw & ((1 << pad) - 1):
            raise FamilyError("nonzero seed padding")
        return cls(params, raw >> pad), end


def keygen(params: FamilyParams, rng) -> KeyedFunction:
    """Uniform seed from ``rng.getrandbits``."""
    return KeyedFunction(params, rng.getrandbits(params.seed_bits))


def from_bitstream(params: FamilyParams, bits: int) -> KeyedFunction:
    """Key from exactly ``seed_bits`` externally supplied bits (first bit = MSB)."""
    return KeyedFunction(params, bits)


@dataclass(frozen=True)
class KeyLengthReport:
    seed_bits: int
    field_degree: int
    asymptotic_bits: float
    prf_baseline_bits: float

    @property
    def improvement(self) -> float:
        return self.prf_baseline_bits / self.seed_bits


def _iterated_log2(x: float, times: int) -> float:
    for _ in range(times):
        if x <= 1.0:
            return 0.0
        x = math.log2(x)
    return max(x, 0.0)


def prf_baseline_bits(blocks: int, alphabet_size: int, k: float) -> float:
    """Pseudorandom bits a PRF-per-symbol scheme spends: lambda*k*(log|S| + log lambda)."""
    return blocks * k * (math.log2(alphabet_size) + math.log2(blocks))


def key_length(params: FamilyParams) -> KeyLengthReport:
    """Exact seed length next to the asymptotic expression and the PRF baseline.

    The asymptotic expression is 2[lambda + log 1/eps + logloglog |Sigma|] with
    the o(1) term dropped and the triple log clamped at zero for tiny alphabets.
    """
    lam = params.blocks
    s = params.alphabet_size
    log_inv_eps = math.log2(1 / params.epsilon)
    formula = 2 * (lam + log_inv_eps + _iterated_log2(s, 3))
    return KeyLengthReport(
        seed_bits=params.seed_bits,
        field_degree=params.r,
        asymptotic_bits=formula,
        prf_baseline_bits=prf_baseline_bits(lam, s, log_inv_eps),
    )


# --- exhaustive measurement on small instances ---------------------------


def sample_space_table(params: FamilyParams, chunk: int = 1 << 16):
    """Yield the family's functions as bit rows, every seed exactly once.

    Rows come in chunks of shape (n, m); seed (a, b) is row a * 2^r + b.
    """
    _guard(params.domain_size, params.t, params.seed_bits)
    r, m = params.r, params.domain_size
    mod = gf2.irreducible(r)
    q = 1 << r
    # powers[a, j] = a^j as field element integers
    powers = np.empty((q, m), dtype=np.int64)
    for a in range(q):
        x = 1
        for j in range(m):
            powers[a, j] = x
            x = mod.mul(x, a)
    bvals = np.arange(q, dtype=np.int64)
    per_a = max(1, chunk // q)
    for lo in range(0, q, per_a):
        block = powers[lo : lo + per_a]
        anded = block[:, None, :] & bvals[None, :, None]
        yield (_popcount_parity(anded).reshape(-1, m)).astype(np.uint8)


def _popcount_parity(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x.astype(np.uint64)) & 1


def all_functions_table(m: int) -> np.ndarray:
    """Every Boolean function on m positions (the ideal family)."""
    _guard(m, 1, m)
    idx = np.arange(1 << m, dtype=np.int64)
    return ((idx[:, None] >> np.arange(m)) & 1).astype(np.uint8)


def constant_table(m: int, value: int = 0) -> np.ndarray:
    return np.full((1, m), value, dtype=np.uint8)


def _guard(m: int, t: int, seed_bits: int):
    if m > MAX_BIAS_DOMAIN or t > MAX_BIAS_T or seed_bits > MAX_BIAS_SEED_BITS:
        raise FamilyError(
            f"instance too large for exhaustive enumeration "
            f"(m={m} <= {MAX_BIAS_DOMAIN}, t={t} <= {MAX_BIAS_T}, "
            f"seed bits={seed_bits} <= {MAX_BIAS_SEED_BITS} required)"
        )


def _as_chunks(table):
    if isinstance(table, np.ndarray):
        yield table
    else:
        yield from table


def pattern_counts(table, t: int) -> tuple[list[tuple[int, ...]], np.ndarray, int]:
    """Histogram of the t-bit pattern on every t-subset of positions.

    Returns (subsets, counts of shape (len(subsets), 2^t), number of functions).
    Bit n of a pattern code is the value at the n-th smallest position.
    """
    counts = None
    total = 0
    for rows in _as_chunks(table):
        rows = np.asarray(rows, dtype=np.int64)
        if counts is None:
            m = rows.shape[1]
            _guard(m, t, 0)
            subsets = list(itertools.combinations(range(m), t))
            idx = np.array(subsets, dtype=np.int64)
            weights = 1 << np.arange(t, dtype=np.int64)
            offsets = np.arange(len(subsets), dtype=np.int64) << t
            counts = np.zeros((len(subsets), 1 << t), dtype=np.int64)
        codes = rows[:, idx] @ weights
        flat = np.bincount((codes + offsets).ravel(), minlength=len(subsets) << t)
        counts += flat.reshape(len(subsets), 1 << t)
        total += rows.shape[0]
    return subsets, counts, total


def measure_bias(table, t: int) -> Fraction:
    """Max over t-subsets of sum_alpha |Pr_f[pattern = alpha] - 2^-t|, exactly."""
    _, counts, total = pattern_counts(table, t)
    # sum |c/N - 2^-t| = sum |c*2^t - N| / (N*2^t)
    l1 = np.abs(counts * (1 << t) - total).sum(axis=1)
    return Fraction(int(l1.max()), total << t)


def measure_family_bias(params: FamilyParams) -> Fraction:
    return measure_bias(sample_space_table(params), params.t)


def adaptive_advantage(table, t: int, reference=None) -> Fraction:
    """Best advantage of an unbounded adversary making t adaptive queries.

    The adversary tells a uniformly drawn row of ``table`` from a uniformly
    drawn row of ``reference`` (all functions when omitted).  Solved by
    exhaustive game-tree search: at a leaf the adversary accepts exactly when
    the family is the likelier source, and at an inner node it picks the next
    query maximizing the summed value of both answers.  Both orientations of
    the acceptance bit are tried.
    """
    subsets, fam, fam_total = pattern_counts(table, t)
    m = max(q[-1] for q in subsets) + 1
    index = {q: k for k, q in enumerate(subsets)}
    if reference is not None:
        _, ref, ref_total = pattern_counts(reference, t)

    def leaf(assign) -> Fraction:
        k = index[tuple(p for p, _ in assign)]
        code = sum(bit << n for n, (_, bit) in enumerate(assign))
        pf = Fraction(int(fam[k, code]), fam_total)
        pr = Fraction(1, 1 << t) if reference is None else Fraction(int(ref[k, code]), ref_total)
        return pf - pr

    memo: dict = {}

    def value(assign, sign) -> Fraction:
        key = (assign, sign)
        if key not in memo:
            if len(assign) == t:
                memo[key] = max(Fraction(0), sign * leaf(assign))
            else:
                used = {p for p, _ in assign}
                memo[key] = max(
                    sum(value(tuple(sorted(assign + ((q, bit),))), sign) for bit in (0, 1))
                    for q in range(m)
                    if q not in used
                )
        return memo[key]

    return max(value((), 1), value((), -1))
