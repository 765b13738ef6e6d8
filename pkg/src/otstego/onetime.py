"""The one-time stegosystem: key generation, embedding and extraction.

Every codeword bit is hidden in one channel symbol by rejection sampling:
draw from C_h and keep the draw if the keyed bit f_i(c) equals the bit to
send, otherwise emit a second draw from the same history whatever it maps
to.  The receiver reads f_i(c_i) off each symbol and lets the code absorb
the positions where the second draw missed.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import ecc
from .channel import Alphabet, ChannelError, ChannelModel
from .fileio import atomic_write
from .hashfamily import FamilyParams, KeyedFunction, from_bitstream, key_length, keygen

DEFAULT_EPS_FAMILY = 2.0 ** -20
DEFAULT_EPS_CODE = 1e-3

_KEY_MAGIC = b"OTSK"
_KEY_VERSION = 1
_KEY_PARAMS = struct.Struct(">dI32s")
_TEXT_MAGIC = b"OTST"
_TEXT_VERSION = 1
_TEXT_HEADER = struct.Struct(">4sHQ32sB")


class StegoError(ValueError):
    pass


class _Fail:
    """The decoder's failure token; returned only for malformed input."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "FAIL"

    def __bool__(self):
        return False


FAIL = _Fail()


def tau(delta: float) -> float:
    return 0.25 * (1.0 - 2.0 ** (-delta))


def success_probability_bound(delta: float) -> tuple[float, float]:
    """(tau, 1/2 + tau): per-bit success guaranteed under a truly random f."""
    if delta < 0:
        raise StegoError("min-entropy must be non-negative")
    t = tau(delta)
    return t, 0.5 + t


@dataclass(frozen=True)
class StegoParams:
    """Public parameters; everything here is derivable without the key."""

    n: int
    alphabet_size: int
    min_entropy: float
    eps_family: float = DEFAULT_EPS_FAMILY
    eps_code: float = DEFAULT_EPS_CODE
    scheme: str = ecc.DEFAULT_SCHEME

    def __post_init__(self):
        if self.n < 1:
            raise StegoError("message length must be positive")
        for name in ("eps_family", "eps_code"):
            if not 0 < getattr(self, name) < 1:
                raise StegoError(f"{name} must lie in (0, 1)")
        if self.min_entropy <= 0:
            raise ecc.InfeasibleCodeError("a channel with zero min-entropy cannot carry bits")

    @property
    def tau(self) -> float:
        return tau(self.min_entropy)

    @property
    def crossover(self) -> float:
        return 0.5 - self.tau

    @property
    def code(self) -> ecc.CodeSpec:
        return ecc.build(self.n, self.crossover, self.eps_code, self.scheme)

    @property
    def family(self) -> FamilyParams:
        return FamilyParams.for_stegosystem(self.code.length, self.alphabet_size, self.eps_family)

    @property
    def key_bits(self) -> int:
        return self.family.seed_bits

    @classmethod
    def for_channel(cls, n: int, channel: ChannelModel, **kw) -> StegoParams:
        return cls(n, channel.alphabet.size, channel.declared_min_entropy, **kw)


@dataclass(frozen=True)
class StegoKey:
    f: KeyedFunction
    code: ecc.CodeSpec
    min_entropy: float
    alphabet_digest: bytes

    def __post_init__(self):
        fam = self.f.params
        if fam.blocks != self.code.length or fam.t != 2 * self.code.length:
            raise StegoError("family does not match the code length")
        if self.code.p < 0.5 - self.tau - 1e-15:
            raise StegoError("code crossover below what the channel guarantees")

    @property
    def tau(self) -> float:
        return tau(self.min_entropy)

    @property
    def length(self) -> int:
        return self.code.length

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def alphabet_size(self) -> int:
        return self.f.params.alphabet_size

    @property
    def table(self) -> np.ndarray:
        return self.f.table

    def check_channel(self, channel: ChannelModel) -> None:
        if channel.alphabet.digest() != self.alphabet_digest:
            raise ChannelError("channel alphabet does not match the key")
        if channel.declared_min_entropy < self.min_entropy:
            raise ChannelError("channel min-entropy is below the key's design value")

    def to_bytes(self) -> bytes:
        head = _KEY_PARAMS.pack(self.min_entropy, self.alphabet_size, self.alphabet_digest)
        return (_KEY_MAGIC + struct.pack(">H", _KEY_VERSION) + head
                + self.f.to_bytes() + self.code.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> StegoKey:
        if data[:4] != _KEY_MAGIC or len(data) < 6 + _KEY_PARAMS.size:
            raise StegoError("not a stego key file")
        (version,) = struct.unpack(">H", data[4:6])
        if version != _KEY_VERSION:
            raise StegoError(f"unsupported key version {version}")
        delta, s, digest = _KEY_PARAMS.unpack_from(data, 6)
        body = data[6 + _KEY_PARAMS.size:]
        f, used_f = KeyedFunction.from_bytes(body, alphabet_size=s)
        code, used_c = ecc.CodeSpec.from_bytes(body[used_f:])
        if used_f + used_c != len(body):
            raise StegoError("bad key file length")
        return cls(f, code, delta, digest)

    def save(self, path) -> None:
        atomic_write(path, self.to_bytes())

    @classmethod
    def load(cls, path) -> StegoKey:
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


@dataclass(frozen=True)
class KeyCost:
    n: int
    alphabet_size: int
    min_entropy: float
    eps_family: float
    length: int
    key_bits: int
    asymptotic_bits: float
    prf_baseline_bits: float

    @property
    def improvement(self) -> float:
        return self.prf_baseline_bits / self.key_bits

    @property
    def bits_per_message_bit(self) -> float:
        return self.key_bits / self.n


def key_cost(params: StegoParams) -> KeyCost:
    """Key bits this construction spends next to the PRF-per-symbol baseline (k = log2 1/eps_F)."""
    report = key_length(params.family)
    return KeyCost(params.n, params.alphabet_size, params.min_entropy, params.eps_family,
                   params.code.length, report.seed_bits, report.asymptotic_bits,
                   report.prf_baseline_bits)


def sk(n: int, channel: ChannelModel, rng, eps_family: float = DEFAULT_EPS_FAMILY,
       eps_code: float = DEFAULT_EPS_CODE, scheme: str = ecc.DEFAULT_SCHEME) -> StegoKey:
    """Size the code and family for this channel and draw a fresh key."""
    params = StegoParams.for_channel(n, channel, eps_family=eps_family, eps_code=eps_code, scheme=scheme)
    return key_from_params(params, channel.alphabet, keygen(params.family, rng))


def key_from_params(params: StegoParams, alphabet: Alphabet, f: KeyedFunction) -> StegoKey:
    return StegoKey(f, params.code, params.min_entropy, alphabet.digest())


def key_from_bits(params: StegoParams, alphabet: Alphabet, bits: int) -> StegoKey:
    """Deterministic key from externally supplied seed bits."""
    return key_from_params(params, alphabet, from_bitstream(params.family, bits))


# -- rejection sampling ----------------------------------------------------

def _bit_lookup(f_i) -> Callable[[int], int]:
    if callable(f_i):
        return f_i
    return lambda rank: int(f_i[rank])


def rejsam(f_i, channel: ChannelModel, history: Sequence[int], bit: int, rng,
           *, exact_draws: list | None = None) -> int:
    """One symbol rank hiding ``bit`` under ``f_i`` at the given history (ranks).

    At most two draws are made, both at the same history.
    """
    lookup = _bit_lookup(f_i)
    first = channel.sample(history, rng)
    if exact_draws is not None:
        exact_draws.append(first)
    if lookup(first) == bit:
        return first
    second = channel.sample(history, rng)
    if exact_draws is not None:
        exact_draws.append(second)
    return second


def rejsam_exact_dist(f_i, probabilities: Sequence, bit: int) -> list:
    """Output distribution of :func:`rejsam` for an explicit channel vector.

    A symbol c with f(c) = bit gets p_c (1 + miss); any other symbol gets
    p_c * miss, where miss = P[f(c') != bit].  Exact if the inputs are
    Fractions.
    """
    probs = list(probabilities)
    total = sum(probs)
    if isinstance(total, Fraction) or all(isinstance(p, int) for p in probs):
        if total != 1:
            raise StegoError("channel vector does not sum to 1")
    elif abs(total - 1.0) > 1e-12:
        raise StegoError("channel vector does not sum to 1")
    lookup = _bit_lookup(f_i)
    hits = [lookup(c) == bit for c in range(len(probs))]
    miss = sum(p for p, h in zip(probs, hits) if not h)
    return [p * (1 + miss) if h else p * miss for p, h in zip(probs, hits)]


# -- embed / extract -------------------------------------------------------

@dataclass(frozen=True)
class Stegotext:
    ranks: tuple[int, ...]
    alphabet: Alphabet
    history: tuple[str, ...] = ()

    @property
    def symbols(self) -> list[str]:
        return [self.alphabet.symbol(r) for r in self.ranks]

    def __len__(self):
        return len(self.ranks)

    def to_bytes(self) -> bytes:
        width = rank_width(self.alphabet.size)
        header = _TEXT_HEADER.pack(_TEXT_MAGIC, _TEXT_VERSION, len(self.ranks), self.alphabet.digest(), width)
        return header + b"".join(r.to_bytes(width, "big") for r in self.ranks)

    @classmethod
    def from_bytes(cls, data: bytes, alphabet: Alphabet) -> Stegotext:
        if len(data) < _TEXT_HEADER.size:
            raise StegoError("truncated stegotext")
        magic, version, count, digest, width = _TEXT_HEADER.unpack_from(data)
        if magic != _TEXT_MAGIC or version != _TEXT_VERSION:
            raise StegoError("not a stegotext file")
        if digest != alphabet.digest():
            raise StegoError("stegotext alphabet does not match")
        body = data[_TEXT_HEADER.size:]
        if len(body) != count * width:
            raise StegoError("stegotext length does not match its header")
        ranks = tuple(int.from_bytes(body[i:i + width], "big") for i in range(0, len(body), width))
        if any(r >= alphabet.size for r in ranks):
            raise StegoError("rank outside the alphabet")
        return cls(ranks, alphabet)


def rank_width(size: int) -> int:
    return max(1, math.ceil(math.log2(size) / 8)) if size > 1 else 1


def se(key: StegoKey, message, history: Sequence[str], channel: ChannelModel, rng) -> Stegotext:
    """Embed ``message`` (n bits) starting from ``history``."""
    key.check_channel(channel)
    bits = np.asarray(message, dtype=np.uint8).reshape(-1)
    if bits.size != key.n:
        raise StegoError(f"message has {bits.size} bits, key expects {key.n}")
    codeword = key.code.encode(bits)
    ranks = embed_bits(key.table, codeword, channel.alphabet.ranks(history), channel, rng)
    return Stegotext(ranks, channel.alphabet, tuple(history))


def embed_bits(table, bits, history: Sequence[int], channel: ChannelModel, rng,
               draws: list | None = None) -> tuple[int, ...]:
    """Hide bit i under row i of ``table``; the history grows by emitted symbols only."""
    running = list(history)
    out = []
    for i, bit in enumerate(np.asarray(bits).tolist()):
        row = table[i]
        c = channel.sample(running, rng)
        if draws is not None:
            draws.append(tuple(running))
        if row[c] != bit:
            c = channel.sample(running, rng)
            if draws is not None:
                draws.append(tuple(running))
        out.append(c)
        running.append(c)
    return tuple(out)


def extract_bits(key: StegoKey, ranks: Sequence[int]) -> np.ndarray:
    """The noisy codeword f_1(c_1) ... f_λ(c_λ)."""
    idx = np.asarray(ranks, dtype=np.int64)
    return key.table[np.arange(idx.size), idx].astype(np.uint8)


def sd(key: StegoKey, stegotext):
    """Recover the n message bits, or FAIL if the input has the wrong length."""
    ranks = stegotext.ranks if isinstance(stegotext, Stegotext) else tuple(stegotext)
    if len(ranks) != key.length or any(not 0 <= r < key.alphabet_size for r in ranks):
        return FAIL
    return key.code.decode(extract_bits(key, ranks))
