"""Concatenated codes for a binary symmetric channel of crossover at most p.

Message bits are packed MSB-first into bytes, protected by a shortened
Reed-Solomon code over GF(256), and each byte is then sent through a short
binary inner code:

``linear``
    a fixed random [L, 8] linear code decoded by maximum likelihood over its
    256 codewords;
``repetition``
    each of the 8 bits repeated L times and decoded by majority.

An inner tie becomes an erasure for the outer decoder.  ``identity`` sends
the message bits unprotected (λ = n); it is what ``build`` returns for p = 0
and is also useful as a deliberately weak code.

``build`` picks the inner length and parity count that minimise λ subject to
an analytic bound on the decode-failure probability.  The bound assumes
independent bit errors each of probability at most p:

* inner symbol error probability for ``linear`` is the union bound
  Σ_w P[Bin(w, p) ≥ w/2] over nonzero codeword weights w (ties counted as
  errors); for ``repetition`` it is exact;
* an RS block with N symbols and r parity symbols decodes whenever
  2·errors + erasures ≤ r, so its failure probability is the trinomial tail.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import reedsolo
from scipy.special import gammaln
from scipy.stats import binom

SCHEMES = ("linear", "repetition", "identity")
DEFAULT_SCHEME = "linear"
DEFAULT_MAX_LENGTH = 1 << 20
RS_FIELD_SIZE = 255

_CODE_MAGIC = b"OTCS"
_CODE_VERSION = 1
_CODE_HEADER = struct.Struct(">4sHBQQddII")


class CodeError(ValueError):
    pass


class InfeasibleCodeError(CodeError):
    pass


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def capacity(p: float) -> float:
    """1 - H(p), the BSC capacity."""
    if not 0 <= p <= 0.5:
        raise CodeError("crossover probability must lie in [0, 1/2]")
    return 1.0 - binary_entropy(p)


# -- inner codes ----------------------------------------------------------

_BYTE_BITS = ((np.arange(256)[:, None] >> np.arange(7, -1, -1)) & 1).astype(np.uint8)


def _generator_bits(length: int, attempt: int) -> np.ndarray:
    need = 8 * length
    stream = b""
    block = 0
    while len(stream) * 8 < need:
        tag = b"otstego inner code" + struct.pack(">III", length, attempt, block)
        stream += hashlib.sha256(tag).digest()
        block += 1
    bits = np.unpackbits(np.frombuffer(stream, np.uint8))[:need]
    return bits.reshape(8, length)


@lru_cache(maxsize=None)
def linear_generator(length: int) -> np.ndarray:
    """The fixed 8 x L generator matrix for inner length L.

    Rows come from SHA-256 in counter mode; the first attempt whose 256
    codewords are pairwise distinct is used.
    """
    if length < 8:
        raise CodeError("linear inner code needs length >= 8")
    for attempt in range(1000):
        g = _generator_bits(length, attempt)
        weights = (_BYTE_BITS @ g % 2).sum(axis=1)
        if np.all(weights[1:] > 0):
            g.setflags(write=False)
            return g
    raise CodeError("could not find a full-rank generator")  # pragma: no cover


@lru_cache(maxsize=None)
def linear_codebook(length: int) -> np.ndarray:
    book = (_BYTE_BITS @ linear_generator(length)) % 2
    book = book.astype(np.uint8)
    book.setflags(write=False)
    return book


def _linear_inner_error(length: int, p: float) -> float:
    weights = linear_codebook(length).sum(axis=1)[1:].astype(int)
    thresholds = (weights + 1) // 2  # P[Bin(w,p) >= ceil(w/2)]
    total = float(np.sum(binom.sf(thresholds - 1, weights, p)))
    return min(1.0, total)


def _repetition_inner_rates(length: int, p: float) -> tuple[float, float]:
    """(error, erasure) probabilities for one byte under repetition-L."""
    wrong = float(binom.sf(length // 2, length, p))
    tie = float(binom.pmf(length // 2, length, p)) if length % 2 == 0 else 0.0
    right = 1.0 - wrong - tie
    erasure = 1.0 - (1.0 - tie) ** 8
    error = (1.0 - tie) ** 8 - right ** 8
    return max(error, 0.0), max(erasure, 0.0)


def inner_rates(scheme: str, length: int, p: float) -> tuple[float, float]:
    if scheme == "linear":
        return _linear_inner_error(length, p), 0.0
    if scheme == "repetition":
        return _repetition_inner_rates(length, p)
    raise CodeError(f"no inner code for scheme {scheme!r}")


# -- outer layer ----------------------------------------------------------

def block_sizes(data_symbols: int, parity: int) -> list[int]:
    """Split the data symbols into near-equal RS blocks of at most 255 total."""
    if data_symbols == 0:
        return []
    room = RS_FIELD_SIZE - parity
    if room < 1:
        raise CodeError("too many parity symbols for GF(256)")
    count = -(-data_symbols // room)
    base, extra = divmod(data_symbols, count)
    return [base + 1 if i < extra else base for i in range(count)]


def rs_block_failure(total: int, parity: int, error: float, erasure: float) -> float:
    """P[2E + X > parity] for ``total`` independent symbols."""
    correct = 1.0 - error - erasure
    if correct <= 0:
        return 1.0
    e = np.arange(parity // 2 + 1)[:, None]
    x = np.arange(parity + 1)[None, :]
    ok = (2 * e + x <= parity) & (e + x <= total)
    e_b, x_b = np.broadcast_arrays(e, x)
    e_v, x_v = e_b[ok].astype(float), x_b[ok].astype(float)
    rest = total - e_v - x_v
    with np.errstate(divide="ignore"):
        log_terms = (gammaln(total + 1) - gammaln(e_v + 1) - gammaln(x_v + 1) - gammaln(rest + 1)
                     + _xlogy(e_v, error) + _xlogy(x_v, erasure) + _xlogy(rest, correct))
    return float(min(1.0, max(0.0, 1.0 - np.exp(log_terms).sum())))


def _xlogy(k, q):
    if q == 0:
        return np.where(k == 0, 0.0, -np.inf)
    return k * math.log(q)


def outer_failure(data_symbols: int, parity: int, error: float, erasure: float) -> float:
    ok = 1.0
    for size in block_sizes(data_symbols, parity):
        ok *= 1.0 - rs_block_failure(size + parity, parity, error, erasure)
    return 1.0 - ok


# -- the code itself -------------------------------------------------------

@dataclass(frozen=True)
class CodeSpec:
    """An (n, λ, p, ε) code instance.  ``length`` is λ, the codeword bits."""

    n: int
    length: int
    p: float
    epsilon: float
    scheme: str
    inner_length: int = 0
    parity: int = 0
    failure_bound: float = field(default=0.0, compare=False)

    @property
    def data_symbols(self) -> int:
        return -(-self.n // 8) if self.scheme != "identity" else 0

    @property
    def blocks(self) -> list[int]:
        return block_sizes(self.data_symbols, self.parity) if self.scheme != "identity" else []

    @property
    def rate(self) -> float:
        return self.n / self.length if self.length else 1.0

    @property
    def capacity(self) -> float:
        return capacity(self.p)

    @property
    def symbol_bits(self) -> int:
        return {"linear": self.inner_length, "repetition": 8 * self.inner_length}.get(self.scheme, 1)

    @cached_property
    def _codecs(self) -> reedsolo.RSCodec | None:
        return reedsolo.RSCodec(self.parity) if self.parity else None

    # ---- encode -------------------------------------------------------

    def encode(self, message) -> np.ndarray:
        bits = _as_bits(message, self.n, "message")
        if self.scheme == "identity":
            return bits.copy()
        symbols = _pack(bits, self.data_symbols)
        coded = bytearray()
        offset = 0
        for size in self.blocks:
            chunk = symbols[offset:offset + size]
            offset += size
            coded += self._codecs.encode(chunk) if self._codecs else chunk
        sym = np.frombuffer(bytes(coded), np.uint8)
        if self.scheme == "linear":
            out = linear_codebook(self.inner_length)[sym]
        else:
            out = np.repeat(_BYTE_BITS[sym], self.inner_length, axis=1)
        return out.reshape(-1).astype(np.uint8)

    # ---- decode -------------------------------------------------------

    def decode(self, word) -> np.ndarray:
        return self.decode_many(_as_bits(word, self.length, "codeword")[None, :])[0]

    def decode_many(self, words) -> np.ndarray:
        """Decode a (trials, λ) array of received words; never rejects."""
        words = np.asarray(words, dtype=np.uint8)
        if words.ndim != 2 or words.shape[1] != self.length:
            raise CodeError(f"expected words of length {self.length}")
        if self.scheme == "identity":
            return words.copy()
        trials = words.shape[0]
        total_symbols = self.length // self.symbol_bits
        received = words.reshape(trials * total_symbols, self.symbol_bits)
        symbols, erased = self._inner_decode(received)
        symbols = symbols.reshape(trials, total_symbols)
        erased = erased.reshape(trials, total_symbols)
        out = np.empty((trials, self.n), dtype=np.uint8)
        for row in range(trials):
            data = self._outer_decode(symbols[row], erased[row])
            out[row] = np.unpackbits(np.frombuffer(data, np.uint8))[: self.n]
        return out

    def _inner_decode(self, received: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.scheme == "linear":
            signs = 1.0 - 2.0 * received.astype(np.float32)
            book = 1.0 - 2.0 * linear_codebook(self.inner_length).astype(np.float32)
            scores = signs @ book.T
            best = scores.max(axis=1)
            symbols = scores.argmax(axis=1).astype(np.uint8)
            erased = (scores == best[:, None]).sum(axis=1) > 1
            return symbols, erased
        votes = received.reshape(-1, 8, self.inner_length).sum(axis=2, dtype=np.int64)
        twice = 2 * votes
        bits = (twice > self.inner_length).astype(np.uint8)
        erased = (twice == self.inner_length).any(axis=1)
        symbols = np.packbits(bits, axis=1).reshape(-1)
        return symbols, erased

    def _outer_decode(self, symbols: np.ndarray, erased: np.ndarray) -> bytes:
        out = bytearray()
        offset = 0
        for size in self.blocks:
            width = size + self.parity
            chunk = bytearray(symbols[offset:offset + width].tobytes())
            holes = np.flatnonzero(erased[offset:offset + width]).tolist()
            offset += width
            for pos in holes:
                chunk[pos] = 0
            if self._codecs is not None and len(holes) <= self.parity:
                try:
                    fixed = self._codecs.decode(chunk, erase_pos=holes or None)[0]
                    out += fixed
                    continue
                except reedsolo.ReedSolomonError:
                    pass
            out += chunk[:size]  # systematic fallback keeps decoding total
        return bytes(out)

    # ---- serialization ------------------------------------------------

    def to_bytes(self) -> bytes:
        return _CODE_HEADER.pack(_CODE_MAGIC, _CODE_VERSION, SCHEMES.index(self.scheme),
                                 self.n, self.length, self.p, self.epsilon,
                                 self.inner_length, self.parity)

    @classmethod
    def from_bytes(cls, data: bytes) -> tuple[CodeSpec, int]:
        if len(data) < _CODE_HEADER.size:
            raise CodeError("truncated code block")
        magic, version, scheme, n, length, p, eps, inner, parity = _CODE_HEADER.unpack_from(data)
        if magic != _CODE_MAGIC or version != _CODE_VERSION or scheme >= len(SCHEMES):
            raise CodeError("not a code block")
        code = assemble(n, p, eps, SCHEMES[scheme], inner, parity)
        if code.length != length:
            raise CodeError("code block length does not match its parameters")
        return code, _CODE_HEADER.size


def _as_bits(value, expected: int, what: str) -> np.ndarray:
    bits = np.asarray(value, dtype=np.uint8).reshape(-1)
    if bits.size != expected:
        raise CodeError(f"{what} has {bits.size} bits, expected {expected}")
    if bits.size and bits.max() > 1:
        raise CodeError(f"{what} must contain only 0/1")
    return bits


def _pack(bits: np.ndarray, nbytes: int) -> bytearray:
    padded = np.zeros(nbytes * 8, dtype=np.uint8)
    padded[: bits.size] = bits
    return bytearray(np.packbits(padded).tobytes())


def assemble(n: int, p: float, epsilon: float, scheme: str, inner_length: int, parity: int) -> CodeSpec:
    """Build a CodeSpec from explicit layout parameters and compute its bound."""
    if scheme not in SCHEMES:
        raise CodeError(f"unknown scheme {scheme!r}")
    if n < 1:
        raise CodeError("message length must be positive")
    if scheme == "identity":
        bound = 1.0 - (1.0 - p) ** n
        return CodeSpec(n, n, p, epsilon, scheme, 0, 0, bound)
    data = -(-n // 8)
    sizes = block_sizes(data, parity)
    per_symbol = inner_length if scheme == "linear" else 8 * inner_length
    length = (data + parity * len(sizes)) * per_symbol
    error, erasure = inner_rates(scheme, inner_length, p)
    bound = outer_failure(data, parity, error, erasure)
    return CodeSpec(n, length, p, epsilon, scheme, inner_length, parity, bound)


def _inner_candidates(scheme: str):
    if scheme == "linear":
        return list(range(8, 64)) + list(range(64, 256, 2)) + list(range(256, 1025, 8))
    return list(range(1, 64, 2)) + list(range(65, 1025, 4))


@lru_cache(maxsize=256)
def build(n: int, p: float, epsilon: float, scheme: str = DEFAULT_SCHEME,
          max_length: int = DEFAULT_MAX_LENGTH) -> CodeSpec:
    """Smallest-λ code of the given scheme whose analytic failure bound is ≤ ε."""
    if not 0 <= p < 0.5:
        raise InfeasibleCodeError("crossover probability must be in [0, 1/2)")
    if not 0 < epsilon < 1:
        raise CodeError("epsilon must be in (0, 1)")
    if n < 1:
        raise CodeError("message length must be positive")
    if scheme not in SCHEMES:
        raise CodeError(f"unknown scheme {scheme!r}")
    if p == 0 or scheme == "identity":
        return assemble(n, p, epsilon, "identity", 0, 0)
    data = -(-n // 8)
    best = None
    for inner in _inner_candidates(scheme):
        per_symbol = inner if scheme == "linear" else 8 * inner
        if data * per_symbol > max_length:
            break
        if best is not None and data * per_symbol >= best[0]:
            break
        error, erasure = inner_rates(scheme, inner, p)
        if error + erasure >= 0.5:
            continue
        for parity in range(0, RS_FIELD_SIZE - 1):
            length = (data + parity * len(block_sizes(data, parity))) * per_symbol
            if best is not None and length >= best[0]:
                break
            if outer_failure(data, parity, error, erasure) <= epsilon:
                best = (length, inner, parity)
                break
    if best is None or best[0] > max_length:
        raise InfeasibleCodeError(
            f"no {scheme} code with length <= {max_length} reaches failure {epsilon} at p={p}")
    return assemble(n, p, epsilon, scheme, best[1], best[2])
