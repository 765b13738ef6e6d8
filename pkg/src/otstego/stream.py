"""Many messages from one master seed.

A counter-mode generator stretches the master seed into one long bit
string; each message consumes the next κ bits as a one-time key.  Block j of
the string is SHA-256(len(seed) || seed || j) and bits are read MSB-first, so
any prefix can be produced, and any suffix resumed from (block, offset).
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import onetime
from .channel import ChannelError, ChannelModel
from .fileio import atomic_write

BLOCK_BITS = 256
SESSION_FORMAT = "otstego-session"
SESSION_VERSION = 1


class StreamError(ValueError):
    pass


def fingerprint(seed: bytes) -> bytes:
    return hashlib.sha256(b"otstego seed fingerprint" + seed).digest()[:8]


def _block(seed: bytes, index: int) -> bytes:
    return hashlib.sha256(struct.pack(">I", len(seed)) + seed + struct.pack(">Q", index)).digest()


@dataclass(frozen=True)
class Aux:
    """Where the generator stands: next block and the bit offset inside it."""

    block: int
    offset: int
    seed_fingerprint: bytes

    @property
    def position(self) -> int:
        return self.block * BLOCK_BITS + self.offset

    @classmethod
    def at(cls, seed: bytes, position: int) -> Aux:
        block, offset = divmod(position, BLOCK_BITS)
        return cls(block, offset, fingerprint(seed))


def _bits(seed: bytes, start: int, count: int) -> np.ndarray:
    if count <= 0:
        return np.zeros(0, dtype=np.uint8)
    first = start // BLOCK_BITS
    last = (start + count - 1) // BLOCK_BITS
    raw = b"".join(_block(seed, j) for j in range(first, last + 1))
    bits = np.unpackbits(np.frombuffer(raw, np.uint8))
    lo = start - first * BLOCK_BITS
    return bits[lo:lo + count]


def expand(seed: bytes, y: int) -> np.ndarray:
    """The first y generator bits."""
    if y < 0:
        raise StreamError("output length must be non-negative")
    return _bits(seed, 0, y)


def resume(seed: bytes, aux: Aux, y: int) -> np.ndarray:
    """The y bits that follow the point recorded in ``aux``."""
    if aux.seed_fingerprint != fingerprint(seed):
        raise StreamError("aux state was produced by a different seed")
    if y < 0:
        raise StreamError("output length must be non-negative")
    return _bits(seed, aux.position, y)


def bits_to_int(bits: np.ndarray) -> int:
    return int("".join(map(str, bits.tolist())) or "0", 2)


@dataclass
class PrgState:
    seed: bytes
    counter: int = 0

    @property
    def aux(self) -> Aux:
        return Aux.at(self.seed, self.counter)

    def take(self, y: int) -> np.ndarray:
        out = resume(self.seed, self.aux, y)
        self.counter += y
        return out


@dataclass
class StreamSession:
    """One endpoint's state.  Not safe to share between threads."""

    prg: PrgState
    n: int
    alphabet_size: int
    alphabet_digest: bytes
    min_entropy: float
    eps_family: float = onetime.DEFAULT_EPS_FAMILY
    eps_code: float = onetime.DEFAULT_EPS_CODE
    scheme: str = "linear"
    history: list[str] = field(default_factory=list)
    # test hook: replaces the generator with any source of κ-bit integers
    bit_source: Callable[[int], int] | None = field(default=None, repr=False, compare=False)

    @classmethod
    def create(cls, seed: bytes, n: int, channel: ChannelModel, **kw) -> StreamSession:
        return cls(PrgState(bytes(seed)), n, channel.alphabet.size, channel.alphabet.digest(),
                   channel.declared_min_entropy, **kw)

    @property
    def params(self) -> onetime.StegoParams:
        return onetime.StegoParams(self.n, self.alphabet_size, self.min_entropy,
                                   self.eps_family, self.eps_code, self.scheme)

    def _bind(self, channel: ChannelModel) -> None:
        if channel.alphabet.digest() != self.alphabet_digest or channel.declared_min_entropy != self.min_entropy:
            raise ChannelError("channel does not match the session binding")

    def next_key(self, channel: ChannelModel) -> onetime.StegoKey:
        """Derive the next one-time key and advance the counter by κ."""
        self._bind(channel)
        params = self.params
        kappa = params.key_bits
        if self.bit_source is not None:
            bits = self.bit_source(kappa)
        else:
            bits = bits_to_int(self.prg.take(kappa))
        return onetime.key_from_bits(params, channel.alphabet, bits)

    def state(self) -> tuple:
        return (self.prg.counter, self.prg.aux, tuple(self.history))

    # -- persistence ---------------------------------------------------

    def to_dict(self) -> dict:
        aux = self.prg.aux
        return {
            "format": SESSION_FORMAT,
            "version": SESSION_VERSION,
            "seed": self.prg.seed.hex(),
            "fingerprint": aux.seed_fingerprint.hex(),
            "counter": self.prg.counter,
            "aux": [aux.block, aux.offset],
            "history": list(self.history),
            "params": {
                "n": self.n,
                "alphabet_size": self.alphabet_size,
                "alphabet_digest": self.alphabet_digest.hex(),
                "min_entropy": self.min_entropy,
                "eps_family": self.eps_family,
                "eps_code": self.eps_code,
                "scheme": self.scheme,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> StreamSession:
        if data.get("format") != SESSION_FORMAT or data.get("version") != SESSION_VERSION:
            raise StreamError("not a session file (or unsupported version)")
        seed = bytes.fromhex(data["seed"])
        if bytes.fromhex(data["fingerprint"]) != fingerprint(seed):
            raise StreamError("session seed fingerprint mismatch")
        prg = PrgState(seed, int(data["counter"]))
        if list(data["aux"]) != [prg.aux.block, prg.aux.offset]:
            raise StreamError("session aux state disagrees with its counter")
        p = data["params"]
        return cls(prg, int(p["n"]), int(p["alphabet_size"]), bytes.fromhex(p["alphabet_digest"]),
                   float(p["min_entropy"]), float(p["eps_family"]), float(p["eps_code"]), p["scheme"], list(data["history"]))

    def save(self, path) -> None:
        atomic_write(path, (json.dumps(self.to_dict(), indent=1) + "\n").encode("utf-8"))

    @classmethod
    def load(cls, path) -> StreamSession:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def se_stream(session: StreamSession, message, channel: ChannelModel, rng) -> onetime.Stegotext:
    key = session.next_key(channel)
    st = onetime.se(key, message, tuple(session.history), channel, rng)
    session.history.extend(st.symbols)
    return st


def sd_stream(session: StreamSession, stegotext, channel: ChannelModel):
    """Decode the next message.  The state advances even if decoding fails."""
    key = session.next_key(channel)
    ranks = stegotext.ranks if isinstance(stegotext, onetime.Stegotext) else tuple(stegotext)
    result = onetime.sd(key, ranks)
    session.history.extend(channel.alphabet.symbol(r) for r in ranks if 0 <= r < channel.alphabet.size)
    return result
