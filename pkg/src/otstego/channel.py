"""History-dependent channel distributions over a finite alphabet.

Three kinds of channel are supported:

* ``uniform``: every symbol equally likely regardless of history.
* ``table``: one fixed distribution, independent of history.
* ``markov``: order-k counts, with each conditional mixed toward uniform just
  enough that no symbol is likelier than 2^-delta.  Histories shorter than k
  use the lower-order counts gathered from the same corpus; contexts never
  seen in training fall back to uniform.

Probabilities are held exactly as fractions and mirrored as doubles for
sampling.  Symbols are strings; internally histories are tuples of ranks.
"""

from __future__ import annotations

import bisect
import hashlib
import json
import math
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

FORMAT_NAME = "otstego-channel"
FORMAT_VERSION = 1
MAX_STATES = 200_000


class ChannelError(ValueError):
    pass


class MalformedHistoryError(ChannelError):
    pass


class UnsupportedModelError(ChannelError):
    pass


class UnachievableFloorError(ChannelError):
    pass


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(self.symbols) < 2:
            raise ChannelError("an alphabet needs at least two symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise ChannelError("alphabet symbols must be distinct")
        object.__setattr__(self, "_ranks", {s: i for i, s in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def rank(self, symbol: str) -> int:
        try:
            return self._ranks[symbol]
        except KeyError:
            raise MalformedHistoryError(f"symbol {symbol!r} is not in the alphabet") from None

    def ranks(self, symbols: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.rank(s) for s in symbols)

    def symbol(self, rank: int) -> str:
        return self.symbols[rank]

    def digest(self) -> bytes:
        """SHA-256 of the canonical symbol listing; binds files to an alphabet."""
        return hashlib.sha256(json.dumps(list(self.symbols)).encode("utf-8")).digest()


def min_entropy_of(probs: Sequence) -> float:
    """H_inf = -log2 max p."""
    top = max(probs)
    return -math.log2(top) if top < 1 else 0.0


def floor_probability(delta: float) -> Fraction:
    """2^-delta as the exact value of the nearest double; the enforced cap."""
    return Fraction(2.0 ** (-delta))


def mixing_weight(probs: Sequence[Fraction], delta: float) -> Fraction:
    """Least w with max((1-w) p + w/s) <= 2^-delta."""
    s = len(probs)
    cap = floor_probability(delta)
    top = max(probs)
    if top <= cap:
        return Fraction(0)
    return (top - cap) / (top - Fraction(1, s))


class ChannelModel:
    """An immutable channel family C_h.

    Use the classmethod constructors :meth:`uniform`, :meth:`table` and
    :meth:`markov` rather than calling ``__init__`` directly.
    """

    def __init__(self, alphabet: Alphabet, kind: str, declared_min_entropy: float,
                 order: int = 0, counts: dict | None = None, probabilities=None):
        if kind not in ("uniform", "table", "markov"):
            raise ChannelError(f"unknown channel kind {kind!r}")
        if declared_min_entropy < 0:
            raise ChannelError("min-entropy must be non-negative")
        self.alphabet = alphabet
        self.kind = kind
        self.declared_min_entropy = float(declared_min_entropy)
        self.order = order if kind == "markov" else 0
        self.counts = {tuple(c): tuple(int(x) for x in v) for c, v in (counts or {}).items()}
        self._exact: dict[tuple[int, ...], tuple[Fraction, ...]] = {}
        self._cumulative: dict[tuple[int, ...], list[float]] = {}
        s = alphabet.size
        if kind == "uniform":
            self._fixed = tuple(Fraction(1, s) for _ in range(s))
        elif kind == "table":
            probs = tuple(Fraction(p) for p in probabilities)
            if len(probs) != s or any(p < 0 for p in probs) or sum(probs) != 1:
                raise ChannelError("table probabilities must be a distribution over the alphabet")
            if max(probs) > floor_probability(self.declared_min_entropy):
                raise ChannelError("table violates its declared min-entropy")
            self._fixed = probs
        else:
            if order < 0:
                raise ChannelError("order must be non-negative")
            if self.declared_min_entropy > math.log2(s) + 1e-12:
                raise UnachievableFloorError(
                    f"min-entropy {declared_min_entropy} exceeds log2|alphabet| = {math.log2(s):.6f}")
            for ctx, vec in self.counts.items():
                if len(ctx) > order or len(vec) != s or any(x < 0 for x in vec) or sum(vec) == 0:
                    raise ChannelError(f"bad count row for context {ctx}")
                if any(not 0 <= c < s for c in ctx):
                    raise ChannelError(f"context {ctx} has out-of-range ranks")
            self._fixed = None

    # -- constructors --------------------------------------------------

    @classmethod
    def uniform(cls, alphabet) -> ChannelModel:
        alphabet = _as_alphabet(alphabet)
        return cls(alphabet, "uniform", math.log2(alphabet.size))

    @classmethod
    def table(cls, alphabet, probabilities, min_entropy: float | None = None) -> ChannelModel:
        alphabet = _as_alphabet(alphabet)
        probs = [Fraction(p) for p in probabilities]
        if min_entropy is None:
            min_entropy = min_entropy_of(probs)
        return cls(alphabet, "table", min_entropy, probabilities=probs)

    @classmethod
    def markov(cls, alphabet, order: int, counts: dict, min_entropy: float = 0.0) -> ChannelModel:
        """Counts map a context (tuple of symbols or ranks) to per-symbol counts."""
        alphabet = _as_alphabet(alphabet)
        ranked = {}
        for ctx, vec in counts.items():
            ctx = tuple(ctx)
            if ctx and isinstance(ctx[0], str):
                ctx = alphabet.ranks(ctx)
            if isinstance(vec, dict):
                vec = [vec.get(sym, 0) for sym in alphabet.symbols]
            ranked[ctx] = vec
        return cls(alphabet, "markov", min_entropy, order=order, counts=ranked)

    # -- distributions -------------------------------------------------

    def context(self, ranks: Sequence[int]) -> tuple[int, ...]:
        if self.order == 0:
            return ()
        return tuple(ranks[-self.order:]) if ranks else ()

    def exact_probabilities(self, ranks: Sequence[int] = ()) -> tuple[Fraction, ...]:
        """C_h as exact fractions for a history given by symbol ranks."""
        if self._fixed is not None:
            return self._fixed
        ctx = self.context(ranks)
        probs = self._exact.get(ctx)
        if probs is None:
            s = self.alphabet.size
            vec = self.counts.get(ctx)
            if vec is None:
                probs = tuple(Fraction(1, s) for _ in range(s))
            else:
                total = sum(vec)
                raw = [Fraction(c, total) for c in vec]
                w = mixing_weight(raw, self.declared_min_entropy)
                probs = tuple((1 - w) * p + w / s for p in raw)
            self._exact[ctx] = probs
        return probs

    def probabilities(self, ranks: Sequence[int] = ()) -> list[float]:
        return [float(p) for p in self.exact_probabilities(ranks)]

    def distribution(self, history: Sequence[str] = (), exact: bool = False) -> list:
        """The probability vector of C_h, ordered by symbol rank."""
        ranks = self.alphabet.ranks(history)
        if exact:
            return list(self.exact_probabilities(ranks))
        return self.probabilities(ranks)

    def _cdf(self, ranks: Sequence[int]) -> list[float]:
        ctx = self.context(ranks) if self._fixed is None else ()
        cdf = self._cumulative.get(ctx)
        if cdf is None:
            acc, cdf = Fraction(0), []
            for p in self.exact_probabilities(ranks):
                acc += p
                cdf.append(float(acc))
            self._cumulative[ctx] = cdf
        return cdf

    def sample(self, ranks: Sequence[int], rng) -> int:
        """Rank of one draw from C_h (history as ranks)."""
        cdf = self._cdf(ranks)
        i = bisect.bisect_right(cdf, rng.random())
        if i >= len(cdf):
            i = len(cdf) - 1
        # zero-probability symbols never selected even at cdf ties
        while i > 0 and cdf[i] == cdf[i - 1]:
            i -= 1
        return i

    def draw(self, history: Sequence[str], rng) -> str:
        return self.alphabet.symbol(self.sample(self.alphabet.ranks(history), rng))

    # -- min-entropy ---------------------------------------------------

    def reachable_contexts(self) -> list[tuple[int, ...]]:
        if self._fixed is not None:
            return [()]
        seen = {(): None}
        queue = deque([()])
        while queue:
            ctx = queue.popleft()
            for sym, p in enumerate(self.exact_probabilities(ctx)):
                if p == 0:
                    continue
                nxt = (ctx + (sym,))[-self.order:] if self.order else ()
                if nxt not in seen:
                    if len(seen) >= MAX_STATES:
                        raise UnsupportedModelError("reachable state space too large to enumerate")
                    seen[nxt] = None
                    queue.append(nxt)
        return list(seen)

    def min_entropy(self) -> float:
        """inf over reachable histories of H_inf(C_h), by enumeration."""
        return min(min_entropy_of(self.probabilities(ctx)) for ctx in self.reachable_contexts())

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "kind": self.kind,
            "alphabet": list(self.alphabet.symbols),
            "order": self.order,
            "min_entropy": self.declared_min_entropy,
        }
        if self.kind == "table":
            out["probabilities"] = [str(p) for p in self._fixed]
        if self.kind == "markov":
            out["counts"] = [
                {"context": list(ctx), "counts": list(vec)}
                for ctx, vec in sorted(self.counts.items(), key=lambda kv: (len(kv[0]), kv[0]))
            ]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> ChannelModel:
        if data.get("format") != FORMAT_NAME or data.get("version") != FORMAT_VERSION:
            raise ChannelError("not a channel model file (or unsupported version)")
        alphabet = Alphabet(tuple(data["alphabet"]))
        kind = data["kind"]
        delta = data["min_entropy"]
        if kind == "uniform":
            return cls(alphabet, "uniform", delta)
        if kind == "table":
            return cls(alphabet, "table", delta, probabilities=[Fraction(p) for p in data["probabilities"]])
        counts = {tuple(row["context"]): row["counts"] for row in data.get("counts", [])}
        return cls(alphabet, "markov", delta, order=data["order"], counts=counts)

    @classmethod
    def loads(cls, text: str) -> ChannelModel:
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        from .fileio import atomic_write

        atomic_write(path, self.dumps().encode("utf-8"))

    @classmethod
    def load(cls, path) -> ChannelModel:
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def binding(self) -> tuple[bytes, float]:
        """(alphabet digest, declared min-entropy): what both endpoints must agree on."""
        return self.alphabet.digest(), self.declared_min_entropy

    def __repr__(self):
        return (f"ChannelModel(kind={self.kind!r}, |alphabet|={self.alphabet.size}, "
                f"order={self.order}, min_entropy={self.declared_min_entropy})")


def _as_alphabet(alphabet) -> Alphabet:
    return alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))


def train_markov(corpus: Iterable[str], order: int, min_entropy: float,
                 alphabet: Alphabet | None = None) -> ChannelModel:
    """Order-k count model over the corpus tokens with an enforced min-entropy floor."""
    tokens = list(corpus)
    if not tokens:
        raise ChannelError("empty corpus")
    if alphabet is None:
        alphabet = Alphabet(tuple(sorted(set(tokens))))
    s = alphabet.size
    if min_entropy < 0:
        raise ChannelError("min-entropy must be non-negative")
    if min_entropy > math.log2(s) + 1e-12:
        raise UnachievableFloorError(
            f"min-entropy {min_entropy} exceeds log2|alphabet| = {math.log2(s):.6f}")
    ranks = alphabet.ranks(tokens)
    counts: dict[tuple[int, ...], Counter] = {}
    for i, nxt in enumerate(ranks):
        for length in range(0, min(order, i) + 1):
            ctx = tuple(ranks[i - length:i])
            counts.setdefault(ctx, Counter())[nxt] += 1
    table = {ctx: [c.get(sym, 0) for sym in range(s)] for ctx, c in counts.items()}
    return ChannelModel(alphabet, "markov", min_entropy, order=order, counts=table)


def tokenize(text: str, mode: str = "chars") -> list[str]:
    if mode == "chars":
        return list(text)
    if mode == "words":
        return text.split()
    raise ChannelError(f"unknown tokenization {mode!r}")
