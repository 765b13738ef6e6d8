"""Exact checks on tiny instances and warden games at desk scale.

Exact checks work on channel vectors of Fractions and enumerate every
Boolean function on the alphabet, so equalities are tested with zero
tolerance.  The warden game pits a system (something that embeds a message
into λ symbols) against a warden (something that guesses whether a transcript
is stegotext or plain channel output).
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Protocol, Sequence

import numpy as np
from scipy import stats

from . import ecc, hashfamily, onetime, stream
from .channel import ChannelModel

ALPHA = 0.01
CONFIDENCE = 0.99

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"


def _F(*xs):
    return tuple(Fraction(x) for x in xs)


EXACT_GRID: tuple[tuple[Fraction, ...], ...] = (
    _F("1/2", "1/2"), _F("3/4", "1/4"), _F("9/10", "1/10"), _F(1, 0),
    _F("1/3", "2/3"), _F("3/5", "2/5"), _F("7/8", "1/8"),
    _F("1/3", "1/3", "1/3"), _F("1/2", "1/4", "1/4"), _F(1, 0, 0),
    _F("1/2", "1/3", "1/6"), _F("7/10", "1/5", "1/10"), _F("2/5", "2/5", "1/5"),
    _F("1/4", "1/4", "1/4", "1/4"), _F("1/2", "1/4", "1/8", "1/8"), _F(1, 0, 0, 0),
    _F("2/5", "3/10", "1/5", "1/10"), _F("1/3", "1/3", "1/6", "1/6"),
    _F("7/16", "5/16", "3/16", "1/16"), _F("5/8", "1/8", "1/8", "1/8"),
)

FAMILY_GRID = tuple((m, t) for m in (4, 8, 12) for t in (2, 3, 4))
FAMILY_GRID_EPS = 0.25


@dataclass
class CheckRecord:
    name: str
    params: dict
    statistic: object
    bound: object
    verdict: str
    expected_failure: bool = False

    def line(self) -> str:
        tag = " (expected)" if self.expected_failure and self.verdict == FAIL else ""
        args = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.verdict}{tag}  {self.name}[{args}]  statistic={self.statistic}  bound={self.bound}"


def _record(name, params, statistic, bound, ok, expected_failure=False) -> CheckRecord:
    return CheckRecord(name, params, statistic, bound, PASS if ok else FAIL, expected_failure)


def all_functions(size: int):
    """Every map {0..size-1} -> {0,1}, as tuples."""
    return itertools.product((0, 1), repeat=size)


# -- exact checks -----------------------------------------------------------

def two_draw_distribution(f_table: Sequence[int], probs: Sequence, bit: int) -> list:
    """Rejection sampling by brute force over both draws."""
    out = [p * 0 for p in probs]
    for c1, p1 in enumerate(probs):
        if f_table[c1] == bit:
            out[c1] += p1
        else:
            for c2, p2 in enumerate(probs):
                out[c2] += p1 * p2
    return out


def check_rejection_formula(probs, f_table, bit: int, corrupt=0) -> CheckRecord:
    """Closed form vs brute-force enumeration; exact for Fractions, 1e-12 for floats."""
    formula = onetime.rejsam_exact_dist(f_table, probs, bit)
    if corrupt:
        formula[0] += corrupt
    brute = two_draw_distribution(f_table, probs, bit)
    dev = max(abs(a - b) for a, b in zip(formula, brute))
    exact = all(isinstance(p, Fraction) for p in probs)
    ok = dev == 0 if exact else dev <= 1e-12
    return _record("rejection-distribution", {"p": _fmt(probs), "f": tuple(f_table), "bit": bit},
                   dev, 0 if exact else 1e-12, ok)


def average_over_functions(probs, bit: int) -> list:
    s = len(probs)
    acc = [Fraction(0)] * s
    count = 0
    for f in all_functions(s):
        for c, q in enumerate(onetime.rejsam_exact_dist(f, probs, bit)):
            acc[c] += q
        count += 1
    return [a / count for a in acc]


def check_average_is_channel(probs) -> CheckRecord:
    """Averaged over all functions the output is the channel, for each bit."""
    devs = []
    for bit in (0, 1):
        avg = average_over_functions(probs, bit)
        devs.append(max(abs(a - p) for a, p in zip(avg, probs)))
    dev = max(devs)
    return _record("average-equals-channel", {"p": _fmt(probs)}, dev, 0, dev == 0)


def exact_success_probability(probs, bit: int) -> Fraction:
    """Pr over f and the draws that f(output) = bit."""
    s = len(probs)
    total = Fraction(0)
    count = 0
    for f in all_functions(s):
        dist = onetime.rejsam_exact_dist(f, probs, bit)
        total += sum(q for c, q in enumerate(dist) if f[c] == bit)
        count += 1
    return total / count


def exact_tau(delta: int) -> Fraction:
    return Fraction(1, 4) * (1 - Fraction(1, 2 ** delta))


def check_success_probability(probs) -> CheckRecord:
    """Exact value 1/2 + (1 - sum p^2)/4, and the floors it implies."""
    collision = sum(p * p for p in probs)
    predicted = Fraction(1, 2) + Fraction(1, 4) * (1 - collision)
    top = max(probs)
    ok = True
    values = []
    for bit in (0, 1):
        value = exact_success_probability(probs, bit)
        values.append(value)
        ok &= value == predicted
        ok &= value >= Fraction(1, 2) + Fraction(1, 4) * (1 - top)
        for delta in range(0, 8):
            if top <= Fraction(1, 2 ** delta):
                ok &= value >= Fraction(1, 2) + exact_tau(delta)
    return _record("success-probability", {"p": _fmt(probs)}, str(values[0]), str(predicted), ok)


def exact_grid_checks(grid=EXACT_GRID) -> list[CheckRecord]:
    out = []
    for probs in grid:
        for f in all_functions(len(probs)):
            for bit in (0, 1):
                out.append(check_rejection_formula(probs, f, bit))
        out.append(check_average_is_channel(probs))
        out.append(check_success_probability(probs))
    return out


def _fmt(probs) -> str:
    return "(" + ",".join(str(p) for p in probs) + ")"


# -- family bias ------------------------------------------------------------

def check_family_bias_endtoend(m: int, t: int, epsilon: float = FAMILY_GRID_EPS,
                               with_adversary: bool = True) -> CheckRecord:
    """Adaptive t-query advantage <= measured L1 bias <= configured epsilon."""
    params = hashfamily.FamilyParams(m, t, epsilon)
    if params.seed_bits > 20:
        raise hashfamily.FamilyError("seed space too large for an end-to-end check")
    table = np.concatenate(list(hashfamily.sample_space_table(params)))
    bias = hashfamily.measure_bias(table, t)
    ok = bias <= Fraction(epsilon)
    stat = {"bias": str(bias), "seed_bits": params.seed_bits}
    if with_adversary:
        adv = hashfamily.adaptive_advantage(table, t)
        stat["advantage"] = str(adv)
        ok &= adv <= bias
    return _record("family-bias", {"m": m, "t": t, "eps": epsilon}, stat, epsilon, ok)


def check_biased_family_detected(m: int = 8, t: int = 3, epsilon: float = FAMILY_GRID_EPS) -> CheckRecord:
    """Negative control: a point-mass family against the same budget."""
    bias = hashfamily.measure_bias(hashfamily.constant_table(m), t)
    return _record("family-bias[point-mass stub]", {"m": m, "t": t, "eps": epsilon},
                   str(bias), epsilon, bias <= Fraction(epsilon), expected_failure=True)


# -- systems ----------------------------------------------------------------

class System(Protocol):
    name: str
    n: int
    length: int

    def embed(self, message, history: Sequence[int], channel: ChannelModel, rng) -> tuple[int, ...]:
        ...


@dataclass
class OneTimeSystem:
    """The real system: fresh key per call."""

    params: onetime.StegoParams
    name: str = "onetime"

    @property
    def n(self):
        return self.params.n

    @property
    def length(self):
        return self.params.code.length

    def fresh_key(self, channel: ChannelModel, rng) -> onetime.StegoKey:
        f = hashfamily.keygen(self.params.family, rng)
        return onetime.key_from_params(self.params, channel.alphabet, f)

    def embed(self, message, history, channel, rng):
        key = self.fresh_key(channel, rng)
        codeword = key.code.encode(message)
        return onetime.embed_bits(key.table, codeword, history, channel, rng)


@dataclass
class StreamSystem:
    """Multi-message mode: a fresh master seed per call, then one message."""

    params: onetime.StegoParams
    name: str = "stream"

    @property
    def n(self):
        return self.params.n

    @property
    def length(self):
        return self.params.code.length

    def embed(self, message, history, channel, rng):
        p = self.params
        session = stream.StreamSession.create(rng.getrandbits(128).to_bytes(16, "big"), p.n, channel,
                                              eps_family=p.eps_family, eps_code=p.eps_code, scheme=p.scheme)
        session.history = [channel.alphabet.symbol(r) for r in history]
        return stream.se_stream(session, message, channel, rng).ranks


@dataclass
class TableSystem:
    """Embedding under an explicit function table.

    ``public_table`` fixes one table known to everyone (an insecure stub);
    otherwise each call draws a uniformly random table (the ideal family).
    """

    code: ecc.CodeSpec
    alphabet_size: int
    public_table: np.ndarray | None = None
    name: str = "ideal-family"

    @property
    def n(self):
        return self.code.n

    @property
    def length(self):
        return self.code.length

    def table(self, rng) -> np.ndarray:
        if self.public_table is not None:
            return self.public_table
        bits = rng.getrandbits(self.length * self.alphabet_size)
        flat = [(bits >> k) & 1 for k in range(self.length * self.alphabet_size)]
        return np.array(flat, dtype=np.uint8).reshape(self.length, self.alphabet_size)

    def embed(self, message, history, channel, rng):
        return onetime.embed_bits(self.table(rng), self.code.encode(message), history, channel, rng)

    def stego_likelihood(self, ranks, message, history, channel: ChannelModel) -> Fraction:
        """Exact probability of ``ranks`` as stegotext for this message."""
        bits = self.code.encode(message).tolist()
        running = list(history)
        like = Fraction(1)
        for i, c in enumerate(ranks):
            probs = channel.exact_probabilities(running)
            if self.public_table is not None:
                like *= onetime.rejsam_exact_dist(self.public_table[i], probs, bits[i])[c]
            else:
                like *= average_over_functions(probs, bits[i])[c]
            running.append(c)
        return like


def ideal_family_system(n: int, channel: ChannelModel) -> TableSystem:
    return TableSystem(ecc.build(n, 0.0, 0.5, "identity"), channel.alphabet.size)


def fixed_function_system(n: int, channel: ChannelModel, table=None) -> TableSystem:
    """Insecure stub: f_i(sigma) = lowest bit of rank(sigma), public."""
    s = channel.alphabet.size
    code = ecc.build(n, 0.0, 0.5, "identity")
    if table is None:
        table = np.tile(np.arange(s, dtype=np.uint8) & 1, (code.length, 1))
    return TableSystem(code, s, np.asarray(table, dtype=np.uint8), name="fixed-function stub")


# -- wardens ----------------------------------------------------------------

@dataclass
class GameTranscript:
    b: int
    message: np.ndarray
    ranks: tuple[int, ...]
    history: tuple[int, ...]


def channel_transcript(length: int, history, channel: ChannelModel, rng) -> tuple[int, ...]:
    running = list(history)
    out = []
    for _ in range(length):
        c = channel.sample(running, rng)
        out.append(c)
        running.append(c)
    return tuple(out)


class CoinFlipWarden:
    name = "coin-flip"

    def guess(self, transcript: GameTranscript, channel, system, rng) -> int:
        return rng.getrandbits(1)


class LikelihoodWarden:
    """Bayes-optimal for equal priors: compares exact likelihoods under both branches."""

    name = "exact-likelihood"

    def guess(self, transcript: GameTranscript, channel, system, rng) -> int:
        stego = system.stego_likelihood(transcript.ranks, transcript.message, transcript.history, channel)
        cover = Fraction(1)
        running = list(transcript.history)
        for c in transcript.ranks:
            cover *= channel.exact_probabilities(running)[c]
            running.append(c)
        if stego > cover:
            return 0
        if cover > stego:
            return 1
        return rng.getrandbits(1)


@dataclass
class ChiSquareResult:
    statistic: float
    p_value: float | None
    contexts_used: int
    reject: bool | None  # None = inconclusive


def _pool(observed: np.ndarray, expected: np.ndarray, min_expected: float):
    order = np.argsort(expected, kind="stable")
    bins_o, bins_e = [], []
    acc_o = acc_e = 0.0
    for k in order:
        acc_o += observed[k]
        acc_e += expected[k]
        if acc_e >= min_expected:
            bins_o.append(acc_o)
            bins_e.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if bins_e:
            bins_o[-1] += acc_o
            bins_e[-1] += acc_e
        else:
            return None
    if len(bins_e) < 2:
        return None
    return np.array(bins_o), np.array(bins_e)


def chi_square_test(ranks, history, channel: ChannelModel, alpha: float = ALPHA,
                    min_expected: float = 30.0) -> ChiSquareResult:
    """Goodness of fit of the transitions, grouped by channel context, Fisher-combined."""
    groups: dict = {}
    running = list(history)
    for c in ranks:
        ctx = channel.context(running) if channel.kind == "markov" else ()
        if ctx not in groups:
            groups[ctx] = [np.zeros(channel.alphabet.size), np.array(channel.probabilities(running))]
        groups[ctx][0][c] += 1
        running.append(c)
    p_values = []
    total_stat = 0.0
    for observed, probs in groups.values():
        expected = observed.sum() * probs
        pooled = _pool(observed, expected, min_expected)
        if pooled is None:
            continue
        o, e = pooled
        stat = float(((o - e) ** 2 / e).sum())
        total_stat += stat
        p_values.append(float(stats.chi2.sf(stat, len(o) - 1)))
    if not p_values:
        return ChiSquareResult(0.0, None, 0, None)
    if len(p_values) == 1:
        p = p_values[0]
    else:
        p = float(stats.combine_pvalues(p_values, method="fisher").pvalue)
    return ChiSquareResult(total_stat, p, len(p_values), p < alpha)


class ChiSquareWarden:
    name = "chi-square"

    def __init__(self, alpha: float = ALPHA, min_expected: float = 30.0):
        self.alpha = alpha
        self.min_expected = min_expected
        self.inconclusive = 0

    def guess(self, transcript: GameTranscript, channel, system, rng) -> int:
        res = chi_square_test(transcript.ranks, transcript.history, channel, self.alpha, self.min_expected)
        if res.reject is None:
            self.inconclusive += 1
            return rng.getrandbits(1)
        return 0 if res.reject else 1


# -- the game ---------------------------------------------------------------

@dataclass
class AdvantageReport:
    warden: str
    system: str
    trials: int
    successes: int
    rate: float | None
    advantage: float | None
    advantage_low: float | None
    advantage_high: float | None
    half_width: float | None
    method: str = "Clopper-Pearson exact, 99%"
    verdict: str = INCONCLUSIVE
    notes: dict = field(default_factory=dict)

    @property
    def ci_contains_zero(self) -> bool:
        return self.advantage_low is not None and self.advantage_low == 0.0


def advantage_report(warden: str, system: str, trials: int, successes: int, **notes) -> AdvantageReport:
    if trials == 0:
        return AdvantageReport(warden, system, 0, 0, None, None, None, None, None, notes=notes)
    rate = successes / trials
    ci = stats.binomtest(successes, trials).proportion_ci(CONFIDENCE, method="exact")
    lo, hi = ci.low, ci.high
    if lo <= 0.5 <= hi:
        adv_lo = 0.0
    else:
        adv_lo = min(abs(lo - 0.5), abs(hi - 0.5))
    adv_hi = min(0.5, max(abs(lo - 0.5), abs(hi - 0.5)))
    verdict = "indistinguishable" if adv_lo == 0 else "distinguishable"
    return AdvantageReport(warden, system, trials, successes, rate, abs(rate - 0.5),
                           adv_lo, adv_hi, (hi - lo) / 2, verdict=verdict, notes=notes)


def trial_rng(seed, index: int) -> random.Random:
    return random.Random(f"{seed}:{index}")


def run_warden_game(system, channel: ChannelModel, warden, trials: int, seed=0,
                    history: Sequence[int] = ()) -> AdvantageReport:
    """Trials of: pick b, produce stegotext (b = 0) or covertext (b = 1), warden guesses b."""
    successes = 0
    history = tuple(history)
    for i in range(trials):
        rng = trial_rng(seed, i)
        b = rng.getrandbits(1)
        message = np.array([rng.getrandbits(1) for _ in range(system.n)], dtype=np.uint8)
        if b == 0:
            ranks = system.embed(message, history, channel, rng)
        else:
            ranks = channel_transcript(system.length, history, channel, rng)
        guess = warden.guess(GameTranscript(b, message, tuple(ranks), history), channel, system, rng)
        successes += guess == b
    notes = {}
    if hasattr(warden, "inconclusive"):
        notes["inconclusive_trials"] = warden.inconclusive
    return advantage_report(warden.name, system.name, trials, successes, **notes)


def false_positive_rate(channel: ChannelModel, length: int, repetitions: int, seed=0,
                        alpha: float = ALPHA, min_expected: float = 30.0) -> tuple[float, int]:
    """Rejection rate of the chi-square test on channel-only transcripts."""
    rejects = usable = 0
    for i in range(repetitions):
        rng = trial_rng(f"calibration:{seed}", i)
        res = chi_square_test(channel_transcript(length, (), channel, rng), (), channel, alpha, min_expected)
        if res.reject is not None:
            usable += 1
            rejects += res.reject
    return (rejects / usable if usable else float("nan")), usable


# -- recovery -----------------------------------------------------------------

@dataclass
class RecoveryReport:
    trials: int
    successes: int
    rate: float
    bound: float
    sigma: float

    @property
    def meets_bound(self) -> bool:
        return self.rate >= self.bound - 3 * self.sigma


def run_recovery(params: onetime.StegoParams, channel: ChannelModel, trials: int, seed=0) -> RecoveryReport:
    """Embed then extract random messages with a fresh key per trial."""
    system = OneTimeSystem(params)
    ok = 0
    for i in range(trials):
        rng = trial_rng(f"recovery:{seed}", i)
        key = system.fresh_key(channel, rng)
        message = np.array([rng.getrandbits(1) for _ in range(params.n)], dtype=np.uint8)
        st = onetime.se(key, message, (), channel, rng)
        out = onetime.sd(key, st)
        ok += out is not onetime.FAIL and bool(np.array_equal(out, message))
    bound = 1.0 - params.eps_code - params.eps_family
    sigma = math.sqrt(bound * (1 - bound) / trials) if trials else 0.0
    return RecoveryReport(trials, ok, ok / trials if trials else float("nan"), bound, sigma)


# -- the whole suite ----------------------------------------------------------

def demo_markov_channel(size: int = 8, order: int = 1, min_entropy: float = 2.0, seed: int = 7) -> ChannelModel:
    """A skewed synthetic order-k chain whose floor binds in most contexts."""
    rng = random.Random(seed)
    symbols = tuple(chr(ord("a") + k) for k in range(size))
    counts = {}
    for ctx in itertools.product(range(size), repeat=order):
        counts[ctx] = [rng.randint(0, 3) ** 3 + (k == ctx[-1] if ctx else 0) * 40 for k in range(size)]
    counts[()] = [rng.randint(1, 50) for _ in range(size)]
    return ChannelModel.markov(symbols, order, counts, min_entropy)


@dataclass
class Report:
    records: list[CheckRecord] = field(default_factory=list)
    games: list[AdvantageReport] = field(default_factory=list)

    @property
    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if r.verdict == FAIL and not r.expected_failure]

    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def to_text(self) -> str:
        lines = [r.line() for r in self.records]
        for g in self.games:
            if g.trials == 0:
                lines.append(f"{INCONCLUSIVE}  warden-game[{g.system} vs {g.warden}]  no trials")
            else:
                lines.append(
                    f"{g.verdict.upper()}  warden-game[{g.system} vs {g.warden}]  trials={g.trials} "
                    f"advantage={g.advantage:.4f} ci99=[{g.advantage_low:.4f}, {g.advantage_high:.4f}]")
        passed = sum(r.verdict == PASS for r in self.records)
        lines.append(f"summary: {passed} passed, {len(self.failures)} failed, "
                     f"{sum(r.expected_failure for r in self.records)} negative controls")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({"records": [asdict(r) for r in self.records],
                           "games": [asdict(g) for g in self.games],
                           "failures": len(self.failures)}, indent=1, default=str)


def run_suite(trials: int = 200, seed: int = 0, self_test_negative: bool = False,
              family_grid=FAMILY_GRID) -> Report:
    report = Report()
    report.records.extend(exact_grid_checks())
    for m, t in family_grid:
        report.records.append(check_family_bias_endtoend(m, t, with_adversary=m <= 8))
    if trials == 0:
        report.games.append(advantage_report(LikelihoodWarden.name, "ideal-family", 0, 0))
        report.games.append(advantage_report(ChiSquareWarden.name, "onetime", 0, 0))
    else:
        binary = ChannelModel.table("ab", [Fraction(9, 10), Fraction(1, 10)])
        ideal = ideal_family_system(8, binary)
        report.games.append(run_warden_game(ideal, binary, LikelihoodWarden(), trials, seed))
        chain = demo_markov_channel()
        params = onetime.StegoParams.for_channel(16, chain, eps_code=1e-2)
        report.games.append(run_warden_game(OneTimeSystem(params), chain, ChiSquareWarden(), trials, seed))
        rec = run_recovery(params, chain, trials, seed)
        report.records.append(_record("recovery", {"n": 16, "trials": trials}, rec.rate,
                                      f"{rec.bound} - 3*{rec.sigma:.4f}", rec.meets_bound))
        for g in report.games:
            if g.system == "ideal-family":
                report.records.append(_record("ideal-family-indistinguishable", {"trials": trials},
                                              g.advantage, f"ci99 contains 0", g.ci_contains_zero))
    if self_test_negative:
        report.records.extend(negative_controls(max(trials, 200), seed))
    return report


def negative_controls(trials: int, seed: int = 0) -> list[CheckRecord]:
    """Broken variants the harness must catch; each record is expected to FAIL."""
    out = [check_rejection_formula(EXACT_GRID[1], (0, 1), 0, corrupt=Fraction(1, 100))]
    out[-1].expected_failure = True
    out[-1].name += "[corrupted formula]"
    out.append(check_biased_family_detected())
    binary = ChannelModel.table("ab", [Fraction(9, 10), Fraction(1, 10)])
    g = run_warden_game(fixed_function_system(8, binary), binary, LikelihoodWarden(), trials, seed)
    out.append(_record("indistinguishable[fixed-function stub]", {"trials": trials}, g.advantage,
                       "advantage ci99 contains 0", g.ci_contains_zero, expected_failure=True))
    chain = demo_markov_channel()
    params = onetime.StegoParams.for_channel(64, chain, scheme="identity")
    rec = run_recovery(params, chain, min(trials, 200), seed)
    out.append(_record("recovery[no error correction]", {"n": 64}, rec.rate,
                       f"{rec.bound} - 3*{rec.sigma:.4f}", rec.meets_bound, expected_failure=True))
    return out
