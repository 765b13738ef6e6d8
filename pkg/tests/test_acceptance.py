"""Acceptance criteria 1-10.

Each test prints one PASS/FAIL line; the lines are repeated in the pytest
terminal summary.  Run alone with ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from otstego import ecc, hashfamily, onetime, stream, verify
from otstego.channel import ChannelModel

DELTA = 2.0
P_DESIGN = 0.5 - onetime.tau(DELTA)  # 5/16
EPS_CODE = 1e-3
EPS_FAMILY = 2.0 ** -20
BINARY_SKEWED = ChannelModel.table("ab", [Fraction(9, 10), Fraction(1, 10)])


@pytest.fixture(scope="module")
def chain():
    return verify.demo_markov_channel(min_entropy=DELTA)


@pytest.fixture(scope="module")
def params64(chain):
    return onetime.StegoParams.for_channel(64, chain, eps_family=EPS_FAMILY, eps_code=EPS_CODE)


def _grid_records(name):
    return [r for r in verify.exact_grid_checks() if r.name == name]


def test_criterion_01_average_equals_channel(criterion):
    t0 = time.perf_counter()
    records = _grid_records("average-equals-channel")
    elapsed = time.perf_counter() - t0
    worst = max(r.statistic for r in records)
    ok = len(records) == 20 and all(r.verdict == verify.PASS for r in records) and elapsed < 60
    criterion(1, ok, f"{len(records)} vectors x 2 bits, max deviation {worst}, {elapsed:.1f}s")
    assert ok


def test_criterion_02_closed_form_matches_enumeration(criterion):
    t0 = time.perf_counter()
    records = _grid_records("rejection-distribution")
    elapsed = time.perf_counter() - t0
    worst = max(r.statistic for r in records)
    ok = all(r.verdict == verify.PASS for r in records) and elapsed < 60
    criterion(2, ok, f"{len(records)} (vector, f, bit) cases, max deviation {worst}, {elapsed:.1f}s")
    assert ok


def test_criterion_03_success_probability(criterion):
    records = _grid_records("success-probability")
    half = Fraction(1, 2)
    uniform = verify.exact_success_probability((half, half), 0)
    ok = len(records) == 20 and all(r.verdict == verify.PASS for r in records) and uniform == Fraction(5, 8)
    criterion(3, ok, f"{len(records)} vectors exact; binary uniform success = {uniform}")
    assert ok


def test_criterion_04_family_bias(criterion):
    t0 = time.perf_counter()
    results = []
    for m, t in verify.FAMILY_GRID:
        p = hashfamily.FamilyParams(m, t, verify.FAMILY_GRID_EPS)
        if p.seed_bits > 20:
            continue
        results.append((m, t, p.seed_bits, hashfamily.measure_family_bias(p)))
    elapsed = time.perf_counter() - t0
    eps = Fraction(verify.FAMILY_GRID_EPS)
    worst = max(b for *_, b in results)
    ok = len(results) == 9 and all(b <= eps for *_, b in results) and elapsed < 600
    criterion(4, ok, f"{len(results)} instances, max bias {worst} ({float(worst):.4f}) <= {eps}, {elapsed:.1f}s")
    assert ok


def test_criterion_05_soundness(criterion, chain, params64):
    t0 = time.perf_counter()
    rep = verify.run_recovery(params64, chain, 2000, seed=0)
    elapsed = time.perf_counter() - t0
    threshold = rep.bound - 3 * rep.sigma
    ok = rep.meets_bound and elapsed < 600
    criterion(5, ok, f"n=64 lambda={params64.code.length}: recovered {rep.successes}/{rep.trials} "
                     f"= {rep.rate:.4f} >= {threshold:.4f}, {elapsed:.0f}s")
    assert ok


def test_criterion_06_security(criterion, chain, params64):
    warden = verify.ChiSquareWarden()
    game = verify.run_warden_game(verify.OneTimeSystem(params64), chain, warden, 10_000, seed=0)
    chi_ok = game.advantage_low <= EPS_FAMILY + 0.02
    ideal = verify.run_warden_game(verify.ideal_family_system(8, BINARY_SKEWED), BINARY_SKEWED,
                                   verify.LikelihoodWarden(), 10_000, seed=0)
    fpr, usable = verify.false_positive_rate(chain, params64.code.length, 200, seed=0)
    fpr_ok = usable == 200 and fpr <= 2 * verify.ALPHA
    ok = chi_ok and ideal.ci_contains_zero and fpr_ok
    criterion(6, ok, f"chi-square adv {game.advantage:.4f} ci99 [{game.advantage_low:.4f}, "
                     f"{game.advantage_high:.4f}] (inconclusive {warden.inconclusive}); ideal-family "
                     f"likelihood adv {ideal.advantage:.4f} ci99 [{ideal.advantage_low:.4f}, "
                     f"{ideal.advantage_high:.4f}]; FPR {fpr:.3f} over {usable}")
    assert chi_ok
    assert ideal.ci_contains_zero
    assert fpr_ok


def test_criterion_07_negative_controls(criterion, chain):
    stub = verify.run_warden_game(verify.fixed_function_system(8, BINARY_SKEWED), BINARY_SKEWED,
                                  verify.LikelihoodWarden(), 10_000, seed=0)
    no_ecc = onetime.StegoParams.for_channel(64, chain, eps_family=EPS_FAMILY, scheme="identity")
    rec = verify.run_recovery(no_ecc, chain, 200, seed=0)
    ok = stub.advantage_low > 0.1 and rec.rate < 0.5
    criterion(7, ok, f"fixed-f stub adv {stub.advantage:.4f} (ci99 low {stub.advantage_low:.4f}) > 0.1; "
                     f"no-ECC recovery {rec.rate:.3f} < 0.5")
    assert ok


def test_criterion_08_prg(criterion):
    seed = b"acceptance seed"
    grid = (0, 1, 7, 8, 63, 64, 1000)
    cases = 0
    ok = True
    for y1 in grid:
        first = stream.expand(seed, y1)
        for y2 in grid:
            cases += 1
            longer = stream.expand(seed, max(y1, y2))
            ok &= np.array_equal(stream.expand(seed, min(y1, y2)), longer[:min(y1, y2)])
            tail = stream.resume(seed, stream.Aux.at(seed, y1), y2)
            ok &= np.array_equal(np.concatenate([first, tail]), stream.expand(seed, y1 + y2))
    state = stream.PrgState(seed)
    chunks = [state.take(y) for y in grid * 3]
    ok &= np.array_equal(np.concatenate(chunks), stream.expand(seed, 3 * sum(grid)))
    criterion(8, bool(ok), f"{cases} (y1, y2) pairs prefix + resume, chunked = monolithic over {3 * sum(grid)} bits")
    assert ok


def test_criterion_09_code_contract(criterion):
    code = ecc.build(64, P_DESIGN, EPS_CODE)
    trials = 10_000
    rng = np.random.default_rng(0)
    msgs = rng.integers(0, 2, (trials, 64), dtype=np.uint8)
    words = np.stack([code.encode(m) for m in msgs])
    sigma = math.sqrt(EPS_CODE * (1 - EPS_CODE) / trials)
    limit = EPS_CODE + 3 * sigma
    flips = (rng.random(words.shape) < P_DESIGN).astype(np.uint8)
    design = np.any(code.decode_many(words ^ flips) != msgs, axis=1).mean()
    rates = rng.random(words.shape) * P_DESIGN  # per-bit crossover, each <= p
    flips = (rng.random(words.shape) < rates).astype(np.uint8)
    hetero = np.any(code.decode_many(words ^ flips) != msgs, axis=1).mean()
    noiseless = True
    for n in range(1, 13):
        small = ecc.build(n, P_DESIGN, EPS_CODE)
        every = ((np.arange(1 << n)[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)
        coded = np.stack([small.encode(m) for m in every])
        noiseless &= bool(np.array_equal(small.decode_many(coded), every))
    ok = design <= limit and hetero <= limit and noiseless
    criterion(9, ok, f"lambda={code.length}: failure {design:.4f} at p=5/16, {hetero:.4f} heterogeneous, "
                     f"limit {limit:.4f}; noiseless n<=12 exhaustive {'ok' if noiseless else 'BROKEN'}")
    assert ok


def test_criterion_10_key_cost(criterion):
    params = onetime.StegoParams(1024, 256, DELTA, eps_family=2.0 ** -40)
    cost = onetime.key_cost(params)
    lam = cost.length
    baseline = lam * 40 * (math.log2(256) + math.log2(lam))
    ratio = baseline / cost.key_bits
    ok = cost.key_bits * 100 <= baseline and cost.prf_baseline_bits == pytest.approx(baseline)
    criterion(10, ok, f"lambda={lam} key bits {cost.key_bits} vs baseline {baseline:.0f}: ratio {ratio:.1f} >= 100")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
