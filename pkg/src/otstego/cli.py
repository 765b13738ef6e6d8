"""Command-line front end: ``otstego <subcommand> ...``.

Defaults for the numeric parameters can be placed in a JSON file named by
the OTSTEGO_CONFIG environment variable, e.g. ``{"n": 256, "eps_code": 1e-3}``.
Flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import secrets
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import ecc, onetime, stream, verify
from .channel import ChannelModel, tokenize, train_markov
from .fileio import atomic_write

CONFIG_ENV = "OTSTEGO_CONFIG"
LENGTH_HEADER_BITS = 16
DEFAULTS = {
    "n": 256,
    "eps_family": onetime.DEFAULT_EPS_FAMILY,
    "eps_code": onetime.DEFAULT_EPS_CODE,
    "scheme": ecc.DEFAULT_SCHEME,
    "order": 1,
    "min_entropy": 2.0,
    "trials": 200,
}
BENCH_GRID = (
    (64, 8, 2.0, 2.0 ** -20),
    (128, 8, 2.0, 2.0 ** -20),
    (256, 8, 2.0, 2.0 ** -20),
    (512, 8, 2.0, 2.0 ** -20),
    (1024, 256, 2.0, 2.0 ** -40),
)
TIMING_MAX_FIELD_DEGREE = 6000


class CliError(Exception):
    pass


def load_config() -> dict:
    merged = dict(DEFAULTS)
    path = os.environ.get(CONFIG_ENV)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                extra = json.load(fh)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot read config {path}: {exc}") from exc
        unknown = set(extra) - set(DEFAULTS)
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        merged.update(extra)
    return merged


def make_rng(seed):
    return secrets.SystemRandom() if seed is None else random.Random(seed)


def demo_channel_path() -> Path:
    return Path(str(resources.files("otstego") / "data" / "demo_channel.json"))


def load_channel(path) -> ChannelModel:
    return ChannelModel.load(path or demo_channel_path())


def _epsilon(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return value


def _require_file(path, what: str):
    if path is not None and not Path(path).is_file():
        raise CliError(f"{what} not found: {path}")


# -- message framing --------------------------------------------------------

def frame_message(data: bytes, n: int) -> np.ndarray:
    """16-bit payload bit length, payload bits, zero padding up to n."""
    payload_bits = 8 * len(data)
    if payload_bits + LENGTH_HEADER_BITS > n:
        raise CliError(f"message of {len(data)} bytes does not fit; capacity is "
                       f"{(n - LENGTH_HEADER_BITS) // 8} bytes at n={n}")
    bits = np.zeros(n, dtype=np.uint8)
    header = np.unpackbits(np.frombuffer(payload_bits.to_bytes(2, "big"), np.uint8))
    bits[:LENGTH_HEADER_BITS] = header
    if data:
        bits[LENGTH_HEADER_BITS:LENGTH_HEADER_BITS + payload_bits] = np.unpackbits(np.frombuffer(data, np.uint8))
    return bits


def unframe_message(bits: np.ndarray) -> bytes:
    length = int.from_bytes(np.packbits(bits[:LENGTH_HEADER_BITS]).tobytes(), "big")
    if length % 8 or length > bits.size - LENGTH_HEADER_BITS:
        raise CliError("decoded message has an invalid length header (decoding failed)")
    return np.packbits(bits[LENGTH_HEADER_BITS:LENGTH_HEADER_BITS + length]).tobytes()


# -- stegotext rendering ------------------------------------------------------

def render_text(st: onetime.Stegotext) -> str:
    symbols = st.symbols
    joiner = "" if all(len(s) == 1 for s in st.alphabet.symbols) else " "
    return joiner.join(symbols)


def parse_text(text: str, channel: ChannelModel) -> tuple[int, ...]:
    single = all(len(s) == 1 for s in channel.alphabet.symbols)
    tokens = list(text) if single else text.split()
    return channel.alphabet.ranks(tokens)


def write_stegotext(st: onetime.Stegotext, path, fmt: str) -> None:
    data = render_text(st).encode("utf-8") if fmt == "text" else st.to_bytes()
    atomic_write(path, data)


def read_stegotext(path, fmt: str, channel: ChannelModel) -> tuple[int, ...]:
    raw = Path(path).read_bytes()
    if fmt == "text":
        return parse_text(raw.decode("utf-8"), channel)
    return onetime.Stegotext.from_bytes(raw, channel.alphabet).ranks


def read_history(path, channel: ChannelModel) -> tuple[str, ...]:
    if path is None:
        return ()
    ranks = parse_text(Path(path).read_text(encoding="utf-8"), channel)
    return tuple(channel.alphabet.symbol(r) for r in ranks)


# -- commands -----------------------------------------------------------------

def tombstone(path) -> Path:
    return Path(str(path) + ".consumed")


def cmd_channel_build(args, cfg) -> int:
    _require_file(args.corpus, "corpus")
    text = Path(args.corpus).read_text(encoding="utf-8")
    if args.tokens == "chars":
        text = text.replace("\r\n", "\n")
    model = train_markov(tokenize(text, args.tokens), args.order, args.min_entropy)
    model.save(args.out)
    print(f"channel: {model.alphabet.size} symbols, order {model.order}, "
          f"min-entropy {model.min_entropy():.6f} bits -> {args.out}")
    return 0


def _params(args, cfg, channel) -> onetime.StegoParams:
    return onetime.StegoParams.for_channel(
        args.n if args.n is not None else cfg["n"], channel,
        eps_family=args.eps_family or cfg["eps_family"],
        eps_code=args.eps_code or cfg["eps_code"],
        scheme=args.scheme or cfg["scheme"])


def print_cost(cost: onetime.KeyCost) -> None:
    print(f"key bits (kappa):        {cost.key_bits}")
    print(f"codeword length (lambda): {cost.length}")
    print(f"asymptotic expression:   {cost.asymptotic_bits:.1f}")
    print(f"PRF baseline:            {cost.prf_baseline_bits:.1f}  ({cost.improvement:.1f}x more)")


def cmd_keygen(args, cfg) -> int:
    _require_file(args.channel, "channel")
    channel = load_channel(args.channel)
    params = _params(args, cfg, channel)
    key = onetime.sk(params.n, channel, make_rng(args.seed), eps_family=params.eps_family,
                     eps_code=params.eps_code, scheme=params.scheme)
    key.save(args.out)
    stale = tombstone(args.out)
    if stale.exists():
        stale.unlink()
    print(f"wrote {args.out}")
    print_cost(onetime.key_cost(params))
    return 0


def cmd_session_init(args, cfg) -> int:
    _require_file(args.channel, "channel")
    channel = load_channel(args.channel)
    params = _params(args, cfg, channel)
    params.code  # surfaces infeasible parameters before anything is written
    if args.master_seed:
        seed = bytes.fromhex(args.master_seed)
    else:
        seed = make_rng(args.seed).getrandbits(256).to_bytes(32, "big")
    session = stream.StreamSession.create(seed, params.n, channel, eps_family=params.eps_family,
                                          eps_code=params.eps_code, scheme=params.scheme)
    session.save(args.out)
    print(f"wrote {args.out}: n={params.n}, {params.key_bits} key bits per message")
    return 0


def _check_mode(args):
    if (args.key is None) == (args.session is None):
        raise CliError("give exactly one of --key (one-time) or --session (stream)")


def cmd_embed(args, cfg) -> int:
    _check_mode(args)
    _require_file(args.key or args.session, "key/session file")
    _require_file(args.channel, "channel")
    _require_file(args.input, "message file")
    _require_file(args.history, "history file")
    channel = load_channel(args.channel)
    rng = make_rng(args.seed)
    data = Path(args.input).read_bytes()
    if args.key:
        if tombstone(args.key).exists():
            raise CliError(f"one-time key {args.key} was already used; refusing to reuse it")
        key = onetime.StegoKey.load(args.key)
        st = onetime.se(key, frame_message(data, key.n), read_history(args.history, channel), channel, rng)
        write_stegotext(st, args.out, args.format)
        atomic_write(tombstone(args.key), f"consumed {time.strftime('%Y-%m-%dT%H:%M:%S')}\n".encode())
    else:
        session = stream.StreamSession.load(args.session)
        st = stream.se_stream(session, frame_message(data, session.n), channel, rng)
        write_stegotext(st, args.out, args.format)
        session.save(args.session)
    print(f"embedded {len(data)} bytes into {len(st)} symbols -> {args.out}")
    return 0


def cmd_extract(args, cfg) -> int:
    _check_mode(args)
    _require_file(args.key or args.session, "key/session file")
    _require_file(args.channel, "channel")
    _require_file(args.input, "stegotext file")
    channel = load_channel(args.channel)
    ranks = read_stegotext(args.input, args.format, channel)
    if args.key:
        key = onetime.StegoKey.load(args.key)
        key.check_channel(channel)
        bits = onetime.sd(key, ranks)
    else:
        session = stream.StreamSession.load(args.session)
        bits = stream.sd_stream(session, ranks, channel)
        session.save(args.session)
    if bits is onetime.FAIL:
        raise CliError("stegotext has the wrong length for this key")
    atomic_write(args.out, unframe_message(bits))
    print(f"extracted -> {args.out}")
    return 0


def cmd_verify(args, cfg) -> int:
    trials = args.trials if args.trials is not None else cfg["trials"]
    if trials < 0:
        raise CliError("--trials must be non-negative")
    report = verify.run_suite(trials=trials, seed=args.seed or 0, self_test_negative=args.self_test_negative)
    print(report.to_text() if args.verbose else _brief(report))
    if args.json:
        atomic_write(args.json, report.to_json().encode("utf-8"))
    return report.exit_code()


def _brief(report: verify.Report) -> str:
    lines = [r.line() for r in report.records if r.verdict != verify.PASS or r.name != "rejection-distribution"]
    text = report.to_text().splitlines()
    return "\n".join(lines + [t for t in text if "warden-game" in t or t.startswith("summary")])


def bench_channel(size: int, delta: float) -> ChannelModel:
    """A fixed channel with top probability exactly 2^-delta."""
    from fractions import Fraction

    top = Fraction(1, 2 ** int(delta)) if float(delta).is_integer() else Fraction(2.0 ** -delta)
    rest = (1 - top) / (size - 1)
    if rest > top:
        top = rest = Fraction(1, size)
    symbols = [f"s{k}" for k in range(size)]
    return ChannelModel.table(symbols, [top] + [rest] * (size - 1), min_entropy=delta)


def bench_rows(grid=BENCH_GRID, timing: bool = True, seed: int = 0) -> list[dict]:
    rows = []
    for n, s, delta, eps_f in grid:
        params = onetime.StegoParams(n, s, delta, eps_family=eps_f)
        cost = onetime.key_cost(params)
        row = {"n": n, "alphabet": s, "delta": delta, "eps_family": eps_f, "lambda": cost.length,
               "key_bits": cost.key_bits, "asymptotic": round(cost.asymptotic_bits, 1),
               "prf_baseline": round(cost.prf_baseline_bits, 1), "improvement": round(cost.improvement, 1),
               "embed_s": None, "extract_s": None}
        if timing and params.family.r <= TIMING_MAX_FIELD_DEGREE:
            channel = bench_channel(s, delta)
            rng = random.Random(seed)
            key = onetime.sk(n, channel, rng, eps_family=eps_f)
            message = np.array([rng.getrandbits(1) for _ in range(n)], dtype=np.uint8)
            t0 = time.perf_counter()
            st = onetime.se(key, message, (), channel, rng)
            t1 = time.perf_counter()
            onetime.sd(key, st)
            t2 = time.perf_counter()
            row["embed_s"], row["extract_s"] = round(t1 - t0, 4), round(t2 - t1, 4)
        rows.append(row)
    return rows


def cmd_bench(args, cfg) -> int:
    rows = bench_rows(timing=not args.no_timing, seed=args.seed or 0)
    cols = ["n", "alphabet", "delta", "eps_family", "lambda", "key_bits", "asymptotic",
            "prf_baseline", "improvement", "embed_s", "extract_s"]
    print("\t".join(cols))
    for row in rows:
        print("\t".join("-" if row[c] is None else (f"{row[c]:.3g}" if c == "eps_family" else str(row[c]))
                        for c in cols))
    if args.json:
        atomic_write(args.json, json.dumps(rows, indent=1).encode("utf-8"))
    return 0


# -- parser -------------------------------------------------------------------

def _add_params(p):
    p.add_argument("--n", type=int, help="message bits per stegotext (default 256)")
    p.add_argument("--eps-family", type=_epsilon, help="function family bias budget (default 2^-20)")
    p.add_argument("--eps-code", type=_epsilon, help="decode failure target (default 1e-3)")
    p.add_argument("--scheme", choices=ecc.SCHEMES, help="inner code (default linear)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otstego", description="Rejection-sampling steganography toolkit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="seed every random choice, for reproducible runs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("channel-build", parents=[common], help="train an order-k channel model from a corpus")
    p.add_argument("--corpus", required=True, help="UTF-8 text file")
    p.add_argument("--order", type=int, default=DEFAULTS["order"], help="Markov order k")
    p.add_argument("--min-entropy", type=float, default=DEFAULTS["min_entropy"], help="enforced floor, bits")
    p.add_argument("--tokens", choices=("chars", "words"), default="chars", help="tokenization")
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_channel_build)

    p = sub.add_parser("keygen", parents=[common], help="create a one-time key")
    p.add_argument("--channel", help="channel model (default: shipped demo channel)")
    p.add_argument("--out", required=True, help="key file to write")
    _add_params(p)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("session-init", parents=[common], help="create a stream-mode session file")
    p.add_argument("--channel", help="channel model (default: shipped demo channel)")
    p.add_argument("--master-seed", help="hex master seed (default: random)")
    p.add_argument("--out", required=True, help="session file to write")
    _add_params(p)
    p.set_defaults(func=cmd_session_init)

    for name, func, what in (("embed", cmd_embed, "message"), ("extract", cmd_extract, "stegotext")):
        p = sub.add_parser(name, parents=[common], help=f"{name} using a one-time key or a session")
        p.add_argument("--key", help="one-time key file")
        p.add_argument("--session", help="stream session file (updated in place)")
        p.add_argument("--channel", help="channel model (default: shipped demo channel)")
        p.add_argument("--in", dest="input", required=True, help=f"{what} file")
        p.add_argument("--out", required=True, help="output file")
        p.add_argument("--format", choices=("binary", "text"), default="binary",
                       help="stegotext as rank file or as channel tokens")
        if name == "embed":
            p.add_argument("--history", help="text file with the channel history to continue from")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", parents=[common], help="run the exact checks and warden games")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per statistical check (0 skips them)")
    p.add_argument("--self-test-negative", action="store_true",
                   help="also run broken stubs, which must be reported as FAIL")
    p.add_argument("--json", help="write a machine-readable summary here")
    p.add_argument("--verbose", action="store_true", help="print every exact check")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="key cost against the PRF baseline")
    p.add_argument("--no-timing", action="store_true", help="skip embed/extract timings")
    p.add_argument("--json", help="write rows as JSON here")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config()
        return args.func(args, cfg)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
