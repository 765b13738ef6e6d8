import json

import pytest

from otstego import cli

SMALL = ["--n", "48", "--eps-code", "1e-2"]


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def key(tmp_path):
    path = tmp_path / "k.key"
    assert run("keygen", "--seed", 1, "--out", path, *SMALL) == 0
    return path


def test_help_documents_every_flag():
    parser = cli.build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, p in sub.choices.items():
        for action in p._actions:
            if action.option_strings and action.dest != "help":
                assert action.help, f"{name} {action.option_strings} lacks help"


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run("keygen", "--out", "x", "--bogus")
    assert exc.value.code == 2


@pytest.mark.slow
def test_keygen_defaults(tmp_path, capsys):
    assert run("keygen", "--out", tmp_path / "d.key") == 0
    assert "key bits" in capsys.readouterr().out


def test_keygen_reproducible(tmp_path, key):
    other = tmp_path / "k2.key"
    run("keygen", "--seed", 1, "--out", other, *SMALL)
    assert other.read_bytes() == key.read_bytes()


def test_keygen_zero_entropy_channel(tmp_path, capsys):
    corpus = tmp_path / "c.txt"
    corpus.write_text("abababab")
    model = tmp_path / "m.json"
    assert run("channel-build", "--corpus", corpus, "--order", 1, "--min-entropy", 0, "--out", model) == 0
    assert run("keygen", "--channel", model, "--out", tmp_path / "k", *SMALL) == 3
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("fmt", ["binary", "text"])
def test_embed_extract_round_trip(tmp_path, key, fmt):
    msg = tmp_path / "m.txt"
    msg.write_bytes(b"hi!")
    st, out = tmp_path / "st", tmp_path / "out"
    assert run("embed", "--seed", 2, "--key", key, "--in", msg, "--out", st, "--format", fmt) == 0
    assert run("extract", "--key", key, "--in", st, "--out", out, "--format", fmt) == 0
    assert out.read_bytes() == b"hi!"


def test_one_time_key_not_reused(tmp_path, key, capsys):
    msg = tmp_path / "m"
    msg.write_bytes(b"x")
    assert run("embed", "--key", key, "--in", msg, "--out", tmp_path / "a") == 0
    assert run("embed", "--key", key, "--in", msg, "--out", tmp_path / "b") == 3
    assert "already used" in capsys.readouterr().err


def test_message_too_long(tmp_path, key):
    msg = tmp_path / "m"
    msg.write_bytes(b"far too long for thirty-two bits")
    assert run("embed", "--key", key, "--in", msg, "--out", tmp_path / "st") == 3


def test_stream_three_messages(tmp_path):
    alice, bob = tmp_path / "alice.json", tmp_path / "bob.json"
    seed = "00" * 16
    for path in (alice, bob):
        assert run("session-init", "--master-seed", seed, "--out", path, *SMALL) == 0
    for k, payload in enumerate([b"one", b"two", b"3"]):
        msg, st, out = tmp_path / f"m{k}", tmp_path / f"s{k}", tmp_path / f"o{k}"
        msg.write_bytes(payload)
        assert run("embed", "--seed", k, "--session", alice, "--in", msg, "--out", st) == 0
        assert run("extract", "--session", bob, "--in", st, "--out", out) == 0
        assert out.read_bytes() == payload
    a, b = json.loads(alice.read_text()), json.loads(bob.read_text())
    assert a["counter"] == b["counter"] and a["history"] == b["history"]


def test_embed_needs_exactly_one_mode(tmp_path):
    msg = tmp_path / "m"
    msg.write_bytes(b"x")
    assert run("embed", "--in", msg, "--out", tmp_path / "o") == 3


def test_missing_file(tmp_path, capsys):
    assert run("extract", "--key", tmp_path / "nope", "--in", tmp_path / "x", "--out", tmp_path / "o") == 3


def test_verify_no_trials(capsys):
    assert run("verify", "--trials", 0) == 0
    assert "INCONCLUSIVE" in capsys.readouterr().out


def test_verify_negative_self_test(tmp_path, capsys):
    report = tmp_path / "r.json"
    assert run("verify", "--trials", 0, "--self-test-negative", "--json", report) == 0
    out = capsys.readouterr().out
    assert "FAIL (expected)" in out
    assert json.loads(report.read_text())["failures"] == 0


def test_bench_reproducible_and_linear(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("bench", "--no-timing", "--json", a) == 0
    assert run("bench", "--no-timing", "--json", b) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = json.loads(a.read_text())
    for row in rows:
        assert row["key_bits"] <= row["prf_baseline"]
    same_eps = [r for r in rows if r["eps_family"] == 2.0 ** -20]
    for lo, hi in zip(same_eps, same_eps[1:]):
        bits_ratio = hi["key_bits"] / lo["key_bits"]
        length_ratio = hi["lambda"] / lo["lambda"]
        assert abs(bits_ratio / length_ratio - 1) <= 0.10


def test_config_file(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 24, "eps_code": 0.01}))
    monkeypatch.setenv(cli.CONFIG_ENV, str(cfg))
    assert run("session-init", "--master-seed", "ab", "--out", tmp_path / "s.json") == 0
    assert json.loads((tmp_path / "s.json").read_text())["params"]["n"] == 24
    cfg.write_text(json.dumps({"colour": 1}))
    assert run("session-init", "--out", tmp_path / "t.json") == 3


def test_frame_round_trip():
    bits = cli.frame_message(b"\x00\xffab", 64)
    assert bits.size == 64
    assert cli.unframe_message(bits) == b"\x00\xffab"
