"""Driver contract: config parsing, exit codes, output formats, determinism."""

import json
from fractions import Fraction

import mpmath as mp
import pytest

mp.mp.prec = 120

from certheat.cli import decimal_digits, main, parse_config
from certheat.dyadic import DyadicDecimal


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


DISK_CFG = """\
# harmonic mode on the unit circle
problem = disk
g = cos 3
r = 1/2
theta = 0
bits = 20
"""

INTERVAL_CFG = """\
problem = interval
g = sine 1:1
l = 1
alpha = 1
t0 = 1/4
t = 1/4
x = 1/2
bits = 16
"""


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_config_round_trip(tmp_path):
    path = write(tmp_path, "c.cfg", "a = 1\n# note\nb = pl 0:0 1:1\n")
    assert parse_config(path) == {"a": "1", "b": "pl 0:0 1:1"}


def test_solve_disk_harmonic_example(tmp_path, capsys):
    cfg = write(tmp_path, "d.cfg", DISK_CFG)
    out = str(tmp_path / "r.json")
    code, text, _ = run(["solve", "--config", cfg, "--out", out], capsys)
    assert code == 0
    assert "error  <= 2^-20" in text
    rec = json.loads((tmp_path / "r.json").read_text())
    lit = DyadicDecimal.parse(rec["value_dyadic"])
    assert abs(lit.as_fraction() - Fraction(1, 8)) <= Fraction(1, 2 ** 20)
    assert rec["value_decimal"] == "0.12500000"
    assert rec["plan"]["budget"] == [["truncation", 21], ["summation", 21]]


def test_solve_interval_eigenmode_example(tmp_path, capsys):
    cfg = write(tmp_path, "i.cfg", INTERVAL_CFG)
    out = str(tmp_path / "r.json")
    code, text, _ = run(["solve", "--config", cfg, "--out", out], capsys)
    assert code == 0
    rec = json.loads((tmp_path / "r.json").read_text())
    got = DyadicDecimal.parse(rec["value_dyadic"]).as_fraction()
    want = mp.e ** (-mp.pi ** 2 / 4)
    assert abs(mp.mpf(got.numerator) / got.denominator - want) \
        <= mp.mpf(2) ** -16 + mp.mpf(2) ** -60


def test_bits_flag_overrides_config(tmp_path, capsys):
    cfg = write(tmp_path, "d.cfg", DISK_CFG)
    code, text, _ = run(["solve", "--config", cfg, "--bits", "12"], capsys)
    assert code == 0 and "error  <= 2^-12" in text


def test_exit_codes(tmp_path, capsys):
    bad = write(tmp_path, "bad.cfg", "nonsense without equals\n")
    assert run(["solve", "--config", bad], capsys)[0] == 2

    unk = write(tmp_path, "unk.cfg", DISK_CFG + "color = blue\n")
    assert run(["solve", "--config", unk], capsys)[0] == 2

    noprob = write(tmp_path, "np.cfg", "bits = 10\n")
    assert run(["solve", "--config", noprob], capsys)[0] == 2

    dup = write(tmp_path, "dup.cfg", "problem = disk\nproblem = disk\n")
    assert run(["solve", "--config", dup], capsys)[0] == 2

    assert run(["solve"], capsys)[0] == 2   # no config at all

    oob = write(tmp_path, "oob.cfg",
                "problem = disk\ng = cos 2\nr = 95/100\ntheta = 0\nbits = 10\n")
    code, _, err = run(["solve", "--config", oob], capsys)
    assert code == 3
    assert "radius" in err          # message names the violated precondition

    assert run(["verify", "bogus"], capsys)[0] == 2
    assert run(["solve", "--config", write(tmp_path, "d2.cfg", DISK_CFG),
                "--threads", "0"], capsys)[0] == 2


def test_bench_family_csv(tmp_path, capsys):
    cfg = write(tmp_path, "b.cfg",
                "pipeline = neumann\nsizes = 4..7\nseed = 1\nrepeats = 1\n")
    code, text, _ = run(["bench", "--config", cfg], capsys)
    assert code == 0
    lines = text.strip().split("\n")
    assert lines[0] == "pipeline,n_vars,precision_bits,wall_ms,value,count,ok"
    assert len(lines) == 5
    for i, line in enumerate(lines[1:]):
        cells = line.split(",")
        assert cells[0] == "neumann" and int(cells[1]) == 4 + i
        assert cells[-1] == "true"


def test_bench_empty_family(tmp_path, capsys):
    cfg = write(tmp_path, "e.cfg", "pipeline = disk\nsizes = none\n")
    code, text, _ = run(["bench", "--config", cfg], capsys)
    assert code == 0
    assert text == "pipeline,n_vars,precision_bits,wall_ms,value,count,ok\n"


def test_bench_explicit_instance(tmp_path, capsys):
    cfg = write(tmp_path, "x.cfg",
                "pipeline = interval\nweights = 1 2\ntarget = 3\nrepeats = 1\n")
    code, text, _ = run(["bench", "--config", cfg], capsys)
    assert code == 0
    row = text.strip().split("\n")[1].split(",")
    assert row[:3] == ["interval", "2", "10"] and row[5:] == ["1", "true"]


def test_bench_rejects_unknown_pipeline(tmp_path, capsys):
    cfg = write(tmp_path, "p.cfg", "pipeline = sphere\nsizes = 4..5\n")
    assert run(["bench", "--config", cfg], capsys)[0] == 2


def test_result_file_determinism(tmp_path, capsys):
    cfg = write(tmp_path, "d.cfg", DISK_CFG)
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert run(["solve", "--config", cfg, "--out", a], capsys)[0] == 0
    assert run(["solve", "--config", cfg, "--out", b], capsys)[0] == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_verify_cli_reports_checks(capsys):
    code, text, _ = run(["verify", "series"], capsys)
    assert code == 0
    lines = text.strip().split("\n")
    assert all(l.startswith("PASS series/") for l in lines[:-1])
    assert lines[-1].endswith("checks passed")


def test_halfline_solve_records_plan_params(tmp_path, capsys):
    cfg = write(tmp_path, "h.cfg", "\n".join([
        "problem = halfline-boundary", "h = poly 0 1", "alpha = 1",
        "x0 = 1/2", "x1 = 3/2", "t = 1/2", "x = 1", "bits = 10", ""]))
    out = str(tmp_path / "r.json")
    code, _, _ = run(["solve", "--config", cfg, "--out", out], capsys)
    assert code == 0
    rec = json.loads((tmp_path / "r.json").read_text())
    assert rec["plan"]["params"]["N"] >= 1
    labels = [b[0] for b in rec["plan"]["budget"]]
    assert labels  # budget split is part of the printed plan summary


def test_neumann_counting_force(tmp_path, capsys):
    cfg = write(tmp_path, "n.cfg",
                "problem = neumann\nforce = counting 3 1 2\nt = 1\nbits = 12\n")
    out = str(tmp_path / "r.json")
    code, _, _ = run(["solve", "--config", cfg, "--out", out], capsys)
    assert code == 0
    rec = json.loads((tmp_path / "r.json").read_text())
    got = DyadicDecimal.parse(rec["value_dyadic"]).as_fraction()
    assert got == Fraction(1, 16)


def test_decimal_digit_budget():
    # ceil(n log10 2) + 1: never prints more precision than certified
    assert decimal_digits(20) == 8
    assert decimal_digits(16) == 6
    assert decimal_digits(1) == 2
    assert decimal_digits(30) == 11
