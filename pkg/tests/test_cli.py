import csv
import io
import json
import shutil
import subprocess

import jsonschema
import mpmath
import pytest
from mpmath import mpf

from qzeros import load_schema
from qzeros.cli import EXIT_DOMAIN, EXIT_FAIL, EXIT_GUARD, EXIT_OK, EXIT_USAGE, main, read_config


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_origin_is_one(capsys):
    code, out, _ = run(capsys, "eval", "--family", "ramanujan-a", "--alpha", "1", "--a", "0",
                       "--q", "0.5", "--z", "0")
    assert code == EXIT_OK
    d = json.loads(out)
    assert mpf(d["value"]["re"]) == 1 and mpf(d["value"]["im"]) == 0
    assert d["spec"]["params"] == {"alpha": "1", "q": "0.5", "a": "0"}
    jsonschema.validate(d, load_schema("eval"))


def test_eval_qbessel_origin(capsys):
    code, out, _ = run(capsys, "eval", "--family", "qbessel2", "--nu", "0", "--q", "0.5",
                       "--z", "0")
    assert code == EXIT_OK and mpf(json.loads(out)["value"]["re"]) == 1


def test_eval_domain_error_names_constraint(capsys):
    code, _, err = run(capsys, "eval", "--family", "ramanujan-a", "--alpha", "1", "--a", "0",
                       "--q", "1.5", "--z", "0")
    assert code == EXIT_DOMAIN
    assert "q must lie in (0, 1)" in err


def test_eval_full_precision_and_digits(capsys):
    args = ["eval", "--family", "ramanujan-a", "--alpha", "1", "--a", "0", "--q", "0.5",
            "--z", "-0.3"]
    _, out, _ = run(capsys, *args)
    full = json.loads(out)["value"]["re"]
    assert len(full.replace(".", "").lstrip("0")) >= 70
    _, out, _ = run(capsys, *args, "--digits", "8")
    with mpmath.workprec(256):
        assert json.loads(out)["value"]["re"] == mpmath.nstr(mpf(full), 8)


def test_eval_csv_columns(capsys):
    _, out, _ = run(capsys, "eval", "--family", "qbessel1", "--nu", "0.5", "--q", "0.5",
                    "--z", "0.4", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["re", "im", "N", "R", "tail"] and len(rows) == 2


def test_precision_environment(capsys, monkeypatch):
    monkeypatch.setenv("QZEROS_PRECISION", "128")
    _, out, _ = run(capsys, "eval", "--family", "qbessel2", "--nu", "0", "--q", "0.5",
                    "--z", "1")
    assert json.loads(out)["precision_bits"] == 128
    _, out, _ = run(capsys, "eval", "--family", "qbessel2", "--nu", "0", "--q", "0.5",
                    "--z", "1", "--precision", "320")
    assert json.loads(out)["precision_bits"] == 320


def test_precision_floor(capsys):
    code, _, _ = run(capsys, "eval", "--family", "qbessel2", "--nu", "0", "--q", "0.5",
                     "--z", "1", "--precision", "32")
    assert code == EXIT_DOMAIN


def test_zeros_linear(capsys):
    code, out, _ = run(capsys, "zeros", "--family", "ramanujan-a", "--alpha", "1", "--q", "0.5",
                       "--n", "1")
    d = json.loads(out)
    assert code == EXIT_OK and [mpf(z["re"]) for z in d["zeros"]] == [1]
    assert d["all_real"] and not d["all_negative"]
    jsonschema.validate(d, load_schema("zeroset"))


def test_zeros_quadratic(capsys, oracle):
    _, out, _ = run(capsys, "zeros", "--family", "ramanujan-a", "--alpha", "1", "--q", "0.5",
                    "--n", "2", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["index", "re", "im", "residual", "real"]
    assert [r[1][:20] for r in rows[1:]] == [z[:20] for z in oracle["poly_n2_zeros"]]


def test_zeros_entire_requires_count(capsys):
    code, _, err = run(capsys, "zeros", "--family", "ramanujan-a", "--alpha", "1", "--a", "0",
                       "--q", "0.5")
    assert code == EXIT_USAGE and "--count" in err
    code, _, _ = run(capsys, "zeros", "--family", "ramanujan-a", "--alpha", "1", "--a", "0",
                     "--q", "0.5", "--count", "0")
    assert code == EXIT_USAGE


def test_zeros_entire_validates(capsys):
    code, out, _ = run(capsys, "zeros", "--family", "limit-entire", "--m", "0", "--betas", "1",
                       "--count", "2")
    d = json.loads(out)
    assert code == EXIT_OK and d["all_negative"] and len(d["zeros"]) == 2
    jsonschema.validate(d, load_schema("zeroset"))


def test_zeros_guard_failure_exit(capsys, monkeypatch):
    from qzeros import GuardFailure, cli

    def boom(*a, **k):
        raise GuardFailure("sampled Rouche guard failed", {"N": 8})
    monkeypatch.setattr(cli, "locate_entire_zeros", boom)
    code, _, err = run(capsys, "zeros", "--family", "qbessel2", "--nu", "0", "--q", "0.5",
                       "--count", "2")
    assert code == EXIT_GUARD and "precision" in err


def test_verify_unknown_suite(capsys):
    code, _, _ = run(capsys, "verify", "nosuch")
    assert code == EXIT_DOMAIN


def test_verify_terminating_grid_passes(capsys):
    code, out, _ = run(capsys, "verify", "poly", "--set", "count=0", "--format", "json")
    d = json.loads(out)
    assert code == EXIT_OK and d["passed"]
    assert d["reports"][0]["instances_run"] == 160
    jsonschema.validate(d, load_schema("report"))


def test_verify_failure_exit_code(capsys):
    # alpha = 0 with distinct bases: the seeded default draw contains a complex-zero instance
    code, out, _ = run(capsys, "verify", "poly", "--set", "q=0.5", "--set", "alpha=1",
                       "--set", "n=1", "--format", "json")
    d = json.loads(out)
    assert code == EXIT_FAIL and not d["passed"]
    jsonschema.validate(d, load_schema("report"))


def test_verify_identities_table(capsys):
    code, out, _ = run(capsys, "verify", "identities", "--set", "count=2", "--format", "table")
    assert code == EXIT_OK and out.startswith("identities")


def test_verify_config_file(capsys, tmp_path):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("[poly]\n# small sweep\nq = 0.3, 0.5\nalpha = 1\nn = 1,2,3\ncount = 0\n")
    assert read_config(cfg) == {"q": "0.3, 0.5", "alpha": "1", "n": "1,2,3", "count": "0"}
    code, out, _ = run(capsys, "verify", "poly", "--config", str(cfg), "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == EXIT_OK
    assert rows[0] == ["tag", "run", "passed", "skipped", "metric", "worst"]
    assert rows[1][:3] == ["poly", "6", "6"]


def test_verify_output_file(capsys, tmp_path):
    path = tmp_path / "order.json"
    code, out, _ = run(capsys, "verify", "order", "--format", "json", "--output", str(path))
    assert code == EXIT_OK and out == ""
    assert json.loads(path.read_text())["passed"]


def test_atlas_qbessel(capsys):
    code, out, _ = run(capsys, "atlas", "--family", "qbessel2", "--grid", "nu=0,0.5",
                       "--grid", "q=0.3,0.6", "--count", "3")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == EXIT_OK
    assert rows[0] == ["nu", "q", "index", "zero", "residual", "error"]
    body = rows[1:]
    assert len(body) == 12
    for g in range(4):
        zeros = [mpf(r[3]) for r in body[3 * g: 3 * g + 3]]
        assert zeros == sorted(set(zeros)) and zeros[0] > 0


def test_atlas_empty_grid(capsys):
    code, out, _ = run(capsys, "atlas", "--family", "qbessel2", "--count", "3")
    assert code == EXIT_OK and out.strip() == "index,zero,residual,error"


def test_atlas_zero_count(capsys):
    code, _, _ = run(capsys, "atlas", "--family", "qbessel2", "--grid", "nu=0", "--count", "0")
    assert code == EXIT_USAGE


def test_atlas_row_errors(capsys):
    code, out, _ = run(capsys, "atlas", "--family", "qbessel2", "--grid", "nu=0,-2",
                       "--grid", "q=0.5", "--count", "1")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == EXIT_OK
    assert rows[-1][-1].startswith("DomainError")
    code, _, _ = run(capsys, "atlas", "--family", "qbessel2", "--grid", "nu=-2",
                     "--grid", "q=0.5", "--count", "1")
    assert code == EXIT_GUARD


def test_pf_command(capsys):
    code, out, _ = run(capsys, "pf", "--coeffs", "1,0,1", "--window", "3", "--order", "2")
    d = json.loads(out)
    assert code == EXIT_OK and not d["pf_by_roots"] and not d["minors"]["pf_consistent"]


def test_no_command_is_usage(capsys):
    assert run(capsys)[0] == EXIT_USAGE


def test_deterministic_output(capsys):
    args = ["zeros", "--family", "qbessel2", "--nu", "0.5", "--q", "0.5", "--count", "3"]
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


@pytest.mark.skipif(shutil.which("qzeros") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["qzeros", "eval", "--family", "qbessel2", "--nu", "0", "--q", "0.5",
                           "--z", "0", "--format", "table"], capture_output=True, text=True)
    assert proc.returncode == 0 and "value = 1" in proc.stdout
