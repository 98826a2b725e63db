import json
import math
import subprocess
import sys

import pytest

from gcms import cli
from gcms.convergence import converge_report, renewal_cylinders

RENEWAL = "builtin:renewal"
IDENTITY_AT_ONE = '{"lambda0":[0,0],"terms":[{"gamma":[1],"F":[],"lambda":[1,0]}]}'


def run_json(*argv):
    code, text = cli.run(list(argv))
    return code, json.loads(text)


def test_classify_example():
    code, doc = run_json("classify", "--matrix", RENEWAL)
    assert code == 0 and doc["report"]["single_empty_word"] is True
    assert doc["config"]["horizon"] == 64


def test_spectral_example():
    code, doc = run_json("spectral", "--matrix", RENEWAL, "--weight", IDENTITY_AT_ONE)
    assert code == 0 and doc["radius"] == 1 and doc["branch"] == "sigma"


def test_spectral_brute_force_flag():
    w = '{"lambda0":[0,0],"terms":[{"gamma":[1],"F":[],"lambda":[2,0]},{"gamma":[2],"F":[],"lambda":[3,0]}]}'
    code, doc = run_json("spectral", "--matrix", RENEWAL, "--weight", w, "--brute-force", "8")
    assert code == 0 and doc["radius"] == pytest.approx(math.sqrt(6), rel=1e-15)
    assert doc["brute_force_radius"] == pytest.approx(math.sqrt(6), rel=1e-15)


def test_enumerate_example():
    code, text = cli.run(["enumerate", "--matrix", RENEWAL, "--root", "1", "--length", "5", "--format", "csv"])
    assert code == 0
    _, rows = cli.read_csv_document(text)
    assert len(rows) == 16 and all(r["stem"].endswith("1") for r in rows)


def test_extend_check_outputs():
    code, doc = run_json("extend-check", "--matrix", "builtin:pair-renewal")
    assert code == 0 and doc["verdict"]["kind"] == "cycle"
    code, doc = run_json("extend-check", "--matrix", "builtin:full")
    assert code == 0 and doc["verdict"]["verdict"] == "NotExtendable"
    code, doc = run_json("extend-check", "--matrix", "builtin:ce1", "--alpha0", "2")
    assert code == 0 and doc["alpha0"]["passed"] is False


def test_conformal_and_scan():
    code, doc = run_json("conformal", "--matrix", RENEWAL, "--beta", repr(math.log(4)), "--max-atoms", "4")
    assert code == 0 and doc["measure"]["c_empty"] == pytest.approx(2 / 3, rel=1e-12)
    code, doc = run_json("conformal", "--matrix", RENEWAL, "--scan", "0.5,log2,0.8")
    assert [r["status"] for r in doc["scan"]["rows"]] == ["Diverges", "Diverges", "Converges"]
    assert doc["scan"]["boundary"] == math.log(2)


def test_verify_detects_perturbation():
    code, doc = run_json("verify", "--matrix", RENEWAL, "--beta", "1.0")
    assert code == 0 and doc["all_passed"] is True
    code, doc = run_json("verify", "--matrix", RENEWAL, "--beta", "1.0", "--perturb", "1:1e-3")
    assert code == 0 and doc["all_passed"] is False
    assert not any(c["passed"] for c in doc["checks"])


@pytest.mark.parametrize(
    "argv",
    [
        ["classify", "--matrix", "builtin:prime-renewal"],
        ["enumerate", "--matrix", "builtin:pair-renewal", "--root", "1,2", "--length", "4", "--format", "csv"],
        ["converge", "--lengths", "1..3"],
        ["spectral", "--matrix", RENEWAL, "--weight", IDENTITY_AT_ONE],
    ],
)
def test_outputs_are_deterministic(argv):
    assert cli.run(argv) == cli.run(argv)


def test_converge_csv_round_trips():
    code, text = cli.run(["converge", "--lengths", "1..4", "--betas", "1.0,0.8,0.72,0.70"])
    assert code == 0
    config, rows = cli.read_csv_document(text)
    assert config["lengths"] == "1..4"
    rep = converge_report(renewal_cylinders(range(1, 5)), [1.0, 0.8, 0.72, 0.70])
    expected = list(rep.rows())
    assert len(rows) == len(expected)
    for row, (alpha, beta, mu, nu, gap) in zip(rows, expected):
        assert row["alpha"] == alpha
        assert (float(row["beta"]), float(row["mu_beta"]), float(row["nu"]), float(row["gap"])) == (beta, mu, nu, gap)


def test_converge_json_reports_monotone_gaps():
    code, doc = run_json("converge", "--lengths", "1..4", "--betas", "auto(log2,+0.3,8 steps)", "--format", "json")
    assert code == 0 and doc["report"]["monotone"] is True and len(doc["report"]["betas"]) == 8


def test_unknown_subcommand_exit_code():
    code, doc = run_json("frobnicate")
    assert code == 2 and doc["error"]["type"] == "UnknownSubcommand"


def test_parse_error_carries_position():
    code, doc = run_json("classify", "--matrix", "rules:\nA(1,n)=1\nA(n+1 n)=1")
    assert code == 2 and doc["error"]["type"] == "ParseError"
    assert (doc["error"]["line"], doc["error"]["column"]) == (3, 8)


def test_precondition_error_exit_code():
    code, doc = run_json("enumerate", "--matrix", RENEWAL, "--root", "1,2", "--length", "2")
    assert code == 2
    code, doc = run_json("classify")
    assert code == 2


def test_internal_failure_exit_code(monkeypatch):
    def boom(args, A, H):
        raise RuntimeError("unexpected")

    monkeypatch.setitem(cli.HANDLERS, "classify", boom)
    code, doc = run_json("classify", "--matrix", RENEWAL)
    assert code == 1 and doc["error"]["type"] == "InternalError"


def test_horizon_from_environment(monkeypatch):
    monkeypatch.setenv("GCMS_HORIZON", "20")
    code, doc = run_json("classify", "--matrix", RENEWAL)
    assert doc["config"]["horizon"] == 20
    code, doc = run_json("classify", "--matrix", RENEWAL, "--horizon", "30")
    assert doc["config"]["horizon"] == 30


def test_matrix_from_file(tmp_path):
    p = tmp_path / "pair.txt"
    p.write_text("rules:\nA(1,n)=1\nA(n+1,n)=1\nA(2,2n)=1\n", encoding="utf-8")
    code, doc = run_json("classify", "--matrix", str(p), "--horizon", "32")
    assert code == 0 and doc["report"]["periodic_renewal"] is True


def test_output_file(tmp_path):
    out = tmp_path / "doc.json"
    code, text = cli.run(["classify", "--matrix", RENEWAL, "--output", str(out)])
    assert code == 0 and text == ""
    assert json.loads(out.read_text(encoding="utf-8"))["report"]["irreducible"] is True


def test_floats_use_seventeen_digits():
    assert cli.format_float(0.1) == "0.10000000000000001"
    assert json.loads(cli.dumps({"x": 1 / 3}))["x"] == 1 / 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gcms", "classify", "--matrix", RENEWAL], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["report"]["single_empty_word"] is True
