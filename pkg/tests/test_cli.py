import json
import subprocess
import sys

import pytest

from bianchi_modsym.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, provenance


@pytest.fixture
def run(cache_dir, capsys):
    def _run(*argv):
        rc = main(["--cache", str(cache_dir), *map(str, argv)])
        out = capsys.readouterr()
        return rc, out.out, out.err
    return _run


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory, cache_dir):
    """enumerate -> symbols for |c| < 8, run once for the module."""
    d = tmp_path_factory.mktemp("pipe")
    base = ["--cache", str(cache_dir)]
    assert main(base + ["enumerate", "--xmax", "8", "--out", str(d / "q.csv")]) == EXIT_OK
    assert main(base + ["symbols", "--fractions", str(d / "q.csv"), "--out", str(d / "s.csv")]) == EXIT_OK
    return d


def test_enumerate_is_byte_identical(run, tmp_path):
    for name in ("a.csv", "b.csv"):
        rc, out, _ = run("enumerate", "--xmax", 6, "--divisor", "11", "--out", tmp_path / name)
        assert rc == EXIT_OK and "class (11)" in out
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_symbols_rerun_is_byte_identical(pipeline, run, tmp_path):
    rc, _, _ = run("symbols", "--fractions", pipeline / "q.csv", "--out", tmp_path / "s2.csv",
                   "--threads", 2)
    assert rc == EXIT_OK
    assert (pipeline / "s.csv").read_bytes() == (tmp_path / "s2.csv").read_bytes()


def test_symbols_header_carries_config_hash(pipeline):
    head = (pipeline / "s.csv").read_text().splitlines()
    assert head[0].startswith("# field=-1 level=11 divisor=1 X=8.0 config=")
    assert head[1] == "a,c,absc,class,symbol,err,terms"
    assert len(head) == 2 + 1000


def test_stats_report_and_curves(pipeline, run, tmp_path):
    rc, out, _ = run("stats", "--symbols", pipeline / "s.csv", "--xgrid", "2,3,5,8",
                     "--report", tmp_path / "r.json", "--curves", tmp_path / "c.csv",
                     "--hist", tmp_path / "h.csv", "--center")
    assert rc == EXIT_OK and "C_fit=" in out
    rep = json.loads((tmp_path / "r.json").read_text())
    assert len(rep["provenance"]["config_hash"]) == 16
    assert rep["summary"]["rows"][-1]["size"] == 1000
    assert "ks_centered_at_X" in rep and "max_rel_dev" in rep["mgf"]
    assert len((tmp_path / "c.csv").read_text().splitlines()) == 5
    assert (tmp_path / "h.csv").read_text().startswith("left,right,density,normal")
    rc2, _, _ = run("stats", "--symbols", pipeline / "s.csv", "--xgrid", "2,3,5,8",
                    "--report", tmp_path / "r2.json", "--center")
    assert (tmp_path / "r2.json").read_bytes() == (tmp_path / "r.json").read_bytes()


def test_provenance_hash_depends_on_parameters():
    a = provenance("stats", {"x": 1})
    assert a == provenance("stats", {"x": 1})
    assert a["config_hash"] != provenance("stats", {"x": 2})["config_hash"]
    assert a["config_hash"] != provenance("symbols", {"x": 1})["config_hash"]


def test_coeffs_writes_table(run, tmp_path):
    rc, out, _ = run("coeffs", "--norm-bound", 500, "--out", tmp_path / "t.csv")
    assert rc == EXIT_OK and "norm 500" in out
    assert (tmp_path / "t.csv").read_text().startswith("#")


def test_verify_passing_subset(run, tmp_path):
    rc, out, _ = run("verify", "--criteria", "13-14", "--report", tmp_path / "v.json")
    assert rc == EXIT_OK and "2/2 criteria passed" in out
    rep = json.loads((tmp_path / "v.json").read_text())
    assert [r["number"] for r in rep["results"]] == [13, 14]
    assert len(rep["provenance"]["config_hash"]) == 16


def test_verify_failure_exits_one(run, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"divisors": ["1"]}))
    rc, out, _ = run("verify", "--config", cfg, "--criteria", "5")
    assert rc == EXIT_FAIL and "[FAIL]  5" in out


def test_non_euclidean_field_is_a_usage_error(run, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"form": {"field": -19, "level": "11"}}))
    rc, _, err = run("verify", "--config", cfg)
    assert rc == EXIT_USAGE and "Euclidean" in err
    rc, _, err = run("enumerate", "--field", -19, "--xmax", 5, "--out", tmp_path / "q.csv")
    assert rc == EXIT_USAGE and err.startswith("error:")


@pytest.mark.parametrize("argv,needle", [
    (["verify", "--criteria", "0-3"], "1 to 14"),
    (["verify", "--criteria", "x"], "ranges"),
    (["stats", "--symbols", "MISSING", "--xgrid", "a,b"], "comma-separated"),
])
def test_usage_errors(run, argv, needle):
    rc, _, err = run(*argv)
    assert rc == EXIT_USAGE and needle in err


def test_input_errors(run, pipeline, tmp_path):
    rc, _, err = run("stats", "--symbols", tmp_path / "missing.csv")
    assert rc == EXIT_USAGE and err.startswith("error:")
    rc, _, err = run("stats", "--symbols", pipeline / "s.csv", "--xgrid", "2,3")
    assert rc == EXIT_USAGE and "factor of 4" in err
    rc, _, err = run("stats", "--symbols", pipeline / "s.csv", "--c-value", "-1")
    assert rc == EXIT_USAGE and "positive" in err
    bad = tmp_path / "f.json"
    bad.write_text("{")
    rc, _, err = run("constants", "--form", bad)
    assert rc == EXIT_USAGE and "malformed JSON" in err
    bad.write_text(json.dumps({"level": "11"}))
    rc, _, err = run("coeffs", "--form", bad)
    assert rc == EXIT_USAGE and "'field'" in err
    rc, _, err = run("enumerate", "--level", "11", "--divisor", "3", "--xmax", 5,
                     "--out", tmp_path / "q.csv")
    assert rc == EXIT_USAGE


def test_argparse_errors_exit_two(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["enumerate"]) == EXIT_USAGE
    capsys.readouterr()


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "bianchi_modsym", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
