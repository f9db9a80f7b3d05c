import json
import subprocess
import sys

from entropyforge.cli import run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_degrees_csv(capsys):
    code, out, _ = _run(capsys, "degrees", "--family", "kmt_reduction", "-p", "k=2,l=3", "--steps", "13", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("n,d_n")
    assert [l.split(",")[1] for l in lines[-2:]] == ["681", "1562"]


def test_output_is_deterministic(capsys):
    argv = ("degrees", "--family", "qrt_example", "--steps", "12", "--format", "json")
    first = _run(capsys, *argv)[1]
    assert _run(capsys, *argv)[1] == first


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("ENTROPYFORGE_SEED", "17")
    out = json.loads(_run(capsys, "degrees", "--family", "qrt_example", "--steps", "6", "--format", "json")[1])
    assert out["seed"] == 17


def test_classify_json(capsys):
    code, out, _ = _run(capsys, "classify", "--family", "P_ell", "-p", "k=3,l=3")
    data = json.loads(out)
    assert code == 0 and data["salem"] is True
    assert abs(data["dynamicalDegree"] - 3.254264) < 1e-6


def test_singularity_table(capsys):
    code, out, _ = _run(capsys, "singularity", "--family", "qrt_example")
    assert code == 0 and "{0, ∞, ∞, 0}" in out


def test_assert_confined_failure_exits_1(capsys):
    code, _, _ = _run(capsys, "singularity", "--family", "kmt_reduction", "-p", "k=3,l=3,violate_constraint=1",
                      "--assert-confined")
    assert code == 1


def test_usage_error_exits_2(capsys):
    assert run(["--badflag"]) == 2
    assert "Recurrence file format" in capsys.readouterr().err


def test_bad_recurrence_file_exits_2(tmp_path, capsys):
    f = tmp_path / "bad.rec"
    f.write_text("x[n+1] = x[n] +* 2\n")
    code, _, err = _run(capsys, "degrees", "--file", str(f))
    assert code == 2 and "line 1" in err


def test_recurrence_file(tmp_path, capsys):
    f = tmp_path / "qrt.rec"
    f.write_text("# QRT-type map\nx[n+1]*x[n-1] = 1 - a[n]/x[n]\na: const 3\n")
    code, out, _ = _run(capsys, "degrees", "--file", str(f), "--steps", "8", "--format", "csv")
    assert code == 0 and out.strip().splitlines()[-1].split(",")[1] == "7"


def test_lattice_commands(capsys):
    code, out, _ = _run(capsys, "lattice", "trace", "--family", "kmt_lattice", "-p", "k=2", "--fig", "2",
                        "--assert-confined", "--format", "json")
    assert code == 0 and json.loads(out)["verdict"] == "confined"
    code, out, _ = _run(capsys, "lattice", "evolve", "--family", "kmt_lattice", "-p", "k=3", "--modular",
                        "--size", "4", "--format", "csv")
    assert code == 0 and len(out.strip().splitlines()) == 26


def test_reduce_cross_validate(capsys):
    code, out, _ = _run(capsys, "reduce", "--family", "kmt_lattice", "-p", "k=2", "--ell", "3", "--cross-validate")
    assert code == 0 and "x[n+3]" in out


def test_charpoly_and_conserve(capsys):
    assert _run(capsys, "charpoly", "--family", "qrt_example")[0] == 0
    assert _run(capsys, "conserve", "--family", "kmt_reduction", "-p", "k=2,l=2")[0] == 0


def test_reproduce_subset(capsys):
    code, out, _ = _run(capsys, "reproduce", "--criteria", "3,5")
    assert code == 0 and "[PASS] criterion 3" in out and "[PASS] criterion 5" in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "entropyforge", "charpoly", "--family", "qrt_example", "--format", "json"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)
