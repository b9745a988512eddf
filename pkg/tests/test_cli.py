import json
import pytest

from samplerlang.cli import main
from samplerlang.corpus import corpus_dir


C = corpus_dir()


def test_check_prints_type(capsys):
    assert main(["check", str(C / "von_neumann.smpl")]) == 0
    assert capsys.readouterr().out.strip() == "S B"


def test_check_reports_error(tmp_path, capsys):
    bad = tmp_path / "bad.smpl"
    bad.write_text("fun x : R => fun y : R => x < y")
    assert main(["check", str(bad)]) == 1
    assert "cross" in capsys.readouterr().err


def test_check_emits_derivation(tmp_path):
    out = tmp_path / "deriv.json"
    assert main(["check", str(C / "rejection.smpl"), "--emit-derivation", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["rule"] == "let"


def test_run_samples(capsys):
    assert main(["run", str(C / "geometric.smpl"), "--samples", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "index,value,weight"
    assert lines[1] == "1,1,1.0"


def test_run_dump_flattens_tuples(tmp_path):
    src = tmp_path / "pairs.smpl"
    src.write_text("let t = prng(fun x : R => x/2, 1) in t <*> t")
    out = tmp_path / "out.csv"
    assert main(["run", str(src), "--samples", "2", "--dump", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "index,value_0,value_1,weight"
    assert lines[1] == "1,1,1,1.0"


def test_run_engines_agree(tmp_path, capsys):
    for engine in ("bigstep", "stream"):
        assert main(["run", str(C / "importance.smpl"), "--samples", "5", "--engine", engine]) == 0
    out = capsys.readouterr().out
    halves = out.strip().split("index,value,weight")
    assert halves[1].strip() == halves[2].strip()


def test_normalize(capsys):
    assert main(["normalize", str(C / "importance.smpl")]) == 0
    text = capsys.readouterr().out
    assert text.startswith("reweight(")


def test_equiv_finds_proof(tmp_path, capsys):
    a = tmp_path / "a.smpl"
    b = tmp_path / "b.smpl"
    a.write_text("thin(2, thin(2, prng(fun x : R => x/2, 1)))")
    b.write_text("thin(4, prng(fun x : R => x/2, 1))")
    assert main(["equiv", str(a), str(b)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert "left" in data and "right" in data


def test_equiv_inconclusive(tmp_path, capsys):
    a = tmp_path / "a.smpl"
    b = tmp_path / "b.smpl"
    a.write_text("prng(fun x : R => x/2, 1)")
    b.write_text("tl(prng(fun x : R => 1 - x, 0))")
    assert main(["equiv", str(a), str(b), "--depth", "3"]) == 1
    assert "inconclusive" in capsys.readouterr().out


def test_verify_accepts_bundled_proof(capsys):
    code = main(
        [
            "verify",
            str(C / "proofs" / "von_neumann.json"),
            "--axioms",
            str(C / "von_neumann.smpl"),
        ]
    )
    assert code == 0
    assert "accept" in capsys.readouterr().out


def test_verify_rejects_tampered_proof(tmp_path, capsys):
    data = json.loads((C / "proofs" / "von_neumann.json").read_text())
    data["judgment"]["target"] = "bernoulli(0.9)"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code = main(["verify", str(bad), "--axioms", str(C / "von_neumann.smpl")])
    assert code == 1
    assert "reject" in capsys.readouterr().out


def test_test_target_pass_and_report(tmp_path, capsys):
    report = tmp_path / "report.json"
    code = main(
        [
            "test-target",
            str(C / "alternating.smpl"),
            "--measure",
            "bernoulli(0.5)",
            "--n",
            "5000",
            "--tol",
            "0.02",
            "--report",
            str(report),
        ]
    )
    assert code == 0
    data = json.loads(report.read_text())
    assert data["passed"] is True
    # reports are byte-deterministic given the seed
    first = report.read_bytes()
    main(
        [
            "test-target",
            str(C / "alternating.smpl"),
            "--measure",
            "bernoulli(0.5)",
            "--n",
            "5000",
            "--tol",
            "0.02",
            "--report",
            str(report),
        ]
    )
    assert report.read_bytes() == first


def test_test_target_fail_exit_code(capsys):
    code = main(
        [
            "test-target",
            str(C / "thinned_alternating.smpl"),
            "--measure",
            "bernoulli(0.5)",
            "--n",
            "2000",
        ]
    )
    assert code == 1


def test_print_config(capsys):
    assert main(["--print-config"]) == 0
    out = capsys.readouterr().out
    assert "seed = " in out and "n_ladder" in out


def test_seed_env_override(monkeypatch, capsys):
    monkeypatch.setenv("SAMPLERLANG_SEED", "0x1234")
    main(["--print-config"])
    assert "seed = 4660" in capsys.readouterr().out


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["run"])  # missing required --samples
    assert exc.value.code == 2


def test_examples_report_byte_deterministic(tmp_path):
    report = tmp_path / "examples.json"
    assert main(["examples", "--no-proofs", "--report", str(report)]) == 0
    first = report.read_bytes()
    assert main(["examples", "--no-proofs", "--report", str(report)]) == 0
    assert report.read_bytes() == first
    data = json.loads(first)
    assert data["passed"] == data["total"] == 8
