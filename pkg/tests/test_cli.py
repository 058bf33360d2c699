import json

from app.cli import main

SMALL_FLAGS = ["--ell", "5", "--n", "30", "--p", "0.2", "--r", "3", "--k", "6", "--delta", "0.5"]


def test_build_then_verify_stored_instance(tmp_path, capsys):
    assert main(["build", *SMALL_FLAGS, "--seed", "2", "--out", str(tmp_path)]) == 0
    built = json.loads(capsys.readouterr().out)
    assert built[0]["seed"] == 2
    assert (tmp_path / "instance_2.graph").exists()
    assert (tmp_path / "final_2.part").exists()

    code = main([
        "verify", "--instance", str(tmp_path / "instance_2.graph"),
        "--p", "0.2", "--k", "6", "--delta", "0.5", "--trials", "20",
    ])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["projectionTrials"] == 20


def test_invalid_ell_exits_with_two(capsys):
    assert main(["verify", "--ell", "4", "--n", "30", "--p", "0.2", "--r", "3", "--k", "6", "--delta", "0.5"]) == 2
    assert "invalid configuration" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path, capsys):
    config = tmp_path / "run.env"
    config.write_text("ELL=5\nN=30\nP=0.2\nR=3\nK=6\nDELTA=0.5\nSEEDS=1 2\n")
    assert main(["baseline", "--config", str(config), "--n", "60"]) == 0
    results = json.loads(capsys.readouterr().out)
    assert [result["seed"] for result in results] == [1, 2]
    assert all(result["baseline"]["cyclesAfter"] == 0 for result in results)


def test_experiment_command_writes_summary(tmp_path, capsys):
    code = main(["experiment", *SMALL_FLAGS, "--seed", "5", "--trials", "20", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "summary.csv").exists()
    assert (tmp_path / "report_5.json").exists()
    assert "1 runs written" in capsys.readouterr().out
