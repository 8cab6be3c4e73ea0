import pytest

from ftcontrol.cli import main

CONFIG_TEMPLATE = """\
seed: 42
duration: 4.0
mode: pl-always
artifact_dir: {art}
scoring_window: [1.0, 4.0]
waypoints:
  - {{time: 0.0, target: [0.6, -0.4]}}
  - {{time: 1.8, target: [-0.4, 0.6]}}
faults:
  - {{kind: encoder-freeze, channel: 1, time: 2.0}}
"""


@pytest.fixture(scope="module")
def config_path(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    path = root / "scenario.yaml"
    # a shared artifact cache keeps repeated invocations from re-fitting
    path.write_text(CONFIG_TEMPLATE.format(art=root / "artifacts"))
    return str(path)


def test_run_writes_csv_and_summary(config_path, tmp_path, capsys):
    out = tmp_path / "run.csv"
    rc = main(["run", "--config", config_path, "--mode", "deterministic",
               "--seed", "5", "--out", str(out)])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "mode=deterministic seed=5" in captured
    assert "fault isolated at" in captured
    assert out.exists()
    header = out.read_text().splitlines()[0]
    assert header.startswith("t,q1,q2,") and header.endswith("detected,isolated")


def test_run_repeats_are_byte_identical(config_path, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["run", "--config", config_path, "--mode", "pl-always",
                     "--seed", "9", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_reports_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("mode: telepathy\n")
    rc = main(["run", "--config", str(bad)])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_compare_table_and_csv(config_path, tmp_path, capsys):
    out = tmp_path / "cmp.csv"
    rc = main(["compare", "--config", config_path, "--seeds", "5",
               "--modes", "fixed", "deterministic", "--out", str(out)])
    assert rc == 0
    assert "fixed" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    assert lines[0] == "mode,faulty_joint_mse,healthy_joint_mse,seeds"
    assert len(lines) == 3


def test_calibrate_writes_artifacts(config_path, tmp_path, capsys):
    out = tmp_path / "art"
    rc = main(["calibrate", "--config", config_path, "--out", str(out)])
    assert rc == 0
    for name in ["gpr_model.npz", "monitor_p.npz", "monitor_v.npz",
                 "monitor_dr.npz"]:
        assert (out / name).exists()
    assert "threshold" in capsys.readouterr().out


def test_unknown_mode_rejected_by_parser(config_path):
    with pytest.raises(SystemExit):
        main(["run", "--config", config_path, "--mode", "psychic"])
