import json

import pytest

from wzcbf.cli import build_parser, main
from wzcbf.experiments import EXPERIMENTS, ConfigError, ExperimentConfig, config_hash


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path), "--quiet"])


def test_every_experiment_has_a_subcommand():
    parser = build_parser()
    for name in EXPERIMENTS:
        extra = ["additive"] if name in ("wz-solution-convergence", "usc") else []
        assert parser.parse_args([name, *extra]).experiment == name


def test_passing_run_writes_manifest(tmp_path):
    assert run(tmp_path, "tail-diagnostic") == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["passed"] is True
    assert manifest["experiment"] == "tail-diagnostic"
    assert [f["name"] for f in manifest["files"]] == ["tail_diagnostic.csv"]
    cfg = ExperimentConfig.from_dict(manifest["config"])
    assert config_hash(cfg) == manifest["config_hash"]
    assert {"wzcbf", "python", "numpy", "scipy"} <= set(manifest["versions"])


def test_report_lines(tmp_path, capsys):
    assert main(["tail-diagnostic", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(ln.startswith("PASS  tail-diagnostic:") for ln in lines)


def test_failed_check_exits_2(tmp_path):
    # with seed 0 the additive radii are not monotone in delta
    assert run(tmp_path, "radius-convergence", "--seed", "0") == 2
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["passed"] is False


@pytest.mark.parametrize(
    "config,needle",
    [({"n": 7}, "n:"), ({"dt": -1.0}, "dt:"), ({"bogus": 1}, "bogus"), ([1, 2], "top level")],
)
def test_bad_config_exits_1(tmp_path, capsys, config, needle):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    assert run(tmp_path / "out", "decay", "--config", str(path)) == 1
    assert needle in capsys.readouterr().err


def test_missing_config_exits_1(tmp_path):
    assert run(tmp_path, "decay", "--config", str(tmp_path / "nope.json")) == 1


def test_config_roundtrip_and_errors():
    cfg = ExperimentConfig.from_dict({"experiment": "usc", "mode": "additive", "seed": 4})
    assert cfg.depths == [6.0, 8.0]
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert config_hash(again) == config_hash(cfg)
    assert config_hash(ExperimentConfig.from_dict({**cfg.to_dict(), "seed": 5})) != config_hash(cfg)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "nope"})


@pytest.mark.parametrize("name", ["operator-audit", "validate-assumptions", "tail-diagnostic"])
def test_rerun_is_byte_identical(tmp_path, name):
    assert run(tmp_path / "a", name, "--seed", "3") == 0
    assert run(tmp_path / "b", name, "--seed", "3") == 0
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name
