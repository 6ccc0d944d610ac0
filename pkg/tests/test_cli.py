"""Tests for the command line entry point and its exit codes."""
import json
import math
from pathlib import Path

import pytest

from app.cli.check import CRITERION_ALIASES, cmd_check
from app.cli.common import EXIT_CONFIG, EXIT_INCONCLUSIVE, EXIT_NUMERIC, EXIT_OK
from app.cli.integrate import cmd_integrate
from app.cli.interval_osc import cmd_interval_osc
from app.cli.reproduce import REPRODUCTION_ALIASES, REPRODUCTIONS
from app.core.errors import ScenarioError
from app.core.verdicts import VerdictTag
from app.data.scenario import available_presets, load_preset
from app.main import build_parser, main


def _write_config(directory: str, name: str, data: dict) -> str:
    path = Path(directory) / f"{name}.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


class TestIntegrateCommand:
    """Test the integrate subcommand."""

    def test_harmonic_preset(self, temp_data_dir):
        """Test that integrate writes the trajectory and the zeros."""
        assert main(["integrate", "--preset", "harmonic", "--out-dir", temp_data_dir]) == EXIT_OK
        assert (Path(temp_data_dir) / "harmonic.trajectory.csv").exists()
        zeros = json.loads((Path(temp_data_dir) / "harmonic.zeros.json").read_text(encoding="utf-8"))
        assert [zero["location"] for zero in zeros["zeros"]] == pytest.approx([math.pi * k for k in range(1, 7)], abs=1e-6)

    def test_horizon_override(self):
        """Test that the horizon override reaches the new end point."""
        scenario = load_preset("harmonic").with_overrides(horizon=10 * math.pi)
        traj = cmd_integrate(scenario)
        assert traj.reached == pytest.approx(10 * math.pi)
        assert len(traj.zeros) == 10

    def test_history_domain_failure(self, temp_data_dir):
        """Test that a history undefined on [t1 - 2, t1] is a numeric failure."""
        config = _write_config(temp_data_dir, "bad-history", {
            "name": "bad-history",
            "equation": {"terms": [{"r": "1", "alpha": "t - 2"}]},
            "history": {"t1": 0, "theta": "ln(t + 1)"},
            "analysis": {"horizon": 5},
        })
        assert main(["integrate", "--config", config, "--out-dir", temp_data_dir]) == EXIT_NUMERIC

    def test_missing_config(self, temp_data_dir):
        """Test that a missing scenario file is a configuration error."""
        missing = str(Path(temp_data_dir) / "missing.json")
        assert main(["integrate", "--config", missing]) == EXIT_CONFIG

    def test_scenario_source_required(self):
        """Test that argparse rejects a call without --config or --preset."""
        with pytest.raises(SystemExit):
            main(["integrate"])


class TestCheckCommand:
    """Test the check subcommand."""

    def test_wong_preset(self, temp_data_dir):
        """Test that the wong preset is certified and its report written."""
        assert main(["check", "--preset", "wong-sine", "--out-dir", temp_data_dir]) == EXIT_OK
        report = json.loads(
            (Path(temp_data_dir) / "wong-sine.wong.report.json").read_text(encoding="utf-8")
        )
        assert report["verdict"]["tag"] == VerdictTag.CERTIFIED_OSCILLATORY.value
        assert report["config_hash"] == load_preset("wong-sine").with_overrides(out_dir=temp_data_dir).config_hash()

    def test_comparison_nonoscillation(self, delay_nonoscillation):
        """Test the two-delay preset with its witness."""
        reports = cmd_check(delay_nonoscillation)
        assert len(reports) == 1
        assert reports[0].verdict.tag == VerdictTag.CERTIFIED_NONOSCILLATORY

    def test_missing_criterion(self, temp_data_dir):
        """Test that a scenario without criterion is a configuration error."""
        assert main(["check", "--preset", "harmonic", "--out-dir", temp_data_dir]) == EXIT_CONFIG
        with pytest.raises(ScenarioError):
            cmd_check(load_preset("harmonic"))

    def test_missing_block(self, temp_data_dir):
        """Test that the wong criterion needs its block."""
        code = main(["check", "--preset", "harmonic", "--criterion", "wong", "--out-dir", temp_data_dir])
        assert code == EXIT_CONFIG

    def test_require_verdict(self, temp_data_dir):
        """Test that an Inconclusive verdict exits with 1 only when requested."""
        config = _write_config(temp_data_dir, "positive-forcing", {
            "name": "positive-forcing",
            "equation": {"f": "1 + t", "terms": [{"r": "1", "alpha": "t"}]},
            "analysis": {
                "criterion": "wong",
                "wong": {"r": "1", "g": "1 + t", "window": [0, 10]},
            },
        })
        args = ["check", "--config", config, "--out-dir", temp_data_dir]
        assert main(args) == EXIT_OK
        assert main(args + ["--require-verdict"]) == EXIT_INCONCLUSIVE


class TestIntervalOscCommand:
    """Test the interval-osc subcommand."""

    def test_harmonic_interval(self, temp_data_dir):
        """Test that [0, 4] is longer than pi and holds a conjugate pair."""
        assert main(["interval-osc", "--preset", "harmonic", "--out-dir", temp_data_dir]) == EXIT_OK
        result = cmd_interval_osc(load_preset("harmonic"))
        assert result["oscillatory"]
        a, b = result["conjugate_pair"]
        assert b - a == pytest.approx(math.pi, abs=1e-4)
        assert (Path(temp_data_dir) / "harmonic.interval-osc.json").exists()

    def test_missing_block(self):
        with pytest.raises(ScenarioError):
            cmd_interval_osc(load_preset("wong-sine"))


class TestWongCommand:
    """Test the wong subcommand."""

    def test_with_solution_functional(self, temp_data_dir):
        """Test that --picone also writes Q on the integrated solution."""
        code = main(["wong", "--preset", "wong-sine", "--picone", "--out-dir", temp_data_dir])
        assert code == EXIT_OK
        data = json.loads((Path(temp_data_dir) / "wong-sine.picone.json").read_text(encoding="utf-8"))
        assert len(data["values"]) > 0


class TestAliases:
    """Test the alternative identifiers accepted by the command line."""

    @pytest.mark.parametrize("alias, criterion", [
        ("thm31", "comparison-nonosc"),
        ("cor31", "positive-part-nonosc"),
        ("thm32", "forced-osc"),
        ("cor32", "positive-part-osc"),
        ("thm22", "interval-comparison"),
    ])
    def test_criterion_alias(self, alias, criterion):
        """Test that each criterion alias resolves to its criterion name."""
        args = build_parser().parse_args(["check", "--preset", "harmonic", "--criterion", alias])
        assert args.criterion == criterion
        assert CRITERION_ALIASES[alias] == criterion

    def test_criterion_names_still_accepted(self):
        """Test that the plain names pass through unchanged."""
        args = build_parser().parse_args(["check", "--preset", "harmonic", "--criterion", "wong"])
        assert args.criterion == "wong"

    def test_unknown_criterion_rejected(self):
        """Test that argparse rejects an id that is neither a name nor an alias."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["check", "--preset", "harmonic", "--criterion", "thm99"])

    def test_criterion_alias_reaches_check(self, temp_data_dir):
        """Test that thm22 runs interval-comparison, which needs partitions the harmonic preset lacks."""
        code = main(["check", "--preset", "harmonic", "--criterion", "thm22", "--out-dir", temp_data_dir])
        assert code == EXIT_CONFIG

    @pytest.mark.parametrize("alias, example_id", [("3.1", "nonoscillation"), ("3.2", "oscillation")])
    def test_reproduce_alias(self, alias, example_id):
        """Test that the numeric scenario ids resolve to the reproduction names."""
        args = build_parser().parse_args(["reproduce", alias])
        assert args.example_id == example_id
        assert REPRODUCTION_ALIASES[alias] == example_id

    def test_unknown_reproduction_rejected(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["reproduce", "3.3"])


class TestReproduceCommand:
    """Test the end-to-end reference scenarios."""

    def test_reproductions_use_presets(self):
        assert set(REPRODUCTIONS.values()) <= set(available_presets())
        assert set(REPRODUCTION_ALIASES.values()) == set(REPRODUCTIONS)

    @pytest.mark.slow
    def test_nonoscillation(self, temp_data_dir):
        """Test the certified nonoscillation bundle."""
        assert main(["reproduce", "nonoscillation", "--out-dir", temp_data_dir]) == EXIT_OK
        bundle = json.loads((Path(temp_data_dir) / "nonoscillation.bundle.json").read_text(encoding="utf-8"))
        assert bundle["id"] == "nonoscillation"
        assert bundle["reports"][0]["verdict"]["tag"] == VerdictTag.CERTIFIED_NONOSCILLATORY.value
        assert "zero_free" in bundle
        assert (Path(temp_data_dir) / "delay-nonoscillation.comparison-nonosc.report.json").exists()

    @pytest.mark.slow
    def test_oscillation(self, temp_data_dir):
        """Test the certified oscillation bundle, its cross-check and byte-identical reruns."""
        out = Path(temp_data_dir)
        names = [
            "oscillation.bundle.json",
            "forced-delay-oscillation.forced-osc.report.json",
            "forced-delay-oscillation.trajectory.csv",
            "forced-delay-oscillation.zeros.json",
        ]
        assert main(["reproduce", "3.2", "--out-dir", str(out)]) == EXIT_OK
        first = {name: (out / name).read_bytes() for name in names}
        assert main(["reproduce", "oscillation", "--out-dir", str(out)]) == EXIT_OK
        for name in names:
            assert (out / name).read_bytes() == first[name], name

        bundle = json.loads(first["oscillation.bundle.json"].decode("utf-8"))
        report = bundle["reports"][0]
        assert report["verdict"]["tag"] == VerdictTag.CERTIFIED_OSCILLATORY.value
        assert bundle["integration"]["zeros"] > 0
        cross = report["cross_check"]
        assert cross["every_bin_hit"] is True
        assert len(cross["counts"]) == 20
        assert all(len(row) == 10 and min(row) >= 1 for row in cross["counts"])
