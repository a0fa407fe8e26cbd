"""Scenario loading, serialization round-trips, CLI commands, exit codes."""

import json
import math
import subprocess
import sys

import pytest

from orlicz import load_scenario, parse_scenario, serialize_scenario
from orlicz.cli import main
from orlicz.scenario import ScenarioError, parse_young_spec

SCEN = "scenarios/finite_basic.json"
GEO = "scenarios/geometric_collapse.json"
CONST = "scenarios/constant_collapse.json"
SQUARE = "scenarios/powerlaw_square.json"


class TestScenarioLoading:
    def test_minimal_finite(self):
        sc = parse_scenario(
            {"space": {"kind": "finite", "atoms": [["a", 1.0], ["b", 2.0]]}}
        )
        assert sc.space.total_mass() == 3.0

    def test_unknown_function_name_errors(self):
        sc = load_scenario(SCEN)
        with pytest.raises(ScenarioError):
            sc.function("nope")

    def test_bad_reference_in_values(self):
        with pytest.raises(ScenarioError):
            parse_scenario(
                {
                    "space": {"kind": "finite", "atoms": [["a", 1.0]]},
                    "functions": {"f": {"values": {"zz": 1.0}}},
                }
            )

    def test_countable_round_trip(self):
        sc = load_scenario(GEO)
        doc = serialize_scenario(sc)
        sc2 = parse_scenario(doc)
        assert sc2.space == sc.space
        assert serialize_scenario(sc2) == doc
        f1, f2 = sc.function("f"), sc2.function("f")
        assert f1.values == f2.values
        assert f1.tail == f2.tail

    def test_finite_round_trip(self):
        sc = load_scenario(SCEN)
        doc = serialize_scenario(sc)
        sc2 = parse_scenario(doc)
        assert serialize_scenario(sc2) == doc

    def test_conjugate_of_resolves(self):
        sc = load_scenario(SCEN)
        psi = sc.young("psi")
        assert psi(3.0) == pytest.approx(2.25)

    def test_inline_young_spec(self):
        phi = parse_young_spec("power_over_p:3")
        assert phi.conjugate().descriptor() == {"family": "power_over_p", "p": 1.5}
        with pytest.raises(ScenarioError):
            parse_young_spec("mystery:1")


class TestCliCommands:
    def test_norm_indicator(self, capsys):
        code = main(
            ["--format", "structured", "norm", "chiA", "--scenario", SCEN, "--young", "power_abs:2"]
        )
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["luxemburg"]["value"] == pytest.approx(2.0, rel=1e-9)

    def test_conjugate_command(self, capsys):
        code = main(["--format", "structured", "conjugate", "--young", "power_over_p:3"])
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["conjugate"] == {"family": "power_over_p", "p": 1.5}

    def test_hderiv(self, capsys):
        code = main(["--format", "structured", "hderiv", "collapse", "--scenario", SCEN])
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["h"]["values"]["1"] == 2.0

    def test_density_constant_collapse(self, capsys):
        code = main(["--format", "structured", "density", "collapse", "--scenario", CONST])
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["verdict"]["status"] == "not_densely_defined"

    def test_density_geo_collapse(self, capsys):
        code = main(["--format", "structured", "density", "collapse", "--scenario", GEO])
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["verdict"]["status"] == "densely_defined"

    def test_domain_command(self, capsys):
        code = main(
            ["--format", "structured", "domain", "chi1", "--scenario", CONST, "--map", "collapse"]
        )
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["member"] is False

    def test_approximate(self, capsys):
        code = main(
            [
                "--format", "structured", "approximate", "f",
                "--scenario", GEO, "--map", "collapse", "--max-index", "8",
            ]
        )
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        dists = [e["distance"]["value"] for e in rep["approximants"]]
        assert dists == sorted(dists, reverse=True)

    def test_bounded(self, capsys):
        code = main(["--format", "structured", "bounded", "square", "--scenario", SQUARE])
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["verdict"]["status"] == "not_everywhere_defined"

    def test_lp_check(self, capsys):
        code = main(
            [
                "--format", "structured", "lp-check", "--scenario", SCEN,
                "--map", "collapse", "--weight", "u", "--function", "f", "--p", "2", "--q", "2",
            ]
        )
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["multiplication_equivalence"]["norms_equal"] is True
        assert rep["weighted_norm_identity"]["equal"] is True

    def test_adjoint_check(self, capsys):
        code = main(
            [
                "--format", "structured", "adjoint-check", "--scenario", SCEN,
                "--map", "collapse", "--function", "f", "--dual-function", "g",
            ]
        )
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["report"]["pairing_lhs"] == 25.0
        assert rep["report"]["within_tolerance"] is True

    def test_text_format(self, capsys):
        code = main(["conjugate", "--young", "power_over_p:3"])
        assert code == 0
        out = capsys.readouterr().out
        assert "conjugate.family: power_over_p" in out

    def test_scenario_error_exit_2(self, capsys):
        code = main(["density", "collapse", "--scenario", "scenarios/missing.json"])
        assert code == 2

    def test_unknown_name_exit_2(self, capsys):
        code = main(["norm", "nope", "--scenario", SCEN, "--young", "power_abs:2"])
        assert code == 2

    def test_verify_small(self, capsys):
        code = main(
            ["--format", "structured", "--seed", "7", "verify", "--count", "2"]
        )
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["suite"]["failed"] == 0
        assert rep["suite"]["total_checks"] > 0

    def test_determinism_modulo_timestamp(self, capsys):
        def run():
            main(["--format", "structured", "--seed", "5", "verify", "--count", "1"])
            rep = json.loads(capsys.readouterr().out)
            rep.pop("timestamp")
            rep["suite"].pop("elapsed_seconds")
            return json.dumps(rep, sort_keys=True)

        assert run() == run()

    def test_seed_env_override(self, capsys, monkeypatch):
        monkeypatch.setenv("ORLICZ_SEED", "99")
        main(["--format", "structured", "conjugate", "--young", "power_abs:2"])
        rep = json.loads(capsys.readouterr().out)
        assert rep["params"]["seed"] == 99

    def test_verify_failure_exits_1(self, capsys, monkeypatch):
        import orlicz.cli as cli_mod

        class FakeReport:
            ok = False

            def to_dict(self):
                return {"failed": 1, "passed": 0}

        monkeypatch.setattr(cli_mod, "verify_suite", lambda **kw: FakeReport())
        assert main(["--format", "structured", "verify", "--count", "1"]) == 1

    def test_depth_override(self, capsys):
        code = main(
            ["--depth", "128", "--format", "structured", "density", "collapse", "--scenario", GEO]
        )
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["scenario"]["space"]["depth"] == 128

    def test_probe_range_flag(self, capsys):
        code = main(
            [
                "--range", "1e-4:1e4", "--format", "structured", "adjoint-check",
                "--scenario", SCEN, "--map", "cycle", "--function", "f", "--dual-function", "g",
            ]
        )
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["report"]["within_tolerance"] is True
        assert rep["params"]["probe_range"] == "1e-4:1e4"


class TestConsoleScript:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "orlicz.cli", "conjugate", "--young", "power_abs:2"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "scaled_power" in proc.stdout
