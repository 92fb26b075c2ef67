import json
from pathlib import Path

import pytest
import yaml

from combphase.cli import EXIT_NUMERIC, EXIT_SCHEMA, EXIT_WRAP, main
from combphase.errors import ScenarioConfigError
from combphase.scenarios import (
    find_scenario,
    list_scenarios,
    load_scenario_config,
    run_scenario,
)


def test_bundled_catalogue_has_all_scenarios():
    infos = list_scenarios()
    assert len(infos) >= 6
    names = {i["name"] for i in infos}
    assert {
        "rwa_validity", "closed_forms", "permutation_optimality", "table1_scaling",
        "crlb_saturation", "resolution_extrapolation", "raman_three_level",
        "error_models", "refine_fiber", "visibility_budget",
    } <= names
    for info in infos:
        assert info["description"]


def test_catalogue_tag_filter():
    noise_only = list_scenarios(tag="noise")
    assert [i["name"] for i in noise_only] == ["error_models"]


def test_list_command_json(capsys):
    assert main(["list", "--json", "--tag", "raman"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert {i["name"] for i in out} == {"raman_three_level", "visibility_budget"}


def test_empty_config_is_schema_error(tmp_path):
    cfg = tmp_path / "empty.yaml"
    cfg.write_text("{}\n")
    with pytest.raises(ScenarioConfigError):
        load_scenario_config(cfg)
    assert main(["scan", "--scenario", str(cfg), "--out", str(tmp_path)]) == EXIT_SCHEMA


def test_unknown_keys_rejected(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(
        "schema_version: 1\nname: x\nkind: visibility_budget\nextra_knob: 3\n"
    )
    with pytest.raises(ScenarioConfigError):
        load_scenario_config(cfg)


def test_unknown_scenario_name():
    with pytest.raises(ScenarioConfigError):
        find_scenario("does_not_exist")


def test_run_scenario_writes_manifest(tmp_path):
    result = run_scenario("visibility_budget", tmp_path)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["scenario"] == "visibility_budget"
    assert manifest["schema_version"] == 1
    assert set(manifest) >= {"scenario", "schema_version", "seed", "git_rev", "started_at"}
    assert result["summary"]["pulse_budget"] == 184


def test_same_seed_byte_identical_csv(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_scenario("error_models", a, seed=5)
    run_scenario("error_models", b, seed=5)
    assert (a / "error_models.csv").read_bytes() == (b / "error_models.csv").read_bytes()


def test_seed_override_changes_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_scenario("permutation_optimality", a, seed=1)
    run_scenario("permutation_optimality", b, seed=2)
    assert (
        (a / "permutation_optimality.csv").read_bytes()
        != (b / "permutation_optimality.csv").read_bytes()
    )


def test_json_format_flag(tmp_path):
    run_scenario("visibility_budget", tmp_path, fmt="json")
    payload = json.loads((tmp_path / "visibility_budget.json").read_text())
    assert payload[0]["quantity"] == "pulse_budget"


def test_cli_runs_bundled_scenario(tmp_path, capsys):
    assert main(["raman", "--scenario", "error_models", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "doppler_velocity_m_per_s" in out
    assert (tmp_path / "error_models.csv").exists()


def test_cli_numeric_failure_exit_code(tmp_path):
    cfg = tmp_path / "impossible.yaml"
    cfg.write_text(yaml.safe_dump({
        "schema_version": 1,
        "name": "impossible_tolerance",
        "kind": "rwa_validity",
        "params": {"cycles": [5], "integration_tol": 1e-16, "max_refinements": 1},
    }))
    assert main(["pulse", "--scenario", str(cfg), "--out", str(tmp_path)]) == EXIT_NUMERIC


def test_cli_wrap_abort_exit_code(tmp_path):
    cfg = tmp_path / "underestimated.yaml"
    cfg.write_text(yaml.safe_dump({
        "schema_version": 1,
        "name": "underestimated_prior",
        "kind": "refine_fiber",
        "seed": 0,
        "params": {"n_seeds": 3, "m_shots": 200, "prior_scale": 0.01},
    }))
    assert main(["refine", "--scenario", str(cfg), "--out", str(tmp_path)]) == EXIT_WRAP


def test_threads_do_not_change_results(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = tmp_path / "small_refine.yaml"
    cfg.write_text(yaml.safe_dump({
        "schema_version": 1,
        "name": "small_refine",
        "kind": "refine_fiber",
        "seed": 3,
        "params": {"n_seeds": 8, "m_shots": 500},
    }))
    run_scenario(cfg, a, threads=1)
    run_scenario(cfg, b, threads=4)
    assert (a / "refine_fiber.csv").read_bytes() == (b / "refine_fiber.csv").read_bytes()
