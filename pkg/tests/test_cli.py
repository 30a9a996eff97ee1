import json

import pytest

from gwsim.cli import (
    ConfigError,
    DEFAULT_CONFIG,
    _parse_model_spec,
    load_config,
    main,
)

REPORT_KEYS = {"schema_version", "command", "config", "results", "checks", "passed"}


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    assert err == ""
    return code, json.loads(out)


def check_names(report):
    return {c["name"]: c["passed"] for c in report["checks"]}


class TestConfigLoading:
    def test_defaults(self):
        config = load_config(None)
        assert config == DEFAULT_CONFIG
        config["geometry"]["side"] = 99.0
        assert DEFAULT_CONFIG["geometry"]["side"] == 10.0

    def test_file_merges_over_defaults(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"geometry": {"side": 25.0}, "run": {"trials": 7}}))
        config = load_config(str(path))
        assert config["geometry"]["side"] == 25.0
        assert config["geometry"]["tau"] == 1.0
        assert config["run"]["trials"] == 7
        assert config["run"]["mode"] == "round_born"

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"geometry": {"sides": 25.0}}))
        with pytest.raises(ConfigError, match="unknown config key 'geometry.sides'"):
            load_config(str(path))

    def test_section_must_be_object(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"geometry": 5}))
        with pytest.raises(ConfigError, match="must be an object"):
            load_config(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read config file"):
            load_config(str(tmp_path / "nope.json"))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(str(path))

    def test_model_spec_parsing(self):
        assert _parse_model_spec("ideal") == {"kind": "ideal", "seed": 0}
        assert _parse_model_spec("random:42") == {"kind": "random", "seed": 42}
        with pytest.raises(ConfigError, match="random:<int>"):
            _parse_model_spec("random:xyz")
        with pytest.raises(ConfigError, match="bad model spec"):
            _parse_model_spec("perfect")


class TestGhzNogo:
    def test_happy_path(self, capsys):
        code, report = run_json(capsys, "ghz-nogo")
        assert code == 0
        assert set(report) == REPORT_KEYS
        assert report["schema_version"] == "1"
        assert report["command"] == "ghz-nogo"
        assert report["passed"] is True
        assert len(report["results"]["constraints"]) == 4
        assert report["results"]["satisfying_assignments"] == 0
        assert report["results"]["dropped_constraint"] is None
        tables = report["results"]["support_tables"]
        assert len(tables) == 4
        for table in tables:
            assert len(table["entries"]) == 4
            for entry in table["entries"]:
                assert entry["probability"] == pytest.approx(0.25, abs=1e-10)
        assert check_names(report) == {
            "support_tables_quarter": True,
            "constraint_count": True,
            "unsatisfiable": True,
        }

    def test_drop_constraint(self, capsys):
        code, report = run_json(capsys, "ghz-nogo", "--drop-constraint", "2")
        assert code == 0
        assert report["results"]["satisfying_assignments"] == 8
        assert report["results"]["dropped_constraint"] is not None
        assert check_names(report)["dropped_constraint_leaves_eight"] is True

    @pytest.mark.parametrize("bad", ["0", "5"])
    def test_drop_constraint_out_of_range(self, capsys, bad):
        code, out, err = run_cli(capsys, "ghz-nogo", "--drop-constraint", bad)
        assert code == 2
        assert out == ""
        assert err.startswith("error:")

    def test_random_model(self, capsys):
        code, report = run_json(capsys, "ghz-nogo", "--model", "random:5")
        assert code == 0
        assert report["config"]["model"] == {"kind": "random", "seed": 5}

    def test_bad_model_spec(self, capsys):
        code, out, err = run_cli(capsys, "ghz-nogo", "--model", "perfect")
        assert code == 2
        assert "bad model spec" in err


class TestDistinguish:
    def test_happy_path(self, capsys):
        code, report = run_json(capsys, "distinguish")
        assert code == 0
        dists = report["results"]["distributions"]
        assert dists["door"]["unitary_record"] == pytest.approx(
            dists["door"]["collapsed_record"], abs=1e-12
        )
        assert dists["pair_x"]["unitary_record"]["+1"] == pytest.approx(1.0, abs=1e-10)
        assert dists["pair_x"]["collapsed_record"]["+1"] == pytest.approx(0.5, abs=1e-10)
        assert dists["pair_x"]["collapsed_record"]["-1"] == pytest.approx(0.5, abs=1e-10)
        assert all(check_names(report).values())


class TestFrames:
    def test_happy_path(self, capsys):
        code, report = run_json(capsys, "frames")
        assert code == 0
        frames = report["results"]["frames"]
        assert set(frames) == {"sigma", "sigma_p", "sigma_pp", "sigma_ppp"}
        assert frames["sigma"]["speed"] == 0.0
        assert frames["sigma_p"]["speed"] == pytest.approx(
            1.0 / (5.0 * 3.0**0.5), abs=1e-9
        )
        orderings = report["results"]["orderings"]
        assert len(orderings["sigma"]) == 2
        assert len(orderings["sigma_p"]) == 3
        assert check_names(report)["tilted_speeds_equal"] is True

    def test_invalid_geometry_fails_checks(self, capsys):
        code, report = run_json(capsys, "frames", "--tau", "20")
        assert code == 1
        assert report["passed"] is False
        names = check_names(report)
        assert names["geometry_epoch_shorter_than_separation"] is False
        assert "frames" not in report["results"]

    def test_nonpositive_side_is_a_config_error(self, capsys):
        code, out, err = run_cli(capsys, "frames", "--side", "-3")
        assert code == 2
        assert "side" in err


class TestRun:
    def test_round_born(self, capsys):
        code, report = run_json(
            capsys, "run", "--trials", "300", "--seed", "4", "--mode", "round_born"
        )
        assert code == 0
        run = report["results"]["run"]
        assert run["mode"] == "round_born"
        assert run["trials"] == 300
        assert run["seed"] == 4
        assert run["trials_violating_nonpreferred"] == 300
        stats = run["constraint_statistics"]
        assert len(stats) == 4
        assert sum(s["preferred"] for s in stats) == 1
        for s in stats:
            if s["preferred"]:
                assert s["violations"] == 0
        names = check_names(report)
        assert names["preferred_constraints_never_violated"] is True
        assert names["nonpreferred_rates_half"] is True
        assert names["every_trial_violates_nonpreferred"] is True

    def test_sequential_collapse(self, capsys):
        code, report = run_json(
            capsys,
            "run",
            "--trials",
            "400",
            "--seed",
            "4",
            "--mode",
            "sequential_collapse",
        )
        assert code == 0
        rate = report["results"]["run"]["outsider_product_minus_one_rate"]
        assert rate == pytest.approx(0.5, abs=4.0 * (0.25 / 400) ** 0.5)
        assert check_names(report)["outsider_parity_rate_half"] is True

    def test_preferred_frame_flag(self, capsys):
        code, report = run_json(
            capsys, "run", "--trials", "100", "--seed", "1", "--preferred", "sigma_pp"
        )
        assert code == 0
        stats = report["results"]["run"]["constraint_statistics"]
        (preferred,) = [s for s in stats if s["preferred"]]
        assert preferred["slots"] == ["z_A", "x_B", "z_C"]

    def test_zero_trials_skips_the_monte_carlo(self, capsys):
        code, report = run_json(capsys, "run", "--trials", "0")
        assert code == 0
        assert "run" not in report["results"]
        assert check_names(report) == {"constraint_count": True, "unsatisfiable": True}

    def test_output_is_deterministic(self, capsys):
        args = ("run", "--trials", "150", "--seed", "9")
        code1, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert (code1, code2) == (0, 0)
        assert out1 == out2

    def test_bad_mode_via_config(self, capsys, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"run": {"mode": "bogus"}}))
        code, out, err = run_cli(capsys, "run", "--config", str(path))
        assert code == 2
        assert "run.mode" in err

    def test_negative_trials_via_config(self, capsys, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"run": {"trials": -5}}))
        code, out, err = run_cli(capsys, "run", "--config", str(path))
        assert code == 2
        assert "non-negative" in err


class TestErasure:
    def test_happy_path(self, capsys):
        code, report = run_json(capsys, "erasure", "--trials", "400", "--seed", "2")
        assert code == 0
        results = report["results"]
        assert results["exact_down_probability"] == pytest.approx(0.5, abs=1e-12)
        assert results["door_counts"]["+1"] + results["door_counts"]["-1"] == 400
        names = check_names(report)
        assert names["exact_down_half"] is True
        assert names["down_rate_half"] is True
        assert names["pair_x_balanced"] is True

    def test_skip_pair_measurement(self, capsys):
        code, report = run_json(
            capsys, "erasure", "--trials", "100", "--seed", "2", "--skip-j"
        )
        assert code == 0
        results = report["results"]
        assert results["skip_pair_x"] is True
        assert results["door_counts"] == {"+1": 100, "-1": 0, "0": 0}
        assert results["exact_down_probability"] == 0.0
        names = check_names(report)
        assert names["exact_down_zero"] is True
        assert names["no_down_reports"] is True


class TestSweep:
    def test_small_sweep(self, capsys):
        code, report = run_json(capsys, "sweep", "--models", "3", "--seed", "5")
        assert code == 0
        results = report["results"]
        assert results["n_models"] == 3
        assert results["n_passed"] == 3
        assert [m["kind"] for m in results["models"]] == ["ideal", "haar", "haar"]
        assert all(m["passed"] for m in results["models"])
        assert check_names(report)["all_models_reproduce_contradiction"] is True

    def test_rejects_zero_models(self, capsys):
        code, out, err = run_cli(capsys, "sweep", "--models", "0")
        assert code == 2
        assert "--models" in err


class TestSeedResolution:
    def test_env_seed_used_when_nothing_else_set(self, capsys, monkeypatch):
        monkeypatch.setenv("GWSIM_SEED", "77")
        code, report = run_json(capsys, "erasure", "--trials", "10")
        assert code == 0
        assert report["config"]["run"]["seed"] == 77

    def test_flag_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv("GWSIM_SEED", "77")
        code, report = run_json(capsys, "erasure", "--trials", "10", "--seed", "3")
        assert code == 0
        assert report["config"]["run"]["seed"] == 3

    def test_config_beats_env(self, capsys, monkeypatch, tmp_path):
        monkeypatch.setenv("GWSIM_SEED", "77")
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"run": {"seed": 5, "trials": 10}}))
        code, report = run_json(capsys, "erasure", "--config", str(path))
        assert code == 0
        assert report["config"]["run"]["seed"] == 5

    def test_default_seed_is_zero(self, capsys, monkeypatch):
        monkeypatch.delenv("GWSIM_SEED", raising=False)
        code, report = run_json(capsys, "erasure", "--trials", "10")
        assert code == 0
        assert report["config"]["run"]["seed"] == 0


class TestFlagPrecedence:
    def test_flags_override_config_file(self, capsys, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps({"geometry": {"side": 20.0}, "run": {"trials": 50}})
        )
        code, report = run_json(
            capsys, "run", "--config", str(path), "--trials", "80", "--seed", "1"
        )
        assert code == 0
        assert report["config"]["geometry"]["side"] == 20.0
        assert report["config"]["run"]["trials"] == 80


class TestOutput:
    def test_text_format(self, capsys):
        code, out, err = run_cli(capsys, "distinguish", "--format", "text")
        assert code == 0
        assert out.startswith("command: distinguish")
        assert "[PASS]" in out
        assert out.rstrip().endswith("passed: yes")

    def test_report_written_to_path(self, capsys, tmp_path):
        out_path = tmp_path / "report.json"
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"output": {"path": str(out_path)}}))
        code, out, _ = run_cli(capsys, "distinguish", "--config", str(config))
        assert code == 0
        assert out_path.read_text() == out

    def test_json_is_parseable_and_has_no_extra_top_level_keys(self, capsys):
        _, report = run_json(capsys, "frames")
        assert set(report) == REPORT_KEYS
