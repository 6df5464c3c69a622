"""Config loading, result serialization, manifests."""

import json
from dataclasses import replace

import pytest
import yaml

import restopt as r
from restopt.io import ConfigError, _fmt


@pytest.fixture(scope="module")
def small_result(gilroy_bundle):
    config = replace(
        gilroy_bundle.experiment,
        replicates=3,
        sa_schedule=r.AnnealingSchedule(t0=2000.0, iterations=30),
    )
    result = r.run_experiment(gilroy_bundle.community, gilroy_bundle.hazard, config)
    bundle = replace(gilroy_bundle, experiment=config)
    return bundle, result


class TestLoadConfig:
    def test_bundled_gilroy_config(self, gilroy_bundle):
        community = gilroy_bundle.community
        assert len(community.retailers) <= 6
        assert 45_000 <= community.total_population <= 55_000
        assert gilroy_bundle.experiment.policies == ("base", "rollout-sa")

    def test_missing_section_named_in_error(self, tmp_path):
        doc = yaml.safe_load(r.bundled_config_path().read_text())
        del doc["hazard"]
        path = tmp_path / "broken.yaml"
        path.write_text(yaml.safe_dump(doc))
        with pytest.raises(ConfigError) as exc:
            r.load_config(path)
        assert any("hazard" in e for e in exc.value.errors)

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("community:\n  components:\n   - {id: a, kind: [\n")
        with pytest.raises(ConfigError) as exc:
            r.load_config(path)
        assert "line" in exc.value.errors[0]

    def test_all_section_errors_collected(self, tmp_path):
        doc = yaml.safe_load(r.bundled_config_path().read_text())
        doc["community"]["cells"][0]["epn_node"] = "ghost"
        doc["hazard"]["fragility"].pop("bridge")
        path = tmp_path / "multi.yaml"
        path.write_text(yaml.safe_dump(doc))
        with pytest.raises(ConfigError) as exc:
            r.load_config(path)
        text = "\n".join(exc.value.errors)
        assert "ghost" in text
        assert "bridge" in text

    def test_round_trip_preserves_bundle(self, gilroy_bundle, tmp_path):
        out = tmp_path / "dumped.yaml"
        r.dump_config(gilroy_bundle, out)
        again = r.load_config(out)
        assert again.community == gilroy_bundle.community
        assert again.hazard == gilroy_bundle.hazard
        assert again.experiment == gilroy_bundle.experiment
        assert again.config_hash() == gilroy_bundle.config_hash()

    def test_scalar_section_rejected(self, tmp_path):
        path = tmp_path / "scalar.yaml"
        path.write_text("community: 5\nhazard: {}\nexperiment: {}\n")
        with pytest.raises(ConfigError) as exc:
            r.load_config(path)
        assert any("must be a mapping" in e for e in exc.value.errors)

    def test_unknown_policy_rejected(self, tmp_path):
        doc = yaml.safe_load(r.bundled_config_path().read_text())
        doc["experiment"]["policies"] = ["base", "alphazero"]
        path = tmp_path / "pol.yaml"
        path.write_text(yaml.safe_dump(doc))
        with pytest.raises(ConfigError) as exc:
            r.load_config(path)
        assert any("alphazero" in e for e in exc.value.errors)


class TestConfigHash:
    def test_insensitive_to_formatting(self, gilroy_bundle, tmp_path):
        text = r.bundled_config_path().read_text()
        path = tmp_path / "reformatted.yaml"
        path.write_text(yaml.safe_dump(yaml.safe_load(text), sort_keys=True))
        assert r.load_config(path).config_hash() == gilroy_bundle.config_hash()

    def test_sensitive_to_semantic_change(self, gilroy_bundle, tmp_path):
        doc = yaml.safe_load(r.bundled_config_path().read_text())
        doc["experiment"]["crew_budget"] = 4
        path = tmp_path / "changed.yaml"
        path.write_text(yaml.safe_dump(doc))
        assert r.load_config(path).config_hash() != gilroy_bundle.config_hash()


class TestWriteResults:
    def test_column_layout(self, gilroy_bundle, tmp_path):
        config = replace(
            gilroy_bundle.experiment, replicates=1,
            sa_schedule=r.AnnealingSchedule(t0=2000.0, iterations=20),
        )
        result = r.run_experiment(gilroy_bundle.community, gilroy_bundle.hazard, config)
        bundle = replace(gilroy_bundle, experiment=config)
        manifest = r.build_manifest(bundle, result)
        r.write_results(result, manifest, tmp_path)
        header = (tmp_path / "curves.csv").read_text().splitlines()[0].split(",")
        # time + 2 policies * (mean, lower, upper) + 2 policies * 1 replicate
        assert len(header) == 1 + 2 * 3 + 2 * 1
        assert header[0] == "time_days"
        assert header[1:4] == ["base_mean", "base_lower", "base_upper"]

    def test_rewards_rows(self, small_result, tmp_path):
        bundle, result = small_result
        manifest = r.build_manifest(bundle, result)
        r.write_results(result, manifest, tmp_path)
        lines = (tmp_path / "rewards.csv").read_text().splitlines()
        assert lines[0] == "replicate,policy,F"
        assert len(lines) == 1 + 3 * 2  # 3 replicates x 2 policies

    def test_rerun_is_byte_identical(self, small_result, tmp_path):
        bundle, result = small_result
        manifest = r.build_manifest(bundle, result)
        dir_a, dir_b = tmp_path / "a", tmp_path / "b"
        r.write_results(result, manifest, dir_a)
        r.write_results(result, manifest, dir_b)
        for name in ("curves.csv", "rewards.csv"):
            assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes()

    def test_manifest_contents(self, small_result, tmp_path):
        bundle, result = small_result
        manifest = r.build_manifest(bundle, result)
        r.write_results(result, manifest, tmp_path)
        doc = json.loads((tmp_path / "manifest.json").read_text())
        assert doc["config_hash"] == bundle.config_hash()
        assert doc["master_seed"] == bundle.experiment.master_seed
        assert doc["tool_version"] == r.__version__
        assert set(doc["policy_summary"]) == {"base", "rollout-sa"}
        for stats in doc["policy_summary"].values():
            assert {"mean_f", "std_f", "min_f", "max_f"} <= set(stats)
        assert len(doc["scenario_hashes"]) == 3

    def test_float_format_17_significant_digits(self):
        assert _fmt(1.0 / 3.0) == "0.33333333333333331"
        assert _fmt(50_000.0) == "50000"
        assert float(_fmt(0.1)) == 0.1
