"""
Scenario configuration, builtin scenes, end-to-end runs, sweeps, and the
command line.

End-to-end tests run a deliberately small setup: a 4x4 array with a pn-256
preamble against a near wall. The small aperture gives about 24 dB less
array gain than the 16x16 default, compensated with transmit power so every
beam detects and nothing depends on hole filling.
"""
import json

import numpy as np
import pytest

from mmdepth.cli import main as cli_main
from mmdepth.codebook import SceneView, UpaConfig
from mmdepth.io import read_records
from mmdepth.pipeline import (
    BUILTIN_SCENES,
    SWEEP_ALIASES,
    SWEEP_COLUMNS,
    EstimatorConfig,
    OutputConfig,
    ScenarioConfig,
    WaveformConfig,
    apply_override,
    build_scene,
    config_from_dict,
    config_hash,
    config_to_dict,
    run_scenario,
    sweep,
)
from mmdepth.scene import scene_to_dict


SMALL = {
    "name": "unit",
    "upa": {"n_h": 4, "n_v": 4},
    "radio": {"tx_power_dbm": 50.0},
    "waveform": {"kind": "pn", "length": 256, "seed": 3},
    "sim": {"seed": 1, "cell_size_m": 0.15},
    "scene": {"builtin": "one_wall", "distance_m": 1.5},
}


def small_config(**updates):
    data = json.loads(json.dumps(SMALL))
    for dotted, value in updates.items():
        apply_override(data, dotted.replace("__", "."), value)
    return config_from_dict(data)


@pytest.fixture(scope="module")
def small_run():
    """One shared end-to-end run of the small scenario."""
    return run_scenario(small_config())


class TestConfigFromDict:
    def test_empty_dict_gives_defaults(self):
        cfg = config_from_dict({})
        assert cfg.name == "one_wall"
        assert cfg.scene == {"builtin": "one_wall"}
        assert cfg.upa.n_h == 16 and cfg.upa.n_v == 16
        assert cfg.waveform.kind == "golay_80211ad" and cfg.waveform.length == 3328

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            config_from_dict({"seed": 1})

    def test_unknown_section_key_rejected(self):
        with pytest.raises(ValueError, match="unknown radio keys"):
            config_from_dict({"radio": {"tx_dbm": 30}})

    def test_scene_needs_exactly_one_mode(self):
        with pytest.raises(ValueError, match="exactly one"):
            config_from_dict({"scene": {}})
        with pytest.raises(ValueError, match="exactly one"):
            config_from_dict({"scene": {"builtin": "one_wall", "file": "x.json"}})

    def test_unknown_builtin_rejected(self):
        with pytest.raises(ValueError, match="unknown builtin"):
            config_from_dict({"scene": {"builtin": "three_walls"}})

    def test_builtin_parameters_validated(self):
        with pytest.raises(ValueError, match="one_wall scene keys"):
            config_from_dict({"scene": {"builtin": "one_wall", "width_m": 3.0}})

    def test_resolution_list_becomes_tuple(self):
        cfg = config_from_dict({"output": {"resolution": [120, 160]}})
        assert cfg.output.resolution == (120, 160)

    def test_roundtrip_through_dict(self):
        cfg = small_config()
        again = config_from_dict(config_to_dict(cfg))
        assert config_hash(again) == config_hash(cfg)

    def test_estimator_policy_validated(self):
        with pytest.raises(ValueError, match="noise_policy"):
            EstimatorConfig(noise_policy="guess")
        with pytest.raises(ValueError, match="fixed_noise_var"):
            EstimatorConfig(noise_policy="fixed")

    def test_waveform_length_validated(self):
        with pytest.raises(ValueError, match="positive"):
            WaveformConfig(length=0)

    def test_output_config_validated(self):
        with pytest.raises(ValueError, match="interpolation"):
            OutputConfig(interpolation="bilinear")
        with pytest.raises(ValueError, match="positive"):
            OutputConfig(resolution=(0, 10))


class TestConfigHash:
    def test_stable_across_calls(self):
        cfg = small_config()
        assert config_hash(cfg) == config_hash(cfg)
        assert len(config_hash(cfg)) == 64

    def test_distinct_configs_distinct_hashes(self):
        assert config_hash(small_config()) != config_hash(small_config(sim__seed=9))


class TestApplyOverride:
    def test_dotted_path(self):
        data = {}
        apply_override(data, "radio.tx_power_dbm", 20)
        assert data == {"radio": {"tx_power_dbm": 20}}

    def test_short_names_resolve(self):
        data = {}
        apply_override(data, "tx_power", 25)
        assert data == {"radio": {"tx_power_dbm": 25}}
        assert set(SWEEP_ALIASES) == {
            "tx_power", "preamble_len", "distance", "upa_size", "os_factor"
        }

    def test_upa_size_fans_out(self):
        data = {}
        apply_override(data, "upa_size", 8)
        assert data == {"upa": {"n_h": 8, "n_v": 8}}

    def test_os_factor_fans_out(self):
        data = {}
        apply_override(data, "os_factor", 2)
        assert data == {"view": {"os_h": 2, "os_v": 2}}

    def test_distance_targets_scene(self):
        data = {"scene": {"builtin": "one_wall"}}
        apply_override(data, "distance", 5.0)
        assert data["scene"]["distance_m"] == 5.0

    def test_cannot_descend_into_scalar(self):
        data = {"radio": 3}
        with pytest.raises(ValueError, match="non-dict"):
            apply_override(data, "radio.tx_power_dbm", 20)


class TestBuiltinScenes:
    VIEW = SceneView()

    def test_registry_names(self):
        assert set(BUILTIN_SCENES) == {"one_wall", "two_walls", "pillar_room"}

    def test_one_wall_square_to_boresight(self):
        scene = BUILTIN_SCENES["one_wall"](self.VIEW, distance_m=3.0)
        assert len(scene.facets) == 1
        verts = scene.facets[0].vertices
        assert np.allclose(verts[:, 1], 3.0)
        # oversized past the field-of-view edge at the wall distance
        half_fov_width = 3.0 * np.tan(np.radians(self.VIEW.fov_deg) / 2.0)
        assert verts[:, 0].max() > half_fov_width

    def test_one_wall_distance_validated(self):
        with pytest.raises(ValueError, match="positive"):
            BUILTIN_SCENES["one_wall"](self.VIEW, distance_m=0.0)

    def test_two_walls_front_covers_left_half(self):
        scene = BUILTIN_SCENES["two_walls"](self.VIEW)
        front, back = scene.facets
        assert front.vertices[:, 0].max() == 0.0
        assert front.vertices[:, 1].max() < back.vertices[:, 1].min()

    def test_two_walls_ordering_validated(self):
        with pytest.raises(ValueError, match="front_distance_m"):
            BUILTIN_SCENES["two_walls"](self.VIEW, front_distance_m=2.0, back_distance_m=1.0)

    def test_pillar_room_facet_count(self):
        scene = BUILTIN_SCENES["pillar_room"](self.VIEW)
        # back + two sides + floor + ceiling + 2 pillars of 4 faces
        assert len(scene.facets) == 13

    def test_build_scene_inline(self):
        reference = BUILTIN_SCENES["one_wall"](self.VIEW, distance_m=2.0)
        scene = build_scene({"inline": scene_to_dict(reference)}, self.VIEW)
        assert len(scene.facets) == 1
        assert np.allclose(scene.facets[0].vertices, reference.facets[0].vertices)

    def test_build_scene_file(self, tmp_path):
        reference = BUILTIN_SCENES["one_wall"](self.VIEW, distance_m=2.0)
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(scene_to_dict(reference)))
        scene = build_scene({"file": str(path)}, self.VIEW)
        assert np.allclose(scene.facets[0].vertices, reference.facets[0].vertices)


class TestRunScenario:
    def test_artifact_shapes_and_counts(self, small_run):
        art = small_run
        assert art.codebook.m == 16
        assert art.selected.shape == (4, 4)
        assert art.range_map.shape == (4, 4)
        assert art.gt_depth.shape == (4, 4)
        assert len(art.records) == 16
        assert all(len(r.samples) == 256 + art.l_d for r in art.records)
        assert art.n_paths > 0
        assert set(art.reports) == {"range", "depth"}

    def test_every_beam_detects(self, small_run):
        assert small_run.filled.sum() == 0
        assert small_run.truncated_beams == 0

    def test_wall_estimates_near_truth(self, small_run):
        assert small_run.reports["range"].mae_m < 0.2
        assert small_run.reports["depth"].mae_m < 0.2

    def test_air_time_formula(self, small_run, radio):
        assert small_run.air_time_s == 16 * 256 * radio.sample_period_s

    def test_config_hash_recorded(self, small_run):
        assert small_run.config_hash == config_hash(small_config())

    def test_deterministic_rerun(self, small_run):
        again = run_scenario(small_config())
        assert np.array_equal(again.selected, small_run.selected)
        assert np.array_equal(again.range_map, small_run.range_map)
        for a, b in zip(again.records, small_run.records):
            assert np.array_equal(a.samples, b.samples)

    def test_seed_changes_noise(self, small_run):
        other = run_scenario(small_config(sim__seed=2))
        assert not np.array_equal(other.records[0].samples, small_run.records[0].samples)

    def test_noiseless_mode_drops_noise(self):
        cfg = small_config(sim__noiseless=True, estimator__noise_policy="analytic")
        art = run_scenario(cfg)
        # the guard tail past the last pulse carries no signal and no noise
        assert abs(art.records[0].samples[-1]) == 0.0

    def test_display_resolution_adds_reports(self):
        cfg = small_config(output__resolution=[8, 12], output__interpolation="nearest")
        art = run_scenario(cfg)
        assert art.out_range.shape == (8, 12)
        assert art.gt_depth_out.shape == (8, 12)
        assert set(art.reports) == {"range", "depth", "range_out", "depth_out"}


class TestArtifactFiles:
    BASE_FILES = {
        "range.pgm", "depth.pgm", "gt_range.pgm", "gt_depth.pgm",
        "range.csv", "depth.csv", "errors.csv", "run.json",
    }

    def test_base_file_set(self, tmp_path):
        art = run_scenario(small_config(), out_dir=tmp_path)
        names = {p.split("/")[-1] for p in art.files}
        assert names == self.BASE_FILES
        for name in self.BASE_FILES:
            assert (tmp_path / name).exists()

    def test_run_json_contents(self, tmp_path):
        art = run_scenario(small_config(), out_dir=tmp_path)
        info = json.loads((tmp_path / "run.json").read_text())
        assert info["config_hash"] == art.config_hash
        assert info["beams"] == 16
        assert info["reports"]["range"]["mae_m"] == art.reports["range"].mae_m
        assert config_from_dict(info["config"])  # the dump reloads

    def test_errors_csv_rows(self, tmp_path):
        run_scenario(small_config(), out_dir=tmp_path)
        lines = (tmp_path / "errors.csv").read_text().strip().split("\n")
        assert lines[0] == "map,rows,cols,rmse_m,mae_m,bias_m,n_valid,n_total"
        assert {ln.split(",")[0] for ln in lines[1:]} == {"range", "depth"}

    def test_records_roundtrip(self, tmp_path):
        art = run_scenario(small_config(output__write_records=True), out_dir=tmp_path)
        loaded = read_records(tmp_path / "records.bin")
        assert len(loaded) == 16
        for a, b in zip(loaded, art.records):
            assert a.beam == b.beam and a.n_p == b.n_p and a.l_d == b.l_d
            assert np.array_equal(a.samples, b.samples)

    def test_optional_outputs(self, tmp_path):
        run_scenario(
            small_config(output__write_codebook=True, output__resolution=[8, 8]),
            out_dir=tmp_path,
        )
        for name in ("codebook.csv", "range_out.pgm", "depth_out.pgm",
                     "gt_range_out.pgm", "gt_depth_out.pgm"):
            assert (tmp_path / name).exists()


class TestSweep:
    def test_rows_carry_all_columns(self, tmp_path):
        rows = sweep(SMALL, "radio.tx_power_dbm", [50.0], out_dir=tmp_path)
        assert len(rows) == 1
        assert set(rows[0]) == set(SWEEP_COLUMNS)
        assert rows[0]["value"] == 50.0
        lines = (tmp_path / "sweep.csv").read_text().strip().split("\n")
        assert lines[0] == ",".join(SWEEP_COLUMNS)
        assert len(lines) == 2

    def test_short_name_matches_dotted(self):
        by_alias = sweep(SMALL, "tx_power", [50.0])
        by_path = sweep(SMALL, "radio.tx_power_dbm", [50.0])
        assert by_alias[0]["range_mae_m"] == by_path[0]["range_mae_m"]

    def test_value_order_preserved(self):
        rows = sweep(SMALL, "distance", [1.5, 1.0])
        assert [r["value"] for r in rows] == [1.5, 1.0]

    def test_base_dict_untouched(self):
        base = json.loads(json.dumps(SMALL))
        sweep(base, "tx_power", [52.0])
        assert base == SMALL


class TestCli:
    def write_config(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(SMALL))
        return path

    def test_run_writes_artifacts(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        out = tmp_path / "out"
        assert cli_main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "range.pgm").exists()
        assert "rmse" in capsys.readouterr().out

    def test_run_set_override_parses_json(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        code = cli_main(["run", "--config", str(cfg), "--set", "sim.noiseless=true",
                         "--set", "estimator.noise_policy=analytic"])
        assert code == 0

    def test_missing_config_is_usage_error(self, tmp_path, capsys):
        code = cli_main(["run", "--config", str(tmp_path / "nope.json")])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_key_is_usage_error(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"radios": {}}))
        assert cli_main(["run", "--config", str(path)]) == 2

    def test_malformed_set_is_usage_error(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        assert cli_main(["run", "--config", str(cfg), "--set", "noequals"]) == 2

    def test_missing_scene_file_is_runtime_error(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        code = cli_main([
            "run", "--config", str(cfg),
            "--set", 'scene={"file": "/definitely/missing/scene.json"}',
        ])
        assert code == 3
        assert "runtime error" in capsys.readouterr().err

    def test_ground_truth_subcommand(self, tmp_path, capsys):
        out = tmp_path / "gt"
        code = cli_main([
            "ground-truth", "--scenario", "one_wall", "--out", str(out),
            "--resolution", "32x24",
        ])
        assert code == 0
        assert (out / "gt_range.pgm").exists()
        assert (out / "gt_depth.pgm").exists()
        assert "24x32" in capsys.readouterr().out

    def test_codebook_dump_subcommand(self, tmp_path, capsys):
        out = tmp_path / "codebook.csv"
        cfg = self.write_config(tmp_path)
        assert cli_main(["codebook-dump", "--config", str(cfg), "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 1 + 16  # header plus one row per beam

    def test_sweep_subcommand(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        out = tmp_path / "sweep"
        code = cli_main([
            "sweep", "--config", str(cfg), "--parameter", "tx_power",
            "--values", "50", "--out", str(out),
        ])
        assert code == 0
        assert (out / "sweep.csv").exists()

    def test_sweep_empty_values_is_usage_error(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        code = cli_main([
            "sweep", "--config", str(cfg), "--parameter", "tx_power", "--values", ",",
        ])
        assert code == 2


def test_scenario_config_is_frozen():
    cfg = ScenarioConfig()
    with pytest.raises(AttributeError):
        cfg.name = "other"


def test_upa_config_defaults_match_reference_array():
    upa = UpaConfig()
    assert upa.n_h == 16 and upa.n_v == 16
