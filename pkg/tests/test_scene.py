"""Scene geometry: ray-cast truth maps and the diffuse backscatter tracer."""
import numpy as np
import pytest

from mmdepth.channel import path_gain
from mmdepth.codebook import SceneView
from mmdepth.scene import (
    BACKSCATTER_GAIN,
    MATERIALS,
    Material,
    PlanarFacet,
    DevicePose,
    Scene,
    ground_truth_maps,
    trace_backscatter_paths,
    scene_from_dict,
    scene_to_dict,
    save_scene,
    load_scene,
)

C = 299792458.0


def facing_wall(distance, half_w, half_h, material=None, rcs_sqm=None):
    """Rectangle at y = distance, centered on boresight, facing the device."""
    verts = np.array(
        [
            [-half_w, distance, -half_h],
            [half_w, distance, -half_h],
            [half_w, distance, half_h],
            [-half_w, distance, half_h],
        ]
    )
    return PlanarFacet(
        vertices=verts,
        material=material or MATERIALS["concrete"],
        rcs_sqm=rcs_sqm,
    )


def wall_scene(distance=7.0, span=12.0, **kwargs):
    wall = facing_wall(distance, span, span, **kwargs)
    return Scene(facets=[wall], device=DevicePose(position=np.zeros(3)))


class TestMaterials:
    def test_scatter_ratio_table(self):
        expected = {
            "concrete": 0.40,
            "ceilingboard": 0.30,
            "wood": 0.15,
            "floorboard": 0.15,
            "drywall": 0.10,
            "glass": 0.00,
        }
        for name, ratio in expected.items():
            assert MATERIALS[name].scatter_ratio == pytest.approx(ratio)


class TestGroundTruth:
    def test_center_and_edge_ranges(self):
        view = SceneView(fov_deg=100.0, aspect_ratio=16 / 9)
        rng_map, dep_map = ground_truth_maps(wall_scene(7.0), view, (17, 17))
        # center pixel looks straight down boresight
        assert rng_map[8, 8] == pytest.approx(7.0, rel=1e-9)
        assert dep_map[8, 8] == pytest.approx(7.0, rel=1e-9)
        # horizontal FoV edge pixel: the edge ray of a 100 degree FoV
        mid = rng_map[8, 0]
        assert mid <= 7.0 / np.cos(np.radians(50.0)) + 1e-9
        assert mid > 7.0

    def test_depth_is_boresight_component(self):
        view = SceneView()
        rng_map, dep_map = ground_truth_maps(wall_scene(5.0), view, (9, 9))
        assert np.allclose(dep_map, 5.0, atol=1e-9)  # flat facing wall
        assert np.all(rng_map >= dep_map - 1e-12)

    def test_mirror_symmetry(self):
        view = SceneView()
        rng_map, _ = ground_truth_maps(wall_scene(6.0), view, (16, 16))
        assert np.allclose(rng_map, rng_map[:, ::-1], rtol=1e-9)
        assert np.allclose(rng_map, rng_map[::-1, :], rtol=1e-9)

    def test_miss_is_inf(self):
        view = SceneView()
        scene = wall_scene(4.0, span=0.5)  # small plate far inside the FoV
        rng_map, dep_map = ground_truth_maps(scene, view, (16, 16))
        assert np.isinf(rng_map[0, 0])
        assert np.isinf(dep_map[0, 0])
        assert np.isfinite(rng_map[8, 8])


class TestTracer:
    def test_path_geometry_and_delay(self):
        scene = wall_scene(7.0, span=2.0)
        paths = trace_backscatter_paths(scene, 0.0, 0.0, 5e-3, cell_size_m=0.5)
        assert len(paths.delay_s) > 0
        assert np.all(paths.range_m >= 7.0 - 1e-9)
        assert np.allclose(paths.delay_s, 2.0 * paths.range_m / C)

    def test_amplitude_folds_radar_equation(self):
        # one cell exactly covering the plate, explicit cross-section
        scene = wall_scene(7.0, span=0.25, rcs_sqm=2.0)
        paths = trace_backscatter_paths(
            scene, 0.0, 0.0, 5e-3, cell_size_m=0.5, include_specular=False
        )
        assert len(paths.delay_s) == 1
        expected = np.sqrt(path_gain(2.0, paths.range_m[0], 5e-3, pl_exponent=1.0))
        assert np.abs(paths.amplitude[0]) == pytest.approx(expected, rel=1e-9)

    def test_cell_cross_section_scales_with_area(self):
        scene = wall_scene(7.0, span=0.25)  # concrete, one 0.5 m cell
        paths = trace_backscatter_paths(
            scene, 0.0, 0.0, 5e-3, cell_size_m=0.5, include_specular=False
        )
        sigma = BACKSCATTER_GAIN * 0.40 * 0.25
        expected = np.sqrt(
            path_gain(sigma, paths.range_m[0], 5e-3, pl_exponent=1.0)
        )
        assert np.abs(paths.amplitude[0]) == pytest.approx(expected, rel=1e-9)

    def test_path_loss_exponent_doubles_distance_decay(self):
        lam = 5e-3
        amps = {}
        for pl in (1.0, 2.0):
            vals = []
            for dist in (3.5, 7.0):
                wall = facing_wall(dist, 0.25, 0.25, rcs_sqm=1.0)
                scene = Scene(
                    facets=[wall],
                    device=DevicePose(position=np.zeros(3)),
                    path_loss_exponent=pl,
                )
                p = trace_backscatter_paths(
                    scene, 0.0, 0.0, lam, cell_size_m=0.5, include_specular=False
                )
                vals.append(np.abs(p.amplitude[0]))
            amps[pl] = vals[0] / vals[1]
        assert amps[1.0] == pytest.approx(2.0, rel=1e-9)  # sqrt of 4x power
        assert amps[2.0] == pytest.approx(4.0, rel=1e-9)  # sqrt of 16x power

    def test_glass_scatters_nothing(self):
        # all-glass scene has no diffuse return, which the tracer reports
        scene = wall_scene(5.0, span=1.0, material=MATERIALS["glass"])
        with pytest.raises(ValueError, match="no backscatter"):
            trace_backscatter_paths(
                scene, 0.0, 0.0, 5e-3, cell_size_m=0.5, include_specular=False
            )

    def test_seed_determinism(self):
        scene = wall_scene(6.0, span=3.0)
        a = trace_backscatter_paths(scene, 0.0, 0.0, 5e-3, seed=5)
        b = trace_backscatter_paths(scene, 0.0, 0.0, 5e-3, seed=5)
        c = trace_backscatter_paths(scene, 0.0, 0.0, 5e-3, seed=6)
        assert np.array_equal(a.amplitude, b.amplitude)
        assert not np.array_equal(a.amplitude, c.amplitude)
        # geometry does not depend on the phase seed
        assert np.array_equal(a.range_m, c.range_m)

    def test_specular_toggle(self):
        scene = wall_scene(6.0, span=3.0)
        with_spec = trace_backscatter_paths(scene, 0.0, 0.0, 5e-3)
        without = trace_backscatter_paths(
            scene, 0.0, 0.0, 5e-3, include_specular=False
        )
        assert with_spec.specular.sum() >= without.specular.sum()
        assert without.specular.sum() == 0


class TestSceneSerialization:
    def test_round_trip(self, tmp_path):
        scene = wall_scene(7.0, span=2.0)
        path = tmp_path / "scene.json"
        save_scene(scene, path)
        back = load_scene(path)
        assert len(back.facets) == 1
        assert np.allclose(back.facets[0].vertices, scene.facets[0].vertices)
        assert back.path_loss_exponent == scene.path_loss_exponent

    def test_dict_round_trip(self):
        scene = wall_scene(4.0, span=1.0)
        again = scene_from_dict(scene_to_dict(scene))
        assert np.allclose(
            again.facets[0].vertices, scene.facets[0].vertices
        )

    def test_unknown_material_rejected(self):
        data = scene_to_dict(wall_scene(4.0, span=1.0))
        data["facets"][0]["material"] = "adamantium"
        with pytest.raises((KeyError, ValueError)):
            scene_from_dict(data)
