"""
End-to-end scenario runs: configuration, builtin scenes, simulation, artifacts.

A scenario config is a nested JSON-shaped dict; every level rejects unknown
keys so typos fail loudly instead of silently running defaults. The same
dict, canonically serialized, is hashed into run.json so any two artifact
sets can be traced back to the exact settings that produced them.

run_scenario executes the whole chain

    codebook -> scene paths + ray-cast truth -> per-beam channel taps ->
    noisy records -> per-beam cancellation -> joint delay selection ->
    sub-sample refinement -> range / depth maps -> error reports

and optionally writes the artifact files (PGM and CSV maps, error table,
run.json, record and codebook dumps). Every artifact except run.json is
byte-deterministic for a given config; run.json carries wall-clock timings.

Beam-level work can be spread over threads with the MMDEPTH_WORKERS
environment variable; results are identical regardless of worker count
because every beam draws noise from its own spawned generator.
"""

from __future__ import annotations

import hashlib
import inspect
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .channel import (
    RadioConfig,
    beamformed_taps_batch,
    delay_window_length,
    noise_variance,
)
from .codebook import Codebook, SceneView, UpaConfig, design_codebook, write_codebook_csv
from .estimator import (
    build_bank,
    construct_maps,
    correlation_threshold,
    interpolate_map,
    joint_processing,
    massive_correlator,
    sic_candidates,
    tail_noise_variance,
)
from .io import write_map_csv, write_pgm16, write_records
from .metrics import ErrorReport, map_errors
from .scene import (
    MATERIALS,
    DevicePose,
    PlanarFacet,
    Scene,
    ground_truth_maps,
    load_scene,
    scene_from_dict,
    trace_backscatter_paths,
)
from .waveform import SensingRecord, make_preamble, synthesize_rx

__all__ = [
    "CodebookConfig",
    "WaveformConfig",
    "EstimatorConfig",
    "SimConfig",
    "OutputConfig",
    "ScenarioConfig",
    "config_from_dict",
    "config_to_dict",
    "config_hash",
    "load_config",
    "apply_override",
    "SWEEP_ALIASES",
    "BUILTIN_SCENES",
    "build_scene",
    "RunArtifacts",
    "run_scenario",
    "sweep",
    "SWEEP_COLUMNS",
]


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CodebookConfig:
    slr_delta_h: float = 0.0           # sidelobe-ratio taper, 0 disables
    slr_delta_v: float = 0.0
    phase_bits: int | None = None      # e.g. 2 for 2-bit shifters, None = ideal


@dataclass(frozen=True)
class WaveformConfig:
    kind: str = "golay_80211ad"        # or "pn"
    length: int = 3328                 # N_p samples
    seed: int = 0                      # pn draw seed, ignored for golay

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("preamble length must be positive")


@dataclass(frozen=True)
class EstimatorConfig:
    gamma: float = 4.0                 # detection margin, amplitude ratio
    noise_policy: str = "tail"         # tail | analytic | fixed
    fixed_noise_var: float | None = None
    tail_samples: int = 64             # tail window, <= guard_taps
    max_iterations: int = 32           # cancellation passes per beam
    refine_ratio: int = 100            # sub-sample grid, even, f_est = ratio * f_s

    def __post_init__(self):
        if self.noise_policy not in ("analytic", "tail", "fixed"):
            raise ValueError(f"unknown noise_policy {self.noise_policy!r}")
        if self.noise_policy == "fixed" and self.fixed_noise_var is None:
            raise ValueError("noise_policy 'fixed' needs fixed_noise_var")


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0                      # master seed: scene phases + per-beam noise
    cell_size_m: float = 0.05          # diffuse scatter cell edge
    include_specular: bool = True
    include_two_bounce: bool = False
    guard_taps: int = 64               # delay-window tail past the last path
    noiseless: bool = False            # skip the noise draw (diagnostics)


@dataclass(frozen=True)
class OutputConfig:
    resolution: tuple[int, int] | None = None  # (rows, cols) display size
    interpolation: str = "bicubic"             # nearest | bicubic
    write_records: bool = False                # dump records.bin (large)
    write_codebook: bool = False               # dump codebook.csv

    def __post_init__(self):
        if self.interpolation not in ("nearest", "bicubic"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        if self.resolution is not None:
            r, c = self.resolution
            if r < 1 or c < 1:
                raise ValueError("resolution must be positive")
            object.__setattr__(self, "resolution", (int(r), int(c)))


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "one_wall"
    upa: UpaConfig = field(default_factory=UpaConfig)
    view: SceneView = field(default_factory=SceneView)
    radio: RadioConfig = field(default_factory=RadioConfig)
    codebook: CodebookConfig = field(default_factory=CodebookConfig)
    waveform: WaveformConfig = field(default_factory=WaveformConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    scene: dict = field(default_factory=lambda: {"builtin": "one_wall"})


def _build_section(cls, data: dict, where: str):
    allowed = {f.name for f in fields(cls)}
    extra = set(data) - allowed
    if extra:
        raise ValueError(f"unknown {where} keys: {sorted(extra)}")
    if cls is OutputConfig and isinstance(data.get("resolution"), list):
        data = {**data, "resolution": tuple(data["resolution"])}
    return cls(**data)


_SECTIONS = {
    "upa": UpaConfig,
    "view": SceneView,
    "radio": RadioConfig,
    "codebook": CodebookConfig,
    "waveform": WaveformConfig,
    "estimator": EstimatorConfig,
    "sim": SimConfig,
    "output": OutputConfig,
}


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build a validated ScenarioConfig; unknown keys anywhere are errors."""
    allowed = {"name", "scene"} | set(_SECTIONS)
    extra = set(data) - allowed
    if extra:
        raise ValueError(f"unknown config keys: {sorted(extra)}")
    kwargs = {}
    if "name" in data:
        kwargs["name"] = data["name"]
    for key, cls in _SECTIONS.items():
        if key in data:
            kwargs[key] = _build_section(cls, dict(data[key]), key)
    if "scene" in data:
        kwargs["scene"] = _validate_scene_config(dict(data["scene"]))
    return ScenarioConfig(**kwargs)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Canonical JSON-shaped dict of a config (tuples become lists)."""
    out: dict = {"name": cfg.name, "scene": cfg.scene}
    for key, cls in _SECTIONS.items():
        section = getattr(cfg, key)
        out[key] = {
            f.name: getattr(section, f.name)
            for f in fields(cls)
            if f.init
        }
    res = out["output"]["resolution"]
    if isinstance(res, tuple):
        out["output"]["resolution"] = list(res)
    return out


def config_hash(cfg: ScenarioConfig) -> str:
    """
    sha256 over the canonical JSON serialization. For file-based scenes the
    hash covers the path, not the file contents.
    """
    blob = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


# Short names for the parameters studied in the reference sweeps, mapped
# onto their config paths. 'distance' assumes a builtin scene that takes a
# distance_m argument (one_wall does).
SWEEP_ALIASES = {
    "tx_power": "radio.tx_power_dbm",
    "preamble_len": "waveform.length",
    "distance": "scene.distance_m",
    "upa_size": "upa.n",
    "os_factor": "view.os",
}


def apply_override(data: dict, dotted: str, value) -> None:
    """
    Set a dotted path like 'radio.tx_power_dbm' in a config dict, in place.

    Accepts the SWEEP_ALIASES short names as well. 'upa.n' sets both n_h
    and n_v; 'view.os' sets both os_h and os_v. Intermediate dicts are
    created as needed; final key validity is checked later by
    config_from_dict.
    """
    dotted = SWEEP_ALIASES.get(dotted, dotted)
    if dotted == "upa.n":
        data.setdefault("upa", {})["n_h"] = value
        data["upa"]["n_v"] = value
        return
    if dotted == "view.os":
        data.setdefault("view", {})["os_h"] = value
        data["view"]["os_v"] = value
        return
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ValueError(f"cannot descend into non-dict at {k!r} of {dotted!r}")
    node[keys[-1]] = value


# ---------------------------------------------------------------------------
# Builtin scenes
# ---------------------------------------------------------------------------

def _wall(y: float, x0: float, x1: float, z0: float, z1: float, material, rcs_sqm=None) -> PlanarFacet:
    """Axis-aligned vertical rectangle at constant y, facing the device."""
    verts = np.array(
        [[x0, y, z0], [x1, y, z0], [x1, y, z1], [x0, y, z1]], dtype=float
    )
    return PlanarFacet(vertices=verts, material=material, rcs_sqm=rcs_sqm)


def _fov_half_extents(view: SceneView, distance_m: float, margin: float) -> tuple[float, float]:
    """Half width / half height of the field of view at a given distance."""
    tan_h = np.tan(np.radians(view.fov_deg) / 2.0)
    tan_v = tan_h / view.aspect_ratio
    return distance_m * tan_h * margin, distance_m * tan_v * margin


def _scene_one_wall(
    view: SceneView,
    distance_m: float = 7.0,
    material: str = "concrete",
    margin: float = 1.15,
    rcs_sqm: float | None = None,
) -> Scene:
    """Single flat wall square to the boresight, oversized past the FoV edge."""
    if distance_m <= 0:
        raise ValueError("distance_m must be positive")
    hw, hh = _fov_half_extents(view, distance_m, margin)
    wall = _wall(distance_m, -hw, hw, -hh, hh, MATERIALS[material], rcs_sqm)
    return Scene(facets=[wall], device=DevicePose(position=np.zeros(3)), path_loss_exponent=2.0)


def _scene_two_walls(
    view: SceneView,
    front_distance_m: float = 1.0,
    back_distance_m: float = 2.0,
    front_material: str = "concrete",
    back_material: str = "concrete",
    margin: float = 1.15,
) -> Scene:
    """
    Half-width wall in front of a full wall: the front wall covers the left
    half of the view, so every map has a vertical depth discontinuity at
    boresight and the back wall is partly shadowed.
    """
    if not 0 < front_distance_m < back_distance_m:
        raise ValueError("need 0 < front_distance_m < back_distance_m")
    f_hw, f_hh = _fov_half_extents(view, front_distance_m, margin)
    b_hw, b_hh = _fov_half_extents(view, back_distance_m, margin)
    front = _wall(front_distance_m, -f_hw, 0.0, -f_hh, f_hh, MATERIALS[front_material])
    back = _wall(back_distance_m, -b_hw, b_hw, -b_hh, b_hh, MATERIALS[back_material])
    return Scene(facets=[front, back], device=DevicePose(position=np.zeros(3)), path_loss_exponent=2.0)


def _pillar(x_c: float, y0: float, y1: float, half_w: float, z0: float, z1: float, material) -> list[PlanarFacet]:
    """Four vertical side faces of a rectangular pillar."""
    x0, x1 = x_c - half_w, x_c + half_w
    quads = [
        [[x0, y0, z0], [x1, y0, z0], [x1, y0, z1], [x0, y0, z1]],  # front
        [[x0, y1, z0], [x1, y1, z0], [x1, y1, z1], [x0, y1, z1]],  # back
        [[x0, y0, z0], [x0, y1, z0], [x0, y1, z1], [x0, y0, z1]],  # left
        [[x1, y0, z0], [x1, y1, z0], [x1, y1, z1], [x1, y0, z1]],  # right
    ]
    return [PlanarFacet(vertices=np.array(q, dtype=float), material=material) for q in quads]


def _scene_pillar_room(
    view: SceneView,
    size_m: float = 5.0,
    height_m: float = 3.0,
    pillar_distance_m: float = 2.0,
    pillar_half_width_m: float = 0.2,
    wall_material: str = "concrete",
    pillar_material: str = "wood",
) -> Scene:
    """
    Closed room with two pillars: concrete back and side walls, floorboard
    floor, ceiling board above, and two wood pillars partway in. Exercises
    occlusion, multiple materials and grazing-incidence surfaces at once.
    """
    s = size_m / 2.0
    h = height_m / 2.0
    wall_mat = MATERIALS[wall_material]
    facets = [
        _wall(size_m, -s, s, -h, h, wall_mat),  # back wall
        PlanarFacet(  # left wall x = -s
            vertices=np.array([[-s, 0, -h], [-s, size_m, -h], [-s, size_m, h], [-s, 0, h]], dtype=float),
            material=wall_mat,
        ),
        PlanarFacet(  # right wall x = +s
            vertices=np.array([[s, 0, -h], [s, size_m, -h], [s, size_m, h], [s, 0, h]], dtype=float),
            material=wall_mat,
        ),
        PlanarFacet(  # floor z = -h
            vertices=np.array([[-s, 0, -h], [s, 0, -h], [s, size_m, -h], [-s, size_m, -h]], dtype=float),
            material=MATERIALS["floorboard"],
        ),
        PlanarFacet(  # ceiling z = +h
            vertices=np.array([[-s, 0, h], [s, 0, h], [s, size_m, h], [-s, size_m, h]], dtype=float),
            material=MATERIALS["ceilingboard"],
        ),
    ]
    for x_c in (-size_m / 4.0, size_m / 4.0):
        facets.extend(
            _pillar(
                x_c,
                pillar_distance_m,
                pillar_distance_m + 2 * pillar_half_width_m,
                pillar_half_width_m,
                -h,
                h,
                MATERIALS[pillar_material],
            )
        )
    return Scene(facets=facets, device=DevicePose(position=np.zeros(3)), path_loss_exponent=2.0)


BUILTIN_SCENES = {
    "one_wall": _scene_one_wall,
    "two_walls": _scene_two_walls,
    "pillar_room": _scene_pillar_room,
}


def _validate_scene_config(scfg: dict) -> dict:
    modes = [k for k in ("builtin", "file", "inline") if k in scfg]
    if len(modes) != 1:
        raise ValueError("scene config needs exactly one of: builtin, file, inline")
    mode = modes[0]
    if mode == "builtin":
        name = scfg["builtin"]
        if name not in BUILTIN_SCENES:
            raise ValueError(f"unknown builtin scene {name!r}; have {sorted(BUILTIN_SCENES)}")
        sig = inspect.signature(BUILTIN_SCENES[name])
        allowed = set(sig.parameters) - {"view"}
        extra = set(scfg) - allowed - {"builtin"}
        if extra:
            raise ValueError(f"unknown {name} scene keys: {sorted(extra)}")
    elif mode == "inline":
        scene_from_dict(scfg["inline"])  # full validation, result discarded
        if set(scfg) - {"inline"}:
            raise ValueError("inline scene config takes no other keys")
    else:
        if set(scfg) - {"file"}:
            raise ValueError("file scene config takes no other keys")
    return scfg


def build_scene(scene_cfg: dict, view: SceneView) -> Scene:
    """Materialize the scene section of a config."""
    scene_cfg = _validate_scene_config(dict(scene_cfg))
    if "builtin" in scene_cfg:
        params = {k: v for k, v in scene_cfg.items() if k != "builtin"}
        return BUILTIN_SCENES[scene_cfg["builtin"]](view, **params)
    if "inline" in scene_cfg:
        return scene_from_dict(scene_cfg["inline"])
    return load_scene(scene_cfg["file"])


# ---------------------------------------------------------------------------
# Scenario execution
# ---------------------------------------------------------------------------

@dataclass
class RunArtifacts:
    """Everything a scenario run produced, in memory."""

    config: ScenarioConfig
    config_hash: str
    codebook: Codebook
    scene: Scene
    n_paths: int
    l_d: int
    records: list[SensingRecord]
    selected: np.ndarray               # (n_bar_v, n_bar_h) coarse delay bins
    fine_offsets: np.ndarray           # sub-sample refinement, coarse-bin units
    filled: np.ndarray                 # beams whose delay came from hole filling
    truncated_beams: int               # beams that hit the cancellation cap
    range_map: np.ndarray              # estimates at estimation resolution
    depth_map: np.ndarray
    gt_range: np.ndarray               # truth at estimation resolution
    gt_depth: np.ndarray
    out_range: np.ndarray | None       # estimates upscaled to display size
    out_depth: np.ndarray | None
    gt_range_out: np.ndarray | None
    gt_depth_out: np.ndarray | None
    reports: dict[str, ErrorReport]    # keys: range, depth, range_out, depth_out
    air_time_s: float                  # M * N_p * T_s on-air duration
    timings_s: dict[str, float]
    files: list[str] = field(default_factory=list)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("MMDEPTH_WORKERS", "1")))
    except ValueError:
        return 1


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> RunArtifacts:
    """
    Execute one scenario end to end; optionally write artifacts to out_dir.

    Determinism: a master SeedSequence from sim.seed spawns one child for
    the scene scattering phases and one per beam for record noise, so
    results do not depend on beam execution order or MMDEPTH_WORKERS.
    """
    timings: dict[str, float] = {}
    t_start = time.perf_counter()

    def _clock(key: str, t0: float) -> float:
        t1 = time.perf_counter()
        timings[key] = timings.get(key, 0.0) + (t1 - t0)
        return t1

    t0 = t_start
    cb = design_codebook(
        cfg.upa,
        cfg.view,
        slr_delta_h=cfg.codebook.slr_delta_h,
        slr_delta_v=cfg.codebook.slr_delta_v,
        phase_bits=cfg.codebook.phase_bits,
    )
    t0 = _clock("codebook", t0)

    scene = build_scene(cfg.scene, cfg.view)
    master = np.random.SeedSequence(cfg.sim.seed)
    seeds = master.spawn(1 + cb.m)
    paths = trace_backscatter_paths(
        scene,
        tx_gain_dbi=cfg.upa.element_gain_dbi,
        rx_gain_dbi=cfg.upa.element_gain_dbi,
        wavelength_m=cfg.radio.wavelength_m,
        cell_size_m=cfg.sim.cell_size_m,
        seed=seeds[0],
        include_specular=cfg.sim.include_specular,
        include_two_bounce=cfg.sim.include_two_bounce,
    )
    t0 = _clock("scene_paths", t0)

    gt_range, gt_depth = ground_truth_maps(scene, cfg.view, (cb.n_bar_v, cb.n_bar_h))
    gt_range_out = gt_depth_out = None
    if cfg.output.resolution is not None:
        gt_range_out, gt_depth_out = ground_truth_maps(scene, cfg.view, cfg.output.resolution)
    t0 = _clock("ground_truth", t0)

    l_d = delay_window_length(
        paths.max_delay_s, cfg.radio.sample_period_s, guard=cfg.sim.guard_taps
    )
    taps = beamformed_taps_batch(paths, cb.weights, cfg.upa, cfg.radio, l_d)
    t0 = _clock("channel_taps", t0)

    preamble = make_preamble(cfg.waveform.kind, cfg.waveform.length, cfg.waveform.seed)
    records: list[SensingRecord] = []
    for m in range(cb.m):
        rng = None if cfg.sim.noiseless else np.random.default_rng(seeds[1 + m])
        records.append(
            synthesize_rx(taps[m], preamble, cfg.radio, float(cb.combine_norm_sq[m]), rng, beam=m)
        )
    t0 = _clock("records", t0)

    sigma_analytic = noise_variance(cfg.radio)

    def _noise_var(m: int) -> float:
        policy = cfg.estimator.noise_policy
        if policy == "analytic":
            return sigma_analytic * float(cb.combine_norm_sq[m])
        if policy == "tail":
            return tail_noise_variance(records[m].samples, cfg.estimator.tail_samples)
        return float(cfg.estimator.fixed_noise_var)

    def _detect(m: int):
        thr = correlation_threshold(preamble, _noise_var(m), cfg.estimator.gamma)
        return sic_candidates(
            records[m].samples, preamble, thr, cfg.estimator.max_iterations
        )

    workers = _workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_detect, range(cb.m)))
    else:
        results = [_detect(m) for m in range(cb.m)]
    truncated_beams = sum(r.truncated for r in results)
    t0 = _clock("sic", t0)

    selected, filled = joint_processing([r.delays for r in results], cb.n_bar_h, cb.n_bar_v)
    t0 = _clock("joint", t0)

    bank = build_bank(preamble, cfg.estimator.refine_ratio, cfg.radio.rolloff)
    fine = np.zeros((cb.n_bar_v, cb.n_bar_h))
    for v in range(cb.n_bar_v):
        for h in range(cb.n_bar_h):
            m = v * cb.n_bar_h + h
            fine[v, h] = massive_correlator(records[m].samples, bank, int(selected[v, h]))
    t0 = _clock("refine", t0)

    range_map, depth_map = construct_maps(
        selected, fine, cb.theta_z, cb.phi, cfg.radio.sample_period_s
    )
    reports = {
        "range": map_errors(range_map, gt_range),
        "depth": map_errors(depth_map, gt_depth),
    }
    out_range = out_depth = None
    if cfg.output.resolution is not None:
        out_range = interpolate_map(range_map, cfg.output.resolution, cfg.output.interpolation)
        out_depth = interpolate_map(depth_map, cfg.output.resolution, cfg.output.interpolation)
        reports["range_out"] = map_errors(out_range, gt_range_out)
        reports["depth_out"] = map_errors(out_depth, gt_depth_out)
    t0 = _clock("maps", t0)

    timings["total"] = time.perf_counter() - t_start
    art = RunArtifacts(
        config=cfg,
        config_hash=config_hash(cfg),
        codebook=cb,
        scene=scene,
        n_paths=len(paths),
        l_d=l_d,
        records=records,
        selected=selected,
        fine_offsets=fine,
        filled=filled,
        truncated_beams=truncated_beams,
        range_map=range_map,
        depth_map=depth_map,
        gt_range=gt_range,
        gt_depth=gt_depth,
        out_range=out_range,
        out_depth=out_depth,
        gt_range_out=gt_range_out,
        gt_depth_out=gt_depth_out,
        reports=reports,
        air_time_s=cb.m * cfg.waveform.length * cfg.radio.sample_period_s,
        timings_s=timings,
    )
    if out_dir is not None:
        _write_artifacts(art, Path(out_dir))
    return art


def _write_artifacts(art: RunArtifacts, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = art.config

    def _put(name: str, writer, *args) -> None:
        path = out_dir / name
        writer(path, *args)
        art.files.append(str(path))

    _put("range.pgm", write_pgm16, art.range_map)
    _put("depth.pgm", write_pgm16, art.depth_map)
    _put("gt_range.pgm", write_pgm16, art.gt_range)
    _put("gt_depth.pgm", write_pgm16, art.gt_depth)
    _put("range.csv", write_map_csv, art.range_map)
    _put("depth.csv", write_map_csv, art.depth_map)
    if art.out_range is not None:
        _put("range_out.pgm", write_pgm16, art.out_range)
        _put("depth_out.pgm", write_pgm16, art.out_depth)
        _put("gt_range_out.pgm", write_pgm16, art.gt_range_out)
        _put("gt_depth_out.pgm", write_pgm16, art.gt_depth_out)
    if cfg.output.write_records:
        _put("records.bin", write_records, art.records)
    if cfg.output.write_codebook:
        _put("codebook.csv", lambda p: write_codebook_csv(art.codebook, p))

    err_path = out_dir / "errors.csv"
    with open(err_path, "w", newline="") as fh:
        fh.write("map,rows,cols,rmse_m,mae_m,bias_m,n_valid,n_total\n")
        shapes = {
            "range": art.range_map.shape,
            "depth": art.depth_map.shape,
            "range_out": None if art.out_range is None else art.out_range.shape,
            "depth_out": None if art.out_depth is None else art.out_depth.shape,
        }
        for key, rep in art.reports.items():
            rows, cols = shapes[key]
            fh.write(
                f"{key},{rows},{cols},{repr(rep.rmse_m)},{repr(rep.mae_m)},"
                f"{repr(rep.bias_m)},{rep.n_valid},{rep.n_total}\n"
            )
    art.files.append(str(err_path))

    run_info = {
        "name": cfg.name,
        "config": config_to_dict(cfg),
        "config_hash": art.config_hash,
        "n_paths": art.n_paths,
        "l_d": art.l_d,
        "beams": art.codebook.m,
        "truncated_beams": art.truncated_beams,
        "filled_beams": int(art.filled.sum()),
        "air_time_s": art.air_time_s,
        "reports": {
            k: {
                "rmse_m": r.rmse_m,
                "mae_m": r.mae_m,
                "bias_m": r.bias_m,
                "n_valid": r.n_valid,
                "n_total": r.n_total,
            }
            for k, r in art.reports.items()
        },
        "timings_s": art.timings_s,
    }
    run_path = out_dir / "run.json"
    with open(run_path, "w") as fh:
        json.dump(run_info, fh, indent=2)
    art.files.append(str(run_path))


# ---------------------------------------------------------------------------
# Parameter sweeps
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = [
    "value",
    "beams",
    "n_paths",
    "filled_beams",
    "truncated_beams",
    "range_rmse_m",
    "range_mae_m",
    "depth_rmse_m",
    "depth_mae_m",
    "air_time_s",
]


def sweep(
    base: dict,
    parameter: str,
    values,
    out_dir=None,
    csv_name: str = "sweep.csv",
) -> list[dict]:
    """
    Rerun a base config dict with `parameter` (dotted path, see
    apply_override) set to each value, collecting estimation-resolution
    error metrics per run.

    Returns the result rows; with out_dir also writes them as CSV. Rows run
    in the order given; each run keeps the base seed so the comparison
    varies only the swept parameter.
    """
    rows: list[dict] = []
    for value in values:
        data = json.loads(json.dumps(base))  # deep copy, JSON types only
        apply_override(data, parameter, value)
        art = run_scenario(config_from_dict(data))
        rows.append(
            {
                "value": value,
                "beams": art.codebook.m,
                "n_paths": art.n_paths,
                "filled_beams": int(art.filled.sum()),
                "truncated_beams": art.truncated_beams,
                "range_rmse_m": art.reports["range"].rmse_m,
                "range_mae_m": art.reports["range"].mae_m,
                "depth_rmse_m": art.reports["depth"].rmse_m,
                "depth_mae_m": art.reports["depth"].mae_m,
                "air_time_s": art.air_time_s,
            }
        )
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / csv_name
        with open(path, "w", newline="") as fh:
            fh.write(",".join(SWEEP_COLUMNS) + "\n")
            for row in rows:
                cells = [
                    repr(row[c]) if isinstance(row[c], float) else str(row[c])
                    for c in SWEEP_COLUMNS
                ]
                fh.write(",".join(cells) + "\n")
    return rows
