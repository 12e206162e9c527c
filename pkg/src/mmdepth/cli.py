"""
Command-line front end.

    mmdepth run           one scenario end to end, artifacts to a directory
    mmdepth sweep         rerun a scenario over a parameter list, CSV out
    mmdepth ground-truth  ray-cast reference maps only
    mmdepth codebook-dump write the beam codebook as CSV

Every subcommand starts from the built-in defaults, optionally overlaid
with --config FILE (JSON), then --scenario, then convenience flags, then
repeatable --set dotted.key=value overrides (values parse as JSON when
possible, else literal strings).

Exit codes: 0 success, 2 configuration or usage error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .io import write_pgm16
from .pipeline import (
    BUILTIN_SCENES,
    apply_override,
    build_scene,
    config_from_dict,
    run_scenario,
    sweep,
)
from .codebook import design_codebook, write_codebook_csv
from .scene import ground_truth_maps

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class _ConfigError(Exception):
    """Bad config file, flag, or override; maps to exit code 2."""


def _parse_set_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _parse_resolution(raw: str) -> tuple[int, int]:
    """'1920x1080' (width x height) to (rows, cols)."""
    try:
        w, h = raw.lower().split("x")
        rows, cols = int(h), int(w)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"resolution must look like 1920x1080, got {raw!r}"
        ) from None
    if rows < 1 or cols < 1:
        raise argparse.ArgumentTypeError("resolution must be positive")
    return rows, cols


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="JSON scenario config")
    p.add_argument(
        "--scenario",
        choices=sorted(BUILTIN_SCENES),
        help="builtin scene shortcut (resets the scene section)",
    )
    p.add_argument("--seed", type=int, help="master simulation seed")
    p.add_argument(
        "--set",
        dest="overrides",
        metavar="KEY=VALUE",
        action="append",
        default=[],
        help="dotted config override, e.g. --set radio.tx_power_dbm=20 (repeatable)",
    )


def _assemble_config_dict(args) -> dict:
    try:
        data: dict = {}
        if args.config:
            with open(args.config) as fh:
                data = json.load(fh)
        if args.scenario:
            data["scene"] = {"builtin": args.scenario}
            data["name"] = args.scenario
        if args.seed is not None:
            apply_override(data, "sim.seed", args.seed)
        for item in args.overrides:
            key, sep, raw = item.partition("=")
            if not sep or not key:
                raise ValueError(f"--set needs KEY=VALUE, got {item!r}")
            apply_override(data, key, _parse_set_value(raw))
        return data
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        raise _ConfigError(str(exc)) from None


def _validated_config(data: dict):
    try:
        return config_from_dict(data)
    except ValueError as exc:
        raise _ConfigError(str(exc)) from None


def _cmd_run(args) -> int:
    data = _assemble_config_dict(args)
    if args.resolution is not None:
        apply_override(data, "output.resolution", list(args.resolution))
    if args.interpolation:
        apply_override(data, "output.interpolation", args.interpolation)
    if args.records:
        apply_override(data, "output.write_records", True)
    if args.codebook:
        apply_override(data, "output.write_codebook", True)
    cfg = _validated_config(data)
    art = run_scenario(cfg, out_dir=args.out)
    for key in ("range", "depth", "range_out", "depth_out"):
        if key in art.reports:
            rep = art.reports[key]
            print(f"{key}: rmse {rep.rmse_m:.4f} m, mae {rep.mae_m:.4f} m over {rep.n_valid} px")
    print(
        f"beams {art.codebook.m}, paths {art.n_paths}, filled {int(art.filled.sum())}, "
        f"truncated {art.truncated_beams}, air time {art.air_time_s * 1e3:.3f} ms"
    )
    if args.out:
        print(f"artifacts in {args.out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    data = _assemble_config_dict(args)
    _validated_config(json.loads(json.dumps(data)))  # fail fast; sweep revalidates
    values = [_parse_set_value(v) for v in args.values.split(",") if v != ""]
    if not values:
        raise _ConfigError("--values is empty")
    rows = sweep(data, args.parameter, values, out_dir=args.out, csv_name=args.csv_name)
    for row in rows:
        print(
            f"{args.parameter}={row['value']}: range rmse {row['range_rmse_m']:.4f} m, "
            f"depth rmse {row['depth_rmse_m']:.4f} m, filled {row['filled_beams']}"
        )
    if args.out:
        print(f"sweep table in {Path(args.out) / args.csv_name}")
    return EXIT_OK


def _cmd_ground_truth(args) -> int:
    data = _assemble_config_dict(args)
    cfg = _validated_config(data)
    scene = build_scene(cfg.scene, cfg.view)
    if args.resolution is not None:
        resolution = args.resolution
    else:
        resolution = (cfg.upa.n_v * cfg.view.os_v, cfg.upa.n_h * cfg.view.os_h)
    gt_range, gt_depth = ground_truth_maps(scene, cfg.view, resolution)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_pgm16(out / "gt_range.pgm", gt_range)
    write_pgm16(out / "gt_depth.pgm", gt_depth)
    print(f"ground truth at {resolution[0]}x{resolution[1]} px in {out}")
    return EXIT_OK


def _cmd_codebook_dump(args) -> int:
    data = _assemble_config_dict(args)
    cfg = _validated_config(data)
    cb = design_codebook(
        cfg.upa,
        cfg.view,
        slr_delta_h=cfg.codebook.slr_delta_h,
        slr_delta_v=cfg.codebook.slr_delta_v,
        phase_bits=cfg.codebook.phase_bits,
    )
    write_codebook_csv(cb, args.out)
    print(f"{cb.m} beams ({cb.n_bar_v}x{cb.n_bar_h}) in {args.out}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmdepth",
        description="millimeter-wave beam-swept depth map simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario end to end")
    _add_config_args(p_run)
    p_run.add_argument("--out", metavar="DIR", help="artifact output directory")
    p_run.add_argument(
        "--resolution",
        type=_parse_resolution,
        metavar="WxH",
        help="display resolution for upscaled maps, e.g. 1920x1080",
    )
    p_run.add_argument("--interpolation", choices=["nearest", "bicubic"])
    p_run.add_argument("--records", action="store_true", help="also dump records.bin")
    p_run.add_argument("--codebook", action="store_true", help="also dump codebook.csv")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="rerun over a parameter list")
    _add_config_args(p_sweep)
    p_sweep.add_argument("--parameter", required=True, metavar="NAME", help="config path like radio.tx_power_dbm or a short name: tx_power, preamble_len, distance, upa_size, os_factor")
    p_sweep.add_argument(
        "--values", required=True, metavar="V1,V2,...", help="comma-separated values"
    )
    p_sweep.add_argument("--out", metavar="DIR", help="directory for sweep.csv")
    p_sweep.add_argument("--csv-name", default="sweep.csv")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_gt = sub.add_parser("ground-truth", help="ray-cast reference maps only")
    _add_config_args(p_gt)
    p_gt.add_argument("--out", required=True, metavar="DIR")
    p_gt.add_argument(
        "--resolution",
        type=_parse_resolution,
        metavar="WxH",
        help="map resolution (default: beam grid size)",
    )
    p_gt.set_defaults(func=_cmd_ground_truth)

    p_cb = sub.add_parser("codebook-dump", help="write the beam codebook as CSV")
    _add_config_args(p_cb)
    p_cb.add_argument("--out", required=True, metavar="FILE")
    p_cb.set_defaults(func=_cmd_codebook_dump)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - last-resort CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
