"""Command-line entry point: ``slicematch {morph,sw2,check,plot}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import diagnostics
from .imageio import (CONVERSION_MODES, RENDER_MODES, ImageFormatError, image_to_measure,
                      measure_to_image, read_image, write_image)
from .measure import MeasureError, read_point_cloud, write_point_cloud
from .scheme import Schedule, run, write_trajectory_csv
from .slicing import DEFAULT_SEED, DirectionSampler, sw2

IMAGE_SUFFIXES = {".png", ".pgm"}

MORPH_DEFAULTS = {
    "slices": 2,
    "schedule": "log-over-k",
    "gamma": 1.0,
    "iters": 13,
    "seed": DEFAULT_SEED,
    "sw2_dirs": 2000,
    "snap_every": 1,
    "mode": "sampled",
    "samples": 2000,
    "render": "histogram",
    "bandwidth": 0.7,
    "width": None,
    "height": None,
    "sw2_threshold": None,
    "plot": True,
}


class CliError(Exception):
    pass


def load_measure(path, mode: str, samples: int | None, seed: int):
    """Read a point-cloud file or a grayscale image; returns ``(measure, image_shape or None)``."""
    path = Path(path)
    if not path.exists():
        raise CliError(f"no such file: {path}")
    if path.suffix.lower() in IMAGE_SUFFIXES:
        img = read_image(path)
        return image_to_measure(img, mode, samples, seed), (img.height, img.width)
    return read_point_cloud(path), None


def _add_conversion_flags(p, mode_default):
    p.add_argument("--mode", choices=CONVERSION_MODES, default=mode_default,
                   help="image to measure conversion")
    p.add_argument("--samples", type=int, default=None, help="atom count for --mode sampled")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slicematch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("morph", help="run the stochastic slice-matching scheme")
    p.add_argument("--config", help="rerun from a saved config.json (other flags override it)")
    p.add_argument("--source")
    p.add_argument("--target")
    p.add_argument("--slices", type=int, help="j, number of matched directions per step")
    p.add_argument("--schedule", choices=("inverse-k", "log-over-k", "constant"))
    p.add_argument("--gamma", type=float, help="step size for --schedule constant")
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sw2-dirs", type=int, dest="sw2_dirs")
    p.add_argument("--sw2-threshold", type=float, dest="sw2_threshold", help="stop once SW2 falls below")
    p.add_argument("--snap-every", type=int, dest="snap_every")
    p.add_argument("--out")
    p.add_argument("--mode", choices=CONVERSION_MODES)
    p.add_argument("--samples", type=int)
    p.add_argument("--render", choices=RENDER_MODES)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--width", type=int, help="snapshot width (default: target image width or 28)")
    p.add_argument("--height", type=int)
    p.add_argument("--no-plot", dest="plot", action="store_false", default=None)

    p = sub.add_parser("sw2", help="Monte-Carlo sliced Wasserstein distance between two inputs")
    p.add_argument("input_a")
    p.add_argument("input_b")
    p.add_argument("--directions", type=int, default=2000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--digits", type=int, default=6)
    _add_conversion_flags(p, "weighted-grid")

    p = sub.add_parser("check", help="randomized identity batteries")
    p.add_argument("suite", choices=sorted(diagnostics.BATTERIES) + ["all"])
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--dump", help="where to write failing instances (JSON); default stderr")

    p = sub.add_parser("plot", help="render a trajectory CSV to a convergence figure")
    p.add_argument("csv")
    p.add_argument("--out", default=None)
    p.add_argument("--title", default=None)
    return parser


def _morph_config(args) -> dict:
    cfg = dict(MORPH_DEFAULTS)
    if args.config:
        cfg.update(json.loads(Path(args.config).read_text()))
    for key in list(MORPH_DEFAULTS) + ["source", "target", "out"]:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key in ("source", "target", "out"):
        if not cfg.get(key):
            raise CliError(f"--{key} is required")
    cfg["source"] = str(Path(cfg["source"]).resolve())
    cfg["target"] = str(Path(cfg["target"]).resolve())
    return cfg


def cmd_morph(args) -> int:
    cfg = _morph_config(args)
    out = Path(cfg["out"])
    schedule = Schedule(cfg["schedule"], cfg["gamma"]) if cfg["schedule"] == "constant" else Schedule(cfg["schedule"])
    samples = cfg["samples"] if cfg["mode"] == "sampled" else None
    src, src_shape = load_measure(cfg["source"], cfg["mode"], samples, cfg["seed"])
    tgt, tgt_shape = load_measure(cfg["target"], cfg["mode"], samples, cfg["seed"])
    if src.dim != tgt.dim:
        raise CliError(f"dimension mismatch: source {src.dim}, target {tgt.dim}")
    shape = tgt_shape or src_shape or (28, 28)
    width = cfg["width"] or shape[1]
    height = cfg["height"] or shape[0]

    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")

    sampler = DirectionSampler("haar-orthogonal", cfg["seed"])
    traj = run(src, tgt, cfg["slices"], schedule, sampler, cfg["iters"], sw2_dirs=cfg["sw2_dirs"],
               snapshot_every=cfg["snap_every"], sw2_threshold=cfg["sw2_threshold"])
    write_trajectory_csv(traj, out / "trajectory.csv")
    write_point_cloud(traj.final, out / "final.txt")

    rendered = {}
    if src.dim == 2:
        for k, m in traj.snapshots.items():
            img = measure_to_image(m, width, height, cfg["render"], cfg["bandwidth"])
            write_image(img, out / f"step_{k}.png")
            rendered[k] = img.pixels
    if cfg["plot"]:
        from .plotting import plot_convergence, plot_snapshots

        plot_convergence([r.k for r in traj.records], traj.sw2_series(),
                         [r.sw2_stderr for r in traj.records], out / "convergence.png",
                         title=f"j={cfg['slices']}, {schedule.kind}")
        if rendered:
            plot_snapshots(rendered, out / "snapshots.png")
    last = traj.records[-1]
    print(f"iterations={traj.iterations} sw2_initial={traj.records[0].sw2_estimate:.6g} "
          f"sw2_final={last.sw2_estimate:.6g} out={out}")
    return 0


def cmd_sw2(args) -> int:
    samples = args.samples or (2000 if args.mode == "sampled" else None)
    a, _ = load_measure(args.input_a, args.mode, samples, args.seed)
    b, _ = load_measure(args.input_b, args.mode, samples, args.seed)
    if a.dim != b.dim:
        raise CliError(f"dimension mismatch: {a.dim} vs {b.dim}")
    est = sw2(a, b, DirectionSampler("uniform-sphere", args.seed), args.directions)
    print(f"{est.value:.{args.digits}f} {est.stderr:.{args.digits}f}")
    return 0


def cmd_check(args) -> int:
    names = sorted(diagnostics.BATTERIES) if args.suite == "all" else [args.suite]
    ok = True
    failures = {}
    for name in names:
        report = diagnostics.BATTERIES[name](args.seed)
        print("\n".join(report.lines()))
        if not report.passed:
            ok = False
            failures[name] = report.failures
    if failures:
        blob = json.dumps({"seed": args.seed, "failures": failures}, indent=1)
        if args.dump:
            Path(args.dump).write_text(blob)
        else:
            print(blob, file=sys.stderr)
    return 0 if ok else 1


def cmd_plot(args) -> int:
    from .plotting import plot_trajectory_csv

    out = args.out or str(Path(args.csv).with_suffix(".png"))
    plot_trajectory_csv(args.csv, out, args.title)
    print(out)
    return 0


COMMANDS = {"morph": cmd_morph, "sw2": cmd_sw2, "check": cmd_check, "plot": cmd_plot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (CliError, MeasureError, ImageFormatError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"slicematch {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
