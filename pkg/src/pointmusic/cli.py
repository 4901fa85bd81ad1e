"""Command-line entry point: ``pointmusic {run,list-presets,spectrum}``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .errors import PointMusicError
from .forward import synthesize_far_field
from .noise import NoiseSpec, add_noise
from .presets import PRESETS, preset
from .runner import load_config, run_experiment, with_overrides
from .wavecore import WaveConfig, uniform_circle_directions


def _cmd_run(args) -> int:
    if (args.config is None) == (args.preset is None):
        print("error: give exactly one of --config or --preset", file=sys.stderr)
        return 2
    cfg = load_config(args.config) if args.config else preset(args.preset)
    cfg = with_overrides(cfg, output_dir=args.output_dir, seed=args.seed)
    if cfg.output_dir is None:
        cfg = with_overrides(cfg, output_dir=f"runs/{cfg.name}")
    report = run_experiment(cfg, workers=args.workers)
    print(f"{cfg.name}: rank_used={report.rank_used} contrast={report.contrast:.4g}")
    for p in report.peaks:
        err = "-" if p["matched_error"] is None else f"{p['matched_error']:.4g}"
        print(f"  peak ({p['x']:.2f}, {p['y']:.2f})  I={p['indicator']:.4g}  error={err}")
    print(f"outputs written to {cfg.output_dir}")
    return 0


def _cmd_list(args) -> int:
    width = max(map(len, PRESETS))
    for name, cfg in PRESETS.items():
        print(f"{name:<{width}}  {cfg.description}")
    return 0


def _cmd_spectrum(args) -> int:
    cfg = with_overrides(preset(args.preset), seed=args.seed)
    s = cfg.scatterers()
    dirs = uniform_circle_directions(cfg.num_directions)
    F = synthesize_far_field(dirs, s, WaveConfig(cfg.wavenumber))
    rows = [("clean", np.linalg.svd(F.entries, compute_uv=False))]
    if cfg.noise.delta > 0:
        Fn = add_noise(F, NoiseSpec(cfg.noise.delta, cfg.noise.seed))
        rows.append((f"noisy (delta={cfg.noise.delta:g}, seed={cfg.noise.seed})",
                     np.linalg.svd(Fn.entries, compute_uv=False)))
    policy = cfg.projector.rank_policy(len(s))
    for label, sv in rows:
        print(f"{label}: rank by {policy.mode} = {policy.select(sv)}")
        for i, v in enumerate(sv, 1):
            ratio = f"{sv[i - 1] / sv[i]:.4g}" if i < len(sv) and sv[i] > 0 else "-"
            print(f"  {i:3d}  {v:.6e}  gap={ratio}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pointmusic", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write its outputs")
    run.add_argument("--config", help="YAML run configuration")
    run.add_argument("--preset", help="named preset (see list-presets)")
    run.add_argument("--output-dir")
    run.add_argument("--seed", type=int, help="override the noise seed")
    run.add_argument("--workers", type=int, default=1, help="threads for the grid scan")
    run.set_defaults(func=_cmd_run)

    lst = sub.add_parser("list-presets", help="list named presets")
    lst.set_defaults(func=_cmd_list)

    spec = sub.add_parser("spectrum", help="print singular values of F for a preset")
    spec.add_argument("--preset", required=True)
    spec.add_argument("--seed", type=int)
    spec.set_defaults(func=_cmd_spectrum)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (PointMusicError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
