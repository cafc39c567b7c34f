"""Command-line entry point.

    horolab <experiment> [--preset NAME | --group FILE] [--config FILE]
            [--k INT] [--t LIST] [--r LIST] [--frames INT] [--r0 FLOAT]
            [--resolution INT] [--seed U64] [--out DIR] [--threads INT]
            [--no-figures]

Precedence: defaults < config file < command-line flags; the environment
variable HOROLAB_SEED (decimal u64) overrides the seed only.  Artifacts
per run: `<experiment>.csv` (flat results table), `<experiment>.png`
(figure rendered from the same rows), and `<experiment>_manifest.json`
(config echo, config hash, library versions, wall time).  Exit codes:
0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, HorolabError
from .experiments import CSV_COLUMNS, EXPERIMENTS, ExperimentConfig, run_experiment
from .schottky import PRESET_NAMES, SchottkyData, preset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parse_number(token: str) -> float:
    """Float literal, with `eN` / `e-N` shorthand for exp(N)."""
    token = token.strip()
    if token and token[0] in "eE":
        try:
            return float(np.exp(float(token[1:])))
        except ValueError:
            pass
    return float(token)


def _parse_list(text: str) -> tuple:
    if not text.strip():
        return ()
    return tuple(_parse_number(tok) for tok in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="horolab",
        description="Numerical experiments on horocycle-flow equidistribution.")
    p.add_argument("experiment", help="registered experiment name")
    p.add_argument("--preset", default=None,
                   help=f"named group preset ({', '.join(PRESET_NAMES)})")
    p.add_argument("--group", default=None,
                   help="path to a JSON group description")
    p.add_argument("--config", default=None,
                   help="JSON config file; flags override its fields")
    p.add_argument("--k", type=int, default=None, help="word-length cutoff")
    p.add_argument("--t", default=None,
                   help="comma list of times (e.g. 2,4,6)")
    p.add_argument("--r", default=None,
                   help="comma list of radii; eN means exp(N) (e.g. e6)")
    p.add_argument("--frames", type=int, default=None,
                   help="ensemble / sample size where applicable")
    p.add_argument("--r0", type=float, default=None, help="annulus width")
    p.add_argument("--resolution", type=int, default=None,
                   help="integration grid size where applicable")
    p.add_argument("--seed", type=int, default=None, help="u64 RNG seed")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--threads", type=int, default=None, help="worker threads")
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering")
    p.add_argument("--version", action="version",
                   version=f"horolab {__version__}")
    return p


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    return doc


def _resolve_group(preset_name, group_file, config_doc):
    if preset_name and group_file:
        raise ConfigError("give either --preset or --group, not both")
    if group_file:
        try:
            with open(group_file) as fh:
                return SchottkyData.from_json(fh.read()), Path(group_file).stem
        except OSError as exc:
            raise ConfigError(f"cannot read group file: {exc}") from exc
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad group description: {exc}") from exc
    if preset_name is None and config_doc.get("group"):
        try:
            return SchottkyData.from_dict(config_doc["group"]), \
                config_doc.get("group_id", "custom")
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad group in config: {exc}") from exc
    name = preset_name or config_doc.get("preset", "default")
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}")
    return preset(name), name


def make_config(argv) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    doc = _load_config_file(args.config) if args.config else {}

    if args.experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {args.experiment!r}; choose from "
            + ", ".join(sorted(EXPERIMENTS)))

    group, group_id = _resolve_group(args.preset, args.group, doc)

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return doc.get(key, default)

    t_values = args.t if args.t is not None else doc.get("t", "")
    r_values = args.r if args.r is not None else doc.get("r", "")
    if isinstance(t_values, str):
        t_values = _parse_list(t_values)
    if isinstance(r_values, str):
        r_values = _parse_list(r_values)

    seed = pick(args.seed, "seed", 0)
    env_seed = os.environ.get("HOROLAB_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError("HOROLAB_SEED must be a decimal integer") from exc

    try:
        cfg = ExperimentConfig(
            experiment=args.experiment,
            group=group,
            group_id=group_id,
            k=int(pick(args.k, "k", 12)),
            t_values=tuple(float(t) for t in t_values),
            r_values=tuple(float(r) for r in r_values),
            seed=int(seed),
            out=str(pick(args.out, "out", "horolab-out")),
            threads=int(pick(args.threads, "threads", 1)),
            frames=int(pick(args.frames, "frames", 0)),
            r0=float(pick(args.r0, "r0", 1.0)),
            resolution=int(pick(args.resolution, "resolution", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad configuration value: {exc}") from exc
    cfg.validate()
    return cfg, bool(args.no_figures)


def _format_cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def write_csv(rows, path):
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(row[c]) for c in CSV_COLUMNS) + "\n")


def write_manifest(cfg: ExperimentConfig, path, wall_time: float,
                   csv_path, fig_path):
    doc = {
        "experiment": cfg.experiment,
        "group_id": cfg.group_id,
        "group": cfg.group.to_dict(),
        "k": cfg.k,
        "t": list(cfg.t_values),
        "r": list(cfg.r_values),
        "seed": cfg.seed,
        "frames": cfg.frames,
        "r0": cfg.r0,
        "resolution": cfg.resolution,
        "threads": cfg.threads,
        "config_hash": cfg.hash(),
        "versions": {
            "horolab": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": round(wall_time, 3),
        "csv": str(csv_path),
        "figure": str(fig_path) if fig_path else None,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg, no_figures = make_config(argv)
    except ConfigError as exc:
        print(f"horolab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse errors carry code 2 already
        return int(exc.code or 0)

    start = time.time()
    try:
        rows = run_experiment(cfg)
    except ConfigError as exc:
        print(f"horolab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HorolabError as exc:
        print(f"horolab: numerical failure: "
              f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    wall = time.time() - start

    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{cfg.experiment}.csv"
    write_csv(rows, csv_path)
    fig_path = None
    if not no_figures:
        from .plotting import render_results
        fig_path = out_dir / f"{cfg.experiment}.png"
        render_results(cfg.experiment, rows, fig_path)
    manifest_path = out_dir / f"{cfg.experiment}_manifest.json"
    write_manifest(cfg, manifest_path, wall, csv_path, fig_path)
    print(f"{cfg.experiment}: {len(rows)} rows -> {csv_path} "
          f"({wall:.1f}s)")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
