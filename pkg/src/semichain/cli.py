"""Experiment runner CLI.

Subcommands: simulate, oracle, geometry, motzkin, scan, plot,
table-dump.  Every experiment takes a JSON config file (validated
before any work starts), a root seed, and an output directory; the
JSONL summary embeds the verbatim config, its digest, the RNG algorithm
tag, and wall time.  Long simulations checkpoint every
`checkpoint_every` layers and `--resume` continues bit-exactly.
Exit codes: 0 success, 2 invalid config, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import engine, experiments, gates, oracle
from .models import MODELS, get_model
from .oracle import BudgetExceeded
from .rng import SplitMix64, stream_seed

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_BUDGET = 3


class InvalidConfig(Exception):
    pass


class ResumeMismatch(Exception):
    pass


_SCHEMAS = {
    "simulate": {
        "model": (str, True),
        "word": (str, True),
        "max_layers": (int, True),
        "window": (int, False),
        "fraction": (float, False),
        "replicas": (int, False),
        "irreversible": (bool, False),
        "checkpoint_every": (int, False),
    },
    "oracle": {
        "model": (str, True),
        "L": (int, True),
        "budget": (int, False),
        "markov_sector": (str, False),
        "fragile": (bool, False),
    },
    "geometry": {
        "mode": (str, True),  # histograms | identity-fraction | growth
        "L_values": (list, False),
        "samples": (int, False),
        "conditioned": (bool, False),
        "L_max": (int, False),
    },
    "motzkin": {
        "word": (str, False),
        "region": (list, False),
        "extra": (int, False),
        "cap": (int, False),
    },
    "scan": {
        "kind": (str, True),  # jamming-scan | itbs-el-scan | wlarge-scan | random-wave-scan | tree-walk | conservation
        "n": (int, False),
        "n_values": (list, False),
        "L_values": (list, False),
        "seeds": (int, False),
        "runs": (int, False),
        "max_layers": (int, False),
        "patience": (int, False),
        "window": (int, False),
        "budget_factor": (int, False),
        "steps": (int, False),
        "pairs": (int, False),
        "moves": (int, False),
        "L": (int, False),
    },
}


def load_config(path, command):
    try:
        raw = Path(path).read_text()
        cfg = json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfig(f"cannot read config: {exc}") from exc
    schema = _SCHEMAS[command]
    for key, (typ, required) in schema.items():
        if key not in cfg:
            if required:
                raise InvalidConfig(f"missing required key {key!r} for {command!r}")
            continue
        if typ is float and isinstance(cfg[key], int):
            cfg[key] = float(cfg[key])
        if not isinstance(cfg[key], typ):
            raise InvalidConfig(f"key {key!r} must be {typ.__name__}")
    unknown = set(cfg) - set(schema)
    if unknown:
        raise InvalidConfig(f"unknown keys {sorted(unknown)} for {command!r}")
    digest = hashlib.sha256(raw.encode()).hexdigest()
    return cfg, raw, digest


# ---------------------------------------------------------------------------
# simulate (with checkpoint/resume)


def _simulate(cfg, seed, out, resume):
    model = get_model(cfg["model"])
    cells0 = model.parse(cfg["word"])
    if cfg.get("irreversible"):
        rng = SplitMix64(stream_seed(seed, 0))
        run = engine.run_irreversible(model, cells0, rng, max_layers=cfg["max_layers"])
        return {"thermalized": run.thermalized, "t_th": run.t_th,
                "n_abs_c": run.n_abs_c.tolist(), "times": run.times.tolist()}
    if cfg.get("window"):
        replicas = cfg.get("replicas", 1)
        if replicas > 1:
            run_seeds = [stream_seed(stream_seed(seed, 0), m) for m in range(replicas)]
            run = engine.run_contrast_ensemble(
                model, cells0, run_seeds, max_layers=cfg["max_layers"],
                window=cfg["window"], fraction=cfg.get("fraction", 0.1))
        else:
            run = engine.run_contrast(
                model, cells0, SplitMix64(stream_seed(seed, 0)),
                max_layers=cfg["max_layers"], window=cfg["window"],
                fraction=cfg.get("fraction", 0.1))
        return {"t_th": run.t_th, "censored": run.censored,
                "times": run.times.tolist(), "contrast": run.contrast.tolist()}
    # plain evolution with optional checkpointing (bit-exact resume)
    table = gates.build_table(model)
    every = cfg.get("checkpoint_every", 0)
    ckpt_path = None
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        ckpt_path = Path(out) / "checkpoint.json"
    digest = hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()
    cells = np.array(cells0, dtype=np.uint8, copy=True)
    layer = 0
    rng = SplitMix64(stream_seed(seed, 0))
    if resume:
        if not (ckpt_path and ckpt_path.exists()):
            raise InvalidConfig("--resume given but no checkpoint found")
        payload = engine.load_checkpoint(ckpt_path)
        if payload["extra"].get("config_sha256") != digest:
            raise ResumeMismatch("checkpoint belongs to a different config")
        cells = np.array(payload["cells"], dtype=np.uint8)
        layer = payload["layer_count"]
        rng = SplitMix64(payload["rng_state"])
    while layer < cfg["max_layers"]:
        step = cfg["max_layers"] - layer if not every else min(every, cfg["max_layers"] - layer)
        done, _ = engine._advance(cells, table, layer, step, rng)
        layer += done
        if every and ckpt_path:
            engine.save_checkpoint(
                ckpt_path,
                engine.checkpoint_payload(model, cells, layer, rng,
                                          extra={"config_sha256": digest}),
            )
    return {"final_word": model.format(cells), "layers": layer, "rng_state": rng.state}


def _oracle(cfg, seed, out):
    model = get_model(cfg["model"])
    budget = cfg.get("budget", 2_000_000)
    part = oracle.enumerate_sectors(model, cfg["L"], budget=budget)
    summary = {
        "L": cfg["L"],
        "evaluator_sectors": len(part.by_evaluator),
        "move_components": len(part.by_moves),
        "largest_sector": max(len(v) for v in part.by_evaluator.values()),
    }
    if cfg.get("fragile"):
        reports = oracle.detect_fragile(model, cfg["L"], budget=budget)
        summary["fragile_sectors"] = [
            {"label": repr(r.evaluator_label), "components": r.component_sizes,
             "min_restoring_length": r.min_restoring_length}
            for r in reports
        ]
    if cfg.get("markov_sector"):
        words = part.by_evaluator[model.sector_label(model.parse(cfg["markov_sector"]))]
        ana = oracle.sector_markov_analysis(model, words)
        summary["markov"] = {
            "sector_size": ana.sector_size, "lambda2": ana.lambda2,
            "t_rel": ana.t_rel, "t_mix_cycles": ana.t_mix_cycles,
        }
    return summary


def _geometry(cfg, seed, out):
    mode = cfg["mode"]
    if mode == "histograms":
        return experiments.geometry_scan(
            tuple(cfg.get("L_values", (100, 200, 400))),
            cfg.get("samples", 20_000), seed,
            conditioned=cfg.get("conditioned", False),
            out_csv=Path(out) / "geometry.csv" if out else None,
        )
    if mode == "identity-fraction":
        return experiments.identity_fraction_scan(
            tuple(cfg.get("L_values", (20, 30, 40, 50, 60, 70, 80))),
            cfg.get("samples", 1_000_000), seed,
            out_csv=Path(out) / "identity_fraction.csv" if out else None,
        )
    if mode == "growth":
        return experiments.growth_scan(cfg.get("L_max", 9))
    raise InvalidConfig(f"unknown geometry mode {mode!r}")


def _scan(cfg, seed, out, workers=1):
    kind = cfg["kind"]
    out_path = Path(out) if out else None
    if kind == "jamming-scan":
        return experiments.jamming_scan(
            n=cfg.get("n", 10),
            L_values=tuple(cfg.get("L_values", (44, 46, 48, 50, 52, 54, 56, 58, 60))),
            seeds=cfg.get("seeds", 20),
            max_layers=cfg.get("max_layers", 100_000_000),
            window=cfg.get("window", 8192),
            root_seed=seed,
            out_csv=out_path / "jamming.csv" if out_path else None,
            workers=workers,
        )
    if kind == "itbs-el-scan":
        return experiments.el_scan(
            n_values=tuple(cfg.get("n_values", (1, 2, 3, 4))),
            runs=cfg.get("runs", 1000),
            max_layers=cfg.get("max_layers", 2_000_000),
            patience=cfg.get("patience", 100_000),
            root_seed=seed,
            out_csv=out_path / "el_scan.csv" if out_path else None,
        )
    if kind == "wlarge-scan":
        return experiments.wlarge_tth_scan(
            n_values=tuple(cfg.get("n_values", (4, 5, 6, 7, 8))),
            seeds=cfg.get("seeds", 20),
            root_seed=seed,
            budget_factor=cfg.get("budget_factor", 4000),
            out_csv=out_path / "wlarge.csv" if out_path else None,
        )
    if kind == "random-wave-scan":
        return experiments.random_wave_scan(
            n_values=tuple(cfg.get("n_values", (3, 6))),
            seeds=cfg.get("seeds", 50),
            window=cfg.get("window", 100),
            root_seed=seed,
            out_csv=out_path / "waves.csv" if out_path else None,
        )
    if kind == "tree-walk":
        return experiments.tree_walk_stats(
            steps=cfg.get("steps", 200), pairs=cfg.get("pairs", 600),
            freq_steps=cfg.get("freq_steps", 1_000_000) if "freq_steps" in cfg else 1_000_000,
            seed=seed,
        )
    if kind == "conservation":
        return experiments.conservation_suite(
            moves_per_model=cfg.get("moves", 1_000_000), L=cfg.get("L", 12), seed=seed,
        )
    raise InvalidConfig(f"unknown scan kind {kind!r}")


def _motzkin(cfg, seed, out):
    return experiments.chiral_witness(
        cfg.get("word", experiments.WITNESS_WORD),
        tuple(cfg.get("region", experiments.WITNESS_REGION)),
        cfg.get("extra", experiments.WITNESS_EXTRA),
        cfg.get("cap", 400_000),
    )


_DISPATCH = {
    "simulate": None,  # handled separately (resume flag)
    "oracle": _oracle,
    "geometry": _geometry,
    "motzkin": _motzkin,
    "scan": _scan,
}


def cmd_run(args) -> int:
    command = args.command
    try:
        if args.config:
            cfg, raw, digest = load_config(args.config, command)
        else:
            required = [k for k, (_t, req) in _SCHEMAS[command].items() if req]
            if required:
                raise InvalidConfig(f"{command!r} requires a config with {required}")
            cfg, raw, digest = {}, "{}", hashlib.sha256(b"{}").hexdigest()
    except InvalidConfig as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    started = time.time()
    try:
        if command == "simulate":
            result = _simulate(cfg, args.seed, args.out, args.resume)
        elif command == "scan":
            result = _scan(cfg, args.seed, args.out, workers=args.threads)
        else:
            result = _DISPATCH[command](cfg, args.seed, args.out)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidConfig, ResumeMismatch) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    summary = experiments.run_summary(command, cfg, result, started, digest)
    summary["config_verbatim"] = raw
    if args.out:
        path = experiments.write_summary(args.out, command, summary)
        print(path)
    else:
        print(json.dumps(summary, indent=2, default=str))
    return EXIT_OK


def cmd_table_dump(args) -> int:
    model = get_model(args.model)
    table = gates.build_table(model)
    gates.dump_csv(table, args.out_file)
    print(args.out_file)
    return EXIT_OK


def cmd_plot(args) -> int:
    from . import plots

    try:
        out = plots.emit(args.kind, args.csv, args.out_file)
    except plots.SchemaMismatch as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semichain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for command in sorted(_SCHEMAS):
        p = sub.add_parser(command, help=f"run a {command} experiment")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=0, help="root seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--resume", action="store_true", help="resume from checkpoint")
        p.add_argument("--threads", type=int, default=1, help="worker processes")
        p.set_defaults(func=cmd_run)

    p = sub.add_parser("table-dump", help="dump a model's window classes as CSV")
    p.add_argument("model", choices=sorted(MODELS))
    p.add_argument("out_file")
    p.set_defaults(func=cmd_table_dump)

    p = sub.add_parser("plot", help="render figure-ready CSV data")
    p.add_argument("kind", choices=["identity-fraction", "tth-scaling", "jamming"])
    p.add_argument("csv")
    p.add_argument("out_file")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
