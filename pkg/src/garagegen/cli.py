"""Command-line entry point.

Exit status: 0 on success, 1 on validation or generation failure, 2 on usage
errors (argparse's own convention).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import config as config_mod
from .config import RunConfig
from .evaluator import EvalCoefficients, evaluate, feasibility
from .exporters import (
    CURVE_HEADER,
    GarageSpec,
    curve_row,
    evaluation_json,
    export_scene,
    format_matrix,
    read_matrix,
    render_ascii,
    render_svg,
    write_archive,
    write_matrix,
)
from .grid import CellCode, GridError
from .sarsa import QTable, RunArtifacts, train
from .static_gen import GenerationError, generate_static, validate_static
from .tiler import tile_map

log = logging.getLogger("garagegen")

OUTPUT_ENV = "GARAGEGEN_OUT"


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config value (repeatable)")
    p.add_argument("--seed", type=int, help="seed for both static generation and training")
    p.add_argument("--coeffs", help="evaluation coefficients k1,k2,k3 (default 1,-5,-1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="garagegen", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="run the static pipeline and write a matrix file")
    _common(p)
    p.add_argument("-o", "--output", help="matrix file (default: stdout)")

    p = sub.add_parser("train", help="Sarsa lane generation on a garage")
    _common(p)
    p.add_argument("--garage", help="matrix file to train on (default: generate from config)")
    p.add_argument("--episodes", type=int)
    p.add_argument("--archive-k", type=int)
    p.add_argument("--out", help=f"run directory (default: ${OUTPUT_ENV} or ./runs)")
    p.add_argument("--runs", type=int, default=1, help="independent runs with seeds seed..seed+N-1")
    p.add_argument("--resume-qtable", help="warm-start from a Q-table dump")
    p.add_argument("--log-steps", action="store_true", help="write per-step reward audit to steps.jsonl")

    p = sub.add_parser("evaluate", help="score a matrix file")
    _common(p)
    p.add_argument("matrix")
    p.add_argument("-o", "--output")

    p = sub.add_parser("render", help="draw a matrix as ASCII or SVG")
    _common(p)
    p.add_argument("matrix")
    p.add_argument("--format", choices=("ascii", "svg"), default="ascii")
    p.add_argument("-o", "--output")

    p = sub.add_parser("export", help="write a scene JSON document")
    _common(p)
    p.add_argument("matrix")
    p.add_argument("-o", "--output")

    p = sub.add_parser("validate", help="static constraint and feasibility checks")
    _common(p)
    p.add_argument("matrix")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = config_mod.load(args.config, args.overrides)
    if args.seed is not None:
        cfg.static.seed = args.seed
        cfg.sarsa.seed = args.seed
    if args.coeffs:
        cfg.coefficients = EvalCoefficients.parse(args.coeffs)
    if getattr(args, "episodes", None) is not None:
        cfg.sarsa = dataclasses.replace(cfg.sarsa, episodes=args.episodes)
    if getattr(args, "archive_k", None) is not None:
        cfg.sarsa = dataclasses.replace(cfg.sarsa, archive_k=args.archive_k)
    if getattr(args, "log_steps", False):
        cfg.verbose = True
    return cfg


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _scene_text(S: np.ndarray, cfg: RunConfig, seed: int) -> str:
    R, C = cfg.dimensions(*S.shape)
    t = tile_map(S)
    e = evaluate(S, cfg.coefficients)
    return export_scene(GarageSpec(S, R, C), t, e, seed=seed, config_hash=cfg.hash())


def execute_run(cfg: RunConfig, out_dir: Path, garage: np.ndarray | None = None,
                qtable: QTable | None = None) -> RunArtifacts:
    """One full training run written to ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    if garage is None:
        garage, report = generate_static(cfg.static)
        log.info("generated %dx%d garage (%d retries)", *garage.shape, report.retries_used)
    (out_dir / "config.ini").write_text(cfg.to_ini())
    write_matrix(out_dir / "garage.txt", garage)

    steps = open(out_dir / "steps.jsonl", "w") if cfg.verbose else None
    ckpt_dir = out_dir / "checkpoints"

    def audit(episode, rec):
        steps.write(json.dumps({"episode": episode, **rec.to_dict()}) + "\n")

    def checkpoint(n, q):
        ckpt_dir.mkdir(exist_ok=True)
        q.dump(ckpt_dir / f"qtable_{n:06d}.tsv")

    with open(out_dir / "curve.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CURVE_HEADER)

        def on_episode(row):
            wr.writerow(curve_row(row))
            if row.episode % 500 == 0:
                fh.flush()
                log.info("episode %d return %.3f score %.3f eps %.4f", row.episode, row.ret, row.score, row.epsilon)

        try:
            run = train(
                garage, cfg.reward, cfg.sarsa, cfg.coefficients,
                qtable=qtable, on_episode=on_episode,
                audit=audit if steps else None, checkpoint=checkpoint,
            )
        finally:
            if steps:
                steps.close()

    write_archive(out_dir / "archive", run.archive)
    run.qtable.dump(out_dir / "qtable.tsv")
    (out_dir / "best_scene.json").write_text(_scene_text(run.best.matrix, cfg, cfg.sarsa.seed))
    return run


def _run_one(payload):
    cfg, out_dir, garage, qpath = payload
    q = QTable.load(qpath) if qpath else None
    run = execute_run(cfg, Path(out_dir), garage, q)
    return str(out_dir), run.best.score


def cmd_train(args, cfg: RunConfig) -> int:
    out = Path(args.out or cfg.output or os.environ.get(OUTPUT_ENV, "runs"))
    garage = read_matrix(args.garage) if args.garage else None
    if args.runs < 1:
        print("garagegen: error: --runs must be >= 1", file=sys.stderr)
        return 2
    if args.runs == 1:
        payloads = [(cfg, out, garage, args.resume_qtable)]
    else:
        payloads = []
        for i in range(args.runs):
            c = dataclasses.replace(
                cfg,
                static=dataclasses.replace(cfg.static, seed=cfg.static.seed + i),
                sarsa=dataclasses.replace(cfg.sarsa, seed=cfg.sarsa.seed + i),
            )
            payloads.append((c, out / f"run_{i:03d}", garage, args.resume_qtable))
    if len(payloads) == 1:
        results = [_run_one(payloads[0])]
    else:
        with ProcessPoolExecutor(max_workers=min(len(payloads), os.cpu_count() or 1)) as ex:
            results = list(ex.map(_run_one, payloads))
    for path, score in results:
        print(f"{path}\tbest_score={score!r}")
    return 0


def cmd_validate(args, cfg: RunConfig) -> int:
    S = read_matrix(args.matrix)
    static_cfg = cfg.static if args.config or args.overrides else None
    report = validate_static(S, static_cfg)
    has_lanes = bool((S == CellCode.LANE).any())
    infeasible = feasibility(S) if has_lanes else []
    out = {
        "static": {
            "ok": report.ok,
            "contour_cell_count": report.contour_cell_count,
            "entrances": [list(p) for p in report.entrance_coords],
            "exits": [list(p) for p in report.exit_coords],
            "obstacles": [list(p) for p in report.obstacle_coords],
            "violations": [
                {"code": v.code, "coords": [list(p) for p in v.coords], "message": v.message}
                for v in report.violations
            ],
        },
        "feasibility": {
            "checked": has_lanes,
            "infeasible": [{"row": s.coord.row, "col": s.coord.col, "reasons": list(s.reasons)} for s in infeasible],
        },
    }
    print(json.dumps(out, indent=1))
    return 0 if report.ok and not infeasible else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args)
    except (KeyError, ValueError, OSError) as exc:
        parser.error(f"bad configuration: {exc}")

    try:
        if args.command == "generate":
            S, report = generate_static(cfg.static)
            _emit(format_matrix(S), args.output)
            print(render_ascii(S), file=sys.stderr)
            log.info("retries used: %d", report.retries_used)
            return 0
        if args.command == "train":
            return cmd_train(args, cfg)
        if args.command == "validate":
            return cmd_validate(args, cfg)

        S = read_matrix(args.matrix)
        if args.command == "evaluate":
            _emit(evaluation_json(evaluate(S, cfg.coefficients), S), args.output)
        elif args.command == "render":
            if args.format == "ascii":
                _emit(render_ascii(S) + "\n", args.output)
            else:
                R, C = cfg.dimensions(*S.shape)
                _emit(render_svg(tile_map(S), R, C), args.output)
        elif args.command == "export":
            _emit(_scene_text(S, cfg, cfg.static.seed), args.output)
        return 0
    except (GenerationError, GridError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
