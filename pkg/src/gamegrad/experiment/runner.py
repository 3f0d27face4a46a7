"""Run every (method, run) pair of a config and write CSV / JSON outputs.

Layout of an output directory::

    <out>/<label>/run_000.csv     one trajectory per method and run
    <out>/summary.json            per-method aggregates

Runs are independent and may execute in worker processes; results are
collected and written in (method, run) index order, so ``jobs`` never
changes the bytes on disk.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..adjust import Trajectory, descend
from ..analysis import equality
from ..games import GameDefinition
from .config import ExperimentConfig, config_from_dict

logger = logging.getLogger(__name__)


def csv_header(game: GameDefinition) -> list[str]:
    return (
        ["step"]
        + [f"w_{k}" for k in range(game.dim)]
        + [f"r_{i + 1}" for i in range(game.n_players)]
        + ["loss_c", "dir_norm", "lambda_signed"]
    )


def _fmt(x) -> str:
    x = float(x)
    return repr(x) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


@dataclass
class RunResult:
    label: str
    run: int
    rows: list
    stop_reason: str
    error: Optional[str]
    final_w: list
    final_rewards: list
    steps: int


def _run_one(cfg_dict: dict, method_index: int, run: int, w0: list) -> RunResult:
    cfg = config_from_dict(cfg_dict)
    spec = cfg.methods[method_index]
    base = cfg.build_game()
    dynamics = cfg.build_game(spec.svo_alpha) if spec.svo_alpha is not None else base
    traj = descend(dynamics, w0, spec.config)
    rows = []
    for rec in traj.records:
        rewards = base.rewards(rec.w) if dynamics is not base and np.all(np.isfinite(rec.w)) else rec.rewards
        loss_c = base.collective_value(rec.w) if dynamics is not base and np.all(np.isfinite(rec.w)) else rec.loss_c
        rows.append(
            [str(rec.step)]
            + [_fmt(v) for v in rec.w]
            + [_fmt(v) for v in rewards]
            + [_fmt(loss_c), _fmt(rec.dir_norm), _fmt(rec.lambda_signed)]
        )
    last = _last_finite(traj)
    final_rewards = base.rewards(last) if last is not None else np.full(base.n_players, np.nan)
    return RunResult(
        label=spec.label,
        run=run,
        rows=rows,
        stop_reason=traj.stop_reason,
        error=traj.error,
        final_w=[float(v) for v in traj.final.w],
        final_rewards=[float(v) for v in final_rewards],
        steps=traj.steps,
    )


def _last_finite(traj: Trajectory):
    for rec in reversed(traj.records):
        if np.all(np.isfinite(rec.rewards)):
            return rec.w
    return None


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[Path] = None, jobs: int = 1) -> dict:
    """Execute all runs, write trajectory CSVs and ``summary.json``.

    Returns the summary dictionary (also written to disk).
    """
    out = Path(out_dir) if out_dir is not None else cfg.resolve_output()
    starts = cfg.start_points()
    base = cfg.build_game()
    cfg_dict = cfg.to_dict()
    tasks = [
        (cfg_dict, m, k, [float(v) for v in starts[k]])
        for m in range(len(cfg.methods))
        for k in range(cfg.runs)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, *zip(*tasks), chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_run_one(*t) for t in tasks]

    header = csv_header(base)
    for res in results:
        path = out / res.label / f"run_{res.run:03d}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(res.rows)
        path.write_text(buf.getvalue())

    summary = summarize(cfg, results)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(dumps(summary))
    logger.info("wrote %d trajectories to %s", len(results), out)
    return summary


def _clean(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _stats(values) -> dict:
    v = np.asarray([x for x in values if x is not None and math.isfinite(x)], dtype=float)
    if v.size == 0:
        return {"mean": None, "std": None, "count": 0}
    return {"mean": float(np.mean(v)), "std": float(np.std(v)), "count": int(v.size)}


def summarize(cfg: ExperimentConfig, results: list) -> dict:
    """Per-method aggregates over all runs (population standard deviation)."""
    base = cfg.build_game()
    methods = []
    for spec in cfg.methods:
        mine = [r for r in results if r.label == spec.label]
        rewards = np.array([r.final_rewards for r in mine], dtype=float)
        sw = rewards.sum(axis=1)
        eq = []
        for r in rewards:
            try:
                eq.append(equality(r)[1] if np.all(np.isfinite(r)) else None)
            except ZeroDivisionError:
                eq.append(None)
        reasons = {}
        for r in mine:
            reasons[r.stop_reason] = reasons.get(r.stop_reason, 0) + 1
        methods.append(
            {
                "label": spec.label,
                "method": spec.config.method.value,
                "lambda_mag": spec.config.lambda_mag,
                "gamma": spec.config.gamma,
                "max_steps": spec.config.max_steps,
                "svo_alpha": spec.svo_alpha,
                "runs": len(mine),
                "rewards": [_stats(rewards[:, i]) for i in range(base.n_players)],
                "SW": _stats(sw),
                "E": _stats(eq),
                "steps": _stats([float(r.steps) for r in mine]),
                "stop_reasons": dict(sorted(reasons.items())),
                "final_w": [r.final_w for r in mine],
                "errors": [{"run": r.run, "error": r.error} for r in mine if r.error],
            }
        )
    return {
        "experiment": cfg.name,
        "game": {"name": cfg.game_name, "params": cfg.game_params},
        "seed": cfg.seed,
        "runs": cfg.runs,
        "start_points": [[float(v) for v in w] for w in cfg.start_points()],
        "methods": methods,
    }


def read_trajectory_csv(path) -> dict:
    """Parse one trajectory CSV into ``{"w": (T, d) array, "rewards": (T, n), ...}``.

    Raises ValueError on a malformed file.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0]
    if header[:1] != ["step"] or header[-3:] != ["loss_c", "dir_norm", "lambda_signed"]:
        raise ValueError(f"{path}: unexpected header {header}")
    w_cols = [i for i, h in enumerate(header) if h.startswith("w_")]
    r_cols = [i for i, h in enumerate(header) if h.startswith("r_")]
    if not w_cols or not r_cols:
        raise ValueError(f"{path}: header lacks w_/r_ columns")
    if any(len(row) != len(header) for row in rows[1:]):
        raise ValueError(f"{path}: ragged rows")
    try:
        data = np.array([[float(x) for x in row] for row in rows[1:]], dtype=float).reshape(-1, len(header))
    except ValueError as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from exc
    return {
        "step": data[:, 0].astype(int),
        "w": data[:, w_cols],
        "rewards": data[:, r_cols],
        "loss_c": data[:, -3],
        "dir_norm": data[:, -2],
        "lambda_signed": data[:, -1],
    }
