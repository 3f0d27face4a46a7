"""Experiment configuration files (JSON).

A config names one game, a list of methods, how starting points are drawn,
and where outputs go.  Minimal example::

    {
      "name": "demo",
      "game": {"name": "public_goods", "params": {"b": 1, "c": 1.5}},
      "defaults": {"gamma": 0.01, "max_steps": 100, "projection": [0, 1]},
      "methods": [{"method": "SimulCo"}, {"method": "AgA", "lambda_mag": 1}],
      "init": {"kind": "uniform", "low": 0, "high": 1},
      "runs": 50,
      "seed": 2024
    }

``defaults`` is merged under every method entry.  A method entry may carry
a ``label`` (defaults to the method name) and ``svo_alpha``, which makes
that method descend on the SVO-shaped game while rewards are still
reported on the base game.
"""

from __future__ import annotations

import dataclasses
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..adjust import MethodConfig
from ..exceptions import ConfigError
from ..games import GAME_BUILDERS, GameDefinition, make_game

OUTPUT_ENV = "GAMEGRAD_OUTPUT_DIR"

_TOP_KEYS = {"name", "description", "game", "defaults", "methods", "init", "runs", "seed", "output_dir", "plot"}
_METHOD_KEYS = {"method", "label", "lambda_mag", "gamma", "epsilon", "max_steps", "stop_tol", "projection", "svo_alpha"}
_SURFACE_RE = re.compile(r"^(collective|player[1-9][0-9]*)$")


@dataclass(frozen=True)
class MethodSpec:
    label: str
    config: MethodConfig
    svo_alpha: Optional[float] = None


@dataclass(frozen=True)
class InitSpec:
    kind: str  # "fixed" | "uniform" | "grid"
    point: Optional[tuple] = None
    low: Any = None
    high: Any = None
    num: int = 0

    def points(self, dim: int, runs: int, seed: int) -> np.ndarray:
        """Starting point of every run, in run-index order."""
        if self.kind == "fixed":
            return np.tile(np.asarray(self.point, dtype=float), (runs, 1))
        lo = np.broadcast_to(np.asarray(self.low, dtype=float), (dim,))
        hi = np.broadcast_to(np.asarray(self.high, dtype=float), (dim,))
        if self.kind == "grid":
            axes = [np.linspace(lo[k], hi[k], self.num) for k in range(dim)]
            mesh = np.meshgrid(*axes, indexing="ij")
            return np.stack([m.ravel() for m in mesh], axis=1)
        # each run draws from its own substream: adding runs never reshuffles earlier ones
        out = np.empty((runs, dim))
        for k in range(runs):
            rng = np.random.Generator(np.random.PCG64(seed ^ k))
            out[k] = rng.uniform(lo, hi)
        return out


@dataclass(frozen=True)
class PlotSpec:
    bounds: tuple
    resolution: tuple = (100, 100)
    surfaces: tuple = ("player1",)
    methods: Optional[tuple] = None
    runs: tuple = (0,)
    mark_every: int = 10


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    game_name: str
    game_params: dict
    methods: tuple
    init: InitSpec
    runs: int
    seed: int
    output_dir: Optional[str] = None
    plot: Optional[PlotSpec] = None
    source: Optional[str] = field(default=None, compare=False)

    def build_game(self, svo_alpha: Optional[float] = None) -> GameDefinition:
        return make_game(self.game_name, self.game_params, svo_alpha)

    def start_points(self) -> np.ndarray:
        return self.init.points(self.build_game().dim, self.runs, self.seed)

    def resolve_output(self, override: Optional[str] = None) -> Path:
        if override:
            return Path(override)
        if self.output_dir:
            return Path(self.output_dir)
        return Path(os.environ.get(OUTPUT_ENV, "gamegrad-out")) / self.name

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return dataclasses.replace(self, seed=_check_seed(seed, None))

    def to_dict(self) -> dict:
        """Plain-data form; round-trips through :func:`config_from_dict`."""
        out = {
            "name": self.name,
            "game": {"name": self.game_name, "params": self.game_params},
            "methods": [
                {
                    "label": m.label,
                    "method": m.config.method.value,
                    "lambda_mag": m.config.lambda_mag,
                    "gamma": m.config.gamma,
                    "epsilon": m.config.epsilon,
                    "max_steps": m.config.max_steps,
                    "stop_tol": m.config.stop_tol,
                    "projection": _jsonable(m.config.projection),
                    "svo_alpha": m.svo_alpha,
                }
                for m in self.methods
            ],
            "init": {"kind": self.init.kind},
            "runs": self.runs,
            "seed": self.seed,
        }
        if self.init.kind == "fixed":
            out["init"]["point"] = list(self.init.point)
        else:
            out["init"].update(low=_jsonable(self.init.low), high=_jsonable(self.init.high))
            if self.init.kind == "grid":
                out["init"]["num"] = self.init.num
        if self.output_dir:
            out["output_dir"] = self.output_dir
        return out


def _jsonable(x):
    if x is None:
        return None
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    return float(x)


def _line_of(text: Optional[str], key: str) -> Optional[int]:
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _check_seed(seed, line):
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed must be an integer in [0, 2^64), got {seed!r}", line)
    return seed


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package, e.g. ``"toy_fig2"``."""
    path = Path(__file__).resolve().parent.parent / "configs" / f"{Path(name).stem}.json"
    if not path.exists():
        raise FileNotFoundError(f"no bundled config {name!r}; available: {bundled_names()}")
    return path


def bundled_names() -> list[str]:
    return sorted(p.stem for p in (Path(__file__).resolve().parent.parent / "configs").glob("*.json"))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from exc
    return config_from_dict(raw, text=text, source=str(path))


def config_from_dict(raw: dict, text: Optional[str] = None, source: Optional[str] = None) -> ExperimentConfig:
    """Validate a parsed config.  ``text`` is only used to report line numbers."""

    def fail(msg, key):
        raise ConfigError(msg, _line_of(text, key))

    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object", 1)
    unknown = sorted(set(raw) - _TOP_KEYS)
    if unknown:
        fail(f"unknown top-level keys {unknown}", unknown[0])

    game = raw.get("game")
    if not isinstance(game, dict) or "name" not in game:
        fail("'game' must be an object with a 'name'", "game")
    game_name = game["name"]
    if game_name not in GAME_BUILDERS:
        fail(f"unknown game {game_name!r}; choose from {sorted(GAME_BUILDERS)}", "game")
    game_params = game.get("params") or {}
    if not isinstance(game_params, dict):
        fail("'game.params' must be an object", "params")
    try:
        base = make_game(game_name, game_params)
    except (TypeError, ValueError) as exc:
        fail(f"bad game parameters: {exc}", "params")

    dim = base.dim
    defaults = raw.get("defaults") or {}
    if not isinstance(defaults, dict):
        fail("'defaults' must be an object", "defaults")
    entries = raw.get("methods")
    if not isinstance(entries, list) or not entries:
        fail("'methods' must be a non-empty list", "methods")
    methods = []
    for k, entry in enumerate(entries):
        if isinstance(entry, str):
            entry = {"method": entry}
        if not isinstance(entry, dict):
            fail(f"methods[{k}] must be an object or a method name", "methods")
        merged = {**defaults, **entry}
        unknown = set(merged) - _METHOD_KEYS
        if unknown:
            fail(f"methods[{k}]: unknown keys {sorted(unknown)}", sorted(unknown)[0])
        if "method" not in merged:
            fail(f"methods[{k}] has no 'method'", "methods")
        label = merged.pop("label", None)
        svo_alpha = merged.pop("svo_alpha", None)
        proj = merged.get("projection")
        if proj is not None:
            if not (isinstance(proj, list) and len(proj) == 2):
                fail(f"methods[{k}]: projection must be [lo, hi]", "projection")
            merged["projection"] = tuple(proj)
        try:
            mc = MethodConfig(**merged)
            if svo_alpha is not None:
                make_game(game_name, game_params, float(svo_alpha))
        except (TypeError, ValueError) as exc:
            fail(f"methods[{k}]: {exc}", "methods")
        methods.append(MethodSpec(label or mc.method.value, mc, None if svo_alpha is None else float(svo_alpha)))
    labels = [m.label for m in methods]
    if len(set(labels)) != len(labels):
        fail(f"method labels must be unique, got {labels}", "methods")

    init_raw = raw.get("init")
    if not isinstance(init_raw, dict) or init_raw.get("kind") not in ("fixed", "uniform", "grid"):
        fail("'init' must be an object with kind 'fixed', 'uniform' or 'grid'", "init")
    kind = init_raw["kind"]
    runs = raw.get("runs", 1)
    if isinstance(runs, bool) or not isinstance(runs, int) or runs < 1:
        fail(f"'runs' must be a positive integer, got {runs!r}", "runs")
    if kind == "fixed":
        point = init_raw.get("point")
        if not isinstance(point, list) or len(point) != dim:
            fail(f"init.point must list {dim} numbers", "point")
        init = InitSpec("fixed", point=tuple(float(x) for x in point))
    else:
        try:
            lo = np.broadcast_to(np.asarray(init_raw.get("low"), dtype=float), (dim,))
            hi = np.broadcast_to(np.asarray(init_raw.get("high"), dtype=float), (dim,))
        except (TypeError, ValueError):
            fail(f"init.low / init.high must be numbers or length-{dim} lists", "init")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo <= hi)):
            fail("init box needs finite bounds with low <= high", "init")
        num = 0
        if kind == "grid":
            num = init_raw.get("num")
            if isinstance(num, bool) or not isinstance(num, int) or num < 1:
                fail("init.num must be a positive integer", "num")
            n_points = num ** dim
            if "runs" in raw and runs != n_points:
                fail(f"grid init gives {n_points} points but runs={runs}", "runs")
            runs = n_points
        init = InitSpec(kind, low=init_raw["low"], high=init_raw["high"], num=num)

    seed = _check_seed(raw.get("seed", 0), _line_of(text, "seed"))

    plot = None
    if raw.get("plot") is not None:
        plot = _parse_plot(raw["plot"], base, labels, runs, fail)

    name = raw.get("name") or (Path(source).stem if source else "experiment")
    out_dir = raw.get("output_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        fail("'output_dir' must be a string", "output_dir")
    return ExperimentConfig(
        name=str(name),
        game_name=game_name,
        game_params=dict(game_params),
        methods=tuple(methods),
        init=init,
        runs=runs,
        seed=seed,
        output_dir=out_dir,
        plot=plot,
        source=source,
    )


def _parse_plot(p, game, labels, runs, fail) -> PlotSpec:
    if not isinstance(p, dict):
        fail("'plot' must be an object", "plot")
    if game.dim != 2:
        fail(f"contour plots need a 2-parameter game, this one has {game.dim}", "plot")
    bounds = p.get("bounds")
    try:
        b = np.asarray(bounds, dtype=float)
    except (TypeError, ValueError):
        b = None
    if b is None or b.shape != (2, 2) or not np.all(np.isfinite(b)):
        fail("plot.bounds must be [[x_lo, x_hi], [y_lo, y_hi]]", "bounds")
    if not (b[0, 0] < b[0, 1] and b[1, 0] < b[1, 1]):
        fail("plot.bounds must enclose a positive area", "bounds")
    res = p.get("resolution", [100, 100])
    if isinstance(res, int):
        res = [res, res]
    if not (isinstance(res, list) and len(res) == 2 and all(isinstance(r, int) and r >= 2 for r in res)):
        fail("plot.resolution must be >= 2 per axis", "resolution")
    surfaces = p.get("surfaces", ["player1"])
    if isinstance(surfaces, str):
        surfaces = [surfaces]
    for s in surfaces:
        if not isinstance(s, str) or not _SURFACE_RE.match(s):
            fail(f"unknown surface {s!r}; use 'collective' or 'playerN'", "surfaces")
        if s != "collective" and int(s[6:]) > game.n_players:
            fail(f"surface {s!r} but the game has {game.n_players} players", "surfaces")
    methods = p.get("methods")
    if methods is not None:
        missing = [m for m in methods if m not in labels]
        if missing:
            fail(f"plot.methods not in the method list: {missing}", "plot")
    plot_runs = p.get("runs", [0])
    if isinstance(plot_runs, int):
        plot_runs = [plot_runs]
    if not all(isinstance(r, int) and 0 <= r < runs for r in plot_runs):
        fail(f"plot.runs must be run indices below {runs}", "plot")
    mark = p.get("mark_every", 10)
    if not isinstance(mark, int) or mark < 1:
        fail("plot.mark_every must be a positive integer", "mark_every")
    return PlotSpec(
        bounds=tuple(tuple(float(v) for v in row) for row in b),
        resolution=tuple(res),
        surfaces=tuple(surfaces),
        methods=None if methods is None else tuple(methods),
        runs=tuple(plot_runs),
        mark_every=mark,
    )
