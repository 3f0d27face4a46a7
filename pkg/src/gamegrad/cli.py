"""Command line front end.

    gamegrad run <config> [--out DIR] [--seed N] [--jobs N]
    gamegrad plot <config> [--out DIR] [--seed N] [--jobs N]
    gamegrad table1 <config> [--out DIR] [--seed N] [--jobs N]

Exit status: 0 on success, 1 when a run hit an evaluation error, 2 on a
bad config or malformed input file.  The default output directory is
``$GAMEGRAD_OUTPUT_DIR/<experiment name>`` unless the config or ``--out``
says otherwise.  ``<config>`` may also name a bundled config
(``publicgoods_table1``, ``toy_fig2``, ``toy_fig4``).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .exceptions import ConfigError
from .experiment.config import ExperimentConfig, bundled_config, bundled_names, load_config
from .experiment.plotting import render_svg, write_svg
from .experiment.runner import dumps, read_trajectory_csv, run_experiment

logger = logging.getLogger("gamegrad")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


def _load(args) -> ExperimentConfig:
    path = args.config
    if not path.exists() and path.stem in bundled_names() and path.parent == Path("."):
        path = bundled_config(path.stem)
    cfg = load_config(path)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _report_errors(summary) -> int:
    status = EXIT_OK
    for m in summary["methods"]:
        for err in m["errors"]:
            print(f"error: method {m['label']} run {err['run']}: {err['error']}", file=sys.stderr)
            status = EXIT_RUNTIME
    return status


def cmd_run(args) -> int:
    cfg = _load(args)
    out = cfg.resolve_output(args.out)
    summary = run_experiment(cfg, out, jobs=args.jobs)
    print(f"wrote {out}")
    return _report_errors(summary)


def cmd_plot(args) -> int:
    cfg = _load(args)
    if cfg.plot is None:
        raise ConfigError("config has no 'plot' section")
    out = cfg.resolve_output(args.out)
    status = EXIT_OK
    labels = cfg.plot.methods or tuple(m.label for m in cfg.methods)
    csvs = [out / label / f"run_{k:03d}.csv" for label in labels for k in cfg.plot.runs]
    if not all(p.exists() for p in csvs):
        status = _report_errors(run_experiment(cfg, out, jobs=args.jobs))
    trajectories = []
    for label in labels:
        for k in cfg.plot.runs:
            data = read_trajectory_csv(out / label / f"run_{k:03d}.csv")
            name = label if len(cfg.plot.runs) == 1 else f"{label} #{k}"
            trajectories.append((name, data["w"]))
    game = cfg.build_game()
    for surface in cfg.plot.surfaces:
        path = write_svg(out / "plots" / f"{surface}.svg", render_svg(game, cfg.plot, surface, trajectories))
        print(f"wrote {path}")
    return status


def format_table1(summary) -> str:
    methods = summary["methods"]
    n = len(methods[0]["rewards"])
    names = [m["label"] for m in methods]
    width = max(9, *(len(x) + 2 for x in names))
    lines = ["Metric".ljust(8) + "".join(x.rjust(width) for x in names)]

    def cell(stat):
        return ("nan" if stat["mean"] is None else f"{stat['mean']:.3f}").rjust(width)

    for i in range(n):
        lines.append(f"r_{i + 1}".ljust(8) + "".join(cell(m["rewards"][i]) for m in methods))
    lines.append("SW".ljust(8) + "".join(cell(m["SW"]) for m in methods))
    lines.append("E".ljust(8) + "".join(cell(m["E"]) for m in methods))
    return "\n".join(lines)


def table1_rows(summary) -> dict:
    rows = {}
    for m in summary["methods"]:
        entry = {f"r_{i + 1}": s["mean"] for i, s in enumerate(m["rewards"])}
        entry.update(SW=m["SW"]["mean"], E=m["E"]["mean"], SW_std=m["SW"]["std"], E_std=m["E"]["std"])
        rows[m["label"]] = entry
    return {"experiment": summary["experiment"], "seed": summary["seed"], "runs": summary["runs"], "table": rows}


def cmd_table1(args) -> int:
    cfg = _load(args)
    if cfg.game_name != "public_goods":
        raise ConfigError(f"table1 needs the public_goods game, config uses {cfg.game_name!r}")
    out = cfg.resolve_output(args.out)
    summary = run_experiment(cfg, out, jobs=args.jobs)
    print(format_table1(summary))
    (out / "table1.json").write_text(dumps(table1_rows(summary)))
    return _report_errors(summary)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gamegrad", description="Gradient dynamics on differentiable games.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("run", cmd_run, "run every method and write trajectory CSVs + summary.json"),
        ("plot", cmd_plot, "render reward contours with trajectories as SVG"),
        ("table1", cmd_table1, "public goods summary table (stdout + table1.json)"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path, help="config file or bundled config name")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # malformed CSV or degenerate plot input
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
