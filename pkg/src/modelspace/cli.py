"""Command line: build model spaces, generate synthetic data, run selection.

Exit status is 0 on success, 1 for bad input, 2 for an internal failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

import numpy as np

from . import epi, select as sl, workflow as wf
from .petri import ParamSet, Trajectory

log = logging.getLogger("modelspace")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None


def _load_space(path) -> wf.TypedDiagram:
    data = _read_json(path)
    try:
        return wf.artifact_from_json(data, "DiagramOverX")
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{path}: not a model space: {exc}") from None


def _node_file(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_") or "node"


def cmd_explore(args) -> int:
    w = wf.Workflow.from_json(_read_json(args.workflow))
    errors = wf.typecheck(w)
    if errors:
        for e in errors:
            print(f"typecheck: {e}", file=sys.stderr)
        return 1
    inputs = wf.load_inputs(w, args.inputs)
    result = wf.execute(w, inputs)
    if len(result.outputs) != 1:
        raise UsageError("explore expects a workflow with exactly one output")
    (space,) = result.outputs.values()
    out = Path(args.out)
    out.write_text(json.dumps(wf.artifact_to_json(space), indent=1, sort_keys=True) + "\n")
    out.with_suffix(".dot").write_text(wf.to_dot(space))
    out.with_suffix(".log.json").write_text(json.dumps(result.log, indent=1) + "\n")
    log.info("wrote %s (%d nodes)", out, len(space.diagram.nodes))
    return 0


def cmd_generate(args, rng: np.random.Generator) -> int:
    space = _load_space(args.space)
    if args.node not in space.diagram.nodes:
        raise UsageError(f"node {args.node!r} not in space; have {list(space.diagram.nodes)}")
    if args.samples < 1 or not args.t1 > args.t0 or args.noise < 0:
        raise UsageError("need samples >= 1, t1 > t0 and noise >= 0")
    net = space.diagram[args.node]
    raw = _read_json(args.params)
    try:
        p = ParamSet.from_dict(net, raw["concentrations"], raw["rates"])
    except (KeyError, AttributeError, ValueError) as exc:
        raise UsageError(f"{args.params}: bad parameters: {exc}") from None
    data = sl.synthetic_data(space, args.node, p, args.t0, args.t1, args.samples, args.noise, rng, args.dt)
    data.to_csv(args.out)
    log.info("wrote %s (%d samples)", args.out, len(data.times))
    return 0


def cmd_select(args, seed: int | None) -> int:
    space = _load_space(args.space)
    try:
        data = Trajectory.from_csv(args.data)
    except FileNotFoundError:
        raise UsageError(f"{args.data}: no such file") from None
    cfg_data = _read_json(args.config) if args.config else {}
    if seed is not None:
        cfg_data["seed"] = seed
    cfg = sl.FitConfig.from_json(cfg_data)
    report = sl.select(space, data, cfg)
    out = Path(args.out)
    out.write_text(report.to_json() + "\n")
    report.write_loss_csv(out.with_suffix(".losses.csv"))
    traj_dir = out.parent / (out.stem + "_trajectories")
    traj_dir.mkdir(exist_ok=True)
    for n in report.nodes:
        sl.fitted_trajectory(space, n, data, cfg).to_csv(traj_dir / f"{_node_file(n.node)}.csv")
    data.to_csv(traj_dir / "data.csv")
    log.info("wrote %s; best node %s", out, min(report.nodes, key=lambda n: n.raw_loss).node)
    return 0


def cmd_fixtures(args) -> int:
    """Write the stock eight-model workflow, its inputs and ground-truth parameters."""
    out = Path(args.out)
    (out / "inputs").mkdir(parents=True, exist_ok=True)
    (out / "workflow.json").write_text(json.dumps(epi.stock_workflow().to_json(), indent=1) + "\n")
    wf.write_inputs(epi.stock_inputs(), out / "inputs")
    net = epi.stock_space().diagram["(SIRD)_2"]
    (out / "truth.json").write_text(json.dumps(epi.truth_params(net).to_dict(net), indent=1) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modelspace", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None, help="seed for all randomness (default 0)")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("explore", help="run a workflow and write the resulting model space")
    e.add_argument("--workflow", required=True)
    e.add_argument("--inputs", required=True, help="directory holding <input>.json files")
    e.add_argument("--out", required=True)

    g = sub.add_parser("generate", help="simulate one node and write noisy observable samples")
    g.add_argument("--space", required=True)
    g.add_argument("--node", required=True)
    g.add_argument("--params", required=True)
    g.add_argument("--t0", type=float, default=0.0)
    g.add_argument("--t1", type=float, default=50.0)
    g.add_argument("--samples", type=int, default=50)
    g.add_argument("--noise", type=float, default=0.01)
    g.add_argument("--dt", type=float, default=0.01)
    g.add_argument("--out", required=True)

    s = sub.add_parser("select", help="fit every node of a space to data")
    s.add_argument("--space", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--config", default=None, help="JSON of fit options")
    s.add_argument("--out", required=True)

    f = sub.add_parser("fixtures", help="write the stock epidemiology workflow and inputs")
    f.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    rng = np.random.default_rng(0 if args.seed is None else args.seed)
    try:
        if args.command == "explore":
            return cmd_explore(args)
        if args.command == "generate":
            return cmd_generate(args, rng)
        if args.command == "select":
            return cmd_select(args, args.seed)
        return cmd_fixtures(args)
    except (UsageError, wf.WorkflowError, wf.RuntimeBoxError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # malformed data files surface as ValueError from the parsers
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
