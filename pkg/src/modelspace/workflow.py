"""Typed wiring-diagram workflows: DAGs of model-space operations, checked and run eagerly.

A workflow file looks like

    {"inputs": {"disease": "DiagramOverX", ...},
     "boxes": [{"id": "glue", "op": "glue", "config": {}}, ...],
     "wires": [{"from": "span.out", "to": "glue.span"}, ...],
     "outputs": ["product.out"]}

Ports are typed; `typecheck` only looks at the wiring. Anything that depends on
the artifacts themselves (a span whose legs leave from different apexes, a
chase that does not saturate) surfaces at run time as a `RuntimeBoxError`.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path as FilePath
from typing import Any, Callable

from . import cset, diagram as dg, fincat, leftkan
from .cset import CSet
from .diagram import DiagramMorphism, TypedDiagram

log = logging.getLogger(__name__)

TYPES = ("DiagramOverX", "DiagramMorphism", "SpanOfDiagrams", "CSet", "Base")


class WorkflowError(ValueError):
    """A malformed or ill-typed workflow."""


class RuntimeBoxError(RuntimeError):
    def __init__(self, box: str, cause: Exception):
        super().__init__(f"box {box!r} failed: {type(cause).__name__}: {cause}")
        self.box = box
        self.cause = cause


@dataclass(frozen=True)
class TypedMorphism:
    dom: TypedDiagram
    cod: TypedDiagram
    map: DiagramMorphism


@dataclass(frozen=True)
class Span:
    apex: TypedDiagram
    feet: tuple[TypedDiagram, ...]
    legs: tuple[DiagramMorphism, ...]


@dataclass
class Box:
    id: str
    op: str
    config: dict = field(default_factory=dict)


@dataclass
class Workflow:
    boxes: list[Box]
    wires: list[tuple[str, str]]
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)

    @classmethod
    def from_json(cls, data: dict) -> "Workflow":
        try:
            boxes = [Box(b["id"], b["op"], dict(b.get("config", {}))) for b in data["boxes"]]
            wires = [(w["from"], w["to"]) for w in data.get("wires", [])]
        except (KeyError, TypeError) as exc:
            raise WorkflowError(f"malformed workflow: missing {exc}") from None
        return cls(boxes, wires, dict(data.get("inputs", {})), list(data.get("outputs", [])))

    def to_json(self) -> dict:
        return {
            "inputs": self.inputs,
            "boxes": [{"id": b.id, "op": b.op, "config": b.config} for b in self.boxes],
            "wires": [{"from": a, "to": b} for a, b in self.wires],
            "outputs": self.outputs,
        }

    def box(self, box_id: str) -> Box:
        return next(b for b in self.boxes if b.id == box_id)


# -- operations ---------------------------------------------------------------

def _arity(cfg: dict, default: int = 2) -> int:
    return int(cfg.get("arity", default))


def _numbered(prefix: str, n: int, typ: str) -> dict[str, str]:
    return {f"{prefix}{k}": typ for k in range(n)}


@dataclass(frozen=True)
class Op:
    ports_in: Callable[[dict], dict[str, str]]
    ports_out: Callable[[dict, "Workflow"], dict[str, str]]
    run: Callable[[dict, dict], Any]


def _run_span(cfg, args):
    n = _arity(cfg)
    apex = args["apex"]
    feet = tuple(args[f"foot{k}"] for k in range(n))
    legs = tuple(args[f"leg{k}"].map for k in range(n))
    return Span(apex, feet, legs)


def _run_glue(cfg, args):
    span: Span = args["span"]
    for k, leg in enumerate(span.legs):
        if leg.dom != span.apex.diagram:
            raise ValueError(f"leg {k} does not start at the span's apex")
    return dg.typed_pushout(span.legs, span.apex, span.feet, cfg.get("budget")).apex


def _run_coequalizer(cfg, args):
    ms = [args[f"m{k}"] for k in range(_arity(cfg))]
    dom, cod = ms[0].dom, ms[0].cod
    return dg.typed_coequalizer([m.map for m in ms], dom, cod, cfg.get("budget")).apex


def _run_leftkan(cfg, args):
    T: TypedDiagram = args["in"]
    shape = fincat.from_json(cfg["shape"])
    F = fincat.functor_from_json(cfg["functor"], T.shape, shape)
    ck = leftkan.leftkan_cset(T.diagram, F, cfg.get("budget", leftkan.DEFAULT_ROUNDS))
    typing = leftkan.transpose_cset(ck, dg.constant(shape, T.base), list(T.typing))
    return TypedDiagram(ck.diagram, T.base, typing.phi)


def _run_typed_single(cfg, args):
    net, X = args["net"], args["base"]
    found = cset.hom_search(net, X, limit=1)
    if not found:
        raise ValueError("net admits no typing over the base")
    return TypedDiagram(dg.Diagram.single(net, cfg.get("name", "*")), X, (found[0],))


OPS: dict[str, Op] = {
    "load": Op(lambda c: {}, lambda c, w: {"out": w.inputs.get(c.get("input"), "?")}, None),
    "span": Op(lambda c: {"apex": "DiagramOverX", **_numbered("foot", _arity(c), "DiagramOverX"),
                          **_numbered("leg", _arity(c), "DiagramMorphism")},
               lambda c, w: {"out": "SpanOfDiagrams"}, _run_span),
    "glue": Op(lambda c: {"span": "SpanOfDiagrams"}, lambda c, w: {"out": "DiagramOverX"}, _run_glue),
    "coproduct": Op(lambda c: _numbered("in", _arity(c), "DiagramOverX"), lambda c, w: {"out": "DiagramOverX"},
                    lambda c, a: dg.typed_coproduct([a[f"in{k}"] for k in range(_arity(c))]).apex),
    "typed_product": Op(lambda c: _numbered("in", _arity(c), "DiagramOverX"), lambda c, w: {"out": "DiagramOverX"},
                        lambda c, a: dg.typed_product([a[f"in{k}"] for k in range(_arity(c))],
                                                      observe=c.get("observe", 0)).apex),
    "coequalizer": Op(lambda c: _numbered("m", _arity(c), "DiagramMorphism"), lambda c, w: {"out": "DiagramOverX"},
                      _run_coequalizer),
    "leftkan": Op(lambda c: {"in": "DiagramOverX"}, lambda c, w: {"out": "DiagramOverX"}, _run_leftkan),
    "relabel": Op(lambda c: {"in": "DiagramOverX"}, lambda c, w: {"out": "DiagramOverX"},
                  lambda c, a: dg.relabel_typed(a["in"], c.get("names", {}))),
    "typed_single": Op(lambda c: {"net": "CSet", "base": "Base"}, lambda c, w: {"out": "DiagramOverX"},
                       _run_typed_single),
}
OPS["limit"] = OPS["typed_product"]
OPS["pushout"] = OPS["glue"]


# -- checking -----------------------------------------------------------------

def _split(ref: str) -> tuple[str, str]:
    box, _, port = ref.partition(".")
    return box, port


def _topological(w: Workflow) -> list[tuple[int, str]] | None:
    """(rank, box id) in execution order, or None when the wiring has a cycle."""
    ids = [b.id for b in w.boxes]
    deps = {i: set() for i in ids}
    for src, dst in w.wires:
        a, b = _split(src)[0], _split(dst)[0]
        if a in deps and b in deps:
            deps[b].add(a)
    rank: dict[str, int] = {}
    while len(rank) < len(ids):
        ready = [i for i in ids if i not in rank and deps[i] <= rank.keys()]
        if not ready:
            return None
        for i in ready:
            rank[i] = 1 + max((rank[d] for d in deps[i]), default=-1)
    return sorted((r, i) for i, r in rank.items())


def typecheck(w: Workflow) -> list[str]:
    """Wiring errors: unknown ops or ports, unwired or doubly wired inputs, type clashes, cycles."""
    errors = []
    ids = [b.id for b in w.boxes]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        errors.append(f"duplicate box ids: {dup}")
    for name, typ in w.inputs.items():
        if typ not in TYPES:
            errors.append(f"input {name!r} has unknown type {typ!r}")
    ports_in, ports_out = {}, {}
    for b in w.boxes:
        op = OPS.get(b.op)
        if op is None:
            errors.append(f"box {b.id!r}: unknown op {b.op!r}")
            continue
        if b.op == "load" and b.config.get("input") not in w.inputs:
            errors.append(f"box {b.id!r}: loads undeclared input {b.config.get('input')!r}")
        try:
            ports_in[b.id] = op.ports_in(b.config)
            ports_out[b.id] = op.ports_out(b.config, w)
        except (TypeError, ValueError) as exc:
            errors.append(f"box {b.id!r}: bad config: {exc}")
    wired: dict[str, int] = {}
    for src, dst in w.wires:
        (sb, sp), (db, dp) = _split(src), _split(dst)
        st = ports_out.get(sb, {}).get(sp)
        dt = ports_in.get(db, {}).get(dp)
        if st is None:
            errors.append(f"wire {src} -> {dst}: no out-port {src}")
        if dt is None:
            errors.append(f"wire {src} -> {dst}: no in-port {dst}")
        if st is not None and dt is not None and st != dt:
            errors.append(f"wire {src} -> {dst}: type {st} does not match {dt}")
        wired[dst] = wired.get(dst, 0) + 1
    for b, ports in ports_in.items():
        for p in ports:
            n = wired.get(f"{b}.{p}", 0)
            if n != 1:
                errors.append(f"in-port {b}.{p} is wired {n} times")
    for ref in w.outputs:
        b, p = _split(ref)
        if p not in ports_out.get(b, {}):
            errors.append(f"output {ref} is not an out-port")
    if _topological(w) is None:
        errors.append("wiring has a cycle")
    return errors


# -- execution ----------------------------------------------------------------

@dataclass
class WorkflowResult:
    outputs: dict[str, Any]
    log: list[dict]


def _summary(value) -> str:
    if isinstance(value, TypedDiagram):
        return f"{len(value.diagram.nodes)} nodes, {len(value.shape.generators)} generators"
    if isinstance(value, Span):
        return f"span with {len(value.feet)} legs"
    return type(value).__name__


def execute(w: Workflow, inputs: dict[str, Any]) -> WorkflowResult:
    errors = typecheck(w)
    if errors:
        raise WorkflowError("; ".join(errors))
    missing = sorted(set(w.inputs) - set(inputs))
    if missing:
        raise WorkflowError(f"missing inputs: {missing}")
    values: dict[str, Any] = {}
    events = []
    incoming = {dst: src for src, dst in w.wires}
    for rank, box_id in _topological(w):
        b = w.box(box_id)
        op = OPS[b.op]
        if b.op == "load":
            out = inputs[b.config["input"]]
        else:
            args = {p: values[incoming[f"{b.id}.{p}"]] for p in op.ports_in(b.config)}
            try:
                out = op.run(b.config, args)
            except (ValueError, RuntimeError, AssertionError) as exc:
                raise RuntimeBoxError(b.id, exc) from exc
        values[f"{b.id}.out"] = out
        events.append({"rank": rank, "box": b.id, "op": b.op, "result": _summary(out)})
        log.info("box %s (%s): %s", b.id, b.op, events[-1]["result"])
    return WorkflowResult({ref: values[ref] for ref in w.outputs}, events)


# -- artifacts on disk --------------------------------------------------------

def artifact_to_json(value) -> dict:
    if isinstance(value, TypedDiagram):
        return {"type": "DiagramOverX", **dg.typed_to_json(value)}
    if isinstance(value, TypedMorphism):
        return {"type": "DiagramMorphism", "dom": dg.typed_to_json(value.dom),
                "cod": dg.typed_to_json(value.cod), "map": dg.morphism_to_json(value.map)}
    if isinstance(value, Span):
        return {"type": "SpanOfDiagrams", "apex": dg.typed_to_json(value.apex),
                "feet": [dg.typed_to_json(f) for f in value.feet],
                "legs": [dg.morphism_to_json(m) for m in value.legs]}
    if isinstance(value, CSet):
        return {"type": "CSet", **cset.to_json(value)}
    raise TypeError(f"cannot serialize {type(value).__name__}")


def artifact_from_json(data: dict, expected: str | None = None):
    typ = data.get("type")
    if expected is not None and typ != expected and not (expected == "Base" and typ == "CSet"):
        raise ValueError(f"expected a {expected} artifact, found {typ!r}")
    if typ == "DiagramOverX":
        return dg.typed_from_json(data)
    if typ == "DiagramMorphism":
        dom, cod = dg.typed_from_json(data["dom"]), dg.typed_from_json(data["cod"])
        return TypedMorphism(dom, cod, dg.morphism_from_json(data["map"], dom.diagram, cod.diagram))
    if typ == "SpanOfDiagrams":
        apex = dg.typed_from_json(data["apex"])
        feet = tuple(dg.typed_from_json(f) for f in data["feet"])
        legs = tuple(dg.morphism_from_json(m, apex.diagram, f.diagram) for m, f in zip(data["legs"], feet))
        return Span(apex, feet, legs)
    if typ in ("CSet", "Base"):
        return cset.from_json(data)
    raise ValueError(f"unknown artifact type {typ!r}")


def load_inputs(w: Workflow, directory) -> dict[str, Any]:
    """Read `<name>.json` for every declared input."""
    directory = FilePath(directory)
    out = {}
    for name, typ in w.inputs.items():
        path = directory / f"{name}.json"
        if not path.exists():
            raise FileNotFoundError(f"input {name!r}: {path} does not exist")
        out[name] = artifact_from_json(json.loads(path.read_text()), typ)
    return out


def write_inputs(inputs: dict[str, Any], directory) -> None:
    directory = FilePath(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, value in inputs.items():
        (directory / f"{name}.json").write_text(json.dumps(artifact_to_json(value), indent=1, sort_keys=True))


def to_dot(T: TypedDiagram) -> str:
    """Graphviz text for the shape of a model space."""
    lines = ["digraph space {"]
    for name, x in zip(T.diagram.nodes, T.diagram.ob):
        lines.append(f'  "{name}" [label="{name}\\n|S|={x.n("S")} |T|={x.n("T")}"];')
    for g in T.shape.generators:
        lines.append(f'  "{T.diagram.nodes[g.src]}" -> "{T.diagram.nodes[g.tgt]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
