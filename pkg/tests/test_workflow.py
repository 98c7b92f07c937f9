import json

import pytest

from modelspace import cset, epi
from modelspace import diagram as dg
from modelspace import workflow as wf
from modelspace.fincat import FinFunctor
from modelspace.workflow import RuntimeBoxError, Workflow, WorkflowError, execute, typecheck


def identity_workflow() -> Workflow:
    return Workflow.from_json({
        "inputs": {"space": "DiagramOverX"},
        "boxes": [{"id": "in", "op": "load", "config": {"input": "space"}}],
        "outputs": ["in.out"],
    })


def test_identity_workflow():
    space = epi.disease_path()
    w = identity_workflow()
    assert typecheck(w) == []
    assert execute(w, {"space": space}).outputs["in.out"] == space


def test_stock_typechecks_and_builds_eight_models():
    w = epi.stock_workflow()
    assert typecheck(w) == []
    result = execute(w, epi.stock_inputs())
    space = result.outputs["names.out"]
    assert set(space.diagram.nodes) == set(epi.SPACE_NAMES.values())
    assert [e["box"] for e in result.log][:3] == ["death", "disease", "geography"]
    assert space.diagram["(SIRD)_2"].n("S") == 8
    assert space.diagram["SIRSD"].names("S") == ("(S,c1)", "(I,c1)", "(R,c1)", "(D,c1)")


def test_stock_shape_is_two_grids():
    space = epi.stock_space()
    edges = sorted((space.diagram.nodes[g.src], space.diagram.nodes[g.tgt]) for g in space.shape.generators)
    assert edges == sorted([
        ("SIR", "SIRS"), ("SIR", "(SIR)_2"), ("SIRS", "(SIRS)_2"), ("(SIR)_2", "(SIRS)_2"),
        ("SIRD", "SIRSD"), ("SIRD", "(SIRD)_2"), ("SIRSD", "(SIRSD)_2"), ("(SIRD)_2", "(SIRSD)_2"),
    ])
    assert len(space.shape.equations) == 2


def test_execute_is_deterministic():
    a = execute(epi.stock_workflow(), epi.stock_inputs())
    b = execute(epi.stock_workflow(), epi.stock_inputs())
    dump = lambda r: json.dumps(wf.artifact_to_json(r.outputs["names.out"]), sort_keys=True)
    assert dump(a) == dump(b)
    assert a.log == b.log


def test_sub_workflow_matches_full_run():
    """Running the glue step alone, then the rest on its output, gives the same space."""
    inputs = epi.stock_inputs()
    full = execute(epi.stock_workflow(), inputs).outputs["names.out"]
    glue = Workflow.from_json({
        "inputs": {"death_span": "SpanOfDiagrams"},
        "boxes": [{"id": "death", "op": "load", "config": {"input": "death_span"}},
                  {"id": "glue", "op": "glue"}],
        "wires": [{"from": "death.out", "to": "glue.span"}],
        "outputs": ["glue.out"],
    })
    glued = execute(glue, inputs).outputs["glue.out"]
    rest = epi.stock_workflow().to_json()
    rest["inputs"] = {"disease": "DiagramOverX", "glued": "DiagramOverX", "geography": "DiagramOverX"}
    rest["boxes"] = [b for b in rest["boxes"] if b["id"] not in {"death", "glue"}]
    rest["boxes"].append({"id": "glued", "op": "load", "config": {"input": "glued"}})
    rest["wires"] = [w for w in rest["wires"] if w["to"] != "glue.span"]
    for w in rest["wires"]:
        if w["from"] == "glue.out":
            w["from"] = "glued.out"
    w = Workflow.from_json(rest)
    assert typecheck(w) == []
    part = execute(w, {"disease": inputs["disease"], "glued": glued,
                       "geography": inputs["geography"]}).outputs["names.out"]
    assert part == full


# -- typechecking -------------------------------------------------------------

def test_typecheck_type_mismatch():
    data = epi.stock_workflow().to_json()
    data["wires"][0] = {"from": "disease.out", "to": "glue.span"}
    data["wires"].append({"from": "death.out", "to": "branch.in0"})
    data["wires"] = [w for w in data["wires"] if w != {"from": "disease.out", "to": "branch.in0"}]
    errors = typecheck(Workflow.from_json(data))
    assert any("does not match" in e for e in errors)


def test_typecheck_unwired_and_double_wired():
    data = epi.stock_workflow().to_json()
    data["wires"] = [w for w in data["wires"] if w["to"] != "stratify.in1"]
    data["wires"].append({"from": "geography.out", "to": "stratify.in0"})
    errors = typecheck(Workflow.from_json(data))
    assert "in-port stratify.in1 is wired 0 times" in errors
    assert "in-port stratify.in0 is wired 2 times" in errors


def test_typecheck_unknown_op_and_port():
    data = epi.stock_workflow().to_json()
    data["boxes"].append({"id": "mystery", "op": "teleport"})
    data["wires"].append({"from": "names.out", "to": "names.sideways"})
    errors = typecheck(Workflow.from_json(data))
    assert any("unknown op 'teleport'" in e for e in errors)
    assert any("no in-port names.sideways" in e for e in errors)


def test_typecheck_cycle_and_outputs():
    w = Workflow.from_json({
        "inputs": {},
        "boxes": [{"id": "a", "op": "relabel"}, {"id": "b", "op": "relabel"}],
        "wires": [{"from": "a.out", "to": "b.in"}, {"from": "b.out", "to": "a.in"}],
        "outputs": ["a.result"],
    })
    errors = typecheck(w)
    assert "wiring has a cycle" in errors
    assert "output a.result is not an out-port" in errors


def test_typecheck_undeclared_input_and_duplicates():
    w = Workflow.from_json({
        "inputs": {"x": "Widget"},
        "boxes": [{"id": "a", "op": "load", "config": {"input": "y"}},
                  {"id": "a", "op": "load", "config": {"input": "x"}}],
        "outputs": ["a.out"],
    })
    errors = typecheck(w)
    assert any("duplicate box ids" in e for e in errors)
    assert any("unknown type 'Widget'" in e for e in errors)
    assert any("undeclared input 'y'" in e for e in errors)


def test_execute_refuses_ill_typed_or_missing_inputs():
    data = epi.stock_workflow().to_json()
    data["boxes"].append({"id": "mystery", "op": "teleport"})
    with pytest.raises(WorkflowError):
        execute(Workflow.from_json(data), epi.stock_inputs())
    inputs = epi.stock_inputs()
    del inputs["geography"]
    with pytest.raises(WorkflowError, match="geography"):
        execute(epi.stock_workflow(), inputs)


def test_malformed_workflow_json():
    with pytest.raises(WorkflowError):
        Workflow.from_json({"boxes": [{"op": "glue"}]})


# -- runtime errors -----------------------------------------------------------

def span_workflow() -> Workflow:
    return Workflow.from_json({
        "inputs": {"apex": "DiagramOverX", "a": "DiagramOverX", "b": "DiagramOverX",
                   "f": "DiagramMorphism", "g": "DiagramMorphism"},
        "boxes": [{"id": k, "op": "load", "config": {"input": k}} for k in ("apex", "a", "b", "f", "g")]
        + [{"id": "span", "op": "span"}, {"id": "po", "op": "pushout"}],
        "wires": [{"from": "apex.out", "to": "span.apex"}, {"from": "a.out", "to": "span.foot0"},
                  {"from": "b.out", "to": "span.foot1"}, {"from": "f.out", "to": "span.leg0"},
                  {"from": "g.out", "to": "span.leg1"}, {"from": "span.out", "to": "po.span"}],
        "outputs": ["po.out"],
    })


def point(T: dg.TypedDiagram, at: int, apex: dg.TypedDiagram) -> wf.TypedMorphism:
    F = FinFunctor(apex.shape, T.shape, (at,), ())
    phi = (epi.include(apex.diagram.ob[0], T.diagram.ob[at]),)
    return wf.TypedMorphism(apex, T, dg.DiagramMorphism(apex.diagram, T.diagram, F, phi))


def test_span_pushout_of_shared_apex():
    apex = epi.typed_single(epi.disease_net("SIR"), "SIR")
    a = epi.disease_path(("SIR", "SIRS"))
    b = epi.disease_path(("SIR", "SIRSV"))
    w = span_workflow()
    assert typecheck(w) == []
    out = execute(w, {"apex": apex, "a": a, "b": b, "f": point(a, 0, apex), "g": point(b, 0, apex)})
    space = out.outputs["po.out"]
    assert len(space.diagram.nodes) == 3
    assert sorted(g.src for g in space.shape.generators) == [0, 0]


def test_non_shared_apex_is_a_runtime_error():
    apex = epi.typed_single(epi.disease_net("SIR"), "SIR")
    other = epi.typed_single(epi.disease_net("I", travel=False), "I")
    a = epi.disease_path(("SIR", "SIRS"))
    b = epi.disease_path(("SIR", "SIRSV"))
    inputs = {"apex": apex, "a": a, "b": b, "f": point(a, 0, apex), "g": point(b, 0, other)}
    with pytest.raises(RuntimeBoxError) as info:
        execute(span_workflow(), inputs)
    assert info.value.box == "po"


def test_typed_single_box():
    X = epi.type_system()
    net = epi.disease_net("SIR")
    w = Workflow.from_json({
        "inputs": {"net": "CSet", "X": "Base"},
        "boxes": [{"id": "net", "op": "load", "config": {"input": "net"}},
                  {"id": "X", "op": "load", "config": {"input": "X"}},
                  {"id": "one", "op": "typed_single", "config": {"name": "SIR"}}],
        "wires": [{"from": "net.out", "to": "one.net"}, {"from": "X.out", "to": "one.base"}],
        "outputs": ["one.out"],
    })
    assert typecheck(w) == []
    T = execute(w, {"net": net, "X": X}).outputs["one.out"]
    assert T.diagram.nodes == ("SIR",)
    assert T.typing[0].cod == X


# -- artifacts ----------------------------------------------------------------

def test_artifact_round_trips(tmp_path):
    inputs = epi.stock_inputs()
    wf.write_inputs(inputs, tmp_path)
    back = wf.load_inputs(epi.stock_workflow(), tmp_path)
    assert back["disease"] == inputs["disease"]
    assert back["death_span"].legs == inputs["death_span"].legs
    X = epi.type_system()
    assert wf.artifact_from_json(wf.artifact_to_json(X), "Base") == X
    with pytest.raises(ValueError):
        wf.artifact_from_json(wf.artifact_to_json(X), "DiagramOverX")


def test_missing_input_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="disease"):
        wf.load_inputs(epi.stock_workflow(), tmp_path)


def test_dot_output():
    dot = wf.to_dot(epi.disease_path(("SIR", "SIRS")))
    assert dot.startswith("digraph space {")
    assert '"SIR" -> "SIRS";' in dot


def test_workflow_json_round_trip():
    w = epi.stock_workflow()
    assert Workflow.from_json(json.loads(json.dumps(w.to_json()))) == w
    assert cset.validate(epi.type_system()) == []
