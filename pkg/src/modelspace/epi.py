"""Epidemiological fixtures: a type system for disease and geography nets, and the stock model spaces.

Everything is typed over `type_system()`: one population species with an
infection (two in, two out), a generic disease step, and travel.
"""
from __future__ import annotations

from itertools import permutations

from . import diagram as dg
from .cset import CSet, CSetMorphism, hom_search
from .petri import petri_net


def type_system() -> CSet:
    return petri_net(["Pop"], {"inf": (["Pop", "Pop"], ["Pop", "Pop"]),
                               "dis": (["Pop"], ["Pop"]),
                               "travel": (["Pop"], ["Pop"])})


# species that cannot move between strata
IMMOBILE = {"D"}

DISEASES = {
    "S": {},
    "I": {},
    "SIR": {"inf": ("SI", "II"), "rec": ("I", "R")},
    "SIRS": {"inf": ("SI", "II"), "rec": ("I", "R"), "wan": ("R", "S")},
    "SIRD": {"inf": ("SI", "II"), "rec": ("I", "R"), "death": ("I", "D")},
    "SIRSD": {"inf": ("SI", "II"), "rec": ("I", "R"), "wan": ("R", "S"), "death": ("I", "D")},
    "SIRSV": {"inf": ("SI", "II"), "rec": ("I", "R"), "wan": ("R", "S"), "vax": ("S", "V")},
    "ID": {"death": ("I", "D")},
}


def _species(transitions: dict, extra: str = "") -> list[str]:
    seen = dict.fromkeys(extra)
    for ins, outs in transitions.values():
        seen.update(dict.fromkeys(ins + outs))
    order = "SIRDV"
    return sorted(seen, key=order.index)


def disease_net(name: str, travel: bool = True) -> CSet:
    """A compartmental net with a reflexive travel transition on each mobile species."""
    trans = dict(DISEASES[name])
    species = _species(trans, extra=name if len(name) == 1 else "")
    if travel:
        for s in species:
            if s not in IMMOBILE:
                trans[f"travel_{s}"] = (s, s)
    return petri_net(species, {t: (list(i), list(o)) for t, (i, o) in trans.items()})


def geography_net(n: int) -> CSet:
    """n cities: reflexive infection and disease steps per city, travel between every ordered pair."""
    cities = [f"c{k + 1}" for k in range(n)]
    trans = {}
    for c in cities:
        trans[f"inf_{c}"] = ([c, c], [c, c])
        trans[f"dis_{c}"] = ([c], [c])
    for a, b in permutations(cities, 2):
        trans[f"travel_{a}{b}"] = ([a], [b])
    return petri_net(cities, trans)


def _kind(tname: str) -> str:
    if tname.startswith("inf"):
        return "inf"
    if tname.startswith("travel"):
        return "travel"
    return "dis"


def typing(net: CSet, X: CSet | None = None) -> CSetMorphism:
    """The unique typing sending transitions by name prefix; infection arcs are matched in order."""
    X = X or type_system()
    want = [X.names("T").index(_kind(t)) for t in net.names("T")]
    found = hom_search(net, X, initial={"T": dict(enumerate(want))})
    # arcs of an infection are ordered: first input/output arc to the first slot
    for f in found:
        if all(_arcs_in_order(net, X, f, g) for g in ("it", "ot")):
            return f
    raise ValueError("net has no typing over the type system")


def _arcs_in_order(net, X, f, g) -> bool:
    arc_ob = "I" if g == "it" else "O"
    last = {}
    for a, t in enumerate(net.act(g)):
        v = f[arc_ob][a]
        if t in last and last[t] >= v:
            return False
        last[t] = v
    return True


def include(small: CSet, big: CSet) -> CSetMorphism:
    """The inclusion matching species and transitions by label."""
    init = {"S": dict(enumerate(big.names("S").index(s) for s in small.names("S"))),
            "T": dict(enumerate(big.names("T").index(t) for t in small.names("T")))}
    found = hom_search(small, big, monic=True, initial=init, limit=1)
    if not found:
        raise ValueError("no label-preserving inclusion")
    return found[0]


def typed_path(nets: list[CSet], names: list[str], X: CSet | None = None) -> dg.TypedDiagram:
    """A path of nets joined by label-preserving inclusions, typed over X."""
    X = X or type_system()
    maps = [include(a, b) for a, b in zip(nets, nets[1:])]
    D = dg.Diagram.sequence(nets, maps, names)
    return dg.TypedDiagram(D, X, tuple(typing(x, X) for x in nets))


def disease_path(names=("SIR", "SIRS", "SIRSV")) -> dg.TypedDiagram:
    return typed_path([disease_net(n) for n in names], list(names))


def geography_path(sizes=(1, 2, 3)) -> dg.TypedDiagram:
    return typed_path([geography_net(n) for n in sizes], [f"{n}city" for n in sizes])


def typed_single(net: CSet, name: str) -> dg.TypedDiagram:
    X = type_system()
    return dg.TypedDiagram(dg.Diagram.single(net, name), X, (typing(net, X),))


def death_span(disease: dg.TypedDiagram, at: str = "SIR"):
    """Span glueing a death transition I -> D onto `disease` at node `at`, over the single state I.

    Returns (apex, [leg into disease, leg into the death net], death net).
    """
    apex = typed_single(disease_net("I", travel=False), "I")
    death = typed_single(disease_net("ID", travel=False), "death")
    node = disease.diagram.shape.ob(at)
    legs = []
    for target, k in ((disease, node), (death, 0)):
        F = dg.FinFunctor(apex.shape, target.shape, (k,), ())
        phi = (include(apex.diagram.ob[0], target.diagram.ob[k]),)
        legs.append(dg.DiagramMorphism(apex.diagram, target.diagram, F, phi))
    return apex, legs, death


SPACE_NAMES = {
    "(SIR,1city)": "SIR", "(SIRS,1city)": "SIRS", "(SIRD,1city)": "SIRD", "(SIRSD,1city)": "SIRSD",
    "(SIR,2city)": "(SIR)_2", "(SIRS,2city)": "(SIRS)_2", "(SIRD,2city)": "(SIRD)_2", "(SIRSD,2city)": "(SIRSD)_2",
}

# ground truth for the synthetic data, per city; fractions of the whole population
# Travel is slow enough that the two cities stay visibly out of step; at faster
# mixing the aggregate curve of two cities is the one-city curve within noise.
TRUTH = {
    "beta": 0.5, "gamma": 0.25, "death": 0.05, "travel": 0.001,
    "initial": {"c1": {"S": 0.99, "I": 0.01}, "c2": {"S": 1.0, "I": 0.0}},
}


def stock_space(disease=("SIR", "SIRS"), cities=(1, 2)) -> dg.TypedDiagram:
    """The eight-model space of the selection experiment, built by running `stock_workflow`."""
    from .workflow import execute

    return execute(stock_workflow(disease), stock_inputs(disease, cities)).outputs["names.out"]


def truth_params(net: CSet, truth: dict = TRUTH) -> "ParamSet":
    """Ground truth on a stratified net, with densities per city turned into whole-population fractions.

    Each city holds 1/n of the population, so mass-action infection doubles (for two cities)
    to keep the within-city force of infection at `beta`.
    """
    from .petri import ParamSet

    cities = sorted({name.strip("()").split(",")[1] for name in net.names("S")})
    share = 1.0 / len(cities)
    conc = {}
    for name in net.names("S"):
        s, c = name.strip("()").split(",")
        conc[name] = truth["initial"].get(c, {}).get(s, 0.0) * share
    rates = {}
    for name in net.names("T"):
        kind = name.strip("()").split(",")[0]
        if kind == "inf":
            rates[name] = truth["beta"] / share
        elif kind == "rec":
            rates[name] = truth["gamma"]
        elif kind == "death":
            rates[name] = truth["death"]
        elif kind.startswith("travel"):
            rates[name] = truth["travel"]
    return ParamSet.from_dict(net, conc, rates)


def stock_inputs(disease=("SIR", "SIRS"), cities=(1, 2)) -> dict:
    from .workflow import Span

    path = disease_path(disease)
    apex, legs, death = death_span(path, at=disease[0])
    return {"disease": path, "death_span": Span(apex, (path, death), tuple(legs)),
            "geography": geography_path(cities)}


def stock_workflow(disease=("SIR", "SIRS")):
    """Glue death onto the disease path, set it beside the original, stratify by geography, rename."""
    from .workflow import Workflow

    return Workflow.from_json({
        "inputs": {"disease": "DiagramOverX", "death_span": "SpanOfDiagrams", "geography": "DiagramOverX"},
        "boxes": [
            {"id": "disease", "op": "load", "config": {"input": "disease"}},
            {"id": "death", "op": "load", "config": {"input": "death_span"}},
            {"id": "geography", "op": "load", "config": {"input": "geography"}},
            {"id": "glue", "op": "glue"},
            {"id": "rename_glued", "op": "relabel", "config": {"names": {d: d + "D" for d in disease}}},
            {"id": "branch", "op": "coproduct", "config": {"arity": 2}},
            {"id": "stratify", "op": "typed_product", "config": {"arity": 2, "observe": 0}},
            {"id": "names", "op": "relabel", "config": {"names": SPACE_NAMES}},
        ],
        "wires": [
            {"from": "death.out", "to": "glue.span"},
            {"from": "glue.out", "to": "rename_glued.in"},
            {"from": "disease.out", "to": "branch.in0"},
            {"from": "rename_glued.out", "to": "branch.in1"},
            {"from": "branch.out", "to": "stratify.in0"},
            {"from": "geography.out", "to": "stratify.in1"},
            {"from": "stratify.out", "to": "names.in"},
        ],
        "outputs": ["names.out"],
    })
