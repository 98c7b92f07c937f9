"""Diagrams of C-sets (model spaces), diagram morphisms, and their (co)limits.

A morphism (I, X) -> (J, Y) is a shape functor F with a natural transformation
phi: X => F;Y. Products and equalizers are computed shape-wise and pointwise;
coequalizers go through left Kan extensions along the shape quotient.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from . import cset, fincat
from .cset import CSet, CSetMorphism, compose_path
from .fincat import FinCat, FinFunctor, Path, PathEq


class BaseMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Diagram:
    shape: FinCat
    ob: tuple[CSet, ...]
    hom: tuple[CSetMorphism, ...]
    schema: FinCat

    def __post_init__(self):
        object.__setattr__(self, "ob", tuple(self.ob))
        object.__setattr__(self, "hom", tuple(self.hom))
        if any(x.schema != self.schema for x in self.ob):
            raise ValueError("all nodes must share the diagram's schema")
        cset.check_diagram(self.shape, self.ob, self.hom)

    def __getitem__(self, node: str | int) -> CSet:
        return self.ob[self.shape.ob(node) if isinstance(node, str) else node]

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.shape.objects

    def path_map(self, p: Path) -> CSetMorphism:
        return compose_path(self.ob, self.hom, p)

    @classmethod
    def single(cls, x: CSet, name: str = "*") -> "Diagram":
        return cls(FinCat((name,)), (x,), (), x.schema)

    @classmethod
    def sequence(cls, nets: Sequence[CSet], maps: Sequence[CSetMorphism],
                 names: Sequence[str] | None = None) -> "Diagram":
        """A path-shaped diagram x0 -> x1 -> ... along the given morphisms."""
        names = list(names) if names is not None else [str(i) for i in range(len(nets))]
        return cls(fincat.path_shape(names), tuple(nets), tuple(maps), nets[0].schema)

    def __repr__(self):
        return f"Diagram(nodes={list(self.nodes)}, generators={len(self.shape.generators)})"


@dataclass(frozen=True)
class DiagramMorphism:
    dom: Diagram
    cod: Diagram
    F: FinFunctor
    phi: tuple[CSetMorphism, ...]

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(self.phi))
        if self.F.dom != self.dom.shape or self.F.cod != self.cod.shape:
            raise ValueError("shape map does not match the diagrams")
        if len(self.phi) != len(self.dom.ob):
            raise ValueError("need one component per domain node")
        for i, p in enumerate(self.phi):
            if p.dom != self.dom.ob[i] or p.cod != self.cod.ob[self.F.ob_map[i]]:
                raise ValueError(f"component at node {self.dom.nodes[i]} has the wrong endpoints")
        for f, gen in enumerate(self.dom.shape.generators):
            lhs = self.phi[gen.src].then(self.cod.path_map(self.F.gen_map[f]))
            rhs = self.dom.hom[f].then(self.phi[gen.tgt])
            if lhs != rhs:
                raise ValueError(f"diagram map is not natural at {gen.name}")

    def then(self, other: "DiagramMorphism") -> "DiagramMorphism":
        return DiagramMorphism(
            self.dom, other.cod, self.F.then(other.F),
            tuple(p.then(other.phi[self.F.ob_map[i]]) for i, p in enumerate(self.phi)),
        )

    @staticmethod
    def identity(D: Diagram) -> "DiagramMorphism":
        return DiagramMorphism(D, D, FinFunctor.identity(D.shape), tuple(CSetMorphism.identity(x) for x in D.ob))

    def equal(self, other: "DiagramMorphism") -> bool:
        return (self.dom == other.dom and self.cod == other.cod and self.phi == other.phi
                and self.F.equal(other.F) is PathEq.EQUAL)


@dataclass(frozen=True)
class TypedDiagram:
    """A diagram with a cocone of typing maps into a fixed base C-set."""
    diagram: Diagram
    base: CSet
    typing: tuple[CSetMorphism, ...]
    # per node, per species: the observable name used when aggregating states
    observables: tuple[tuple[str, ...] | None, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "typing", tuple(self.typing))
        D = self.diagram
        if len(self.typing) != len(D.ob):
            raise ValueError("need one typing map per node")
        for x, t in zip(D.ob, self.typing):
            if t.dom != x or t.cod != self.base:
                raise ValueError("typing map has the wrong endpoints")
        for f, gen in enumerate(D.shape.generators):
            if D.hom[f].then(self.typing[gen.tgt]) != self.typing[gen.src]:
                raise ValueError(f"typing does not commute along {gen.name}")

    @property
    def shape(self) -> FinCat:
        return self.diagram.shape

    def __getitem__(self, node):
        return self.diagram[node]

    def observables_at(self, node: int, ob: str = "S") -> tuple[str, ...]:
        if self.observables is not None and self.observables[node] is not None:
            return self.observables[node]
        return self.diagram.ob[node].names(ob)


@dataclass
class DiagramCone:
    apex: Diagram
    legs: list[DiagramMorphism]


@dataclass
class DiagramCoequalizer(DiagramCone):
    H: FinFunctor = None
    lan_cod: object = field(default=None, repr=False)
    lan_dom: object = field(default=None, repr=False)
    alphas: list[DiagramMorphism] = field(default_factory=list, repr=False)
    quotients: list[cset.Colimit] = field(default_factory=list, repr=False)


def relabel(D: Diagram, names: dict[str, str]) -> Diagram:
    return Diagram(fincat.relabel(D.shape, names), D.ob, D.hom, D.schema)


def constant(shape: FinCat, x: CSet) -> Diagram:
    return Diagram(shape, (x,) * len(shape.objects),
                   (CSetMorphism.identity(x),) * len(shape.generators), x.schema)


# -- limits -------------------------------------------------------------------

def product(Ds: Sequence[Diagram]) -> DiagramCone:
    """Shape-level product with pointwise C-set products at every node tuple."""
    if not Ds:
        raise ValueError("product needs at least one diagram")
    schema = Ds[0].schema
    prod = fincat.product([D.shape for D in Ds])
    lims = [cset.product([D.ob[k] for D, k in zip(Ds, t)], schema=schema) for t in prod.tuples]
    homs = []
    for k, g, t in prod.gen_info:
        gen = Ds[k].shape.generators[g]
        tgt = list(t)
        tgt[k] = gen.tgt
        L, M = lims[prod.ob_index(t)], lims[prod.ob_index(tgt)]
        legs = [leg.then(Ds[k].hom[g]) if kk == k else leg for kk, leg in enumerate(L.legs)]
        homs.append(M.factor(legs))
    apex = Diagram(prod.apex, tuple(L.apex for L in lims), tuple(homs), schema)
    legs = [
        DiagramMorphism(apex, D, prod.legs[k], tuple(L.legs[k] for L in lims))
        for k, D in enumerate(Ds)
    ]
    return DiagramCone(apex, legs)


def equalizer(ms: Sequence[DiagramMorphism]) -> DiagramCone:
    """Shape equalizer (codomain shape must be free) with pointwise C-set equalizers."""
    A, B = ms[0].dom, ms[0].cod
    if any(m.dom != A or m.cod != B for m in ms):
        raise ValueError("diagram morphisms must be parallel")
    E = fincat.equalizer([m.F for m in ms])
    incl = E.legs[0]
    lims = {a: cset.equalizer([m.phi[a] for m in ms]) for a in incl.ob_map}
    homs = []
    for gi, p in enumerate(incl.gen_map):
        f = p.gens[0]
        gen = A.shape.generators[f]
        L, M = lims[gen.src], lims[gen.tgt]
        to_a = L.legs[0].then(A.hom[f])
        homs.append(M.factor([to_a, to_a.then(ms[0].phi[gen.tgt])]))
    apex = Diagram(E.apex, tuple(lims[a].apex for a in incl.ob_map), tuple(homs), A.schema)
    leg = DiagramMorphism(apex, A, incl, tuple(lims[a].legs[0] for a in incl.ob_map))
    return DiagramCone(apex, [leg])


def pullback(ms: Sequence[DiagramMorphism]) -> DiagramCone:
    """Wide pullback as product followed by equalizer; legs project to each domain."""
    Ds = [m.dom for m in ms]
    if any(m.cod != ms[0].cod for m in ms):
        raise ValueError("pullback legs must share a codomain")
    P = product(Ds)
    E = equalizer([leg.then(m) for leg, m in zip(P.legs, ms)])
    return DiagramCone(E.apex, [E.legs[0].then(leg) for leg in P.legs])


# -- colimits -----------------------------------------------------------------

def coproduct(Ds: Sequence[Diagram], schema: FinCat | None = None) -> DiagramCone:
    """Shape coproduct with node data copied; inclusion components are identities."""
    if not Ds and schema is None:
        raise ValueError("schema required for an empty coproduct")
    schema = Ds[0].schema if Ds else schema
    co = fincat.coproduct([D.shape for D in Ds])
    apex = Diagram(co.apex, tuple(x for D in Ds for x in D.ob), tuple(h for D in Ds for h in D.hom), schema)
    legs = [
        DiagramMorphism(D, apex, inc, tuple(CSetMorphism.identity(x) for x in D.ob))
        for D, inc in zip(Ds, co.legs)
    ]
    return DiagramCone(apex, legs)


def coequalizer(ms: Sequence[DiagramMorphism], budget: int | None = None) -> DiagramCoequalizer:
    """Coequalizer (H, kappa;gamma) built from two left Kan extensions along the shape quotient H."""
    from . import leftkan

    budget = budget or leftkan.DEFAULT_ROUNDS
    A, B = ms[0].dom, ms[0].cod
    if any(m.dom != A or m.cod != B for m in ms):
        raise ValueError("diagram morphisms must be parallel")
    H = fincat.coequalizer([m.F for m in ms]).legs[0]
    C = H.cod
    kY = leftkan.leftkan_cset(B, H, budget)
    kX = leftkan.leftkan_cset(A, ms[0].F.then(H), budget)
    LY, kappa = kY.diagram, kY.unit
    alphas = [
        leftkan.transpose_cset(kX, LY, [m.phi[a].then(kappa.phi[m.F.ob_map[a]]) for a in range(len(A.ob))])
        for m in ms
    ]
    quotients = [cset.coequalizer([al.phi[c] for al in alphas]) for c in range(len(C.objects))]
    homs = []
    for g, gen in enumerate(C.generators):
        into = LY.hom[g].then(quotients[gen.tgt].legs[0])
        homs.append(quotients[gen.src].factor([into, alphas[0].phi[gen.src].then(into)]))
    Z = Diagram(C, tuple(q.apex for q in quotients), tuple(homs), B.schema)
    proj = DiagramMorphism(
        B, Z, H, tuple(kappa.phi[b].then(quotients[H.ob_map[b]].legs[0]) for b in range(len(B.ob)))
    )
    return DiagramCoequalizer(Z, [proj], H, kY, kX, alphas, quotients)


def pushout(ms: Sequence[DiagramMorphism], budget: int | None = None) -> DiagramCone:
    """(Wide) pushout of a span: coproduct of the feet, then coequalizer of the legs."""
    A = ms[0].dom
    if any(m.dom != A for m in ms):
        raise ValueError("span legs must share a domain")
    co = coproduct([m.cod for m in ms])
    q = coequalizer([m.then(inc) for m, inc in zip(ms, co.legs)], budget)
    return DiagramCone(q.apex, [inc.then(q.legs[0]) for inc in co.legs])


# -- typed diagrams -----------------------------------------------------------

@dataclass
class TypedCone:
    apex: TypedDiagram
    legs: list[DiagramMorphism]


def _check_base(TDs: Sequence[TypedDiagram]) -> CSet:
    X = TDs[0].base
    if any(T.base != X for T in TDs):
        raise BaseMismatch("typed diagrams have different bases")
    return X


def typed_product(TDs: Sequence[TypedDiagram], observe: int = 0) -> TypedCone:
    """Product over the base: node tuples become pullbacks of their typing maps.

    Species observables of the result come from factor `observe`.
    """
    if not TDs:
        raise ValueError("typed product needs at least one diagram")
    X = _check_base(TDs)
    Ds = [T.diagram for T in TDs]
    n = len(Ds)
    prod = fincat.product([D.shape for D in Ds])
    lims = [cset.pullback([T.typing[k] for T, k in zip(TDs, t)]) for t in prod.tuples]
    homs = []
    for k, g, t in prod.gen_info:
        gen = Ds[k].shape.generators[g]
        tgt = list(t)
        tgt[k] = gen.tgt
        L, M = lims[prod.ob_index(t)], lims[prod.ob_index(tgt)]
        legs = [leg.then(Ds[k].hom[g]) if kk == k else leg for kk, leg in enumerate(L.legs)]
        homs.append(M.factor(legs))
    apex = Diagram(prod.apex, tuple(L.apex for L in lims), tuple(homs), X.schema)
    S = X.schema.ob("S") if "S" in X.schema.objects else 0
    observables = []
    for t, L in zip(prod.tuples, lims):
        names = TDs[observe].observables_at(t[observe])
        observables.append(tuple(names[s] for s in L.legs[observe].components[S]))
    typed = TypedDiagram(apex, X, tuple(L.legs[n] for L in lims), tuple(observables))
    legs = [DiagramMorphism(apex, D, prod.legs[k], tuple(L.legs[k] for L in lims)) for k, D in enumerate(Ds)]
    return TypedCone(typed, legs)


def typed_coproduct(TDs: Sequence[TypedDiagram]) -> TypedCone:
    X = _check_base(TDs)
    co = coproduct([T.diagram for T in TDs])
    obs = tuple(T.observables[i] if T.observables else None for T in TDs for i in range(len(T.diagram.ob)))
    typing = tuple(t for T in TDs for t in T.typing)
    return TypedCone(TypedDiagram(co.apex, X, typing, obs if any(obs) else None), co.legs)


def typed_coequalizer(ms: Sequence[DiagramMorphism], dom: TypedDiagram, cod: TypedDiagram,
                      budget: int | None = None) -> TypedCone:
    """Coequalizer in diagrams over the base; the typing is induced through both universal maps."""
    from . import leftkan

    X = _check_base([dom, cod])
    q = coequalizer(ms, budget)
    LY = q.lan_cod.diagram
    typeY = leftkan.transpose_cset(q.lan_cod, constant(LY.shape, X), list(cod.typing))
    typing = []
    for c, Q in enumerate(q.quotients):
        t = typeY.phi[c]
        typing.append(Q.factor([t, q.alphas[0].phi[c].then(t)]))
    return TypedCone(TypedDiagram(q.apex, X, tuple(typing)), q.legs)


def typed_pushout(ms: Sequence[DiagramMorphism], apex: TypedDiagram, feet: Sequence[TypedDiagram],
                  budget: int | None = None) -> TypedCone:
    """Pushout of a span of typed diagrams; each leg must respect the typing."""
    for m, T in zip(ms, feet):
        if m.dom != apex.diagram or m.cod != T.diagram:
            raise ValueError("span legs do not match the given typed diagrams")
        check_typed_morphism(m, apex, T)
    co = typed_coproduct(list(feet))
    q = typed_coequalizer([m.then(inc) for m, inc in zip(ms, co.legs)], apex, co.apex, budget)
    return TypedCone(q.apex, [inc.then(q.legs[0]) for inc in co.legs])


def check_typed_morphism(m: DiagramMorphism, dom: TypedDiagram, cod: TypedDiagram) -> None:
    for i, p in enumerate(m.phi):
        if p.then(cod.typing[m.F.ob_map[i]]) != dom.typing[i]:
            raise ValueError(f"diagram map does not respect typing at node {dom.diagram.nodes[i]}")


def relabel_typed(T: TypedDiagram, names: dict[str, str]) -> TypedDiagram:
    return TypedDiagram(relabel(T.diagram, names), T.base, T.typing, T.observables)


# -- search -------------------------------------------------------------------

def hom_search(D1: Diagram, D2: Diagram, max_len: int = 3, limit: int | None = None,
               shape_map: FinFunctor | None = None) -> list[DiagramMorphism]:
    """All diagram morphisms D1 -> D2 (shape images up to length `max_len`), by exhaustive search."""
    functors = [shape_map] if shape_map is not None else fincat.enumerate_functors(D1.shape, D2.shape, max_len)
    found = []
    n = len(D1.ob)
    for F in functors:
        cands = [cset.hom_search(D1.ob[i], D2.ob[F.ob_map[i]]) for i in range(n)]
        targets = [D2.path_map(p) for p in F.gen_map]
        checks = [[] for _ in range(n)]
        for f, gen in enumerate(D1.shape.generators):
            checks[max(gen.src, gen.tgt)].append((f, gen.src, gen.tgt))
        chosen: list[CSetMorphism | None] = [None] * n

        def extend(i):
            if limit is not None and len(found) >= limit:
                return
            if i == n:
                found.append(DiagramMorphism(D1, D2, F, tuple(chosen)))
                return
            for h in cands[i]:
                chosen[i] = h
                if all(chosen[s].then(targets[f]) == D1.hom[f].then(chosen[t]) for f, s, t in checks[i]):
                    extend(i + 1)
            chosen[i] = None

        extend(0)
    return found


# -- serialization ------------------------------------------------------------

def _components(f: CSetMorphism) -> dict:
    return cset.morphism_to_json(f)["components"]


def to_json(D: Diagram) -> dict:
    return {
        "shape": fincat.to_json(D.shape),
        "schema": next((k for k, v in cset.SCHEMAS.items() if v == D.schema), None) or fincat.to_json(D.schema),
        "ob": {name: cset.to_json(x) for name, x in zip(D.nodes, D.ob)},
        "hom": {g.name: _components(h) for g, h in zip(D.shape.generators, D.hom)},
    }


def from_json(data: dict) -> Diagram:
    shape = fincat.from_json(data["shape"])
    ref = data["schema"]
    schema = cset.SCHEMAS[ref] if isinstance(ref, str) else fincat.from_json(ref)
    obs = tuple(cset.from_json(data["ob"][name], schema) for name in shape.objects)
    homs = tuple(
        cset.morphism_from_json({"components": data["hom"][g.name]}, obs[g.src], obs[g.tgt])
        for g in shape.generators
    )
    return Diagram(shape, obs, homs, schema)


def typed_to_json(T: TypedDiagram) -> dict:
    data = to_json(T.diagram)
    data["base"] = cset.to_json(T.base)
    data["typing"] = {name: _components(t) for name, t in zip(T.diagram.nodes, T.typing)}
    if T.observables is not None:
        data["observables"] = {name: list(o) for name, o in zip(T.diagram.nodes, T.observables) if o is not None}
    return data


def typed_from_json(data: dict) -> TypedDiagram:
    D = from_json(data)
    X = cset.from_json(data["base"], D.schema)
    typing = tuple(
        cset.morphism_from_json({"components": data["typing"][name]}, x, X) for name, x in zip(D.nodes, D.ob)
    )
    obs = None
    if "observables" in data:
        obs = tuple(tuple(data["observables"][n]) if n in data["observables"] else None for n in D.nodes)
    return TypedDiagram(D, X, typing, obs)


def morphism_to_json(m: DiagramMorphism) -> dict:
    return {
        "F": fincat.functor_to_json(m.F),
        "phi": {name: _components(p) for name, p in zip(m.dom.nodes, m.phi)},
    }


def morphism_from_json(data: dict, dom: Diagram, cod: Diagram) -> DiagramMorphism:
    F = fincat.functor_from_json(data["F"], dom.shape, cod.shape)
    phi = tuple(
        cset.morphism_from_json({"components": data["phi"][name]}, x, cod.ob[F.ob_map[i]])
        for i, (name, x) in enumerate(zip(dom.nodes, dom.ob))
    )
    return DiagramMorphism(dom, cod, F, phi)
