"""C-sets (copresheaves on a finitely presented schema) and their homomorphisms.

Elements of each schema object are the integers 0..n-1. Limits are computed
pointwise as filtered tuples, colimits as union-find quotients of disjoint
unions, so every (co)limit element has a canonical identity.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from . import fincat
from ._unionfind import UnionFind
from .fincat import FinCat, Generator, Path

# Named schemas usable in JSON by reference; populated by modules that define schemas.
SCHEMAS: dict[str, FinCat] = {}


class NonFunctorial(ValueError):
    """A diagram of C-sets whose morphisms do not match its shape."""


class IllFormedCocone(ValueError):
    """Cocone legs that do not agree on identified elements."""


@dataclass(frozen=True)
class CSet:
    schema: FinCat
    parts: tuple[int, ...]
    actions: tuple[tuple[int, ...], ...]
    labels: tuple[tuple[str, ...] | None, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(int(n) for n in self.parts))
        object.__setattr__(self, "actions", tuple(tuple(int(v) for v in a) for a in self.actions))
        if len(self.parts) != len(self.schema.objects) or len(self.actions) != len(self.schema.generators):
            raise ValueError("parts/actions do not match the schema")
        for g, act in zip(self.schema.generators, self.actions):
            if len(act) != self.parts[g.src]:
                raise ValueError(f"action {g.name} has length {len(act)}, expected {self.parts[g.src]}")
        if self.labels is not None:
            labels = tuple(None if l is None else tuple(l) for l in self.labels)
            object.__setattr__(self, "labels", labels)

    @classmethod
    def build(cls, schema: FinCat, parts: dict[str, int], actions: dict[str, Sequence[int]] | None = None,
              labels: dict[str, Sequence[str]] | None = None) -> "CSet":
        """Construct from name-keyed dicts; missing parts default to 0."""
        actions = actions or {}
        ps = tuple(parts.get(o, 0) for o in schema.objects)
        acts = tuple(tuple(actions.get(g.name, ())) for g in schema.generators)
        labs = None
        if labels:
            labs = tuple(tuple(labels[o]) if o in labels else None for o in schema.objects)
        return cls(schema, ps, acts, labs)

    def _ob(self, ob) -> int:
        return self.schema.ob(ob) if isinstance(ob, str) else ob

    def _gen(self, g) -> int:
        return self.schema.gen(g) if isinstance(g, str) else g

    def n(self, ob) -> int:
        return self.parts[self._ob(ob)]

    def act(self, g) -> tuple[int, ...]:
        return self.actions[self._gen(g)]

    def label(self, ob, i: int) -> str:
        ob = self._ob(ob)
        if self.labels is not None and self.labels[ob] is not None:
            return self.labels[ob][i]
        return f"{self.schema.objects[ob]}{i}"

    def names(self, ob) -> tuple[str, ...]:
        return tuple(self.label(ob, i) for i in range(self.n(ob)))

    def apply(self, p: Path, x: int) -> int:
        for g in p.gens:
            x = self.actions[g][x]
        return x

    def with_labels(self, labels) -> "CSet":
        return CSet(self.schema, self.parts, self.actions, labels)

    def __repr__(self):
        parts = ", ".join(f"{o}={n}" for o, n in zip(self.schema.objects, self.parts))
        return f"CSet({parts})"


def validate(x: CSet) -> list[str]:
    """Violations of range and equation constraints; empty when `x` is a valid instance."""
    problems = []
    for g, act in zip(x.schema.generators, x.actions):
        for e, v in enumerate(act):
            if not 0 <= v < x.parts[g.tgt]:
                problems.append(f"{g.name}({e}) = {v} is out of range for {x.schema.objects[g.tgt]}")
    if problems:
        return problems
    for k, (lhs, rhs) in enumerate(x.schema.equations):
        for e in range(x.parts[lhs.src]):
            if x.apply(lhs, e) != x.apply(rhs, e):
                problems.append(f"equation {k} fails at element {e} of {x.schema.objects[lhs.src]}")
    return problems


@dataclass(frozen=True)
class CSetMorphism:
    dom: CSet
    cod: CSet
    components: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(tuple(int(v) for v in c) for c in self.components))
        if self.dom.schema != self.cod.schema:
            raise ValueError("morphism between C-sets on different schemas")
        for o, (comp, n, m) in enumerate(zip(self.components, self.dom.parts, self.cod.parts)):
            if len(comp) != n or any(not 0 <= v < m for v in comp):
                raise ValueError(f"component {self.dom.schema.objects[o]} is not a map {n} -> {m}")

    @classmethod
    def build(cls, dom: CSet, cod: CSet, components: dict[str, Sequence[int]]) -> "CSetMorphism":
        return cls(dom, cod, tuple(tuple(components.get(o, ())) for o in dom.schema.objects))

    def __getitem__(self, ob) -> tuple[int, ...]:
        return self.components[self.dom._ob(ob)]

    def then(self, other: "CSetMorphism") -> "CSetMorphism":
        if self.cod != other.dom:
            raise ValueError("morphisms are not composable")
        return CSetMorphism(self.dom, other.cod,
                            tuple(tuple(g[v] for v in f) for f, g in zip(self.components, other.components)))

    @staticmethod
    def identity(x: CSet) -> "CSetMorphism":
        return CSetMorphism(x, x, tuple(tuple(range(n)) for n in x.parts))

    def __repr__(self):
        return f"CSetMorphism({self.dom!r} -> {self.cod!r})"


def _check_schema(f: CSetMorphism) -> None:
    if f.dom.schema != f.cod.schema:
        raise ValueError("schema mismatch")


def is_natural(f: CSetMorphism) -> bool:
    _check_schema(f)
    for g, (dact, cact) in enumerate(zip(f.dom.actions, f.cod.actions)):
        gen = f.dom.schema.generators[g]
        src, tgt = f.components[gen.src], f.components[gen.tgt]
        if any(tgt[dact[e]] != cact[src[e]] for e in range(len(dact))):
            return False
    return True


def is_mono(f: CSetMorphism) -> bool:
    _check_schema(f)
    return all(len(set(c)) == len(c) for c in f.components)


def is_epi(f: CSetMorphism) -> bool:
    return all(len(set(c)) == n for c, n in zip(f.components, f.cod.parts))


def compose_path(obs: Sequence[CSet], homs: Sequence[CSetMorphism], p: Path) -> CSetMorphism:
    """The morphism a diagram of C-sets assigns to a path in its shape."""
    out = CSetMorphism.identity(obs[p.src])
    for g in p.gens:
        out = out.then(homs[g])
    return out


def check_diagram(shape: FinCat, obs: Sequence[CSet], homs: Sequence[CSetMorphism]) -> None:
    if len(obs) != len(shape.objects) or len(homs) != len(shape.generators):
        raise NonFunctorial("diagram data does not match its shape")
    for gen, h in zip(shape.generators, homs):
        if h.dom != obs[gen.src] or h.cod != obs[gen.tgt]:
            raise NonFunctorial(f"morphism for {gen.name} has the wrong endpoints")
    for lhs, rhs in shape.equations:
        if compose_path(obs, homs, lhs) != compose_path(obs, homs, rhs):
            raise NonFunctorial(f"shape equation {lhs} = {rhs} does not hold")


# -- limits -------------------------------------------------------------------

@dataclass
class Limit:
    apex: CSet
    legs: list[CSetMorphism]
    elements: list[list[tuple[int, ...]]]
    index: list[dict[tuple[int, ...], int]] = field(repr=False)

    def factor(self, legs: Sequence[CSetMorphism]) -> CSetMorphism:
        """The unique map from a cone's apex into this limit."""
        W = legs[0].dom
        comps = []
        for c in range(len(W.parts)):
            comp = []
            for w in range(W.parts[c]):
                t = tuple(leg.components[c][w] for leg in legs)
                if t not in self.index[c]:
                    raise ValueError("legs do not form a cone over this limit")
                comp.append(self.index[c][t])
            comps.append(tuple(comp))
        return CSetMorphism(W, self.apex, tuple(comps))


def _tuple_label(obs: Sequence[CSet], c: int, t, label_from) -> str:
    return "(" + ",".join(obs[j].label(c, t[j]) for j in label_from) + ")"


def limit(shape: FinCat, obs: Sequence[CSet], homs: Sequence[CSetMorphism],
          label_from: Sequence[int] | None = None, schema: FinCat | None = None) -> Limit:
    """Pointwise limit: tuples over shape objects compatible along every shape generator.

    `label_from` selects which shape objects contribute to element labels.
    `schema` is only needed when the shape is empty.
    """
    check_diagram(shape, obs, homs)
    if not obs and schema is None:
        raise ValueError("schema required for the limit of an empty diagram")
    C = obs[0].schema if obs else schema
    J = len(shape.objects)
    label_from = list(range(J)) if label_from is None else list(label_from)
    # generators checked as soon as both endpoints are assigned
    checks = [[] for _ in range(J)]
    for gi, g in enumerate(shape.generators):
        checks[max(g.src, g.tgt)].append((gi, g.src, g.tgt))

    elements, index = [], []
    for c in range(len(C.objects)):
        found = []
        t = [0] * J

        def extend(j):
            if j == J:
                found.append(tuple(t))
                return
            for v in range(obs[j].parts[c]):
                t[j] = v
                if all(homs[gi].components[c][t[s]] == t[d] for gi, s, d in checks[j]):
                    extend(j + 1)

        extend(0)
        elements.append(found)
        index.append({e: i for i, e in enumerate(found)})

    actions = []
    for gi, g in enumerate(C.generators):
        act = []
        for t in elements[g.src]:
            img = tuple(obs[j].actions[gi][t[j]] for j in range(J))
            act.append(index[g.tgt][img])
        actions.append(tuple(act))

    labels = None
    if all(x.labels is not None for x in obs):
        labels = tuple(
            tuple(_tuple_label(obs, c, t, label_from) for t in elements[c])
            if all(obs[j].labels[c] is not None for j in label_from) else None
            for c in range(len(C.objects))
        )
    apex = CSet(C, tuple(len(e) for e in elements), tuple(actions), labels)
    legs = [
        CSetMorphism(apex, obs[j], tuple(tuple(t[j] for t in elements[c]) for c in range(len(C.objects))))
        for j in range(J)
    ]
    return Limit(apex, legs, elements, index)


def terminal(schema: FinCat) -> CSet:
    return CSet(schema, (1,) * len(schema.objects), tuple((0,) for _ in schema.generators))


def initial(schema: FinCat) -> CSet:
    return CSet(schema, (0,) * len(schema.objects), tuple(() for _ in schema.generators))


def product(xs: Sequence[CSet], schema: FinCat | None = None) -> Limit:
    return limit(fincat.discrete(len(xs)), xs, [], schema=schema)


def _parallel_shape(n: int) -> FinCat:
    return FinCat(("A", "B"), tuple(Generator(f"f{i}", 0, 1) for i in range(n)))


def equalizer(fs: Sequence[CSetMorphism]) -> Limit:
    """Equalizer of parallel morphisms; legs[0] is the inclusion into the common domain."""
    if any(f.dom != fs[0].dom or f.cod != fs[0].cod for f in fs):
        raise ValueError("morphisms must be parallel")
    return limit(_parallel_shape(len(fs)), [fs[0].dom, fs[0].cod], fs, label_from=[0])


def _cospan_shape(n: int) -> FinCat:
    return FinCat(tuple(str(i) for i in range(n)) + ("X",), tuple(Generator(f"f{i}", i, n) for i in range(n)))


def pullback(fs: Sequence[CSetMorphism]) -> Limit:
    """Wide pullback of morphisms with a common codomain; legs[i] projects to fs[i].dom."""
    X = fs[0].cod
    if any(f.cod != X for f in fs):
        raise ValueError("pullback legs must share a codomain")
    res = limit(_cospan_shape(len(fs)), [f.dom for f in fs] + [X], fs, label_from=range(len(fs)))
    return res


# -- colimits -----------------------------------------------------------------

@dataclass
class Colimit:
    apex: CSet
    legs: list[CSetMorphism]
    # per schema object: class index of each (diagram object, element) pair
    classes: list[dict[tuple[int, int], int]] = field(repr=False)

    def factor(self, legs: Sequence[CSetMorphism]) -> CSetMorphism:
        """The unique map out of this colimit induced by a cocone."""
        W = legs[0].cod
        comps = []
        for c in range(len(self.apex.parts)):
            comp = [-1] * self.apex.parts[c]
            for (j, x), k in sorted(self.classes[c].items()):
                v = legs[j].components[c][x]
                if comp[k] == -1:
                    comp[k] = v
                elif comp[k] != v:
                    raise IllFormedCocone("cocone legs disagree on an identified element")
            comps.append(tuple(comp))
        return CSetMorphism(self.apex, W, tuple(comps))


def colimit(shape: FinCat, obs: Sequence[CSet], homs: Sequence[CSetMorphism],
            schema: FinCat | None = None) -> Colimit:
    """Pointwise colimit: disjoint union per schema object modulo the shape morphisms."""
    check_diagram(shape, obs, homs)
    if not obs and schema is None:
        raise ValueError("schema required for the colimit of an empty diagram")
    C = obs[0].schema if obs else schema
    classes, reps_all = [], []
    for c in range(len(C.objects)):
        offsets = list(itertools.accumulate([0] + [x.parts[c] for x in obs]))
        uf = UnionFind(offsets[-1])
        for h, g in zip(homs, shape.generators):
            for e, v in enumerate(h.components[c]):
                uf.union(offsets[g.src] + e, offsets[g.tgt] + v)
        reps, cls = uf.classes()
        where = [(j, e) for j, x in enumerate(obs) for e in range(x.parts[c])]
        classes.append({where[i]: cls[i] for i in range(len(where))})
        reps_all.append([where[r] for r in reps])

    actions = []
    for gi, g in enumerate(C.generators):
        act = []
        for k, (j, e) in enumerate(reps_all[g.src]):
            act.append(classes[g.tgt][(j, obs[j].actions[gi][e])])
        for (j, e), k in classes[g.src].items():
            if classes[g.tgt][(j, obs[j].actions[gi][e])] != act[k]:
                raise AssertionError(f"colimit action {g.name} is not well defined")
        actions.append(tuple(act))

    labels = None
    if obs and all(x.labels is not None for x in obs):
        labels = tuple(
            tuple(obs[j].label(c, e) for j, e in reps_all[c])
            if all(x.labels[c] is not None for x in obs) else None
            for c in range(len(C.objects))
        )
    apex = CSet(C, tuple(len(r) for r in reps_all), tuple(actions), labels)
    legs = [
        CSetMorphism(x, apex, tuple(tuple(classes[c][(j, e)] for e in range(x.parts[c]))
                                    for c in range(len(C.objects))))
        for j, x in enumerate(obs)
    ]
    return Colimit(apex, legs, classes)


def coproduct(xs: Sequence[CSet], schema: FinCat | None = None) -> Colimit:
    return colimit(fincat.discrete(len(xs)), xs, [], schema=schema)


def coequalizer(fs: Sequence[CSetMorphism]) -> Colimit:
    """Coequalizer of parallel morphisms; legs[0] is the quotient map of the codomain.

    The codomain comes first in the underlying shape so that its elements represent their classes.
    """
    if any(f.dom != fs[0].dom or f.cod != fs[0].cod for f in fs):
        raise ValueError("morphisms must be parallel")
    shape = FinCat(("B", "A"), tuple(Generator(f"f{i}", 1, 0) for i in range(len(fs))))
    return colimit(shape, [fs[0].cod, fs[0].dom], fs)


def pushout(fs: Sequence[CSetMorphism]) -> Colimit:
    """Wide pushout of morphisms out of a common apex; legs[i] includes fs[i].cod, legs[-1] the apex."""
    A = fs[0].dom
    if any(f.dom != A for f in fs):
        raise ValueError("pushout legs must share a domain")
    shape = FinCat(tuple(str(i) for i in range(len(fs))) + ("A",),
                   tuple(Generator(f"f{i}", len(fs), i) for i in range(len(fs))))
    return colimit(shape, [f.cod for f in fs] + [A], fs)


# -- homomorphism search ------------------------------------------------------

def _variable_order(schema: FinCat) -> list[int]:
    """Schema objects with generator sources first, so assignments propagate forward."""
    indeg = [0] * len(schema.objects)
    for g in schema.generators:
        if g.src != g.tgt:
            indeg[g.tgt] += 1
    order, ready = [], [o for o in range(len(indeg)) if indeg[o] == 0]
    while ready:
        o = ready.pop(0)
        order.append(o)
        for g in schema.generators:
            if g.src == o and g.tgt != o:
                indeg[g.tgt] -= 1
                if indeg[g.tgt] == 0:
                    ready.append(g.tgt)
    order += [o for o in range(len(indeg)) if o not in order]
    return order


def hom_search(x: CSet, y: CSet, monic: bool = False, limit: int | None = None,
               initial: dict[str, dict[int, int]] | None = None) -> list[CSetMorphism]:
    """All homomorphisms x -> y by backtracking with forward propagation along generators.

    `initial` fixes some component values, keyed by schema object name.
    Results come in a deterministic order.
    """
    if x.schema != y.schema:
        raise ValueError("schema mismatch")
    C = x.schema
    out_gens = [[(gi, g.tgt) for gi, g in enumerate(C.generators) if g.src == c] for c in range(len(C.objects))]
    assign = [[-1] * n for n in x.parts]
    used = [set() for _ in x.parts]
    trail: list[tuple[int, int]] = []
    results: list[CSetMorphism] = []

    def put(c, e, v) -> bool:
        stack = [(c, e, v)]
        while stack:
            c, e, v = stack.pop()
            cur = assign[c][e]
            if cur != -1:
                if cur != v:
                    return False
                continue
            if monic and v in used[c]:
                return False
            assign[c][e] = v
            used[c].add(v)
            trail.append((c, e))
            for gi, d in out_gens[c]:
                stack.append((d, x.actions[gi][e], y.actions[gi][v]))
        return True

    def undo(mark):
        while len(trail) > mark:
            c, e = trail.pop()
            used[c].discard(assign[c][e])
            assign[c][e] = -1

    variables = [(c, e) for c in _variable_order(C) for e in range(x.parts[c])]

    def search(k):
        if limit is not None and len(results) >= limit:
            return
        while k < len(variables) and assign[variables[k][0]][variables[k][1]] != -1:
            k += 1
        if k == len(variables):
            results.append(CSetMorphism(x, y, tuple(tuple(a) for a in assign)))
            return
        c, e = variables[k]
        for v in range(y.parts[c]):
            mark = len(trail)
            if put(c, e, v):
                search(k + 1)
            undo(mark)

    if initial:
        for ob, fixed in initial.items():
            for e, v in fixed.items():
                if not put(C.ob(ob), e, v):
                    return []
    search(0)
    return results


def is_isomorphic(x: CSet, y: CSet) -> bool:
    if x.schema != y.schema or x.parts != y.parts:
        return False
    return bool(hom_search(x, y, monic=True, limit=1))


# -- serialization ------------------------------------------------------------

def to_json(x: CSet, schema_name: str | None = None) -> dict:
    if schema_name is None:
        schema_name = next((k for k, v in SCHEMAS.items() if v == x.schema), None)
    data = {
        "schema": schema_name if schema_name is not None else fincat.to_json(x.schema),
        "parts": {o: n for o, n in zip(x.schema.objects, x.parts)},
        "actions": {g.name: list(a) for g, a in zip(x.schema.generators, x.actions)},
    }
    if x.labels is not None:
        data["labels"] = {o: list(l) for o, l in zip(x.schema.objects, x.labels) if l is not None}
    return data


def from_json(data: dict, schema: FinCat | None = None) -> CSet:
    if schema is None:
        ref = data["schema"]
        schema = SCHEMAS[ref] if isinstance(ref, str) else fincat.from_json(ref)
    x = CSet.build(schema, data["parts"], data.get("actions"), data.get("labels"))
    problems = validate(x)
    if problems:
        raise ValueError("invalid C-set: " + "; ".join(problems))
    return x


def morphism_to_json(f: CSetMorphism) -> dict:
    return {"components": {o: list(c) for o, c in zip(f.dom.schema.objects, f.components)}}


def morphism_from_json(data: dict, dom: CSet, cod: CSet) -> CSetMorphism:
    f = CSetMorphism.build(dom, cod, data["components"])
    if not is_natural(f):
        raise ValueError("morphism is not natural")
    return f
