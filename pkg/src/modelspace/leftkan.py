"""Left Kan extensions by chase, for Set-valued and C-set-valued diagrams.

A Set-valued diagram on a finitely presented category J is the same data as a
C-set on schema J, so `CSet` doubles as the set-diagram type here. A
C-set-valued diagram over J becomes a Set-valued diagram over J x C
(`tensor_hom`), is extended along F x C by the chase, and is turned back.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import fincat
from ._unionfind import UnionFind
from .cset import CSet, CSetMorphism, IllFormedCocone, is_natural
from .diagram import Diagram, DiagramMorphism
from .fincat import FinCat, FinFunctor, Path, ProductCat

DEFAULT_ROUNDS = 1_000

SetDiagram = CSet


class ChaseBudgetExceeded(RuntimeError):
    """The chase did not saturate; the Kan extension may be infinite."""


@dataclass
class KanResult:
    """Lan_F X with its unit; provenance terms let maps out of it be built by transposition.

    A term is ("unit", j, x) for the image of x in X(j), or ("gen", k, g) for
    generator g applied to element k of the source object of g.
    """
    X: CSet
    F: FinFunctor
    lan: CSet
    unit: tuple[tuple[int, ...], ...]
    provenance: tuple[tuple[tuple, ...], ...] = field(repr=False)
    rounds: int = 0


def chase_set(X: CSet, F: FinFunctor, budget: int = DEFAULT_ROUNDS,
              inherit_labels: Sequence[int] = ()) -> KanResult:
    """Left Kan extension of the set diagram X along F by a round-robin chase.

    Each round first gives every element its missing generator images (fresh
    elements), then merges elements forced equal by the equations of the
    codomain and by naturality of the unit, closing under congruence.
    Elements created along a generator in `inherit_labels` keep their parent's label.
    """
    J, I = F.dom, F.cod
    if X.schema != J:
        raise ValueError("set diagram is not over the functor's domain")
    obj: list[int] = []
    prov: list[tuple] = []
    uf = UnionFind()
    out_of = [I.out_generators(i) for i in range(len(I.objects))]
    act: list[dict[int, int]] = [dict() for _ in I.generators]

    def new(i, term):
        obj.append(i)
        prov.append(term)
        return uf.add()

    unit = [[new(F.ob_map[j], ("unit", j, x)) for x in range(X.parts[j])] for j in range(len(J.objects))]

    def merge(a, b) -> bool:
        merged = False
        queue = [(a, b)]
        while queue:
            a, b = queue.pop()
            ra, rb = uf.find(a), uf.find(b)
            if ra == rb:
                continue
            uf.union(ra, rb)
            merged = True
            keep, gone = (ra, rb) if uf.find(ra) == ra else (rb, ra)
            for g in out_of[obj[keep]]:
                t = act[g].pop(gone, None)
                if t is None:
                    continue
                if keep in act[g]:
                    queue.append((act[g][keep], t))
                else:
                    act[g][keep] = t
        return merged

    def follow(e, p: Path):
        for g in p.gens:
            r = uf.find(e)
            if r not in act[g]:
                return None
            e = act[g][r]
        return uf.find(e)

    fpaths = [F.gen_map[f] for f in range(len(J.generators))]
    for rounds in range(1, budget + 1):
        changed = False
        for g, gen in enumerate(I.generators):
            for e in [e for e in range(len(obj)) if obj[e] == gen.src and uf.find(e) == e]:
                if e not in act[g]:
                    act[g][e] = new(gen.tgt, ("gen", e, g))
                    changed = True
        while True:
            merged = False
            for f, gen in enumerate(J.generators):
                for x in range(X.parts[gen.src]):
                    b = follow(unit[gen.src][x], fpaths[f])
                    if b is not None and merge(unit[gen.tgt][X.actions[f][x]], b):
                        merged = True
            for lhs, rhs in I.equations:
                for e in [e for e in range(len(obj)) if obj[e] == lhs.src and uf.find(e) == e]:
                    a, b = follow(e, lhs), follow(e, rhs)
                    if a is not None and b is not None and merge(a, b):
                        merged = True
            if not merged:
                break
            changed = True
        if not changed:
            break
    else:
        raise ChaseBudgetExceeded(f"chase did not saturate within {budget} rounds")

    # renumber classes densely per object, in order of their least member
    index: dict[int, int] = {}
    per_obj: list[list[int]] = [[] for _ in I.objects]
    for e in range(len(obj)):
        if uf.find(e) == e:
            index[e] = len(per_obj[obj[e]])
            per_obj[obj[e]].append(e)
    maps = tuple(
        tuple(index[uf.find(act[g][r])] for r in per_obj[gen.src]) for g, gen in enumerate(I.generators)
    )
    provenance = []
    for reps in per_obj:
        terms = []
        for r in reps:
            term = prov[r]
            if term[0] == "gen":
                term = ("gen", index[uf.find(term[1])], term[2])
            terms.append(term)
        provenance.append(tuple(terms))

    labels = None
    if X.labels is not None:
        inherit = set(inherit_labels)
        memo: dict[tuple[int, int], str] = {}

        def label(i, k):
            if (i, k) not in memo:
                term = provenance[i][k]
                if term[0] == "unit":
                    memo[(i, k)] = X.label(term[1], term[2])
                else:
                    g = term[2]
                    parent = label(I.generators[g].src, term[1])
                    memo[(i, k)] = parent if g in inherit else f"{I.generators[g].name}({parent})"
            return memo[(i, k)]

        labels = tuple(tuple(label(i, k) for k in range(len(t))) for i, t in enumerate(provenance))
    lan = CSet(I, tuple(len(r) for r in per_obj), maps, labels)
    unit_maps = tuple(tuple(index[uf.find(e)] for e in u) for u in unit)
    return KanResult(X, F, lan, unit_maps, tuple(provenance), rounds)


def transpose(kan: KanResult, target: CSet, cocone: Sequence[Sequence[int]]) -> CSetMorphism:
    """The map Lan_F X -> target corresponding to a natural family X(j) -> target(F j)."""
    I = kan.F.cod
    if target.schema != I:
        raise ValueError("target is not a set diagram over the Kan extension's codomain")
    values: list[list[int | None]] = [[None] * n for n in kan.lan.parts]

    def value(i, k):
        v = values[i][k]
        if v is None:
            term = kan.provenance[i][k]
            if term[0] == "unit":
                v = cocone[term[1]][term[2]]
            else:
                g = term[2]
                v = target.actions[g][value(I.generators[g].src, term[1])]
            values[i][k] = v
        return v

    comps = tuple(tuple(value(i, k) for k in range(n)) for i, n in enumerate(kan.lan.parts))
    try:
        h = CSetMorphism(kan.lan, target, comps)
    except ValueError as exc:
        raise IllFormedCocone(str(exc)) from None
    if not is_natural(h):
        raise IllFormedCocone("cocone is not natural: transpose is not well defined")
    for j, u in enumerate(kan.unit):
        i = kan.F.ob_map[j]
        if any(comps[i][u[x]] != cocone[j][x] for x in range(len(u))):
            raise IllFormedCocone("cocone is not natural: transpose does not restrict to it")
    return h


# -- C-set valued diagrams ----------------------------------------------------

def tensor_hom(D: Diagram, prod: ProductCat | None = None) -> tuple[CSet, ProductCat]:
    """View a diagram J -> C-Set as a set diagram over J x C."""
    C = D.schema
    if prod is None:
        prod = fincat.product([D.shape, C])
    sizes = [D.ob[j].parts[c] for j, c in prod.tuples]
    maps = []
    for k, g, (j, c) in prod.gen_info:
        maps.append(D.hom[g].components[c] if k == 0 else D.ob[j].actions[g])
    labels = None
    if all(x.labels is not None for x in D.ob):
        labels = tuple(D.ob[j].labels[c] for j, c in prod.tuples)
    return CSet(prod.apex, tuple(sizes), tuple(maps), labels), prod


def tensor_hom_inverse(X: CSet, prod: ProductCat) -> Diagram:
    J, C = prod.factors
    nc = len(C.objects)
    obs = []
    for j in range(len(J.objects)):
        parts = [X.parts[prod.ob_index((j, c))] for c in range(nc)]
        acts = [X.actions[prod.gen_index(1, g, (j, gen.src))] for g, gen in enumerate(C.generators)]
        labels = None
        if X.labels is not None:
            labels = tuple(X.labels[prod.ob_index((j, c))] for c in range(nc))
        obs.append(CSet(C, tuple(parts), tuple(acts), labels))
    homs = []
    for f, gen in enumerate(J.generators):
        comps = [X.actions[prod.gen_index(0, f, (gen.src, c))] for c in range(nc)]
        homs.append(CSetMorphism(obs[gen.src], obs[gen.tgt], tuple(comps)))
    return Diagram(J, tuple(obs), tuple(homs), C)


def _times_schema(F: FinFunctor, pJ: ProductCat, pI: ProductCat) -> FinFunctor:
    """F x id_C as a functor J x C -> I x C."""
    ob_map = tuple(pI.ob_index((F.ob_map[j], c)) for j, c in pJ.tuples)
    gen_map = []
    for k, g, (j, c) in pJ.gen_info:
        if k == 0:
            gen_map.append(pI.lift(0, F.gen_map[g], (F.ob_map[j], c)))
        else:
            gi = pI.gen_index(1, g, (F.ob_map[j], c))
            gen = pI.apex.generators[gi]
            gen_map.append(Path(gen.src, gen.tgt, (gi,)))
    return FinFunctor(pJ.apex, pI.apex, ob_map, tuple(gen_map), verified=True)


@dataclass
class CSetKan:
    diagram: Diagram
    unit: DiagramMorphism
    kan: KanResult
    prod_dom: ProductCat = field(repr=False)
    prod_cod: ProductCat = field(repr=False)


def leftkan_cset(D: Diagram, F: FinFunctor, budget: int = DEFAULT_ROUNDS) -> CSetKan:
    """Lan_F D for a diagram of C-sets, via the set-level chase over J x C."""
    if F.dom != D.shape:
        raise ValueError("functor domain must be the diagram's shape")
    C = D.schema
    Xp, pJ = tensor_hom(D)
    pI = fincat.product([F.cod, C])
    Fp = _times_schema(F, pJ, pI)
    shape_moves = [i for i, (k, _, _) in enumerate(pI.gen_info) if k == 0]
    kan = chase_set(Xp, Fp, budget, inherit_labels=shape_moves)
    lan = tensor_hom_inverse(kan.lan, pI)
    phi = []
    for j in range(len(D.shape.objects)):
        comps = [kan.unit[pJ.ob_index((j, c))] for c in range(len(C.objects))]
        phi.append(CSetMorphism(D.ob[j], lan.ob[F.ob_map[j]], tuple(comps)))
    unit = DiagramMorphism(D, lan, F, tuple(phi))
    return CSetKan(lan, unit, kan, pJ, pI)


def transpose_cset(ck: CSetKan, target: Diagram, cocone: Sequence[CSetMorphism]) -> DiagramMorphism:
    """The map Lan_F D -> target (identity shape map) induced by a natural family D(j) -> target(F j)."""
    I, C = ck.diagram.shape, ck.diagram.schema
    if target.shape != I:
        raise ValueError("target must be a diagram over the codomain shape")
    T, _ = tensor_hom(target, ck.prod_cod)
    pJ, pI = ck.prod_dom, ck.prod_cod
    flat = [cocone[j].components[c] for j, c in pJ.tuples]
    h = transpose(ck.kan, T, flat)
    phi = []
    for i in range(len(I.objects)):
        comps = [h.components[pI.ob_index((i, c))] for c in range(len(C.objects))]
        phi.append(CSetMorphism(ck.diagram.ob[i], target.ob[i], tuple(comps)))
    return DiagramMorphism(ck.diagram, target, FinFunctor.identity(I), tuple(phi))


def kan_to_json(kan: KanResult) -> dict:
    return {
        "lan": {"parts": list(kan.lan.parts), "maps": [list(m) for m in kan.lan.actions]},
        "unit": [list(u) for u in kan.unit],
        "provenance": [[list(t) for t in terms] for terms in kan.provenance],
        "rounds": kan.rounds,
    }
