"""Finitely presented categories: graphs of generators modulo path equations.

Identities are implicit, so a path is a source object plus a (possibly empty)
sequence of generator indices, composed left to right.
"""
from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ._unionfind import UnionFind

DEFAULT_BUDGET = 10_000


class NonFreeCodomain(ValueError):
    """Equalizers are only computed for functors into free categories."""


class PathEq(enum.Enum):
    EQUAL = "equal"
    DISTINCT = "distinct"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Generator:
    name: str
    src: int
    tgt: int


@dataclass(frozen=True)
class Path:
    src: int
    tgt: int
    gens: tuple[int, ...] = ()

    def __len__(self):
        return len(self.gens)

    @staticmethod
    def id(ob: int) -> "Path":
        return Path(ob, ob, ())


@dataclass(frozen=True)
class FinCat:
    objects: tuple[str, ...]
    generators: tuple[Generator, ...] = ()
    equations: tuple[tuple[Path, Path], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "equations", tuple(tuple(e) for e in self.equations))
        n = len(self.objects)
        if len(set(self.objects)) != n:
            raise ValueError("object names must be unique")
        if len({g.name for g in self.generators}) != len(self.generators):
            raise ValueError("generator names must be unique")
        for g in self.generators:
            if not (0 <= g.src < n and 0 <= g.tgt < n):
                raise ValueError(f"generator {g.name} has endpoints out of range")
        for lhs, rhs in self.equations:
            self.check_path(lhs)
            self.check_path(rhs)
            if (lhs.src, lhs.tgt) != (rhs.src, rhs.tgt):
                raise ValueError(f"equation sides have different endpoints: {lhs} {rhs}")

    # -- lookup ---------------------------------------------------------
    def ob(self, name: str) -> int:
        return self.objects.index(name)

    def gen(self, name: str) -> int:
        for i, g in enumerate(self.generators):
            if g.name == name:
                return i
        raise KeyError(name)

    @property
    def is_free(self) -> bool:
        return not self.equations

    def check_path(self, p: Path) -> None:
        n = len(self.objects)
        if not (0 <= p.src < n and 0 <= p.tgt < n):
            raise ValueError(f"path endpoints out of range: {p}")
        at = p.src
        for i in p.gens:
            g = self.generators[i]
            if g.src != at:
                raise ValueError(f"path {p} is not composable at generator {g.name}")
            at = g.tgt
        if at != p.tgt:
            raise ValueError(f"path {p} does not end at its stated target")

    def path(self, *gens, src=None) -> Path:
        """Build a path from generator names or indices; `src` is needed when empty."""
        idx = tuple(self.gen(g) if isinstance(g, str) else g for g in gens)
        if not idx:
            if src is None:
                raise ValueError("an empty path needs a source object")
            ob = self.ob(src) if isinstance(src, str) else src
            return Path.id(ob)
        p = Path(self.generators[idx[0]].src, self.generators[idx[-1]].tgt, idx)
        self.check_path(p)
        return p

    def compose(self, p: Path, q: Path) -> Path:
        if p.tgt != q.src:
            raise ValueError(f"cannot compose {p} with {q}")
        return Path(p.src, q.tgt, p.gens + q.gens)

    def out_generators(self, ob: int) -> list[int]:
        return [i for i, g in enumerate(self.generators) if g.src == ob]

    def paths(self, a: int, b: int, max_len: int) -> list[Path]:
        """All paths a -> b of length at most `max_len`, shortest first."""
        found = []
        frontier = [Path.id(a)]
        for _ in range(max_len + 1):
            found.extend(p for p in frontier if p.tgt == b)
            frontier = [
                Path(p.src, self.generators[i].tgt, p.gens + (i,))
                for p in frontier
                for i in self.out_generators(p.tgt)
            ]
        return found

    def __repr__(self):
        gens = ", ".join(
            f"{g.name}:{self.objects[g.src]}->{self.objects[g.tgt]}" for g in self.generators
        )
        return f"FinCat(objects={list(self.objects)}, generators=[{gens}], equations={len(self.equations)})"


# -- word problem -------------------------------------------------------------

def _rewrites(cat: FinCat, src: int, word: tuple[int, ...]):
    """All words reachable from `word` by one application of an equation, either direction."""
    gens = cat.generators
    obs_at = [src] + [gens[i].tgt for i in word]
    for lhs, rhs in cat.equations:
        for a, b in ((lhs, rhs), (rhs, lhs)):
            k = len(a.gens)
            if k == 0:
                for pos, ob in enumerate(obs_at):
                    if ob == a.src:
                        yield word[:pos] + b.gens + word[pos:]
            else:
                for pos in range(len(word) - k + 1):
                    if word[pos:pos + k] == a.gens:
                        yield word[:pos] + b.gens + word[pos + k:]


def path_equal(cat: FinCat, p: Path, q: Path, budget: int = DEFAULT_BUDGET) -> PathEq:
    """Decide p == q modulo the equations by bidirectional rewrite search.

    Returns UNKNOWN when `budget` node expansions are spent without meeting or
    exhausting either equivalence class.
    """
    if (p.src, p.tgt) != (q.src, q.tgt):
        raise ValueError(f"paths have different endpoints: {p} {q}")
    if p.gens == q.gens:
        return PathEq.EQUAL
    if cat.is_free:
        return PathEq.DISTINCT
    seen = [{p.gens}, {q.gens}]
    frontier = [deque([p.gens]), deque([q.gens])]
    spent = 0
    while frontier[0] and frontier[1]:
        side = 0 if len(frontier[0]) <= len(frontier[1]) else 1
        if spent >= budget:
            return PathEq.UNKNOWN
        word = frontier[side].popleft()
        spent += 1
        for nxt in _rewrites(cat, p.src, word):
            if nxt in seen[1 - side]:
                return PathEq.EQUAL
            if nxt not in seen[side]:
                seen[side].add(nxt)
                frontier[side].append(nxt)
    return PathEq.DISTINCT


# -- functors -----------------------------------------------------------------

@dataclass(frozen=True)
class FinFunctor:
    dom: FinCat
    cod: FinCat
    ob_map: tuple[int, ...]
    gen_map: tuple[Path, ...]
    # None: not checked; True: equations verified; False: undecided within budget
    verified: bool | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ob_map", tuple(self.ob_map))
        object.__setattr__(self, "gen_map", tuple(self.gen_map))
        if len(self.ob_map) != len(self.dom.objects) or len(self.gen_map) != len(self.dom.generators):
            raise ValueError("functor maps have the wrong length")
        for g, img in zip(self.dom.generators, self.gen_map):
            self.cod.check_path(img)
            if (img.src, img.tgt) != (self.ob_map[g.src], self.ob_map[g.tgt]):
                raise ValueError(f"image of generator {g.name} has the wrong endpoints")
        if self.verified is None:
            object.__setattr__(self, "verified", self._check_equations(DEFAULT_BUDGET))

    def _check_equations(self, budget: int) -> bool:
        ok = True
        for lhs, rhs in self.dom.equations:
            verdict = path_equal(self.cod, self(lhs), self(rhs), budget)
            if verdict is PathEq.DISTINCT:
                raise ValueError(f"functor does not preserve equation {lhs} = {rhs}")
            ok = ok and verdict is PathEq.EQUAL
        return ok

    def __call__(self, p: Path) -> Path:
        gens: tuple[int, ...] = ()
        for i in p.gens:
            gens += self.gen_map[i].gens
        return Path(self.ob_map[p.src], self.ob_map[p.tgt], gens)

    def then(self, other: "FinFunctor") -> "FinFunctor":
        if other.dom != self.cod:
            raise ValueError("functors are not composable")
        return FinFunctor(
            self.dom, other.cod,
            tuple(other.ob_map[o] for o in self.ob_map),
            tuple(other(p) for p in self.gen_map),
            verified=bool(self.verified and other.verified),
        )

    @staticmethod
    def identity(cat: FinCat) -> "FinFunctor":
        return FinFunctor(
            cat, cat, tuple(range(len(cat.objects))),
            tuple(Path(g.src, g.tgt, (i,)) for i, g in enumerate(cat.generators)),
            verified=True,
        )

    def equal(self, other: "FinFunctor", budget: int = DEFAULT_BUDGET) -> PathEq:
        """Compare as functors: object maps and generator images up to path equality."""
        if self.dom != other.dom or self.cod != other.cod or self.ob_map != other.ob_map:
            return PathEq.DISTINCT
        verdict = PathEq.EQUAL
        for p, q in zip(self.gen_map, other.gen_map):
            v = path_equal(self.cod, p, q, budget)
            if v is PathEq.DISTINCT:
                return v
            if v is PathEq.UNKNOWN:
                verdict = v
        return verdict


def enumerate_functors(dom: FinCat, cod: FinCat, max_len: int = 3) -> list[FinFunctor]:
    """Brute-force all functors dom -> cod with generator images of length <= max_len.

    Images are taken up to path equality in `cod` (one representative each).
    """
    n, m = len(dom.objects), len(cod.objects)
    reps: dict[tuple[int, int], list[Path]] = {}

    def classes(a, b):
        if (a, b) not in reps:
            out: list[Path] = []
            for p in cod.paths(a, b, max_len):
                if all(path_equal(cod, p, q) is not PathEq.EQUAL for q in out):
                    out.append(p)
            reps[(a, b)] = out
        return reps[(a, b)]

    found = []
    for obs in itertools.product(range(m), repeat=n):
        choices = [classes(obs[g.src], obs[g.tgt]) for g in dom.generators]
        for imgs in itertools.product(*choices):
            try:
                found.append(FinFunctor(dom, cod, obs, imgs))
            except ValueError:
                continue
    return found


# -- constructors -------------------------------------------------------------

def terminal() -> FinCat:
    return FinCat(("*",))


def empty() -> FinCat:
    return FinCat(())


def discrete(names: Sequence[str] | int) -> FinCat:
    if isinstance(names, int):
        names = [str(i) for i in range(names)]
    return FinCat(tuple(names))


def path_shape(names: Sequence[str] | int) -> FinCat:
    """The free category on a chain of objects, e.g. path_shape(2) is the arrow category."""
    if isinstance(names, int):
        names = [str(i) for i in range(names)]
    gens = [Generator(f"{a}->{b}", i, i + 1) for i, (a, b) in enumerate(zip(names, names[1:]))]
    return FinCat(tuple(names), tuple(gens))


def free_loop() -> FinCat:
    return FinCat(("*",), (Generator("loop", 0, 0),))


def relabel(cat: FinCat, names: dict[str, str]) -> FinCat:
    """Rename objects; generators named `src->tgt` after their endpoints follow along."""
    objects = tuple(names.get(o, o) for o in cat.objects)
    gens = []
    for g in cat.generators:
        name = g.name
        if name == f"{cat.objects[g.src]}->{cat.objects[g.tgt]}":
            name = f"{objects[g.src]}->{objects[g.tgt]}"
        gens.append(Generator(name, g.src, g.tgt))
    return FinCat(objects, tuple(gens), cat.equations)


# -- (co)limits ---------------------------------------------------------------

@dataclass
class Cone:
    """Apex plus legs: projections for limits, inclusions for colimits."""
    apex: FinCat
    legs: list[FinFunctor]

    def __iter__(self):
        return iter((self.apex, self.legs))


@dataclass
class ProductCat(Cone):
    factors: list[FinCat] = field(default_factory=list)
    tuples: list[tuple[int, ...]] = field(default_factory=list)
    # per product generator: (factor, factor generator, object tuple at its source)
    gen_info: list[tuple[int, int, tuple[int, ...]]] = field(default_factory=list)
    _ob_index: dict = field(default_factory=dict, repr=False)
    _gen_index: dict = field(default_factory=dict, repr=False)

    def ob_index(self, obs: Sequence[int]) -> int:
        return self._ob_index[tuple(obs)]

    def ob_tuple(self, i: int) -> tuple[int, ...]:
        return self.tuples[i]

    def gen_index(self, k: int, g: int, obs: Sequence[int]) -> int:
        """Product generator moving factor k along g, other coordinates as in `obs`."""
        obs = list(obs)
        obs[k] = self.factors[k].generators[g].src
        return self._gen_index[(k, g, tuple(obs))]

    def lift(self, k: int, p: Path, obs: Sequence[int]) -> Path:
        """Lift a path of factor k to the product, holding the other coordinates at `obs`."""
        obs = list(obs)
        obs[k] = p.src
        src = self.ob_index(obs)
        gens = []
        for g in p.gens:
            gens.append(self.gen_index(k, g, obs))
            obs[k] = self.factors[k].generators[g].tgt
        return Path(src, self.ob_index(obs), tuple(gens))


def product(cats: Sequence[FinCat]) -> ProductCat:
    """Product presentation: lifted generators, lifted equations and interchange squares."""
    if not cats:
        raise ValueError("product needs at least one factor")
    tuples = list(itertools.product(*[range(len(c.objects)) for c in cats]))
    ob_index = {t: i for i, t in enumerate(tuples)}
    objects = tuple("(" + ",".join(c.objects[o] for c, o in zip(cats, t)) + ")" for t in tuples)

    gens, info, gen_index = [], [], {}
    for k, cat in enumerate(cats):
        for gi, g in enumerate(cat.generators):
            for t in tuples:
                if t[k] != g.src:
                    continue
                tgt = t[:k] + (g.tgt,) + t[k + 1:]
                name = "(" + ",".join(
                    g.name if j == k else c.objects[o] for j, (c, o) in enumerate(zip(cats, t))
                ) + ")"
                gen_index[(k, gi, t)] = len(gens)
                info.append((k, gi, t))
                gens.append(Generator(name, ob_index[t], ob_index[tgt]))

    prod = ProductCat(FinCat(objects, tuple(gens)), [], list(cats), tuples, info, ob_index, gen_index)
    eqs = []
    for k, cat in enumerate(cats):
        for lhs, rhs in cat.equations:
            for t in tuples:
                if t[k] == lhs.src:
                    eqs.append((prod.lift(k, lhs, t), prod.lift(k, rhs, t)))
    for k1, k2 in itertools.combinations(range(len(cats)), 2):
        for (i1, g1), (i2, g2) in itertools.product(enumerate(cats[k1].generators),
                                                   enumerate(cats[k2].generators)):
            for t in tuples:
                if t[k1] != g1.src or t[k2] != g2.src:
                    continue
                first = prod.gen_index(k1, i1, t)
                t1 = list(t)
                t1[k1] = g1.tgt
                second = prod.gen_index(k2, i2, t1)
                first_b = prod.gen_index(k2, i2, t)
                t2 = list(t)
                t2[k2] = g2.tgt
                second_b = prod.gen_index(k1, i1, t2)
                src = ob_index[t]
                t1[k2] = g2.tgt
                tgt = ob_index[tuple(t1)]
                eqs.append((Path(src, tgt, (first, second)), Path(src, tgt, (first_b, second_b))))
    prod.apex = FinCat(objects, tuple(gens), tuple(eqs))
    for k, cat in enumerate(cats):
        gen_map = []
        for kk, gi, t in info:
            if kk == k:
                g = cat.generators[gi]
                gen_map.append(Path(g.src, g.tgt, (gi,)))
            else:
                gen_map.append(Path.id(t[k]))
        prod.legs.append(FinFunctor(prod.apex, cat, tuple(t[k] for t in tuples), tuple(gen_map),
                                    verified=True))
    return prod


def equalizer(functors: Sequence[FinFunctor]) -> Cone:
    """Equalizer of parallel functors into a free category: the subgraph where they agree."""
    if not functors:
        raise ValueError("equalizer needs at least one functor")
    A, B = functors[0].dom, functors[0].cod
    if any(f.dom != A or f.cod != B for f in functors):
        raise ValueError("functors must be parallel")
    if not B.is_free:
        raise NonFreeCodomain("equalizers are only supported for free codomains")
    keep_ob = [a for a in range(len(A.objects)) if len({f.ob_map[a] for f in functors}) == 1]
    ob_new = {a: i for i, a in enumerate(keep_ob)}
    keep_gen = [
        i for i, g in enumerate(A.generators)
        if g.src in ob_new and g.tgt in ob_new and len({f.gen_map[i] for f in functors}) == 1
    ]
    gen_new = {g: i for i, g in enumerate(keep_gen)}

    def restrict(p: Path) -> Path | None:
        if p.src not in ob_new or any(g not in gen_new for g in p.gens):
            return None
        return Path(ob_new[p.src], ob_new[p.tgt], tuple(gen_new[g] for g in p.gens))

    eqs = []
    for lhs, rhs in A.equations:
        pl, pr = restrict(lhs), restrict(rhs)
        if pl is not None and pr is not None:
            eqs.append((pl, pr))
    E = FinCat(
        tuple(A.objects[a] for a in keep_ob),
        tuple(Generator(A.generators[i].name, ob_new[A.generators[i].src], ob_new[A.generators[i].tgt])
              for i in keep_gen),
        tuple(eqs),
    )
    incl = FinFunctor(
        E, A, tuple(keep_ob),
        tuple(Path(A.generators[i].src, A.generators[i].tgt, (i,)) for i in keep_gen),
    )
    return Cone(E, [incl])


def _disjoint_names(groups: Sequence[Sequence[str]]) -> list[list[str]]:
    counts: dict[str, int] = {}
    for names in groups:
        for n in names:
            counts[n] = counts.get(n, 0) + 1
    return [[n if counts[n] == 1 else f"in{k}_{n}" for n in names] for k, names in enumerate(groups)]


def coproduct(cats: Sequence[FinCat]) -> Cone:
    """Disjoint union. Names clashing between summands get an `in<k>_` prefix."""
    ob_names = _disjoint_names([c.objects for c in cats])
    gen_names = _disjoint_names([[g.name for g in c.generators] for c in cats])
    objects, gens, eqs, offsets = [], [], [], []
    for k, c in enumerate(cats):
        ob_off, gen_off = len(objects), len(gens)
        offsets.append((ob_off, gen_off))
        objects.extend(ob_names[k])
        gens.extend(Generator(n, g.src + ob_off, g.tgt + ob_off) for n, g in zip(gen_names[k], c.generators))
        for lhs, rhs in c.equations:
            eqs.append(tuple(
                Path(p.src + ob_off, p.tgt + ob_off, tuple(i + gen_off for i in p.gens)) for p in (lhs, rhs)
            ))
    apex = FinCat(tuple(objects), tuple(gens), tuple(eqs))
    legs = []
    for c, (ob_off, gen_off) in zip(cats, offsets):
        legs.append(FinFunctor(
            c, apex, tuple(o + ob_off for o in range(len(c.objects))),
            tuple(Path(g.src + ob_off, g.tgt + ob_off, (i + gen_off,)) for i, g in enumerate(c.generators)),
            verified=True,
        ))
    return Cone(apex, legs)


def coequalizer(functors: Sequence[FinFunctor]) -> Cone:
    """Quotient objects of the codomain and add one equation per disagreeing generator image."""
    if not functors:
        raise ValueError("coequalizer needs at least one functor")
    A, B = functors[0].dom, functors[0].cod
    if any(f.dom != A or f.cod != B for f in functors):
        raise ValueError("functors must be parallel")
    uf = UnionFind(len(B.objects))
    for a in range(len(A.objects)):
        for f in functors[1:]:
            uf.union(functors[0].ob_map[a], f.ob_map[a])
    reps, cls = uf.classes()

    def move(p: Path) -> Path:
        return Path(cls[p.src], cls[p.tgt], p.gens)

    gens = tuple(Generator(g.name, cls[g.src], cls[g.tgt]) for g in B.generators)
    eqs = [tuple(move(p) for p in e) for e in B.equations]
    for gi in range(len(A.generators)):
        for f1, f2 in itertools.combinations(functors, 2):
            e = (move(f1.gen_map[gi]), move(f2.gen_map[gi]))
            if e[0] != e[1] and e not in eqs:
                eqs.append(e)
    apex = FinCat(tuple(B.objects[r] for r in reps), gens, tuple(eqs))
    H = FinFunctor(
        B, apex, tuple(cls), tuple(Path(cls[g.src], cls[g.tgt], (i,)) for i, g in enumerate(B.generators)),
    )
    return Cone(apex, [H])


def pushout(f: FinFunctor, g: FinFunctor) -> Cone:
    """Pushout of a span B <- A -> C as a coproduct followed by a coequalizer."""
    if f.dom != g.dom:
        raise ValueError("span legs must share a domain")
    co = coproduct([f.cod, g.cod])
    q = coequalizer([f.then(co.legs[0]), g.then(co.legs[1])])
    H = q.legs[0]
    return Cone(q.apex, [co.legs[0].then(H), co.legs[1].then(H)])


# -- serialization ------------------------------------------------------------

def _path_json(p: Path) -> list[int]:
    return list(p.gens)


def to_json(cat: FinCat) -> dict:
    eqs = []
    for lhs, rhs in cat.equations:
        item = [_path_json(lhs), _path_json(rhs)]
        if not lhs.gens and not rhs.gens:
            continue
        eqs.append(item)
    return {
        "objects": list(cat.objects),
        "generators": [{"name": g.name, "src": g.src, "tgt": g.tgt} for g in cat.generators],
        "equations": eqs,
    }


def from_json(data: dict) -> FinCat:
    gens = tuple(Generator(g["name"], int(g["src"]), int(g["tgt"])) for g in data.get("generators", []))

    def path(ix: Iterable[int], other: Iterable[int]) -> Path:
        ix, other = tuple(ix), tuple(other)
        if ix:
            return Path(gens[ix[0]].src, gens[ix[-1]].tgt, ix)
        ob = gens[other[0]].src
        return Path(ob, ob, ())

    eqs = tuple((path(l, r), path(r, l)) for l, r in data.get("equations", []))
    return FinCat(tuple(data["objects"]), gens, eqs)


def functor_to_json(F: FinFunctor) -> dict:
    return {
        "ob_map": list(F.ob_map),
        "gen_map": [{"src": p.src, "path": list(p.gens)} for p in F.gen_map],
    }


def functor_from_json(data: dict, dom: FinCat, cod: FinCat) -> FinFunctor:
    imgs = []
    for item in data["gen_map"]:
        gens = tuple(item["path"])
        src = int(item["src"])
        tgt = cod.generators[gens[-1]].tgt if gens else src
        imgs.append(Path(src, tgt, gens))
    return FinFunctor(dom, cod, tuple(data["ob_map"]), tuple(imgs))
