"""Slow, obviously-correct reference computations used to check the library."""
from __future__ import annotations

import itertools
import random

from modelspace.cset import CSet, CSetMorphism
from modelspace.fincat import FinCat, FinFunctor, Generator, Path


def all_functions(n: int, m: int):
    return itertools.product(range(m), repeat=n)


def brute_homs(x: CSet, y: CSet) -> list[tuple]:
    """Every tuple of component functions, kept when natural; returns component tuples."""
    C = x.schema
    found = []
    for comps in itertools.product(*(list(all_functions(x.parts[c], y.parts[c])) for c in range(len(C.objects)))):
        if all(comps[g.tgt][x.actions[k][e]] == y.actions[k][comps[g.src][e]]
               for k, g in enumerate(C.generators) for e in range(x.parts[g.src])):
            found.append(tuple(tuple(c) for c in comps))
    return found


class Find:
    def __init__(self):
        self.parent = {}

    def __call__(self, a):
        self.parent.setdefault(a, a)
        while self.parent[a] != a:
            a = self.parent[a]
        return a

    def join(self, a, b):
        self.parent[self(a)] = self(b)


# morphisms of a presented category that is either free and acyclic, or a poset

def morphisms(I: FinCat, a: int, b: int, poset: bool) -> list[tuple]:
    """Canonical forms of all morphisms a -> b."""
    if poset:
        return [("le", a, b)] if reachable(I, a, b) else []
    out = []

    def walk(o, gens):
        if o == b:
            out.append(tuple(gens))
        for k, g in enumerate(I.generators):
            if g.src == o:
                walk(g.tgt, gens + [k])

    walk(a, [])
    return out


def reachable(I: FinCat, a: int, b: int) -> bool:
    seen, todo = {a}, [a]
    while todo:
        o = todo.pop()
        for g in I.generators:
            if g.src == o and g.tgt not in seen:
                seen.add(g.tgt)
                todo.append(g.tgt)
    return b in seen


def normal(p: Path, poset: bool) -> tuple:
    return ("le", p.src, p.tgt) if poset else tuple(p.gens)


def then(p: tuple, q: tuple, poset: bool) -> tuple:
    return ("le", p[1], q[2]) if poset else p + q


def lan_sizes(X: CSet, F: FinFunctor, poset: bool) -> list[int]:
    """|Lan_F X (i)| as the colimit of X over the comma category F / i."""
    J, I = F.dom, F.cod
    sizes = []
    for i in range(len(I.objects)):
        uf = Find()
        elems = []
        for j in range(len(J.objects)):
            for p in morphisms(I, F.ob_map[j], i, poset):
                for x in range(X.parts[j]):
                    elems.append((j, p, x))
                    uf(elems[-1])
        for k, f in enumerate(J.generators):
            Ff = normal(F.gen_map[k], poset)
            for q in morphisms(I, F.ob_map[f.tgt], i, poset):
                p = then(Ff, q, poset)
                for x in range(X.parts[f.src]):
                    uf.join((f.src, p, x), (f.tgt, q, X.actions[k][x]))
        sizes.append(len({uf(e) for e in elems}))
    return sizes


def restrict(Y: CSet, F: FinFunctor) -> CSet:
    """F*Y = Y o F, a set diagram over the domain of F."""
    J = F.dom
    parts = [Y.parts[F.ob_map[j]] for j in range(len(J.objects))]
    acts = [tuple(Y.apply(F.gen_map[k], e) for e in range(Y.parts[F.ob_map[g.src]]))
            for k, g in enumerate(J.generators)]
    return CSet(J, tuple(parts), tuple(acts))


# random small instances

def random_codomain(rng: random.Random) -> tuple[FinCat, bool]:
    """A free acyclic category or a three-object poset, at most three objects."""
    n = rng.randint(1, 3)
    if n == 3 and rng.random() < 0.4:
        gens = (Generator("a", 0, 1), Generator("b", 1, 2), Generator("c", 0, 2))
        return FinCat(("0", "1", "2"), gens, ((Path(0, 2, (0, 1)), Path(0, 2, (2,))),)), True
    gens = []
    for k in range(rng.randint(0, 3)):
        a = rng.randrange(n)
        b = rng.randrange(a, n)
        if a == b:
            continue
        gens.append(Generator(f"g{k}", a, b))
    return FinCat(tuple(str(i) for i in range(n)), tuple(gens)), False


def random_functor(rng: random.Random, I: FinCat, poset: bool, tries: int = 50) -> FinFunctor | None:
    for _ in range(tries):
        m = rng.randint(1, 3)
        ob_map = [rng.randrange(len(I.objects)) for _ in range(m)]
        gens, images = [], []
        for k in range(rng.randint(0, 3)):
            s, t = rng.randrange(m), rng.randrange(m)
            paths = I.paths(ob_map[s], ob_map[t], 2)
            if not paths:
                continue
            gens.append(Generator(f"f{k}", s, t))
            images.append(rng.choice(paths))
        J = FinCat(tuple(f"j{i}" for i in range(m)), tuple(gens))
        return FinFunctor(J, I, tuple(ob_map), tuple(images))
    return None


def random_cset(rng: random.Random, C: FinCat, max_size: int = 4, tries: int = 200) -> CSet:
    """Random instance satisfying the equations of C (rejection sampling)."""
    from modelspace.cset import validate

    for _ in range(tries):
        parts = [rng.randint(0, max_size) for _ in C.objects]
        acts = []
        ok = True
        for g in C.generators:
            if parts[g.src] and not parts[g.tgt]:
                ok = False
                break
            acts.append(tuple(rng.randrange(parts[g.tgt]) for _ in range(parts[g.src])))
        if not ok:
            continue
        x = CSet(C, tuple(parts), tuple(acts))
        if not validate(x):
            return x
    return CSet(C, (0,) * len(C.objects), tuple(() for _ in C.generators))


def pointwise_pullback(f: CSetMorphism, g: CSetMorphism) -> list[set]:
    """Per schema object, the set of pairs (a, b) with f(a) = g(b)."""
    return [
        {(a, b) for a in range(f.dom.parts[c]) for b in range(g.dom.parts[c])
         if f.components[c][a] == g.components[c][b]}
        for c in range(len(f.dom.parts))
    ]
