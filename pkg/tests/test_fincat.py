import itertools
import random

import pytest

from modelspace import fincat
from modelspace.fincat import (FinCat, FinFunctor, Generator, NonFreeCodomain, Path, PathEq,
                               enumerate_functors, path_equal)


def square() -> FinCat:
    """a -f-> b -h-> d and a -g-> c -k-> d with fh = gk."""
    gens = (Generator("f", 0, 1), Generator("g", 0, 2), Generator("h", 1, 3), Generator("k", 2, 3))
    return FinCat(("a", "b", "c", "d"), gens, ((Path(0, 3, (0, 2)), Path(0, 3, (1, 3))),))


P = fincat.path_shape(2)
Q = FinCat(("x", "y", "z"), (Generator("u", 0, 1), Generator("v", 1, 2)))


def test_validation():
    with pytest.raises(ValueError):
        FinCat(("a",), (Generator("f", 0, 1),))
    with pytest.raises(ValueError):
        FinCat(("a", "a"))
    with pytest.raises(ValueError):
        FinCat(("a", "b"), (Generator("f", 0, 1),), ((Path(0, 1, (0,)), Path(0, 0, ())),))


def test_path_equal_free():
    f = Q.path("u")
    assert path_equal(Q, f, f) is PathEq.EQUAL
    two = FinCat(("a", "b"), (Generator("f", 0, 1), Generator("g", 0, 1)))
    assert path_equal(two, two.path("f"), two.path("g")) is PathEq.DISTINCT


def test_path_equal_square():
    S = square()
    assert path_equal(S, S.path("f", "h"), S.path("g", "k")) is PathEq.EQUAL
    assert path_equal(S, S.path("g", "k"), S.path("f", "h")) is PathEq.EQUAL
    assert path_equal(S, S.path("f"), S.path("f")) is PathEq.EQUAL


def test_path_equal_endpoint_mismatch():
    with pytest.raises(ValueError):
        path_equal(Q, Q.path("u"), Q.path("v"))


def test_path_equal_unknown_on_tiny_budget():
    # idempotent loop: e.e = e, so e^5 = e, but far away under a budget of 1
    M = FinCat(("*",), (Generator("e", 0, 0),), ((Path(0, 0, (0, 0)), Path(0, 0, (0,))),))
    assert path_equal(M, Path(0, 0, (0,) * 5), Path(0, 0, (0,)), budget=10_000) is PathEq.EQUAL
    assert path_equal(M, Path(0, 0, (0,) * 5), Path(0, 0, (0,)), budget=1) is PathEq.UNKNOWN


def test_product_sizes():
    prod = fincat.product([P, Q])
    assert len(prod.apex.objects) == 6
    assert len(prod.apex.generators) == 1 * 3 + 2 * 2
    assert len(prod.apex.equations) == 2
    assert "(0,x)" in prod.apex.objects
    for leg in prod.legs:
        assert leg.verified


def test_grid_cell():
    prod = fincat.product([P, P])
    G = prod.apex
    assert (len(G.objects), len(G.generators), len(G.equations)) == (4, 4, 1)
    lhs, rhs = G.equations[0]
    assert path_equal(G, lhs, rhs) is PathEq.EQUAL


def test_product_with_terminal():
    prod = fincat.product([Q, fincat.terminal()])
    assert len(prod.apex.objects) == 3 and len(prod.apex.generators) == 2
    assert not prod.apex.equations


def test_product_points_biject_with_pairs():
    # functors 1 -> P x Q correspond to pairs of functors 1 -> P, 1 -> Q
    rng = random.Random(3)
    for _ in range(5):
        A = FinCat(tuple("ab"[: rng.randint(1, 2)]))
        B = fincat.path_shape(rng.randint(1, 2))
        prod = fincat.product([A, B])
        one = fincat.terminal()
        points = enumerate_functors(one, prod.apex)
        pairs = {(f.then(prod.legs[0]).ob_map, f.then(prod.legs[1]).ob_map) for f in points}
        assert len(points) == len(pairs) == len(enumerate_functors(one, A)) * len(enumerate_functors(one, B))


def test_lifted_equations_in_product():
    prod = fincat.product([square(), P])
    assert len(prod.apex.equations) == 2 + 4 * 1
    for leg in prod.legs:
        assert leg.verified


def test_equalizer():
    ident = FinFunctor.identity(P)
    E = fincat.equalizer([ident, ident])
    assert E.apex == P
    collapse = FinFunctor(P, P, (1, 1), (Path.id(1),))
    E = fincat.equalizer([ident, collapse])
    assert E.apex.objects == ("1",)
    assert E.legs[0].ob_map == (1,)
    incl = E.legs[0]
    assert incl.then(ident).ob_map == incl.then(collapse).ob_map


def test_equalizer_needs_free_codomain():
    S = square()
    with pytest.raises(NonFreeCodomain):
        fincat.equalizer([FinFunctor.identity(S), FinFunctor.identity(S)])


def test_coproduct():
    co = fincat.coproduct([P, Q])
    assert (len(co.apex.objects), len(co.apex.generators)) == (5, 3)
    assert fincat.coproduct([P, fincat.empty()]).apex == P
    co = fincat.coproduct([square(), P])
    assert len(co.apex.equations) == 1
    clash = fincat.coproduct([P, P]).apex
    assert clash.objects == ("in0_0", "in0_1", "in1_0", "in1_1")


def test_coequalizer_loop():
    one = fincat.terminal()
    F = FinFunctor(one, P, (0,), ())
    G = FinFunctor(one, P, (1,), ())
    co = fincat.coequalizer([F, G])
    assert len(co.apex.objects) == 1
    assert len(co.apex.generators) == 1
    g = co.apex.generators[0]
    assert g.src == g.tgt == 0
    assert not co.apex.equations
    H = co.legs[0]
    assert F.then(H).equal(G.then(H)) is PathEq.EQUAL


def test_coequalizer_trivial():
    F = FinFunctor(fincat.terminal(), Q, (1,), ())
    co = fincat.coequalizer([F, F])
    assert co.apex == Q
    assert co.legs[0].equal(FinFunctor.identity(Q)) is PathEq.EQUAL


def test_coequalizer_adds_equations():
    two = FinCat(("a", "b"), (Generator("f", 0, 1), Generator("g", 0, 1)))
    F = FinFunctor(P, two, (0, 1), (two.path("f"),))
    G = FinFunctor(P, two, (0, 1), (two.path("g"),))
    co = fincat.coequalizer([F, G])
    assert len(co.apex.equations) == 1
    H = co.legs[0]
    assert F.then(H).equal(G.then(H)) is PathEq.EQUAL


def test_pushout_shapes():
    one = fincat.terminal()
    end = FinFunctor(one, P, (1,), ())
    start = FinFunctor(one, P, (0,), ())
    chain = fincat.pushout(end, start)
    assert len(chain.apex.objects) == 3
    assert [(g.src, g.tgt) for g in chain.apex.generators] == [(0, 1), (1, 2)]
    branch = fincat.pushout(start, start)
    assert len(branch.apex.objects) == 3
    assert [(g.src, g.tgt) for g in branch.apex.generators] == [(0, 1), (0, 2)]
    for leg_f, leg_g in [chain.legs, branch.legs]:
        assert leg_f.verified and leg_g.verified


def test_pushout_over_empty_is_coproduct():
    e = fincat.empty()
    po = fincat.pushout(FinFunctor(e, P, (), ()), FinFunctor(e, Q, (), ()))
    assert po.apex == fincat.coproduct([P, Q]).apex


def test_pushout_of_identities():
    ident = FinFunctor.identity(Q)
    po = fincat.pushout(ident, ident)
    assert len(po.apex.objects) == 3


def test_functor_rejects_broken_equation():
    S = square()
    two = FinCat(("a", "b"), (Generator("f", 0, 1), Generator("g", 0, 1)))
    # send the square's two sides to the distinct arrows f and g
    imgs = (two.path("f"), two.path("g"), Path.id(1), Path.id(1))
    with pytest.raises(ValueError):
        FinFunctor(S, two, (0, 1, 1, 1), imgs)


def test_enumerate_functors_counts():
    # functors from the arrow category into path_3 are pairs a <= b
    three = fincat.path_shape(3)
    assert len(enumerate_functors(P, three)) == 6


def test_json_round_trip():
    for cat in (square(), P, Q, fincat.product([P, P]).apex, fincat.free_loop()):
        assert fincat.from_json(fincat.to_json(cat)) == cat
    F = fincat.product([P, Q]).legs[1]
    back = fincat.functor_from_json(fincat.functor_to_json(F), F.dom, F.cod)
    assert back == F


def test_symmetry_and_reflexivity_random():
    rng = random.Random(0)
    S = square()
    paths = [p for a, b in itertools.product(range(4), repeat=2) for p in S.paths(a, b, 2)]
    for _ in range(40):
        p = rng.choice(paths)
        same = [q for q in paths if (q.src, q.tgt) == (p.src, p.tgt)]
        q = rng.choice(same)
        assert path_equal(S, p, p) is PathEq.EQUAL
        assert path_equal(S, p, q) is path_equal(S, q, p)
