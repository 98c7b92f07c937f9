import random

import pytest

from modelspace import cset, epi, fincat, leftkan
from modelspace import diagram as dg
from modelspace.cset import CSet, CSetMorphism, IllFormedCocone
from modelspace.fincat import FinCat, FinFunctor, Generator, Path
from modelspace.leftkan import ChaseBudgetExceeded, chase_set, transpose

from oracles import brute_homs, lan_sizes, random_codomain, random_cset, random_functor, restrict

ARROW = fincat.path_shape(2)


def test_identity_extension():
    X = CSet(ARROW, (2, 3), ((0, 2),))
    kan = chase_set(X, FinFunctor.identity(ARROW))
    assert kan.lan == X
    assert kan.unit == ((0, 1), (0, 1, 2))


def test_discrete_into_arrow():
    two = fincat.discrete(["0", "1"])
    F = FinFunctor(two, ARROW, (0, 1), ())
    X = CSet(two, (1, 1), (), (("a",), ("b",)))
    kan = chase_set(X, F)
    assert kan.lan.parts == (1, 2)
    assert kan.lan.names(1) == ("b", "0->1(a)")
    assert kan.provenance[1][1] == ("gen", 0, 0)


def test_free_loop_diverges():
    F = FinFunctor(fincat.terminal(), fincat.free_loop(), (0,), ())
    X = CSet(fincat.terminal(), (1,), ())
    with pytest.raises(ChaseBudgetExceeded):
        chase_set(X, F, budget=50)


def test_idempotent_loop_saturates():
    M = FinCat(("*",), (Generator("e", 0, 0),), ((Path(0, 0, (0, 0)), Path(0, 0, (0,))),))
    F = FinFunctor(fincat.terminal(), M, (0,), ())
    kan = chase_set(CSet(fincat.terminal(), (2,), ()), F)
    assert kan.lan.parts == (4,)
    assert cset.validate(kan.lan) == []


def test_saturated_output_is_a_fixpoint():
    rng = random.Random(11)
    for _ in range(10):
        I, poset = random_codomain(rng)
        F = random_functor(rng, I, poset)
        X = random_cset(rng, F.dom, 3)
        kan = chase_set(X, F)
        again = chase_set(kan.lan, FinFunctor.identity(I))
        assert again.rounds <= 2
        assert again.lan == kan.lan


def random_instances(n, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        I, poset = random_codomain(rng)
        F = random_functor(rng, I, poset)
        if F is None:
            continue
        X = random_cset(rng, F.dom, 4)
        out.append((X, F, poset, rng.random()))
    return out


@pytest.mark.parametrize("X,F,poset,_", random_instances(25, 2024))
def test_cardinalities_match_comma_oracle(X, F, poset, _):
    kan = chase_set(X, F)
    assert list(kan.lan.parts) == lan_sizes(X, F, poset)
    assert cset.validate(kan.lan) == []
    # unit is natural
    for k, g in enumerate(F.dom.generators):
        for x in range(X.parts[g.src]):
            assert kan.unit[g.tgt][X.actions[k][x]] == kan.lan.apply(F.gen_map[k], kan.unit[g.src][x])


def adjunction_holds(X, F, Y) -> bool:
    """Maps Lan X -> Y and X -> F*Y correspond under precomposition with the unit and transpose."""
    kan = chase_set(X, F)
    FY = restrict(Y, F)
    out_of_lan = brute_homs(kan.lan, Y)
    into_restriction = brute_homs(X, FY)
    if len(out_of_lan) != len(into_restriction):
        return False
    images = set()
    for comps in out_of_lan:
        cocone = tuple(tuple(comps[F.ob_map[j]][kan.unit[j][x]] for x in range(X.parts[j]))
                       for j in range(len(F.dom.objects)))
        images.add(cocone)
    if images != set(into_restriction):
        return False
    for cocone in into_restriction:
        h = transpose(kan, Y, cocone)
        if h.components not in out_of_lan:
            return False
        back = tuple(tuple(h.components[F.ob_map[j]][kan.unit[j][x]] for x in range(X.parts[j]))
                     for j in range(len(F.dom.objects)))
        if back != cocone:
            return False
    return True


@pytest.mark.parametrize("X,F,poset,seed", random_instances(20, 77))
def test_adjunction_by_enumeration(X, F, poset, seed):
    rng = random.Random(seed)
    Y = random_cset(rng, F.cod, 2)
    kan = chase_set(X, F)
    if any(n > 6 for n in kan.lan.parts):
        pytest.skip("enumeration too large")
    assert adjunction_holds(X, F, Y)


def test_transpose_of_unit_is_identity():
    two = fincat.discrete(["0", "1"])
    F = FinFunctor(two, ARROW, (0, 1), ())
    X = CSet(two, (2, 1), ())
    kan = chase_set(X, F)
    h = transpose(kan, kan.lan, kan.unit)
    assert h == CSetMorphism.identity(kan.lan)


def test_transpose_into_constant_target():
    two = fincat.discrete(["0", "1"])
    F = FinFunctor(two, ARROW, (0, 1), ())
    X = CSet(two, (2, 1), ())
    target = CSet(ARROW, (1, 1), ((0,),))
    h = transpose(chase_set(X, F), target, ((0, 0), (0,)))
    assert all(set(c) <= {0} for c in h.components)


def test_transpose_rejects_unnatural_cocone():
    X = CSet(ARROW, (1, 1), ((0,),))
    F = FinFunctor.identity(ARROW)
    Y = CSet(ARROW, (1, 2), ((0,),))
    with pytest.raises(IllFormedCocone):
        transpose(chase_set(X, F), Y, ((0,), (1,)))


# -- C-set valued diagrams -----------------------------------------------------

def sir_sird() -> dg.Diagram:
    sir, sird = epi.disease_net("SIR"), epi.disease_net("SIRD")
    return dg.Diagram.sequence([sir, sird], [epi.include(sir, sird)], ["SIR", "SIRD"])


def test_tensor_hom_round_trip():
    D = sir_sird()
    flat, prod = leftkan.tensor_hom(D)
    assert len(prod.apex.objects) == 8
    assert cset.validate(flat) == []
    assert leftkan.tensor_hom_inverse(flat, prod) == D


def test_tensor_hom_single_node():
    x = epi.disease_net("SIR")
    flat, _ = leftkan.tensor_hom(dg.Diagram.single(x))
    assert flat.parts == x.parts


def test_leftkan_cset_identity():
    D = sir_sird()
    ck = leftkan.leftkan_cset(D, FinFunctor.identity(D.shape))
    assert ck.diagram == D
    assert ck.unit.equal(dg.DiagramMorphism.identity(D))


def test_leftkan_to_point_is_colimit():
    a = epi.disease_net("SIR")
    b = epi.disease_net("SIRD")
    c = epi.disease_net("SIRS")
    shape = FinCat(("A", "B", "C"), (Generator("f", 0, 1), Generator("g", 0, 2)))
    D = dg.Diagram(shape, (a, b, c), (epi.include(a, b), epi.include(a, c)), a.schema)
    F = FinFunctor(shape, fincat.terminal(), (0, 0, 0), (Path.id(0), Path.id(0)))
    ck = leftkan.leftkan_cset(D, F)
    col = cset.colimit(shape, D.ob, D.hom)
    assert cset.is_isomorphic(ck.diagram.ob[0], col.apex)
    assert ck.diagram.ob[0].names("S") == ("S", "I", "R", "D")
    # transposing the colimit cocone gives the colimit's own comparison map, an iso
    h = leftkan.transpose_cset(ck, dg.Diagram.single(col.apex, "*"), col.legs)
    assert cset.is_mono(h.phi[0]) and cset.is_epi(h.phi[0])


def test_kan_json_is_deterministic():
    D = sir_sird()
    F = FinFunctor(D.shape, fincat.terminal(), (0, 0), (Path.id(0),))
    a = leftkan.kan_to_json(leftkan.leftkan_cset(D, F).kan)
    b = leftkan.kan_to_json(leftkan.leftkan_cset(D, F).kan)
    assert a == b
