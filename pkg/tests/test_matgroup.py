import itertools
import random

import numpy as np
import pytest

from galcoh.matgroup import (
    GL2Element,
    NotInvertibleError,
    borel,
    closure,
    cyclic_subgroups,
    encode,
    gl2,
    gl2_order,
    greatest_possible,
    is_solvable,
    normalizer,
    parse_matrix,
    reduction,
    structural_predicates,
)
from galcoh.modarith import RingSpec

F3, F5, F7 = RingSpec(3, 1), RingSpec(5, 1), RingSpec(7, 1)
Z4, Z9, Z25 = RingSpec(2, 2), RingSpec(3, 2), RingSpec(5, 2)

# <(7,8;3,1)> together with 1 + 3*(upper triangular), inside GL_2(Z/9)
EXPLICIT_Z9 = [(7, 8, 3, 1), (4, 0, 0, 1), (1, 3, 0, 1), (1, 0, 0, 4)]


def test_element_rejects_singular():
    with pytest.raises(NotInvertibleError):
        GL2Element(F5, 1, 2, 2, 4)
    with pytest.raises(NotInvertibleError):
        closure(Z9, [(3, 0, 0, 1)])


def test_element_arithmetic():
    g = GL2Element.of(Z9, [[7, 8], [3, 1]])
    assert (g * g.inverse()).entries == (1, 0, 0, 1)
    assert g.det == (7 - 24) % 9
    assert g.order() == closure(Z9, [g.entries]).order


@pytest.mark.parametrize("gens, order", [
    ([(1, 1, 0, 1)], 5),
    ([(1, 1, 0, 1), (2, 0, 0, 1), (1, 0, 0, 2)], 80),
])
def test_closure_examples_f5(gens, order):
    assert closure(F5, gens).order == order


def test_gl2_orders():
    assert gl2(Z4).order == 96 == gl2_order(Z4)
    assert gl2(Z9).order == 3888
    assert gl2(F7).order == gl2_order(F7) == 48 * 42


def test_closure_order_independent():
    gens = [(1, 1, 0, 1), (2, 0, 0, 1), (1, 0, 0, 2)]
    ref = closure(F5, gens)
    for perm in itertools.permutations(gens):
        G = closure(F5, list(perm))
        assert G.same_elements(ref)


def test_closure_words_rebuild_elements():
    G = closure(Z9, EXPLICIT_Z9)
    m = G.modulus
    for i in random.Random(3).sample(range(G.order), 50):
        x = np.array([1, 0, 0, 1])
        for k in G.word(i):
            g = G.generators[k]
            x = np.array([(x[0] * g[0] + x[1] * g[2]) % m, (x[0] * g[1] + x[1] * g[3]) % m,
                          (x[2] * g[0] + x[3] * g[2]) % m, (x[2] * g[1] + x[3] * g[3]) % m])
        assert tuple(x) == tuple(G.elements[i])


def test_reduction_of_gl2_z4():
    image, kernel = reduction(gl2(Z4), 1)
    assert image.order == 6
    assert kernel.order == 16


def test_reduction_of_unipotent_kernel_element():
    G = closure(Z9, [(1, 3, 0, 1)])
    image, kernel = reduction(G, 1)
    assert image.order == 1
    assert kernel.order == G.order == 3


@pytest.mark.parametrize("gens, ring", [
    (EXPLICIT_Z9, Z9),
    ([(1, 1, 0, 1), (2, 0, 0, 1), (1, 0, 0, 6)], Z25),
    ([(3, 1, 0, 1), (1, 2, 2, 1)], Z4),
])
def test_reduction_multiplicative(gens, ring):
    G = closure(ring, gens)
    image, kernel = reduction(G, 1)
    assert G.order == image.order * kernel.order


def test_greatest_possible_orders():
    assert greatest_possible(closure(F3, []), 2).order == 81
    B = greatest_possible(borel(F5), 2)
    assert B.order == 80 * 625 == 50000
    image, kernel = reduction(B, 1)
    assert (image.order, kernel.order) == (80, 625)
    assert greatest_possible(gl2(RingSpec(2, 1)), 2).same_elements(gl2(Z4))


@pytest.mark.parametrize("p", [3, 5, 7])
def test_greatest_possible_kernel_has_exponent_p(p):
    G = greatest_possible(closure(RingSpec(p, 1), [(1, 1, 0, 1)]), 2)
    _, kernel = reduction(G, 1)
    assert set(kernel.element_orders.tolist()) == {1, p}


@pytest.mark.parametrize("p", [3, 5, 7])
def test_normalizer_of_unipotent_is_borel(p):
    R = RingSpec(p, 1)
    H = closure(R, [(1, 1, 0, 1)])
    assert normalizer(gl2(R), H).same_elements(borel(R))


def test_normalizer_of_whole_and_center():
    G = gl2(F5)
    assert normalizer(G, G).order == G.order
    center = closure(F5, [(2, 0, 0, 2)])
    assert normalizer(G, center).order == G.order
    with pytest.raises(ValueError):
        normalizer(borel(F5), closure(F5, [(0, 1, 1, 0)]))


def test_cyclic_subgroups_examples():
    assert len(cyclic_subgroups(closure(F5, [(1, 1, 0, 1)]))) == 2
    klein = closure(F5, [(4, 0, 0, 1), (1, 0, 0, 4)])
    assert len(cyclic_subgroups(klein)) == 4
    assert len(cyclic_subgroups(gl2(RingSpec(2, 1)))) == 5


def test_cyclic_subgroups_generators_have_maximal_order():
    G = closure(Z9, EXPLICIT_Z9)
    for C in cyclic_subgroups(G):
        assert C.order == max(C.element_orders.tolist())
        assert len(C.generators) <= 1


def test_structural_predicates_examples():
    assert structural_predicates(gl2(F5)).has_nontrivial_homothety_mod_p
    s = structural_predicates(closure(F5, [(1, 1, 0, 1), (1, 0, 0, 2)]))
    assert not s.has_nontrivial_homothety_mod_p
    assert s.det_surjective
    assert s.is_borel_conjugate
    assert s.sylow_p_order == 5


def test_explicit_z9_group_has_no_element_of_order_9():
    G = closure(Z9, EXPLICIT_Z9)
    s = structural_predicates(G)
    assert 9 not in G.element_orders.tolist()
    assert sorted(set(G.dets.tolist())) == [1, 4, 7]
    assert (G.traces.tolist()[0], G.dets.tolist()[0]) in s.trace_det_pairs


def test_conjugate_has_same_fingerprint_data():
    G = closure(Z9, EXPLICIT_Z9)
    x = (2, 1, 1, 1)
    H = G.conjugate(x)
    assert H.order == G.order
    assert sorted(H.element_orders.tolist()) == sorted(G.element_orders.tolist())
    assert sorted(zip(H.traces.tolist(), H.dets.tolist())) == sorted(zip(G.traces.tolist(), G.dets.tolist()))


def test_solvability():
    assert is_solvable(gl2(Z4))
    assert is_solvable(gl2(Z9))
    assert not is_solvable(gl2(F5))


@pytest.mark.parametrize("text", ["7,8;3,1", "(7 8 3 1)", "[[7,8],[3,1]]"])
def test_parse_matrix(text):
    assert parse_matrix(text) == (7, 8, 3, 1)


def test_parse_matrix_rejects_wrong_length():
    with pytest.raises(ValueError):
        parse_matrix("1,2,3")


def test_element_codes_are_unique():
    G = gl2(Z9)
    assert len(np.unique(encode(G.elements, 9))) == G.order
