import numpy as np
import pytest

from galcoh.matgroup import borel, closure, gl2, mat_mul
from galcoh.modarith import RingSpec
from galcoh.subgroups import (
    Ambient,
    CompletenessError,
    brute_force_classes,
    cache_path,
    cached_enumeration,
    enumerate_subgroup_classes,
    homothety_free_family,
)

F2, F3, F5 = RingSpec(2, 1), RingSpec(3, 1), RingSpec(5, 1)
Z4, Z9 = RingSpec(2, 2), RingSpec(3, 2)


def _orbit(group, subset):
    arr = np.array(sorted(subset))
    out = set()
    for x in range(group.order):
        conj = mat_mul(mat_mul(group.elements[x], group.elements[arr], group.modulus),
                       group.elements[group.inverse_index[x]], group.modulus)
        out.add(frozenset(group.index_of(conj).tolist()))
    return out


def _assert_matches_brute_force(ambient, classes, keep=lambda s: True):
    brute = [s for s in brute_force_classes(ambient) if keep(s)]
    assert len(classes) == len(brute)
    orbits = [_orbit(ambient, s) for s in brute]
    hit = []
    for c in classes:
        owners = [i for i, orb in enumerate(orbits) if frozenset(c.element_indices.tolist()) in orb]
        assert len(owners) == 1
        hit.append(owners[0])
    assert sorted(hit) == list(range(len(brute)))


AMBIENTS = {
    "GL2(F2)": lambda: gl2(F2),
    "GL2(F3)": lambda: gl2(F3),
    "Borel(F5)": lambda: borel(F5),
    "GL2(Z/4)": lambda: gl2(Z4),
    "C9": lambda: closure(Z9, [(1, 1, 0, 1)]),
}


@pytest.mark.parametrize("name", list(AMBIENTS))
def test_cyclic_extension_matches_brute_force(name):
    ambient = AMBIENTS[name]()
    assert ambient.order <= 200
    _assert_matches_brute_force(ambient, enumerate_subgroup_classes(ambient))


def test_s3_and_cyclic_class_counts():
    assert [c.order for c in enumerate_subgroup_classes(gl2(F2))] == [1, 2, 3, 6]
    assert len(enumerate_subgroup_classes(closure(Z9, [(1, 1, 0, 1)]))) == 3


def test_homothety_free_family_matches_brute_force():
    ambient = gl2(F3)
    family = homothety_free_family(ambient)
    classes = enumerate_subgroup_classes(ambient, family=family)
    _assert_matches_brute_force(ambient, classes, lambda s: family.predicate(np.array(sorted(s))))


def test_surjective_det_filter():
    all_classes = enumerate_subgroup_classes(gl2(Z4))
    surj = enumerate_subgroup_classes(gl2(Z4), surjective_det=True)
    assert 0 < len(surj) < len(all_classes)
    assert all(len(set(c.representative.dets.tolist())) == 2 for c in surj)


def test_non_solvable_ambient_is_refused():
    with pytest.raises(CompletenessError):
        enumerate_subgroup_classes(gl2(F5))


def test_best_effort_mode_runs_on_small_non_solvable_group():
    classes = enumerate_subgroup_classes(gl2(F5), best_effort=True, max_order=10)
    assert all(c.order <= 10 for c in classes)
    assert classes[0].order == 1


def test_conjugates_share_canonical_key():
    ambient = gl2(Z4)
    classes = enumerate_subgroup_classes(ambient)
    c = next(x for x in classes if x.order == 8)
    conj = c.representative.conjugate((1, 1, 1, 0))
    idx = np.sort(ambient.index_of(conj.elements))
    amb = Ambient(ambient)
    assert amb.canonical_key(idx) == c.ensure_canonical_key()
    assert amb.fingerprint(idx) == c.invariant_fingerprint


def test_output_is_deterministic():
    a = [c.generator_quadruples() for c in enumerate_subgroup_classes(gl2(Z4))]
    b = [c.generator_quadruples() for c in enumerate_subgroup_classes(gl2(Z4))]
    assert a == b


def test_cache_round_trip(tmp_path):
    ambient = gl2(Z4)
    fresh = cached_enumeration(ambient, "all", tmp_path)
    path = cache_path(tmp_path, ambient, "all")
    assert path.exists()
    again = cached_enumeration(ambient, "all", tmp_path)
    assert [c.order for c in again] == [c.order for c in fresh]
    assert [c.invariant_fingerprint for c in again] == [c.invariant_fingerprint for c in fresh]


def test_corrupt_cache_is_ignored(tmp_path):
    ambient = gl2(F2)
    path = cache_path(tmp_path, ambient, "all")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("not json\n")
    classes = cached_enumeration(ambient, "all", tmp_path)
    assert len(classes) == 4


def test_no_cache_does_not_write(tmp_path):
    cached_enumeration(gl2(F2), "all", tmp_path, use_cache=False)
    assert not any(tmp_path.iterdir())
