"""Acceptance criteria, one test each.

Every criterion test records a single PASS/FAIL line (with its runtime) that
is printed in the terminal summary.  Two criteria state values that the
computation does not reproduce; those tests keep the stated values, are
marked strict xfail, and still report FAIL.  The parts of those criteria
that do hold are guarded by ordinary tests next to them.
"""

import itertools
import random
import time
from collections import Counter

import pytest

from galcoh.classifier import classify_mod_p, cross_check_with_cohomology, expected_group_shape
from galcoh.cohomology import (
    GModule,
    equivariant_homs,
    h1,
    h1_cyclic,
    localization_kernel,
    normalizer_action_scalar,
)
from galcoh.curves import (
    BadReduction,
    bundled_facts,
    fixture,
    frobenius_congruence_filter,
    frobenius_datum,
    globally_divisible,
    primes_up_to,
    reduce_curve,
    scan_divisibility,
)
from galcoh.matgroup import (
    borel,
    closure,
    cyclic_subgroups,
    gl2,
    greatest_possible,
    has_nontrivial_homothety_mod_p,
    reduction,
)
from galcoh.modarith import RingSpec
from galcoh.subgroups import enumerate_subgroup_classes
from galcoh.tables import build_lker_table, build_table

from oracles import brute_h1

ACCEPTANCE_LINES: dict[int, str] = {}


def record(n: int, ok: bool, detail: str, seconds: float) -> None:
    ACCEPTANCE_LINES[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  [{seconds:6.1f}s]  {detail}"


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def nat(G):
    return GModule.natural(G.ring)


def diag_shape(p, kind):
    """Subgroups of the Borel of GL_2(F_p), generator g of F_p^x."""
    R = RingSpec(p, 1)
    g = 2 if p in (3, 5, 11) else 3
    gens = {
        "1,0;0,*": [(1, 0, 0, g)],
        "*,0;0,1": [(g, 0, 0, 1)],
        "1,*;0,*": [(1, 1, 0, 1), (1, 0, 0, g)],
        "*,*;0,1": [(1, 1, 0, 1), (g, 0, 0, 1)],
        "u,*;0,u2": [(1, 1, 0, 1), (g, 0, 0, g * g % p)],
        "v2,*;0,v": [(1, 1, 0, 1), (g * g % p, 0, 0, g)],
        "v2,0;0,v": [(g * g % p, 0, 0, g)],
    }[kind]
    return closure(R, gens)


# shared computations ----------------------------------------------------------------

@pytest.fixture(scope="module")
def lker_tables():
    out = {}
    for p in (2, 3, 5):
        with Timer() as t:
            out[p] = build_lker_table(p)
        out[p].seconds = t.seconds
    return out


def _lker_rows(table):
    return [r for r in table.rows if r.lker]


# 1 ------------------------------------------------------------------------------------

def test_criterion_1_p2_table():
    with Timer() as t:
        table = build_table(2, with_lker=False, use_cache=False)
    nz = table.nonvanishing
    factors = Counter(tuple(r.h1) for r in nz)
    allowed = {tuple([2] * k) for k in range(7)} | {(4,)}
    dims = {r.kernel_dim for r in nz}
    ok = (len(nz) == 36 and set(factors) <= allowed and (4,) in factors
          and (2,) * 6 in factors and dims == {1, 2, 3, 4} and t.seconds < 60)
    record(1, ok, f"{len(nz)} nonvanishing classes, kernel dims {sorted(dims)}, "
                  f"Z/4 {'present' if (4,) in factors else 'absent'}, "
                  f"(Z/2)^6 {'present' if (2,) * 6 in factors else 'absent'}", t.seconds)
    assert ok


# 2 ------------------------------------------------------------------------------------

def test_criterion_2_p3_table():
    with Timer() as t:
        table = build_table(3, with_lker=False)
    nz = table.nonvanishing
    counts = Counter(len(r.h1) for r in nz if set(r.h1) == {3})
    top = [r for r in nz if r.h1 == [3, 3, 3]]
    preimage = False
    if len(top) == 1:
        G2 = closure(RingSpec(3, 2), top[0].generators)
        image, kernel = reduction(G2, 1)
        traces_dets = set(zip(image.traces.tolist(), image.dets.tolist()))
        # an image of order 2 with a reflection (trace 0, det -1) is conjugate to {diag(1, +-1)}
        preimage = kernel.order == 81 and image.order == 2 and (0, 2) in traces_dets
    ok = (len(nz) == 41 and counts == {1: 27, 2: 13, 3: 1} and preimage and t.seconds <= 3600)
    record(2, ok, f"{len(nz)} nonvanishing: {counts[1]} x Z/3, {counts[2]} x (Z/3)^2, "
                  f"{counts[3]} x (Z/3)^3; top case is the full preimage of diag(1,+-1): {preimage}",
           t.seconds)
    assert ok


def test_p3_nonvanishing_cases_have_h0_or_h2():
    # an observed regularity of the p=3 table, kept as a regression check only
    table = build_table(3, with_lker=False)
    assert all(r.h0_mod_p or r.h2_mod_p for r in table.nonvanishing)


# 3 ------------------------------------------------------------------------------------

P5_GROUPS = [("v2,0;0,v", 4, [5]), ("1,0;0,*", 4, [5, 5]), ("u,*;0,u2", 20, [5]),
             ("v2,*;0,v", 20, [5]), ("1,*;0,*", 20, [5])]


def test_criterion_3_p5_restricted():
    got = []
    with Timer() as t:
        for kind, order, _ in P5_GROUPS:
            G = diag_shape(5, kind)
            G2 = greatest_possible(G, 2)
            got.append((G.order, h1(G2, nat(G2)).invariant_factors))
    expected = [(order, factors) for _, order, factors in P5_GROUPS]
    ok = got == expected and t.seconds < 60
    record(3, ok, "H^1 = " + ", ".join(f"|G|={o}: {f}" for o, f in got), t.seconds)
    assert ok


# 4 ------------------------------------------------------------------------------------

def test_criterion_4_p7_dim4():
    with Timer() as t:
        got = {}
        for kind in ("1,0;0,*", "1,*;0,*"):
            G2 = greatest_possible(diag_shape(7, kind), 2)
            got[kind] = h1(G2, nat(G2)).invariant_factors
        table = build_table(7, with_lker=False)
    shapes = sorted(tuple(r.h1) for r in table.nonvanishing)
    ok = got == {"1,0;0,*": [7, 7], "1,*;0,*": [7]} and shapes == [(7,), (7, 7)] and t.seconds < 60
    record(4, ok, f"(1,0;0,*) -> {got['1,0;0,*']}, (1,*;0,*) -> {got['1,*;0,*']}, "
                  f"restricted table shapes {shapes}", t.seconds)
    assert ok


# 5 ------------------------------------------------------------------------------------

EXPLICIT_Z9 = [(7, 8, 3, 1), (4, 0, 0, 1), (1, 3, 0, 1), (1, 0, 0, 4)]


def _criterion_5_parts(lker_tables):
    G2 = closure(RingSpec(3, 2), EXPLICIT_Z9)
    explicit = localization_kernel(G2, nat(G2)).invariant_factors
    rows3, rows5, rows2 = (_lker_rows(lker_tables[p]) for p in (3, 5, 2))
    return {
        "p3": len(rows3) == 13 and {r.kernel_dim for r in rows3} <= {1, 2, 3},
        "explicit": explicit == [3] and 9 not in G2.element_orders.tolist(),
        "p5": len(rows5) == 3 and all(r.kernel_dim == 2 and r.image_order == 4 for r in rows5),
        "p2": len(rows2) == 12 and sorted(tuple(r.lker) for r in rows2) == [(2,)] * 11 + [(2, 2)],
    }, (rows2, rows3, rows5)


@pytest.mark.slow
def test_criterion_5_p3_lker(lker_tables):
    assert _criterion_5_parts(lker_tables)[0]["p3"]


@pytest.mark.slow
def test_criterion_5_explicit_group(lker_tables):
    assert _criterion_5_parts(lker_tables)[0]["explicit"]


@pytest.mark.slow
def test_criterion_5_p5_lker(lker_tables):
    assert _criterion_5_parts(lker_tables)[0]["p5"]


@pytest.mark.slow
def test_criterion_5_p2_lker_computed(lker_tables):
    rows2 = _lker_rows(lker_tables[2])
    assert Counter(tuple(r.lker) for r in rows2) == {(2,): 13, (2, 2): 1}


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="p=2 yields 14 groups with non-zero L, 12 are stated")
def test_criterion_5_localization_kernels(lker_tables):
    with Timer() as t:
        parts, (rows2, rows3, rows5) = _criterion_5_parts(lker_tables)
    seconds = t.seconds + sum(tab.seconds for tab in lker_tables.values())
    ok = all(parts.values())
    record(5, ok, f"p=3: {len(rows3)} groups; explicit group L=Z/3 without order 9: {parts['explicit']}; "
                  f"p=5: {len(rows5)} groups (dim 2, |G|=4: {parts['p5']}); "
                  f"p=2: {len(rows2)} groups, "
                  f"{sum(1 for r in rows2 if r.lker == [2, 2])} with (Z/2)^2", seconds)
    assert ok


# 6 ------------------------------------------------------------------------------------

HOM_COLUMNS = ["1,0;0,*", "*,0;0,1", "1,*;0,*", "u,*;0,u2", "v2,0;0,v"]
HOM_COLUMNS_P3 = ["1,0;0,*", "*,0;0,1", "1,*;0,*", "*,*;0,1"]


def _hom_dims():
    dims = {p: [equivariant_homs(diag_shape(p, k)).dimension for k in HOM_COLUMNS] for p in (5, 7, 11)}
    dims[3] = [equivariant_homs(diag_shape(3, k)).dimension for k in HOM_COLUMNS_P3]
    return dims


def test_criterion_6_large_primes():
    dims = _hom_dims()
    assert all(dims[p] == [3, 3, 2, 1, 1] for p in (5, 7, 11))


def test_criterion_6_p3_computed():
    assert _hom_dims()[3] == [4, 4, 2, 1]


@pytest.mark.xfail(strict=True, reason="p=3 gives dimension 4 for (1,0;0,*), 3 is stated")
def test_criterion_6_hom_tables():
    with Timer() as t:
        dims = _hom_dims()
    ok = all(dims[p] == [3, 3, 2, 1, 1] for p in (5, 7, 11)) and dims[3] == [3, 4, 2, 1]
    record(6, ok, "; ".join(f"p={p}: {tuple(dims[p])}" for p in (3, 5, 7, 11)), t.seconds)
    assert ok


# 7 ------------------------------------------------------------------------------------

def test_criterion_7_normalizer_scalar():
    bad = []
    with Timer() as t:
        for p in (3, 5, 7, 11):
            R = RingSpec(p, 1)
            H = closure(R, [(1, 1, 0, 1)])
            for u, v in itertools.product(range(1, p), repeat=2):
                if normalizer_action_scalar((u, 0, 0, v), H, GModule.natural(R)) != pow(u, -1, p) * v * v % p:
                    bad.append((p, u, v))
    record(7, not bad, f"{sum((p - 1) ** 2 for p in (3, 5, 7, 11))} pairs checked, {len(bad)} mismatches",
           t.seconds)
    assert not bad


# 8 ------------------------------------------------------------------------------------

def test_criterion_8_mod_11_and_17():
    with Timer() as t:
        nonvanishing = [(f.label, classify_mod_p(f, 11).h1_size) for f in bundled_facts()
                        if classify_mod_p(f, 11).vanishing is False]
        report = cross_check_with_cohomology(fixture("121c2"), 11, 1)
        shapes = {x: expected_group_shape(fixture(x), 11).diag_char_exponents for x in ("121c1", "121b1")}
        vanish = all(classify_mod_p(fixture(x), 11).vanishing is True for x in ("121c1", "121b1"))
        filters = {x: frobenius_congruence_filter(fixture(x), 17, (6, 11)) for x in ("14450n1", "14450p1")}
    ruled_out = all(not r and r.witness == 3 and r.trace in (2, -2) for r in filters.values())
    ok = (nonvanishing == [("121c2", 11)] and report.h1_factors == [11] and vanish
          and shapes == {"121c1": (7, 4), "121b1": (8, 3)} and ruled_out)
    record(8, ok, f"p=11 nonvanishing {nonvanishing} (H^1 {report.h1_factors}); shapes {shapes}; "
                  f"p=17 ruled out at l=3 for both 14450 curves: {ruled_out}", t.seconds)
    assert ok


# 9 ------------------------------------------------------------------------------------

def test_criterion_9_243a2_divisibility():
    facts = fixture("243a2")
    with Timer() as t:
        P = facts.generator_points()[0]
        Q = facts.curve.mul(3, P)
        scan = scan_divisibility(facts, Q, 9, 1000, globally_divisible(facts, 3, 9))
    good = [ell for ell, ok in scan.rows if ok is True]
    ok = (P == facts.curve.point(-2, 3) and scan.failures == [] and scan.inconclusive == [3]
          and len(good) == len(primes_up_to(999)) - 1 and scan.local_global_gap is True and t.seconds < 60)
    record(9, ok, f"3P divisible by 9 at {len(good)} good primes < 1000, failures {scan.failures}, "
                  f"inconclusive {scan.inconclusive}; local-global gap flagged: {scan.local_global_gap}",
           t.seconds)
    assert ok


# 10 -----------------------------------------------------------------------------------

def test_criterion_10_property_backstop(z4_classes, z9_classes):
    checks = Counter()
    with Timer() as t:
        for classes in (z4_classes, z9_classes):
            for c in classes:
                G = c.representative
                coh = h1(G, nat(G))
                for rep in coh.representatives:
                    assert rep.is_cocycle(samples=None if G.order <= 200 else 10_000)
                    checks["cocycle"] += 1
                if has_nontrivial_homothety_mod_p(G):
                    assert coh.is_trivial
                    checks["homothety"] += 1
        for ring in (RingSpec(2, 1), RingSpec(3, 1), RingSpec(2, 2), RingSpec(3, 2)):
            for C in cyclic_subgroups(gl2(ring)):
                assert h1(C, nat(C)).invariant_factors == h1_cyclic(C, nat(C)).invariant_factors
                checks["cyclic"] += 1
        small = []
        for ring in (RingSpec(2, 1), RingSpec(3, 1), RingSpec(2, 2), RingSpec(3, 2)):
            small += [c.representative for c in enumerate_subgroup_classes(gl2(ring), max_order=24)]
        small += [c.representative for c in
                  enumerate_subgroup_classes(gl2(RingSpec(5, 1)), best_effort=True, max_order=24)]
        small += [c.representative for c in enumerate_subgroup_classes(borel(RingSpec(7, 1)), max_order=24)]
        for G in small:
            assert h1(G, nat(G)).invariant_factors == brute_h1(G, nat(G))[0]
            checks["oracle"] += 1
        rng, facts, primes = random.Random(10), bundled_facts(), primes_up_to(400)
        while checks["hasse"] < 1000:
            E = reduce_curve(rng.choice(facts), rng.choice(primes))
            if isinstance(E, BadReduction):
                continue
            d = frobenius_datum(E)  # asserts Hasse and the group-invariant relations itself
            n1, n2 = d.group_invariants
            assert d.trace ** 2 <= 4 * d.ell and n1 * n2 == d.count and n2 % n1 == 0
            checks["hasse"] += 1
    record(10, True, ", ".join(f"{k} {v}" for k, v in sorted(checks.items())), t.seconds)
