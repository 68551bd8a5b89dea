"""Batch drivers: H^1 and localization-kernel tables over subgroup classes.

``full`` tables walk every conjugacy class of subgroups of GL_2(Z/p^2) with
surjective determinant (p = 2, 3).  ``restricted`` tables (p = 5, 7) only
take groups whose reduction kernel is everything, i.e. full preimages of
subgroups of GL_2(F_p); those are enumerated as homothety-free subgroups
of GL_2(F_p), since a non-trivial homothety kills every cohomology group.

Rows carry only conjugacy invariants plus one generating set, so
regenerated tables can be compared to the stored golden files.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from .cohomology import GModule, UnsupportedGroupShape, h0, h1, h2_normal_cyclic_sylow, localization_kernel
from .matgroup import (
    MatGroup,
    closure,
    det_surjective,
    encode,
    gl2,
    greatest_possible,
    has_nontrivial_homothety_mod_p,
    normalizer,
    reduction,
)
from .modarith import RingSpec
from .subgroups import Family, cached_enumeration, homothety_free_family

SUPPORTED = {(2, 2): "full", (3, 2): "full", (5, 2): "restricted", (7, 2): "restricted"}


class UnsupportedTable(ValueError):
    pass


@dataclass
class ClassRow:
    order: int
    image_order: int
    kernel_dim: int
    h1: list[int]
    h0_mod_p: bool
    h2_mod_p: bool | None
    lker: list[int] | None
    generators: list[list[int]] = field(default_factory=list)
    index: int = 0

    def invariant_key(self) -> tuple:
        return (self.order, self.image_order, self.kernel_dim, tuple(self.h1),
                self.h0_mod_p, self.h2_mod_p, None if self.lker is None else tuple(self.lker))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Table:
    p: int
    level: int
    mode: str
    rows: list[ClassRow]
    kind: str = "h1"

    @property
    def nonvanishing(self) -> list[ClassRow]:
        return [r for r in self.rows if r.h1]

    @property
    def lker_nonvanishing(self) -> list[ClassRow]:
        return [r for r in self.rows if r.lker]

    def summary(self) -> dict:
        nv = self.nonvanishing
        out = {
            "p": self.p, "level": self.level, "mode": self.mode, "kind": self.kind,
            "classes": len(self.rows),
            "h1_nonvanishing": len(nv),
            "h1_factor_counts": {_fmt(k): v for k, v in sorted(Counter(tuple(r.h1) for r in nv).items())},
            "h1_nonvanishing_by_kernel_dim": {str(k): v for k, v in
                                              sorted(Counter(r.kernel_dim for r in nv).items())},
        }
        if self.kind == "lker":
            lk = self.lker_nonvanishing
            out["lker_nonvanishing"] = len(lk)
            out["lker_factor_counts"] = {_fmt(k): v for k, v in sorted(Counter(tuple(r.lker) for r in lk).items())}
            out["lker_by_kernel_dim"] = {str(k): v for k, v in sorted(Counter(r.kernel_dim for r in lk).items())}
            out["lker_image_orders"] = {str(k): v for k, v in sorted(Counter(r.image_order for r in lk).items())}
        return out

    def invariant_multiset(self) -> Counter:
        return Counter(r.invariant_key() for r in self.rows)


def _fmt(factors) -> str:
    return "x".join(str(d) for d in factors) if factors else "0"


def check_supported(p: int, level: int) -> str:
    mode = SUPPORTED.get((p, level))
    if mode is None:
        supported = ", ".join(f"p={a} level={b} ({m})" for (a, b), m in SUPPORTED.items())
        raise UnsupportedTable(f"no table for p={p}, level={level}; supported: {supported}")
    return mode


def _mod_p_flags(G: MatGroup) -> tuple[bool, bool | None]:
    """(H^0(G, F_p^2) != 0, H^2(G, F_p^2) != 0) for a subgroup of GL_2(F_p)."""
    V = GModule.natural(G.ring)
    p = G.ring.p
    has_h0 = not h0(G, V).is_zero
    if G.order % p:
        return has_h0, False
    try:
        return has_h0, not h2_normal_cyclic_sylow(G, V).is_trivial
    except UnsupportedGroupShape:
        pass
    # a non-normal Sylow p-subgroup of GL_2(F_p) means G contains SL_2(F_p)
    if has_nontrivial_homothety_mod_p(G):
        return has_h0, False
    if p == 2 and G.order == 6:
        # GL_2(F_2): restriction to a Sylow 2-subgroup is injective and lands in 0
        return has_h0, False
    return has_h0, None


def analyse_group(G2: MatGroup, with_lker: bool = True) -> ClassRow:
    p = G2.ring.p
    G, K = reduction(G2, 1)
    kdim = 0
    n = K.order
    while n > 1:
        n //= p
        kdim += 1
    M = GModule.natural(G2.ring)
    coh = h1(G2, M)
    flags = _mod_p_flags(G)
    lker = None
    if with_lker:
        lker = localization_kernel(G2, M).invariant_factors if coh.invariant_factors else []
    return ClassRow(G2.order, G.order, kdim, list(coh.invariant_factors), flags[0], flags[1],
                    None if lker is None else list(lker),
                    [[int(x) for x in g] for g in G2.generators])


def _analyse_job(args):
    p, level, gens, with_lker = args
    return analyse_group(closure(RingSpec(p, level), gens), with_lker)


def candidate_groups(p: int, level: int, surjective_det: bool = True, dim_m2: int | None = None,
                     cache_dir=None, use_cache: bool = True,
                     progress: Callable[[str], None] | None = None) -> list[MatGroup]:
    mode = check_supported(p, level)
    if mode == "full":
        ambient = gl2(RingSpec(p, level))
        classes = cached_enumeration(ambient, "all", cache_dir, use_cache, progress=progress)
        groups = [c.representative for c in classes]
        if surjective_det:
            groups = [g for g in groups if det_surjective(g)]
        if dim_m2 is not None:
            groups = [g for g in groups if reduction(g, 1)[1].order == p ** dim_m2]
        return groups
    if dim_m2 not in (None, 4):
        raise UnsupportedTable(f"p={p} tables only cover groups with dim M_2 = 4")
    ambient = gl2(RingSpec(p, 1))
    classes = cached_enumeration(ambient, "homothety-free", cache_dir, use_cache,
                                 family=homothety_free_family(ambient), progress=progress)
    out = []
    for c in classes:
        G = c.representative
        if surjective_det and not det_surjective(G):
            continue
        out.append(greatest_possible(G, level))
    return out


def image_classes(G: MatGroup, level: int, cache_dir=None, use_cache: bool = True,
                  progress: Callable[[str], None] | None = None) -> list[MatGroup]:
    """Subgroups of GL_2(Z/p^level) reducing exactly onto G, one per conjugacy class.

    Two such subgroups conjugate in GL_2 are conjugate by an element reducing
    into N(G), so the search runs inside the preimage of the normalizer with
    the subgroup-closed family "image inside G".
    """
    p = G.ring.p
    ambient = greatest_possible(normalizer(gl2(G.ring), G), level)
    inside = set(encode(G.elements, p).tolist())
    in_g = np.array([c in inside for c in encode(ambient.elements % p, p).tolist()])
    family = Family("image-in-G", lambda idx: bool(in_g[idx].all()), True)
    tag = "image-" + "-".join(str(c) for c in sorted(inside))
    classes = cached_enumeration(ambient, tag, cache_dir, use_cache, family=family, progress=progress)
    return [c.representative for c in classes
            if len(np.unique(encode(c.representative.elements % p, p))) == G.order]


def lker_candidate_groups(p: int, level: int, surjective_det: bool = True, dim_m2: int | None = None,
                          max_image_order: int | None = None, cache_dir=None, use_cache: bool = True,
                          progress: Callable[[str], None] | None = None) -> list[MatGroup]:
    """Groups to search for a non-trivial localization kernel.

    Full tables reuse the class list.  In restricted mode every kernel
    dimension is needed, so the groups are found image by image over the
    homothety-free subgroups of GL_2(F_p), optionally capped in order.
    """
    mode = check_supported(p, level)
    if mode == "full":
        return candidate_groups(p, level, surjective_det, dim_m2, cache_dir, use_cache, progress)
    ambient = gl2(RingSpec(p, 1))
    images = cached_enumeration(ambient, "homothety-free", cache_dir, use_cache,
                                family=homothety_free_family(ambient), progress=progress)
    out = []
    for c in images:
        G = c.representative
        if surjective_det and not det_surjective(G):
            continue
        if max_image_order is not None and G.order > max_image_order:
            continue
        if progress:
            progress(f"lifting image of order {G.order}")
        for H in image_classes(G, level, cache_dir, use_cache, progress):
            if surjective_det and not det_surjective(H):
                continue
            if dim_m2 is not None and reduction(H, 1)[1].order != p ** dim_m2:
                continue
            out.append(H)
    return out


def build_table(p: int, level: int = 2, surjective_det: bool = True, dim_m2: int | None = None,
                with_lker: bool = True, workers: int = 1, cache_dir=None, use_cache: bool = True,
                progress: Callable[[str], None] | None = None, groups: list[MatGroup] | None = None) -> Table:
    mode = check_supported(p, level)
    if groups is None:
        groups = candidate_groups(p, level, surjective_det, dim_m2, cache_dir, use_cache, progress)
    if progress:
        progress(f"analysing {len(groups)} groups")
    jobs = [(p, level, [[int(x) for x in g] for g in G.generators], with_lker) for G in groups]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_analyse_job, jobs))
    else:
        rows = [analyse_group(G, with_lker) for G in groups]
    rows.sort(key=lambda r: (r.kernel_dim, r.order, r.image_order, r.h1, r.lker or [], r.generators))
    for i, r in enumerate(rows):
        r.index = i
    return Table(p, level, mode, rows)


def build_lker_table(p: int, level: int = 2, surjective_det: bool = True, dim_m2: int | None = None,
                     max_image_order: int | None = None, workers: int = 1, cache_dir=None,
                     use_cache: bool = True, progress: Callable[[str], None] | None = None) -> Table:
    groups = lker_candidate_groups(p, level, surjective_det, dim_m2, max_image_order,
                                   cache_dir, use_cache, progress)
    table = build_table(p, level, with_lker=True, workers=workers, progress=progress, groups=groups)
    table.kind = "lker"
    return table


# golden files ----------------------------------------------------------------

def golden_name(p: int, level: int, kind: str = "h1") -> str:
    return f"golden_{kind}_p{p}_level{level}.json"


def table_to_golden(table: Table) -> dict:
    return {
        "format": "galcoh-table", "version": 1, "kind": table.kind,
        "summary": table.summary(),
        "rows": [list(r.invariant_key()) for r in table.rows],
    }


def load_golden(p: int, level: int, kind: str = "h1") -> dict | None:
    res = resources.files("galcoh.data").joinpath(golden_name(p, level, kind))
    if not res.is_file():
        return None
    return json.loads(res.read_text(encoding="utf-8"))


def _normal(rows) -> Counter:
    return Counter(json.dumps(r) for r in rows)


def diff_against_golden(table: Table, golden: dict | None = None) -> list[str]:
    """Human-readable differences between a table and its golden file (empty when equal)."""
    golden = golden if golden is not None else load_golden(table.p, table.level, table.kind)
    if golden is None:
        return [f"no {table.kind} golden file for p={table.p}, level={table.level}"]
    fresh = table_to_golden(table)
    out = []
    if fresh["summary"] != golden["summary"]:
        for k in sorted(set(fresh["summary"]) | set(golden["summary"])):
            a, b = golden["summary"].get(k), fresh["summary"].get(k)
            if a != b:
                out.append(f"summary[{k}]: golden {a!r} != computed {b!r}")
    g, f = _normal(golden["rows"]), _normal(fresh["rows"])
    for row, count in sorted((g - f).items()):
        out.append(f"missing row ({count}x): {row}")
    for row, count in sorted((f - g).items()):
        out.append(f"unexpected row ({count}x): {row}")
    return out
