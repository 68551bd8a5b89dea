"""Conjugacy classes of subgroups of a finite matrix group.

Enumeration uses cyclic extension: in a solvable group every subgroup W has
a normal subgroup U of prime index, so W = <U, g> for some g normalising U
whose image in N(U)/U has prime order.  Starting from the trivial group and
extending one representative per class, layer by layer, reaches a conjugate
of every subgroup.  The same argument works inside any family of solvable
groups that is closed under taking subgroups, which is how large ambients
are handled (see :func:`homothety_free_family`).

All bookkeeping happens in the index space of the ambient element table.
"""

from __future__ import annotations

import hashlib
import json
import os
from collections import Counter
from dataclasses import dataclass, field
from math import gcd
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .matgroup import (
    MatGroup,
    closure,
    encode,
    is_solvable,
    mat_mul,
)
from .modarith import RingSpec

CACHE_FORMAT = "galcoh-subgroup-classes"
CACHE_VERSION = 1


class CompletenessError(RuntimeError):
    """Raised when cyclic extension cannot guarantee a complete enumeration."""


def _is_prime(n: int) -> bool:
    return n > 1 and all(n % d for d in range(2, int(n ** 0.5) + 1))


@dataclass
class Family:
    """A subgroup-closed family of subgroups, given by a predicate on element indices.

    ``solvable_members`` asserts that every member is solvable, which keeps
    cyclic extension complete even inside a non-solvable ambient.
    """

    name: str
    predicate: Callable[[np.ndarray], bool]
    solvable_members: bool = False


def all_subgroups_family() -> Family:
    return Family("all", lambda idx: True, False)


def homothety_free_family(ambient: MatGroup) -> Family:
    """Subgroups whose reduction mod p contains no scalar other than 1.

    For odd p every non-solvable subgroup of GL_2(F_p) contains -1, so all
    members are solvable.
    """
    p = ambient.ring.p
    r = ambient.elements % p
    bad = (r[:, 1] == 0) & (r[:, 2] == 0) & (r[:, 0] == r[:, 3]) & (r[:, 0] != 1)
    return Family("homothety-free", lambda idx: not bad[idx].any(), p != 2)


class Ambient:
    """Index-space arithmetic for a fixed ambient group."""

    def __init__(self, group: MatGroup):
        self.group = group
        self.n = group.order
        self.m = group.modulus
        self.inv = group.inverse_index
        self.orders = group.element_orders
        self.traces = group.traces
        self.dets = group.dets
        p = group.ring.p
        self.p = p
        red = group.elements % p
        self.red_codes = encode(red, p)
        self.is_kernel = (red[:, 0] == 1) & (red[:, 1] == 0) & (red[:, 2] == 0) & (red[:, 3] == 1)
        self.class_label = self._class_labels()
        self.table = self._mult_table() if self.n <= self.TABLE_LIMIT else None
        self._conj_cache: dict[int, np.ndarray] = {}

    TABLE_LIMIT = 6000
    CONJ_CACHE = 256

    def _mult_table(self) -> np.ndarray:
        els = self.group.elements
        out = np.empty((self.n, self.n), dtype=np.int32)
        step = max(1, 2_000_000 // self.n)
        for lo in range(0, self.n, step):
            prods = mat_mul(els[lo:lo + step, None, :], els[None, :, :], self.m)
            out[lo:lo + step] = self.group.index_of(prods)
        return out

    def _class_labels(self) -> np.ndarray:
        keys = (self.orders * self.m + self.traces) * self.m + self.dets
        _, labels = np.unique(keys, return_inverse=True)
        return labels

    @property
    def _py(self):
        if not hasattr(self, "_py_cache"):
            els = [tuple(r) for r in self.group.elements.tolist()]
            m = self.m
            index = {((a * m + b) * m + c) * m + d: k for k, (a, b, c, d) in enumerate(els)}
            self._py_cache = (els, index)
        return self._py_cache

    def mul1(self, i: int, j: int) -> int:
        if self.table is not None:
            return int(self.table[i, j])
        els, index = self._py
        a, b, c, d = els[i]
        e, f, g, h = els[j]
        m = self.m
        return index[((((a * e + b * g) % m) * m + (a * f + b * h) % m) * m
                      + (c * e + d * g) % m) * m + (c * f + d * h) % m]

    def mul(self, i, j) -> np.ndarray:
        if self.table is not None:
            return self.table[i, j].astype(np.int64)
        els = self.group.elements
        return self.group.index_of(mat_mul(els[i], els[j], self.m))

    def conj(self, x: np.ndarray, s: int) -> np.ndarray:
        """Indices of x s x^-1 for every x in ``x``."""
        if self.table is not None:
            return self.table[self.table[x, s], self.inv[x]].astype(np.int64)
        col = self._conj_cache.get(s)
        if col is None:
            els = self.group.elements
            col = self.group.index_of(
                mat_mul(mat_mul(els, els[s], self.m), els[self.inv], self.m)).astype(np.int32)
            if len(self._conj_cache) >= self.CONJ_CACHE:
                self._conj_cache.pop(next(iter(self._conj_cache)))
            self._conj_cache[s] = col
        return col[x].astype(np.int64)

    def mask(self, idx: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[idx] = True
        return out

    def normalizer_mask(self, gens: Iterable[int], sub_mask: np.ndarray) -> np.ndarray:
        cand = np.arange(self.n)
        for s in gens:
            cand = cand[sub_mask[self.conj(cand, s)]]
        return self.mask(cand)

    def fingerprint(self, idx: np.ndarray) -> tuple:
        hist = Counter(self.class_label[idx].tolist())
        image = len(np.unique(self.red_codes[idx]))
        kern = int(self.is_kernel[idx].sum())
        dets = len(np.unique(self.dets[idx]))
        return (len(idx), image, kern, dets, tuple(sorted(hist.items())))

    def conjugator(self, gens_a: list[int], mask_b: np.ndarray) -> int | None:
        """An x with x A x^-1 <= B (hence = B when orders agree), or None."""
        cand = np.arange(self.n)
        for s in gens_a:
            cand = cand[mask_b[self.conj(cand, s)]]
            if not len(cand):
                return None
        return int(cand[0])

    def canonical_key(self, idx: np.ndarray, norm_mask: np.ndarray | None = None) -> tuple:
        """Lexicographically least sorted code tuple among the conjugates."""
        codes = self.group.codes
        els = self.group.elements
        k = len(idx)
        budget = 20_000_000
        if self.n * k <= budget or norm_mask is None:
            reps = np.arange(self.n)
        else:
            reps = self._transversal(norm_mask)
        best = None
        step = max(1, budget // max(k, 1))
        sub = els[idx]
        for lo in range(0, len(reps), step):
            x = reps[lo:lo + step]
            if self.table is not None:
                conj_idx = self.table[self.table[x[:, None], idx[None, :]], self.inv[x][:, None]]
                c = np.sort(codes[conj_idx], axis=1)
            else:
                conj = mat_mul(mat_mul(els[x][:, None, :], sub[None, :, :], self.m),
                               els[self.inv[x]][:, None, :], self.m)
                c = np.sort(encode(conj, self.m), axis=1)
            order = np.lexsort(c.T[::-1])
            cand = c[order[0]]
            if best is None or tuple(cand.tolist()) < best:
                best = tuple(cand.tolist())
        return best

    def _transversal(self, norm_mask: np.ndarray) -> np.ndarray:
        nidx = np.nonzero(norm_mask)[0]
        covered = np.zeros(self.n, dtype=bool)
        reps = []
        pos = 0
        while True:
            while pos < self.n and covered[pos]:
                pos += 1
            if pos >= self.n:
                break
            reps.append(pos)
            covered[self.mul(np.full(len(nidx), pos), nidx)] = True
        return np.array(reps, dtype=np.int64)


@dataclass
class SubgroupClass:
    """One conjugacy class of subgroups, with a representative."""

    representative: MatGroup
    invariant_fingerprint: tuple
    element_indices: np.ndarray = field(repr=False)
    canonical_key: tuple | None = field(default=None, repr=False)
    ambient: Ambient | None = field(default=None, repr=False, compare=False)

    @property
    def order(self) -> int:
        return self.representative.order

    def generator_quadruples(self) -> list[list[int]]:
        return [[int(x) for x in g] for g in self.representative.generators]

    def ensure_canonical_key(self) -> tuple:
        if self.canonical_key is None:
            if self.ambient is None:
                raise RuntimeError("no ambient attached; canonical key unavailable")
            amb = self.ambient
            idx = self.element_indices
            gens = amb.group.index_of(self.representative.generators)
            norm = amb.normalizer_mask(gens, amb.mask(idx))
            self.canonical_key = amb.canonical_key(idx, norm)
        return self.canonical_key


@dataclass
class _Rec:
    idx: np.ndarray
    gens: list[int]
    fp: tuple


def _prune_generators(amb: Ambient, gens: list[int], order: int) -> list[int]:
    if len(gens) <= 2:
        return gens
    ring = amb.group.ring
    els = amb.group.elements
    keep = list(gens)
    for g in list(gens):
        trial = [h for h in keep if h != g]
        if trial and closure(ring, els[trial], max_order=order).order == order:
            keep = trial
    return keep


def enumerate_subgroup_classes(
    ambient: MatGroup,
    surjective_det: bool = False,
    family: Family | None = None,
    best_effort: bool = False,
    progress: Callable[[str], None] | None = None,
    max_order: int | None = None,
) -> list[SubgroupClass]:
    """One representative per ambient-conjugacy class of subgroups.

    ``family`` restricts the search to a subgroup-closed family; the result
    is complete when the ambient is solvable or the family only contains
    solvable groups.  Otherwise :class:`CompletenessError` is raised unless
    ``best_effort`` is set.  ``surjective_det`` filters the output (the search
    itself must pass through groups with smaller determinant image).
    """
    family = family or all_subgroups_family()
    if not family.solvable_members and not best_effort and not is_solvable(ambient):
        raise CompletenessError(
            "ambient group is not solvable: cyclic extension may miss subgroups "
            "(use best-effort mode or a solvable family)")
    amb = Ambient(ambient)
    units = sum(1 for u in range(amb.m) if u % amb.p)
    by_order: dict[int, list[_Rec]] = {}
    trivial = _Rec(np.array([0]), [], amb.fingerprint(np.array([0])))
    by_order[1] = [trivial]
    processed = 0
    pending_orders = [1]
    while pending_orders:
        n = min(pending_orders)
        pending_orders.remove(n)
        for U in by_order[n]:
            processed += 1
            if progress and processed % 200 == 0:
                total = sum(len(v) for v in by_order.values())
                progress(f"extended {processed} classes, {total} found, current order {n}")
            umask = amb.mask(U.idx)
            nmask = amb.normalizer_mask(U.gens, umask)
            used = umask.copy()
            for g in np.nonzero(nmask & ~umask)[0]:
                if used[g]:
                    continue
                cur, q = int(g), 1
                powers = [0]
                while not umask[cur]:
                    powers.append(cur)
                    cur = amb.mul1(cur, int(g))
                    q += 1
                if not _is_prime(q):
                    continue
                cosets = [U.idx] + [amb.mul(U.idx * 0 + h, U.idx) for h in powers[1:]]
                W = np.sort(np.concatenate(cosets))
                used[W] = True
                if max_order is not None and len(W) > max_order:
                    continue
                if not family.predicate(W):
                    continue
                fp = amb.fingerprint(W)
                bucket = by_order.setdefault(len(W), [])
                wmask = None
                dup = False
                gens_w = U.gens + [int(g)]
                for other in bucket:
                    if other.fp != fp:
                        continue
                    if wmask is None:
                        wmask = amb.mask(W)
                    if amb.conjugator(other.gens, wmask) is not None:
                        dup = True
                        break
                if not dup:
                    bucket.append(_Rec(W, gens_w, fp))
                    if len(W) not in pending_orders and len(W) > n:
                        pending_orders.append(len(W))
    ring = ambient.ring
    out: list[SubgroupClass] = []
    for order in sorted(by_order):
        for rec in by_order[order]:
            if surjective_det and len(np.unique(amb.dets[rec.idx])) != units:
                continue
            gens = _prune_generators(amb, rec.gens, len(rec.idx))
            rep = closure(ring, ambient.elements[gens]) if gens else closure(ring, [])
            out.append(SubgroupClass(rep, rec.fp, rec.idx, None, amb))
    return sort_classes(out)


def sort_classes(classes: list[SubgroupClass]) -> list[SubgroupClass]:
    """Deterministic order: by order, then canonical key.

    Canonical keys are only computed inside groups of classes whose order and
    fingerprint coincide; elsewhere the fingerprint already separates them.
    """
    buckets: dict = {}
    for c in classes:
        buckets.setdefault((c.order, c.invariant_fingerprint), []).append(c)
    for bucket in buckets.values():
        if len(bucket) > 1:
            for c in bucket:
                c.ensure_canonical_key()

    def key(c: SubgroupClass):
        return (c.order, repr(c.invariant_fingerprint), c.canonical_key or ())

    return sorted(classes, key=key)


def brute_force_subgroups(group: MatGroup) -> list[frozenset]:
    """All subgroups as sets of element indices, by closing subsets of generators.

    Every subgroup of a group of order n is generated by at most log2(n)
    elements; we grow subgroups by adjoining single elements until no new
    subgroup appears.  Intended as a test oracle for small groups.
    """
    amb = Ambient(group)
    n = group.order

    def close(idx_set: set[int]) -> frozenset:
        cur = set(idx_set) | {0}
        frontier = list(cur)
        while frontier:
            new = []
            arr = np.array(sorted(cur))
            for f in frontier:
                prods = amb.mul(np.full(len(arr), f), arr).tolist() + amb.mul(arr, np.full(len(arr), f)).tolist()
                for x in prods:
                    if x not in cur:
                        cur.add(x)
                        new.append(x)
            frontier = new
        return frozenset(cur)

    found = {frozenset([0])}
    layer = {frozenset([0])}
    while layer:
        nxt = set()
        for S in layer:
            for x in range(n):
                if x not in S:
                    T = close(set(S) | {x})
                    if T not in found:
                        found.add(T)
                        nxt.add(T)
        layer = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def brute_force_classes(group: MatGroup) -> list[frozenset]:
    """Conjugacy classes of subgroups by brute force (one frozenset per class)."""
    amb = Ambient(group)
    subs = brute_force_subgroups(group)
    seen: set[frozenset] = set()
    reps = []
    for S in subs:
        if S in seen:
            continue
        reps.append(S)
        arr = np.array(sorted(S))
        for x in range(group.order):
            conj = mat_mul(mat_mul(group.elements[x], group.elements[arr], amb.m),
                           group.elements[amb.inv[x]], amb.m)
            conj = frozenset(group.index_of(conj).tolist())
            seen.add(conj)
    return reps


# on-disk cache ---------------------------------------------------------------

def ambient_hash(ambient: MatGroup) -> str:
    h = hashlib.sha256()
    h.update(np.sort(ambient.codes).astype("<i8").tobytes())
    return h.hexdigest()[:16]


def default_cache_dir() -> Path:
    env = os.environ.get("GALCOH_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "galcoh"


def cache_path(cache_dir: Path, ambient: MatGroup, tag: str) -> Path:
    r = ambient.ring
    return Path(cache_dir) / f"subgroups-p{r.p}-e{r.e}-{ambient_hash(ambient)}-{tag}.jsonl"


def save_classes(path: Path, ambient: MatGroup, tag: str, classes: list[SubgroupClass]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        header = {"format": CACHE_FORMAT, "version": CACHE_VERSION, "p": ambient.ring.p,
                  "e": ambient.ring.e, "ambient_hash": ambient_hash(ambient), "tag": tag,
                  "count": len(classes)}
        fh.write(json.dumps(header) + "\n")
        for c in classes:
            fh.write(json.dumps({"order": c.order, "generators": c.generator_quadruples()}) + "\n")
    os.replace(tmp, path)


def load_classes(path: Path, ambient: MatGroup, tag: str) -> list[SubgroupClass] | None:
    """Read cached classes; None when the file is absent, stale or malformed."""
    path = Path(path)
    if not path.exists():
        return None
    try:
        with open(path) as fh:
            header = json.loads(fh.readline())
            rows = [json.loads(line) for line in fh if line.strip()]
    except (OSError, ValueError):
        return None
    if (header.get("format") != CACHE_FORMAT or header.get("version") != CACHE_VERSION
            or header.get("ambient_hash") != ambient_hash(ambient) or header.get("tag") != tag
            or header.get("count") != len(rows)):
        return None
    amb = Ambient(ambient)
    ring = ambient.ring
    out = []
    for row in rows:
        rep = closure(ring, row["generators"])
        if rep.order != row["order"]:
            return None
        idx = np.sort(ambient.index_of(rep.elements))
        if (idx < 0).any():
            return None
        out.append(SubgroupClass(rep, amb.fingerprint(idx), idx, None, amb))
    return out


def cached_enumeration(ambient: MatGroup, tag: str, cache_dir: Path | None = None,
                       use_cache: bool = True, **kwargs) -> list[SubgroupClass]:
    cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
    path = cache_path(cache_dir, ambient, tag)
    if use_cache:
        hit = load_classes(path, ambient, tag)
        if hit is not None:
            return hit
    classes = enumerate_subgroup_classes(ambient, **kwargs)
    if use_cache:
        try:
            save_classes(path, ambient, tag, classes)
        except OSError:
            pass
    return classes
