"""Finite subgroups of GL_2(Z/p^e) held as explicit element tables.

Elements are rows ``(a, b, c, d)`` of an int64 array, standing for the matrix
[[a, b], [c, d]].  A :class:`MatGroup` stores its elements in breadth-first
order from the identity, together with the spanning tree of that search
(``parent`` and ``via``), so that every element carries a word in the
generators.  Lookups go through the integer code ((a*N + b)*N + c)*N + d.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .modarith import RingSpec

IDENTITY = (1, 0, 0, 1)


class NotInvertibleError(ValueError):
    pass


@dataclass(frozen=True)
class GL2Element:
    ring: RingSpec
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        m = self.ring.modulus
        for f in "abcd":
            object.__setattr__(self, f, getattr(self, f) % m)
        if (self.a * self.d - self.b * self.c) % self.ring.p == 0:
            raise NotInvertibleError(f"{self.entries} is not invertible mod {self.ring.p}")

    @classmethod
    def of(cls, ring: RingSpec, m: Sequence) -> "GL2Element":
        flat = list(m[0]) + list(m[1]) if len(m) == 2 else list(m)
        return cls(ring, *flat)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.ring.modulus

    @property
    def trace(self) -> int:
        return (self.a + self.d) % self.ring.modulus

    def __mul__(self, other: "GL2Element") -> "GL2Element":
        return GL2Element(self.ring, *mat_mul(np.array(self.entries), np.array(other.entries), self.ring.modulus))

    def inverse(self) -> "GL2Element":
        return GL2Element(self.ring, *mat_inv(np.array(self.entries), self.ring.modulus))

    def order(self) -> int:
        x, k = self, 1
        while x.entries != IDENTITY:
            x, k = x * self, k + 1
        return k

    def matrix(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(2, 2)


# vectorised 2x2 arithmetic on (..., 4) arrays

def mat_mul(x: np.ndarray, y: np.ndarray, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    a = (x[..., 0] * y[..., 0] + x[..., 1] * y[..., 2]) % m
    b = (x[..., 0] * y[..., 1] + x[..., 1] * y[..., 3]) % m
    c = (x[..., 2] * y[..., 0] + x[..., 3] * y[..., 2]) % m
    d = (x[..., 2] * y[..., 1] + x[..., 3] * y[..., 3]) % m
    return np.stack([a, b, c, d], axis=-1)


def mat_det(x: np.ndarray, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    return (x[..., 0] * x[..., 3] - x[..., 1] * x[..., 2]) % m


def mat_inv(x: np.ndarray, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    det = mat_det(x, m)
    inv_table = np.zeros(m, dtype=np.int64)
    for u in range(m):
        if gcd(u, m) == 1:
            inv_table[u] = pow(u, -1, m)
    di = inv_table[det]
    return np.stack([x[..., 3] * di % m, (-x[..., 1]) * di % m,
                     (-x[..., 2]) * di % m, x[..., 0] * di % m], axis=-1)


def encode(x: np.ndarray, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    return ((x[..., 0] * m + x[..., 1]) * m + x[..., 2]) * m + x[..., 3]


def decode(codes: np.ndarray, m: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    d = codes % m
    c = (codes // m) % m
    b = (codes // (m * m)) % m
    a = codes // (m ** 3)
    return np.stack([a, b, c, d], axis=-1)


def gl2_order(ring: RingSpec) -> int:
    p, e = ring.p, ring.e
    return p ** (4 * e - 4) * (p * p - 1) * (p * p - p)


class CodeIndex:
    """Maps element codes to positions in a table (-1 when absent)."""

    DENSE_LIMIT = 60_000_000

    def __init__(self, codes: np.ndarray, m: int):
        self.size = m ** 4
        if self.size <= self.DENSE_LIMIT and len(codes) * 64 > self.size // 8:
            self.table = np.full(self.size, -1, dtype=np.int32)
            self.table[codes] = np.arange(len(codes), dtype=np.int32)
            self.order = None
        else:
            self.table = None
            self.order = np.argsort(codes, kind="stable")
            self.sorted = codes[self.order]

    def lookup(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        if self.table is not None:
            return self.table[codes].astype(np.int64)
        pos = np.searchsorted(self.sorted, codes)
        pos = np.minimum(pos, len(self.sorted) - 1)
        hit = self.sorted[pos] == codes
        return np.where(hit, self.order[pos], -1)


class MatGroup:
    """An explicit finite subgroup of GL_2(Z/p^e).

    ``elements[0]`` is the identity; ``parent[i]`` and ``via[i]`` record the
    search tree, so ``elements[i] = elements[parent[i]] * generators[via[i]]``.
    """

    def __init__(self, ring: RingSpec, elements: np.ndarray, generators: np.ndarray,
                 parent: np.ndarray, via: np.ndarray):
        self.ring = ring
        self.elements = elements
        self.generators = generators
        self.parent = parent
        self.via = via
        self.elements.setflags(write=False)

    # basic data -----------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"MatGroup({self.ring}, order={self.order}, gens={self.generators.tolist()})"

    @property
    def modulus(self) -> int:
        return self.ring.modulus

    @cached_property
    def codes(self) -> np.ndarray:
        return encode(self.elements, self.modulus)

    @cached_property
    def _index(self) -> CodeIndex:
        return CodeIndex(self.codes, self.modulus)

    @cached_property
    def code_set(self) -> frozenset:
        return frozenset(self.codes.tolist())

    def index_of(self, mats) -> np.ndarray:
        mats = np.asarray(mats, dtype=np.int64) % self.modulus
        return self._index.lookup(encode(mats, self.modulus))

    def contains(self, mats) -> np.ndarray | bool:
        idx = self.index_of(mats)
        return bool(idx >= 0) if np.ndim(idx) == 0 else idx >= 0

    def __contains__(self, g) -> bool:
        if isinstance(g, GL2Element):
            g = g.entries
        return bool(self.contains(np.asarray(g)))

    def element(self, i: int) -> GL2Element:
        return GL2Element(self.ring, *map(int, self.elements[i]))

    def word(self, i: int) -> list[int]:
        out = []
        while i:
            out.append(int(self.via[i]))
            i = int(self.parent[i])
        return out[::-1]

    @cached_property
    def cayley(self) -> np.ndarray:
        """cayley[i, s] = index of elements[i] * generators[s]."""
        cols = []
        for s in self.generators:
            cols.append(self.index_of(mat_mul(self.elements, s, self.modulus)))
        table = np.stack(cols, axis=1) if cols else np.zeros((self.order, 0), dtype=np.int64)
        if (table < 0).any():
            raise RuntimeError("element table is not closed")
        return table

    @cached_property
    def inverse_index(self) -> np.ndarray:
        return self.index_of(mat_inv(self.elements, self.modulus))

    def multiply_index(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        return self.index_of(mat_mul(self.elements[i], self.elements[j], self.modulus))

    @cached_property
    def element_orders(self) -> np.ndarray:
        m = self.modulus
        n = self.order
        orders = np.zeros(n, dtype=np.int64)
        cur = self.elements.copy()
        idc = encode(np.array(IDENTITY), m)
        k = 1
        while True:
            done = (encode(cur, m) == idc) & (orders == 0)
            orders[done] = k
            if (orders > 0).all():
                return orders
            todo = orders == 0
            cur[todo] = mat_mul(cur[todo], self.elements[todo], m)
            k += 1

    @cached_property
    def dets(self) -> np.ndarray:
        return mat_det(self.elements, self.modulus)

    @cached_property
    def traces(self) -> np.ndarray:
        return (self.elements[:, 0] + self.elements[:, 3]) % self.modulus

    def is_subgroup_of(self, other: "MatGroup") -> bool:
        return self.ring == other.ring and bool(other.contains(self.elements).all())

    def same_elements(self, other: "MatGroup") -> bool:
        return self.ring == other.ring and self.code_set == other.code_set

    def is_abelian(self) -> bool:
        g = self.generators
        m = self.modulus
        return all((mat_mul(x, y, m) == mat_mul(y, x, m)).all() for x in g for y in g)

    def conjugate(self, x) -> "MatGroup":
        """x G x^{-1}."""
        x = np.asarray(x.entries if isinstance(x, GL2Element) else x, dtype=np.int64)
        m = self.modulus
        xi = mat_inv(x, m)
        gens = mat_mul(mat_mul(x, self.generators, m), xi, m)
        return closure(self.ring, gens)

    def mod_p_image_codes(self) -> np.ndarray:
        p = self.ring.p
        return np.unique(encode(self.elements % p, p))


def _as_generator_array(ring: RingSpec, generators) -> np.ndarray:
    rows = []
    for g in generators:
        if isinstance(g, GL2Element):
            rows.append(g.entries)
        else:
            g = np.asarray(g, dtype=np.int64).ravel()
            rows.append(tuple(int(x) for x in g))
    arr = np.array(rows, dtype=np.int64).reshape(-1, 4) % ring.modulus
    if len(arr) and (mat_det(arr, ring.modulus) % ring.p == 0).any():
        raise NotInvertibleError("non-invertible generator")
    return arr


def closure(ring: RingSpec, generators, max_order: int | None = None) -> MatGroup:
    """Close a generator list under multiplication, breadth first.

    The element order is that of a queue-based search which expands each
    element by the generators in list order.
    """
    gens = _as_generator_array(ring, generators)
    m = ring.modulus
    ident = np.array([IDENTITY], dtype=np.int64)
    id_code = int(encode(ident, m)[0])
    dense = m ** 4 <= CodeIndex.DENSE_LIMIT
    if dense:
        seen = np.zeros(m ** 4, dtype=bool)
        seen[id_code] = True
    else:
        seen_set = {id_code}
    layers = [ident]
    parents = [np.array([0])]
    vias = [np.array([0])]
    frontier = ident
    frontier_idx = np.array([0])
    total = 1
    k = len(gens)
    while len(frontier) and k:
        prods = mat_mul(frontier[:, None, :], gens[None, :, :], m).reshape(-1, 4)
        codes = encode(prods, m)
        par = np.repeat(frontier_idx, k)
        via = np.tile(np.arange(k), len(frontier))
        uniq, first = np.unique(codes, return_index=True)
        if dense:
            fresh = ~seen[uniq]
        else:
            fresh = np.fromiter((int(c) not in seen_set for c in uniq), dtype=bool, count=len(uniq))
        first = np.sort(first[fresh])
        if not len(first):
            break
        new_codes = codes[first]
        if dense:
            seen[new_codes] = True
        else:
            seen_set.update(new_codes.tolist())
        frontier = prods[first]
        frontier_idx = np.arange(total, total + len(first))
        total += len(first)
        layers.append(frontier)
        parents.append(par[first])
        vias.append(via[first])
        if max_order is not None and total > max_order:
            raise OverflowError(f"closure exceeded {max_order} elements")
    elements = np.concatenate(layers)
    return MatGroup(ring, elements, gens, np.concatenate(parents), np.concatenate(vias))


def from_elements(ring: RingSpec, elements: np.ndarray) -> MatGroup:
    """Build a MatGroup from a closed element set, choosing generators greedily."""
    elements = np.asarray(elements, dtype=np.int64).reshape(-1, 4) % ring.modulus
    m = ring.modulus
    target = len(np.unique(encode(elements, m)))
    orders = None
    gens: list[np.ndarray] = []
    group = closure(ring, [])
    # prefer elements of large order: fewer generators
    orders = _orders_of(elements, m)
    ranking = np.lexsort((np.arange(len(elements)), -orders))
    for i in ranking:
        if group.order == target:
            break
        if not group.contains(elements[i]):
            gens.append(elements[i])
            group = closure(ring, gens)
    if group.order != target:
        raise ValueError("element set is not closed under multiplication")
    return group


def _orders_of(x: np.ndarray, m: int, limit: int = 100_000) -> np.ndarray:
    orders = np.zeros(len(x), dtype=np.int64)
    cur = x.copy()
    idc = encode(np.array(IDENTITY), m)
    k = 1
    while k <= limit:
        orders[(encode(cur, m) == idc) & (orders == 0)] = k
        todo = orders == 0
        if not todo.any():
            break
        cur[todo] = mat_mul(cur[todo], x[todo], m)
        k += 1
    return orders


def unit_group_generators(ring: RingSpec) -> list[int]:
    p, e, m = ring.p, ring.e, ring.modulus
    if p == 2:
        gens = [m - 1] if e >= 2 else []
        if e >= 3:
            gens.append(5)
        return gens
    # a primitive root mod p that stays primitive mod p^2
    for g in range(2, m):
        if g % p == 0:
            continue
        order_mod_p = 1
        x = g % p
        while x != 1:
            x = x * g % p
            order_mod_p += 1
        if order_mod_p == p - 1 and (e == 1 or pow(g, p - 1, p * p) != 1):
            return [g]
    return [1]


def gl2(ring: RingSpec) -> MatGroup:
    gens = [(1, 1, 0, 1), (1, 0, 1, 1)] + [(u, 0, 0, 1) for u in unit_group_generators(ring)]
    return closure(ring, gens)


def borel(ring: RingSpec) -> MatGroup:
    gens = [(1, 1, 0, 1)] + [(u, 0, 0, 1) for u in unit_group_generators(ring)] \
        + [(1, 0, 0, u) for u in unit_group_generators(ring)]
    return closure(ring, gens)


def kernel_generators(ring: RingSpec, level: int = 1) -> list[tuple[int, int, int, int]]:
    """Generators of ker(GL_2(Z/p^e) -> GL_2(Z/p^level))."""
    p, e = ring.p, ring.e
    out = []
    for k in range(level, e):
        q = p ** k
        out += [(1 + q, 0, 0, 1), (1, q, 0, 1), (1, 0, q, 1), (1, 0, 0, 1 + q)]
    return out


def reduction(group: MatGroup, target_level: int) -> tuple[MatGroup, MatGroup]:
    """Image and kernel of reduction to level ``target_level``."""
    if not 1 <= target_level <= group.ring.e:
        raise ValueError("target level must lie in [1, e]")
    low = group.ring.at_level(target_level)
    q = low.modulus
    image = closure(low, group.generators % q)
    red = group.elements % q
    in_kernel = (red[:, 0] == 1) & (red[:, 1] == 0) & (red[:, 2] == 0) & (red[:, 3] == 1)
    kernel = from_elements(group.ring, group.elements[in_kernel])
    return image, kernel


def greatest_possible(G: MatGroup, level: int) -> MatGroup:
    """Full preimage of a mod-p group in GL_2(Z/p^level)."""
    if G.ring.e != 1:
        raise ValueError("greatest_possible expects a group over F_p")
    ring = RingSpec(G.ring.p, level)
    gens = [tuple(int(x) for x in g) for g in G.generators] + kernel_generators(ring)
    out = closure(ring, gens)
    expected = G.order * G.ring.p ** (4 * (level - 1))
    if out.order != expected:
        raise RuntimeError(f"preimage has order {out.order}, expected {expected}")
    return out


def normalizer(ambient: MatGroup, sub: MatGroup) -> MatGroup:
    if not sub.is_subgroup_of(ambient):
        raise ValueError("sub is not contained in ambient")
    mask = normalizer_mask(ambient, sub)
    return from_elements(ambient.ring, ambient.elements[mask])


def normalizer_mask(ambient: MatGroup, sub: MatGroup) -> np.ndarray:
    m = ambient.modulus
    g = ambient.elements
    gi = g[ambient.inverse_index]
    mask = np.ones(ambient.order, dtype=bool)
    for s in sub.generators:
        idx = np.nonzero(mask)[0]
        conj = mat_mul(mat_mul(g[idx], s, m), gi[idx], m)
        mask[idx] = sub.contains(conj)
    return mask


def cyclic_subgroups(group: MatGroup) -> list[MatGroup]:
    """Distinct cyclic subgroups, each generated by one element of maximal order."""
    m = group.modulus
    orders = group.element_orders
    seen: set[frozenset] = set()
    out = []
    for i in np.argsort(-orders, kind="stable"):
        x = group.elements[i]
        powers = [np.array(IDENTITY)]
        cur = x
        while encode(cur, m) != encode(np.array(IDENTITY), m):
            powers.append(cur)
            cur = mat_mul(cur, x, m)
        key = frozenset(encode(np.array(powers), m).tolist())
        if key in seen:
            continue
        seen.add(key)
        out.append(closure(group.ring, [x]))
    return sorted(out, key=lambda c: (c.order, c.codes.min() if c.order else 0, sorted(c.code_set)))


def cyclic_generator_indices(group: MatGroup) -> np.ndarray:
    """One element index per cyclic subgroup (an element of that subgroup of maximal order)."""
    m = group.modulus
    n = group.order
    orders = group.element_orders
    covered = np.zeros(n, dtype=bool)
    reps = []
    for i in np.argsort(-orders, kind="stable"):
        if covered[i]:
            continue
        reps.append(i)
        o = int(orders[i])
        x = group.elements[i]
        cur = x
        for k in range(1, o + 1):
            if gcd(k, o) == 1:
                covered[group.index_of(cur)] = True
            cur = mat_mul(cur, x, m)
    return np.array(sorted(reps), dtype=np.int64)


@dataclass(frozen=True)
class StructuralPredicates:
    has_nontrivial_homothety_mod_p: bool
    det_surjective: bool
    sylow_p_order: int
    is_borel_conjugate: bool
    trace_det_pairs: frozenset


def has_nontrivial_homothety_mod_p(group: MatGroup) -> bool:
    p = group.ring.p
    r = group.elements % p
    scalar = (r[:, 1] == 0) & (r[:, 2] == 0) & (r[:, 0] == r[:, 3])
    return bool((scalar & (r[:, 0] != 1)).any())


def det_surjective(group: MatGroup) -> bool:
    m = group.modulus
    units = sum(1 for u in range(m) if u % group.ring.p)
    return len(np.unique(group.dets)) == units


def sylow_p_order(group: MatGroup) -> int:
    n, p, out = group.order, group.ring.p, 1
    while n % p == 0:
        n //= p
        out *= p
    return out


def stable_lines_mod_p(group: MatGroup) -> list[tuple[int, int]]:
    """Lines of F_p^2 (as normalised vectors) stable under the mod-p image."""
    p = group.ring.p
    lines = [(1, t) for t in range(p)] + [(0, 1)]
    gens = group.generators % p
    out = []
    for v in lines:
        ok = True
        for g in gens:
            w = ((g[0] * v[0] + g[1] * v[1]) % p, (g[2] * v[0] + g[3] * v[1]) % p)
            if (w[0] * v[1] - w[1] * v[0]) % p:
                ok = False
                break
        if ok:
            out.append(v)
    return out


def structural_predicates(group: MatGroup) -> StructuralPredicates:
    pairs = frozenset(zip(group.traces.tolist(), group.dets.tolist()))
    return StructuralPredicates(
        has_nontrivial_homothety_mod_p=has_nontrivial_homothety_mod_p(group),
        det_surjective=det_surjective(group),
        sylow_p_order=sylow_p_order(group),
        is_borel_conjugate=bool(stable_lines_mod_p(group)),
        trace_det_pairs=pairs,
    )


def derived_subgroup(group: MatGroup) -> MatGroup:
    m = group.modulus
    els = group.elements
    inv = els[group.inverse_index]
    comms = []
    gens = group.generators
    ginv = mat_inv(gens, m)
    # commutators of the generators, closed under conjugation by the group
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            c = mat_mul(mat_mul(gens[i], gens[j], m), mat_mul(ginv[i], ginv[j], m), m)
            comms.append(c)
    if not comms:
        return closure(group.ring, [])
    conj = mat_mul(mat_mul(els[:, None, :], np.array(comms)[None, :, :], m), inv[:, None, :], m)
    uniq = np.unique(encode(conj.reshape(-1, 4), m))
    return _subgroup_generated_by_codes(group.ring, uniq)


def _subgroup_generated_by_codes(ring: RingSpec, codes: np.ndarray) -> MatGroup:
    m = ring.modulus
    mats = decode(codes, m)
    gens: list[np.ndarray] = []
    sub = closure(ring, [])
    for x in mats:
        if not sub.contains(x):
            gens.append(x)
            sub = closure(ring, gens)
    return sub


def is_solvable(group: MatGroup) -> bool:
    cur = group
    while cur.order > 1:
        nxt = derived_subgroup(cur)
        if nxt.order == cur.order:
            return False
        cur = nxt
    return True


def parse_matrix(text: str) -> tuple[int, int, int, int]:
    """Parse ``a,b;c,d`` or ``a b c d`` into an entry quadruple."""
    cleaned = text.replace("(", " ").replace(")", " ").replace("[", " ").replace("]", " ")
    cleaned = cleaned.replace(";", " ").replace(",", " ")
    vals = [int(t) for t in cleaned.split()]
    if len(vals) != 4:
        raise ValueError(f"expected four entries, got {text!r}")
    return tuple(vals)  # type: ignore[return-value]


def group_from_generators(p: int, e: int, gens: Iterable) -> MatGroup:
    return closure(RingSpec(p, e), list(gens))
