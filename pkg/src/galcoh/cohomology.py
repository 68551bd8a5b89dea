"""Cohomology of explicit matrix groups with coefficients in torsion modules.

A 1-cocycle on a group with generators s_1..s_k is determined by its values
on the generators.  Walking the search tree of the group expresses every
value xi(g) as A_g @ x, where x stacks the generator values; the remaining
edges of the Cayley graph give the linear conditions cutting out Z^1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .matgroup import (
    GL2Element,
    MatGroup,
    closure,
    cyclic_generator_indices,
    encode,
    mat_inv,
    mat_mul,
)
from .modarith import (
    ResidueMatrix,
    RingSpec,
    Submodule,
    howell_form,
    kernel,
    membership,
    quotient_decomposition,
    quotient_invariants,
    smith_form,
    solve_affine,
)


class UnsupportedGroupShape(ValueError):
    pass


class TrivialCohomologyError(ValueError):
    pass


def _natural(elements: np.ndarray, m: int) -> np.ndarray:
    return (elements % m).reshape(-1, 2, 2)


def _adjoint(elements: np.ndarray, m: int) -> np.ndarray:
    # m -> g m g^{-1} on row-major flattened 2x2 matrices: kron(g, g^{-T})
    g = _natural(elements, m)
    gi = _natural(mat_inv(elements % m, m), m)
    git = np.transpose(gi, (0, 2, 1))
    out = np.einsum("nij,nkl->nikjl", g, git).reshape(-1, 4, 4)
    return out % m


def _upper_char(elements, m):
    return (elements[:, 0] % m).reshape(-1, 1, 1)


def _lower_char(elements, m):
    return (elements[:, 3] % m).reshape(-1, 1, 1)


def _trivial(rank):
    def act(elements, m):
        return np.broadcast_to(np.eye(rank, dtype=np.int64), (len(elements), rank, rank)).copy()
    return act


@dataclass(frozen=True)
class GModule:
    """A module (Z/p^e)^rank with a linear action of a matrix group.

    ``kind`` is one of ``natural`` (column vectors, E[p^e]), ``adjoint``
    (conjugation on flattened 2x2 matrices), ``upper``/``lower`` (the
    characters g -> a and g -> d, i.e. the isogeny kernel line and the
    quotient by it) or ``trivial``.  The group may live at a higher level
    than the module; entries are then reduced.
    """

    ring: RingSpec
    kind: str = "natural"
    rank: int = field(default=2)
    custom: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        ranks = {"natural": 2, "adjoint": 4, "upper": 1, "lower": 1}
        if self.kind in ranks:
            object.__setattr__(self, "rank", ranks[self.kind])
        elif self.kind not in ("trivial", "custom"):
            raise ValueError(f"unknown module kind {self.kind!r}")

    @classmethod
    def natural(cls, ring: RingSpec) -> "GModule":
        return cls(ring, "natural")

    @classmethod
    def adjoint(cls, ring: RingSpec) -> "GModule":
        return cls(ring, "adjoint")

    def matrices(self, elements: np.ndarray) -> np.ndarray:
        elements = np.asarray(elements, dtype=np.int64).reshape(-1, 4)
        m = self.ring.modulus
        if self.kind == "natural":
            return _natural(elements, m)
        if self.kind == "adjoint":
            return _adjoint(elements, m)
        if self.kind == "upper":
            return _upper_char(elements, m)
        if self.kind == "lower":
            return _lower_char(elements, m)
        if self.kind == "trivial":
            return _trivial(self.rank)(elements, m)
        return np.asarray(self.custom(elements, m), dtype=np.int64) % m

    def act(self, g, v) -> tuple[int, ...]:
        g = np.asarray(g.entries if isinstance(g, GL2Element) else g, dtype=np.int64)
        mat = self.matrices(g.reshape(1, 4))[0]
        return tuple(int(x) for x in (mat @ np.asarray(v, dtype=np.int64)) % self.ring.modulus)

    def check_compatible(self, G: MatGroup) -> None:
        if G.ring.p != self.ring.p or G.ring.e < self.ring.e:
            raise ValueError(f"group over {G.ring} cannot act on a module over {self.ring}")


class _Propagation:
    """Affine expressions xi(g) = A[g] @ x over the search tree of G."""

    def __init__(self, G: MatGroup, M: GModule):
        M.check_compatible(G)
        self.G, self.M = G, M
        m = M.ring.modulus
        r, k, n = M.rank, len(G.generators), G.order
        self.r, self.k = r, k
        rho = M.matrices(G.elements)
        self.rho = rho
        dtype = np.int32 if m < 2 ** 15 else np.int64
        A = np.zeros((n, r, r * k), dtype=dtype)
        parent, via = G.parent, G.via
        lo = 1
        while lo < n:
            hi = int(np.searchsorted(parent, lo, side="left"))
            hi = max(hi, lo + 1)
            idx = np.arange(lo, hi)
            par = parent[idx]
            A[idx] = A[par]
            for s in range(k):
                sel = via[idx] == s
                if sel.any():
                    block = A[idx[sel], :, s * r:(s + 1) * r].astype(np.int64) + rho[par[sel]]
                    A[idx[sel], :, s * r:(s + 1) * r] = block % m
            lo = hi
        self.A = A

    def values(self, x: Sequence[int]) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        return (self.A.astype(np.int64) @ x) % self.M.ring.modulus

    def value_at(self, idx, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        return (self.A[idx].astype(np.int64) @ x) % self.M.ring.modulus

    @cached_property
    def constraints(self) -> Submodule:
        G, ring = self.G, self.M.ring
        m, r, k = ring.modulus, self.r, self.k
        span = Submodule.zero(ring, r * k)
        if k == 0:
            return span
        cay = G.cayley
        n = G.order
        chunk = max(1, 400_000 // max(1, k))
        for lo in range(0, n, chunk):
            i = np.arange(lo, min(n, lo + chunk))
            for s in range(k):
                j = cay[i, s]
                tree = (G.parent[j] == i) & (G.via[j] == s) & (j != 0)
                ii, jj = i[~tree], j[~tree]
                if not len(ii):
                    continue
                rows = self.A[ii].astype(np.int64) - self.A[jj]
                rows[:, :, s * r:(s + 1) * r] += self.rho[ii]
                rows = rows.reshape(-1, r * k) % m
                rows = rows[np.any(rows != 0, axis=1)]
                if len(rows):
                    span = howell_form(ring, np.concatenate([span.generators_array(), rows]), r * k)
        return span

    @cached_property
    def z1(self) -> Submodule:
        C = self.constraints
        n = self.r * self.k
        if C.is_zero:
            return Submodule.full(self.M.ring, n)
        return kernel(ResidueMatrix.from_rows(self.M.ring, C.basis))

    @cached_property
    def b1(self) -> Submodule:
        ring = self.M.ring
        r, k = self.r, self.k
        if k == 0:
            return Submodule.zero(ring, 0)
        gen_rho = self.M.matrices(self.G.generators)
        rows = []
        for t in range(r):
            vec = []
            for s in range(k):
                vec.extend(((gen_rho[s] - np.eye(r, dtype=np.int64))[:, t]).tolist())
            rows.append(vec)
        return howell_form(ring, rows, r * k)


@dataclass(eq=False)
class CocycleClass:
    """A 1-cocycle given by its values on the generators of ``group``."""

    group: MatGroup
    module: GModule
    generator_values: tuple[tuple[int, ...], ...]
    order: int | None = None

    @classmethod
    def from_vector(cls, group, module, x, order=None) -> "CocycleClass":
        r = module.rank
        x = [int(v) for v in x]
        vals = tuple(tuple(x[s * r:(s + 1) * r]) for s in range(len(group.generators)))
        return cls(group, module, vals, order)

    @property
    def vector(self) -> tuple[int, ...]:
        return tuple(v for g in self.generator_values for v in g)

    @cached_property
    def _prop(self) -> _Propagation:
        return _propagation(self.group, self.module)

    @cached_property
    def values(self) -> np.ndarray:
        """Value table, row i is xi(group.elements[i])."""
        return self._prop.values(self.vector)

    def value(self, g) -> tuple[int, ...]:
        i = int(self.group.index_of(np.asarray(g.entries if isinstance(g, GL2Element) else g)))
        if i < 0:
            raise ValueError("element not in group")
        return tuple(int(v) for v in self._prop.value_at(i, self.vector))

    def is_cocycle(self, samples: int | None = None, seed: int = 0) -> bool:
        G, m = self.group, self.module.ring.modulus
        vals = self.values
        rho = self._prop.rho
        n = G.order
        if samples is None and n <= 200:
            i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
            i, j = i.ravel(), j.ravel()
        else:
            rng = np.random.default_rng(seed)
            cnt = samples or 10_000
            i = rng.integers(0, n, cnt)
            j = rng.integers(0, n, cnt)
        prod = G.multiply_index(i, j)
        lhs = vals[prod]
        rhs = (vals[i] + np.einsum("nab,nb->na", rho[i], vals[j])) % m
        return bool((lhs == rhs).all())

    def is_coboundary(self) -> bool:
        return is_coboundary(self.group, self.module, [np.array(v) for v in self.generator_values])


_PROP_CACHE: dict = {}


def _propagation(G: MatGroup, M: GModule) -> _Propagation:
    key = (id(G), M)
    hit = _PROP_CACHE.get(key)
    if hit is not None and hit.G is G:
        return hit
    prop = _Propagation(G, M)
    if len(_PROP_CACHE) > 8:
        _PROP_CACHE.clear()
    _PROP_CACHE[key] = prop
    return prop


@dataclass
class CohomologyGroup:
    """Invariant factors of a cohomology group plus representatives.

    For degree 1 the representatives are :class:`CocycleClass` values, one per
    factor.  For the degree-2 computation they are module vectors whose
    classes generate the Tate group that computes H^2.
    """

    invariant_factors: list[int]
    representatives: list
    degree: int = 1
    z1: Submodule | None = field(default=None, repr=False)
    b1: Submodule | None = field(default=None, repr=False)

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    @property
    def is_trivial(self) -> bool:
        return not self.invariant_factors

    def describe(self) -> str:
        return format_factors(self.invariant_factors)


def format_factors(factors: Sequence[int]) -> str:
    if not factors:
        return "0"
    parts = []
    for d in sorted(set(factors)):
        c = list(factors).count(d)
        parts.append(f"(Z/{d})^{c}" if c > 1 else f"Z/{d}")
    return " + ".join(parts)


def h0(G: MatGroup, M: GModule) -> Submodule:
    M.check_compatible(G)
    ring, r = M.ring, M.rank
    if not len(G.generators):
        return Submodule.full(ring, r)
    mats = M.matrices(G.generators) - np.eye(r, dtype=np.int64)
    return kernel(ResidueMatrix.from_array(ring, mats.reshape(-1, r)))


def _normalise(x, b1: Submodule) -> tuple[int, ...]:
    return b1.reduce(x) if not b1.is_zero else tuple(int(v) for v in x)


def h1(G: MatGroup, M: GModule) -> CohomologyGroup:
    """H^1(G, M) with one representative cocycle per invariant factor."""
    prop = _propagation(G, M)
    if prop.k == 0:
        return CohomologyGroup([], [], 1, Submodule.zero(M.ring, 0), Submodule.zero(M.ring, 0))
    z1, b1 = prop.z1, prop.b1
    if not b1 <= z1:
        raise RuntimeError("coboundaries fail the cocycle relations; element table is inconsistent")
    parts = quotient_decomposition(z1, b1)
    reps = [CocycleClass.from_vector(G, M, _normalise(v, b1), d) for d, v in parts]
    return CohomologyGroup([d for d, _ in parts], reps, 1, z1, b1)


def _cyclic_generator(C: MatGroup) -> np.ndarray:
    if len(C.generators) == 1:
        return C.generators[0]
    orders = C.element_orders
    hits = np.nonzero(orders == C.order)[0]
    if not len(hits):
        raise ValueError("group is not cyclic")
    return C.elements[hits[0]]


def _power_sum(rho: np.ndarray, k: int, m: int) -> np.ndarray:
    r = rho.shape[0]
    acc = np.zeros((r, r), dtype=np.int64)
    cur = np.eye(r, dtype=np.int64)
    for _ in range(k):
        acc = (acc + cur) % m
        cur = (cur @ rho) % m
    return acc


def _discrete_log(g: np.ndarray, target: np.ndarray, m: int, order: int) -> int:
    cur = np.array([1, 0, 0, 1], dtype=np.int64)
    t = tuple(int(x) for x in np.asarray(target) % m)
    for k in range(order):
        if tuple(int(x) for x in cur) == t:
            return k
        cur = mat_mul(cur, g, m)
    raise ValueError("element is not a power of the generator")


def h1_cyclic(C: MatGroup, M: GModule) -> CohomologyGroup:
    """ker(norm) / im(g - 1) for a cyclic group with generator g."""
    M.check_compatible(C)
    ring, r, m = M.ring, M.rank, M.ring.modulus
    g = _cyclic_generator(C)
    o = C.order
    rho = M.matrices(g.reshape(1, 4))[0]
    norm = _power_sum(rho, o, m)
    ker = kernel(ResidueMatrix.from_array(ring, norm))
    im = howell_form(ring, ((rho - np.eye(r, dtype=np.int64)) % m).T, r)
    parts = quotient_decomposition(ker, im)
    reps = []
    for d, v in parts:
        v = im.reduce(v) if not im.is_zero else v
        gen_vals = []
        for s in C.generators:
            k = _discrete_log(g, s, C.modulus, o)
            gen_vals.append(tuple(int(t) for t in (_power_sum(rho, k, m) @ np.asarray(v)) % m))
        reps.append(CocycleClass(C, M, tuple(gen_vals), d))
    return CohomologyGroup([d for d, _ in parts], reps, 1, ker, im)


def is_coboundary(G: MatGroup, M: GModule, generator_values) -> bool:
    """Whether the cocycle with these generator values is g -> g.m - m."""
    ring, r, m = M.ring, M.rank, M.ring.modulus
    if not len(G.generators):
        return True
    mats = (M.matrices(G.generators) - np.eye(r, dtype=np.int64)) % m
    A = ResidueMatrix.from_array(ring, mats.reshape(-1, r))
    b = np.concatenate([np.asarray(v, dtype=np.int64) for v in generator_values]) % m
    return solve_affine(A, b.tolist()) is not None


def restrict(cls: CocycleClass, sub: MatGroup) -> CocycleClass:
    G = cls.group
    idx = G.index_of(sub.generators)
    if (np.asarray(idx) < 0).any():
        raise ValueError("sub is not contained in the group of the cocycle")
    if not sub.is_subgroup_of(G):
        raise ValueError("sub is not contained in the group of the cocycle")
    prop = cls._prop
    vals = tuple(tuple(int(v) for v in prop.value_at(int(i), cls.vector)) for i in np.atleast_1d(idx))
    return CocycleClass(sub, cls.module, vals, None)


def normalizer_action_scalar(g, H: MatGroup, M: GModule) -> int:
    """Scalar by which g acts on the cyclic group H^1(H, M) via transport.

    The transported cocycle is (g*xi)(h) = g.xi(g^-1 h g).
    """
    ring, m = M.ring, M.ring.modulus
    g = np.asarray(g.entries if isinstance(g, GL2Element) else g, dtype=np.int64) % H.modulus
    gi = mat_inv(g, H.modulus)
    if not H.contains(mat_mul(mat_mul(gi, H.generators, H.modulus), g, H.modulus)).all():
        raise ValueError("g does not normalise H")
    coh = h1_cyclic(H, M)
    if len(coh.invariant_factors) != 1:
        if coh.is_trivial:
            raise TrivialCohomologyError("H^1(H, M) is trivial")
        raise ValueError("H^1(H, M) is not cyclic")
    d = coh.invariant_factors[0]
    h = _cyclic_generator(H)
    o = H.order
    rho_h = M.matrices(h.reshape(1, 4))[0]
    v0 = np.asarray(_value_at_generator(coh.representatives[0], h), dtype=np.int64)
    conj = mat_mul(mat_mul(gi, h, H.modulus), g, H.modulus)
    k = _discrete_log(h, conj, H.modulus, o)
    w = (M.matrices(g.reshape(1, 4))[0] @ (_power_sum(rho_h, k, m) @ v0)) % m
    im = howell_form(ring, ((rho_h - np.eye(M.rank, dtype=np.int64)) % m).T, M.rank)
    for c in range(d):
        if membership(im, (w - c * v0) % m):
            return c
    raise RuntimeError("transported class is not a multiple of the generator")


def _value_at_generator(cls: CocycleClass, h: np.ndarray) -> tuple[int, ...]:
    return cls.value(h)


def sylow_subgroup_if_normal_cyclic(G: MatGroup) -> MatGroup | None:
    """The Sylow p-subgroup when it is cyclic and normal; None if p does not divide |G|."""
    p = G.ring.p
    n = G.order
    pp = 1
    while n % p == 0:
        n //= p
        pp *= p
    if pp == 1:
        return None
    orders = G.element_orders
    pel = orders.copy()
    while True:
        mask = pel % p == 0
        if not mask.any():
            break
        pel[mask] //= p
    p_elems = np.nonzero(pel == 1)[0]
    if len(p_elems) != pp:
        raise UnsupportedGroupShape("Sylow p-subgroup is not normal")
    top = p_elems[orders[p_elems] == pp]
    if not len(top):
        raise UnsupportedGroupShape("Sylow p-subgroup is not cyclic")
    return closure(G.ring, [G.elements[top[0]]])


def h2_normal_cyclic_sylow(G: MatGroup, M: GModule) -> CohomologyGroup:
    """H^2(G, M) when the Sylow p-subgroup H is cyclic and normal.

    Uses H^2(G, M) = H^2(H, M)^{G/H} and the periodicity isomorphism
    H^2(H, M) = M^H / N_H M.  The periodicity isomorphism is not G-equivariant
    on the nose: g acts on M^H/N_H M by a_g * (g . P), where g^-1 h g = h^{a_g}.
    """
    M.check_compatible(G)
    ring, r, m = M.ring, M.rank, M.ring.modulus
    H = sylow_subgroup_if_normal_cyclic(G)
    if H is None:
        return CohomologyGroup([], [], 2)
    h = H.generators[0]
    o = H.order
    rho_h = M.matrices(h.reshape(1, 4))[0]
    fixed = h0(H, M)
    norm = _power_sum(rho_h, o, m)
    norm_img = howell_form(ring, norm.T, r)
    twists = []
    for g in G.generators:
        gi = mat_inv(g, G.modulus)
        conj = mat_mul(mat_mul(gi, h, G.modulus), g, G.modulus)
        a = _discrete_log(h, conj, G.modulus, o)
        twists.append((a * M.matrices(g.reshape(1, 4))[0]) % m)
    members = [v for v in fixed.elements()
               if all(membership(norm_img, (t @ np.asarray(v) - np.asarray(v)) % m) for t in twists)]
    inv_sub = howell_form(ring, members, r) if members else Submodule.zero(ring, r)
    if not norm_img <= inv_sub:
        inv_sub = howell_form(ring, list(inv_sub.basis) + list(norm_img.basis), r)
    parts = quotient_decomposition(inv_sub, norm_img)
    return CohomologyGroup([d for d, _ in parts], [v for _, v in parts], 2)


# equivariant homomorphisms ---------------------------------------------------

MAT2_BASIS = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
UPPER_BASIS = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 0, 1)]


@dataclass
class HomSpace:
    dimension: int
    basis: list[np.ndarray]


def _coords(ring: RingSpec, basis: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Coordinates of each vector in ``vecs`` with respect to ``basis`` rows."""
    A = ResidueMatrix.from_array(ring, basis.T)
    out = []
    for v in vecs:
        sol = solve_affine(A, v.tolist())
        if sol is None:
            raise ValueError("source subspace is not stable under conjugation")
        out.append(sol.particular)
    return np.array(out, dtype=np.int64).T


def equivariant_homs(G: MatGroup, source="adjoint", target: str = "full") -> HomSpace:
    """G-equivariant maps from a conjugation-stable subspace of Mat_2(F_p).

    ``source`` is ``"adjoint"`` (all of Mat_2), ``"upper"`` (upper triangular
    matrices) or an explicit list of basis matrices as quadruples.  ``target``
    is ``"full"`` (E[p]), ``"line"`` (the stable line spanned by the first
    basis vector, character g -> a) or ``"quotient"`` (character g -> d).
    A map f is equivariant when f(m) = g . f(g^-1 m g) for every g.
    """
    p = G.ring.p
    ring = RingSpec(p, 1)
    if isinstance(source, str):
        basis = {"adjoint": MAT2_BASIS, "upper": UPPER_BASIS}[source]
    else:
        basis = source
    B = np.array(basis, dtype=np.int64).reshape(-1, 4) % p
    dS = len(B)
    kind = {"full": "natural", "line": "upper", "quotient": "lower"}[target]
    T = GModule(ring, kind)
    dT = T.rank
    blocks = []
    for g in G.generators % p:
        gi = mat_inv(g, p)
        images = mat_mul(mat_mul(gi, B, p), g, p)
        C = _coords(ring, B, images)
        rho = T.matrices(g.reshape(1, 4))[0]
        # vec(rho F C) = kron(rho, C^T) vec(F) for row-major vec
        blocks.append((np.kron(rho, C.T) - np.eye(dT * dS, dtype=np.int64)) % p)
    if blocks:
        K = kernel(ResidueMatrix.from_array(ring, np.concatenate(blocks)))
    else:
        K = Submodule.full(ring, dT * dS)
    dim = len(K.basis)
    return HomSpace(dim, [np.array(v, dtype=np.int64).reshape(dT, dS) for v in K.basis])


def lker_hom_model(algebra: Sequence, p: int) -> int:
    """Dimension of {f in Hom(A, F_p^2) : f(m) in im(m)} modulo the maps m -> mT."""
    ring = RingSpec(p, 1)
    span = howell_form(ring, np.array(algebra, dtype=np.int64).reshape(-1, 4), 4)
    B = span.generators_array()
    k = len(B)
    if k == 0:
        return 0
    rows = []
    for coeffs in np.ndindex(*([p] * k)):
        c = np.array(coeffs, dtype=np.int64)
        mat = (c @ B) % p
        mm = mat.reshape(2, 2)
        im = howell_form(ring, mm.T, 2)
        # annihilator of im(m): w with w . y = 0 for all y in im
        ann = kernel(ResidueMatrix.from_rows(ring, im.basis)) if not im.is_zero else Submodule.full(ring, 2)
        for w in ann.basis:
            # f(m) = sum_i c_i f(b_i); unknown layout: f(b_i) at positions 2i, 2i+1
            row = np.zeros(2 * k, dtype=np.int64)
            for i in range(k):
                row[2 * i:2 * i + 2] = c[i] * np.asarray(w)
            rows.append(row % p)
    if rows:
        sol = kernel(ResidueMatrix.from_array(ring, np.array(rows)))
    else:
        sol = Submodule.full(ring, 2 * k)
    cob = []
    for t in ((1, 0), (0, 1)):
        row = []
        for i in range(k):
            row.extend((B[i].reshape(2, 2) @ np.array(t)) % p)
        cob.append(row)
    cob_sub = howell_form(ring, cob, 2 * k)
    return len(quotient_invariants(sol, cob_sub))


# localisation kernel -------------------------------------------------------

def _image_membership_rows(rho_minus_1: np.ndarray, ring: RingSpec) -> np.ndarray:
    """Rows R with R @ y == 0 iff y lies in the column span of the matrix."""
    m = ring.modulus
    r = rho_minus_1.shape[0]
    U, diag, _ = smith_form(ResidueMatrix.from_array(ring, rho_minus_1))
    rows = []
    for k in range(r):
        d = diag[k] if k < len(diag) else m
        if d != 1:
            rows.append(((m // d) * U[k]) % m)
    return np.array(rows, dtype=np.int64).reshape(-1, r)


def localization_kernel(G: MatGroup, M: GModule) -> CohomologyGroup:
    """Classes in H^1(G, M) restricting to zero on every cyclic subgroup."""
    prop = _propagation(G, M)
    ring, r, m = M.ring, M.rank, M.ring.modulus
    if prop.k == 0:
        return CohomologyGroup([], [], 1)
    rows = [prop.constraints.generators_array()]
    reps = cyclic_generator_indices(G)
    rho = prop.rho
    cache: dict = {}
    for c in reps:
        key = tuple(int(x) for x in rho[c].ravel())
        R = cache.get(key)
        if R is None:
            R = _image_membership_rows((rho[c] - np.eye(r, dtype=np.int64)) % m, ring)
            cache[key] = R
        if len(R):
            rows.append((R @ prop.A[c].astype(np.int64)) % m)
    allrows = np.concatenate(rows)
    span = howell_form(ring, allrows, r * prop.k)
    L = kernel(ResidueMatrix.from_rows(ring, span.basis)) if not span.is_zero \
        else Submodule.full(ring, r * prop.k)
    b1 = prop.b1
    parts = quotient_decomposition(L, b1)
    out = [CocycleClass.from_vector(G, M, _normalise(v, b1), d) for d, v in parts]
    return CohomologyGroup([d for d, _ in parts], out, 1, L, b1)


def fixed_points_order(G: MatGroup, M: GModule) -> int:
    return h0(G, M).order
