"""Exact linear algebra over the local rings Z/p^e.

Vectors are tuples of residues, matrices are :class:`ResidueMatrix` values or
plain integer arrays.  Submodules of (Z/p^e)^n are kept in Howell normal form,
which is canonical: two generating sets of the same submodule produce the same
basis, so submodules can be hashed and compared directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class DimensionError(ValueError):
    pass


class ContainmentError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class RingSpec:
    """The ring Z/p^e."""

    p: int
    e: int = 1
    modulus: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.e < 1:
            raise ValueError(f"level e={self.e} must be >= 1")
        object.__setattr__(self, "modulus", self.p ** self.e)

    def valuation(self, x: int) -> int:
        """p-adic valuation of a residue; zero has valuation e."""
        x %= self.modulus
        if x == 0:
            return self.e
        v = 0
        while x % self.p == 0:
            x //= self.p
            v += 1
        return v

    def inverse(self, x: int) -> int:
        return pow(x % self.modulus, -1, self.modulus)

    def is_unit(self, x: int) -> bool:
        return x % self.p != 0

    def units(self) -> list[int]:
        return [x for x in range(self.modulus) if x % self.p]

    def at_level(self, e: int) -> "RingSpec":
        return RingSpec(self.p, e)

    def __str__(self):
        return f"Z/{self.p}^{self.e}" if self.e > 1 else f"F_{self.p}"


@dataclass(frozen=True)
class ResidueMatrix:
    ring: RingSpec
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError("entry count does not match shape")
        m = self.ring.modulus
        object.__setattr__(self, "entries", tuple(int(x) % m for x in self.entries))

    @classmethod
    def from_rows(cls, ring: RingSpec, rows: Sequence[Sequence[int]]) -> "ResidueMatrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise DimensionError("ragged rows")
        return cls(ring, len(rows), ncols, tuple(x for r in rows for x in r))

    @classmethod
    def from_array(cls, ring: RingSpec, a) -> "ResidueMatrix":
        a = np.asarray(a, dtype=np.int64)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        return cls(ring, a.shape[0], a.shape[1], tuple(int(x) for x in a.ravel()))

    @classmethod
    def identity(cls, ring: RingSpec, n: int) -> "ResidueMatrix":
        return cls.from_array(ring, np.eye(n, dtype=np.int64))

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(self.rows, self.cols)

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> tuple[int, ...]:
        return self.entries[j::self.cols]

    def transpose(self) -> "ResidueMatrix":
        return ResidueMatrix.from_array(self.ring, self.to_array().T)

    def __matmul__(self, other):
        if isinstance(other, ResidueMatrix):
            if self.cols != other.rows:
                raise DimensionError("incompatible shapes")
            return ResidueMatrix.from_array(self.ring, _matmul(self.to_array(), other.to_array(), self.ring.modulus))
        v = np.asarray(other, dtype=np.int64)
        if v.shape[0] != self.cols:
            raise DimensionError("incompatible shapes")
        return tuple(int(x) for x in _matmul(self.to_array(), v, self.ring.modulus))


def _matmul(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    # entries < 5000 and inner dimension small: int64 never overflows
    return (a @ b) % m


def _as_rows(rows, ncols: int | None = None) -> tuple[np.ndarray, int]:
    if isinstance(rows, ResidueMatrix):
        return rows.to_array(), rows.cols
    try:
        a = np.asarray(rows, dtype=np.int64)
    except ValueError as exc:
        raise DimensionError("vectors do not share an ambient rank") from exc
    if a.size == 0:
        if ncols is None:
            raise DimensionError("cannot infer ambient rank of an empty generating set")
        return np.zeros((0, ncols), dtype=np.int64), ncols
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise DimensionError("rows must form a 2-d array")
    if ncols is not None and a.shape[1] != ncols:
        raise DimensionError(f"vectors of rank {a.shape[1]} in ambient of rank {ncols}")
    return a, a.shape[1]


@dataclass(frozen=True)
class Submodule:
    """A submodule of (Z/p^e)^n with its Howell basis."""

    ring: RingSpec
    ambient_rank: int
    basis: tuple[tuple[int, ...], ...]

    @cached_property
    def pivots(self) -> tuple[tuple[int, int], ...]:
        """(column, valuation) of the leading entry of each basis row."""
        out = []
        for r in self.basis:
            j = next(i for i, x in enumerate(r) if x)
            out.append((j, self.ring.valuation(r[j])))
        return tuple(out)

    @property
    def order(self) -> int:
        n = 1
        for _, v in self.pivots:
            n *= self.ring.p ** (self.ring.e - v)
        return n

    @property
    def is_zero(self) -> bool:
        return not self.basis

    def reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        """Residue of v after reduction against the basis (zero iff v is a member)."""
        m = self.ring.modulus
        v = [int(x) % m for x in v]
        if len(v) != self.ambient_rank:
            raise DimensionError("rank mismatch")
        for row, (j, val) in zip(self.basis, self.pivots):
            piv = row[j]
            if v[j] % piv == 0 and v[j]:
                q = v[j] // piv
                v = [(a - q * b) % m for a, b in zip(v, row)]
        return tuple(v)

    def __contains__(self, v) -> bool:
        return membership(self, v)

    def elements(self) -> list[tuple[int, ...]]:
        """All members; only sensible for small submodules."""
        m = self.ring.modulus
        out = {tuple([0] * self.ambient_rank)}
        for row, (j, val) in zip(self.basis, self.pivots):
            mult = self.ring.p ** (self.ring.e - val)
            out = {tuple((a + c * b) % m for a, b in zip(x, row)) for x in out for c in range(mult)}
        return sorted(out)

    def generators_array(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((0, self.ambient_rank), dtype=np.int64)
        return np.array(self.basis, dtype=np.int64)

    def __le__(self, other: "Submodule") -> bool:
        return all(r in other for r in self.basis)

    @classmethod
    def full(cls, ring: RingSpec, n: int) -> "Submodule":
        return howell_form(ring, np.eye(n, dtype=np.int64), n)

    @classmethod
    def zero(cls, ring: RingSpec, n: int) -> "Submodule":
        return cls(ring, n, ())


def _howell_rows(ring: RingSpec, rows: list[list[int]], n: int) -> list[list[int]]:
    p, e, m = ring.p, ring.e, ring.modulus
    pool = [r for r in ([x % m for x in row] for row in rows) if any(r)]
    out: list[list[int]] = []
    for j in range(n):
        best, best_v = -1, e
        for i, r in enumerate(pool):
            if r[j]:
                v = ring.valuation(r[j])
                if v < best_v:
                    best, best_v = i, v
        if best < 0:
            continue
        piv = pool.pop(best)
        u = piv[j] // p ** best_v
        uinv = pow(u, -1, m)
        piv = [(x * uinv) % m for x in piv]
        pk = p ** best_v
        new_pool = []
        for r in pool:
            if r[j]:
                q = r[j] // pk
                r = [(a - q * b) % m for a, b in zip(r, piv)]
            if any(r):
                new_pool.append(r)
        sat = [(x * p ** (e - best_v)) % m for x in piv]
        if any(sat):
            new_pool.append(sat)
        pool = new_pool
        out.append(piv)
    # reduce entries above each pivot into [0, pivot)
    for k, row in enumerate(out):
        j = next(i for i, x in enumerate(row) if x)
        piv = row[j]
        for i in range(k):
            x = out[i][j]
            if x >= piv:
                q = x // piv
                out[i] = [(a - q * b) % m for a, b in zip(out[i], row)]
    return out


def howell_form(ring: RingSpec, rows, ncols: int | None = None) -> Submodule:
    """Canonical Howell basis of the submodule spanned by ``rows``.

    Large generating sets (numpy arrays with many rows) are pre-reduced in
    vectorised chunks so that only rows carrying new information reach the
    exact elimination.
    """
    a, n = _as_rows(rows, ncols)
    a = a % ring.modulus
    if a.shape[0] > 64:
        return _howell_chunked(ring, a, n)
    return Submodule(ring, n, tuple(tuple(r) for r in _howell_rows(ring, a.tolist(), n)))


def _reduce_array(sub: Submodule, a: np.ndarray) -> np.ndarray:
    m = sub.ring.modulus
    a = a.copy()
    for row, (j, _) in zip(sub.basis, sub.pivots):
        piv = row[j]
        col = a[:, j]
        ok = (col % piv == 0) & (col != 0)
        if ok.any():
            q = col[ok] // piv
            a[ok] = (a[ok] - np.outer(q, np.asarray(row, dtype=np.int64))) % m
    return a


def _howell_chunked(ring: RingSpec, a: np.ndarray, n: int, chunk: int = 4096) -> Submodule:
    a = a[np.any(a != 0, axis=1)]
    if a.shape[0] == 0:
        return Submodule.zero(ring, n)
    a = np.unique(a, axis=0)
    sub = Submodule.zero(ring, n)
    for start in range(0, a.shape[0], chunk):
        block = _reduce_array(sub, a[start:start + chunk])
        block = block[np.any(block != 0, axis=1)]
        while block.shape[0]:
            block = np.unique(block, axis=0)
            head = block[:32]
            sub = Submodule(ring, n, tuple(tuple(r) for r in _howell_rows(
                ring, list(sub.basis) + head.tolist(), n)))
            block = _reduce_array(sub, block[32:])
            block = block[np.any(block != 0, axis=1)]
    return sub


def membership(sub: Submodule, v: Sequence[int]) -> bool:
    return not any(sub.reduce(v))


def span(ring: RingSpec, rows, ncols: int | None = None) -> Submodule:
    return howell_form(ring, rows, ncols)


def sum_modules(a: Submodule, b: Submodule) -> Submodule:
    return howell_form(a.ring, list(a.basis) + list(b.basis), a.ambient_rank)


def smith_form(A) -> tuple[np.ndarray, list[int], np.ndarray]:
    """Diagonalise A over Z/p^e.

    Returns (U, diag, V) with U, V invertible and U @ A @ V diagonal with
    entries ``diag`` (powers of p; the list stops at the last nonzero one).
    Pivots are chosen by smallest valuation, ties broken by lowest row-major
    index.
    """
    U, diag, V, _ = _smith(A)
    return U, diag, V


def _smith(A):
    ring = A.ring
    p, m = ring.p, ring.modulus
    a = A.to_array() % m
    r, c = a.shape
    U = np.eye(r, dtype=np.int64)
    V = np.eye(c, dtype=np.int64)
    Vinv = np.eye(c, dtype=np.int64)
    diag: list[int] = []
    for k in range(min(r, c)):
        sub = a[k:, k:]
        if not sub.any():
            break
        vals = np.where(sub == 0, ring.e, 0)
        nz = sub != 0
        if nz.any():
            x = sub.copy()
            v = np.zeros_like(x)
            while True:
                step = nz & (x % p == 0)
                if not step.any():
                    break
                v[step] += 1
                x[step] //= p
            vals = np.where(nz, v, ring.e + 1)
        flat = int(np.argmin(vals))
        i, j = divmod(flat, sub.shape[1])
        v = int(vals[i, j])
        i += k
        j += k
        a[[k, i]] = a[[i, k]]
        U[[k, i]] = U[[i, k]]
        a[:, [k, j]] = a[:, [j, k]]
        V[:, [k, j]] = V[:, [j, k]]
        Vinv[[k, j]] = Vinv[[j, k]]
        pk = p ** v
        uinv = pow(int(a[k, k]) // pk, -1, m)
        a[k] = (a[k] * uinv) % m
        U[k] = (U[k] * uinv) % m
        col = a[:, k].copy()
        col[k] = 0
        rows = np.nonzero(col)[0]
        if len(rows):
            q = col[rows] // pk
            a[rows] = (a[rows] - np.outer(q, a[k])) % m
            U[rows] = (U[rows] - np.outer(q, U[k])) % m
        row = a[k].copy()
        row[k] = 0
        cols = np.nonzero(row)[0]
        if len(cols):
            q = row[cols] // pk
            a[:, cols] = (a[:, cols] - np.outer(a[:, k], q)) % m
            V[:, cols] = (V[:, cols] - np.outer(V[:, k], q)) % m
            Vinv[k] = (Vinv[k] + q @ Vinv[cols]) % m
        diag.append(pk)
    return U % m, diag, V % m, Vinv % m


@dataclass(frozen=True)
class AffineSolution:
    particular: tuple[int, ...]
    kernel: Submodule

    def __contains__(self, x) -> bool:
        d = [(a - b) for a, b in zip(x, self.particular)]
        return d in self.kernel


def solve_affine(A: ResidueMatrix, b: Sequence[int]) -> AffineSolution | None:
    """All x with A x = b, or None when the system is inconsistent."""
    ring = A.ring
    m = ring.modulus
    b = [int(x) % m for x in b]
    if len(b) != A.rows:
        raise DimensionError("right-hand side has wrong length")
    U, diag, V = smith_form(A)
    ub = (U @ np.array(b, dtype=np.int64)) % m
    y = np.zeros(A.cols, dtype=np.int64)
    gens = []
    for i in range(A.rows):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if ub[i]:
                return None
            continue
        if ub[i] % d:
            return None
        y[i] = ub[i] // d
        if d != 1:
            col = np.zeros(A.cols, dtype=np.int64)
            col[i] = m // d
            gens.append(col)
    for j in range(len(diag), A.cols):
        col = np.zeros(A.cols, dtype=np.int64)
        col[j] = 1
        gens.append(col)
    x = tuple(int(t) for t in (V @ y) % m)
    kgens = [(V @ g) % m for g in gens]
    return AffineSolution(x, howell_form(ring, np.array(kgens, dtype=np.int64).reshape(-1, A.cols), A.cols))


def kernel(A: ResidueMatrix) -> Submodule:
    return solve_affine(A, [0] * A.rows).kernel


def image(A: ResidueMatrix) -> Submodule:
    """Column span of A."""
    return howell_form(A.ring, A.to_array().T, A.rows)


def quotient_decomposition(ambient: Submodule, sub: Submodule) -> list[tuple[int, tuple[int, ...]]]:
    """Cyclic decomposition of ambient/sub.

    Returns pairs (order, vector): the vectors lie in ``ambient`` and their
    classes generate the quotient as a direct sum of cyclic groups of the
    given orders, listed by ascending order.
    """
    ring = ambient.ring
    if ambient.ambient_rank != sub.ambient_rank:
        raise DimensionError("rank mismatch")
    if not sub <= ambient:
        raise ContainmentError("sub is not contained in ambient")
    r = len(ambient.basis)
    if r == 0:
        return []
    m = ring.modulus
    B = ResidueMatrix.from_rows(ring, ambient.basis)
    Bt = B.transpose()
    # coordinates of the relations among the basis rows, and of sub's generators
    rels = list(kernel(Bt).basis)
    for s in sub.basis:
        rels.append(solve_affine(Bt, s).particular)
    if rels:
        _, diag, _, Vinv = _smith(ResidueMatrix.from_rows(ring, rels))
    else:
        diag, Vinv = [], np.eye(r, dtype=np.int64)
    orders = list(diag) + [m] * (r - len(diag))
    Barr = B.to_array()
    out = []
    for i, d in enumerate(orders):
        if d > 1:
            vec = (Vinv[i] @ Barr) % m
            out.append((d, tuple(int(x) for x in vec)))
    out.sort(key=lambda t: t[0])
    return out


def quotient_invariants(ambient: Submodule, sub: Submodule) -> list[int]:
    """Invariant factors of ambient/sub, ascending, trivial factors dropped."""
    return [d for d, _ in quotient_decomposition(ambient, sub)]


def group_order(factors: Iterable[int]) -> int:
    n = 1
    for f in factors:
        n *= f
    return n
