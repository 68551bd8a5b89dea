"""Local divisibility of rational points and Frobenius-trace criteria.

At a prime ell of good reduction with ell not dividing m, the kernel of
reduction in E(Q_ell) is uniquely m-divisible, so a point is m-divisible in
E(Q_ell) exactly when its reduction is m-divisible in the finite group
E(F_ell).  Everything here works at that level; bad primes and ell | m are
reported as :class:`Inconclusive` instead of being guessed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .counting import (
    BadReduction,
    affine_points,
    count_points,
    frobenius_table,
    good_primes,
    primes_up_to,
    reduce_curve,
)
from .facts import CurveFacts
from .weierstrass import CurvePoint


@dataclass(frozen=True)
class Inconclusive:
    reason: str

    def __bool__(self):
        raise TypeError("an inconclusive answer has no truth value; test with isinstance")


def _p_part(n: int, m: int) -> tuple[int, int]:
    """Split n = a * b where a is built from primes dividing m and gcd(b, m) = 1."""
    a = 1
    g = gcd(n, m)
    while g > 1:
        n //= g
        a *= g
        g = gcd(n, m)
    return a, n


def locally_divisible(facts: CurveFacts, P: CurvePoint, m: int, ell: int) -> bool | Inconclusive:
    """Is P in m E(Q_ell)?  Decided on the reduction when ell is good and prime to m."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    E = facts.curve
    if not E.contains(P):
        raise ValueError(f"{P} is not on {facts.label}")
    if m == 1:
        return True
    if m % ell == 0:
        return Inconclusive(f"{ell} divides m = {m}")
    Et = reduce_curve(facts, ell)
    if isinstance(Et, BadReduction):
        return Inconclusive(f"bad reduction at {ell}")
    Q = E.reduce_point(P, ell)
    if Q.is_infinity:
        return True
    n = count_points(Et).count
    d = gcd(m, n)
    if d == 1:
        return True
    # m A = d A, and only the part of A of order built from primes of d matters.
    primary, cofactor = _p_part(n, d)
    target = Et.mul(cofactor, Q)
    if target.is_infinity:
        return True
    multiples = {Et.mul(d * cofactor, X) for X in affine_points(Et)}
    return target in multiples


def globally_divisible(facts: CurveFacts, multiplier: int, m: int, generator: int = 0) -> bool | None:
    """Is multiplier * g in m E(Q), for g the chosen stored generator?

    With the stored generators a basis of E(Q) modulo torsion, multiplier * g
    lies in m E(Q) exactly when m divides multiplier.  When the generators do
    not account for the whole rank the answer is unknown (None).
    """
    gens = facts.generator_points()
    if facts.rank is None or len(gens) != facts.rank or not 0 <= generator < len(gens):
        return None
    return multiplier % m == 0


@dataclass
class DivisibilityScan:
    label: str
    point: CurvePoint
    m: int
    rows: list[tuple[int, bool | Inconclusive]] = field(default_factory=list)
    globally_divisible: bool | None = None

    @property
    def failures(self) -> list[int]:
        return [ell for ell, ok in self.rows if ok is False]

    @property
    def inconclusive(self) -> list[int]:
        return [ell for ell, ok in self.rows if isinstance(ok, Inconclusive)]

    @property
    def all_good_primes_divisible(self) -> bool:
        return not self.failures

    @property
    def local_global_gap(self) -> bool | None:
        """Divisible at every scanned good prime yet not divisible over Q (None if unknown)."""
        if self.globally_divisible is None:
            return None
        return self.all_good_primes_divisible and not self.globally_divisible


def scan_divisibility(facts: CurveFacts, P: CurvePoint, m: int, bound: int,
                      global_divisibility: bool | None = None) -> DivisibilityScan:
    scan = DivisibilityScan(facts.label, P, m, globally_divisible=global_divisibility)
    for ell in primes_up_to(bound - 1):
        scan.rows.append((ell, locally_divisible(facts, P, m, ell)))
    return scan


def sign_twisted_targets(ell: int, p: int, exponents: tuple[int, int]) -> set[int]:
    """The residues +-ell^a +- ell^b mod p, signs chosen independently."""
    a, b = exponents
    u, v = pow(ell, a, p), pow(ell, b, p)
    return {(s * u + t * v) % p for s in (1, -1) for t in (1, -1)}


@dataclass(frozen=True)
class FilterResult:
    passed: bool
    witness: int | None
    trace: int | None
    checked: tuple[int, ...]

    def __bool__(self):
        return self.passed


def frobenius_congruence_filter(facts: CurveFacts, p: int, exponents: tuple[int, int],
                                primes=None, bound: int = 200, workers: int = 1) -> FilterResult:
    """Test a_ell = ell^a + ell^b mod p up to sign twists.

    A curve whose mod-p representation is (omega^a, *; 0, omega^b), or any
    quadratic twist of such a curve, satisfies the congruence with some choice
    of signs at every good ell != p.  Failure at a single prime is a proof that
    no twist has that shape; passing is only evidence.
    """
    if primes is None:
        primes = good_primes(facts, bound, skip={p})
    primes = [ell for ell in primes if ell != p]
    checked = []
    for datum in frobenius_table(facts, primes, workers=workers):
        checked.append(datum.ell)
        if datum.trace % p not in sign_twisted_targets(datum.ell, p, exponents):
            return FilterResult(False, datum.ell, datum.trace, tuple(checked))
    return FilterResult(True, None, None, tuple(checked))


def matching_exponents(facts: CurveFacts, p: int, bound: int = 200, twists: bool = False) -> list[tuple[int, int]]:
    """All (a, b) with a + b = 1 mod (p - 1) and a_ell = ell^a + ell^b mod p at good ell < bound."""
    data = frobenius_table(facts, good_primes(facts, bound, skip={p}))
    out = []
    for a in range(p - 1):
        b = (1 - a) % (p - 1)
        ok = True
        for d in data:
            if twists:
                ok = d.trace % p in sign_twisted_targets(d.ell, p, (a, b))
            else:
                ok = d.trace % p == (pow(d.ell, a, p) + pow(d.ell, b, p)) % p
            if not ok:
                break
        if ok:
            out.append((a, b))
    return out


def trace_pair_scan(facts: CurveFacts, p: int, level: int = 2, bound: int = 1000,
                    skip=(), workers: int = 1) -> frozenset[tuple[int, int]]:
    """Set of (a_ell mod p^level, ell mod p^level) over good primes ell < bound, ell != p."""
    q = p ** level
    primes = good_primes(facts, bound, skip=set(skip) | {p})
    return frozenset((d.trace % q, d.ell % q) for d in frobenius_table(facts, primes, workers=workers))
