"""Point counts and group structure of reduced curves.

Counting sweeps x over F_ell.  For odd ell the equation is rewritten as
(2y + a1 x + a3)^2 = 4(x^3 + a2 x^2 + a4 x + a6) + (a1 x + a3)^2 and the
number of square roots is read off a table; ell = 2, 3 are enumerated
directly.  The cost is linear in ell, which is plenty below 10^4.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import gcd, isqrt

import numpy as np

from .facts import CurveFacts
from .weierstrass import INFINITY, CurvePoint, WeierstrassCurve, _residue

MAX_FIELD = 10_000


class FieldTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class BadReduction:
    """Returned (not raised) when a prime divides the discriminant of the model."""
    ell: int
    reason: str = "bad reduction"


@dataclass(frozen=True)
class FrobeniusDatum:
    ell: int
    count: int
    trace: int
    group_invariants: tuple[int, int] | None = None

    def __post_init__(self):
        if self.trace * self.trace > 4 * self.ell:
            raise ArithmeticError(f"Hasse bound violated at {self.ell}: a = {self.trace}")
        if self.group_invariants is not None:
            n1, n2 = self.group_invariants
            if n2 % n1 or n1 * n2 != self.count or (self.ell - 1) % n1:
                raise ArithmeticError(f"inconsistent group invariants {self.group_invariants} "
                                      f"for N = {self.count} at {self.ell}")


def primes_up_to(bound: int) -> list[int]:
    if bound < 2:
        return []
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, isqrt(bound) + 1):
        if sieve[q]:
            sieve[q * q::q] = False
    return np.flatnonzero(sieve).tolist()


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    q = 2
    while q * q <= n:
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
        q += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def reduce_curve(facts: CurveFacts | WeierstrassCurve, ell: int) -> WeierstrassCurve | BadReduction:
    """Reduction of the stored (assumed minimal) model at ell."""
    E = facts.curve if isinstance(facts, CurveFacts) else facts
    if any(a.denominator % ell == 0 for a in E.a):
        return BadReduction(ell, "model not integral at this prime")
    if _residue(E.discriminant, ell) == 0:
        return BadReduction(ell)
    return E.reduce(ell)


def _check_field(curve: WeierstrassCurve):
    if curve.ell is None:
        raise ValueError("expected a curve over a prime field")
    if curve.ell > MAX_FIELD:
        raise FieldTooLarge(f"F_{curve.ell} is beyond the naive counting range ({MAX_FIELD})")


def _square_rhs(curve: WeierstrassCurve) -> np.ndarray:
    ell = curve.ell
    a1, a2, a3, a4, a6 = curve.a
    x = np.arange(ell, dtype=np.int64)
    cubic = (((x + a2) * x % ell + a4) * x + a6) % ell
    lin = (a1 * x + a3) % ell
    return (4 * cubic + lin * lin) % ell


def count_points(curve: WeierstrassCurve) -> FrobeniusDatum:
    _check_field(curve)
    ell = curve.ell
    if ell <= 3:
        n = 1 + sum(1 for x in range(ell) for y in range(ell) if curve.contains(CurvePoint(x, y)))
    else:
        roots = np.bincount((np.arange(ell, dtype=np.int64) ** 2) % ell, minlength=ell)
        n = 1 + int(roots[_square_rhs(curve)].sum())
    return FrobeniusDatum(ell, n, ell + 1 - n)


def affine_points(curve: WeierstrassCurve) -> list[CurvePoint]:
    _check_field(curve)
    ell = curve.ell
    if ell <= 3:
        return [CurvePoint(x, y) for x in range(ell) for y in range(ell)
                if curve.contains(CurvePoint(x, y))]
    a1, _, a3, _, _ = curve.a
    sqrt: dict[int, list[int]] = {}
    for y in range(ell):
        sqrt.setdefault(y * y % ell, []).append(y)
    half = pow(2, -1, ell)
    out = []
    for x, r in enumerate(_square_rhs(curve).tolist()):
        for s in sqrt.get(r, ()):
            out.append(CurvePoint(x, (s - a1 * x - a3) * half % ell))
    return out


def point_order(curve: WeierstrassCurve, P: CurvePoint, group_order: int,
                factors: dict[int, int] | None = None) -> int:
    factors = factors or factorize(group_order)
    order = group_order
    for q in factors:
        while order % q == 0 and curve.mul(order // q, P).is_infinity:
            order //= q
    return order


def group_structure(curve: WeierstrassCurve) -> tuple[int, int]:
    """(n1, n2) with E(F_ell) = Z/n1 x Z/n2 and n1 | n2, from the orders of all points."""
    n = count_points(curve).count
    factors = factorize(n)
    exponent = 1
    for P in affine_points(curve):
        if exponent == n:
            break
        order = point_order(curve, P, n, factors)
        exponent = exponent * order // gcd(exponent, order)
    return n // exponent, exponent


def frobenius_datum(curve: WeierstrassCurve, structure: bool = True) -> FrobeniusDatum:
    d = count_points(curve)
    if not structure:
        return d
    return FrobeniusDatum(d.ell, d.count, d.trace, group_structure(curve))


def good_primes(facts: CurveFacts, bound: int, skip=()) -> list[int]:
    """Primes below ``bound`` where the stored model has good reduction."""
    skip = set(skip)
    return [ell for ell in primes_up_to(bound - 1)
            if ell not in skip and not isinstance(reduce_curve(facts, ell), BadReduction)]


def _datum_job(args):
    a_invariants, ell, structure = args
    return frobenius_datum(WeierstrassCurve(a_invariants).reduce(ell), structure)


def frobenius_table(facts: CurveFacts, primes, structure: bool = False,
                    workers: int = 1) -> list[FrobeniusDatum]:
    """Frobenius data at the given good primes, in the order given.

    With ``workers > 1`` the primes are farmed out to a process pool; the
    merge keeps input order so output does not depend on the worker count.
    """
    primes = list(primes)
    for ell in primes:
        if isinstance(reduce_curve(facts, ell), BadReduction):
            raise ValueError(f"{facts.label} has bad reduction at {ell}")
    jobs = [(facts.a_invariants, ell, structure) for ell in primes]
    if workers <= 1 or len(jobs) < 2:
        return [_datum_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_datum_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


__all__ = [
    "BadReduction", "FieldTooLarge", "FrobeniusDatum", "INFINITY", "MAX_FIELD",
    "affine_points", "count_points", "factorize", "frobenius_datum", "frobenius_table",
    "good_primes", "group_structure", "point_order", "primes_up_to", "reduce_curve",
]
