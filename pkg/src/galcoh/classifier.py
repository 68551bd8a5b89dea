"""Decide vanishing of H^1(G, E[p]) and H^1(G_i, E[p^i]) from curve facts.

The classifier never computes a Galois image.  It reads the stored facts
(torsion, isogeny degrees, twist and neighbour torsion, CM discriminant,
label) and applies the known case lists.  When a fact the decision depends
on is missing, the answer is "inconclusive" and the missing field is named.

Every verdict carries a stable case tag from :class:`Case`.  The
representation shape is written as exponents (a, b) with
rho = (omega^a, *; 0, omega^b), omega the mod-p cyclotomic character.

:func:`cross_check_with_cohomology` closes the loop: it builds the group the
facts predict and runs the cohomology engine on it.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from enum import Enum

from .cohomology import GModule, h1
from .curves.divisibility import matching_exponents
from .curves.facts import CurveFacts
from .matgroup import (
    MatGroup,
    closure,
    greatest_possible,
    has_nontrivial_homothety_mod_p,
    unit_group_generators,
)
from .modarith import RingSpec, is_prime

log = logging.getLogger(__name__)

TRACE_CHECK_BOUND = 100
CM49_DISCRIMINANTS = (-7, -28)

# mod-11 shapes of the three rational points on X_0(11), by label
LABEL_EXPONENTS_P11 = {"121c2": (4, 7), "121b1": (8, 3), "121c1": (7, 4)}


class Case(str, Enum):
    # H^1(G, E[p]) does not vanish
    MOD_P_RATIONAL_3_TORSION = "h1.mod_p.p3_rational_3_torsion"
    MOD_P_TWIST5_TORSION = "h1.mod_p.p5_twist5_torsion"
    MOD_P_121C2 = "h1.mod_p.p11_121c2"
    # H^1(G_i, E[p^i]) does not vanish for i >= 2
    P_POWER_RATIONAL_TORSION = "h1.p_power.rational_p_torsion"
    P_POWER_TWIST5_TORSION = "h1.p_power.p5_isogeny_twist5_torsion"
    P_POWER_NEIGHBOR_TWIST5 = "h1.p_power.p5_neighbor_twist5_torsion"
    P_POWER_CHAIN25 = "h1.p_power.p5_chain25_middle_torsion"
    P_POWER_121 = "h1.p_power.p11_121c"
    # vanishing
    VANISHING = "h1.vanishing"
    VANISHING_CM49_TWIST = "h1.vanishing.p7_conductor49_twist"
    # second cohomology
    H2_TRIVIAL_CHI = "h2.trivial_isogeny_character"
    H2_VANISHING = "h2.vanishing"
    # no decision
    MISSING_FACT = "inconclusive.missing_fact"
    OUT_OF_CONTRACT = "inconclusive.out_of_contract"
    GENERAL_FIELD = "inconclusive.general_field"


class FactsInconsistent(ValueError):
    """The stored facts contradict each other or the curve's Frobenius traces."""


@dataclass(frozen=True)
class Verdict:
    label: str
    p: int
    level: int
    vanishing: bool | None  # None: inconclusive
    case: Case
    h1_size: int | None = None
    notes: str = ""

    def __post_init__(self):
        if self.vanishing is False and self.case is None:
            raise ValueError("a non-vanishing verdict needs a case")

    @property
    def inconclusive(self) -> bool:
        return self.vanishing is None

    def to_dict(self) -> dict:
        return {
            "label": self.label, "p": self.p, "level": self.level,
            "vanishing": "inconclusive" if self.vanishing is None else self.vanishing,
            "case": self.case.value, "h1_size": self.h1_size, "notes": self.notes,
        }


@dataclass(frozen=True)
class GroupShape:
    p: int
    borel: bool
    diag_char_exponents: tuple[int, int] | None
    split: bool
    has_p_torsion_line: bool
    trace_candidates: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.diag_char_exponents is not None and self.p > 2:
            a, b = self.diag_char_exponents
            if (a + b - 1) % (self.p - 1):
                raise FactsInconsistent(
                    f"exponents {self.diag_char_exponents} do not give determinant omega mod {self.p}")


def _verdict(facts, p, level, vanishing, case, h1_size=None, notes=""):
    return Verdict(facts.label, p, level, vanishing, case, h1_size, notes)


def _missing(facts, p, level, name):
    return _verdict(facts, p, level, None, Case.MISSING_FACT, notes=f"missing fact: {name}")


def _check_label_traces(facts: CurveFacts, p: int):
    expected = LABEL_EXPONENTS_P11.get(facts.label)
    if p != 11 or expected is None:
        return
    if expected not in matching_exponents(facts, p, TRACE_CHECK_BOUND):
        raise FactsInconsistent(f"{facts.label}: Frobenius traces contradict shape {expected} mod 11")


def classify_mod_p(facts: CurveFacts, p: int, over_q: bool = True) -> Verdict:
    """Vanishing of H^1(G, E[p]) for the mod-p image G."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    lvl = 1
    if p == 3:
        if facts.has_rational_torsion(3) and facts.isogeny_count(3) == 1:
            return _verdict(facts, p, lvl, False, Case.MOD_P_RATIONAL_3_TORSION, 3)
        return _verdict(facts, p, lvl, True, Case.VANISHING)
    if p == 5:
        if facts.isogeny_count(5) == 0:
            return _verdict(facts, p, lvl, True, Case.VANISHING, notes="no 5-isogeny")
        if facts.twist5_torsion is None:
            return _missing(facts, p, lvl, "twist5_torsion")
        if _order(facts.twist5_torsion) % 5 == 0 and facts.isogeny_count(5) == 1:
            return _verdict(facts, p, lvl, False, Case.MOD_P_TWIST5_TORSION, 5)
        return _verdict(facts, p, lvl, True, Case.VANISHING)
    if not over_q and p >= 11 and p % 3 == 2 and facts.isogeny_count(p) == 1:
        return _verdict(facts, p, lvl, None, Case.GENERAL_FIELD,
                        notes="needs the field of definition of the isogeny kernel points")
    if p == 11 and facts.label == "121c2":
        _check_label_traces(facts, p)
        return _verdict(facts, p, lvl, False, Case.MOD_P_121C2, 11)
    return _verdict(facts, p, lvl, True, Case.VANISHING)


def classify_p_power(facts: CurveFacts, p: int, level: int = 2) -> Verdict:
    """Vanishing of H^1(G_i, E[p^i]) for i = level >= 2 (the answer is the same for all i >= 2)."""
    if level < 2:
        raise ValueError("use classify_mod_p for level 1")
    if p <= 3:
        return _verdict(facts, p, level, None, Case.OUT_OF_CONTRACT,
                        notes="p = 2, 3 at higher level: use the subgroup enumeration (galcoh enumerate)")
    if p in (5, 7) and facts.has_rational_torsion(p):
        return _verdict(facts, p, level, False, Case.P_POWER_RATIONAL_TORSION)
    if p == 7 and facts.cm_discriminant in CM49_DISCRIMINANTS:
        return _verdict(facts, p, level, True, Case.VANISHING_CM49_TWIST,
                        notes="homotheties 2 and 4 lie in the image")
    if p == 5 and facts.isogeny_count(5) >= 1:
        if facts.twist5_torsion is None:
            return _missing(facts, p, level, "twist5_torsion")
        if _order(facts.twist5_torsion) % 5 == 0:
            return _verdict(facts, p, level, False, Case.P_POWER_TWIST5_TORSION)
        neighbours = facts.neighbors(5)
        if neighbours is None:
            return _missing(facts, p, level, "isogeny_neighbor_torsion")
        if 25 in facts.isogeny_degrees:
            if any(_order(n.torsion) % 5 == 0 for n in neighbours):
                return _verdict(facts, p, level, False, Case.P_POWER_CHAIN25)
        else:
            for n in neighbours:
                if n.twist5_torsion is None:
                    return _missing(facts, p, level, "isogeny_neighbor_torsion.twist5_torsion")
                if _order(n.twist5_torsion) % 5 == 0:
                    return _verdict(facts, p, level, False, Case.P_POWER_NEIGHBOR_TWIST5)
        return _verdict(facts, p, level, True, Case.VANISHING)
    if p == 11 and facts.label in ("121c1", "121c2"):
        _check_label_traces(facts, p)
        return _verdict(facts, p, level, False, Case.P_POWER_121)
    return _verdict(facts, p, level, True, Case.VANISHING)


def _order(structure) -> int:
    out = 1
    for n in structure:
        out *= n
    return out


def _chi_trivial(facts: CurveFacts, p: int) -> bool | None:
    """Is the quotient character of E[p] trivial?  Assumes exactly one p-isogeny E -> E'.

    E'[dual] carries that character.  If E' has a rational p-point and E does
    not, the point spans E'[dual]; when E has a rational p-point the quotient
    character is omega instead.  None if neighbour data is missing.
    """
    if facts.has_rational_torsion(p):
        return False
    neighbours = facts.neighbors(p)
    if neighbours is None:
        return None
    return any(_order(n.torsion) % p == 0 for n in neighbours)


def h2_verdict(facts: CurveFacts, p: int) -> Verdict:
    """Vanishing of H^2(G, E[p])."""
    if p == 2 or facts.isogeny_count(p) == 0:
        return _verdict(facts, p, 1, True, Case.H2_VANISHING)
    if facts.isogeny_count(p) >= 2:
        return _verdict(facts, p, 1, True, Case.H2_VANISHING, notes="image has order prime to p")
    trivial = _chi_trivial(facts, p)
    if trivial is None:
        return _missing(facts, p, 1, "isogeny_neighbor_torsion")
    if trivial:
        return Verdict(facts.label, p, 1, False, Case.H2_TRIVIAL_CHI, p)
    return _verdict(facts, p, 1, True, Case.H2_VANISHING)


def expected_group_shape(facts: CurveFacts, p: int, trace_bound: int = TRACE_CHECK_BOUND) -> GroupShape:
    count = facts.isogeny_count(p)
    torsion_line = facts.has_rational_torsion(p)
    if count == 0:
        return GroupShape(p, False, None, False, torsion_line)
    candidates = tuple(matching_exponents(facts, p, trace_bound)) if p > 2 else ()
    exps = None
    if p > 2:
        if torsion_line:
            exps = (0, 1)
        elif count == 1 and _chi_trivial(facts, p):
            exps = (1, 0)
        elif p == 5 and facts.twist5_torsion is not None and _order(facts.twist5_torsion) % 5 == 0:
            exps = (2, 3)
        elif p == 11 and facts.label in LABEL_EXPONENTS_P11:
            exps = LABEL_EXPONENTS_P11[facts.label]
        if exps is not None and exps not in candidates:
            raise FactsInconsistent(
                f"{facts.label}: shape {exps} mod {p} contradicts Frobenius traces below {trace_bound}")
    return GroupShape(p, True, exps, count >= 2, torsion_line, candidates)


def predicted_group(shape: GroupShape) -> MatGroup | None:
    """The mod-p image the shape pins down, or None if it does not pin one down."""
    p = shape.p
    ring = RingSpec(p, 1)
    if not shape.borel:
        return closure(ring, [(1, 1, 0, 1), (1, 0, 1, 1)] + [(u, 0, 0, 1) for u in unit_group_generators(ring)])
    if shape.diag_char_exponents is None:
        return None
    a, b = shape.diag_char_exponents
    g = unit_group_generators(ring)[0]
    gens = [(pow(g, a, p), 0, 0, pow(g, b, p))]
    if not shape.split:
        gens.append((1, 1, 0, 1))
    return closure(ring, gens)


def _upper_lift(G: MatGroup, level: int) -> MatGroup:
    """All upper-triangular matrices mod p^level reducing into an upper-triangular G."""
    ring = RingSpec(G.ring.p, level)
    gens = [tuple(int(x) for x in g) for g in G.generators]
    for k in range(1, level):
        q = G.ring.p ** k
        gens += [(1 + q, 0, 0, 1), (1, q, 0, 1), (1, 0, 0, 1 + q)]
    return closure(ring, gens)


@dataclass
class CrossCheckReport:
    label: str
    p: int
    level: int
    verdict: Verdict
    status: str  # "agree", "disagree" or "skipped"
    method: str = ""
    group_order: int | None = None
    h1_factors: list[int] | None = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "disagree"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["verdict"] = self.verdict.to_dict()
        return out


def cross_check_with_cohomology(facts: CurveFacts, p: int, level: int = 1,
                                max_order: int = 120_000) -> CrossCheckReport:
    """Compare the case-list verdict with H^1 of the predicted image."""
    verdict = classify_mod_p(facts, p) if level == 1 else classify_p_power(facts, p, level)
    report = CrossCheckReport(facts.label, p, level, verdict, "skipped")
    if verdict.inconclusive:
        report.reason = "verdict is inconclusive"
        return report
    shape = expected_group_shape(facts, p)
    G = predicted_group(shape)
    if G is None:
        report.reason = "facts do not pin down the diagonal characters"
        return report
    if has_nontrivial_homothety_mod_p(G):
        report.method = "homothety"
        report.group_order = G.order * p ** (4 * (level - 1))
        report.h1_factors = []
        report.status = "agree" if verdict.vanishing else "disagree"
        return report
    if level > 1:
        if p == 7 and facts.cm_discriminant in CM49_DISCRIMINANTS:
            report.reason = "G_2 is not greatest possible and is not modelled"
            return report
        chain = p == 5 and 25 in facts.isogeny_degrees
        size = G.order * p ** ((3 if chain else 4) * (level - 1))
        if size > max_order:
            report.reason = f"predicted G_{level} has {size} elements (limit {max_order})"
            return report
        G = _upper_lift(G, level) if chain else greatest_possible(G, level)
        report.method = "upper-triangular lift" if chain else "greatest possible lift"
    else:
        report.method = "mod-p image"
    coh = h1(G, GModule.natural(G.ring))
    report.group_order = G.order
    report.h1_factors = list(coh.invariant_factors)
    agree = coh.is_trivial == bool(verdict.vanishing)
    if agree and verdict.h1_size is not None:
        agree = coh.order == verdict.h1_size
    report.status = "agree" if agree else "disagree"
    return report
