"""Elliptic curves over Q and F_ell: arithmetic, counting, divisibility, facts."""

from .counting import (
    BadReduction,
    FieldTooLarge,
    FrobeniusDatum,
    affine_points,
    count_points,
    frobenius_datum,
    frobenius_table,
    good_primes,
    group_structure,
    primes_up_to,
    reduce_curve,
)
from .divisibility import (
    DivisibilityScan,
    FilterResult,
    Inconclusive,
    frobenius_congruence_filter,
    globally_divisible,
    locally_divisible,
    matching_exponents,
    scan_divisibility,
    sign_twisted_targets,
    trace_pair_scan,
)
from .facts import (
    CurveFacts,
    IsogenyNeighbor,
    SchemaError,
    bundled_facts,
    bundled_facts_path,
    fetch_curve,
    fixture,
    load_curve_facts,
    parse_lines,
)
from .weierstrass import INFINITY, CurvePoint, PointNotOnCurve, WeierstrassCurve

__all__ = [
    "BadReduction", "CurveFacts", "CurvePoint", "DivisibilityScan", "FieldTooLarge",
    "FilterResult", "FrobeniusDatum", "INFINITY", "Inconclusive", "IsogenyNeighbor",
    "PointNotOnCurve", "SchemaError", "WeierstrassCurve", "affine_points", "bundled_facts",
    "bundled_facts_path", "count_points", "fetch_curve", "fixture",
    "frobenius_congruence_filter", "frobenius_datum", "frobenius_table", "globally_divisible",
    "good_primes", "group_structure", "load_curve_facts", "locally_divisible",
    "matching_exponents", "parse_lines", "primes_up_to", "reduce_curve", "scan_divisibility",
    "sign_twisted_targets", "trace_pair_scan",
]
