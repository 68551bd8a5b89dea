"""Curve facts: the per-curve data the classifier consumes.

Records are JSON lines with ``"schema": 1``.  Rationals are written as
strings (``"-3/4"``) or ints.  The bundled file ``galcoh/data/curves.jsonl``
is authoritative; :func:`fetch_curve` can pull a record with the same schema
from an HTTP service and caches the answer next to the other fixtures.

Environment variables:

``GALCOH_CURVE_DB_URL``
    base URL, queried as ``{base}/{label}``; unset means offline.
``GALCOH_CURVE_CACHE``
    directory for fetched records (default ``~/.cache/galcoh/curves``).
"""

from __future__ import annotations

import json
import logging
import os
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from functools import cache
from importlib import resources
from pathlib import Path

from .weierstrass import CurvePoint, PointNotOnCurve, WeierstrassCurve, to_fraction

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ALLOWED_TORSION = {(), (2,), (3,), (4,), (5,), (6,), (7,), (8,), (9,), (10,), (12,),
                   (2, 2), (2, 4), (2, 6), (2, 8)}


class SchemaError(ValueError):
    """A record that does not match the facts schema."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        prefix = f"record {index}: " if index is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class IsogenyNeighbor:
    degree: int
    torsion: tuple[int, ...]
    twist5_torsion: tuple[int, ...] | None = None


@dataclass(frozen=True)
class CurveFacts:
    label: str
    a_invariants: tuple
    torsion_structure: tuple[int, ...]
    isogeny_degrees: tuple[int, ...] = ()
    twist5_torsion: tuple[int, ...] | None = None
    isogeny_neighbor_torsion: tuple[IsogenyNeighbor, ...] | None = None
    cm_discriminant: int | None = None
    rank: int | None = None
    generators: tuple[tuple, ...] = ()
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def curve(self) -> WeierstrassCurve:
        return _curve(self.a_invariants)

    @property
    def torsion_order(self) -> int:
        out = 1
        for n in self.torsion_structure:
            out *= n
        return out

    def has_rational_torsion(self, p: int) -> bool:
        return self.torsion_order % p == 0

    def isogeny_count(self, degree: int) -> int:
        """Number of distinct cyclic isogenies of the given degree (kernels, not maps)."""
        return sum(1 for d in self.isogeny_degrees if d == degree)

    def neighbors(self, degree: int) -> list[IsogenyNeighbor] | None:
        if self.isogeny_neighbor_torsion is None:
            return None
        return [n for n in self.isogeny_neighbor_torsion if n.degree == degree]

    def generator_points(self) -> list[CurvePoint]:
        E = self.curve
        return [E.point(x, y) for x, y in self.generators]

    def to_record(self) -> dict:
        rec = {
            "schema": SCHEMA_VERSION,
            "label": self.label,
            "a_invariants": [str(to_fraction(a)) for a in self.a_invariants],
            "torsion_structure": list(self.torsion_structure),
            "isogeny_degrees": list(self.isogeny_degrees),
            "twist5_torsion": None if self.twist5_torsion is None else list(self.twist5_torsion),
            "isogeny_neighbor_torsion": None if self.isogeny_neighbor_torsion is None else [
                {"degree": n.degree, "torsion": list(n.torsion),
                 "twist5_torsion": None if n.twist5_torsion is None else list(n.twist5_torsion)}
                for n in self.isogeny_neighbor_torsion],
            "cm_discriminant": self.cm_discriminant,
            "rank": self.rank,
            "generators": [[str(x), str(y)] for x, y in self.generators],
        }
        rec.update(self.extra)
        return rec

    @classmethod
    def from_record(cls, rec: dict, index: int | None = None) -> "CurveFacts":
        return _parse_record(rec, index)


@cache
def _curve(a_invariants: tuple) -> WeierstrassCurve:
    return WeierstrassCurve(a_invariants)


_KNOWN = {"schema", "label", "a_invariants", "torsion_structure", "isogeny_degrees",
          "twist5_torsion", "isogeny_neighbor_torsion", "cm_discriminant", "rank", "generators"}


def _int_list(value, name, index) -> tuple[int, ...]:
    if not isinstance(value, list) or not all(isinstance(v, int) and v > 0 for v in value):
        raise SchemaError(f"{name} must be a list of positive integers", index)
    return tuple(value)


def _parse_record(rec: dict, index: int | None) -> CurveFacts:
    if not isinstance(rec, dict):
        raise SchemaError("expected a JSON object", index)
    if rec.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema {rec.get('schema')!r}", index)
    for key in ("label", "a_invariants", "torsion_structure"):
        if key not in rec:
            raise SchemaError(f"missing field {key!r}", index)
    label = rec["label"]
    if not isinstance(label, str) or not label:
        raise SchemaError("label must be a non-empty string", index)
    raw = rec["a_invariants"]
    if not isinstance(raw, list) or len(raw) != 5:
        raise SchemaError("a_invariants must list five rationals", index)
    try:
        a = tuple(to_fraction(v) for v in raw)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad a-invariant: {exc}", index) from None
    try:
        E = _curve(a)
    except ValueError:
        raise SchemaError(f"{label}: discriminant is zero", index) from None

    torsion = _int_list(rec["torsion_structure"], "torsion_structure", index)
    if tuple(sorted(torsion)) not in ALLOWED_TORSION:
        raise SchemaError(f"{label}: torsion {list(torsion)} is not possible over Q", index)
    degrees = _int_list(rec.get("isogeny_degrees", []), "isogeny_degrees", index)
    twist5 = rec.get("twist5_torsion")
    if twist5 is not None:
        twist5 = _int_list(twist5, "twist5_torsion", index)
    neighbours = rec.get("isogeny_neighbor_torsion")
    if neighbours is not None:
        try:
            neighbours = tuple(IsogenyNeighbor(
                int(n["degree"]), tuple(n["torsion"]),
                None if n.get("twist5_torsion") is None else tuple(n["twist5_torsion"]))
                for n in neighbours)
        except (KeyError, TypeError, ValueError):
            raise SchemaError(f"{label}: malformed isogeny_neighbor_torsion", index) from None
    cm = rec.get("cm_discriminant")
    if cm is not None and (not isinstance(cm, int) or cm >= 0):
        raise SchemaError(f"{label}: cm_discriminant must be a negative integer", index)
    gens = []
    for pt in rec.get("generators") or []:
        try:
            x, y = (to_fraction(c) for c in pt)
            E.point(x, y)
        except PointNotOnCurve:
            raise SchemaError(f"{label}: generator {pt} is not on the curve", index) from None
        except (TypeError, ValueError, ZeroDivisionError):
            raise SchemaError(f"{label}: malformed generator {pt!r}", index) from None
        gens.append((x, y))
    return CurveFacts(
        label=label, a_invariants=a, torsion_structure=torsion, isogeny_degrees=degrees,
        twist5_torsion=twist5, isogeny_neighbor_torsion=neighbours, cm_discriminant=cm,
        rank=rec.get("rank"), generators=tuple(gens),
        extra={k: v for k, v in rec.items() if k not in _KNOWN})


def parse_lines(lines) -> list[CurveFacts]:
    out = []
    for index, line in enumerate(lines):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON ({exc.msg})", index) from None
        out.append(_parse_record(rec, index))
    return out


def load_curve_facts(path) -> list[CurveFacts]:
    with open(path, encoding="utf-8") as fh:
        return parse_lines(fh)


@cache
def bundled_facts() -> tuple[CurveFacts, ...]:
    text = resources.files("galcoh.data").joinpath("curves.jsonl").read_text(encoding="utf-8")
    return tuple(parse_lines(text.splitlines()))


def bundled_facts_path() -> Path:
    return Path(str(resources.files("galcoh.data").joinpath("curves.jsonl")))


def fixture(label: str) -> CurveFacts:
    for facts in bundled_facts():
        if facts.label == label:
            return facts
    raise KeyError(f"no bundled record for {label!r}")


def curve_cache_dir() -> Path:
    env = os.environ.get("GALCOH_CURVE_CACHE")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "galcoh" / "curves"


def fetch_curve(label: str, base_url: str | None = None, cache_dir=None,
                timeout: float = 10.0) -> CurveFacts:
    """Look a curve up by label: local cache, then the service, then the bundled fixtures."""
    cache_dir = Path(cache_dir) if cache_dir is not None else curve_cache_dir()
    cached = cache_dir / f"{label}.jsonl"
    if cached.exists():
        return load_curve_facts(cached)[0]
    base_url = base_url or os.environ.get("GALCOH_CURVE_DB_URL")
    if base_url:
        url = f"{base_url.rstrip('/')}/{urllib.request.quote(label)}"
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                rec = json.loads(resp.read().decode("utf-8"))
            facts = _parse_record(rec, 0)
            if facts.label != label:
                raise SchemaError(f"service answered {facts.label!r} for {label!r}", 0)
        except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
            log.warning("curve service unavailable (%s); using bundled fixtures", exc)
        else:
            cache_dir.mkdir(parents=True, exist_ok=True)
            cached.write_text(json.dumps(facts.to_record()) + "\n", encoding="utf-8")
            return facts
    return fixture(label)
