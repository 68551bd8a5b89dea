"""Command-line entry point: ``galcoh <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 cross-check or
golden-file mismatch.  Reports go to stdout; progress and summaries of
machine-readable output go to stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .classifier import (
    FactsInconsistent,
    classify_mod_p,
    classify_p_power,
    cross_check_with_cohomology,
    h2_verdict,
)
from .cohomology import format_factors
from .curves import (
    CurvePoint,
    PointNotOnCurve,
    SchemaError,
    bundled_facts_path,
    fetch_curve,
    globally_divisible,
    parse_lines,
    scan_divisibility,
)
from .tables import (
    SUPPORTED,
    Table,
    UnsupportedTable,
    build_lker_table,
    build_table,
    check_supported,
    diff_against_golden,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    p: int | None = None
    level: int = 2
    surjective_det: bool = True
    dim_m2: int | None = None
    facts: Path | None = None
    fmt: str = "table"
    cache: Path | None = None
    use_cache: bool = True
    lmax: int = 1000
    workers: int = 1
    check: bool = False
    quiet: bool = False

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        cfg = cls(
            command=args.command, p=args.p, level=args.level,
            surjective_det=getattr(args, "surjective_det", True),
            dim_m2=getattr(args, "dim_m2", None),
            facts=Path(args.facts) if getattr(args, "facts", None) else None,
            fmt=args.format, cache=Path(args.cache) if args.cache else None,
            use_cache=not args.no_cache, lmax=getattr(args, "lmax", 1000),
            workers=args.workers, check=getattr(args, "check", False), quiet=args.quiet,
        )
        cfg.validate()
        return cfg

    def validate(self):
        if self.p is not None and (self.p < 2 or any(self.p % d == 0 for d in range(2, int(self.p ** 0.5) + 1))):
            raise UsageError(f"--p must be a prime, got {self.p}")
        if self.level < 1:
            raise UsageError("--level must be at least 1")
        if self.workers < 1:
            raise UsageError("--workers must be at least 1")
        if self.lmax < 2:
            raise UsageError("--lmax must be at least 2")
        if self.dim_m2 is not None and not 0 <= self.dim_m2 <= 4:
            raise UsageError("--dim-m2 must be between 0 and 4")


# output ------------------------------------------------------------------------

def _cell(value) -> str:
    return value if isinstance(value, str) else json.dumps(value, separators=(",", ":"))


def _uncell(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def read_csv_rows(text: str) -> list[dict]:
    """Inverse of the CSV writer: every non-string cell holds a JSON value."""
    return [{k: _uncell(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


def read_json_rows(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def _pretty(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, list) and all(isinstance(v, int) for v in value):
        return format_factors(value)
    if isinstance(value, list):
        return " ".join("(" + ",".join(map(str, v)) + ")" if isinstance(v, list) else str(v) for v in value)
    return str(value)


def emit(rows: list[dict], fmt: str, out, columns: list[str] | None = None) -> None:
    if fmt == "json":
        for row in rows:
            out.write(json.dumps(row, separators=(",", ":")) + "\n")
        return
    if not rows:
        return
    columns = columns or list(rows[0])
    if fmt == "csv":
        w = csv.DictWriter(out, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(row.get(k)) for k in columns})
        return
    cells = [[_pretty(row.get(k)) for k in columns] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in cells)) for i, c in enumerate(columns)]
    out.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
    for r in cells:
        out.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def emit_summary(summary: dict, cfg: RunConfig, out, err) -> None:
    if cfg.fmt == "table":
        out.write("\n")
        for k, v in summary.items():
            out.write(f"{k}: {v}\n")
    elif not cfg.quiet:
        err.write("summary " + json.dumps(summary) + "\n")


# commands ----------------------------------------------------------------------

def _progress(cfg: RunConfig, err):
    if cfg.quiet:
        return None
    start = time.monotonic()

    def report(msg: str) -> None:
        err.write(f"[{time.monotonic() - start:7.1f}s] {msg}\n")
        err.flush()
    return report


def _table_rows(table: Table) -> list[dict]:
    rows = []
    for r in table.rows:
        rows.append({
            "group_id": r.index, "p": table.p, "e": table.level, "kernel_dim": r.kernel_dim,
            "order": r.order, "image_order": r.image_order, "h1": r.h1,
            "h0_mod_p": r.h0_mod_p, "h2_mod_p": r.h2_mod_p, "lker": r.lker,
            "generators": r.generators,
        })
    return rows


def _require_p(cfg: RunConfig) -> int:
    if cfg.p is None:
        raise UsageError("--p is required")
    return cfg.p


def _finish_table(table: Table, cfg: RunConfig, out, err, only_nonzero_lker: bool = False) -> int:
    rows = _table_rows(table)
    if only_nonzero_lker:
        rows = [r for r in rows if r["lker"]]
    emit(rows, cfg.fmt, out)
    emit_summary(table.summary(), cfg, out, err)
    if cfg.check:
        diffs = diff_against_golden(table)
        for line in diffs:
            err.write(f"check: {line}\n")
        if diffs:
            return EXIT_CHECK
        err.write("check: matches the stored table\n")
    return EXIT_OK


def _check_filters(cfg: RunConfig, extra_filter: bool = False) -> None:
    if cfg.check and (extra_filter or cfg.dim_m2 is not None or not cfg.surjective_det):
        raise UsageError("--check compares the stored tables, which use the default filters")


def cmd_enumerate(cfg: RunConfig, out, err) -> int:
    p = _require_p(cfg)
    check_supported(p, cfg.level)
    _check_filters(cfg)
    table = build_table(p, cfg.level, cfg.surjective_det, cfg.dim_m2, with_lker=False,
                        workers=cfg.workers, cache_dir=cfg.cache, use_cache=cfg.use_cache,
                        progress=_progress(cfg, err))
    return _finish_table(table, cfg, out, err)


def cmd_lker(cfg: RunConfig, out, err, max_image_order: int | None = None) -> int:
    p = _require_p(cfg)
    check_supported(p, cfg.level)
    _check_filters(cfg, max_image_order is not None)
    table = build_lker_table(p, cfg.level, cfg.surjective_det, cfg.dim_m2, max_image_order,
                             workers=cfg.workers, cache_dir=cfg.cache, use_cache=cfg.use_cache,
                             progress=_progress(cfg, err))
    return _finish_table(table, cfg, out, err, only_nonzero_lker=True)


def _read_facts(cfg: RunConfig, err):
    """Yield (index, facts or SchemaError) per record so one bad line does not stop the run."""
    path = cfg.facts or bundled_facts_path()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read facts file {path}: {exc.strerror}") from None
    for index, line in enumerate(text.splitlines()):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            yield index, parse_lines([line])[0]
        except SchemaError as exc:
            yield index, SchemaError(str(exc).replace("record 0", f"record {index}"), index)


def cmd_classify(cfg: RunConfig, out, err, h2: bool = False, cross_check: bool = True) -> int:
    p = _require_p(cfg)
    if h2 and cfg.level != 1:
        raise UsageError("--h2 is a statement about the mod-p image; use --level 1")
    rows, data_errors, failures = [], 0, 0
    for index, facts in _read_facts(cfg, err):
        if isinstance(facts, SchemaError):
            data_errors += 1
            err.write(f"record {index}: schema error: {facts}\n")
            rows.append({"record": index, "label": None, "p": p, "level": cfg.level,
                         "vanishing": None, "case": "error.schema", "h1_size": None,
                         "cross_check": None, "notes": str(facts)})
            continue
        try:
            if h2:
                verdict, status, note = h2_verdict(facts, p), None, ""
            elif cross_check:
                report = cross_check_with_cohomology(facts, p, cfg.level)
                verdict, status, note = report.verdict, report.status, report.reason
                if status == "disagree":
                    failures += 1
                    err.write(f"{facts.label}: cross-check failed: verdict "
                              f"{verdict.to_dict()['vanishing']} but H^1 of the predicted group "
                              f"({report.method}, order {report.group_order}) is "
                              f"{format_factors(report.h1_factors or [])}\n")
            else:
                verdict = classify_mod_p(facts, p) if cfg.level == 1 else classify_p_power(facts, p, cfg.level)
                status, note = None, ""
        except FactsInconsistent as exc:
            data_errors += 1
            err.write(f"record {index} ({facts.label}): inconsistent facts: {exc}\n")
            rows.append({"record": index, "label": facts.label, "p": p, "level": cfg.level,
                         "vanishing": None, "case": "error.inconsistent", "h1_size": None,
                         "cross_check": None, "notes": str(exc)})
            continue
        d = verdict.to_dict()
        notes = "; ".join(x for x in (d["notes"], note) if x)
        rows.append({"record": index, "label": d["label"], "p": p, "level": cfg.level,
                     "vanishing": d["vanishing"], "case": d["case"], "h1_size": d["h1_size"],
                     "cross_check": status, "notes": notes})
    emit(rows, cfg.fmt, out, ["record", "label", "p", "level", "vanishing", "case",
                              "h1_size", "cross_check", "notes"])
    if failures:
        return EXIT_CHECK
    return EXIT_DATA if data_errors else EXIT_OK


def _parse_point(text: str) -> CurvePoint:
    parts = text.replace("(", "").replace(")", "").split(",")
    if len(parts) != 2:
        raise UsageError(f"--point expects 'x,y', got {text!r}")
    try:
        return CurvePoint(Fraction(parts[0].strip()), Fraction(parts[1].strip()))
    except ValueError:
        raise UsageError(f"--point has non-rational coordinates: {text!r}") from None


def cmd_scan_divisibility(cfg: RunConfig, out, err, label: str, point: str, multiplier: int, m: int) -> int:
    if m < 1 or multiplier < 1:
        raise UsageError("--m and --multiplier must be positive")
    facts = None
    if cfg.facts is not None:
        for _, f in _read_facts(cfg, err):
            if not isinstance(f, SchemaError) and f.label == label:
                facts = f
                break
        if facts is None:
            raise DataError(f"{label} is not in {cfg.facts}")
    else:
        try:
            facts = fetch_curve(label)
        except (KeyError, LookupError, SchemaError) as exc:
            raise DataError(f"unknown curve {label}: {exc}") from None
    E = facts.curve
    try:
        P = None
        if point:
            parsed = _parse_point(point)
            P = E.point(parsed.x, parsed.y)
    except PointNotOnCurve as exc:
        raise DataError(str(exc)) from None
    gens = facts.generator_points()
    if P is None:
        if not gens:
            raise DataError(f"{label} has no stored generator; pass --point")
        P = gens[0]
    glob = globally_divisible(facts, multiplier, m, gens.index(P)) if P in gens else None
    Q = E.mul(multiplier, P)
    scan = scan_divisibility(facts, Q, m, cfg.lmax, glob)
    rows = []
    for ell, ok in scan.rows:
        if ok is True:
            rows.append({"ell": ell, "status": "divisible", "reason": ""})
        elif ok is False:
            rows.append({"ell": ell, "status": "not_divisible", "reason": ""})
        else:
            rows.append({"ell": ell, "status": "inconclusive", "reason": ok.reason})
    emit(rows, cfg.fmt, out)
    emit_summary({
        "label": label, "point": f"{multiplier}*({P.x},{P.y})", "m": m, "lmax": cfg.lmax,
        "primes": len(rows), "failures": scan.failures, "inconclusive": scan.inconclusive,
        "all_good_primes_divisible": scan.all_good_primes_divisible,
        "globally_divisible": scan.globally_divisible, "local_global_gap": scan.local_global_gap,
    }, cfg, out, err)
    return EXIT_OK


# parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    supported = ", ".join(f"({p},{e}) {m}" for (p, e), m in SUPPORTED.items())
    parser = _Parser(prog="galcoh", description="Galois cohomology tables and curve classification.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, default_level=2):
        sp.add_argument("--p", type=int, help="the prime p")
        sp.add_argument("--level", type=int, default=default_level, help="work modulo p^level")
        sp.add_argument("--format", choices=("json", "csv", "table"), default="table")
        sp.add_argument("--workers", type=int, default=1, help="process pool size for batch work")
        sp.add_argument("--cache", metavar="DIR", help="enumeration cache directory")
        sp.add_argument("--no-cache", action="store_true", help="recompute and do not write the cache")
        sp.add_argument("--quiet", action="store_true", help="no progress on stderr")

    for name, helptext in (("enumerate", "H^1 over subgroup classes of GL_2(Z/p^level)"),
                           ("lker", "groups with a non-trivial localization kernel")):
        sp = sub.add_parser(name, help=helptext, description=f"{helptext}. Supported: {supported}.")
        common(sp)
        sp.add_argument("--surjective-det", action=argparse.BooleanOptionalAction, default=True,
                        help="keep only groups with surjective determinant (default on)")
        sp.add_argument("--dim-m2", type=int, help="keep only groups with this reduction-kernel dimension")
        sp.add_argument("--check", action="store_true", help="diff against the stored table")
        if name == "lker":
            sp.add_argument("--max-image-order", type=int,
                            help="restricted mode: skip mod-p images larger than this")

    sp = sub.add_parser("classify", help="vanishing verdicts for each curve in a facts file")
    common(sp)
    sp.add_argument("--facts", metavar="PATH", help="JSON-lines facts file (default: bundled corpus)")
    sp.add_argument("--h2", action="store_true", help="decide H^2(G, E[p]) instead (needs --level 1)")
    sp.add_argument("--no-cross-check", action="store_true", help="skip the cohomology cross-check")

    sp = sub.add_parser("scan-divisibility", help="local divisibility of a rational point prime by prime")
    common(sp)
    sp.add_argument("--facts", metavar="PATH", help="facts file to look the label up in")
    sp.add_argument("--label", required=True)
    sp.add_argument("--point", help="x,y (default: first stored generator)")
    sp.add_argument("--multiplier", type=int, default=1, help="scan multiplier*P")
    sp.add_argument("--m", type=int, required=True, help="divisor to test")
    sp.add_argument("--lmax", type=int, default=1000, help="scan primes below this bound")
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(err):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig.from_args(args)
        if cfg.command == "enumerate":
            return cmd_enumerate(cfg, out, err)
        if cfg.command == "lker":
            return cmd_lker(cfg, out, err, args.max_image_order)
        if cfg.command == "classify":
            return cmd_classify(cfg, out, err, h2=args.h2, cross_check=not args.no_cross_check)
        return cmd_scan_divisibility(cfg, out, err, args.label, args.point, args.multiplier, args.m)
    except (UsageError, UnsupportedTable) as exc:
        err.write(f"galcoh: {exc}\n")
        return EXIT_USAGE
    except DataError as exc:
        err.write(f"galcoh: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
