import io
import json

import pytest

from galcoh.cli import (
    EXIT_CHECK,
    EXIT_DATA,
    EXIT_OK,
    EXIT_USAGE,
    main,
    read_csv_rows,
    read_json_rows,
)
from galcoh.curves import fixture
from galcoh.tables import build_table, diff_against_golden, load_golden


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def facts_file(tmp_path, lines):
    path = tmp_path / "facts.jsonl"
    path.write_text("".join(line + "\n" for line in lines))
    return str(path)


# --- usage errors --------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["enumerate", "--p", "2", "--bogus"],
    ["enumerate", "--p", "4"],
    ["enumerate"],
    ["enumerate", "--p", "11"],
    ["enumerate", "--p", "2", "--level", "3"],
    ["enumerate", "--p", "2", "--workers", "0"],
    ["enumerate", "--p", "2", "--dim-m2", "5"],
    ["enumerate", "--p", "2", "--check", "--dim-m2", "2"],
    ["lker", "--p", "5", "--check", "--max-image-order", "4"],
    ["classify", "--p", "5", "--level", "2", "--h2"],
    ["scan-divisibility", "--label", "243a2"],
    ["scan-divisibility", "--label", "243a2", "--m", "9", "--point", "1,2,3"],
    ["scan-divisibility", "--label", "243a2", "--m", "9", "--lmax", "1"],
])
def test_usage_errors_exit_1(argv):
    code, out, err = run(*argv)
    assert code == EXIT_USAGE
    assert out == ""
    assert err


def test_unsupported_table_names_supported_set():
    _, _, err = run("enumerate", "--p", "13")
    assert "p=2 level=2" in err and "p=7 level=2 (restricted)" in err


# --- data errors ---------------------------------------------------------------

def test_missing_facts_file(tmp_path):
    code, _, err = run("classify", "--p", "5", "--level", "1", "--facts", str(tmp_path / "none.jsonl"))
    assert code == EXIT_DATA
    assert "cannot read" in err


def test_schema_error_reported_per_record(tmp_path):
    good = json.dumps(fixture("11a1").to_record())
    path = facts_file(tmp_path, [good, '{"schema": 1, "label": "x"}', good])
    code, out, err = run("classify", "--p", "5", "--level", "1", "--facts", path, "--format", "json")
    assert code == EXIT_DATA
    rows = read_json_rows(out)
    assert [r["case"] for r in rows] == ["h1.vanishing", "error.schema", "h1.vanishing"]
    assert rows[1]["record"] == 1
    assert "record 1" in err


def test_inconsistent_facts_are_data_errors(tmp_path):
    fake = fixture("121b1").to_record() | {"label": "121c2"}
    path = facts_file(tmp_path, [json.dumps(fake)])
    code, out, _ = run("classify", "--p", "11", "--level", "1", "--facts", path, "--format", "json")
    assert code == EXIT_DATA
    assert read_json_rows(out)[0]["case"] == "error.inconsistent"


def test_point_not_on_curve():
    code, _, err = run("scan-divisibility", "--label", "243a2", "--point", "0,0", "--m", "9")
    assert code == EXIT_DATA and "not on" in err


def test_unknown_label():
    assert run("scan-divisibility", "--label", "1a1", "--m", "3")[0] == EXIT_DATA


# --- classify --------------------------------------------------------------------

def test_empty_facts_file(tmp_path):
    path = facts_file(tmp_path, [])
    for fmt in ("json", "csv", "table"):
        code, out, _ = run("classify", "--p", "11", "--level", "1", "--facts", path, "--format", fmt)
        assert code == EXIT_OK and out == ""


def test_classify_bundled_p11():
    code, out, _ = run("classify", "--p", "11", "--level", "1", "--format", "json")
    assert code == EXIT_OK
    rows = read_json_rows(out)
    bad = [r for r in rows if r["vanishing"] is False]
    assert [(r["label"], r["h1_size"]) for r in bad] == [("121c2", 11)]
    assert all(r["cross_check"] in ("agree", "skipped") for r in rows)


def test_classify_bundled_p5_level2_reports_the_chain_conflict():
    code, out, err = run("classify", "--p", "5", "--level", "2", "--format", "json")
    rows = {r["label"]: r for r in read_json_rows(out)}
    for label in ("11a1", "11a2", "11a3"):
        assert rows[label]["vanishing"] is False
    assert rows["11a2"]["cross_check"] == "disagree"
    assert code == EXIT_CHECK
    assert "11a2: cross-check failed" in err


def test_classify_without_cross_check(tmp_path):
    path = facts_file(tmp_path, [json.dumps(fixture("11a2").to_record())])
    code, out, _ = run("classify", "--p", "5", "--level", "2", "--facts", path,
                       "--no-cross-check", "--format", "json")
    assert code == EXIT_OK
    assert read_json_rows(out)[0]["case"] == "h1.p_power.p5_chain25_middle_torsion"


def test_classify_h2(tmp_path):
    path = facts_file(tmp_path, [json.dumps(fixture(x).to_record()) for x in ("26b1", "26b2")])
    code, out, _ = run("classify", "--p", "7", "--level", "1", "--h2", "--facts", path, "--format", "json")
    assert code == EXIT_OK
    assert [r["vanishing"] for r in read_json_rows(out)] == [True, False]


# --- enumerate and lker -----------------------------------------------------------

def test_enumerate_p2_summary_and_formats():
    code, out_json, err = run("enumerate", "--p", "2", "--format", "json")
    assert code == EXIT_OK
    summary = json.loads(err.strip().splitlines()[-1].removeprefix("summary "))
    assert summary["h1_nonvanishing"] == 36
    code, out_csv, _ = run("enumerate", "--p", "2", "--format", "csv", "--quiet")
    assert code == EXIT_OK
    assert read_csv_rows(out_csv) == read_json_rows(out_json)


def test_table_format_has_summary():
    code, out, _ = run("enumerate", "--p", "7", "--format", "table", "--quiet")
    assert code == EXIT_OK
    assert "h1_nonvanishing: 2" in out
    assert "7x7" in out


def test_enumerate_deterministic_across_workers():
    a = run("enumerate", "--p", "2", "--format", "json", "--quiet")[1]
    b = run("enumerate", "--p", "2", "--format", "json", "--quiet", "--workers", "2")[1]
    assert a == b


def test_no_cache_flag(tmp_path):
    code, _, _ = run("enumerate", "--p", "2", "--quiet", "--no-cache", "--cache", str(tmp_path))
    assert code == EXIT_OK
    assert not any(tmp_path.iterdir())


def test_cache_dir_is_used(tmp_path):
    run("enumerate", "--p", "2", "--quiet", "--cache", str(tmp_path))
    assert any(tmp_path.rglob("*"))


@pytest.mark.parametrize("argv", [
    ["enumerate", "--p", "2"],
    ["enumerate", "--p", "5"],
    ["enumerate", "--p", "7"],
    ["lker", "--p", "2"],
    ["lker", "--p", "3"],
])
def test_check_against_golden(argv):
    code, _, err = run(*argv, "--check", "--format", "json")
    assert code == EXIT_OK, err
    assert "matches the stored table" in err


def test_golden_diff_detects_changes():
    table = build_table(2, with_lker=False)
    golden = load_golden(2, 2)
    assert diff_against_golden(table, golden) == []
    tampered = dict(golden, rows=golden["rows"][1:])
    assert diff_against_golden(table, tampered)


def test_lker_p2_rows_have_nonzero_kernel():
    code, out, _ = run("lker", "--p", "2", "--format", "json", "--quiet")
    assert code == EXIT_OK
    rows = read_json_rows(out)
    assert rows and all(r["lker"] for r in rows)


def test_dim_m2_filter():
    code, out, _ = run("enumerate", "--p", "2", "--dim-m2", "4", "--format", "json", "--quiet")
    assert code == EXIT_OK
    rows = read_json_rows(out)
    assert rows and all(r["kernel_dim"] == 4 for r in rows)


# --- scan-divisibility ---------------------------------------------------------------

def _scan(*extra):
    code, out, err = run("scan-divisibility", "--label", "243a2", "--format", "json", *extra)
    assert code == EXIT_OK, err
    rows = read_json_rows(out)
    summary = json.loads(err.strip().splitlines()[-1].removeprefix("summary "))
    return rows, summary


def test_scan_3p_mod_9():
    rows, summary = _scan("--point=-2,3", "--multiplier", "3", "--m", "9")
    assert summary["all_good_primes_divisible"] and summary["failures"] == []
    assert summary["inconclusive"] == [3]
    assert {r["status"] for r in rows if r["ell"] != 3} == {"divisible"}
    assert max(r["ell"] for r in rows) == 997


def test_scan_3p_mod_27_has_failures():
    _, summary = _scan("--multiplier", "3", "--m", "27")
    assert summary["failures"]


def test_scan_m1_all_divisible():
    rows, _ = _scan("--m", "1", "--lmax", "200")
    assert {r["status"] for r in rows} == {"divisible"}


def test_scan_with_facts_file(tmp_path):
    path = facts_file(tmp_path, [json.dumps(fixture("243a2").to_record())])
    code, out, _ = run("scan-divisibility", "--facts", path, "--label", "243a2", "--m", "1",
                       "--lmax", "50", "--format", "csv", "--quiet")
    assert code == EXIT_OK
    assert read_csv_rows(out)[0] == {"ell": 2, "status": "divisible", "reason": ""}
    assert run("scan-divisibility", "--facts", path, "--label", "11a1", "--m", "5")[0] == EXIT_DATA


def test_scan_reports_gap_only_for_stored_generators():
    _, summary = _scan("--multiplier", "3", "--m", "9", "--lmax", "200")
    assert summary["globally_divisible"] is False and summary["local_global_gap"] is True
    _, summary = _scan("--point=-2,3", "--multiplier", "9", "--m", "9", "--lmax", "100")
    assert summary["globally_divisible"] is True and summary["local_global_gap"] is False
    _, summary = _scan("--point=-2,-4", "--m", "1", "--lmax", "50")
    assert summary["local_global_gap"] is None
