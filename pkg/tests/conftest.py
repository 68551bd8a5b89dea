import pytest

from galcoh.matgroup import gl2
from galcoh.modarith import RingSpec
from galcoh.subgroups import enumerate_subgroup_classes


@pytest.fixture(autouse=True, scope="session")
def _private_caches(tmp_path_factory):
    """Keep enumeration and curve caches out of the user's home directory."""
    mp = pytest.MonkeyPatch()
    root = tmp_path_factory.mktemp("cache")
    mp.setenv("GALCOH_CACHE_DIR", str(root / "subgroups"))
    mp.setenv("GALCOH_CURVE_CACHE", str(root / "curves"))
    mp.delenv("GALCOH_CURVE_DB_URL", raising=False)
    yield root
    mp.undo()


@pytest.fixture(scope="session")
def z4_classes():
    return enumerate_subgroup_classes(gl2(RingSpec(2, 2)))


@pytest.fixture(scope="session")
def z9_classes():
    return enumerate_subgroup_classes(gl2(RingSpec(3, 2)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
