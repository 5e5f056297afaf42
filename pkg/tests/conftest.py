from pathlib import Path

import pytest

from robust_spdc import io as dio

DATA = Path(__file__).resolve().parents[1] / "src" / "robust_spdc" / "data"

# Filled by tests/test_acceptance.py: criterion id -> (passed, detail)
ACCEPTANCE = {}



@pytest.fixture(scope="session")
def pp_file():
    return DATA / "pp_20mm.json"


@pytest.fixture(scope="session")
def dmcs_file():
    return DATA / "dmcs_reference.json"


@pytest.fixture(scope="session")
def dmcs_doc(dmcs_file):
    return dio.load(dmcs_file)


@pytest.fixture(scope="session")
def pp_doc(pp_file):
    return dio.load(pp_file)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split("-")[0]), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {key}: {detail}")
