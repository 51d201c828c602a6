import os

import pytest
from hypothesis import HealthCheck, settings

from circuitmip.problem import parse_spec, presolve

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CZ_DOC = """
num_qubits: 2
maximum_depth: 4
elementary_gates: [H_1, H_2, CNot_1_2, Identity]
target_gate: CZ
"""


def problem(doc: str, **kw):
    return presolve(parse_spec(doc), **kw)


@pytest.fixture
def cz_problem():
    return problem(CZ_DOC)


# acceptance criteria report one line each at the end of the session
_ACCEPTANCE: dict = {}


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE[number] = (title, passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[n]
        line = f"AC{n:<2} {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
