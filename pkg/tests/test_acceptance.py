"""Acceptance battery: one test per shipped criterion, run at full depth.

Each test prints exactly one pass/fail line (pytest -v shows it as the
test outcome) and, on failure, the per-check details of what broke.
"""

import pytest

from zakbench import acceptance


@pytest.mark.parametrize(
    "criterion",
    acceptance.ALL_CRITERIA,
    ids=lambda c: f"criterion_{c.__name__.rsplit('_', 1)[1]}",
)
def test_acceptance_criterion(criterion):
    result = criterion("full")
    print(result.summary_line())
    assert result.passed, "\n" + result.failure_text()
