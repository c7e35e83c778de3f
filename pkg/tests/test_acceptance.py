"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a PASS/FAIL line (visible with ``pytest -s``).
"""

import pytest

from cpforce.validation import ACCEPTANCE_IDS, Status, run_check, summary_line


@pytest.mark.parametrize("check_id", ACCEPTANCE_IDS)
def test_acceptance(check_id):
    result = run_check(check_id)
    print(summary_line(result))
    assert result.status is Status.PASS, summary_line(result)
