"""Acceptance suite: one test per criterion, one printed line per check.

Run with ``pytest tests/test_acceptance.py -s`` to see the PASS/FAIL lines.
"""

import pytest

from cfc_tlm.acceptance import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    checks = CRITERIA[number]()
    assert checks
    for check in checks:
        print(check.line())
    failed = [c.line() for c in checks if not c.passed]
    assert not failed, "\n".join(failed)
