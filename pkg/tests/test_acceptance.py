"""Acceptance gate: the eleven built-in checks, one test each.

Every test prints its own pass/fail line (visible with ``pytest -s`` or on
failure) so the suite doubles as the checklist report.
"""

import pytest

from gasphere import acceptance


@pytest.mark.parametrize("index", acceptance.criterion_indices())
def test_criterion(index):
    result = acceptance.run_criterion(index)
    status = "PASS" if result.passed else "FAIL"
    print(f"[{result.index:2d}/11] {status}  {result.name}: {result.detail}")
    assert result.passed, f"criterion {index} ({result.name}): {result.detail}"
