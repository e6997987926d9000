"""Acceptance gate: one test per criterion, each printing its pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
summary, or ``heatlab verify configs/acceptance.json`` for the CLI route.
"""

import pytest

from heatlab import acceptance


@pytest.mark.parametrize("key,fn", acceptance.CRITERIA,
                         ids=[k for k, _ in acceptance.CRITERIA])
def test_criterion(key, fn):
    row = fn(None)
    print(row.line())
    assert row.passed, row.line()
