"""Acceptance criteria, one test each.

The suite runs once per session (criterion 12 checks the binary-tree
prefixes the others produce); every criterion prints a PASS/FAIL line.
Run standalone with ``python3 tests/test_acceptance.py``.
"""
import sys

import pytest

from rotortree import acceptance

RESULTS: dict = {}


@pytest.fixture(scope="session")
def acceptance_results():
    if not RESULTS:
        for res in acceptance.run():
            RESULTS[res.number] = res
    return RESULTS


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, acceptance_results):
    res = acceptance_results[number]
    print(res.line())
    assert res.passed, res.line()


if __name__ == "__main__":
    results = acceptance.run(report=lambda r: print(r.line(), flush=True))
    sys.exit(0 if all(r.passed for r in results) else 1)
