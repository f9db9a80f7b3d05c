"""One check per acceptance criterion; run with -s to see the report lines."""
import pytest

from entropyforge.golden import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    r = run_criterion(number)
    print()
    print(r.line())
    for d in r.details:
        print("   ", d)
    assert r.passed, "\n".join(r.details)
