"""One test per acceptance criterion A1-A9.

Each test records a PASS/FAIL line (shown in the "acceptance criteria"
section of the pytest summary) and then asserts the verdict. Tolerances
live in ``hidden_ising.acceptance`` and are applied as stated there.
"""

import pytest

from hidden_ising.acceptance import CHECKS

from .conftest import ACCEPTANCE_LINES


@pytest.mark.slow
@pytest.mark.parametrize("tag", list(CHECKS))
def test_criterion(tag):
    result = CHECKS[tag]()
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    for key, value in result.details.items():
        print(f"  {key}: {value}")
    assert result.passed, line
