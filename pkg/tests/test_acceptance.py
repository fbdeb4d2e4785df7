"""End-to-end acceptance criteria, one test per criterion.

Run ``pytest tests/test_acceptance.py -s`` (or ``selfrepel acceptance``) to see the
pass/fail table.
"""

import pytest

from selfrepel import acceptance


@pytest.fixture(scope="module", autouse=True)
def _compiled():
    acceptance.warmup()


@pytest.mark.slow
@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda c: f"{c.number:02d}-{c.title.replace(' ', '-')}")
def test_criterion(criterion, capsys):
    result = criterion.run()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


def test_selectors():
    assert [c.number for c in acceptance.select("short-range")] == [1, 2, 3, 5]
    assert [c.number for c in acceptance.select("7")] == [7]
    assert len(acceptance.select("all")) == 11
    with pytest.raises(ValueError):
        acceptance.select("nonsense")
