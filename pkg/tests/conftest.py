import sys

import pytest
from hypothesis import strategies as st

from alphahash.expr import App, Lam, Var
from alphahash.hashing import HashContext

NAMES = ["x", "y", "z", "f", "g"]


def expressions(max_leaves: int = 30, names=NAMES):
    leaves = st.sampled_from(names).map(Var)
    return st.recursive(
        leaves,
        lambda kids: st.one_of(
            st.builds(Lam, st.sampled_from(names), kids),
            st.builds(App, kids, kids),
        ),
        max_leaves=max_leaves,
    )


@pytest.fixture
def ctx():
    return HashContext()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.REPORT):
        terminalreporter.write_line(mod.REPORT[k])
