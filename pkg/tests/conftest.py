import pytest

from covariant_weyl.expr_lang import Context, parse_expr
from covariant_weyl.tensor_core import canonicalize


@pytest.fixture
def ctx():
    c = Context()
    c.add_bundle("E")
    c.tensor("T", (None, None))
    c.tensor("S", (None, None), symmetry=(((1, 0), 1),))
    c.tensor("X", (None,))
    c.tensor("f", ())
    c.symbol("a", ("E",), ("E",))
    c.symbol("s")
    return c


@pytest.fixture
def P(ctx):
    return lambda src: parse_expr(src, ctx)


def same(x, y) -> bool:
    return canonicalize(x - y).is_zero()


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
