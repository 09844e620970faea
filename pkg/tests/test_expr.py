import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from allee_dyn import expr
from allee_dyn.errors import ParseError


@pytest.mark.parametrize("source,fn", [
    ("x", lambda x: x),
    ("2*x + 1", lambda x: 2 * x + 1),
    ("x^2", lambda x: x**2),
    ("x**2 - 3*x", lambda x: x**2 - 3 * x),
    ("-x + abs(x - 2)", lambda x: -x + abs(x - 2)),
    ("exp(2*(1-x))", lambda x: math.exp(2 * (1 - x))),
    ("sin(pi*(x-1))", lambda x: math.sin(math.pi * (x - 1))),
    ("arcsin(x/10)", lambda x: math.asin(x / 10)),
    ("asin(x/10)", lambda x: math.asin(x / 10)),
    ("4*x/(2+(x-3)^2)", lambda x: 4 * x / (2 + (x - 3) ** 2)),
    ("2^3^2", lambda x: 512.0),  # right-associative power
    ("1e-3 + 2.5E2*x", lambda x: 1e-3 + 250.0 * x),
])
def test_eval_matches_python(source, fn):
    node = expr.parse(source)
    for x in (0.0, 0.5, 1.0, 2.25, 7.5):
        assert node.eval(x) == pytest.approx(fn(x), rel=1e-15, abs=1e-15)


@given(st.floats(min_value=0.0, max_value=20.0, allow_nan=False))
def test_scalar_and_vector_eval_agree(x):
    node = expr.parse("x - sin(pi*(x-1)) - 0.25")
    scalar = node.eval(x)
    vec = node.eval_vec(np.array([x]))[0]
    assert scalar == pytest.approx(vec, rel=1e-14, abs=1e-14)


@pytest.mark.parametrize("bad", [
    "", "x +", "2 *", "sin x", "foo(x)", "y + 1", "(x", "x)", "1..2", "x $ 2",
])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        expr.parse(bad)


def test_power_binds_tighter_than_product():
    assert expr.parse("2*x^2").eval(3.0) == 18.0
    assert expr.parse("-x^2").eval(2.0) == -4.0


def test_unary_and_whitespace():
    node = expr.parse("  - x  + + 3 ")
    assert node.eval(2.0) == 1.0
