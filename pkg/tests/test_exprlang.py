import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracbvp.exprlang import (
    BinOp,
    Call,
    Const,
    EvaluationError,
    ExprSyntaxError,
    Neg,
    Var,
    evaluate,
    free_variables,
    parse,
    to_source,
)

EX1_F = ("t*exp(-3.141592653589793*t)*sin(x)/(56+exp(-2*t))"
         "+atan(x)*exp(-cos(t)^2)/sqrt(64+t)+1/3")


def test_example_f_has_two_variables():
    e = parse(EX1_F, {"t", "x"})
    assert free_variables(e) == {"t", "x"}
    t, x = 0.3, -1.7
    direct = (t * math.exp(-math.pi * t) * math.sin(x) / (56 + math.exp(-2 * t))
              + math.atan(x) * math.exp(-math.cos(t) ** 2) / math.sqrt(64 + t) + 1 / 3)
    assert evaluate(e, {"t": t, "x": x}) == pytest.approx(direct, rel=1e-15)


def test_constant_and_psi():
    assert parse("0", {"t", "x"}) == Const(0.0)
    assert parse("u+1", {"u"}) == BinOp("+", Var("u"), Const(1.0))


@pytest.mark.parametrize("src, vars_, env, expected", [
    ("t^2+x", {"t", "x"}, {"t": 2, "x": 3}, 7.0),
    ("exp(-t^2)/6", {"t"}, {"t": 0}, 0.16666666666666666),
    ("ln(1+u)", {"u"}, {"u": 0}, 0.0),
    ("2^3^2", set(), {}, 512.0),
    ("-2^2", set(), {}, -4.0),
    ("2^-1", set(), {}, 0.5),
    ("1-2-3", set(), {}, -4.0),
    ("8/4/2", set(), {}, 1.0),
    ("min(t, 2)*max(-1, x)", {"t", "x"}, {"t": 3, "x": -4}, -2.0),
    ("pi", set(), {}, math.pi),
    ("abs(-3) + sqrt(16) + tan(0)", set(), {}, 7.0),
    ("1e-3*1E3", set(), {}, 1.0),
    ("(-8)^(1/1)", set(), {}, -8.0),
    ("(-2)^3", set(), {}, -8.0),
])
def test_evaluate(src, vars_, env, expected):
    assert evaluate(parse(src, vars_), env) == pytest.approx(expected, rel=1e-15)


def test_precedence_structure():
    assert parse("-t^2", {"t"}) == Neg(BinOp("^", Var("t"), Const(2.0)))
    assert parse("1+2*t", {"t"}) == BinOp("+", Const(1.0), BinOp("*", Const(2.0), Var("t")))
    assert parse("  sin ( t )", {"t"}) == Call("sin", (Var("t"),))


def test_array_evaluation():
    t = np.linspace(0, 1, 11)
    out = evaluate(parse("t^2 + 1", {"t"}), {"t": t})
    np.testing.assert_allclose(out, t**2 + 1, rtol=0, atol=0)
    assert isinstance(evaluate(parse("t", {"t"}), {"t": 0.5}), float)


@pytest.mark.parametrize("src, offset", [
    ("1 +", 3),
    ("(t", 2),
    ("t $ 2", 2),
    ("2 3", 2),
    ("t + é", 4),
    ("", 0),
    ("1 + )", 4),
])
def test_syntax_error_offsets(src, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(src, {"t"})
    assert info.value.offset == offset


@pytest.mark.parametrize("src", [
    "sin(t, t)", "max(t)", "min(t, t, t)", "foo(t)", "y + 1", "x", "sin", "pi(1)",
])
def test_rejected_sources(src):
    with pytest.raises(ExprSyntaxError):
        parse(src, {"t"})


def test_unknown_variable_context():
    with pytest.raises(ValueError):
        parse("t", {"t", "y"})


@pytest.mark.parametrize("src, env", [
    ("ln(t)", {"t": 0.0}),
    ("ln(t)", {"t": -1.0}),
    ("sqrt(t)", {"t": -1e-9}),
    ("1/t", {"t": 0.0}),
    ("t^0.5", {"t": -2.0}),
    ("t^(-1)", {"t": 0.0}),
    ("exp(t)", {"t": 1000.0}),
    ("ln(t)", {"t": np.array([1.0, 0.0])}),
])
def test_domain_errors(src, env):
    with pytest.raises(EvaluationError):
        evaluate(parse(src, {"t"}), env)


def test_missing_binding():
    with pytest.raises(EvaluationError):
        evaluate(parse("t + x", {"t", "x"}), {"t": 1.0})


CORPUS = [
    "0", "1", "t", "-t", "--t", "t+x", "t-x-1", "t*x/2", "t/(x+2)", "t^2",
    "t^x^2", "(t^x)^2", "-t^2", "(-t)^2", "2^-t", "sin(t)", "cos(t)^2", "tan(t/4)",
    "atan(x)", "exp(-pi*t)", "ln(1+abs(x))", "sqrt(64+t)", "abs(x-t)", "min(t,x)",
    "max(t,-x)", "min(max(t,0.2),0.8)", "1/3", "0.1+0.2", "1e-3*t", "2.5e+2",
    "pi", "-pi*t", "t*exp(-pi*t)*sin(x)/(56+exp(-2*t))",
    "atan(x)*exp(-cos(t)^2)/sqrt(64+t)+1/3", "exp(-t^2)/6",
    "exp(-t^2)*ln(1+abs(x))/6", "2*exp(-t)/11", "exp(-t)*(2*x^3/(1+x^2)+1)/11",
    "(7+t)/(2*(5+cos(t)))", "x^3-3*x+1", "((t))", "-(t+x)", "t-(x-1)",
    "t/(x/2)", "1-t+x*t^2", "sin(cos(tan(t)))", "abs(-abs(x))",
    "max(min(t,x),max(t,x))", "-2^2", "0.30000000000000004*t",
]


def test_corpus_size():
    assert len(CORPUS) == 50


@pytest.mark.parametrize("src", CORPUS)
def test_round_trip(src):
    e = parse(src, {"t", "x"})
    assert parse(to_source(e), {"t", "x"}) == e


@pytest.mark.parametrize("src", CORPUS)
def test_total_on_safe_bindings(src):
    # corpus expressions have no domain-violating subterm on this box
    e = parse(src, {"t", "x"})
    t = np.linspace(0.0, 1.0, 17)
    value = evaluate(e, {"t": t, "x": 0.5 + t})
    assert np.all(np.isfinite(value))


def test_determinism():
    e = parse(EX1_F, {"t", "x"})
    a = evaluate(e, {"t": np.linspace(0, 1, 101), "x": np.linspace(-3, 3, 101)})
    b = evaluate(e, {"t": np.linspace(0, 1, 101), "x": np.linspace(-3, 3, 101)})
    assert np.array_equal(a, b)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_arithmetic_matches_python(a, b):
    e = parse("x*t + x - t", {"t", "x"})
    assert evaluate(e, {"t": a, "x": b}) == b * a + b - a
