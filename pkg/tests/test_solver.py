import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracbvp.certify import check_banach
from fracbvp.fracops import GridFunction, QuadratureConfig
from fracbvp.model import BoundaryTerm, ProblemSpec, compute_deltas
from fracbvp.presets import EX1, EX2, EX3
from fracbvp.solver import (
    IterationTrace,
    OperatorPlan,
    apply_operator,
    picard_solve,
    solve_linear,
    verify,
)
from fracbvp.special import gamma

QUAD = QuadratureConfig()
PRESETS = [EX1, EX2, EX3]
IDS = ["ex1", "ex2", "ex3"]


def constant_f_closed_form(p, t):
    """The operator applied with f = 1, integrated by hand."""
    q, s, n, xi = p.q, p.sigma, p.nu, p.xi
    d1, d2, d3 = compute_deltas(p)
    c0_part = (-1 / gamma(q + 1)
               + sum(b.beta * b.eta ** (q + 1) / gamma(q + 2) + b.gamma * b.eta**q / gamma(q + 1)
                     for b in p.terms)) / d2
    frac = (-xi ** (q - s) / gamma(q - s + 1)
            + sum(b.alpha * b.eta ** (q - n) / gamma(q - n + 1) for b in p.terms))
    slope = gamma(2 - s) * gamma(2 - n) / (2 * d1 * d2)
    return t**q / gamma(q + 1) + c0_part + slope * (d3 + 2 * d2 * t) * frac, slope * 2 * d2 * frac


# --------------------------------------------------------------------------
# operator


@pytest.mark.parametrize("preset", PRESETS, ids=IDS)
def test_operator_zero_f(preset):
    p = preset.problem().with_f("0")
    x = GridFunction.from_callable(np.cos, 129)
    assert np.all(apply_operator(p, x, QUAD).values == 0.0)


@pytest.mark.parametrize("preset", PRESETS, ids=IDS)
def test_operator_constant_f(preset):
    p = preset.problem().with_f("1")
    x = GridFunction.from_callable(np.sin, 257)
    t = x.nodes
    expected, _ = constant_f_closed_form(p, t)
    np.testing.assert_allclose(apply_operator(p, x, QUAD).values, expected, rtol=0, atol=1e-6)


@pytest.mark.parametrize("preset", PRESETS, ids=IDS)
def test_operator_ignores_x_for_x_free_f(preset):
    p = preset.problem().with_f("exp(t)*cos(3*t)")
    a = apply_operator(p, GridFunction.from_callable(np.sin, 129), QUAD)
    b = apply_operator(p, GridFunction.from_callable(lambda t: 5 - t**2, 129), QUAD)
    assert a == b


def test_operator_grid_mismatch():
    plan = OperatorPlan(EX1.problem(), QuadratureConfig(65))
    with pytest.raises(ValueError):
        plan(GridFunction.zeros(129))


# --------------------------------------------------------------------------
# linear solve


def test_linear_zero():
    sol = solve_linear(EX1.problem().with_f("0"), QUAD)
    assert np.all(sol.x.values == 0.0)
    assert sol.c0 == 0.0 and sol.c1 == 0.0 and sol.has_coefficients
    assert sol.converged and sol.trace.iterates == 0


@pytest.mark.parametrize("preset", PRESETS, ids=IDS)
def test_linear_constant_coefficients(preset):
    p = preset.problem().with_f("1")
    sol = solve_linear(p, QUAD)
    expected, c1 = constant_f_closed_form(p, sol.x.nodes)
    assert sol.c1 == pytest.approx(c1, abs=1e-9)
    assert sol.c0 == pytest.approx(expected[0], abs=1e-9)
    np.testing.assert_allclose(sol.x.values, expected, rtol=0, atol=1e-6)


@pytest.mark.parametrize("preset", PRESETS, ids=IDS)
@pytest.mark.parametrize("h", ["1", "exp(-t)*sin(5*t)", "1/(1+t^2)"])
def test_linear_equals_operator_on_zero(preset, h):
    p = preset.problem().with_f(h)
    sol = solve_linear(p, QUAD)
    via_operator = apply_operator(p, GridFunction.zeros(QUAD.n_nodes), QUAD)
    np.testing.assert_allclose(sol.x.values, via_operator.values, rtol=0, atol=1e-12)


def test_linear_rejects_x():
    with pytest.raises(ValueError):
        solve_linear(EX1.problem(), QUAD)


@pytest.mark.parametrize("preset", PRESETS, ids=IDS)
def test_linear_residuals(preset):
    sol = solve_linear(preset.problem().with_f("1"), QUAD)
    r = sol.residuals
    assert r.bc1_residual <= 5e-4 and r.bc2_residual <= 5e-4
    assert r.ode_residual_sup <= 5e-2
    assert all(v >= 0 and np.isfinite(v) for v in r.as_dict().values())


@pytest.mark.parametrize("preset", PRESETS, ids=IDS)
def test_linear_refinement(preset):
    p = preset.problem().with_f("1")
    res = [solve_linear(p, QuadratureConfig(n)).residuals for n in (257, 513, 1025, 2049)]
    for name in ("bc1_residual", "bc2_residual", "ode_residual_sup"):
        v = [getattr(r, name) for r in res]
        assert all(v[i] / v[i + 1] >= 1.5 for i in range(len(v) - 1)), (name, v)


# --------------------------------------------------------------------------
# Picard


def test_picard_zero_f_from_zero():
    sol = picard_solve(EX1.problem().with_f("0"), QUAD)
    assert sol.converged and sol.trace.iterates == 1
    assert np.all(sol.x.values == 0.0)


def test_picard_zero_f_from_nonzero_init():
    # the first step maps to 0, the second confirms it
    init = GridFunction.from_callable(lambda t: 1 + t, QUAD.n_nodes)
    sol = picard_solve(EX1.problem().with_f("0"), QUAD, init=init)
    assert sol.converged and sol.trace.iterates == 2
    assert np.all(sol.x.values == 0.0)
    assert sol.trace.sup_deltas[0] == 2.0


@pytest.mark.parametrize("preset", PRESETS, ids=IDS)
def test_picard_x_free_two_steps(preset):
    p = preset.problem().with_f("1+t*cos(t)")
    sol = picard_solve(p, QUAD)
    assert sol.converged and sol.trace.iterates == 2
    assert sol.trace.sup_deltas[1] <= 1e-12
    np.testing.assert_array_equal(sol.x.values, solve_linear(p, QUAD).x.values)


def test_picard_example1():
    p = EX1.problem()
    cert = check_banach(p, 1 / 7, QUAD)
    sol = picard_solve(p, QUAD, tol=1e-9, certificate=cert)
    tr = sol.trace
    assert sol.converged and tr.final_delta <= 1e-9
    assert len(tr.observed_ratios) == len(tr.sup_deltas) - 1
    assert max(tr.observed_ratios) <= 0.8154 + 0.01
    assert sol.a_priori_bound is not None
    assert sol.a_priori_bound == pytest.approx(
        cert.quantities["L_theta"] ** tr.iterates / (1 - cert.quantities["L_theta"]) * tr.sup_deltas[0])
    fixed = apply_operator(p, sol.x, QUAD)
    assert np.max(np.abs(fixed.values - sol.x.values)) <= 2e-9


@pytest.mark.parametrize("preset", [EX2, EX3], ids=["ex2", "ex3"])
def test_picard_fixed_point_consistency(preset):
    p = preset.problem()
    sol = picard_solve(p, QUAD, tol=1e-10)
    assert sol.converged
    assert np.max(np.abs(apply_operator(p, sol.x, QUAD).values - sol.x.values)) <= 2e-10


def test_picard_nonconvergence_is_reported():
    p = ProblemSpec(1.5, 0.5, 0.5, 0.2, (BoundaryTerm(0.5, 1.0, 0.0, 0.5),), "3*x+1")
    sol = picard_solve(p, QuadratureConfig(65), max_iter=5)
    assert not sol.converged and sol.trace.iterates == 5
    assert sol.trace.final_delta > 1e-9
    assert any("no convergence" in n for n in sol.notes)
    assert sol.a_priori_bound is None


def test_picard_argument_checks():
    with pytest.raises(ValueError):
        picard_solve(EX1.problem(), QUAD, tol=0.0)
    with pytest.raises(ValueError):
        picard_solve(EX1.problem(), QUAD, max_iter=0)
    with pytest.raises(ValueError):
        picard_solve(EX1.problem(), QUAD, init=GridFunction.zeros(33))


def test_picard_deterministic():
    a = picard_solve(EX2.problem(), QUAD)
    b = picard_solve(EX2.problem(), QUAD)
    assert a.x == b.x
    assert a.to_dict() == b.to_dict()


def test_picard_with_coarse_grid():
    coarse = picard_solve(EX1.problem(), QuadratureConfig(33))
    fine = picard_solve(EX1.problem(), QuadratureConfig(1025))
    assert coarse.converged and fine.converged
    assert fine.residuals.bc1_residual < coarse.residuals.bc1_residual
    assert fine.residuals.bc2_residual < coarse.residuals.bc2_residual


# --------------------------------------------------------------------------
# verify


def test_verify_zero():
    p = EX1.problem().with_f("0")
    r = verify(p, GridFunction.zeros(QUAD.n_nodes), QUAD)
    assert max(r.as_dict().values()) <= 1e-12


def test_verify_constant_violates_bc2():
    p = ProblemSpec(1.5, 0.5, 0.5, 0.2, (BoundaryTerm(0.5, 1.0, 0.0, 0.0),), "0")
    r = verify(p, GridFunction.from_callable(lambda t: np.ones_like(t), QUAD.n_nodes), QUAD)
    assert r.bc2_residual == 1.0
    assert r.bc1_residual <= 1e-12
    assert r.ode_residual_sup <= 1e-12


def test_verify_empty_window():
    with pytest.raises(ValueError):
        verify(EX1.problem(), GridFunction.zeros(33), QUAD, check_window=(0.501, 0.51))


# --------------------------------------------------------------------------
# trace bookkeeping


@given(st.lists(st.floats(0.0, 1e3), min_size=0, max_size=20), st.booleans())
@settings(max_examples=100)
def test_trace_lengths(deltas, converged):
    tr = IterationTrace.from_deltas(deltas, converged)
    assert tr.iterates == len(deltas)
    assert len(tr.observed_ratios) == max(len(deltas) - 1, 0)
    assert tr.final_delta == (deltas[-1] if deltas else 0.0)


def test_solution_to_dict():
    sol = solve_linear(EX1.problem().with_f("1"), QUAD)
    d = sol.to_dict()
    assert d["converged"] and d["n_nodes"] == QUAD.n_nodes
    assert "c0" in d and "c1" in d
    assert set(d["residuals"]) == {"ode_residual_sup", "bc1_residual", "bc2_residual"}
