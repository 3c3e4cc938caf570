"""Solution operator, direct linear solve, Picard iteration and residual checks.

The solution operator maps ``x`` to

    (A x)(t) = I^q F(t) + c0[F] + c1[F] t,       F(s) = f(s, x(s)),

where ``c0`` and ``c1`` are the linear functionals fixed by the two
boundary conditions.  Fixed points of ``A`` are exactly the solutions of
the boundary value problem.

All integrals of ``F`` are product-trapezoid sums on a grid ``oversample``
times finer than the solver grid, with ``x`` interpolated linearly onto it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from fracbvp import exprlang
from fracbvp.certify import Certificate, Kind, Verdict
from fracbvp.fracops import (
    GridFunction,
    QuadratureConfig,
    caputo_derivative_nodes,
    rl_integral,
    rl_integral_nodes,
    rl_weights,
)
from fracbvp.model import ProblemSpec, compute_deltas
from fracbvp.special import gamma

__all__ = [
    "IterationTrace",
    "Residuals",
    "Solution",
    "OperatorPlan",
    "apply_operator",
    "solve_linear",
    "picard_solve",
    "verify",
    "DEFAULT_CHECK_WINDOW",
]

log = logging.getLogger(__name__)

# interior nodes where the equation residual is measured; the double
# numerical differentiation is unreliable in a boundary layer at t = 0
DEFAULT_CHECK_WINDOW = (0.1, 1.0)


@dataclass(frozen=True)
class IterationTrace:
    iterates: int
    sup_deltas: tuple
    observed_ratios: tuple
    converged: bool
    final_delta: float

    @classmethod
    def from_deltas(cls, deltas, converged: bool) -> "IterationTrace":
        deltas = tuple(float(d) for d in deltas)
        ratios = tuple(
            deltas[k + 1] / deltas[k] if deltas[k] > 0 else 0.0
            for k in range(len(deltas) - 1)
        )
        final = deltas[-1] if deltas else 0.0
        return cls(len(deltas), deltas, ratios, converged, final)


@dataclass(frozen=True)
class Residuals:
    ode_residual_sup: float
    bc1_residual: float
    bc2_residual: float

    def as_dict(self) -> dict:
        return {
            "ode_residual_sup": self.ode_residual_sup,
            "bc1_residual": self.bc1_residual,
            "bc2_residual": self.bc2_residual,
        }


@dataclass(frozen=True)
class Solution:
    """A grid solution with its iteration history and residuals.

    ``c0`` and ``c1`` (the constant and slope of the homogeneous part) are
    only meaningful when ``has_coefficients`` is true, i.e. for direct
    linear solves.
    """

    x: GridFunction
    trace: IterationTrace
    residuals: Residuals
    c0: float = 0.0
    c1: float = 0.0
    has_coefficients: bool = False
    a_priori_bound: float | None = None
    notes: tuple = field(default=())

    @property
    def converged(self) -> bool:
        return self.trace.converged

    def to_dict(self) -> dict:
        out = {
            "n_nodes": self.x.n_nodes,
            "iterates": self.trace.iterates,
            "converged": self.trace.converged,
            "final_delta": self.trace.final_delta,
            "sup_deltas": list(self.trace.sup_deltas),
            "observed_ratios": list(self.trace.observed_ratios),
            "residuals": self.residuals.as_dict(),
            "notes": list(self.notes),
        }
        if self.has_coefficients:
            out["c0"] = self.c0
            out["c1"] = self.c1
        if self.a_priori_bound is not None:
            out["a_priori_bound"] = self.a_priori_bound
        return out


class OperatorPlan:
    """Precomputed quadrature for the solution operator of one problem.

    Building the plan costs a handful of weight vectors; applying it costs
    one evaluation of ``f`` on the fine grid and one convolution.
    """

    def __init__(self, p: ProblemSpec, quad: QuadratureConfig | None = None):
        self.p = p
        self.quad = quad or QuadratureConfig()
        self.coarse = np.linspace(0.0, 1.0, self.quad.n_nodes)
        self.fine = np.linspace(0.0, 1.0, self.quad.fine_nodes)

    @cached_property
    def functionals(self) -> tuple[np.ndarray, np.ndarray]:
        """Weight vectors ``(w_c0, w_slope)`` on the fine grid.

        ``c1 = 2 Delta2 (w_slope @ F)`` and ``c0 = w_c0 @ F + Delta3 (w_slope @ F)``.
        """
        p = self.p
        m = self.fine.size
        q = p.q
        d1, d2, _ = compute_deltas(p)

        w_c0 = -rl_weights(m, q, 1.0)
        for b in p.terms:
            w_c0 = w_c0 + b.beta * rl_weights(m, q + 1.0, b.eta)
            w_c0 = w_c0 + b.gamma * rl_weights(m, q, b.eta)
        w_c0 = w_c0 / d2

        w_slope = -rl_weights(m, q - p.sigma, p.xi)
        for b in p.terms:
            w_slope = w_slope + b.alpha * rl_weights(m, q - p.nu, b.eta)
        w_slope = w_slope * (gamma(2.0 - p.sigma) * gamma(2.0 - p.nu) / (2.0 * d1 * d2))
        return w_c0, w_slope

    def rhs(self, x: GridFunction) -> np.ndarray:
        """``F = f(s, x(s))`` on the fine grid."""
        if x.n_nodes != self.quad.n_nodes:
            raise ValueError(
                f"grid function has {x.n_nodes} nodes, solver grid has {self.quad.n_nodes}"
            )
        xf = np.interp(self.fine, self.coarse, x.values)
        return np.broadcast_to(
            exprlang.evaluate(self.p.f, {"t": self.fine, "x": xf}), self.fine.shape
        )

    def coefficients(self, rhs: np.ndarray) -> tuple[float, float]:
        _, d2, d3 = compute_deltas(self.p)
        w_c0, w_slope = self.functionals
        s = float(w_slope @ rhs)
        return float(w_c0 @ rhs) + d3 * s, 2.0 * d2 * s

    def apply_rhs(self, rhs: np.ndarray) -> tuple[np.ndarray, float, float]:
        c0, c1 = self.coefficients(rhs)
        main = rl_integral_nodes(rhs, self.p.q)[:: self.quad.oversample]
        return main + c0 + c1 * self.coarse, c0, c1

    def __call__(self, x: GridFunction) -> GridFunction:
        values, _, _ = self.apply_rhs(self.rhs(x))
        return GridFunction(values)


def apply_operator(p: ProblemSpec, x: GridFunction, quad: QuadratureConfig | None = None) -> GridFunction:
    """One application of the solution operator, sampled on the grid of ``x``.

    Only ``quad.oversample`` is used; the node count comes from ``x``.
    """
    oversample = quad.oversample if quad is not None else QuadratureConfig().oversample
    return OperatorPlan(p, QuadratureConfig(x.n_nodes, oversample))(x)


def _solution(p, quad, values, trace, *, c0=0.0, c1=0.0, has_coefficients=False,
              a_priori_bound=None, notes=()) -> Solution:
    x = GridFunction(values)
    return Solution(x, trace, verify(p, x, quad), c0, c1, has_coefficients,
                    a_priori_bound, tuple(notes))


def solve_linear(p: ProblemSpec, quad: QuadratureConfig | None = None) -> Solution:
    """Direct solve when ``f`` depends on ``t`` only.

    Raises
    ------
    ValueError
        If ``f`` mentions ``x``.
    """
    if "x" in exprlang.free_variables(p.f):
        raise ValueError("solve_linear needs a right-hand side independent of x")
    quad = quad or QuadratureConfig()
    plan = OperatorPlan(p, quad)
    h = np.broadcast_to(exprlang.evaluate(p.f, {"t": plan.fine}), plan.fine.shape)
    values, c0, c1 = plan.apply_rhs(h)
    trace = IterationTrace.from_deltas((), True)
    return _solution(p, quad, values, trace, c0=c0, c1=c1, has_coefficients=True)


def picard_solve(
    p: ProblemSpec,
    quad: QuadratureConfig | None = None,
    tol: float = 1e-9,
    max_iter: int = 200,
    init: GridFunction | None = None,
    certificate: Certificate | None = None,
) -> Solution:
    """Iterate ``x <- A x`` until the sup-norm step is at most ``tol``.

    Non-convergence is reported through ``trace.converged`` rather than
    raised.  When a Banach certificate with ``L * Theta < 1`` is passed,
    the a-priori error bound ``(L Theta)^k / (1 - L Theta) ||x1 - x0||``
    for the returned iterate is recorded.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    quad = quad or QuadratureConfig()
    plan = OperatorPlan(p, quad)
    x = np.zeros(quad.n_nodes) if init is None else np.array(init.values, dtype=float)
    if x.size != quad.n_nodes:
        raise ValueError(f"initial guess has {x.size} nodes, solver grid has {quad.n_nodes}")

    deltas = []
    converged = False
    for k in range(max_iter):
        new, _, _ = plan.apply_rhs(plan.rhs(GridFunction(x)))
        delta = float(np.max(np.abs(new - x)))
        deltas.append(delta)
        x = new
        log.debug("picard iterate %d: sup step %.3e", k + 1, delta)
        if not math.isfinite(delta):
            break
        if delta <= tol:
            converged = True
            break

    notes = []
    bound = None
    if (certificate is not None and certificate.kind is Kind.BANACH
            and certificate.verdict is Verdict.UNIQUE_SOLUTION):
        rate = certificate.quantities["L_theta"]
        bound = rate ** len(deltas) / (1.0 - rate) * deltas[0]
        notes.append(f"a-priori bound uses contraction factor {rate!r}")
    if not converged:
        notes.append(f"no convergence after {len(deltas)} iterations")
    trace = IterationTrace.from_deltas(deltas, converged)
    return _solution(p, quad, x, trace, a_priori_bound=bound, notes=notes)


# --------------------------------------------------------------------------
# residuals


def _first_derivative(x: np.ndarray, q: float) -> np.ndarray:
    """Derivative of grid values; the value at t = 0 comes from a local fit
    with the basis ``1, t, t^q, t^(q+1)`` matching the solution's expansion."""
    n = x.size
    h = 1.0 / (n - 1)
    y = np.gradient(x, h, edge_order=2)
    s = np.arange(4) * h
    basis = np.stack([np.ones(4), s, s**q, s ** (q + 1.0)], axis=1)
    coef = np.linalg.solve(basis, x[:4])
    y[0] = coef[1]
    return y


def verify(
    p: ProblemSpec,
    x: GridFunction,
    quad: QuadratureConfig | None = None,
    check_window: tuple = DEFAULT_CHECK_WINDOW,
) -> Residuals:
    """Residuals of the equation and both boundary conditions for grid values ``x``.

    The order-``q`` Caputo derivative is evaluated as the order ``q - 1``
    derivative of the numerical first derivative, at nodes inside
    ``check_window``.  The boundary residuals use nodal L1 derivatives and
    trapezoid integrals; values at the off-grid points ``xi`` and ``eta_i``
    are linearly interpolated (this keeps the error expansion smooth in the
    grid size, unlike a partial last panel).
    """
    t = x.nodes
    y = _first_derivative(x.values, p.q)
    dq = caputo_derivative_nodes(y, p.q - 1.0)
    lo, hi = check_window
    mask = (t >= lo) & (t <= hi)
    mask[0] = False
    if not np.any(mask):
        raise ValueError(f"check window {check_window!r} holds no grid nodes")
    fx = np.broadcast_to(exprlang.evaluate(p.f, {"t": t[mask], "x": x.values[mask]}),
                         t[mask].shape)
    ode = float(np.max(np.abs(dq[mask] - fx)))

    d_sigma = caputo_derivative_nodes(x.values, p.sigma)
    d_nu = caputo_derivative_nodes(x.values, p.nu)
    left = float(np.interp(p.xi, t, d_sigma))
    right = 0.0
    for b in p.terms:
        right += b.alpha * float(np.interp(b.eta, t, d_nu))
    bc1 = abs(left - right)

    rhs = 0.0
    for b in p.terms:
        rhs += b.beta * rl_integral(x, 1.0, b.eta) + b.gamma * float(x(b.eta))
    bc2 = abs(float(x.values[-1]) - rhs)
    return Residuals(ode, bc1, bc2)
