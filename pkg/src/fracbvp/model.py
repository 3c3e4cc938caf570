"""Problem data and the closed-form constants derived from it.

A problem is the Caputo equation ``D^q x(t) = f(t, x(t))`` on ``[0, 1]``
with ``1 < q <= 2`` and the two nonlocal conditions::

    D^sigma x(xi) = sum_i alpha_i D^nu x(eta_i)
    x(1)          = sum_i beta_i int_0^{eta_i} x(s) ds + sum_i gamma_i x(eta_i)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from fracbvp import exprlang
from fracbvp.exprlang import Expr
from fracbvp.fracops import QuadratureConfig, rl_weights
from fracbvp.special import gamma

__all__ = [
    "DELTA_THRESHOLD",
    "ProblemError",
    "BoundaryTerm",
    "ProblemSpec",
    "StructuralConstants",
    "compute_deltas",
    "compute_theta",
    "compute_omega",
    "compute_phi",
    "structural_constants",
    "grid_sup_norm",
    "derivative_weight",
]

DELTA_THRESHOLD = 1e-10


class ProblemError(ValueError):
    """Invalid problem data.  ``field`` names the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class BoundaryTerm:
    eta: float
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("eta", "alpha", "beta", "gamma"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ProblemError(f"{name} must be finite", name)
            object.__setattr__(self, name, value)
        if not 0.0 < self.eta < 1.0:
            raise ProblemError(f"eta must lie in (0, 1), got {self.eta}", "eta")


@dataclass(frozen=True)
class ProblemSpec:
    """A validated boundary value problem.

    ``f`` may be given as source text; it is parsed over ``{t, x}``.
    Construction fails with :class:`ProblemError` when the orders or
    points are out of range or when ``Delta1`` or ``Delta2`` vanish.
    """

    q: float
    sigma: float
    nu: float
    xi: float
    terms: tuple
    f: Union[Expr, str]

    def __post_init__(self):
        for name in ("q", "sigma", "nu", "xi"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ProblemError(f"{name} must be finite", name)
            object.__setattr__(self, name, value)
        if not 1.0 < self.q <= 2.0:
            raise ProblemError(f"q must lie in (1, 2], got {self.q}", "q")
        if not 0.0 < self.sigma <= 1.0:
            raise ProblemError(f"sigma must lie in (0, 1], got {self.sigma}", "sigma")
        if not 0.0 < self.nu <= 1.0:
            raise ProblemError(f"nu must lie in (0, 1], got {self.nu}", "nu")

        terms = tuple(self.terms)
        if not terms:
            raise ProblemError("at least one boundary term is required", "terms")
        if not all(isinstance(b, BoundaryTerm) for b in terms):
            raise ProblemError("terms must be BoundaryTerm instances", "terms")
        object.__setattr__(self, "terms", terms)
        if not 0.0 < self.xi < terms[0].eta:
            raise ProblemError(
                f"xi must satisfy 0 < xi < eta_1, got xi={self.xi}", "xi"
            )
        for i in range(1, len(terms)):
            if not terms[i - 1].eta < terms[i].eta:
                raise ProblemError("eta values must be strictly increasing",
                                   f"terms[{i}].eta")

        if isinstance(self.f, str):
            object.__setattr__(self, "f", exprlang.parse(self.f, {"t", "x"}))

        d1, d2, _ = compute_deltas(self)
        if abs(d1) <= DELTA_THRESHOLD:
            raise ProblemError(f"Delta1 = {d1!r} is (numerically) zero", "Delta1")
        if abs(d2) <= DELTA_THRESHOLD:
            raise ProblemError(f"Delta2 = {d2!r} is (numerically) zero", "Delta2")

    @property
    def etas(self) -> np.ndarray:
        return np.array([b.eta for b in self.terms])

    @property
    def alphas(self) -> np.ndarray:
        return np.array([b.alpha for b in self.terms])

    @property
    def betas(self) -> np.ndarray:
        return np.array([b.beta for b in self.terms])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([b.gamma for b in self.terms])

    def with_f(self, f: Union[Expr, str]) -> "ProblemSpec":
        return ProblemSpec(self.q, self.sigma, self.nu, self.xi, self.terms, f)


@dataclass(frozen=True)
class StructuralConstants:
    delta1: float
    delta2: float
    delta3: float
    theta: float
    omega: float

    def as_dict(self) -> dict:
        return {
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta3": self.delta3,
            "theta": self.theta,
            "omega": self.omega,
        }


def _sum(values) -> float:
    # fixed left-to-right order so results are bit-reproducible
    acc = 0.0
    for v in values:
        acc += v
    return acc


def compute_deltas(p: ProblemSpec) -> tuple[float, float, float]:
    """Return ``(Delta1, Delta2, Delta3)``.

    ``Delta1 = xi^(1-sigma) Gamma(2-nu) - Gamma(2-sigma) sum alpha_i eta_i^(1-nu)``,
    ``Delta2 = 1 - sum (beta_i eta_i + gamma_i)`` and
    ``Delta3 = -2 + sum eta_i (beta_i eta_i + 2 gamma_i)``.
    """
    d1 = p.xi ** (1.0 - p.sigma) * gamma(2.0 - p.nu) - gamma(2.0 - p.sigma) * _sum(
        b.alpha * b.eta ** (1.0 - p.nu) for b in p.terms
    )
    d2 = 1.0 - _sum(b.beta * b.eta + b.gamma for b in p.terms)
    d3 = -2.0 + _sum(b.eta * (b.beta * b.eta + 2.0 * b.gamma) for b in p.terms)
    return d1, d2, d3


def derivative_weight(p: ProblemSpec) -> float:
    """The factor ``xi^(q-sigma)/Gamma(q-sigma+1) + sum |alpha_i| eta_i^(q-nu)/Gamma(q-nu+1)``
    shared by Theta and Omega."""
    q = p.q
    return p.xi ** (q - p.sigma) / gamma(q - p.sigma + 1.0) + _sum(
        abs(b.alpha) * b.eta ** (q - p.nu) / gamma(q - p.nu + 1.0) for b in p.terms
    )


def _theta_coefficient(p: ProblemSpec, deltas) -> float:
    d1, d2, d3 = deltas
    return (gamma(2.0 - p.sigma) * gamma(2.0 - p.nu) * (abs(d3) + 2.0 * abs(d2))
            / (2.0 * abs(d1 * d2)))


def compute_theta(p: ProblemSpec) -> float:
    """Closed-form bound on the solution operator (the Banach constant)."""
    deltas = compute_deltas(p)
    d2 = deltas[1]
    q = p.q
    inner = 1.0 + q + _sum(
        b.eta**q * (b.eta * abs(b.beta) + (q + 1.0) * abs(b.gamma)) for b in p.terms
    )
    return (1.0 / gamma(q + 1.0)
            + inner / (abs(d2) * gamma(q + 2.0))
            + _theta_coefficient(p, deltas) * derivative_weight(p))


def compute_omega(p: ProblemSpec) -> float:
    """Closed-form bound on the derivative of the solution operator."""
    d1 = compute_deltas(p)[0]
    return (1.0 / gamma(p.q)
            + gamma(2.0 - p.sigma) * gamma(2.0 - p.nu) / abs(d1) * derivative_weight(p))


def structural_constants(p: ProblemSpec) -> StructuralConstants:
    d1, d2, d3 = compute_deltas(p)
    return StructuralConstants(d1, d2, d3, compute_theta(p), compute_omega(p))


def _fine_grid(quad: QuadratureConfig) -> np.ndarray:
    return np.linspace(0.0, 1.0, quad.fine_nodes)


def grid_sup_norm(e: Expr, var: str, quad: QuadratureConfig) -> float:
    """Max of ``|e|`` over the oversampled grid (the "grid sup-norm")."""
    t = _fine_grid(quad)
    values = np.broadcast_to(exprlang.evaluate(e, {var: t}), t.shape)
    return float(np.max(np.abs(values)))


def compute_phi(p: ProblemSpec, g: Union[Expr, str], quad: QuadratureConfig) -> float:
    """Weighted-integral constant of the nonlinear contraction certificate.

    Each kernel moment of ``g`` is computed by product quadrature on the
    oversampled grid.  With ``g = 1`` the result coincides with Theta.

    Raises
    ------
    ValueError
        If ``g`` is negative at a quadrature node or the constant is not
        positive.
    """
    if isinstance(g, str):
        g = exprlang.parse(g, {"t"})
    t = _fine_grid(quad)
    m = t.size
    gv = np.broadcast_to(exprlang.evaluate(g, {"t": t}), t.shape)
    if np.any(gv < 0):
        j = int(np.argmax(gv < 0))
        raise ValueError(f"g is negative at t = {t[j]!r} (g = {gv[j]!r})")

    d1, d2, d3 = compute_deltas(p)
    q = p.q
    ad2 = abs(d2)

    main = (1.0 + 1.0 / ad2) * (rl_weights(m, q, 1.0) @ gv)

    bc = 0.0
    for b in p.terms:
        bc += (abs(b.gamma) * (rl_weights(m, q, b.eta) @ gv)
               + abs(b.beta) * (rl_weights(m, q + 1.0, b.eta) @ gv))
    bc /= ad2

    frac = rl_weights(m, q - p.sigma, p.xi) @ gv
    for b in p.terms:
        frac += abs(b.alpha) * (rl_weights(m, q - p.nu, b.eta) @ gv)
    frac *= _theta_coefficient(p, (d1, d2, d3))

    phi = float(main + bc + frac)
    if not phi > 0.0:
        raise ValueError(f"the weighted constant must be positive, got {phi!r}")
    return phi
