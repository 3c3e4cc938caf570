r"""Fractional integrals and Caputo derivatives of sampled functions.

Functions live on a uniform grid over ``[0, 1]``.  The Riemann-Liouville
integral

.. math:: I^\mu f(t) = \frac{1}{\Gamma(\mu)} \int_0^t (t - s)^{\mu - 1} f(s)\,ds

is computed by product integration: ``f`` is replaced by its piecewise
linear interpolant and every panel is integrated exactly against the
weakly singular kernel.  Constants and linear functions are therefore
integrated exactly, and the error for smooth ``f`` is ``O(h^2)``.

The Caputo derivative of order ``0 < mu < 1`` uses the piecewise constant
derivative given by first differences (the L1 scheme), integrated exactly
against ``(t - s)^(-mu)``.

Panel moments are evaluated through a binomial series when the panel is
short compared to its distance from ``t`` so that the weights keep full
relative accuracy on fine grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from fracbvp.special import gamma

__all__ = [
    "GridFunction",
    "QuadratureConfig",
    "rl_weights",
    "rl_integral",
    "rl_integral_nodes",
    "caputo_weights",
    "caputo_derivative",
    "caputo_derivative_nodes",
]

# snapping tolerance, in units of the grid spacing
_NODE_TOL = 1e-9
_SERIES_CUTOFF = 0.25
_SERIES_TERMS = 32


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples ``values[j] = f(j / (n_nodes - 1))`` of a function on [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("a grid function needs a 1-d array of at least 2 values")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], n_nodes: int):
        t = np.linspace(0.0, 1.0, n_nodes)
        return cls(np.broadcast_to(fn(t), t.shape))

    @classmethod
    def zeros(cls, n_nodes: int):
        return cls(np.zeros(n_nodes))

    @property
    def n_nodes(self) -> int:
        return self.values.size

    @property
    def h(self) -> float:
        return 1.0 / (self.n_nodes - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_nodes)

    def __call__(self, t):
        """Piecewise linear interpolation at ``t`` (scalar or array)."""
        return np.interp(t, self.nodes, self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class QuadratureConfig:
    """Grid resolution for solves and the refinement used for weighted integrals.

    Operator integrals and the weighted constant of the nonlinear
    contraction certificate are evaluated on a grid ``oversample`` times
    finer than the solver grid.
    """

    n_nodes: int = 1025
    oversample: int = 4

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 33:
            raise ValueError(f"n_nodes must be an integer >= 33, got {self.n_nodes}")
        if int(self.oversample) != self.oversample or self.oversample < 1:
            raise ValueError(f"oversample must be an integer >= 1, got {self.oversample}")

    @property
    def fine_nodes(self) -> int:
        return (self.n_nodes - 1) * self.oversample + 1


# --------------------------------------------------------------------------
# panel moments


def _panel_moments(r: np.ndarray, mu: float) -> tuple[np.ndarray, np.ndarray]:
    r"""Return ``(J0, J1)`` with ``J0 = int_0^1 (1-v)(1-rv)^(mu-1) dv`` and
    ``J1 = int_0^1 v (1-rv)^(mu-1) dv`` for ``0 < r <= 1``.

    A panel ``[a, b]`` with ``A = t - a``, ``d = b - a`` and ``r = d / A``
    contributes ``d A^(mu-1) (J0 f(a) + J1 f(b))`` to the kernel integral.
    """
    r = np.asarray(r, dtype=float)
    j0 = np.empty_like(r)
    j1 = np.empty_like(r)

    small = r <= _SERIES_CUTOFF
    if np.any(small):
        rs = r[small]
        coef = np.ones_like(rs)
        s0 = np.zeros_like(rs)
        s1 = np.zeros_like(rs)
        for k in range(_SERIES_TERMS):
            s0 += coef / ((k + 1) * (k + 2))
            s1 += coef / (k + 2)
            coef = coef * rs * ((k + 1 - mu) / (k + 1))
        j0[small] = s0
        j1[small] = s1

    big = ~small
    if np.any(big):
        rb = r[big]
        with np.errstate(divide="ignore"):
            lg = np.log1p(-rb)
        e0 = -np.expm1(mu * lg) / mu
        e1 = -np.expm1((mu + 1.0) * lg) / (mu + 1.0)
        full = e0 / rb
        second = (e0 - e1) / rb**2
        j1[big] = second
        j0[big] = full - second
    return j0, j1


def _locate(n_nodes: int, t: float) -> tuple[int, float]:
    """Index of the panel holding ``t`` and the offset of ``t`` into it."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"evaluation point must lie in [0, 1], got {t}")
    h = 1.0 / (n_nodes - 1)
    k = t / h
    j = int(round(k))
    # snap rounding noise onto a node, but never pull t > 0 onto t = 0:
    # near the origin I^mu f(t) ~ t^mu is not Lipschitz in t
    if abs(k - j) <= _NODE_TOL and (j > 0 or t == 0.0):
        return j, 0.0
    j = min(int(np.floor(k)), n_nodes - 2)
    return j, max(t - j * h, 0.0)


def _panel_distances(j_last: int, delta: float, h: float) -> np.ndarray:
    # distance from t to the left end of each full panel, built from integer
    # panel counts so that h / dist never exceeds 1 through rounding
    return np.arange(j_last, 0, -1) * h + delta


# --------------------------------------------------------------------------
# Riemann-Liouville integral


def rl_weights(n_nodes: int, mu: float, t: float) -> np.ndarray:
    """Weights ``w`` with ``I^mu f(t) = w @ f.values`` for grid functions of size ``n_nodes``."""
    if not mu > 0:
        raise ValueError(f"integral order must be positive, got {mu}")
    j_last, delta = _locate(n_nodes, t)
    h = 1.0 / (n_nodes - 1)
    w = np.zeros(n_nodes)

    if j_last > 0:
        dist = _panel_distances(j_last, delta, h)
        j0, j1 = _panel_moments(np.minimum(h / dist, 1.0), mu)
        scale = h * dist ** (mu - 1.0)
        w[:j_last] += scale * j0
        w[1 : j_last + 1] += scale * j1

    if delta > 0.0:
        theta = delta / h
        j0, j1 = _panel_moments(np.array([1.0]), mu)
        scale = delta**mu
        w[j_last] += scale * (j0[0] + j1[0] * (1.0 - theta))
        w[j_last + 1] += scale * j1[0] * theta

    return w / gamma(mu)


def rl_integral(f: GridFunction, mu: float, t: float) -> float:
    """Product-trapezoid approximation of ``I^mu f(t)``."""
    return float(rl_weights(f.n_nodes, mu, t) @ f.values)


def _rl_toeplitz(n_nodes: int, mu: float) -> tuple[np.ndarray, np.ndarray]:
    m = np.arange(1, n_nodes + 1, dtype=float)
    j0, j1 = _panel_moments(1.0 / m, mu)
    p = m ** (mu - 1.0) * j0
    qq = m ** (mu - 1.0) * j1
    # c[0] = Q_1, c[l] = P_l + Q_{l+1}
    c = np.empty(n_nodes)
    c[0] = qq[0]
    c[1:] = p[: n_nodes - 1] + qq[1:n_nodes]
    return c, qq


def rl_integral_nodes(values: np.ndarray, mu: float) -> np.ndarray:
    """``I^mu f`` at every node of the grid carrying ``values``.

    Uses the Toeplitz structure of the uniform-grid weights, so the cost
    is one discrete convolution.
    """
    if not mu > 0:
        raise ValueError(f"integral order must be positive, got {mu}")
    values = np.asarray(values, dtype=float)
    n = values.size
    h = 1.0 / (n - 1)
    c, qq = _rl_toeplitz(n, mu)
    out = np.convolve(c, values)[:n] - qq[:n] * values[0]
    out[0] = 0.0
    return out * (h**mu / gamma(mu))


# --------------------------------------------------------------------------
# Caputo derivative, 0 < mu <= 1


def _check_caputo_order(mu: float) -> None:
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"Caputo order must lie in (0, 1], got {mu}")


def _kernel_panels(dist: np.ndarray, d: float, mu: float) -> np.ndarray:
    # int over a panel of length d ending at distance dist - d from t
    # of (t - s)^(-mu) ds, times 1/Gamma(1 - mu)
    e = 1.0 - mu
    with np.errstate(divide="ignore"):
        lg = np.log1p(-np.minimum(d / dist, 1.0))
    return -(dist**e) * np.expm1(e * lg) / gamma(2.0 - mu)


def caputo_weights(n_nodes: int, mu: float, t: float) -> np.ndarray:
    """Weights ``w`` with ``D^mu x(t) = w @ x.values``."""
    _check_caputo_order(mu)
    j_last, delta = _locate(n_nodes, t)
    h = 1.0 / (n_nodes - 1)
    # slope weights: D = sum_j k[j] * (x[j+1] - x[j]) / h
    k = np.zeros(n_nodes - 1)
    if mu == 1.0:
        panel = j_last if delta > 0.0 else max(j_last - 1, 0)
        k[panel] = 1.0
    else:
        if j_last > 0:
            dist = _panel_distances(j_last, delta, h)
            k[:j_last] = _kernel_panels(dist, h, mu)
        if delta > 0.0:
            k[j_last] += delta ** (1.0 - mu) / gamma(2.0 - mu)
    w = np.zeros(n_nodes)
    w[1:] += k / h
    w[:-1] -= k / h
    return w


def caputo_derivative(x: GridFunction, mu: float, t: float) -> float:
    """L1-scheme approximation of the Caputo derivative ``D^mu x(t)``.

    For ``mu = 1`` this is the one-sided difference quotient of the panel
    to the left of ``t`` (the first panel when ``t = 0``).
    """
    return float(caputo_weights(x.n_nodes, mu, t) @ x.values)


def caputo_derivative_nodes(values: np.ndarray, mu: float) -> np.ndarray:
    """``D^mu x`` at every node; entry 0 is the value at ``t = 0``."""
    _check_caputo_order(mu)
    values = np.asarray(values, dtype=float)
    n = values.size
    h = 1.0 / (n - 1)
    slopes = np.diff(values) / h
    if mu == 1.0:
        return np.concatenate([slopes[:1], slopes])
    m = np.arange(1, n, dtype=float)
    b = np.zeros(n)
    b[1:] = h ** (1.0 - mu) * _kernel_panels(m, 1.0, mu)
    out = np.convolve(slopes, b)[:n]
    out[0] = 0.0
    return out
