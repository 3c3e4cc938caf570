"""Solvability certificates.

Three checkers, one per fixed-point argument:

* :func:`check_banach` -- Lipschitz constant ``L`` with ``L * Theta < 1``
  gives a unique solution.
* :func:`check_boyd_wong` -- the log-type bound
  ``|f(t,x) - f(t,y)| <= g(t)/Phi * ln(1 + |x - y|)`` gives a unique solution.
* :func:`check_leray_schauder` -- the growth bound ``|f(t,x)| <= p(t) psi(|x|)``
  together with some ``M`` with ``M > Theta psi(M) ||p||`` gives at least
  one solution.

Hypotheses about user expressions (Lipschitz constants, the log bound,
growth bounds, monotonicity of ``psi``) are audited by sampling.  A
passing audit is evidence, not proof, and the certificate notes say so.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from fracbvp import exprlang
from fracbvp.exprlang import Expr
from fracbvp.fracops import QuadratureConfig
from fracbvp.model import ProblemSpec, compute_phi, compute_theta, grid_sup_norm

__all__ = [
    "Kind",
    "Verdict",
    "Certificate",
    "LipschitzEstimate",
    "DEFAULT_BOX",
    "DEFAULT_SEED",
    "M_SEARCH_MAX",
    "estimate_lipschitz",
    "check_banach",
    "check_boyd_wong",
    "check_leray_schauder",
]

DEFAULT_BOX = (-10.0, 10.0)
DEFAULT_SEED = 20190523
M_SEARCH_MAX = 1e12
_M_SEARCH_MIN = 1e-12
_CHUNK = 1 << 16
# relative slack when comparing sampled inequality sides
_AUDIT_RTOL = 1e-12


class Kind(str, enum.Enum):
    BANACH = "banach"
    BOYD_WONG = "boyd_wong"
    LERAY_SCHAUDER = "leray_schauder"


class Verdict(str, enum.Enum):
    UNIQUE_SOLUTION = "unique_solution"
    AT_LEAST_ONE_SOLUTION = "at_least_one_solution"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Certificate:
    kind: Kind
    verdict: Verdict
    quantities: dict = field(default_factory=dict)
    notes: tuple = ()

    @property
    def affirmed(self) -> bool:
        return self.verdict is not Verdict.INCONCLUSIVE

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "verdict": self.verdict.value,
            "quantities": dict(self.quantities),
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class LipschitzEstimate:
    value: float
    method: str = "user_supplied"  # or "sampled"
    samples: int = 0
    notes: tuple = ()

    def __post_init__(self):
        if not self.value >= 0 or not math.isfinite(self.value):
            raise ValueError(f"Lipschitz estimate must be finite and >= 0, got {self.value}")
        if self.method not in ("user_supplied", "sampled"):
            raise ValueError(f"unknown estimate method {self.method!r}")

    @classmethod
    def user(cls, value: float) -> "LipschitzEstimate":
        return cls(float(value), "user_supplied", 0)


def _as_expr(e: Union[Expr, str], variables) -> Expr:
    return exprlang.parse(e, variables) if isinstance(e, str) else e


def _chunks(total: int):
    done = 0
    while done < total:
        n = min(_CHUNK, total - done)
        yield n
        done += n


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


# --------------------------------------------------------------------------
# Lipschitz constant


def estimate_lipschitz(
    f: Union[Expr, str],
    t_samples: int = 257,
    x_box: tuple = DEFAULT_BOX,
    pair_samples: int = 100_000,
    seed: int = DEFAULT_SEED,
) -> LipschitzEstimate:
    """Sampled lower bound on the Lipschitz constant of ``f(t, .)``.

    ``t`` is drawn from ``t_samples`` equispaced points of [0, 1].  Half
    of the pairs are uniform in ``x_box``; the other half are close pairs
    ``y = x + d`` with log-uniform ``|d|``, which resolve the largest
    slope.  The maximum difference quotient is returned.
    """
    f = _as_expr(f, {"t", "x"})
    lo, hi = map(float, x_box)
    if not lo < hi:
        raise ValueError(f"empty box {x_box!r}")
    if pair_samples < 1 or t_samples < 1:
        raise ValueError("pair_samples and t_samples must be >= 1")
    width = hi - lo
    t_grid = np.linspace(0.0, 1.0, t_samples) if t_samples > 1 else np.zeros(1)
    rng = _rng(seed)

    best = 0.0
    for n in _chunks(pair_samples):
        t = t_grid[rng.integers(0, t_grid.size, n)]
        x = rng.uniform(lo, hi, n)
        y = rng.uniform(lo, hi, n)
        n_close = n // 2
        step = width * 10.0 ** rng.uniform(-7.0, -1.0, n_close)
        step *= rng.choice([-1.0, 1.0], n_close)
        y[:n_close] = np.clip(x[:n_close] + step, lo, hi)
        dx = np.abs(x - y)
        keep = dx > 0
        if not np.any(keep):
            continue
        t, x, y, dx = t[keep], x[keep], y[keep], dx[keep]
        df = np.abs(exprlang.evaluate(f, {"t": t, "x": x}) - exprlang.evaluate(f, {"t": t, "x": y}))
        best = max(best, float(np.max(df / dx)))

    notes = (
        f"sampled over t in [0, 1] ({t_samples} points) and x in [{lo}, {hi}]",
        "sampled value is a lower bound of the true Lipschitz constant; "
        "verdicts based on it are heuristic",
    )
    return LipschitzEstimate(best, "sampled", int(pair_samples), notes)


# --------------------------------------------------------------------------
# Banach


def check_banach(
    p: ProblemSpec,
    L: Union[LipschitzEstimate, float],
    quad: QuadratureConfig | None = None,
) -> Certificate:
    """Contraction certificate: unique solution when ``L * Theta < 1``.

    On success also records ``M = sup |f(t, 0)|`` (grid sup-norm) and the
    radius ``rho = Theta M / (1 - Theta L)`` of an invariant ball.
    """
    if not isinstance(L, LipschitzEstimate):
        L = LipschitzEstimate.user(L)
    if not L.value > 0:
        raise ValueError("the Lipschitz constant must be positive")
    quad = quad or QuadratureConfig()
    theta = compute_theta(p)
    l_theta = L.value * theta
    quantities = {"L": L.value, "theta": theta, "L_theta": l_theta}
    notes = [f"Lipschitz constant is {L.method.replace('_', ' ')}"]
    notes.extend(L.notes)

    if l_theta < 1.0:
        m = _sup_f_at_zero(p, quad)
        quantities["M"] = m
        quantities["rho"] = theta * m / (1.0 - l_theta)
        notes.append("M is the grid sup-norm of |f(t, 0)| on the oversampled grid")
        verdict = Verdict.UNIQUE_SOLUTION
    else:
        notes.append("L * Theta >= 1: the contraction condition fails (it is only sufficient)")
        verdict = Verdict.INCONCLUSIVE
    return Certificate(Kind.BANACH, verdict, quantities, tuple(notes))


def _sup_f_at_zero(p: ProblemSpec, quad: QuadratureConfig) -> float:
    t = np.linspace(0.0, 1.0, quad.fine_nodes)
    values = np.broadcast_to(exprlang.evaluate(p.f, {"t": t, "x": np.zeros_like(t)}), t.shape)
    return float(np.max(np.abs(values)))


# --------------------------------------------------------------------------
# Boyd-Wong


def check_boyd_wong(
    p: ProblemSpec,
    g: Union[Expr, str],
    quad: QuadratureConfig | None = None,
    h2_samples: int = 100_000,
    x_box: tuple = DEFAULT_BOX,
    seed: int = DEFAULT_SEED,
) -> Certificate:
    """Nonlinear contraction certificate with comparison function ``ln(1 + .)``.

    Computes the weighted constant ``Phi`` from ``g`` and audits
    ``|f(t,x) - f(t,y)| <= g(t)/Phi * ln(1 + |x - y|)`` on ``h2_samples``
    random triples with ``x, y`` in ``x_box``.  Any violation makes the
    verdict inconclusive and is reported with its witness.
    """
    g = _as_expr(g, {"t"})
    quad = quad or QuadratureConfig()
    phi = compute_phi(p, g, quad)
    lo, hi = map(float, x_box)
    if not lo < hi:
        raise ValueError(f"empty box {x_box!r}")
    rng = _rng(seed)

    worst_ratio = 0.0
    witness = None
    worst_excess = 0.0
    for n in _chunks(int(h2_samples)):
        t = rng.uniform(0.0, 1.0, n)
        x = rng.uniform(lo, hi, n)
        y = rng.uniform(lo, hi, n)
        n_close = n // 4
        y[:n_close] = np.clip(x[:n_close] + (hi - lo) * 10.0 ** rng.uniform(-6.0, -1.0, n_close),
                              lo, hi)
        lhs = np.abs(exprlang.evaluate(p.f, {"t": t, "x": x}) - exprlang.evaluate(p.f, {"t": t, "x": y}))
        gt = np.broadcast_to(exprlang.evaluate(g, {"t": t}), t.shape)
        rhs = gt / phi * np.log1p(np.abs(x - y))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
        worst_ratio = max(worst_ratio, float(np.max(ratio)))
        excess = lhs - rhs * (1.0 + _AUDIT_RTOL)
        k = int(np.argmax(excess))
        if excess[k] > worst_excess:
            worst_excess = float(excess[k])
            witness = (float(t[k]), float(x[k]), float(y[k]))

    quantities = {"phi": phi, "h2_samples": float(h2_samples), "h2_max_ratio": worst_ratio}
    notes = [
        "comparison function fixed to psi(r) = ln(1 + r)",
        f"log-type bound audited by sampling on x, y in [{lo}, {hi}] only; "
        "this is evidence, not a global verification",
    ]
    if witness is None:
        verdict = Verdict.UNIQUE_SOLUTION
    else:
        verdict = Verdict.INCONCLUSIVE
        t0, x0, y0 = witness
        quantities.update({"witness_t": t0, "witness_x": x0, "witness_y": y0,
                           "witness_excess": worst_excess})
        notes.append(f"log-type bound violated at t={t0!r}, x={x0!r}, y={y0!r}")
    return Certificate(Kind.BOYD_WONG, verdict, quantities, tuple(notes))


# --------------------------------------------------------------------------
# Leray-Schauder


def _audit_psi(psi: Expr, m_max: float) -> None:
    u = np.concatenate([[0.0], np.geomspace(1e-9, m_max, 4001)])
    values = np.broadcast_to(exprlang.evaluate(psi, {"u": u}), u.shape)
    if np.any(values < 0):
        k = int(np.argmax(values < 0))
        raise ValueError(f"psi must be nonnegative; psi({u[k]!r}) = {values[k]!r}")
    drops = values[1:] < values[:-1] - _AUDIT_RTOL * np.abs(values[:-1])
    if np.any(drops):
        k = int(np.argmax(drops))
        raise ValueError(
            f"psi is not nondecreasing: psi({u[k + 1]!r}) < psi({u[k]!r})"
        )


def _growth_audit(p: ProblemSpec, p_expr: Expr, psi: Expr, samples: int,
                  x_box: tuple, seed: int):
    lo, hi = map(float, x_box)
    rng = _rng(seed)
    worst = 0.0
    witness = None
    for n in _chunks(samples):
        t = rng.uniform(0.0, 1.0, n)
        x = rng.uniform(lo, hi, n)
        lhs = np.abs(exprlang.evaluate(p.f, {"t": t, "x": x}))
        rhs = (np.broadcast_to(exprlang.evaluate(p_expr, {"t": t}), t.shape)
               * np.broadcast_to(exprlang.evaluate(psi, {"u": np.abs(x)}), t.shape))
        excess = lhs - rhs * (1.0 + _AUDIT_RTOL)
        k = int(np.argmax(excess))
        if excess[k] > worst:
            worst = float(excess[k])
            witness = (float(t[k]), float(x[k]))
    return witness, worst


def _bisect_threshold(r, lo: float, hi: float) -> float:
    # r(lo) <= 0 < r(hi)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if r(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


def check_leray_schauder(
    p: ProblemSpec,
    p_expr: Union[Expr, str],
    psi: Union[Expr, str],
    quad: QuadratureConfig | None = None,
    h3_samples: int = 20_000,
    x_box: tuple = DEFAULT_BOX,
    seed: int = DEFAULT_SEED,
    m_max: float = M_SEARCH_MAX,
) -> Certificate:
    """Existence certificate from a growth bound ``|f(t,x)| <= p(t) psi(|x|)``.

    Searches ``(0, m_max]`` for the smallest ``M*`` beyond which
    ``r(M) = M - Theta psi(M) ||p||`` is positive (geometric scan, then
    bisection).  ``||p||`` is the grid sup-norm of ``p``.

    Raises
    ------
    ValueError
        If ``p`` is negative at a grid node, or ``psi`` is negative or
        decreasing on the sampled range.
    """
    p_expr = _as_expr(p_expr, {"t"})
    psi = _as_expr(psi, {"u"})
    quad = quad or QuadratureConfig()

    t = np.linspace(0.0, 1.0, quad.fine_nodes)
    pv = np.broadcast_to(exprlang.evaluate(p_expr, {"t": t}), t.shape)
    if np.any(pv < 0):
        k = int(np.argmax(pv < 0))
        raise ValueError(f"p is negative at t = {t[k]!r} (p = {pv[k]!r})")
    _audit_psi(psi, m_max)

    theta = compute_theta(p)
    pnorm = grid_sup_norm(p_expr, "t", quad)
    theta_pnorm = theta * pnorm
    quantities = {"theta": theta, "p_norm": pnorm, "theta_pnorm": theta_pnorm}
    notes = [
        "||p|| is the grid sup-norm on the oversampled grid",
        "monotonicity of psi audited on a geometric grid of [0, M_max]",
    ]

    def r(m: float) -> float:
        return m - theta_pnorm * exprlang.evaluate(psi, {"u": m})

    grid = np.geomspace(_M_SEARCH_MIN, m_max, 2401)
    rv = grid - theta_pnorm * np.broadcast_to(exprlang.evaluate(psi, {"u": grid}), grid.shape)
    positive = np.flatnonzero(rv > 0)

    verdict = Verdict.INCONCLUSIVE
    if positive.size == 0:
        notes.append(f"no M in (0, {m_max:g}] with M > Theta psi(M) ||p||")
    else:
        k = int(positive[0])
        if k == 0:
            m_star = 0.0
            witness = float(grid[0])
            notes.append(f"growth condition already holds at M = {grid[0]:g}")
        else:
            m_star = _bisect_threshold(r, float(grid[k - 1]), float(grid[k]))
            witness = m_star
            while not r(witness) > 0:
                witness = math.nextafter(witness, math.inf)
        quantities["M_threshold"] = m_star
        quantities["M_witness"] = witness
        denom = theta_pnorm * exprlang.evaluate(psi, {"u": witness})
        quantities["M_ratio"] = witness / denom if denom > 0 else math.inf
        verdict = Verdict.AT_LEAST_ONE_SOLUTION

    if h3_samples:
        w, excess = _growth_audit(p, p_expr, psi, int(h3_samples), x_box, seed)
        lo, hi = map(float, x_box)
        notes.append(f"growth bound audited by sampling on x in [{lo}, {hi}] "
                     f"({int(h3_samples)} samples)")
        if w is not None:
            verdict = Verdict.INCONCLUSIVE
            quantities.update({"witness_t": w[0], "witness_x": w[1], "witness_excess": excess})
            notes.append(f"growth bound violated at t={w[0]!r}, x={w[1]!r}")
    return Certificate(Kind.LERAY_SCHAUDER, verdict, quantities, tuple(notes))
