"""Built-in encodings of the three reference problems and their published values.

Each preset carries exact rational data (``fractions.Fraction``) and the
certificate inputs used with it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as F

from fracbvp.model import BoundaryTerm, ProblemSpec

__all__ = ["Preset", "PRESETS", "get_preset"]


@dataclass(frozen=True)
class Preset:
    example_id: int
    q: F
    sigma: F
    nu: F
    xi: F
    eta: tuple
    alpha: tuple
    beta: tuple
    gamma: tuple
    f: str
    lipschitz: F | None = None
    g: str | None = None
    p: str | None = None
    psi: str | None = None
    # name -> (published value, absolute tolerance)
    published: dict = field(default_factory=dict)

    def problem(self) -> ProblemSpec:
        terms = tuple(
            BoundaryTerm(float(e), float(a), float(b), float(c))
            for e, a, b, c in zip(self.eta, self.alpha, self.beta, self.gamma)
        )
        return ProblemSpec(float(self.q), float(self.sigma), float(self.nu),
                           float(self.xi), terms, self.f)

    def exact_delta2(self) -> F:
        return 1 - sum(b * e + c for b, e, c in zip(self.beta, self.eta, self.gamma))

    def exact_delta3(self) -> F:
        return -2 + sum(e * (b * e + 2 * c) for b, e, c in zip(self.beta, self.eta, self.gamma))


EX1 = Preset(
    example_id=1,
    q=F(3, 2), sigma=F(1, 3), nu=F(1, 4), xi=F(3, 5),
    eta=(F(4, 5), F(6, 7)),
    alpha=(F(1), F(1, 2)),
    beta=(F(1, 3), F(2, 3)),
    gamma=(F(3), F(1, 7)),
    f=("t*exp(-pi*t)*sin(x)/(56+exp(-2*t))"
       "+atan(x)*exp(-cos(t)^2)/sqrt(64+t)+1/3"),
    lipschitz=F(1, 7),
    published={
        "delta1": (-0.51192, 5e-5),
        "delta2": (float(F(-313, 105)), 1e-12),
        "delta3": (float(F(13774, 3675)), 1e-12),
        "theta": (5.70719, 1e-4),
        "L_theta": (0.81531, 1e-4),
    },
)

EX2 = Preset(
    example_id=2,
    q=F(7, 6), sigma=F(1, 2), nu=F(1, 3), xi=F(1, 5),
    eta=(F(1, 4), F(2, 3)),
    alpha=(F(2), F(3)),
    beta=(F(2, 5), F(1, 7)),
    gamma=(F(1, 2), F(1)),
    f="exp(-t)*(2*x^3/(1+x^2)+(7+t)/(2*(5+cos(t)))+1)/11",
    p="2*exp(-t)/11",
    psi="u+1",
    published={
        "delta1": (-2.32863, 5e-5),
        "delta2": (float(F(-73, 105)), 1e-12),
        "delta3": (float(F(-827, 2520)), 1e-12),
        "theta": (4.67261, 1e-4),
        "M_threshold": (5.64742, 1e-3),
    },
)

EX3 = Preset(
    example_id=3,
    q=F(4, 3), sigma=F(4, 5), nu=F(2, 3), xi=F(3, 11),
    eta=(F(7, 8), F(8, 9)),
    alpha=(F(3, 7), F(11, 12)),
    beta=(F(1, 4), F(3, 2)),
    gamma=(F(1, 10), F(2, 5)),
    f="exp(-t^2)*ln(1+abs(x))/6",
    g="exp(-t^2)/6",
    published={
        "delta1": (-0.496989, 5e-5),
        "delta2": (float(F(-101, 96)), 1e-12),
        "delta3": (float(F(9079, 34560)), 1e-12),
        "phi": (0.809777, 1e-3),
    },
)

PRESETS = {1: EX1, 2: EX2, 3: EX3}


def get_preset(example_id: int) -> Preset:
    try:
        return PRESETS[int(example_id)]
    except (KeyError, ValueError):
        raise ValueError(f"unknown example id {example_id!r}; choose 1, 2 or 3") from None
