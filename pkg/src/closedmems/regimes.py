"""Closed-form critical exponents and the (γ, p, N) regime classifier."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

__all__ = [
    "Regime",
    "ExtremalRegularity",
    "RegimeReport",
    "p_star",
    "in_I_gamma",
    "p_sharp",
    "q_sharp",
    "f0",
    "holder_alpha",
    "classify",
]


class Regime(str, enum.Enum):
    EXISTS_MINIMAL = "ExistsMinimal"
    NO_SOLUTION_SUPERCRITICAL = "NoSolutionSupercritical"
    NO_SOLUTION_GAMMA_LARGE = "NoSolutionGammaLarge"


class ExtremalRegularity(str, enum.Enum):
    CLASSICAL = "ExtremalClassical"
    HOLDER = "ExtremalHolder"
    UNKNOWN = "ExtremalUnknown"


def p_star(gamma: float) -> float:
    """Critical exponent ``2/γ - 1``."""
    return 2.0 / gamma - 1.0


def in_I_gamma(gamma: float, p: float) -> bool:
    """Existence range: ``(0, p*]`` for ``γ < 1``, ``(0, 1)`` for ``γ = 1``."""
    if not p > 0:
        return False
    if 0 < gamma < 1:
        return p <= p_star(gamma)
    if gamma == 1:
        return p < 1
    return False


def p_sharp(N: int) -> float:
    """Zero of ``f0(t) = N`` for ``N >= 7``; infinite below."""
    if N >= 7:
        return 1.0 / ((math.sqrt(N - 2) - 1.0) ** 2 - 1.0)
    return math.inf


def q_sharp(N: int) -> float:
    """Zero of ``f0(t) = N/2`` for ``N >= 13``; infinite below."""
    if N >= 13:
        return 1.0 / ((math.sqrt(N / 2 - 2) - 1.0) ** 2 - 1.0)
    return math.inf


def f0(t: float) -> float:
    """``3 + 1/t + 2 sqrt(1 + 1/t)``; decreasing on ``(0, ∞)`` with limit 5."""
    if not t > 0:
        raise ValueError(f"f0 is defined for t > 0, got {t!r}")
    if math.isinf(t):
        return 5.0
    return 3.0 + 1.0 / t + 2.0 * math.sqrt(1.0 + 1.0 / t)


def holder_alpha(p: float, N: int) -> float:
    """Hölder exponent ``2 - N/f0(p)`` of the extremal solution."""
    return 2.0 - N / f0(p)


@dataclass(frozen=True)
class RegimeReport:
    gamma: float
    p: float
    N: int
    p_star: float
    in_I_gamma: bool
    p_sharp: float
    q_sharp: float
    f0_p: float
    alpha: float | None
    regime: Regime
    extremal: ExtremalRegularity | None

    def to_text(self) -> str:
        def fmt(x):
            if x is None:
                return "none"
            if isinstance(x, bool):
                return str(x).lower()
            if isinstance(x, enum.Enum):
                return x.value
            if isinstance(x, float):
                return "inf" if math.isinf(x) else f"{x:.17g}"
            return str(x)

        rows = [
            ("gamma", self.gamma),
            ("p", self.p),
            ("N", self.N),
            ("p_star", self.p_star),
            ("in_I_gamma", self.in_I_gamma),
            ("p_sharp", self.p_sharp),
            ("q_sharp", self.q_sharp),
            ("f0_p", self.f0_p),
            ("alpha", self.alpha),
            ("regime", self.regime),
            ("extremal", self.extremal),
        ]
        return "".join(f"{k} = {fmt(v)}\n" for k, v in rows)


def classify(gamma: float, p: float, N: int) -> RegimeReport:
    """Assign the existence regime and, inside it, the extremal regularity.

    >>> r = classify(0.5, 1.0, 3)
    >>> r.regime.value, r.extremal.value, r.p_star
    ('ExistsMinimal', 'ExtremalClassical', 3.0)
    """
    if not gamma > 0 or not p > 0:
        raise ValueError("gamma and p must be positive")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    ps, psh, qsh = p_star(gamma), p_sharp(N), q_sharp(N)
    inside = in_I_gamma(gamma, p)

    alpha = None
    extremal = None
    if gamma > 1:
        regime = Regime.NO_SOLUTION_GAMMA_LARGE
    elif (gamma < 1 and p > ps) or (gamma == 1 and p >= 1):
        regime = Regime.NO_SOLUTION_SUPERCRITICAL
    else:
        regime = Regime.EXISTS_MINIMAL
        if p < psh:
            extremal = ExtremalRegularity.CLASSICAL
        elif N >= 7 and psh < ps and psh <= p < min(ps, qsh) and N / 2 < f0(p) <= N:
            # the closed forms put f0 in (N/2 - 1, N - 1] on this range, so the
            # exponent window N/2 < f0(p) <= N is intersected explicitly
            extremal = ExtremalRegularity.HOLDER
            alpha = holder_alpha(p, N)
            if not 0.0 < alpha <= 1.0 + 1e-12:
                raise AssertionError(f"Hölder exponent {alpha!r} outside (0, 1]")
            alpha = min(alpha, 1.0)
        else:
            extremal = ExtremalRegularity.UNKNOWN
    return RegimeReport(
        gamma=float(gamma),
        p=float(p),
        N=N,
        p_star=ps,
        in_I_gamma=inside,
        p_sharp=psh,
        q_sharp=qsh,
        f0_p=f0(p),
        alpha=alpha,
        regime=regime,
        extremal=extremal,
    )
