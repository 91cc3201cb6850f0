"""Model parameters, derived constants and regime classification.

The process is governed by three numbers: ``alpha`` (probability that a
step adds edges rather than deleting them), ``alpha1`` (probability that a
step adds a vertex) and ``m`` (edges touched per step). Everything else in
the package is a function of this triple.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real

from .errors import DegenerateEpsilon, OutOfRange

#: Tolerance for detecting the critical line alpha1 == alpha_c on floats.
CRITICAL_TOL = 1e-12

DEFAULT_EPSILON_FRACTION = 0.1


class Regime(str, enum.Enum):
    POWER_LAW = "PowerLaw"
    EXPONENTIAL = "Exponential"
    CRITICAL = "Critical"
    CONJECTURED = "Conjectured"

    def __str__(self):
        return self.value


def _as_number(x):
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, bool) or not isinstance(x, Real):
        raise TypeError(f"expected a real number, got {x!r}")
    return x


@dataclass(frozen=True)
class ModelParams:
    """Validated ``(alpha, alpha1, m)``.

    ``exact`` holds the rational values when the inputs were given as
    rationals (``Fraction``/``int``/``"2/5"``); regime tests then compare
    exactly instead of with :data:`CRITICAL_TOL`.
    """

    alpha: float
    alpha1: float
    m: int
    theorem_applicable: bool
    exact: tuple[Fraction, Fraction] | None = None

    @property
    def alpha_c(self) -> float:
        if self.exact is not None:
            return float(4 * self.exact[0] - 2)
        return 4.0 * self.alpha - 2.0

    def as_dict(self):
        return {"alpha": self.alpha, "alpha1": self.alpha1, "m": self.m}


def validate(alpha, alpha1, m) -> ModelParams:
    """Check ``1/2 < alpha <= 1``, ``0 < alpha1 <= alpha`` and ``m >= 1``.

    Parameters with ``alpha1 >= 2*alpha_c`` are accepted (they can be
    simulated) but flagged with ``theorem_applicable=False``.
    """
    a = _as_number(alpha)
    a1 = _as_number(alpha1)
    if isinstance(m, float) and m.is_integer():
        m = int(m)
    if isinstance(m, bool) or not isinstance(m, int):
        raise OutOfRange("m", "m is a positive integer", m)
    if not (a > Fraction(1, 2) and a <= 1):
        raise OutOfRange("alpha", "1/2 < alpha <= 1", alpha)
    if not (0 < a1 <= a):
        raise OutOfRange("alpha1", "0 < alpha1 <= alpha", alpha1)
    if m < 1:
        raise OutOfRange("m", "m >= 1", m)

    exact = None
    if isinstance(a, Rational) and isinstance(a1, Rational):
        exact = (Fraction(a), Fraction(a1))
        applicable = exact[1] < 2 * (4 * exact[0] - 2)
    else:
        a_c = 4.0 * float(a) - 2.0
        applicable = float(a1) < 2.0 * a_c and not math.isclose(
            float(a1), 2.0 * a_c, rel_tol=0.0, abs_tol=CRITICAL_TOL
        )
    return ModelParams(float(a), float(a1), m, bool(applicable), exact)


def _sign_vs(params: ModelParams, factor: int) -> int:
    """Sign of ``alpha1 - factor*alpha_c`` (0 on the line itself)."""
    if params.exact is not None:
        a, a1 = params.exact
        diff = a1 - factor * (4 * a - 2)
        return (diff > 0) - (diff < 0)
    diff = params.alpha1 - factor * (4.0 * params.alpha - 2.0)
    if abs(diff) <= CRITICAL_TOL:
        return 0
    return 1 if diff > 0 else -1


def classify(params: ModelParams) -> Regime:
    if _sign_vs(params, 2) >= 0:
        return Regime.CONJECTURED
    s = _sign_vs(params, 1)
    if s < 0:
        return Regime.POWER_LAW
    if s > 0:
        return Regime.EXPONENTIAL
    return Regime.CRITICAL


@dataclass(frozen=True)
class DerivedConstants:
    """Every constant derived from a :class:`ModelParams`.

    ``beta`` is ``None`` on the critical line; ``gamma`` and ``mu`` are
    ``inf`` when ``alpha == 1`` (no deletions, ``A == 0``).
    """

    alpha_c: float
    eta: float
    epsilon: float
    rho_eps: float
    beta: float | None
    gamma: float
    theta: float
    mu: float
    A0: float
    A1: float
    A2: float
    B0: float
    B1: float
    B2: float
    A: float
    B: float
    zeta: float
    regime: Regime

    @property
    def power_law_exponent(self) -> float | None:
        """``1 + beta`` in the power-law regime, else ``None``."""
        if self.regime is Regime.POWER_LAW:
            return 1.0 + self.beta
        return None

    def as_dict(self):
        return {
            "alpha_c": self.alpha_c,
            "eta": self.eta,
            "epsilon": self.epsilon,
            "rho_eps": self.rho_eps,
            "beta": self.beta,
            "gamma": _jsonable(self.gamma),
            "theta": self.theta,
            "mu": _jsonable(self.mu),
            "A0": self.A0,
            "A1": self.A1,
            "A2": self.A2,
            "B0": self.B0,
            "B1": self.B1,
            "B2": self.B2,
            "A": self.A,
            "B": self.B,
            "zeta": self.zeta,
            "regime": self.regime.value,
        }


def _jsonable(x):
    return None if math.isinf(x) else x


def default_epsilon_fraction(params: ModelParams) -> float:
    """0.1, unless that pushes ``rho_eps`` to 1 or beyond.

    ``rho_eps < 1`` needs ``epsilon/eta < alpha1/alpha_c``; for very small
    ``alpha1`` the fraction drops to half that limit.
    """
    limit = params.alpha1 / params.alpha_c
    if DEFAULT_EPSILON_FRACTION < limit:
        return DEFAULT_EPSILON_FRACTION
    return 0.5 * limit


def derive(params: ModelParams, epsilon_fraction: float | None = None) -> DerivedConstants:
    """All derived constants; ``epsilon_fraction=None`` picks
    :func:`default_epsilon_fraction`."""
    if epsilon_fraction is None:
        epsilon_fraction = default_epsilon_fraction(params)
    if not 0.0 < epsilon_fraction < 1.0:
        raise DegenerateEpsilon(f"epsilon_fraction={epsilon_fraction} not in (0, 1)")
    alpha, alpha1, m = params.alpha, params.alpha1, params.m
    regime = classify(params)

    alpha_c = params.alpha_c
    eta = alpha_c * m / 2.0
    epsilon = epsilon_fraction * eta
    rho = max(m * (alpha_c - alpha1) / (2.0 * (eta - epsilon)), 0.5)
    if rho >= 1.0:
        raise DegenerateEpsilon(
            f"rho_eps={rho:.6g} >= 1 for epsilon_fraction={epsilon_fraction}; "
            "choose a smaller epsilon"
        )

    beta = None if regime is Regime.CRITICAL else alpha_c / (alpha_c - alpha1)
    if alpha == 1.0:
        gamma = math.inf
        mu = math.inf
    else:
        gamma = 1.0 - (alpha1 - alpha_c) / (2.0 * (1.0 - alpha))
        mu = alpha_c / (2.0 * (1.0 - alpha))
    theta = (2.0 * alpha_c - alpha1) / (2.0 * alpha_c)

    two_alpha_m1 = 2.0 * alpha - 1.0
    A2 = (1.0 - alpha) / two_alpha_m1
    A1 = -(2.0 - alpha1) / (2.0 * two_alpha_m1)
    A0 = (2.0 * alpha - alpha1) / (2.0 * two_alpha_m1)
    A = A2
    B = (2.0 * alpha - alpha1) / alpha_c

    return DerivedConstants(
        alpha_c=alpha_c,
        eta=eta,
        epsilon=epsilon,
        rho_eps=rho,
        beta=beta,
        gamma=gamma,
        theta=theta,
        mu=mu,
        A0=A0,
        A1=A1,
        A2=A2,
        B0=0.0,
        B1=-1.0,
        B2=0.0,
        A=A,
        B=B,
        zeta=A / B,
        regime=regime,
    )
