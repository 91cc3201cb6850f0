"""Laplace-integral solutions of the homogeneous degree recurrence.

Three kernels solve ``A2 (k+2) f[k+2] + (A1 (k+1) - 1) f[k+1] + A0 k f[k] = 0``
for ``k >= 1``, one per regime::

    u1(k) = int_0^1 t^(k-1) ((1-t)/(1-zeta t))^beta dt             beta > 1
    u2(k) = gamma^(k-beta) int_0^1 t^(k-1) ((1-t)/(1-gamma t))^(-beta) dt
                                                                    beta < -1
    uc(k) = int_0^1 t^(k-1) exp(-mu/(1-t)) dt                        mu > 0

All three concentrate within O(1/k) of ``t = 1`` for large ``k``, so the
integrals are evaluated after the substitution ``t = 1 - exp(-s)``, which
maps the peak to ``s ~ log k`` with O(1) width. The integrand is handled in
log space and rescaled by its peak so ``u2(k) ~ gamma^k`` does not underflow.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import NoConvergence, QuadratureFailure, UnstableEvaluation
from .params import DerivedConstants, Regime

DEFAULT_TOL = 1e-10
#: quad refuses relative tolerances below 50 eps; pieces run at tol/10
MIN_TOL = 500 * np.finfo(float).eps
#: Largest k for which the alternating closed form of uc is trusted.
K_CLOSED_FORM = 15


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    beta: float | None = None
    zeta: float | None = None
    gamma: float | None = None
    mu: float | None = None

    def __post_init__(self):
        if self.kind == "U1":
            if not (self.beta > 1 and 0 <= self.zeta < 1):
                raise ValueError(f"U1 needs beta > 1, 0 <= zeta < 1: {self}")
        elif self.kind == "U2":
            if not (self.beta < -1 and 0 < self.gamma < 1):
                raise ValueError(f"U2 needs beta < -1, 0 < gamma < 1: {self}")
        elif self.kind == "Uc":
            if not self.mu > 0:
                raise ValueError(f"Uc needs mu > 0: {self}")
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def u1(cls, beta, zeta):
        return cls("U1", beta=float(beta), zeta=float(zeta))

    @classmethod
    def u2(cls, beta, gamma):
        return cls("U2", beta=float(beta), gamma=float(gamma))

    @classmethod
    def uc(cls, mu):
        return cls("Uc", mu=float(mu))

    @property
    def log_v0(self) -> float:
        """``log v(0)`` for the weight ``v`` that this kernel integrates."""
        if self.kind == "U1":
            return 0.0
        if self.kind == "U2":
            return -self.beta * math.log(self.gamma)
        return -self.mu


def kernel_for(constants: DerivedConstants) -> KernelSpec:
    """The homogeneous solution matching the regime of ``constants``."""
    r = constants.regime
    if r is Regime.POWER_LAW:
        return KernelSpec.u1(constants.beta, constants.zeta)
    if r is Regime.EXPONENTIAL:
        return KernelSpec.u2(constants.beta, constants.gamma)
    if r is Regime.CRITICAL:
        return KernelSpec.uc(constants.mu)
    raise ValueError(f"no kernel in regime {r}")


def phi1(t, constants: DerivedConstants):
    return constants.A2 * t * t + constants.A1 * t + constants.A0


def phi0(t, constants: DerivedConstants):
    return constants.B2 * t * t + constants.B1 * t + constants.B0


def boundary_value(kernel: KernelSpec, constants: DerivedConstants) -> float:
    """``-phi1(0) v(0)``, the value of ``2 A2 u(2) + (A1 + B1) u(1)``."""
    return -phi1(0.0, constants) * math.exp(kernel.log_v0)


# -- integrand in s = -log(1 - t) -------------------------------------------


def _log1mexp(s):
    """log(1 - exp(-s)) for s > 0."""
    if s < 0.693:
        return math.log(-math.expm1(-s))
    return math.log1p(-math.exp(-s))


def _make_log_integrand(kernel: KernelSpec, k: int):
    km1 = k - 1
    if kernel.kind == "Uc":
        mu = kernel.mu

        def f(s):
            if km1 == 0:
                return -mu * math.exp(s) - s
            if s <= 0.0:
                return -math.inf
            return km1 * _log1mexp(s) - mu * math.exp(s) - s

        return f

    if kernel.kind == "U1":
        p, z = kernel.beta, kernel.zeta
    else:
        p, z = -kernel.beta, kernel.gamma
    c = p + 1.0

    def f(s):
        if s <= 0.0:
            if km1 > 0:
                return -math.inf
            s = 0.0
            head = 0.0
        else:
            head = km1 * _log1mexp(s) if km1 else 0.0
        return head - c * s - p * math.log1p(z * math.expm1(-s))

    return f


def _peak(kernel: KernelSpec, k: int, f) -> float:
    if k == 1:
        return 0.0
    if kernel.kind == "Uc":
        mu = kernel.mu

        def g(s):
            return (k - 1) / math.expm1(s) - 1.0 - mu * math.exp(s)

        hi = 1.0
        while g(hi) > 0:
            hi *= 2.0
        return optimize.brentq(g, 1e-300, hi, xtol=1e-14)
    if kernel.kind == "U1":
        p, z = kernel.beta, kernel.zeta
    else:
        p, z = -kernel.beta, kernel.gamma
    c = p + 1.0

    # f'(s): +inf at 0+, -c < 0 at infinity
    def g(s):
        x = math.exp(-s)
        return (k - 1) / math.expm1(s) - c + p * z * x / (1.0 - z + z * x)

    hi = 1.0
    while g(hi) > 0:
        hi *= 2.0
    return optimize.brentq(g, 1e-300, hi, xtol=1e-14)


def _width(f, s0: float) -> float:
    h = 1e-3 * max(s0, 1.0)
    if s0 > h:
        curv = (f(s0 + h) - 2 * f(s0) + f(s0 - h)) / (h * h)
    else:
        curv = (f(s0 + 2 * h) - 2 * f(s0 + h) + f(s0)) / (h * h)
    if not np.isfinite(curv) or curv >= 0:
        return 1.0
    return min(1.0, 1.0 / math.sqrt(-curv))


def _integrate_scaled(f, s0: float, rtol: float):
    """Integrate exp(f(s) - f(s0)) over (0, inf) outward from ``s0``.

    Segments double in length away from the peak until a segment adds less
    than machine precision relative to the running total.
    """
    fmax = f(s0)
    if not np.isfinite(fmax):
        raise QuadratureFailure(f"integrand not finite at peak s={s0}")

    def g(s):
        v = f(s)
        return math.exp(v - fmax) if v > -math.inf else 0.0

    h = _width(f, s0)
    parts, errs = [], []

    def piece(a, b):
        val, err = integrate.quad(g, a, b, epsabs=0.0, epsrel=rtol, limit=200)
        parts.append(val)
        errs.append(err)
        return val

    total = 0.0
    # right of the peak
    a, step = s0, h
    for _ in range(200):
        val = piece(a, a + step)
        total += val
        a += step
        step *= 2.0
        if val <= 1e-17 * total:
            break
    else:
        raise QuadratureFailure("right tail did not terminate")
    # left of the peak, down to s = 0
    b, step = s0, h
    while b > 0.0:
        a = max(0.0, b - step)
        val = piece(a, b)
        total += val
        b = a
        step *= 2.0
        if val <= 1e-17 * total:
            break
    total = math.fsum(parts)
    return total, math.fsum(errs), fmax


@functools.lru_cache(maxsize=65536)
def _log_u(kernel: KernelSpec, k: int, tol: float) -> float:
    f = _make_log_integrand(kernel, k)
    s0 = _peak(kernel, k, f)
    val, err, fmax = _integrate_scaled(f, s0, rtol=0.1 * tol)
    if not val > 0 or err > tol * val:
        raise QuadratureFailure(
            f"{kernel.kind}(k={k}): estimate {val:.3e} with error {err:.1e} "
            f"does not meet rtol={tol:.0e}"
        )
    out = fmax + math.log(val)
    if kernel.kind == "U2":
        out += (k - kernel.beta) * math.log(kernel.gamma)
    return out


def log_u(kernel: KernelSpec, k: int, tol: float = DEFAULT_TOL) -> float:
    """Natural log of :func:`eval_u`; finite even when ``u`` underflows."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not tol >= MIN_TOL:
        raise QuadratureFailure(f"rtol={tol:.0e} is below the attainable {MIN_TOL:.1e}")
    return _log_u(kernel, int(k), float(tol))


def eval_u(kernel: KernelSpec, k: int, tol: float = DEFAULT_TOL) -> float:
    """Evaluate ``u(k)`` for ``kernel`` to relative tolerance ``tol``."""
    return math.exp(log_u(kernel, k, tol))


def eval_u_array(kernel: KernelSpec, ks, tol: float = DEFAULT_TOL) -> np.ndarray:
    return np.array([eval_u(kernel, int(k), tol) for k in ks])


# -- closed form of uc ----------------------------------------------------


def expint2_quad(mu: float, tol: float = 1e-13) -> tuple[float, float]:
    """``int_1^inf t^-2 exp(-mu t) dt`` by quadrature on doubling intervals.

    Returns ``(value, error_estimate)``.
    """
    parts, errs = [], []
    a, width = 1.0, 1.0
    while True:
        val, err = integrate.quad(
            lambda t: math.exp(-mu * t) / (t * t), a, a + width, epsabs=0.0, epsrel=tol
        )
        parts.append(val)
        errs.append(err)
        a += width
        width *= 2.0
        if val <= 1e-18 * math.fsum(parts):
            return math.fsum(parts), math.fsum(errs)


def uc_closed_form(mu: float, k: int, stability_budget: float = 1e-8) -> float:
    """Finite-sum representation of ``uc(k)``.

    ``uc(k) = P_k(mu) e^-mu + Q_k(mu) E2(mu)`` where ``E2`` is the integral
    in :func:`expint2_quad`::

        P_k = sum_{i=0}^{k-2} sum_{l=0}^{k-2-i} C(k-1,i) (k-i-l-1)!/(k-i)!
                                                  (-1)^(k-i-l-1) mu^l
        Q_k = sum_{i=0}^{k-1} C(k-1,i) mu^(k-i-1)/(k-i)!

    The terms alternate in sign and their magnitude grows much faster than
    ``uc(k)``, so each evaluation carries a rounding-error bound; when the
    bound exceeds ``stability_budget`` relative to the result,
    :class:`UnstableEvaluation` is raised. In double precision this happens
    a little past ``k = 15``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    eps = np.finfo(float).eps
    p_terms = []
    for i in range(k - 1):
        binom = math.comb(k - 1, i)
        fi = math.factorial(k - i)
        for l in range(k - 1 - i):
            sign = -1.0 if (k - i - l - 1) % 2 else 1.0
            p_terms.append(
                sign * binom * math.factorial(k - i - l - 1) / fi * mu**l
            )
    q_terms = [
        math.comb(k - 1, i) * mu ** (k - i - 1) / math.factorial(k - i)
        for i in range(k)
    ]
    e2, _ = expint2_quad(mu)
    emu = math.exp(-mu)
    P = math.fsum(p_terms)
    Q = math.fsum(q_terms)
    result = P * emu + Q * e2

    # fsum leaves only the per-term roundings (a few ulps each, independent)
    # and the final cancellation between the two brackets
    term_err = 3 * eps * (
        math.sqrt(math.fsum(t * t for t in p_terms)) * emu
        + math.sqrt(math.fsum(t * t for t in q_terms)) * e2
    )
    err = term_err + 2 * eps * (abs(P) * emu + Q * e2)
    if not result > 0 or err > stability_budget * abs(result):
        raise UnstableEvaluation(
            f"uc closed form at k={k}, mu={mu}: error bound {err:.2e} vs "
            f"value {result:.3e} exceeds budget {stability_budget:.0e}"
        )
    return result


# -- asymptotics ------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticConstant:
    constant: float
    convergence_rate: float
    ks: np.ndarray
    scaled: np.ndarray
    extrapolated: np.ndarray


def _scaled_values(kernel, ks, tol):
    ks = np.asarray(ks, dtype=float)
    logs = np.array([log_u(kernel, int(k), tol) for k in ks])
    if kernel.kind == "U1":
        return np.exp(logs + (1.0 + kernel.beta) * np.log(ks))
    return np.exp(logs - ks * math.log(kernel.gamma) + (1.0 - kernel.beta) * np.log(ks))


def estimate_asymptotic_constant(
    kernel: KernelSpec, k_grid, tol: float = DEFAULT_TOL, rel_tol: float = 0.01
) -> AsymptoticConstant:
    """Prefactor of ``u1 ~ D1 k^-(1+beta)`` or ``u2 ~ D2 gamma^k k^(beta-1)``.

    The scaled sequence ``c(k) = D (1 + a/k + ...)`` is Richardson-extrapolated
    between neighbouring grid points assuming an O(1/k) correction. The
    reported rate is the fitted exponent ``p`` in ``|c(k) - D| ~ k^-p``.
    """
    if kernel.kind not in ("U1", "U2"):
        raise ValueError("asymptotic constants are defined for U1 and U2 only")
    ks = np.asarray(sorted(set(int(k) for k in k_grid)), dtype=float)
    if len(ks) < 3 or ks[-1] < 512:
        raise ValueError("k_grid needs >= 3 points reaching k >= 512")
    c = _scaled_values(kernel, ks, tol)
    rich = (ks[1:] * c[1:] - ks[:-1] * c[:-1]) / (ks[1:] - ks[:-1])
    constant = float(rich[-1])
    if abs(rich[-1] - rich[-2]) > rel_tol * abs(constant):
        raise NoConvergence(
            f"Richardson estimates {rich[-2]:.6g}, {rich[-1]:.6g} differ by more "
            f"than {rel_tol:.0%}"
        )
    dev = np.abs(c - constant)
    mask = dev > 0
    slope = np.polyfit(np.log(ks[mask]), np.log(dev[mask]), 1)[0]
    return AsymptoticConstant(constant, float(-slope), ks, c, rich)
