"""Limiting degree sequence ``d_k = lim E[D_k(t)]/t`` and a mean-field oracle.

The stationary profile solves, for ``k >= -1`` with ``d[-1] = 0``::

    A2 (k+2) d[k+2] + (A1 (k+1) + B1) d[k+1] + A0 k d[k] = -alpha1 [k == m-1]

It is assembled as ``d[k] = D g(k) + w[k]`` for ``k >= 1`` from the decaying
homogeneous solution ``g`` (see :mod:`evograph.special`) and a finitely
supported particular solution ``w``; ``D`` is fixed by the ``k = 0`` row and
``d[0]`` by the ``k = -1`` row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import special
from ._kernels import mean_field_evolve
from .errors import ConjecturedRegime, NegativeMass, TruncationTooSmall
from .params import DerivedConstants, ModelParams, Regime

KMAX_POWER_LAW = 2000
KMAX_GEOMETRIC = 500


def default_kmax(regime: Regime) -> int:
    return KMAX_POWER_LAW if regime is Regime.POWER_LAW else KMAX_GEOMETRIC


@dataclass(frozen=True)
class ParticularSolution:
    """``w[1..m-1]``; ``w[j]`` for ``j >= m`` is zero."""

    w: np.ndarray

    def __call__(self, k: int) -> float:
        if 1 <= k <= len(self.w):
            return float(self.w[k - 1])
        return 0.0


def build_particular(params: ModelParams, constants: DerivedConstants) -> ParticularSolution:
    m = params.m
    if m == 1:
        return ParticularSolution(np.zeros(0))
    A0, A1, A2, B1 = constants.A0, constants.A1, constants.A2, constants.B1
    w = np.zeros(m + 2)  # w[j] at index j, j = 0..m+1
    w[m - 1] = -params.alpha1 / ((m - 1) * A0)
    for j in range(m - 2, 0, -1):
        w[j] = -(A2 * (j + 2) * w[j + 2] + (A1 * (j + 1) + B1) * w[j + 1]) / (A0 * j)
    return ParticularSolution(w[1:m].copy())


@dataclass(frozen=True)
class TheoreticalSequence:
    """Constructed ``d_k`` for ``k = 0..kmax`` (``d[-1] = 0`` is implicit).

    ``g`` holds the homogeneous solution ``g(k)`` at index ``k`` (``g[0]`` is
    unused and set to NaN).
    """

    d: np.ndarray
    regime: Regime
    D_mix: float
    d0: float
    kmax: int
    g: np.ndarray
    particular: ParticularSolution
    kernel: special.KernelSpec
    params: ModelParams = field(repr=False)
    constants: DerivedConstants = field(repr=False)

    @property
    def k(self) -> np.ndarray:
        return np.arange(self.kmax + 1)

    @property
    def magnitude(self) -> np.ndarray:
        """``|D g(k)| + |w_k|``: size of the parts that ``d_k`` is summed from."""
        mag = np.abs(self.d).copy()
        mag[1:] = np.abs(self.D_mix * self.g[1:])
        mag[1 : len(self.particular.w) + 1] += np.abs(self.particular.w)
        return mag

    def residuals(self, k_lo: int = -1, k_hi: int | None = None) -> np.ndarray:
        """Relative residual of each recurrence row ``k_lo..k_hi``."""
        if k_hi is None:
            k_hi = self.kmax - 2
        return recurrence_residuals(
            self.d, self.params, self.constants, k_lo, k_hi, magnitude=self.magnitude
        )


def recurrence_residuals(d, params, constants, k_lo=-1, k_hi=None, magnitude=None):
    """Residual of each row, scaled by its largest participating term.

    ``d`` is indexed from ``k = 0``; ``d[-1]`` is taken as zero. Terms are
    sized with ``magnitude`` (default ``|d|``); pass the magnitudes of the
    summands when ``d_k`` itself is the result of a cancellation, otherwise a
    row whose entries are all rounding-level zeros reports residual 1.
    """
    d = np.asarray(d, dtype=float)
    if k_hi is None:
        k_hi = len(d) - 3
    if k_hi + 2 >= len(d):
        raise TruncationTooSmall(f"rows up to k={k_hi} need d up to index {k_hi + 2}")
    mag = np.abs(d) if magnitude is None else np.asarray(magnitude, dtype=float)
    ks = np.arange(k_lo, k_hi + 1)
    padded = np.concatenate(([0.0], d))  # padded[k + 1] = d[k]
    pmag = np.concatenate(([0.0], mag))
    c2 = constants.A2 * (ks + 2)
    c1 = constants.A1 * (ks + 1) + constants.B1
    c0 = constants.A0 * ks
    src = np.where(ks == params.m - 1, params.alpha1, 0.0)
    total = c2 * padded[ks + 3] + c1 * padded[ks + 2] + c0 * padded[ks + 1] + src
    scale = np.maximum.reduce([
        np.abs(c2) * pmag[ks + 3],
        np.abs(c1) * pmag[ks + 2],
        np.abs(c0) * pmag[ks + 1],
        src,
        np.full(len(ks), 1e-300),
    ])
    return np.abs(total) / scale


def homogeneous_residuals(g, constants, k_lo=1, k_hi=None):
    """Relative residual of the homogeneous rows for ``g`` indexed by ``k``."""
    g = np.asarray(g, dtype=float)
    if k_hi is None:
        k_hi = len(g) - 3
    ks = np.arange(k_lo, k_hi + 1)
    t2 = constants.A2 * (ks + 2) * g[ks + 2]
    t1 = (constants.A1 * (ks + 1) + constants.B1) * g[ks + 1]
    t0 = constants.A0 * ks * g[ks]
    scale = np.maximum.reduce([np.abs(t2), np.abs(t1), np.abs(t0), np.full(len(ks), 1e-300)])
    return np.abs(t2 + t1 + t0) / scale


def mixing_constants(g1, g2, w, params, constants):
    """``(D, d)`` from the ``k = 0`` and ``k = -1`` rows of the recurrence."""
    A1, A2, B1 = constants.A1, constants.A2, constants.B1
    denom = 2 * A2 * g2 + (A1 + B1) * g1
    if params.m > 1:
        D = -(2 * A2 * w(2) + (A1 + B1) * w(1)) / denom
    else:
        D = -params.alpha1 / denom
    d0 = -A2 * (D * g1 + w(1)) / B1
    return D, d0


def build_sequence(
    params: ModelParams,
    constants: DerivedConstants,
    kmax: int | None = None,
    tol: float = special.DEFAULT_TOL,
) -> TheoreticalSequence:
    regime = constants.regime
    if regime is Regime.CONJECTURED:
        raise ConjecturedRegime(
            "no theoretical sequence for alpha1 >= 2*alpha_c (conjectured region)"
        )
    if kmax is None:
        kmax = default_kmax(regime)
    if kmax < params.m + 2:
        raise TruncationTooSmall(f"kmax={kmax} < m+2={params.m + 2}")

    kernel = special.kernel_for(constants)
    g = np.full(kmax + 1, np.nan)
    g[1:] = special.eval_u_array(kernel, range(1, kmax + 1), tol)
    w = build_particular(params, constants)
    D, d0 = mixing_constants(g[1], g[2], w, params, constants)

    d = np.empty(kmax + 1)
    d[0] = d0
    d[1:] = D * g[1:]
    d[1 : len(w.w) + 1] += w.w
    return TheoreticalSequence(d, regime, D, d0, kmax, g, w, kernel, params, constants)


def asymptotic_prefactor(seq: TheoreticalSequence, k_grid=None) -> float:
    """``D1`` / ``D2`` of the homogeneous solution (1 on the critical line)."""
    if seq.regime is Regime.CRITICAL:
        return 1.0
    if k_grid is None:
        k_grid = [64, 128, 256, 512, 1024]
    return special.estimate_asymptotic_constant(seq.kernel, k_grid).constant


def leading_constant(seq: TheoreticalSequence, k_grid=None) -> float:
    """``C`` in the tail law ``C k^-(1+beta)``, ``C gamma^k k^(beta-1)`` or ``C uc(k)``."""
    return seq.D_mix * asymptotic_prefactor(seq, k_grid)


def tail_form(seq: TheoreticalSequence, C: float, ks) -> np.ndarray:
    """Leading-order tail law evaluated at ``ks`` (``ks >= 1``)."""
    ks = np.asarray(ks, dtype=float)
    c = seq.constants
    if seq.regime is Regime.POWER_LAW:
        return C * ks ** (-1.0 - c.beta)
    if seq.regime is Regime.EXPONENTIAL:
        return C * np.exp(ks * math.log(c.gamma) + (c.beta - 1.0) * np.log(ks))
    return C * seq.g[ks.astype(int)]


def mass_sums(seq: TheoreticalSequence) -> tuple[float, float]:
    """``(sum_k d_k, sum_k k d_k)`` including an estimate of the cut-off tail.

    The power-law tail past ``kmax`` follows ``d_k ~ c k^-(1+beta)`` with ``c``
    matched at ``kmax`` and is integrated from ``kmax + 1/2``; the other
    regimes use the geometric ratio of the last two entries.
    """
    d, K = seq.d, seq.kmax
    k = np.arange(K + 1)
    s0 = math.fsum(d)
    s1 = math.fsum(k * d)
    if seq.regime is Regime.POWER_LAW:
        b = seq.constants.beta
        c = d[K] * K ** (1.0 + b)
        x = K + 0.5
        s0 += c * x ** (-b) / b
        s1 += c * x ** (1.0 - b) / (b - 1.0)
    else:
        r = d[K] / d[K - 1]
        if 0 < r < 1:
            s0 += d[K] * r / (1 - r)
            # sum_{j>=1} (K+j) r^j = K r/(1-r) + r/(1-r)^2
            s1 += d[K] * (K * r / (1 - r) + r / (1 - r) ** 2)
    return s0, s1


# -- mean-field oracle -------------------------------------------------------


def cold_profile(params: ModelParams, t0: int, kmax: int) -> np.ndarray:
    """All expected mass at degree ``m``: ``D[m] = alpha1 t0``."""
    init = np.zeros(kmax + 1)
    init[params.m] = params.alpha1 * t0
    return init


def perturbed_profile(seq: TheoreticalSequence, t0: int, kmax: int, rng, spread=0.5):
    """``t0 d_k (1 + spread U_k)`` with ``U_k`` uniform on [0, 1)."""
    init = np.zeros(kmax + 1)
    n = min(kmax, seq.kmax) + 1
    init[:n] = t0 * seq.d[:n] * (1.0 + spread * rng.random(n))
    return np.maximum(init, 0.0)


def evolve_mean_field(
    params: ModelParams,
    constants: DerivedConstants,
    t0: int,
    T: int,
    kmax: int,
    init=None,
) -> np.ndarray:
    """Iterate the expected-count recurrence from ``t0`` to ``T``; return ``D(T)/T``.

    Each step applies, for ``0 <= k <= kmax`` (mass pushed past ``kmax`` is
    dropped)::

        D[k] += (A2 (k+1) D[k+1] + (A1 k + B1 + 1) D[k] + A0 (k-1) D[k-1]) / t
                + alpha1 [k == m]

    ``t0 >= |A1| kmax`` keeps the diagonal factor ``1 + A1 k / t`` nonnegative.
    """
    if kmax < params.m:
        raise TruncationTooSmall(f"kmax={kmax} < m={params.m}")
    need = abs(constants.A1) * kmax
    if t0 < need:
        raise ValueError(f"t0={t0} < |A1|*kmax={need:.1f}; mean-field step not positive")
    if T < t0:
        raise ValueError("T must be >= t0")
    if init is None:
        init = cold_profile(params, t0, kmax)
    D = np.array(init, dtype=float, copy=True)
    if D.shape != (kmax + 1,):
        raise ValueError(f"init must have length kmax+1={kmax + 1}")
    low = mean_field_evolve(
        D,
        float(constants.A0),
        float(constants.A1),
        float(constants.A2),
        float(constants.B0),
        float(constants.B1),
        float(constants.B2),
        float(params.alpha1),
        int(params.m),
        int(t0),
        int(T),
    )
    if low < -1e-9:
        raise NegativeMass(f"mean-field mass fell to {low:.3e}; increase t0")
    return D / T
