"""Aggregation of simulated degree histograms and comparison with theory."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import WindowTooSparse
from .params import Regime

MIN_POPULATED = 8


@dataclass(frozen=True)
class DegreeHistogram:
    """``counts[k]`` = number of vertices of degree ``k`` at time ``t``."""

    t: int
    counts: np.ndarray
    trial_id: int = 0

    @property
    def n_vertices(self) -> int:
        return int(self.counts.sum())

    @property
    def degree_sum(self) -> int:
        return int(np.dot(np.arange(len(self.counts)), self.counts))


@dataclass(frozen=True)
class TrajectorySample:
    t: int
    e: int
    v: int
    max_degree: int


# -- aggregation -----------------------------------------------------------


@dataclass
class HistogramStats:
    """Exact integer sufficient statistics of ``D_k(t)`` over trials.

    Integer sums make :meth:`merge` exactly associative and commutative, so
    any partition of trials over workers gives bit-identical profiles.
    """

    t: int
    n: int = 0
    total: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    total_sq: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    rows: list = field(default_factory=list)

    @staticmethod
    def _pad(a, n):
        if len(a) >= n:
            return a
        return np.concatenate([a, np.zeros(n - len(a), dtype=a.dtype)])

    def add(self, hist: DegreeHistogram):
        if hist.t != self.t:
            raise ValueError(f"histogram at t={hist.t} added to stats at t={self.t}")
        c = np.asarray(hist.counts, dtype=np.int64)
        n = max(len(self.total), len(c))
        self.total = self._pad(self.total, n) + self._pad(c, n)
        self.total_sq = self._pad(self.total_sq, n) + self._pad(c * c, n)
        self.n += 1
        self.rows.append((hist.trial_id, c))
        return self

    def merge(self, other: "HistogramStats") -> "HistogramStats":
        if other.t != self.t:
            raise ValueError("cannot merge statistics from different times")
        n = max(len(self.total), len(other.total))
        out = HistogramStats(self.t, self.n + other.n)
        out.total = self._pad(self.total, n) + self._pad(other.total, n)
        out.total_sq = self._pad(self.total_sq, n) + self._pad(other.total_sq, n)
        out.rows = self.rows + other.rows
        return out

    def profile(self) -> "Profile":
        n, t = self.n, self.t
        mean_counts = self.total / n
        if n > 1:
            # exact integer numerator avoids cancellation in the variance
            num = np.array(
                [int(s2) * n - int(s) ** 2 for s, s2 in zip(self.total, self.total_sq)],
                dtype=float,
            )
            var = np.maximum(num, 0.0) / (n * (n - 1))
            stderr = np.sqrt(var / n) / t
        else:
            stderr = np.full(len(mean_counts), np.nan)
        rows = sorted(self.rows, key=lambda r: r[0])
        K = len(self.total)
        per_trial = np.array([self._pad(c, K) for _, c in rows]) if rows else None
        return Profile(t, mean_counts / t, stderr, mean_counts, n, per_trial)


@dataclass(frozen=True)
class Profile:
    """Mean ``D_k(t)/t`` across trials with its standard error."""

    t: int
    mean: np.ndarray
    stderr: np.ndarray
    mean_counts: np.ndarray
    n_trials: int
    per_trial: np.ndarray | None = None

    @property
    def k(self) -> np.ndarray:
        return np.arange(len(self.mean))


def aggregate(histograms) -> Profile:
    """Pointwise mean and standard error of ``D_k(t)/t`` over trials."""
    histograms = list(histograms)
    if not histograms:
        raise ValueError("no histograms to aggregate")
    stats = HistogramStats(histograms[0].t)
    for h in histograms:
        stats.add(h)
    return stats.profile()


# -- tail fits ---------------------------------------------------------------


@dataclass(frozen=True)
class TailFit:
    """``estimate`` is the log-log slope (PowerLaw) or ``log gamma`` (Exponential)."""

    kind: Regime
    estimate: float | None
    stderr: float | None
    intercept: float | None
    ks: np.ndarray

    def as_dict(self):
        return {
            "kind": self.kind.value,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "k_min": int(self.ks[0]) if len(self.ks) else None,
            "k_max": int(self.ks[-1]) if len(self.ks) else None,
            "n_points": int(len(self.ks)),
        }


def _fit_window(mean, counts, k_window, min_count, m):
    lo, hi = k_window
    if m is not None:
        lo = max(lo, m + 2)
    hi = min(hi, len(mean) - 1)
    ks = np.arange(lo, hi + 1)
    keep = mean[ks] > 0
    if counts is not None:
        keep &= counts[ks] >= min_count
    return ks[keep]


def _design(kind, ks, beta):
    if kind is Regime.POWER_LAW:
        return np.log(ks), np.zeros(len(ks))
    if beta is None:
        raise ValueError("the exponential fit needs beta")
    return ks.astype(float), (beta - 1.0) * np.log(ks)


def _ols(x, y):
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = len(x) - 2
    if dof > 0:
        s2 = float(resid @ resid) / dof
        cov = s2 * np.linalg.inv(X.T @ X)
        se = math.sqrt(max(cov[1, 1], 0.0))
    else:
        se = float("nan")
    return float(coef[1]), float(coef[0]), se


def fit_tail(
    profile,
    regime_hint: Regime,
    k_window=(1, 10**9),
    beta: float | None = None,
    m: int | None = None,
    min_count: float = 10,
) -> TailFit:
    """Least-squares tail fit on a window of degrees.

    ``profile`` is a :class:`Profile` or a plain array ``d[k]``. For a
    :class:`Profile`, degrees whose mean count is below ``min_count`` are
    dropped and the standard error is a leave-one-trial-out jackknife; for a
    plain array the OLS standard error is reported. With ``m`` given the
    window starts no lower than ``m + 2``.
    """
    regime_hint = Regime(regime_hint)
    if isinstance(profile, Profile):
        mean, counts, per_trial, t = profile.mean, profile.mean_counts, profile.per_trial, profile.t
    else:
        mean, counts, per_trial, t = np.asarray(profile, dtype=float), None, None, None
    if regime_hint is Regime.CRITICAL:
        return TailFit(regime_hint, None, None, None, np.arange(0))
    if regime_hint is Regime.CONJECTURED:
        regime_hint = Regime.EXPONENTIAL

    ks = _fit_window(mean, counts, k_window, min_count, m)
    if len(ks) < MIN_POPULATED:
        raise WindowTooSparse(
            f"only {len(ks)} populated degrees in window {k_window} (need {MIN_POPULATED})"
        )
    x, offset = _design(regime_hint, ks, beta)
    slope, intercept, se = _ols(x, np.log(mean[ks]) - offset)

    if per_trial is not None and len(per_trial) >= 2:
        n = len(per_trial)
        total = per_trial[:, ks].sum(axis=0)
        loo = []
        for row in per_trial[:, ks]:
            sub = (total - row) / ((n - 1) * t)
            if (sub <= 0).any():
                continue
            loo.append(_ols(x, np.log(sub) - offset)[0])
        if len(loo) >= 2:
            loo = np.array(loo)
            nj = len(loo)
            se = math.sqrt((nj - 1) / nj * float(((loo - loo.mean()) ** 2).sum()))
    return TailFit(regime_hint, slope, se, intercept, ks)


def detect_regime(profile, k_window, beta_hint: float = -2.0, m=None) -> Regime:
    """Crude label from a joint fit ``log d = a + b log k + c k``.

    A curvature term ``c`` more than three standard errors below zero marks
    an exponential tail, otherwise the tail is called a power law.
    """
    mean = profile.mean if isinstance(profile, Profile) else np.asarray(profile, float)
    counts = profile.mean_counts if isinstance(profile, Profile) else None
    ks = _fit_window(mean, counts, k_window, 10, m)
    if len(ks) < MIN_POPULATED:
        raise WindowTooSparse(f"only {len(ks)} populated degrees in window {k_window}")
    X = np.column_stack([np.ones(len(ks)), np.log(ks), ks.astype(float)])
    y = np.log(mean[ks])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = max(len(ks) - 3, 1)
    cov = float(resid @ resid) / dof * np.linalg.inv(X.T @ X)
    c, se = coef[2], math.sqrt(max(cov[2, 2], 1e-300))
    return Regime.EXPONENTIAL if c < -3 * se else Regime.POWER_LAW


# -- concentration ---------------------------------------------------------


@dataclass(frozen=True)
class ConcentrationReport:
    t: int
    n_trials: int
    edge_band: float
    degree_bound: float
    frac_edges_in_band: float
    frac_degree_bounded: float
    edge_ratio: np.ndarray
    max_degree: np.ndarray

    def as_dict(self):
        return {
            "t": self.t,
            "n_trials": self.n_trials,
            "edge_band": self.edge_band,
            "degree_bound": self.degree_bound,
            "frac_edges_in_band": self.frac_edges_in_band,
            "frac_degree_bounded": self.frac_degree_bounded,
        }


def check_concentration(final_samples, constants, band: float = 0.05) -> ConcentrationReport:
    """Fraction of trials with ``|e_T/T - eta| <= band*eta`` and with
    ``max_degree_T <= T^rho_eps (log T)^3``.

    ``final_samples`` are :class:`TrajectorySample` objects taken at one
    common time ``T`` (one per trial).
    """
    samples = list(final_samples)
    ts = {s.t for s in samples}
    if len(ts) != 1:
        raise ValueError(f"samples must share one time, got {sorted(ts)}")
    T = ts.pop()
    eta = constants.eta
    ratio = np.array([s.e / T for s in samples])
    dmax = np.array([s.max_degree for s in samples])
    bound = T**constants.rho_eps * math.log(T) ** 3
    return ConcentrationReport(
        T,
        len(samples),
        band * eta,
        bound,
        float(np.mean(np.abs(ratio - eta) <= band * eta)),
        float(np.mean(dmax <= bound)),
        ratio,
        dmax,
    )


# -- theory comparison -------------------------------------------------------


def total_variation(p, q) -> float:
    """TV distance after renormalising both to unit mass."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p / p.sum() - q / q.sum()).sum())


@dataclass
class ComparisonReport:
    regime_declared: Regime
    regime_detected: Regime | None
    fit: TailFit | None
    k_report: int
    sup_norm: float | None = None
    tv: float | None = None
    max_z: float | None = None
    z_range: tuple[int, int] | None = None
    passed: bool | None = None
    tv_threshold: float = 0.05
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "regime_declared": self.regime_declared.value,
            "regime_detected": self.regime_detected.value if self.regime_detected else None,
            "fit": self.fit.as_dict() if self.fit else None,
            "k_report": self.k_report,
            "sup_norm": self.sup_norm,
            "tv": self.tv,
            "tv_threshold": self.tv_threshold,
            "max_z": self.max_z,
            "z_range": list(self.z_range) if self.z_range else None,
            "pass": self.passed,
            **self.extra,
        }


def compare(
    profile,
    theory,
    k_report: int,
    stderr=None,
    z_from: int = 1,
    tv_threshold: float = 0.05,
) -> ComparisonReport:
    """Distances between an empirical profile and ``theory.d`` on ``k <= k_report``.

    ``profile`` is a :class:`Profile` or an array. When standard errors are
    available the largest ``|empirical - theory| / stderr`` over
    ``z_from <= k <= k_report`` is reported as ``max_z``. The report passes
    iff the TV distance is at most ``tv_threshold``.
    """
    if isinstance(profile, Profile):
        mean = profile.mean
        stderr = profile.stderr if stderr is None else stderr
    else:
        mean = np.asarray(profile, dtype=float)
    K = k_report
    emp = np.zeros(K + 1)
    n = min(len(mean), K + 1)
    emp[:n] = mean[:n]
    th = np.asarray(theory.d[: K + 1], dtype=float)
    sup = float(np.max(np.abs(emp - th)))
    tv = total_variation(emp, th)
    max_z = None
    z_range = None
    if stderr is not None:
        se = np.full(K + 1, np.nan)
        se[:n] = np.asarray(stderr)[:n]
        ks = np.arange(z_from, K + 1)
        diff = np.abs(emp[ks] - th[ks])
        # zero stderr with zero difference is a perfect match
        z = np.where(se[ks] > 0, diff / np.where(se[ks] > 0, se[ks], 1.0),
                     np.where(diff > 0, np.inf, 0.0))
        max_z = float(np.nanmax(z))
        z_range = (int(z_from), int(K))
    return ComparisonReport(
        theory.regime, None, None, K, sup, tv, max_z, z_range, tv <= tv_threshold, tv_threshold
    )
