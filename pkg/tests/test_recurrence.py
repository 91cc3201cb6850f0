import math

import numpy as np
import pytest

from evograph import derive, validate
from evograph.errors import ConjecturedRegime, NegativeMass, TruncationTooSmall
from evograph.recurrence import (
    build_particular,
    build_sequence,
    cold_profile,
    evolve_mean_field,
    leading_constant,
    mass_sums,
    perturbed_profile,
    recurrence_residuals,
    tail_form,
)

CONFIGS = {
    "power": (0.75, 0.3),
    "pure": (1, 1),
    "exponential": (0.6, 0.6),
    "critical": (0.6, 0.4),
}


def setup(a, a1, m):
    p = validate(a, a1, m)
    return p, derive(p)


_cache = {}


def sequence(a, a1, m, kmax=None):
    key = (a, a1, m, kmax)
    if key not in _cache:
        p, c = setup(a, a1, m)
        _cache[key] = build_sequence(p, c, kmax)
    return _cache[key]


def test_particular_examples():
    p, c = setup(0.75, 0.5, 1)
    assert len(build_particular(p, c).w) == 0

    p, c = setup(1, 1, 2)
    w = build_particular(p, c)
    assert c.A0 == pytest.approx(0.5)
    assert w.w.tolist() == pytest.approx([-2.0])
    assert w(2) == 0 and w(0) == 0

    p, c = setup(0.75, 0.5, 3)
    w = build_particular(p, c)
    assert w(2) == pytest.approx(-0.5 / (2 * c.A0))
    # the j = 1 row with w_3 = 0
    terms = [c.A2 * 3 * w(3), (c.A1 * 2 + c.B1) * w(2), c.A0 * 1 * w(1)]
    assert abs(sum(terms)) <= 1e-12 * max(abs(t) for t in terms)


@pytest.mark.parametrize("name", sorted(CONFIGS))
@pytest.mark.parametrize("m", [1, 2, 5])
def test_residuals_all_rows(name, m):
    seq = sequence(*CONFIGS[name], m, kmax=1000)
    r = seq.residuals(-1, 998)
    assert r.max() <= 1e-8


def test_boundary_rows():
    seq = sequence(0.6, 0.6, 2)
    c = seq.constants
    # k = -1 row: A2 d1 + B1 d0 = 0, i.e. d0 = A2 d1
    assert seq.d[0] == pytest.approx(c.A2 * seq.d[1], rel=1e-14)


def test_pure_attachment_cubic_tail():
    d = sequence(1, 1, 1).d
    for k in (100, 500, 1500):
        ratio = (d[k] / d[k + 1]) / ((k + 1) / k) ** 3
        assert ratio == pytest.approx(1.0, abs=3.0 / k)
    # exact case: d_k = 4 / (k (k+1) (k+2))
    k = np.arange(1, 50)
    assert d[1:50] == pytest.approx(4.0 / (k * (k + 1) * (k + 2)), rel=1e-9)


@pytest.mark.parametrize("name", sorted(CONFIGS))
@pytest.mark.parametrize("m", [1, 2, 5])
def test_positivity_and_k_bound(name, m):
    seq = sequence(*CONFIGS[name], m, kmax=1000)
    d, k = seq.d, seq.k
    assert (d[m:] > 0).all()
    kd = k * np.abs(d)
    assert np.isfinite(kd).all()
    # k |d_k| does not grow along the tail
    assert kd[500:].max() <= kd[: 500].max()


def _assert_one_over_k(ratio, ks):
    """``ratio -> 1`` with a gap shrinking like ``1/k``."""
    gap = np.abs(ratio - 1)
    assert (np.diff(gap) < 0).all()
    kgap = ks * gap
    assert kgap.max() <= 1.25 * kgap.min()


def test_leading_constants():
    seq = sequence(0.6, 0.4, 2)
    assert leading_constant(seq) == seq.D_mix

    seq = sequence(0.75, 0.3, 2)
    b = seq.constants.beta
    C1 = leading_constant(seq)
    ks = np.array([100, 300, 900, 1900])
    _assert_one_over_k(seq.d[ks] * ks ** (1 + b) / C1, ks)

    seq = sequence(0.6, 0.6, 2)
    c = seq.constants
    C2 = leading_constant(seq)
    ks = np.array([100, 200, 300, 450])
    est = seq.d[ks] * c.gamma ** (-ks.astype(float)) * ks ** (1 - c.beta)
    _assert_one_over_k(est / C2, ks)
    assert tail_form(seq, C2, ks) == pytest.approx(C2 * c.gamma**ks * ks ** (c.beta - 1.0))


@pytest.mark.parametrize("name", ["power", "exponential", "critical"])
def test_mixing_constant_is_unique(name):
    seq = sequence(*CONFIGS[name], 2)
    p, c = seq.params, seq.constants
    w = seq.particular
    for factor in (0.99, 1.01):
        D = seq.D_mix * factor
        d = np.empty_like(seq.d)
        d[1:] = D * seq.g[1:]
        d[1 : len(w.w) + 1] += w.w
        d[0] = -c.A2 * (D * seq.g[1] + w(1)) / c.B1
        r = recurrence_residuals(d, p, c, -1, 5)
        assert r.max() > 1e-4


@pytest.mark.parametrize("name", sorted(CONFIGS))
def test_matches_linear_solve(name):
    """Row-formula construction equals a direct solve of the truncated system."""
    K = 300
    seq = sequence(*CONFIGS[name], 3)
    p, c = seq.params, seq.constants
    M = np.zeros((K + 1, K + 1))
    rhs = np.zeros(K + 1)
    for row, k in enumerate(range(-1, K - 1)):
        if k + 2 <= K:
            M[row, k + 2] += c.A2 * (k + 2)
        M[row, k + 1] += c.A1 * (k + 1) + c.B1
        if k >= 0:
            M[row, k] += c.A0 * k
        if k == p.m - 1:
            rhs[row] = -p.alpha1
    M[K, K] = 1.0
    rhs[K] = seq.d[K]
    d = np.linalg.solve(M, rhs)
    assert d[:100] == pytest.approx(seq.d[:100], rel=1e-8, abs=1e-15)


@pytest.mark.parametrize("name", sorted(CONFIGS))
def test_mass_sums(name):
    a, a1 = CONFIGS[name]
    seq = sequence(a, a1, 2)
    s0, s1 = mass_sums(seq)
    eta = seq.constants.eta
    assert s0 == pytest.approx(a1, rel=0.01)
    assert s1 == pytest.approx(2 * eta, rel=0.02)


def test_build_errors():
    p, c = setup(0.55, 0.55, 2)
    with pytest.raises(ConjecturedRegime):
        build_sequence(p, c)
    p, c = setup(0.6, 0.6, 3)
    with pytest.raises(TruncationTooSmall):
        build_sequence(p, c, kmax=4)


def test_mean_field_pure_attachment():
    p, c = setup(1, 1, 1)
    seq = sequence(1, 1, 1)
    K = 400
    # a cold start carries edge mass m*alpha1*t0 instead of 2*eta*t0, and the
    # gap decays only like (t0/T)^(1 - 1/beta); start it as early as allowed
    cold_t0 = int(math.ceil(abs(c.A1) * K))
    warm_t0 = 10 * K
    runs = [
        (cold_t0, None),
        (warm_t0, perturbed_profile(seq, warm_t0, K, np.random.default_rng(0))),
    ]
    for t0, init in runs:
        dh = evolve_mean_field(p, c, t0, 10**6, K, init=init)
        err = np.abs(dh[:51] - seq.d[:51]).max()
        assert err <= 0.01 * seq.d.max()
        assert dh.sum() == pytest.approx(1.0, rel=0.01)
        assert (np.arange(K + 1) * dh).sum() == pytest.approx(2 * c.eta, rel=0.02)


def test_mean_field_first_moment_transient():
    p, c = setup(1, 1, 1)
    K, T = 400, 10**6
    S = [(np.arange(K + 1) * evolve_mean_field(p, c, t0, T, K)).sum() for t0 in (200, 4000)]
    # S/T -> 2 eta - (2 eta - m alpha1) (t0/T)^(1/2) at beta = 2
    for t0, s in zip((200, 4000), S):
        assert s == pytest.approx(2 - math.sqrt(t0 / T), abs=5e-3)


def test_mean_field_guards():
    p, c = setup(0.6, 0.6, 2)
    K = 100
    with pytest.raises(ValueError):
        evolve_mean_field(p, c, int(abs(c.A1) * K) - 1, 1000, K)
    with pytest.raises(TruncationTooSmall):
        evolve_mean_field(p, c, 100, 1000, 1)
    bad = cold_profile(p, 1000, K)
    bad[5] = -1.0
    with pytest.raises(NegativeMass):
        evolve_mean_field(p, c, 1000, 1100, K, init=bad)
    assert cold_profile(p, 1000, K).sum() == pytest.approx(600.0)
