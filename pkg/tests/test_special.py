import math

import numpy as np
import pytest

import oracles
from evograph import derive, validate
from evograph import special
from evograph.errors import NoConvergence, QuadratureFailure, UnstableEvaluation
from evograph.recurrence import homogeneous_residuals
from evograph.special import KernelSpec, eval_u

REGIME_PARAMS = {
    "U1": (0.75, 0.3, 2),
    "U1-pure": (1, 1, 1),
    "U2": (0.6, 0.6, 2),
    "Uc": (0.6, 0.4, 2),
}


def constants_for(name):
    return derive(validate(*REGIME_PARAMS[name]))


def test_kernel_validation():
    with pytest.raises(ValueError):
        KernelSpec.u1(0.5, 0.3)
    with pytest.raises(ValueError):
        KernelSpec.u2(-2, 1.0)
    with pytest.raises(ValueError):
        KernelSpec.uc(0.0)
    with pytest.raises(ValueError):
        KernelSpec("U3")
    with pytest.raises(ValueError):
        eval_u(KernelSpec.uc(1), 0)


def test_kernel_for_regimes():
    assert special.kernel_for(constants_for("U1")).kind == "U1"
    k = special.kernel_for(constants_for("U2"))
    assert k.kind == "U2" and k.beta == pytest.approx(-2) and k.gamma == pytest.approx(0.75)
    k = special.kernel_for(constants_for("Uc"))
    assert k.kind == "Uc" and k.mu == pytest.approx(0.5)


def test_trivial_polynomial_integral():
    assert eval_u(KernelSpec.u1(2, 0), 1) == pytest.approx(1 / 3, rel=1e-12)


def test_uc_against_frozen_simpson():
    assert eval_u(KernelSpec.uc(0.5), 1) == pytest.approx(oracles.UC_MU05_K1_SIMPSON, rel=1e-10)


SPOT_GRID = (
    [("Uc", 0.5, None, k) for k in (1, 2, 3, 5, 8, 13, 21)]
    + [("U1", 2.0, 0.3, k) for k in (1, 2, 4, 9, 17, 33, 60)]
    + [("U2", -2.0, 0.75, k) for k in (1, 3, 7, 15, 30, 50)]
)


@pytest.mark.parametrize("kind, a, b, k", SPOT_GRID)
def test_simpson_spot_grid(kind, a, b, k):
    if kind == "Uc":
        kernel, fn = KernelSpec.uc(a), oracles.uc_integrand(a, k)
    elif kind == "U1":
        kernel, fn = KernelSpec.u1(a, b), oracles.u1_integrand(a, b, k)
    else:
        kernel, fn = KernelSpec.u2(a, b), oracles.u2_integrand(a, b, k)
    ref = oracles.simpson(fn, panels=10**6)
    assert eval_u(kernel, k) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("name", sorted(REGIME_PARAMS))
def test_homogeneous_recurrence_residual(name):
    c = constants_for(name)
    kernel = special.kernel_for(c)
    g = np.full(203, np.nan)
    g[1:] = special.eval_u_array(kernel, range(1, 203))
    r = homogeneous_residuals(g, c, 1, 200)
    assert r.max() <= 1e-8


@pytest.mark.parametrize("name", sorted(REGIME_PARAMS))
def test_boundary_identity(name):
    c = constants_for(name)
    kernel = special.kernel_for(c)
    lhs = 2 * c.A2 * eval_u(kernel, 2) + (c.A1 + c.B1) * eval_u(kernel, 1)
    rhs = special.boundary_value(kernel, c)
    assert lhs == pytest.approx(rhs, rel=1e-8)
    assert rhs != 0


def test_boundary_v0_values():
    assert KernelSpec.u1(2, 0.3).log_v0 == 0.0
    assert math.exp(KernelSpec.u2(-2, 0.75).log_v0) == pytest.approx(0.75**2)
    assert math.exp(KernelSpec.uc(0.5).log_v0) == pytest.approx(math.exp(-0.5))


@pytest.mark.parametrize(
    "kernel", [KernelSpec.u1(2, 0.3), KernelSpec.u1(1.5, 0.9), KernelSpec.u2(-2, 0.75),
               KernelSpec.u2(-8, 0.9375), KernelSpec.uc(0.5), KernelSpec.uc(3.0)],
)
def test_positive_and_decreasing(kernel):
    u = special.eval_u_array(kernel, range(1, 301))
    assert (u > 0).all()
    assert (np.diff(u) < 0).all()


@pytest.mark.parametrize("mu", [0.25, 0.5, 1.0, 4.0])
def test_uc_bounded_by_one_over_k(mu):
    ks = np.arange(1, 2001)
    u = special.eval_u_array(KernelSpec.uc(mu), ks)
    assert (u <= 1.0 / ks).all()


def test_uc_matches_expn_identity():
    for mu in (0.25, 0.5, 1.0):
        for k in (1, 2, 5, 10):
            assert eval_u(KernelSpec.uc(mu), k) == pytest.approx(oracles.uc_expn(mu, k), rel=1e-9)


def test_closed_form_examples():
    assert special.uc_closed_form(0.5, 1) == pytest.approx(eval_u(KernelSpec.uc(0.5), 1), rel=1e-12)
    e2, _ = special.expint2_quad(0.5)
    assert special.uc_closed_form(0.5, 1) == pytest.approx(e2, rel=1e-14)
    assert special.uc_closed_form(0.5, 5) == pytest.approx(eval_u(KernelSpec.uc(0.5), 5), rel=1e-8)
    with pytest.raises(UnstableEvaluation):
        special.uc_closed_form(0.5, 40)


@pytest.mark.parametrize("mu", [0.25, 0.5, 1.0])
def test_closed_form_grid(mu):
    for k in range(1, special.K_CLOSED_FORM + 1):
        cf = special.uc_closed_form(mu, k)
        assert cf == pytest.approx(eval_u(KernelSpec.uc(mu), k), rel=1e-8)


def test_expint2_against_scipy():
    from scipy.special import expn

    for mu in (0.1, 0.5, 2.0, 10.0):
        assert special.expint2_quad(mu)[0] == pytest.approx(expn(2, mu), rel=1e-12)


def test_uc_intermediate_growth_limits():
    ks = 64 * 2 ** np.arange(7)  # 64 .. 4096
    logs = np.array([special.log_u(KernelSpec.uc(0.5), int(k)) for k in ks])
    r1 = logs / (-ks)
    r2 = -np.log(ks) / logs
    assert (r1 > 0).all() and (np.diff(r1) < 0).all() and r1[-1] < 0.03
    assert (r2 > 0).all() and (np.diff(r2) < 0).all() and r2[-1] < 0.2


def test_u1_ratio_at_512():
    for beta, zeta in [(2.0, 0.3), (1.0 / 0.7, 0.25), (2.0, 0.0)]:
        kernel = KernelSpec.u1(beta, zeta)
        ratio = eval_u(kernel, 1024) / eval_u(kernel, 512)
        assert ratio == pytest.approx(2.0 ** -(1 + beta), rel=0.02)


@pytest.mark.parametrize(
    "kernel, exact",
    [(KernelSpec.u1(2, 0.3), oracles.d1_constant(2, 0.3)),
     (KernelSpec.u1(1.5, 0.5), oracles.d1_constant(1.5, 0.5)),
     (KernelSpec.u2(-2, 0.75), oracles.d2_constant(-2, 0.75)),
     (KernelSpec.u2(-3, 0.5), oracles.d2_constant(-3, 0.5))],
)
def test_asymptotic_constant(kernel, exact):
    res = special.estimate_asymptotic_constant(kernel, [64, 128, 256, 512, 1024])
    assert res.constant > 0
    assert res.constant == pytest.approx(exact, rel=2e-3)
    assert 0.7 <= res.convergence_rate <= 1.3


def test_u2_scaled_sequence_stabilises():
    kernel = KernelSpec.u2(-2, 0.75)
    ks = np.array([128, 256, 512, 1024])
    scaled = np.array([eval_u(kernel, int(k)) * 0.75 ** (-float(k)) * k**3 for k in ks])
    steps = np.abs(np.diff(scaled))
    assert (scaled > 0).all() and (np.diff(steps) < 0).all()


def test_asymptotic_constant_errors():
    with pytest.raises(ValueError):
        special.estimate_asymptotic_constant(KernelSpec.u1(2, 0.3), [8, 16, 32])
    with pytest.raises(ValueError):
        special.estimate_asymptotic_constant(KernelSpec.uc(0.5), [128, 256, 512])
    with pytest.raises(NoConvergence):
        special.estimate_asymptotic_constant(KernelSpec.u1(8, 0.94), [128, 256, 512])


def test_unattainable_tolerance():
    with pytest.raises(QuadratureFailure):
        eval_u(KernelSpec.uc(0.5), 7, tol=1e-20)


def test_deep_tail_does_not_underflow():
    lu = special.log_u(KernelSpec.u2(-2, 0.75), 5000)
    assert lu == pytest.approx(5000 * math.log(0.75) - 3 * math.log(5000) + math.log(18), abs=0.01)
