import numpy as np
import pytest

from kondralab import (
    Constant,
    ExponentialCusp,
    MollifiedDistancePower,
    RadialPower,
    Weight,
    WeightDomainError,
    eval_log_gradient,
    eval_log_hessian,
    eval_weight,
)

PTS = np.array([[0.3, 0.2], [1.1, -0.4], [0.05, 0.01], [2.0, 1.5]])


def fd_grad(w, pts, h=1e-6):
    out = np.zeros_like(pts)
    for k in range(2):
        dp = np.zeros(2)
        dp[k] = h
        out[:, k] = (w.log_value(pts + dp) - w.log_value(pts - dp)) / (2 * h)
    return out


def test_radial_power_value():
    w = Weight((RadialPower(1.5, (0.0, 0.0)),))
    r = np.hypot(PTS[:, 0], PTS[:, 1])
    assert np.allclose(eval_weight(w, PTS), r**1.5, rtol=1e-14)


def test_log_gradient_matches_finite_differences():
    for w in (
        Weight((RadialPower(0.7, (0.1, -0.2)),)),
        Weight((ExponentialCusp((0.0, 0.0), 0.5),)),
        Weight((MollifiedDistancePower((0.0, 0.0), 1.3),)),
    ):
        g = eval_log_gradient(w, PTS)
        assert np.allclose(g, fd_grad(w, PTS), atol=1e-7)


def test_log_hessian_matches_finite_differences():
    w = Weight((RadialPower(1.2, (0.0, 0.0)),))
    H = eval_log_hessian(w, PTS)
    h = 1e-5
    for k in range(2):
        dp = np.zeros(2)
        dp[k] = h
        col = (eval_log_gradient(w, PTS + dp) - eval_log_gradient(w, PTS - dp)) / (2 * h)
        assert np.allclose(H[:, :, k], col, atol=1e-6)


def test_product_and_power():
    a = Weight((RadialPower(1.0, (0.0, 0.0)),))
    b = Weight((Constant(3.0),))
    prod = a * b
    assert np.allclose(eval_weight(prod, PTS), 3.0 * eval_weight(a, PTS), rtol=1e-14)
    sq = a.power(2.0)
    assert np.allclose(eval_weight(sq, PTS), eval_weight(a, PTS) ** 2, rtol=1e-14)


def test_power_scales_log_derivatives():
    w = Weight((RadialPower(0.8, (0.0, 0.0)),))
    s = -1.7
    assert np.allclose(eval_log_gradient(w.power(s), PTS),
                       s * eval_log_gradient(w, PTS), rtol=1e-13)


def test_exponential_cusp_closed_form():
    eps = 0.5
    w = Weight((ExponentialCusp((0.0, 0.0), eps),))
    r = np.hypot(PTS[:, 0], PTS[:, 1])
    assert np.allclose(w.log_value(PTS), -(eps**eps) * r**-eps, rtol=1e-13)


def test_mollified_power_is_one_far_away():
    w = Weight((MollifiedDistancePower((0.0, 0.0), 2.0, r0=0.25, r1=0.5),))
    far = np.array([[0.8, 0.0], [0.0, 3.0]])
    assert np.allclose(eval_weight(w, far), 1.0, rtol=1e-14)
    assert np.allclose(eval_log_gradient(w, far), 0.0, atol=1e-14)
    near = np.array([[0.1, 0.0]])
    assert np.isclose(eval_weight(w, near)[0], 0.1**2, rtol=1e-12)


def test_singular_point_rejected():
    w = Weight((RadialPower(1.0, (0.0, 0.0)),))
    with pytest.raises(WeightDomainError):
        w.log_value(np.array([[0.0, 0.0]]))
