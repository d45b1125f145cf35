import math

import numpy as np
import pytest

from kondralab import (
    InvalidParameterError,
    TrigPoly,
    bounded_geometry_weight,
    distance_to_singular_set,
    eval_weight,
    make_domain,
)


def test_sector_curves_and_dirichlet_subsets():
    d = make_domain("sector", omega=math.pi / 2)
    names = [c.name for c in d.boundary]
    assert names == ["edge0", "arc", "edge1"]
    assert set(d.dirichlet_curves()) == set(names)
    mixed = make_domain("sector", omega=math.pi / 2, dirichlet=("edge0", "edge1"))
    assert set(mixed.dirichlet_curves()) == {"edge0", "edge1"}


def test_sector_requires_valid_opening():
    with pytest.raises(InvalidParameterError):
        make_domain("sector", omega=0.0)
    with pytest.raises(InvalidParameterError):
        make_domain("sector", omega=7.0)


def test_sample_points_stay_inside():
    d = make_domain("sector", omega=3 * math.pi / 2)
    pts = d.sample_points(32, 16, r_min=1e-4)
    r = np.hypot(pts[:, 0], pts[:, 1])
    th = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * math.pi)
    assert (r <= 1.0 + 1e-12).all() and (r >= 1e-4 - 1e-15).all()
    assert (th <= 3 * math.pi / 2 + 1e-12).all()


def test_random_interior_points_deterministic():
    d = make_domain("cusp", alpha=2.0)
    a = d.random_interior_points(50, np.random.default_rng(11))
    b = d.random_interior_points(50, np.random.default_rng(11))
    assert (a == b).all()
    assert (distance_to_singular_set(d, a) > 0).all()


def test_cusp_walls_contain_samples():
    d = make_domain("cusp", alpha=2.0, b=(-1.0, 1.0))
    pts = d.sample_points(64, 16, r_min=1e-3)
    x, y = pts[:, 0], pts[:, 1]
    assert (x > 0).all() and (x <= 1.0 + 1e-12).all()
    assert (np.abs(y) <= x**2 + 1e-12).all()


def test_trig_poly_derivatives():
    f = TrigPoly(0.5, (0.1,), (0.2, -0.05))
    t = np.linspace(-2.0, 1.0, 7)
    h = 1e-6
    assert np.allclose(f.deriv(t), (f(t + h) - f(t - h)) / (2 * h), atol=1e-8)
    h = 1e-4
    assert np.allclose(f.deriv2(t), (f(t + h) - 2 * f(t) + f(t - h)) / h**2, atol=1e-6)


def test_oscillating_profiles_must_not_cross():
    lo = TrigPoly(0.5)
    hi = TrigPoly(0.6, (), (0.3,))  # dips below lo at some t
    with pytest.raises(InvalidParameterError):
        make_domain("oscillating", profile0=lo, profile1=hi)


def test_circle_cusp_weight_oracle():
    # product of the distances to the six singular corners, by hand at (1, 0)
    d = make_domain("circle-cusp")
    w = bounded_geometry_weight(d, mollified=False)
    got = eval_weight(w, (1.0, 0.0))[0]
    assert got == pytest.approx(15.0 * math.sqrt(65.0), rel=1e-10)


def test_distance_to_singular_set_sector():
    d = make_domain("sector", omega=math.pi / 2)
    pts = np.array([[0.3, 0.4], [0.1, 0.0]])
    assert np.allclose(distance_to_singular_set(d, pts), [0.5, 0.1], rtol=1e-12)
