import math

import numpy as np
import pytest

from kondralab import (
    FESpace,
    InvalidParameterError,
    RadialPower,
    Weight,
    classify_sequence,
    hardy_constant,
    hardy_trichotomy,
    make_domain,
    rectangle_mesh,
)
from kondralab.meshing import Mesh

ORIGIN = Weight((RadialPower(1.0, (0.0, 0.0)),))


def test_strip_eigenvalue_matches_pi_squared():
    # rho = 1 on a thin strip of height 1/256 with Dirichlet ends: the
    # smallest (A, M) eigenvalue approximates the 1d value pi^2
    one = Weight((RadialPower(0.0, (0.0, -10.0)),))
    m = rectangle_mesh(256, 1, y1=1.0 / 256.0, dirichlet=("left", "right"))
    res = hardy_constant(FESpace(m, 1), one, tol=1e-10)
    assert res.value == pytest.approx(math.pi**2, rel=1e-3)
    assert res.residual <= 1e-10


def test_quotient_is_scale_invariant():
    # r^2 |grad u|^2 over u^2/r^... with rho = r: dilation x -> tau x maps
    # the discrete eigenproblem onto itself exactly
    d = make_domain("sector", omega=math.pi / 2)
    from kondralab import grade_mesh

    m = grade_mesh(d, H=0.5, L=6, sigma=0.5, n=8, mode="fixed-n")
    tau = 3.7
    scaled = Mesh(m.vertices * tau, m.triangles.copy(), list(m.boundary_edges),
                  dict(m.grading), dict(m.provenance))
    a = hardy_constant(FESpace(m, 1), ORIGIN, tol=1e-11)
    b = hardy_constant(FESpace(scaled, 1), ORIGIN, tol=1e-11)
    assert b.value == pytest.approx(a.value, rel=1e-10)


def test_classify_sequence_cases():
    assert classify_sequence([5.0, 4.99, 4.99]) == "HOLDS"
    assert classify_sequence([4.0, 2.0, 1.0]) == "FAILS"
    assert classify_sequence([4.0, 3.4, 3.0]) == "INCONCLUSIVE"
    assert classify_sequence([4.0, 4.0]) == "INCONCLUSIVE"


def test_sector_dirichlet_values_dominate_continuum_bound():
    # lam = 1 on the quarter-plane sector: discrete values decrease with
    # depth but stay above the slicing bound (pi/omega)^2
    d = make_domain("sector", omega=math.pi / 2)
    rep = hardy_trichotomy(d, [1.0], levels=4, L0=5)
    vals = rep.values(1.0)
    bound = (math.pi / (math.pi / 2)) ** 2
    assert all(v >= bound for v in vals)
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    assert rep.references[1.0] == pytest.approx(bound)


def test_trichotomy_levels_guard_and_inconclusive():
    d = make_domain("sector", omega=math.pi / 2)
    with pytest.raises(InvalidParameterError):
        hardy_trichotomy(d, [1.0], levels=2)
    # lam just above 1: ratios sit between the FAILS and HOLDS gates
    rep = hardy_trichotomy(d, [1.1], levels=3, L0=5)
    assert rep.classifications[1.1] == "INCONCLUSIVE"


def test_no_dirichlet_part_is_rejected():
    m = rectangle_mesh(4, 4, dirichlet=())
    with pytest.raises(InvalidParameterError):
        hardy_constant(FESpace(m, 1), ORIGIN)
