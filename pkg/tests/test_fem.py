import math

import numpy as np
import pytest

from kondralab import (
    FESpace,
    InvalidParameterError,
    apply_bc,
    assemble,
    grade_mesh,
    interpolate,
    load_csr,
    make_domain,
    manufactured_problem,
    rectangle_mesh,
    save_csr,
    solve,
    triangle_rule,
    write_function_csv,
)


@pytest.mark.parametrize("degree", [4, 6])
def test_triangle_rule_monomial_exactness(degree):
    bary, wq = triangle_rule(degree)
    assert wq.sum() == pytest.approx(1.0, abs=1e-14)
    # reference triangle (0,0)-(1,0)-(0,1): x = l1, y = l2
    x, y = bary[:, 1], bary[:, 2]
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            got = 0.5 * np.sum(wq * x**a * y**b)
            exact = math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)
            assert got == pytest.approx(exact, abs=1e-15)


def test_triangle_rule_unknown_degree():
    with pytest.raises(InvalidParameterError):
        triangle_rule(3)


def test_p1_stiffness_is_five_point_stencil():
    # criss-cross P1 on the unit square reproduces the classic stencil at
    # the interior vertex; the SW/NE diagonal couplings cancel exactly
    m = rectangle_mesh(2, 2)
    sys = assemble(FESpace(m, 1))
    row = sys.A[4].toarray().ravel()
    want = np.array([0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0])
    assert np.allclose(row, want, atol=1e-13)
    assert sys.M.sum() == pytest.approx(1.0, abs=1e-13)


def test_affine_exact_with_mixed_bc():
    m = rectangle_mesh(8, 6, dirichlet=("left", "bottom"))
    prob = manufactured_problem(None, "affine")
    space = FESpace(m, 1)
    sys = assemble(space, a=prob.a, rhs=prob.rhs)
    con = apply_bc(sys, dirichlet=prob.u, neumann=prob.flux)
    u, info = solve(con)
    err = np.abs(u.coeffs - prob.u(space.dof_coords)).max()
    assert err <= 1e-10
    assert info.method == "cholesky" and info.residual <= 1e-12


def test_p2_exact_for_quadratic_solution():
    m = rectangle_mesh(5, 4)
    space = FESpace(m, 2)
    u_exact = lambda p: p[:, 0] ** 2 + 0.5 * p[:, 1] ** 2 - p[:, 0] * p[:, 1]
    sys = assemble(space, rhs=lambda p: np.full(len(p), -3.0))
    con = apply_bc(sys, dirichlet=u_exact)
    u, _ = solve(con)
    assert np.abs(u.coeffs - u_exact(space.dof_coords)).max() <= 1e-10


def _fd_check(prob, pts, h=1e-5):
    def u1(p):
        return prob.u(p)

    lap = (u1(pts + [h, 0]) + u1(pts - [h, 0]) + u1(pts + [0, h])
           + u1(pts - [0, h]) - 4.0 * u1(pts)) / h**2
    rhs_dev = np.abs(-lap + prob.c * u1(pts) - prob.rhs(pts)).max()
    gx = (u1(pts + [h, 0]) - u1(pts - [h, 0])) / (2 * h)
    gy = (u1(pts + [0, h]) - u1(pts - [0, h])) / (2 * h)
    grad_dev = np.abs(np.column_stack([gx, gy]) - prob.grad_u(pts)).max()
    return rhs_dev, grad_dev


def test_manufactured_data_match_finite_differences():
    sector = make_domain("sector", omega=3 * math.pi / 2)
    cusp = make_domain("cusp", alpha=2.0)
    cases = [
        (manufactured_problem(sector, "corner"),
         np.array([[0.3, 0.4], [-0.5, 0.2], [0.1, -0.6]])),
        (manufactured_problem(None, "smooth"),
         np.array([[0.3, 0.4], [0.7, 0.2], [0.55, 0.85]])),
        (manufactured_problem(cusp, "cusp-chart"),
         np.array([[0.5, 0.1], [0.8, -0.3], [0.3, 0.05]])),
    ]
    for prob, pts in cases:
        rhs_dev, grad_dev = _fd_check(prob, pts)
        assert rhs_dev <= 2e-5, prob.name
        assert grad_dev <= 1e-7, prob.name


def test_manufactured_problem_guards():
    with pytest.raises(InvalidParameterError):
        manufactured_problem(make_domain("cusp", alpha=2.0), "corner")
    with pytest.raises(InvalidParameterError):
        manufactured_problem(None, "no-such-solution")


def test_cg_agrees_with_cholesky():
    d = make_domain("sector", omega=3 * math.pi / 2)
    m = grade_mesh(d, H=0.3, kappa=0.5, L=7)
    prob = manufactured_problem(d, "corner")
    con = apply_bc(assemble(FESpace(m, 1), rhs=prob.rhs), dirichlet=prob.u)
    u_cg, info_cg = solve(con, method="cg", tol=1e-12)
    u_ch, _ = solve(con, method="cholesky")
    scale = np.abs(u_ch.coeffs).max()
    assert np.abs(u_cg.coeffs - u_ch.coeffs).max() <= 1e-8 * scale
    assert info_cg.method == "cg" and info_cg.iterations > 1
    assert info_cg.residual <= 1e-12


def test_assembly_is_worker_independent():
    m = rectangle_mesh(160, 120)  # 38400 tris, two assembly chunks
    space = FESpace(m, 1)
    rhs = lambda p: np.sin(p[:, 0]) + p[:, 1]
    s1 = assemble(space, c=1.0, rhs=rhs, workers=1)
    s3 = assemble(space, c=1.0, rhs=rhs, workers=3)
    assert np.array_equal(s1.A.indptr, s3.A.indptr)
    assert np.array_equal(s1.A.indices, s3.A.indices)
    assert np.array_equal(s1.A.data, s3.A.data)
    assert np.array_equal(s1.b, s3.b)


def test_csr_text_round_trip(tmp_path):
    d = make_domain("sector", omega=math.pi / 2)
    A = assemble(FESpace(grade_mesh(d, H=0.4, kappa=0.5, L=3), 1)).A
    path = tmp_path / "A.csr"
    save_csr(A, path)
    assert open(path).readline().split()[:2] == ["csr", "v1"]
    B = load_csr(path)
    assert np.array_equal(A.indptr, B.indptr)
    assert np.array_equal(A.indices, B.indices)
    assert np.array_equal(A.data, B.data)


def test_interpolate_p2_reproduces_quadratics():
    space = FESpace(rectangle_mesh(3, 3), 2)
    f = lambda p: p[:, 0] ** 2 + p[:, 0] * p[:, 1] - 2.0 * p[:, 1] ** 2
    u = interpolate(space, f)
    bary = np.array([[0.2, 0.3, 0.5], [0.6, 0.1, 0.3], [1 / 3, 1 / 3, 1 / 3]])
    vals = space.element_values(u.coeffs, bary)
    pts = space.quad_points(bary)
    exact = f(pts.reshape(-1, 2)).reshape(vals.shape)
    assert np.abs(vals - exact).max() <= 1e-13


def test_pure_neumann_system_warns():
    sys = assemble(FESpace(rectangle_mesh(2, 2, dirichlet=()), 1))
    with pytest.warns(UserWarning, match="pure Neumann"):
        apply_bc(sys)


def test_function_csv_layout(tmp_path):
    space = FESpace(rectangle_mesh(2, 2), 1)
    u = interpolate(space, lambda p: p[:, 0])
    path = tmp_path / "u.csv"
    write_function_csv(u, path)
    lines = open(path).read().splitlines()
    assert lines[0] == "dof,x,y,value"
    assert len(lines) == 1 + space.ndof
    assert lines[1].split(",")[0] == "0"
