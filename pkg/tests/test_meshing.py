import math

import numpy as np
import pytest

from kondralab import (
    GradingError,
    RadialPower,
    TrigPoly,
    Weight,
    grade_mesh,
    load_mesh,
    make_domain,
    mesh_quality,
    rectangle_mesh,
    refine,
    save_mesh,
)
from kondralab.meshing import Mesh


def test_text_round_trip_is_bit_exact():
    d = make_domain("sector", omega=3 * math.pi / 2)
    m = grade_mesh(d, H=0.4, kappa=0.5, L=4)
    text = m.dumps()
    head = text.splitlines()[0].split()
    assert head == ["mesh", "v1", str(m.nv), str(m.nt), str(len(m.boundary_edges))]
    back = Mesh.loads(text)
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.triangles, m.triangles)
    assert back.boundary_edges == m.boundary_edges
    assert back.dumps() == text


def test_save_load_round_trip(tmp_path):
    m = rectangle_mesh(3, 2, x1=2.0)
    path = tmp_path / "m.txt"
    save_mesh(m, path)
    back = load_mesh(path)
    assert np.array_equal(back.vertices, m.vertices)
    assert back.boundary_edges == m.boundary_edges


def test_validate_rejects_corrupted_boundary():
    d = make_domain("sector", omega=math.pi / 2)
    m = grade_mesh(d, H=0.4, kappa=0.5, L=3)
    m.validate()
    broken = Mesh(m.vertices, m.triangles, m.boundary_edges[:-1],
                  dict(m.grading), dict(m.provenance))
    with pytest.raises(GradingError):
        broken.validate()


def test_validate_rejects_flipped_triangle():
    m = rectangle_mesh(2, 2)
    tris = m.triangles.copy()
    tris[0] = tris[0][::-1]
    with pytest.raises(GradingError):
        Mesh(m.vertices, tris, m.boundary_edges, dict(m.grading), {}).validate()


def test_fixed_n_family_is_self_similar():
    # one row per layer, ring j at radius sigma^j: each ring is exactly
    # half the previous one for sigma = 0.5
    d = make_domain("sector", omega=math.pi / 2)
    n, L = 8, 6
    m = grade_mesh(d, H=0.5, L=L, sigma=0.5, n=n, mode="fixed-n")
    ring = lambda j: m.vertices[j * (n + 1):(j + 1) * (n + 1)]
    for j in range(L):
        assert np.array_equal(ring(j + 1), 0.5 * ring(j))
    radii = np.hypot(m.vertices[:-1, 0], m.vertices[:-1, 1])
    assert radii.min() == 0.5**L and (m.vertices[-1] == 0.0).all()


def test_gdiam_bounds_stable_in_depth():
    # kappa = lam = 0.5 keeps h ~ rho(x)^... cell g-diameters depth-uniform
    d = make_domain("sector", omega=math.pi / 2)
    rho = Weight((RadialPower(0.5, (0.0, 0.0)),))
    g_max = []
    for L in (6, 10, 14):
        q = mesh_quality(grade_mesh(d, H=0.4, kappa=0.5, L=L), rho)
        assert q.g_max is not None and q.g_max <= 4.0
        g_max.append(q.g_max)
    assert max(g_max) <= min(g_max) * 1.25


def test_sized_mode_rejects_too_fast_coarsening():
    d = make_domain("sector", omega=math.pi / 2)
    with pytest.raises(GradingError):
        grade_mesh(d, H=0.4, kappa=1.0, L=6, sigma=0.3)


def test_rectangle_mesh_shape_and_quality():
    m = rectangle_mesh(4, 3, x1=2.0, y1=1.5)
    assert m.nv == 5 * 4 and m.nt == 2 * 4 * 3
    m.validate()
    q = mesh_quality(m)
    assert q.min_angle == pytest.approx(45.0, abs=1e-9)
    assert q.h_max == pytest.approx(0.5 * math.sqrt(2.0), rel=1e-12)


def test_refine_rectangle_doubles_resolution():
    m = rectangle_mesh(3, 2, x1=2.0, y1=3.0, dirichlet=("left", "top"))
    fine = refine(m)
    assert fine.nt == 4 * m.nt
    for k in range(2):
        assert fine.vertices[:, k].min() == m.vertices[:, k].min()
        assert fine.vertices[:, k].max() == m.vertices[:, k].max()
    assert {t for _, _, t in fine.boundary_edges} == {t for _, _, t in m.boundary_edges}


def test_refine_graded_sector_keeps_tags_and_depth():
    d = make_domain("sector", omega=3 * math.pi / 2, dirichlet=("edge0", "arc"))
    m = grade_mesh(d, H=0.6, kappa=0.5, L=3)
    fine = refine(m)
    fine.validate()
    assert {t for _, _, t in fine.boundary_edges} == {t for _, _, t in m.boundary_edges}
    assert fine.grading["L"] == m.grading["L"] + 2  # round(1/kappa) extra layers
    assert fine.grading["H"] == m.grading["H"] / 2.0
    assert mesh_quality(fine).h_min < mesh_quality(m).h_min


def test_cusp_and_oscillating_meshes_validate():
    cusp = make_domain("cusp", alpha=2.0, b=(-1.0, 1.0))
    mc = grade_mesh(cusp, H=0.25, kappa=0.5, L=6)
    mc.validate()
    assert mc.grading["chart"] == "cusp"
    osc = make_domain("oscillating", profile0=TrigPoly(math.pi / 4),
                      profile1=TrigPoly(3 * math.pi / 4, (), (0.2,)), depth=5.0)
    mo = grade_mesh(osc, H=0.4)
    mo.validate()
    assert mo.nt > 0 and {t.split(":")[1] for _, _, t in mo.boundary_edges} == {
        "wall_lo", "arc_outer", "wall_hi", "arc_inner"}
