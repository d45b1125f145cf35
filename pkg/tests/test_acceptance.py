"""End-to-end checks of the laboratory's headline claims, at fixed tolerances.

Each test pins one advertised property: symbol invariance under conformal
rescaling, agreement of the two weighted-norm routes, admissibility and
completeness closed forms, the Hardy trichotomy on sectors and cusps,
graded-mesh convergence rates, stability of solution/data norm ratios,
FEM exactness, and byte-level determinism of the CSV artifacts.
"""

import json
import math
import shutil
import time
from pathlib import Path

import numpy as np
import pytest

from kondralab import (
    AnalyticFunction,
    ConformalMetric,
    Constant,
    DifferenceFunction,
    ExponentialCusp,
    FESpace,
    RadialPower,
    Weight,
    WeightedNormSpec,
    admissibility_probe,
    apply_bc,
    assemble,
    coefficient_catalog,
    completeness_probe,
    conformal_symbol_check,
    fit_rate,
    grade_mesh,
    kondratiev_norm,
    make_domain,
    manufactured_problem,
    rectangle_mesh,
    refine,
    run_experiment,
    solve,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="module")
def runner(tmp_path_factory):
    """Run each packaged config once; cache (exit code, report, out dir, seconds)."""
    cache = {}

    def run(name):
        if name not in cache:
            out = tmp_path_factory.mktemp(name.replace(".cfg", ""))
            t0 = time.perf_counter()
            code = run_experiment(CONFIGS / name, out=str(out), quiet=True)
            dt = time.perf_counter() - t0
            doc = json.loads((out / "report.json").read_text())
            cache[name] = (code, doc, out, dt)
        return cache[name]

    return run


# 1. conformal invariance of the Legendre bounds


def test_symbol_bounds_invariant_under_rescaling():
    d = make_domain("sector", omega=math.pi / 2)
    pts = d.random_interior_points(1000, np.random.default_rng(0), r_min=1e-6)
    fields = coefficient_catalog()
    assert len(fields) == 5
    weights = [Weight((RadialPower(e, (0.0, 0.0)),)) for e in (1.0, 0.5, 2.0)]
    t0 = time.perf_counter()
    worst = max(conformal_symbol_check(a, w, pts) for a in fields for w in weights)
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-12
    assert elapsed < 1.0


# 2. the two weighted-norm routes agree


def test_norm_routes_identity_and_level_stability(runner):
    code, doc, out, dt = runner("norms_sector.cfg")
    assert code == 0
    assert doc["results"]["l0_max_abs_deviation"] <= 1e-12
    assert doc["results"]["l0_rows"] == 10
    rows0 = (out / "norms0.csv").read_text().splitlines()
    assert len(rows0) == 11  # header + 10 combinations
    spreads = doc["results"]["l1_ratio_spreads"]
    assert spreads and all(v <= 1.2 for v in spreads.values())
    assert dt < 10.0


# 3. admissibility closed forms


def test_admissibility_suprema_match_closed_forms():
    d = make_domain("sector", omega=math.pi / 2)
    samples = d.sample_points(48, 24, r_min=1e-6)
    eps = 0.5
    f = Weight((ExponentialCusp((0.0, 0.0), eps),))
    rho = Weight((RadialPower(1.0 + eps, (0.0, 0.0)),))
    sup = admissibility_probe(f, ConformalMetric(rho), samples, order=1)[1]
    assert abs(sup - eps ** (1.0 + eps)) <= 1e-6

    r = Weight((RadialPower(1.0, (0.0, 0.0)),))
    sup_r = admissibility_probe(r, ConformalMetric(r), samples, order=1)[1]
    assert abs(sup_r - 1.0) <= 1e-10


# 4. completeness trichotomy of the rescaled radial length


def test_radial_length_trichotomy():
    d = make_domain("sector", omega=math.pi / 2)

    lam1 = completeness_probe(d, Weight((RadialPower(1.0, (0.0, 0.0)),)),
                              [math.exp(-3.0)])
    assert abs(lam1[0] - 3.0) <= 1e-6

    eps = [math.exp(-k) for k in (1, 2, 3, 4)]
    lam2 = completeness_probe(d, Weight((RadialPower(2.0, (0.0, 0.0)),)), eps)
    for e, v in zip(eps, lam2):
        assert abs(v - (1.0 / e - 1.0)) <= 1e-6

    ehalf = [math.exp(-k) for k in range(1, 9)]
    lam_half = completeness_probe(d, Weight((RadialPower(0.5, (0.0, 0.0)),)), ehalf)
    inc = np.diff(lam_half)
    assert (inc > 0.0).all()
    assert inc[-1] <= 0.2 * inc[0]
    # geometric decay of the increments pins the convergent branch
    ratios = inc[1:] / inc[:-1]
    assert np.allclose(ratios, math.exp(-0.5), atol=1e-6)


# 5. Hardy trichotomy on the quarter-plane sector


def test_hardy_trichotomy_sector(runner):
    code, doc, out, dt = runner("hardy_sector.cfg")
    assert code == 0
    assert dt < 120.0
    cls = doc["results"]["classifications"]
    assert cls["0.5"] == "HOLDS"
    assert cls["1.5"] == "FAILS"

    rows = doc["results"]["rows"]
    v15 = [r["lambda_min"] for r in rows if r["lambda"] == 1.5]
    assert len(v15) == 6
    for a, b in zip(v15, v15[1:]):
        assert 0.35 <= b / a <= 0.75

    bound = (math.pi / (math.pi / 2)) ** 2
    v10 = [r["lambda_min"] for r in rows if r["lambda"] == 1.0]
    assert len(v10) == 6
    assert all(v >= bound for v in v10)
    for a, b in zip(v10, v10[1:]):
        assert b <= a + 1e-12
    assert doc["results"]["references"]["1.0"] == pytest.approx(bound)


# 6. Hardy inequality survives on the cusp with the rescaling weight


def test_hardy_holds_on_cusp(runner):
    code, doc, out, dt = runner("hardy_cusp.cfg")
    assert code == 0
    assert doc["results"]["classifications"]["2.0"] == "HOLDS"
    rows = doc["results"]["rows"]
    assert len(rows) == 5
    assert all(r["lambda_min"] > 0.0 for r in rows)


# 7. convergence rates: quasi-uniform stalls at 2/3, grading restores 1


def test_corner_convergence_rates(runner):
    code_q, doc_q, _, dt_q = runner("converge_corner_quasi.cfg")
    code_g, doc_g, _, dt_g = runner("converge_corner_graded.cfg")
    assert code_q == 0 and code_g == 0
    assert dt_q < 180.0 and dt_g < 180.0

    for doc in (doc_q, doc_g):
        assert doc["results"]["problem"] == "corner"
        assert max(r["dof"] for r in doc["results"]["rows"]) <= 2e5

    quasi = doc_q["results"]["slopes"]["energy_error"]
    graded = doc_g["results"]["slopes"]["energy_error"]
    assert quasi["slope"] == pytest.approx(2.0 / 3.0, abs=0.10)
    assert graded["slope"] == pytest.approx(1.0, abs=0.10)
    assert quasi["r2"] >= 0.98 and graded["r2"] >= 0.98


# 8. stability of solution/data norm ratios under the data shift s


def test_stability_sweep_verdicts(runner):
    code_s, doc_s, _, _ = runner("stability_sector.cfg")
    code_o, doc_o, _, _ = runner("stability_oscillating.cfg")
    assert code_s == 0 and code_o == 0
    for doc in (doc_s, doc_o):
        verdicts = doc["results"]["verdicts"]
        assert set(verdicts) == {"-0.1", "0.0", "0.1"}
        for v in verdicts.values():
            assert v["verdict"] == "HOLDS"
            assert v["tail_spread"] <= 2.0
            assert len(v["ratios"]) == 5
    same = {k: doc_s["results"]["verdicts"][k]["verdict"] for k in ("-0.1", "0.0", "0.1")}
    other = {k: doc_o["results"]["verdicts"][k]["verdict"] for k in ("-0.1", "0.0", "0.1")}
    assert same == other


# 9. FEM exactness, solver cross-agreement, smooth-problem rate


def test_fem_exactness_and_solver_agreement():
    m = rectangle_mesh(8, 6, dirichlet=("left", "bottom"))
    prob = manufactured_problem(None, "affine")
    space = FESpace(m, 1)
    con = apply_bc(assemble(space, rhs=prob.rhs), dirichlet=prob.u,
                   neumann=prob.flux)
    u, _ = solve(con)
    assert np.abs(u.coeffs - prob.u(space.dof_coords)).max() <= 1e-10

    space2 = FESpace(rectangle_mesh(5, 4), 2)
    exact2 = lambda p: p[:, 0] ** 2 + 0.5 * p[:, 1] ** 2 - p[:, 0] * p[:, 1]
    con2 = apply_bc(assemble(space2, rhs=lambda p: np.full(len(p), -3.0)),
                    dirichlet=exact2)
    u2, _ = solve(con2)
    assert np.abs(u2.coeffs - exact2(space2.dof_coords)).max() <= 1e-10

    d = make_domain("sector", omega=3 * math.pi / 2)
    corner = manufactured_problem(d, "corner")
    con3 = apply_bc(assemble(FESpace(grade_mesh(d, H=0.3, kappa=0.5, L=7), 1),
                             rhs=corner.rhs), dirichlet=corner.u)
    u_cg, _ = solve(con3, method="cg", tol=1e-12)
    u_ch, _ = solve(con3, method="cholesky")
    rel = np.abs(u_cg.coeffs - u_ch.coeffs).max() / np.abs(u_ch.coeffs).max()
    assert rel <= 1e-8


def test_smooth_problem_l2_rate():
    prob = manufactured_problem(None, "smooth")
    one = Weight((Constant(1.0),))
    spec = WeightedNormSpec(0, 2.0, one, one, s=0.0)
    exact = AnalyticFunction("smooth", prob.u, prob.grad_u)
    mesh = rectangle_mesh(4, 4)
    dofs, errs = [], []
    for _ in range(5):
        space = FESpace(mesh, 1)
        con = apply_bc(assemble(space, rhs=prob.rhs))
        u, _ = solve(con)
        dofs.append(con.ndof_free)
        errs.append(kondratiev_norm(DifferenceFunction(u, exact), spec,
                                    quad_degree=6))
        mesh = refine(mesh)
    fit = fit_rate(dofs, errs, points=3)
    assert fit.slope == pytest.approx(2.0, abs=0.15)


# 10. byte-identical artifacts across reruns and worker counts


def test_csv_artifacts_are_deterministic(runner, tmp_path):
    targets = [
        ("hardy_sector.cfg", "trichotomy.csv"),
        ("converge_corner_quasi.cfg", "convergence.csv"),
        ("converge_corner_graded.cfg", "convergence.csv"),
    ]
    for cfg_name, artifact in targets:
        _, _, first_out, _ = runner(cfg_name)
        reference = (first_out / artifact).read_bytes()

        rerun_out = tmp_path / (cfg_name + ".rerun")
        assert run_experiment(CONFIGS / cfg_name, out=str(rerun_out), quiet=True) == 0
        assert (rerun_out / artifact).read_bytes() == reference

        threaded_cfg = tmp_path / ("w4_" + cfg_name)
        shutil.copyfile(CONFIGS / cfg_name, threaded_cfg)
        with open(threaded_cfg, "a") as fh:
            fh.write("fem.workers = 4\n")
        threaded_out = tmp_path / (cfg_name + ".w4")
        assert run_experiment(threaded_cfg, out=str(threaded_out), quiet=True) == 0
        assert (threaded_out / artifact).read_bytes() == reference
