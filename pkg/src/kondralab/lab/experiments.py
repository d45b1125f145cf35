"""Experiment drivers: each consumes a resolved config and writes artifacts.

run_experiment is the single entry point the CLI calls.  Exit codes: 0 on
success, 1 on computational failure (solver stall, grading breakdown), 2 on
config errors.  Every run writes report.json; numeric tables go to CSV with
repr-exact floats so reruns are byte-comparable, timings stay in the JSON.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import splu

from ..domains import Domain2D, bounded_geometry_weight, distance_to_singular_set, make_domain
from ..errors import (
    ConfigError,
    GradingError,
    InvalidParameterError,
    SolverError,
    WeightDomainError,
)
from ..fem import (
    FESpace,
    apply_bc,
    assemble,
    interpolate,
    manufactured_problem,
    save_csr,
    solve,
    triangle_rule,
    write_function_csv,
)
from ..hardy import hardy_trichotomy
from ..meshing import Mesh, grade_mesh, mesh_quality, refine, save_mesh
from ..metric import (
    ConformalMetric,
    admissibility_probe,
    boundary_curvature_profile,
    coefficient_catalog,
    completeness_probe,
    conformal_symbol_check,
)
from ..weights import Constant, ExponentialCusp, RadialPower, Weight
from ..wnorm import (
    AnalyticFunction,
    DifferenceFunction,
    WeightedNormSpec,
    kondratiev_norm,
    relation_check,
)
from .config import parse_config, profile_from_text, resolve_config
from .report import SCHEMA, fit_rate, svg_mesh, svg_plot, write_csv, write_json

__all__ = ["run_experiment", "convergence_study", "stability_sweep", "geometry_check"]


# ---------------------------------------------------------------------------
# shared setup helpers


def _build_domain(resolved: dict) -> Domain2D:
    d = resolved["domain"]
    template = d["template"]
    lam = resolved["weight"]["lam"]
    kwargs: dict = {"dirichlet": d["dirichlet"] if d["dirichlet"] == "all"
                    else tuple(d["dirichlet"])}
    if lam is not None and template != "circle-cusp":
        kwargs["lam"] = lam
    if template == "sector":
        kwargs["omega"] = d["omega"]
    elif template == "cusp":
        kwargs["alpha"] = d["alpha"]
        kwargs["b"] = tuple(d["b"])
    elif template == "oscillating":
        kwargs["profile0"] = profile_from_text(d["profile0"])
        kwargs["profile1"] = profile_from_text(d["profile1"])
        kwargs["depth"] = d["depth"]
    return make_domain(template, **kwargs)


def _lam_of(resolved: dict, domain: Domain2D) -> float:
    lam = resolved["weight"]["lam"]
    if lam is not None:
        return float(lam)
    return float(domain.singular_points[0].lam)


def _rho_of(resolved: dict, domain: Domain2D) -> Weight:
    if len(domain.singular_points) > 1:
        return bounded_geometry_weight(domain, mollified=False)
    lam = _lam_of(resolved, domain)
    center = domain.singular_points[0].location
    return Weight((RadialPower(lam, center),))


def _mesh_from_cfg(domain: Domain2D, m: dict) -> Mesh:
    return grade_mesh(
        domain,
        H=m["H"],
        kappa=m["kappa"],
        L=m["L"],
        sigma=m["sigma"],
        n=m["n"],
        mode=m["mode"],
        theta_min_deg=m["theta_min"],
    )


def _level_meshes(domain: Domain2D, resolved: dict, levels: int) -> list[Mesh]:
    """Mesh family for a level study.

    fixed-n templates deepen the graded region (L0, L0+1, ...); sized meshes
    and oscillating domains refine globally from the base mesh.
    """
    m = resolved["mesh"]
    if domain.template != "oscillating" and m["mode"] == "fixed-n":
        L0 = resolved["experiment"]["L0"]
        return [
            grade_mesh(domain, H=m["H"], L=L0 + k, sigma=m["sigma"],
                       n=m["n"], mode="fixed-n", theta_min_deg=m["theta_min"])
            for k in range(levels)
        ]
    meshes = [_mesh_from_cfg(domain, m)]
    while len(meshes) < levels:
        meshes.append(refine(meshes[-1]))
    return meshes


def _reaction_term(field):
    c = field.reaction
    if callable(c) or float(c) != 0.0:
        return c
    return None


def _say(quiet: bool, msg: str):
    if not quiet:
        print(msg)


# ---------------------------------------------------------------------------
# error measures for manufactured solutions


def _energy_error(u_h, problem, quad_degree: int = 6) -> float:
    """sqrt(int a grad e . grad e + c e^2) with e = u_h - u."""
    space = u_h.space
    bary, wq = triangle_rule(quad_degree)
    pts = space.quad_points(bary)
    flat = pts.reshape(-1, 2)
    shape = pts.shape[:2]
    grads = space.element_gradients(u_h.coeffs, bary)
    grads = grads - np.asarray(problem.grad_u(flat), dtype=float).reshape(shape + (2,))
    a_vals = problem.a.a_at(flat).reshape(shape + (2, 2))
    dens = np.einsum("eqi,eqij,eqj->eq", grads, a_vals, grads)
    if float(problem.c) != 0.0:
        vals = space.element_values(u_h.coeffs, bary)
        vals = vals - np.asarray(problem.u(flat), dtype=float).reshape(shape)
        dens = dens + problem.c * vals**2
    qw = space.areas()[:, None] * wq[None, :]
    return float(np.sqrt(max((qw * dens).sum(), 0.0)))


def _l2_error(u_h, problem, quad_degree: int = 6) -> float:
    space = u_h.space
    bary, wq = triangle_rule(quad_degree)
    pts = space.quad_points(bary)
    vals = space.element_values(u_h.coeffs, bary)
    vals = vals - np.asarray(problem.u(pts.reshape(-1, 2)), dtype=float).reshape(vals.shape)
    qw = space.areas()[:, None] * wq[None, :]
    return float(np.sqrt(max((qw * vals**2).sum(), 0.0)))


def _solve_level(space, problem, fem_cfg):
    system = assemble(
        space,
        a=problem.a,
        c=problem.c if problem.c else None,
        rhs=problem.rhs,
        quad_degree=fem_cfg["quad_degree"],
        workers=fem_cfg["workers"],
    )
    con = apply_bc(system, dirichlet=problem.u, neumann=problem.flux)
    return con, *solve(con, method=fem_cfg["solver"], tol=fem_cfg["tol"])


# ---------------------------------------------------------------------------
# mesh / solve


def _run_mesh(resolved: dict, out_dir: Path, quiet: bool):
    domain = _build_domain(resolved)
    mesh = _mesh_from_cfg(domain, resolved["mesh"])
    rho = _rho_of(resolved, domain)
    q = mesh_quality(mesh, rho)
    save_mesh(mesh, out_dir / "mesh.txt")
    header = ["n_elements", "h_min", "h_max", "min_angle", "min_angle_graded",
              "max_aspect", "g_min", "g_max"]
    row = (q.n_elements, q.h_min, q.h_max, q.min_angle, q.min_angle_graded,
           q.max_aspect, q.g_min, q.g_max)
    write_csv(out_dir / "quality.csv", header, [row])
    svg_mesh(out_dir / "mesh.svg", mesh)
    _say(quiet, f"mesh: {mesh.nv} vertices, {mesh.nt} triangles, "
                f"min angle {q.min_angle:.2f} deg")
    results = {
        "vertices": mesh.nv,
        "triangles": mesh.nt,
        "quality": dict(zip(header, [float(v) if v is not None else None for v in row])),
    }
    return results, ["mesh.txt", "quality.csv", "mesh.svg"]


def _run_solve(resolved: dict, out_dir: Path, quiet: bool):
    domain = _build_domain(resolved)
    mesh = _mesh_from_cfg(domain, resolved["mesh"])
    space = FESpace(mesh, degree=resolved["fem"]["degree"])
    problem = manufactured_problem(domain, resolved["experiment"]["problem"])
    con, u_h, info = _solve_level(space, problem, resolved["fem"])
    write_function_csv(u_h, out_dir / "solution.csv")
    save_csr(con.A, out_dir / "system.csr")
    en = _energy_error(u_h, problem)
    l2 = _l2_error(u_h, problem)
    _say(quiet, f"solve[{problem.name}]: dof={con.ndof_free} {info.method} "
                f"iters={info.iterations} energy_err={en:.3e} l2_err={l2:.3e}")
    results = {
        "problem": problem.name,
        "dof_free": con.ndof_free,
        "solver": {"method": info.method, "iterations": info.iterations,
                   "residual": info.residual},
        "energy_error": en,
        "l2_error": l2,
    }
    return results, ["solution.csv", "system.csr"]


# ---------------------------------------------------------------------------
# converge


def convergence_study(resolved: dict, out_dir: Path, quiet: bool = True):
    domain = _build_domain(resolved)
    levels = resolved["experiment"]["levels"]
    meshes = _level_meshes(domain, resolved, levels)
    problem = manufactured_problem(domain, resolved["experiment"]["problem"])
    rho = _rho_of(resolved, domain)
    one = Weight((Constant(1.0),))
    exact = AnalyticFunction(problem.name, problem.u, problem.grad_u)
    spec0 = WeightedNormSpec(ell=0, p=2.0, rho=rho, f=one, s=0.0)
    spec1 = WeightedNormSpec(ell=1, p=2.0, rho=rho, f=one, s=0.0)

    rows = []
    failure = None
    for lev, mesh in enumerate(meshes):
        space = FESpace(mesh, degree=resolved["fem"]["degree"])
        t0 = time.perf_counter()
        try:
            con, u_h, info = _solve_level(space, problem, resolved["fem"])
        except SolverError as exc:
            failure = f"level {lev}: {exc}"
            break
        diff = DifferenceFunction(u_h, exact)
        row = {
            "level": lev,
            "dof": con.ndof_free,
            "energy_error": _energy_error(u_h, problem),
            "l2_error": _l2_error(u_h, problem),
            "k0_error": kondratiev_norm(diff, spec0, quad_degree=6),
            "k1_error": kondratiev_norm(diff, spec1, quad_degree=6),
            "solve_s": time.perf_counter() - t0,
        }
        rows.append(row)
        _say(quiet, f"level {lev}: dof={row['dof']} energy={row['energy_error']:.4e} "
                    f"k1={row['k1_error']:.4e} ({info.method})")

    header = ["level", "dof", "energy_error", "l2_error", "k0_error", "k1_error"]
    write_csv(out_dir / "convergence.csv", header,
              [tuple(r[k] for k in header) for r in rows])

    slopes = {}
    slope_rows = []
    if len(rows) >= 3:
        dofs = np.array([r["dof"] for r in rows], dtype=float)
        for key in ("energy_error", "l2_error", "k1_error"):
            errs = np.array([r[key] for r in rows], dtype=float)
            fit = fit_rate(dofs, errs, points=3)
            slopes[key] = {"slope": fit.slope, "intercept": fit.intercept,
                           "r2": fit.r2, "flag": fit.flag}
            slope_rows.append((key, fit.slope, fit.r2, fit.flag))
    write_csv(out_dir / "slopes.csv", ["error", "slope", "r2", "flag"], slope_rows)

    if rows:
        xs = [float(r["dof"]) ** -0.5 for r in rows]
        series = [(key, xs, [r[key] for r in rows])
                  for key in ("energy_error", "l2_error", "k1_error")]
        lines = []
        if "energy_error" in slopes:
            s = slopes["energy_error"]
            lines.append((f"slope {s['slope']:.2f}", s["slope"], s["intercept"]))
        svg_plot(out_dir / "convergence.svg", series,
                 xlabel="dof^-1/2", ylabel="error", lines=lines)

    results = {
        "problem": problem.name,
        "rows": rows,
        "slopes": slopes,
        "failure": failure,
    }
    return results, ["convergence.csv", "slopes.csv", "convergence.svg"], failure


def _run_converge(resolved: dict, out_dir: Path, quiet: bool):
    results, artifacts, failure = convergence_study(resolved, out_dir, quiet)
    if failure is not None:
        raise _PartialFailure(failure, results, artifacts)
    return results, artifacts


# ---------------------------------------------------------------------------
# hardy


def _run_hardy(resolved: dict, out_dir: Path, quiet: bool):
    domain = _build_domain(resolved)
    exp = resolved["experiment"]
    mesh_cfg = resolved["mesh"]
    fem_cfg = resolved["fem"]
    report = hardy_trichotomy(
        domain,
        resolved["weight"]["lambdas"],
        levels=exp["levels"],
        L0=exp["L0"],
        n=mesh_cfg["n"] if mesh_cfg["n"] is not None else 8,
        sigma=mesh_cfg["sigma"],
        degree=fem_cfg["degree"],
        quad_degree=max(6, fem_cfg["quad_degree"]),
        tol=fem_cfg["tol"],
        workers=fem_cfg["workers"],
    )
    header = ["template", "lambda", "level", "dof", "lambda_min", "classification"]
    csv_rows = [
        (domain.template, row.lam, row.level, row.ndof_free, row.value,
         report.classifications[row.lam])
        for row in report.rows
    ]
    write_csv(out_dir / "trichotomy.csv", header, csv_rows)

    series = []
    for lam in resolved["weight"]["lambdas"]:
        vals = report.values(lam)
        series.append((f"lambda={lam:g}", [float(k) for k in range(len(vals))], vals))
    svg_plot(out_dir / "trichotomy.svg", series, xlabel="level",
             ylabel="lambda_min", logx=False, logy=True)

    for lam in resolved["weight"]["lambdas"]:
        _say(quiet, f"lambda={lam:g}: {report.classifications[lam]} "
                    f"(last value {report.values(lam)[-1]:.6g})")
    results = {
        "classifications": {repr(float(k)): v for k, v in report.classifications.items()},
        "references": {repr(float(k)): v for k, v in report.references.items()},
        "thresholds": {"hold_tol": report.hold_tol, "fail_ratio": report.fail_ratio},
        "rows": [
            {"lambda": row.lam, "level": row.level, "layers": row.layers,
             "dof": row.ndof_free, "lambda_min": row.value, "residual": row.residual}
            for row in report.rows
        ],
    }
    return results, ["trichotomy.csv", "trichotomy.svg"]


# ---------------------------------------------------------------------------
# stability


def _unit_rhs(pts):
    return np.ones(len(pts))


def _riesz_data_norm(system, con) -> float:
    """Dual norm of the load against the rho f^s weighted pairing.

    The assembled M_w block carries the squared reciprocal data weight, so
    solving M_w z = b gives |F|_* = sqrt(b . z) on the constrained space.
    """
    w_ff = con.constrain_matrix(system.M_w).tocsc()
    lu = splu(w_ff, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
              options={"SymmetricMode": True})
    if np.min(lu.U.diagonal()) <= 0.0:
        raise SolverError("data-norm Gram matrix is not positive definite")
    z = lu.solve(con.b)
    return float(np.sqrt(max(float(con.b @ z), 0.0)))


def stability_sweep(resolved: dict, out_dir: Path, quiet: bool = True):
    domain = _build_domain(resolved)
    levels = resolved["experiment"]["levels"]
    meshes = _level_meshes(domain, resolved, levels)
    center = domain.singular_points[0].location
    lam = _lam_of(resolved, domain)
    rho = Weight((RadialPower(lam, center),))
    f = Weight((RadialPower(resolved["weight"]["f_lam"], center),))
    fields = {c.name: c for c in coefficient_catalog()}
    field = fields[resolved["experiment"]["field"]]
    fem_cfg = resolved["fem"]

    spaces = [FESpace(m, degree=fem_cfg["degree"]) for m in meshes]
    rows = []
    verdicts = {}
    for s in resolved["weight"]["s"]:
        w_data = rho.power(-1.0) * f.power(s)
        sol_spec = WeightedNormSpec(ell=1, p=2.0, rho=rho, f=rho * f.power(s), s=1.0)
        ratios = []
        for lev, space in enumerate(spaces):
            system = assemble(
                space,
                a=field,
                c=_reaction_term(field),
                w=w_data,
                rhs=_unit_rhs,
                quad_degree=fem_cfg["quad_degree"],
                workers=fem_cfg["workers"],
            )
            con = apply_bc(system)
            u_h, info = solve(con, method=fem_cfg["solver"], tol=fem_cfg["tol"])
            data = _riesz_data_norm(system, con)
            sol = kondratiev_norm(u_h, sol_spec, quad_degree=6)
            ratio = sol / data
            ratios.append(ratio)
            rows.append((s, lev, con.ndof_free, data, sol, ratio))
            _say(quiet, f"s={s:g} level {lev}: dof={con.ndof_free} ratio={ratio:.4f}")
        tail = ratios[-3:]
        spread = max(tail) / min(tail)
        verdicts[s] = {
            "verdict": "HOLDS" if spread <= 2.0 else "INCONCLUSIVE",
            "tail_spread": spread,
            "ratios": ratios,
        }

    header = ["s", "level", "dof", "data_norm", "solution_norm", "ratio"]
    write_csv(out_dir / "stability.csv", header, rows)
    series = []
    for s in resolved["weight"]["s"]:
        pts = [(r[1], r[5]) for r in rows if r[0] == s]
        series.append((f"s={s:g}", [float(p[0]) for p in pts], [p[1] for p in pts]))
    svg_plot(out_dir / "stability.svg", series, xlabel="level", ylabel="ratio",
             logx=False, logy=True)
    results = {
        "field": field.name,
        "lam": lam,
        "verdicts": {repr(float(s)): v for s, v in verdicts.items()},
    }
    return results, ["stability.csv", "stability.svg"]


def _run_stability(resolved: dict, out_dir: Path, quiet: bool):
    return stability_sweep(resolved, out_dir, quiet)


# ---------------------------------------------------------------------------
# geometry-check


def _admissibility_flags(domain, f, metric, samples):
    d = distance_to_singular_set(domain, samples)
    cut = 0.05
    near, far = samples[d < cut], samples[d >= cut]
    if len(near) == 0 or len(far) == 0:
        near = far = samples
    sup_near = admissibility_probe(f, metric, near, order=2)
    sup_far = admissibility_probe(f, metric, far, order=2)
    out = {}
    for order in (1, 2):
        bounded = sup_near[order] <= max(1.05 * sup_far[order], sup_far[order] + 1e-9)
        out[order] = {
            "sup_near": sup_near[order],
            "sup_far": sup_far[order],
            "flag": "bounded" if bounded else "growing",
        }
    return out


def geometry_check(resolved: dict, out_dir: Path, quiet: bool = True):
    domain = _build_domain(resolved)
    rho = _rho_of(resolved, domain)
    eps = resolved["weight"]["epsilon"]
    if eps > 0.0:
        center = domain.singular_points[0].location
        f: Weight = Weight((ExponentialCusp(center, eps),))
        f_name = f"exp-cusp(eps={eps:g})"
    else:
        f = rho
        f_name = "rho"
    metric = ConformalMetric(rho)
    rng = np.random.default_rng(resolved["experiment"]["seed"])
    samples = np.vstack([
        domain.sample_points(48, 24, r_min=1e-6),
        domain.random_interior_points(resolved["experiment"]["samples"], rng, r_min=1e-6),
    ])

    adm = _admissibility_flags(domain, f, metric, samples)
    curv = boundary_curvature_profile(domain, rho)
    symbol = max(conformal_symbol_check(a, rho, samples) for a in coefficient_catalog())

    completeness = None
    try:
        eps_list = np.exp(-np.arange(1.0, 9.0))
        lengths = completeness_probe(domain, rho, eps_list)
        inc = np.diff(lengths)
        if inc[-1] < 0.2 * inc[0]:
            comp_class = "convergent"
        elif inc[-1] > 5.0 * inc[0]:
            comp_class = "divergent (super-logarithmic)"
        else:
            comp_class = "divergent (logarithmic)"
        completeness = {
            "epsilons": [float(e) for e in eps_list],
            "lengths": [float(v) for v in lengths],
            "classification": comp_class,
        }
    except InvalidParameterError:
        comp_class = "skipped (no radial ray)"

    flags = []
    if completeness is not None and comp_class == "convergent":
        flags.append("not bounded geometry (incomplete)")
    if any(adm[o]["flag"] == "growing" for o in (1, 2)):
        flags.append("unbounded weight derivatives near the singular set")
    if symbol > 1e-9:
        flags.append("conformal symbol mismatch")
    verdict = "consistent with bounded geometry" if not flags else "; ".join(flags)

    probe_rows = [
        ("admissibility_order1", f_name, adm[1]["sup_near"], adm[1]["flag"]),
        ("admissibility_order2", f_name, adm[2]["sup_near"], adm[2]["flag"]),
        ("curvature_sup", "rho", curv.sup_abs, "ok"),
        ("symbol_deviation", "catalog", symbol,
         "ok" if symbol <= 1e-9 else "mismatch"),
    ]
    if completeness is not None:
        probe_rows.append(("completeness_length", "rho", completeness["lengths"][-1],
                           completeness["classification"]))
    write_csv(out_dir / "probes.csv", ["probe", "weight", "value", "flag"], probe_rows)

    _say(quiet, f"geometry: {verdict}")
    results = {
        "verdict": verdict,
        "admissibility": {str(k): {kk: (float(vv) if kk != "flag" else vv)
                                   for kk, vv in v.items()}
                          for k, v in adm.items()},
        "curvature": {
            "sup_abs": float(curv.sup_abs),
            "sup_per_curve": {name: float(np.max(np.abs(kg)))
                              for name, kg in curv.per_curve.items()},
        },
        "symbol_deviation": float(symbol),
        "completeness": completeness if completeness is not None
        else {"classification": comp_class},
    }
    return results, ["probes.csv"]


def _run_geometry(resolved: dict, out_dir: Path, quiet: bool):
    return geometry_check(resolved, out_dir, quiet)


# ---------------------------------------------------------------------------
# norms-check


def _norm_function_catalog() -> list[AnalyticFunction]:
    def gauss(p):
        return np.exp(-((p[:, 0] - 0.4) ** 2 + (p[:, 1] - 0.3) ** 2))

    def gauss_grad(p):
        g = gauss(p)
        return np.stack([-2.0 * (p[:, 0] - 0.4) * g, -2.0 * (p[:, 1] - 0.3) * g], axis=-1)

    return [
        AnalyticFunction("affine", lambda p: 0.5 + 2.0 * p[:, 0] - 3.0 * p[:, 1],
                         lambda p: np.stack([np.full(len(p), 2.0),
                                             np.full(len(p), -3.0)], axis=-1)),
        AnalyticFunction("quadratic", lambda p: p[:, 0] ** 2 + p[:, 0] * p[:, 1],
                         lambda p: np.stack([2.0 * p[:, 0] + p[:, 1], p[:, 0]], axis=-1)),
        AnalyticFunction("trig", lambda p: np.sin(p[:, 0]) * np.cos(p[:, 1]),
                         lambda p: np.stack([np.cos(p[:, 0]) * np.cos(p[:, 1]),
                                             -np.sin(p[:, 0]) * np.sin(p[:, 1])], axis=-1)),
        AnalyticFunction("gaussian", gauss, gauss_grad),
        AnalyticFunction("parabola", lambda p: p[:, 0] ** 2 + p[:, 1] ** 2,
                         lambda p: 2.0 * p),
    ]


def _run_norms(resolved: dict, out_dir: Path, quiet: bool):
    domain = _build_domain(resolved)
    levels = resolved["experiment"]["levels"]
    meshes = _level_meshes(domain, resolved, levels)
    center = domain.singular_points[0].location
    funcs = _norm_function_catalog()
    weights = {
        "r": Weight((RadialPower(1.0, center),)),
        "r^0.5": Weight((RadialPower(0.5, center),)),
        "r^0.3": Weight((RadialPower(0.3, center),)),
        "2": Weight((Constant(2.0),)),
    }

    # ell = 0: pointwise identity of the two routes, one mesh, analytic input
    combos0 = [
        (funcs[0], "r", "2", 2.0),
        (funcs[0], "r^0.5", "r", 3.0),
        (funcs[1], "r", "r^0.3", 2.0),
        (funcs[1], "r^0.5", "2", 4.0),
        (funcs[2], "r", "r", 2.0),
        (funcs[2], "r^0.3", "2", 3.0),
        (funcs[3], "r^0.5", "r^0.3", 2.0),
        (funcs[3], "r", "2", 4.0),
        (funcs[4], "r^0.3", "r", 2.0),
        (funcs[4], "r^0.5", "r^0.5", 3.0),
    ]
    space0 = FESpace(meshes[0], degree=1)
    rows0 = []
    max_dev = 0.0
    for fn, rname, fname, p in combos0:
        spec = WeightedNormSpec(ell=0, p=p, rho=weights[rname], f=weights[fname], s=1.0)
        rep = relation_check(fn, spec, space=space0, quad_degree=6)
        rows0.append((fn.name, rname, fname, p, rep.kondratiev, rep.conformal, rep.ratio))
        max_dev = max(max_dev, abs(rep.ratio - 1.0))
    write_csv(out_dir / "norms0.csv",
              ["function", "rho", "f", "p", "kondratiev", "conformal", "ratio"], rows0)

    # ell = 1: equivalent-only routes, ratio tracked across interpolation levels
    combos1 = [
        (funcs[2], "r", "2", 2.0),
        (funcs[3], "r^0.5", "r", 2.0),
        (funcs[1], "r", "r^0.3", 3.0),
    ]
    rows1 = []
    spreads = {}
    for fn, rname, fname, p in combos1:
        spec = WeightedNormSpec(ell=1, p=p, rho=weights[rname], f=weights[fname], s=1.0)
        ratios = []
        for lev, mesh in enumerate(meshes):
            space = FESpace(mesh, degree=resolved["fem"]["degree"])
            u_i = interpolate(space, fn.fn)
            rep = relation_check(u_i, spec, quad_degree=6)
            ratios.append(rep.ratio)
            rows1.append((fn.name, rname, fname, p, lev, space.ndof, rep.ratio))
        spreads[f"{fn.name}/{rname}/{fname}/p={p:g}"] = max(ratios) / min(ratios)
    write_csv(out_dir / "norms1.csv",
              ["function", "rho", "f", "p", "level", "dof", "ratio"], rows1)

    _say(quiet, f"norms: ell=0 max deviation {max_dev:.3e}, "
                f"ell=1 worst spread {max(spreads.values()):.4f}")
    results = {
        "l0_max_abs_deviation": max_dev,
        "l1_ratio_spreads": spreads,
        "l0_rows": len(rows0),
        "l1_rows": len(rows1),
    }
    return results, ["norms0.csv", "norms1.csv"]


# ---------------------------------------------------------------------------
# runner


class _PartialFailure(Exception):
    """Computational failure after partial progress; carries the partial report."""

    def __init__(self, message: str, results: dict, artifacts: list[str]):
        super().__init__(message)
        self.results = results
        self.artifacts = artifacts


_DISPATCH = {
    "mesh": _run_mesh,
    "solve": _run_solve,
    "converge": _run_converge,
    "hardy": _run_hardy,
    "stability": _run_stability,
    "geometry-check": _run_geometry,
    "norms-check": _run_norms,
}


def run_experiment(config_path, kind: str | None = None, out: str | None = None,
                   levels: int | None = None, quiet: bool = False) -> int:
    t_start = time.perf_counter()
    try:
        cfg = parse_config(config_path)
        resolved = resolve_config(cfg, kind=kind, levels=levels, out=out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(resolved["output"]["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {
        "schema": SCHEMA,
        "experiment": resolved["experiment"]["kind"],
        "config": resolved,
    }
    code = 0
    try:
        results, artifacts = _DISPATCH[resolved["experiment"]["kind"]](
            resolved, out_dir, quiet)
        doc["results"] = results
        doc["artifacts"] = artifacts
    except _PartialFailure as exc:
        doc["results"] = exc.results
        doc["artifacts"] = exc.artifacts
        doc["error"] = str(exc)
        code = 1
        print(f"computational failure: {exc}", file=sys.stderr)
    except InvalidParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, GradingError, WeightDomainError) as exc:
        doc["error"] = str(exc)
        code = 1
        print(f"computational failure: {exc}", file=sys.stderr)
    doc["timings"] = {"total_s": time.perf_counter() - t_start}
    write_json(out_dir / "report.json", doc)
    if not quiet:
        print(f"report: {out_dir / 'report.json'}")
    return code
