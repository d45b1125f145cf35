"""Discrete Hardy-Poincare quotients and the deepening-mesh trichotomy.

The best constant in int |grad u|^2 >= C int rho^{-2} u^2 over functions
vanishing on the Dirichlet part is the smallest eigenvalue of the pencil
(A, M_rho) on the constrained space.  Meshes here deepen geometrically in
self-similar layers, so a weight r^lam either keeps the quotient stable
(inequality holds) or lets it decay like sigma^{2 lam - 2} per layer block
(concentration near the singular point defeats the inequality).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import splu

from .domains import Domain2D
from .errors import InvalidParameterError, SolverError
from .fem import FEFunction, FESpace, apply_bc, assemble
from .meshing import grade_mesh
from .weights import RadialPower, Weight

__all__ = [
    "HardyResult",
    "hardy_constant",
    "classify_sequence",
    "hardy_trichotomy",
    "TrichotomyRow",
    "TrichotomyReport",
]

HOLD_TOL = 0.05    # relative change of the last two levels for HOLDS
FAIL_RATIO = 0.75  # consecutive-level ratio below this (twice) for FAILS


@dataclass(frozen=True)
class HardyResult:
    value: float
    iterations: int
    residual: float
    ndof_free: int
    mode: FEFunction


def hardy_constant(space: FESpace, rho: Weight, tol: float = 1e-10,
                   quad_degree: int = 6, max_iter: int = 500,
                   workers: int = 1) -> HardyResult:
    """Smallest eigenvalue of (A, M_rho) on the Dirichlet-constrained space.

    Shift-and-invert power iteration with zero shift: A is positive definite
    once constrained, so each step solves A y = M_rho x.  The discrete value
    is the minimum Rayleigh quotient over the FE subspace, hence an upper
    bound that is >= the continuous infimum by conformity.
    """
    if len(space.dirichlet_dofs) == 0:
        raise InvalidParameterError(
            "Hardy quotient needs a Dirichlet boundary part; with none, "
            "constants make the quotient zero"
        )
    system = assemble(space, w=rho, quad_degree=quad_degree, workers=workers)
    con = apply_bc(system)
    A = con.A
    M = con.constrain_matrix(system.M_w)
    if np.any(M.diagonal() <= 0.0):
        raise SolverError("weighted mass matrix has a non-positive diagonal entry")

    lu = splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A",
              diag_pivot_thresh=0.0, options={"SymmetricMode": True})
    if np.any(lu.U.diagonal() <= 0.0):
        raise SolverError("constrained stiffness matrix is not positive definite")

    n = A.shape[0]
    x = np.ones(n)
    x /= math.sqrt(x @ (M @ x))
    lam = float(x @ (A @ x))
    for it in range(1, max_iter + 1):
        y = lu.solve(M @ x)
        my = M @ y
        y /= math.sqrt(y @ my)
        x = y
        mx = M @ x
        lam = float(x @ (A @ x))
        residual = float(np.linalg.norm(A @ x - lam * mx) / np.linalg.norm(mx))
        if residual <= tol:
            break
    else:
        raise SolverError(
            f"inverse iteration stalled after {max_iter} steps, residual {residual:g}"
        )
    if x[int(np.argmax(np.abs(x)))] < 0.0:
        x = -x
    mode = FEFunction(space, con.embed(x))
    return HardyResult(lam, it, residual, n, mode)


def classify_sequence(values, hold_tol: float = HOLD_TOL,
                      fail_ratio: float = FAIL_RATIO) -> str:
    """HOLDS / FAILS / INCONCLUSIVE from the last two level-to-level ratios."""
    vals = [float(v) for v in values]
    if len(vals) < 3:
        return "INCONCLUSIVE"
    r1 = vals[-2] / vals[-3]
    r2 = vals[-1] / vals[-2]
    if abs(r1 - 1.0) < hold_tol and abs(r2 - 1.0) < hold_tol:
        return "HOLDS"
    if r1 < fail_ratio and r2 < fail_ratio:
        return "FAILS"
    return "INCONCLUSIVE"


@dataclass(frozen=True)
class TrichotomyRow:
    lam: float
    level: int
    layers: int
    ndof_free: int
    value: float
    residual: float


@dataclass(frozen=True)
class TrichotomyReport:
    rows: list
    classifications: dict
    references: dict
    hold_tol: float
    fail_ratio: float

    def values(self, lam: float) -> list:
        return [r.value for r in self.rows if r.lam == lam]


def _reference_bound(domain: Domain2D, lam: float):
    """Closed-form continuum lower bounds for the quotient where known.

    Sector, full Dirichlet, lam = 1: separation of variables gives
    (pi/omega)^2.  Cusp of order alpha with Dirichlet walls and lam = alpha:
    slicing in the cross-section gives (pi/(y1-y0))^2 (r >= x makes the
    sliced weight dominate r^{-2 alpha}).  These bound the exact quotient;
    discrete values can undershoot the cusp bound because quadrature of the
    rapidly varying r^{-2 alpha} mass overestimates it on the deepest cells.
    """
    all_dirichlet = len(domain.dirichlet_curves()) == len(domain.boundary)
    if domain.template == "sector" and lam == 1.0 and all_dirichlet:
        return (math.pi / domain.params["omega"]) ** 2
    if domain.template == "cusp" and lam == domain.params["alpha"]:
        walls = set(domain.dirichlet_curves())
        if {"wall_lo", "wall_hi"} <= walls:
            y0, y1 = domain.params["b"]
            return (math.pi / (y1 - y0)) ** 2
    return None


def hardy_trichotomy(domain: Domain2D, lambdas, levels: int = 6,
                     L0: int = 6, n: int = 8, sigma: float = 0.5,
                     degree: int = 1, quad_degree: int = 6,
                     tol: float = 1e-10, hold_tol: float = HOLD_TOL,
                     fail_ratio: float = FAIL_RATIO,
                     workers: int = 1) -> TrichotomyReport:
    """lambda_min(lam, level) on self-similar meshes deepening one layer per
    level, with HOLDS/FAILS/INCONCLUSIVE classification per lam."""
    if levels < 3:
        raise InvalidParameterError("classification needs at least 3 levels")
    center = tuple(domain.singular_points[0].location)
    meshes = [grade_mesh(domain, H=0.5, L=L0 + k, sigma=sigma, n=n, mode="fixed-n")
              for k in range(levels)]
    spaces = [FESpace(m, degree) for m in meshes]

    rows: list[TrichotomyRow] = []
    classifications: dict[float, str] = {}
    references: dict[float, float | None] = {}
    for lam in lambdas:
        rho = Weight((RadialPower(float(lam), center),))
        vals = []
        for k, space in enumerate(spaces):
            res = hardy_constant(space, rho, tol=tol, quad_degree=quad_degree,
                                 workers=workers)
            rows.append(TrichotomyRow(float(lam), k, L0 + k, res.ndof_free,
                                      res.value, res.residual))
            vals.append(res.value)
        classifications[float(lam)] = classify_sequence(vals, hold_tol, fail_ratio)
        references[float(lam)] = _reference_bound(domain, float(lam))
    return TrichotomyReport(rows, classifications, references, hold_tol, fail_ratio)
