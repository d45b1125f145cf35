"""P1/P2 Lagrange elements for the variational form int a(grad u, grad v) + c u v.

Assembly is a chunked element loop (fixed chunk size, chunk-ordered COO
concatenation) so results are bit-identical for any worker count.  Dirichlet
conditions are eliminated symmetrically; conormal (Neumann) data enters the
load vector through edge quadrature.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg as _cg
from scipy.sparse.linalg import splu

from .errors import InvalidParameterError, SolverError
from .meshing import Mesh
from .metric import CoefficientField
from .weights import Weight, eval_weight

__all__ = [
    "triangle_rule",
    "FESpace",
    "FEFunction",
    "SparseSystem",
    "ConstrainedSystem",
    "assemble",
    "assemble_blocks",
    "apply_bc",
    "solve",
    "SolveInfo",
    "interpolate",
    "manufactured_problem",
    "ManufacturedProblem",
    "save_csr",
    "load_csr",
    "write_function_csv",
]

ASSEMBLY_CHUNK = 32768  # elements per chunk, fixed for determinism


def _perms3(a: float, b: float, c: float) -> list[tuple[float, float, float]]:
    seen: list[tuple[float, float, float]] = []
    for p in ((a, b, c), (b, c, a), (c, a, b), (a, c, b), (c, b, a), (b, a, c)):
        if p not in seen:
            seen.append(p)
    return seen


def _build_rules() -> dict[int, tuple[np.ndarray, np.ndarray]]:
    rules = {}
    pts, wts = [], []
    for w, tri in [
        (0.223381589678011, (0.108103018168070, 0.445948490915965, 0.445948490915965)),
        (0.109951743655322, (0.816847572980459, 0.091576213509771, 0.091576213509771)),
    ]:
        for p in _perms3(*tri):
            pts.append(p)
            wts.append(w)
    rules[4] = (np.array(pts), np.array(wts))
    pts, wts = [], []
    for w, tri in [
        (0.050844906370207, (0.873821971016996, 0.063089014491502, 0.063089014491502)),
        (0.116786275726379, (0.501426509658179, 0.249286745170910, 0.249286745170910)),
        (0.082851075618374, (0.636502499121399, 0.310352451033785, 0.053145049844816)),
    ]:
        for p in _perms3(*tri):
            pts.append(p)
            wts.append(w)
    rules[6] = (np.array(pts), np.array(wts))
    return rules


_TRIANGLE_RULES = _build_rules()

# 3-point Gauss on [0, 1], exact through degree 5
_EDGE_T = np.array([0.5 - 0.5 * math.sqrt(0.6), 0.5, 0.5 + 0.5 * math.sqrt(0.6)])
_EDGE_W = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])


def triangle_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """(barycentric points (q, 3), weights summing to 1) for the degree."""
    if degree not in _TRIANGLE_RULES:
        raise InvalidParameterError(f"no triangle quadrature of degree {degree}")
    return _TRIANGLE_RULES[degree]


def _basis_values(degree: int, bary: np.ndarray) -> np.ndarray:
    """(q, ndof_local) shape-function values at barycentric points."""
    if degree == 1:
        return bary.copy()
    if degree == 2:
        l0, l1, l2 = bary[:, 0], bary[:, 1], bary[:, 2]
        return np.column_stack([
            l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
            4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0,
        ])
    raise InvalidParameterError(f"unsupported polynomial degree {degree}")


def _bary_gradients(verts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-element gradients of the barycentric coordinates.

    verts: (e, 3, 2).  Returns (gradL (e, 3, 2), double_area (e,)).
    """
    x = verts[:, :, 0]
    y = verts[:, :, 1]
    two_a = ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
             - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))
    grad = np.empty_like(verts)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        grad[:, i, 0] = (y[:, j] - y[:, k]) / two_a
        grad[:, i, 1] = (x[:, k] - x[:, j]) / two_a
    return grad, two_a


def _basis_gradients(degree: int, bary: np.ndarray, grad_l: np.ndarray) -> np.ndarray:
    """(e, q, ndof_local, 2) physical shape-function gradients."""
    e = grad_l.shape[0]
    q = bary.shape[0]
    if degree == 1:
        return np.broadcast_to(grad_l[:, None, :, :], (e, q, 3, 2)).copy()
    out = np.empty((e, q, 6, 2))
    for i in range(3):
        out[:, :, i, :] = (4.0 * bary[None, :, i, None] - 1.0) * grad_l[:, None, i, :]
    for d, (i, j) in enumerate(((0, 1), (1, 2), (2, 0)), start=3):
        out[:, :, d, :] = 4.0 * (bary[None, :, i, None] * grad_l[:, None, j, :]
                                 + bary[None, :, j, None] * grad_l[:, None, i, :])
    return out


class FESpace:
    """Lagrange space on a mesh: degree 1 (vertices) or 2 (vertices + edges)."""

    def __init__(self, mesh: Mesh, degree: int = 1):
        if degree not in (1, 2):
            raise InvalidParameterError(f"polynomial degree must be 1 or 2, got {degree}")
        self.mesh = mesh
        self.degree = degree
        tris = mesh.triangles
        if degree == 1:
            self.cell_dofs = tris.copy()
            self.ndof = mesh.nv
            self._edge_ids: dict[tuple[int, int], int] = {}
        else:
            keys = np.sort(tris[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), axis=1)
            uniq = np.unique(keys, axis=0)
            self._edge_ids = {(int(i), int(j)): mesh.nv + k
                              for k, (i, j) in enumerate(uniq)}
            self.ndof = mesh.nv + len(uniq)
            cd = np.empty((mesh.nt, 6), dtype=np.int64)
            cd[:, :3] = tris
            for col, (i, j) in enumerate(((0, 1), (1, 2), (2, 0)), start=3):
                for t in range(mesh.nt):
                    a, b = int(tris[t, i]), int(tris[t, j])
                    cd[t, col] = self._edge_ids[(a, b) if a < b else (b, a)]
            self.cell_dofs = cd
        self.dof_coords = self._dof_coords()
        self.dirichlet_dofs = self._dirichlet_dofs()

    def _dof_coords(self) -> np.ndarray:
        coords = np.empty((self.ndof, 2))
        coords[: self.mesh.nv] = self.mesh.vertices
        for (i, j), d in self._edge_ids.items():
            coords[d] = 0.5 * (self.mesh.vertices[i] + self.mesh.vertices[j])
        return coords

    def edge_dof(self, i: int, j: int) -> int:
        return self._edge_ids[(i, j) if i < j else (j, i)]

    def _dirichlet_dofs(self) -> np.ndarray:
        dofs = set()
        for i, j, tag in self.mesh.boundary_edges:
            if tag.startswith("d0:"):
                dofs.add(i)
                dofs.add(j)
                if self.degree == 2:
                    dofs.add(self.edge_dof(i, j))
        return np.array(sorted(dofs), dtype=np.int64)

    # ---- element-local evaluation (used by norms and error integrals) ----

    def quad_points(self, bary: np.ndarray) -> np.ndarray:
        verts = self.mesh.vertices[self.mesh.triangles]
        return np.einsum("qi,eix->eqx", bary, verts)

    def element_values(self, coeffs: np.ndarray, bary: np.ndarray) -> np.ndarray:
        vals = _basis_values(self.degree, bary)
        return np.einsum("qn,en->eq", vals, coeffs[self.cell_dofs])

    def element_gradients(self, coeffs: np.ndarray, bary: np.ndarray) -> np.ndarray:
        verts = self.mesh.vertices[self.mesh.triangles]
        grad_l, _ = _bary_gradients(verts)
        grads = _basis_gradients(self.degree, bary, grad_l)
        return np.einsum("eqnx,en->eqx", grads, coeffs[self.cell_dofs])

    def areas(self) -> np.ndarray:
        verts = self.mesh.vertices[self.mesh.triangles]
        _, two_a = _bary_gradients(verts)
        return 0.5 * two_a


@dataclass
class FEFunction:
    space: FESpace
    coeffs: np.ndarray
    components: int = 1

    def __post_init__(self):
        expected = self.space.ndof * self.components
        if len(self.coeffs) != expected:
            raise InvalidParameterError(
                f"coefficient length {len(self.coeffs)} != dof count {expected}"
            )

    def component(self, c: int) -> np.ndarray:
        return self.coeffs[c::self.components]


def write_function_csv(u: FEFunction, path):
    coords = u.space.dof_coords
    with open(path, "w") as fh:
        if u.components == 1:
            fh.write("dof,x,y,value\n")
            for d in range(u.space.ndof):
                fh.write(f"{d},{float(coords[d, 0])!r},{float(coords[d, 1])!r},"
                         f"{float(u.coeffs[d])!r}\n")
        else:
            cols = ",".join(f"value{c}" for c in range(u.components))
            fh.write(f"dof,x,y,{cols}\n")
            for d in range(u.space.ndof):
                vals = ",".join(repr(float(u.coeffs[d * u.components + c]))
                                for c in range(u.components))
                fh.write(f"{d},{float(coords[d, 0])!r},{float(coords[d, 1])!r},{vals}\n")


@dataclass
class SparseSystem:
    A: sp.csr_matrix
    M: sp.csr_matrix
    M_w: sp.csr_matrix | None
    b: np.ndarray
    space: FESpace
    has_zeroth: bool
    components: int = 1

    def check_symmetry(self, tol: float = 1e-12):
        for name, mat in (("A", self.A), ("M", self.M), ("M_w", self.M_w)):
            if mat is None:
                continue
            skew = abs(mat - mat.T).max()
            scale = abs(mat).max()
            if skew > tol * max(scale, 1.0):
                raise SolverError(f"assembled {name} is not symmetric: |K-K'| = {skew:g}")


def _evaluate_c(c, pts: np.ndarray) -> np.ndarray | None:
    if c is None:
        return None
    if callable(c):
        return np.asarray(c(pts), dtype=float)
    if float(c) == 0.0:
        return None
    return np.full(len(pts), float(c))


def _chunk_matrices(space: FESpace, lo: int, hi: int, bary, wq, a_field,
                    c, w: Weight | None, rhs):
    mesh = space.mesh
    tris = mesh.triangles[lo:hi]
    verts = mesh.vertices[tris]
    grad_l, two_a = _bary_gradients(verts)
    area = 0.5 * two_a
    vals = _basis_values(space.degree, bary)              # (q, nd)
    grads = _basis_gradients(space.degree, bary, grad_l)  # (e, q, nd, 2)
    pts = np.einsum("qi,eix->eqx", bary, verts)           # (e, q, 2)
    flat = pts.reshape(-1, 2)

    a_vals = a_field.a_at(flat).reshape(len(tris), len(wq), 2, 2)
    a_loc = np.einsum("q,eqmi,eqij,eqnj->emn", wq, grads, a_vals, grads)
    c_vals = _evaluate_c(c, flat)
    if c_vals is not None:
        c_vals = c_vals.reshape(len(tris), len(wq))
        a_loc += np.einsum("q,qm,qn,eq->emn", wq, vals, vals, c_vals)
    a_loc *= area[:, None, None]
    a_loc = 0.5 * (a_loc + np.swapaxes(a_loc, 1, 2))

    m_ref = np.einsum("q,qm,qn->mn", wq, vals, vals)
    m_loc = m_ref[None, :, :] * area[:, None, None]

    mw_loc = None
    if w is not None:
        w_vals = eval_weight(w, flat).reshape(len(tris), len(wq))
        mw_loc = np.einsum("q,qm,qn,eq->emn", wq, vals, vals, w_vals**-2.0)
        mw_loc *= area[:, None, None]
        mw_loc = 0.5 * (mw_loc + np.swapaxes(mw_loc, 1, 2))

    b_loc = None
    if rhs is not None:
        f_vals = np.asarray(rhs(flat), dtype=float).reshape(len(tris), len(wq))
        b_loc = np.einsum("q,qm,eq->em", wq, vals, f_vals) * area[:, None]

    dofs = space.cell_dofs[lo:hi]
    nd = dofs.shape[1]
    rows = np.repeat(dofs, nd, axis=1).ravel()
    cols = np.tile(dofs, (1, nd)).ravel()
    return rows, cols, a_loc.ravel(), m_loc.ravel(), \
        (mw_loc.ravel() if mw_loc is not None else None), b_loc, dofs


def assemble(space: FESpace, a: CoefficientField | None = None, c=None,
             w: Weight | None = None, rhs=None, quad_degree: int = 4,
             workers: int = 1) -> SparseSystem:
    """Stiffness, mass, optional weighted mass int w^{-2} u v, and load.

    Elements are processed in fixed chunks; per-chunk COO blocks are
    concatenated in chunk order, so the result does not depend on workers.
    """
    if a is None:
        a = CoefficientField("identity", np.eye(2))
    bary, wq = triangle_rule(quad_degree)
    nt = space.mesh.nt
    chunks = [(lo, min(lo + ASSEMBLY_CHUNK, nt)) for lo in range(0, nt, ASSEMBLY_CHUNK)]

    def work(bounds):
        return _chunk_matrices(space, bounds[0], bounds[1], bary, wq, a, c, w, rhs)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(ch) for ch in chunks]

    rows = np.concatenate([r[0] for r in results])
    cols = np.concatenate([r[1] for r in results])
    a_dat = np.concatenate([r[2] for r in results])
    m_dat = np.concatenate([r[3] for r in results])
    n = space.ndof
    A = sp.coo_matrix((a_dat, (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((m_dat, (rows, cols)), shape=(n, n)).tocsr()
    M_w = None
    if w is not None:
        mw_dat = np.concatenate([r[4] for r in results])
        M_w = sp.coo_matrix((mw_dat, (rows, cols)), shape=(n, n)).tocsr()
    b = np.zeros(n)
    if rhs is not None:
        for r in results:
            np.add.at(b, r[6].ravel(), r[5].ravel())

    has_zeroth = c is not None and (callable(c) or float(c) != 0.0)
    system = SparseSystem(A, M, M_w, b, space, has_zeroth)
    system.check_symmetry()
    return system


def assemble_blocks(space: FESpace, fields, w: Weight | None = None,
                    rhs_list=None, quad_degree: int = 4,
                    workers: int = 1) -> SparseSystem:
    """Block-diagonal d-component system with interleaved dofs.

    fields: one (a, c) CoefficientField per component.  Component c of dof i
    is global dof i*d + c.
    """
    d = len(fields)
    blocks = []
    for comp, field in enumerate(fields):
        rhs = rhs_list[comp] if rhs_list is not None else None
        blocks.append(assemble(space, field, c=field._c, w=w, rhs=rhs,
                               quad_degree=quad_degree, workers=workers))
    unit = [sp.csr_matrix(([1.0], ([k], [k])), shape=(d, d)) for k in range(d)]
    A = sum(sp.kron(blocks[k].A, unit[k], format="csr") for k in range(d))
    M = sp.kron(blocks[0].M, sp.identity(d, format="csr"), format="csr")
    M_w = None
    if w is not None:
        M_w = sp.kron(blocks[0].M_w, sp.identity(d, format="csr"), format="csr")
    b = np.column_stack([blk.b for blk in blocks]).ravel()
    has_zeroth = any(blk.has_zeroth for blk in blocks)
    return SparseSystem(A, M, M_w, b, space, has_zeroth, components=d)


@dataclass
class ConstrainedSystem:
    A: sp.csr_matrix
    b: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    space: FESpace
    components: int = 1

    @property
    def ndof_free(self) -> int:
        return len(self.free)

    def constrain_matrix(self, K: sp.csr_matrix) -> sp.csr_matrix:
        return K[self.free][:, self.free].tocsr()

    def embed(self, x_free: np.ndarray) -> np.ndarray:
        full = np.zeros(self.space.ndof * self.components)
        full[self.free] = x_free
        full[self.fixed] = self.fixed_values
        return full


def _edge_load(space: FESpace, neumann) -> np.ndarray:
    """Conormal-flux contribution: int_{d1} g phi ds per tagged edge."""
    b = np.zeros(space.ndof)
    verts = space.mesh.vertices
    for i, j, tag in space.mesh.boundary_edges:
        if not tag.startswith("d1:"):
            continue
        p0, p1 = verts[i], verts[j]
        length = float(np.hypot(*(p1 - p0)))
        pts = p0[None, :] + _EDGE_T[:, None] * (p1 - p0)[None, :]
        tangent = (p1 - p0) / length
        normal = np.array([tangent[1], -tangent[0]])  # outward for CCW edges
        try:
            g = np.asarray(neumann(pts, np.broadcast_to(normal, (len(pts), 2))), dtype=float)
        except TypeError:
            g = np.asarray(neumann(pts), dtype=float)
        if space.degree == 1:
            phis = np.column_stack([1.0 - _EDGE_T, _EDGE_T])
            dofs = [i, j]
        else:
            l = _EDGE_T
            phis = np.column_stack([(1 - l) * (1 - 2 * l), l * (2 * l - 1), 4 * l * (1 - l)])
            dofs = [i, j, space.edge_dof(i, j)]
        b[dofs] += length * (phis * (_EDGE_W * g)[:, None]).sum(axis=0)
    return b


def apply_bc(system: SparseSystem, dirichlet=None, neumann=None) -> ConstrainedSystem:
    """Eliminate Dirichlet dofs symmetrically; add Neumann edge quadrature.

    dirichlet: None (homogeneous), a constant, or callable pts -> values.
    neumann: callable pts -> flux or (pts, normals) -> flux, on d1 edges.
    """
    space = system.space
    d = system.components
    scalar_fixed = space.dirichlet_dofs
    if d == 1:
        fixed = scalar_fixed
    else:
        fixed = np.sort(np.concatenate([scalar_fixed * d + k for k in range(d)]))
    n = space.ndof * d

    if len(fixed) == 0 and not system.has_zeroth:
        warnings.warn("pure Neumann system with c = 0 is singular (constant nullspace)")

    b = system.b.copy()
    if neumann is not None:
        edge = _edge_load(space, neumann)
        if d == 1:
            b += edge
        else:
            for k in range(d):
                b[k::d] += edge

    if len(fixed) == 0:
        values = np.zeros(0)
    elif dirichlet is None:
        values = np.zeros(len(fixed))
    elif callable(dirichlet):
        coords = space.dof_coords[fixed // d] if d > 1 else space.dof_coords[fixed]
        values = np.asarray(dirichlet(coords), dtype=float)
    else:
        values = np.full(len(fixed), float(dirichlet))

    free = np.setdiff1d(np.arange(n), fixed, assume_unique=False)
    A_ff = system.A[free][:, free].tocsr()
    b_f = b[free]
    if len(fixed) and np.any(values != 0.0):
        b_f = b_f - system.A[free][:, fixed] @ values
    return ConstrainedSystem(A_ff, b_f, free, fixed, values, space, components=d)


@dataclass
class SolveInfo:
    method: str
    iterations: int
    residual: float


def _solve_cholesky(A: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
    lu = splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A",
              diag_pivot_thresh=0.0, options={"SymmetricMode": True})
    if np.any(lu.U.diagonal() <= 0.0):
        raise SolverError("indefinite pivot: constrained system is not positive definite")
    return lu.solve(b)


def solve(constrained: ConstrainedSystem, method: str = "auto",
          tol: float = 1e-10) -> tuple[FEFunction, SolveInfo]:
    """Solve the constrained SPD system; returns the full-dof FE function."""
    A, b = constrained.A, constrained.b
    n = constrained.ndof_free
    if n == 0:
        raise SolverError("no free degrees of freedom")
    if method == "auto":
        method = "cholesky" if n <= 20000 else "cg"
    if method == "cholesky":
        x = _solve_cholesky(A, b)
        res = float(np.linalg.norm(A @ x - b) / max(np.linalg.norm(b), 1e-300))
        info = SolveInfo("cholesky", 1, res)
    elif method == "cg":
        diag = A.diagonal()
        if np.any(diag <= 0.0):
            raise SolverError("non-positive diagonal entry; cannot Jacobi-precondition")
        precond = sp.diags(1.0 / diag)
        count = {"n": 0}

        def cb(_):
            count["n"] += 1

        x, flag = _cg(A, b, rtol=tol, atol=0.0, maxiter=10 * n, M=precond, callback=cb)
        res = float(np.linalg.norm(A @ x - b) / max(np.linalg.norm(b), 1e-300))
        if flag != 0:
            raise SolverError(
                f"cg failed to converge in {count['n']} iterations, residual {res:g}"
            )
        info = SolveInfo("cg", count["n"], res)
    else:
        raise InvalidParameterError(f"unknown solver {method!r}")
    u = FEFunction(constrained.space, constrained.embed(x),
                   components=constrained.components)
    return u, info


def interpolate(space: FESpace, fn) -> FEFunction:
    return FEFunction(space, np.asarray(fn(space.dof_coords), dtype=float))


# ---------------------------------------------------------------------------
# manufactured solutions


@dataclass
class ManufacturedProblem:
    name: str
    u: object            # pts -> values
    grad_u: object       # pts -> (n, 2)
    rhs: object          # pts -> values, equals -div(a grad u) + c u
    a: CoefficientField
    c: float = 0.0

    def flux(self, pts: np.ndarray, normals: np.ndarray) -> np.ndarray:
        a_vals = self.a.a_at(pts)
        return np.einsum("nij,nj,ni->n", a_vals, self.grad_u(pts), normals)


def manufactured_problem(domain, name: str) -> ManufacturedProblem:
    """Catalog of closed-form exact solutions with analytic data.

    corner: harmonic r^gamma sin(gamma theta), gamma = pi/omega, zero on the
    radial edges of a sector.  smooth: sin(pi x) sin(pi y).  affine: exact
    for P1 including conormal data.  cusp-chart: polynomial in the cusp
    chart coordinates, vanishing on the lateral walls.
    """
    identity = CoefficientField("identity", np.eye(2))
    if name == "corner":
        if domain.template != "sector":
            raise InvalidParameterError("corner solution needs a sector domain")
        gamma = math.pi / domain.params["omega"]

        def u(p):
            r = np.hypot(p[:, 0], p[:, 1])
            th = np.mod(np.arctan2(p[:, 1], p[:, 0]), 2.0 * math.pi)
            return r**gamma * np.sin(gamma * th)

        def grad(p):
            r = np.hypot(p[:, 0], p[:, 1])
            th = np.mod(np.arctan2(p[:, 1], p[:, 0]), 2.0 * math.pi)
            rg = gamma * r ** (gamma - 1.0)
            return np.column_stack([rg * np.sin((gamma - 1.0) * th),
                                    rg * np.cos((gamma - 1.0) * th)])

        return ManufacturedProblem("corner", u, grad,
                                   lambda p: np.zeros(len(p)), identity)

    if name == "smooth":
        def u(p):
            return np.sin(math.pi * p[:, 0]) * np.sin(math.pi * p[:, 1])

        def grad(p):
            sx, cx = np.sin(math.pi * p[:, 0]), np.cos(math.pi * p[:, 0])
            sy, cy = np.sin(math.pi * p[:, 1]), np.cos(math.pi * p[:, 1])
            return math.pi * np.column_stack([cx * sy, sx * cy])

        def rhs(p):
            return 2.0 * math.pi**2 * u(p)

        return ManufacturedProblem("smooth", u, grad, rhs, identity)

    if name == "affine":
        c0, cx, cy = 0.5, 2.0, -3.0

        def u(p):
            return c0 + cx * p[:, 0] + cy * p[:, 1]

        def grad(p):
            return np.broadcast_to(np.array([cx, cy]), (len(p), 2)).copy()

        return ManufacturedProblem("affine", u, grad,
                                   lambda p: np.zeros(len(p)), identity)

    if name == "cusp-chart":
        if domain.template != "cusp":
            raise InvalidParameterError("cusp-chart solution needs a cusp domain")
        alpha = domain.params["alpha"]

        # u = x(1-x) w, w = 1 - (y/x^alpha)^2; vanishes on walls and cap
        def parts(p):
            x, y = p[:, 0], p[:, 1]
            xs = np.where(x > 0, x, 1.0)
            w = 1.0 - y**2 * xs ** (-2.0 * alpha)
            wx = 2.0 * alpha * y**2 * xs ** (-2.0 * alpha - 1.0)
            wy = -2.0 * y * xs ** (-2.0 * alpha)
            wxx = -2.0 * alpha * (2.0 * alpha + 1.0) * y**2 * xs ** (-2.0 * alpha - 2.0)
            wyy = -2.0 * xs ** (-2.0 * alpha)
            return x, w, wx, wy, wxx, wyy

        def u(p):
            x, w, *_ = parts(p)
            return np.where(p[:, 0] > 0, x * (1.0 - x) * w, 0.0)

        def grad(p):
            x, w, wx, wy, _, _ = parts(p)
            ax = x * (1.0 - x)
            gx = (1.0 - 2.0 * x) * w + ax * wx
            gy = ax * wy
            inside = p[:, 0] > 0
            return np.column_stack([np.where(inside, gx, 0.0),
                                    np.where(inside, gy, 0.0)])

        def rhs(p):
            x, w, wx, _, wxx, wyy = parts(p)
            ax = x * (1.0 - x)
            lap = -2.0 * w + 2.0 * (1.0 - 2.0 * x) * wx + ax * (wxx + wyy)
            return np.where(p[:, 0] > 0, -lap, 0.0)

        return ManufacturedProblem("cusp-chart", u, grad, rhs, identity)

    raise InvalidParameterError(f"unknown manufactured problem {name!r}")


# ---------------------------------------------------------------------------
# CSR debug serialization


def save_csr(K: sp.csr_matrix, path):
    K = K.tocsr()
    K.sum_duplicates()
    with open(path, "w") as fh:
        fh.write(f"csr v1 {K.shape[0]} {K.nnz}\n")
        fh.write("p " + " ".join(str(int(v)) for v in K.indptr) + "\n")
        fh.write("i " + " ".join(str(int(v)) for v in K.indices) + "\n")
        fh.write("x " + " ".join(repr(float(v)) for v in K.data) + "\n")


def load_csr(path) -> sp.csr_matrix:
    with open(path) as fh:
        head = fh.readline().split()
        if head[:2] != ["csr", "v1"]:
            raise InvalidParameterError("bad csr header")
        n = int(head[2])
        indptr = np.array(fh.readline().split()[1:], dtype=np.int64)
        indices = np.array(fh.readline().split()[1:], dtype=np.int64)
        data = np.array(fh.readline().split()[1:], dtype=float)
    return sp.csr_matrix((data, indices, indptr), shape=(n, n))
