"""Deterministic graded triangulations of the singular domain templates.

Meshes are built layer by layer in each domain's natural chart (annular
rings for sectors, the (r, y) strip for cusps, (log r, theta) for
oscillating cones) so that element size follows the grading rule
h_j = H * sigma^{j(1-kappa)} in layer j.  Construction is pure arithmetic:
no randomized mesh generator, identical output on every run.

Angular resolution coarsens dyadically toward the singular point in sized
mode; fixed-n mode keeps a constant angular count and one row per layer,
which makes the mesh family exactly self-similar under x -> sigma*x (used
by the Hardy probes).  The innermost layer is closed by a vertex fan whose
elements are exempt from the shape-regularity check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import Domain2D, make_domain
from .errors import GradingError, InvalidParameterError
from .weights import Weight, eval_weight

__all__ = [
    "Mesh",
    "MeshQuality",
    "grade_mesh",
    "refine",
    "mesh_quality",
    "rectangle_mesh",
    "save_mesh",
    "load_mesh",
]

DEFAULT_THETA_MIN = 15.0


def boundary_tag(bc: str, curve_name: str) -> str:
    return ("d0:" if bc == "dirichlet" else "d1:") + curve_name


@dataclass
class Mesh:
    vertices: np.ndarray                      # (nv, 2) float
    triangles: np.ndarray                     # (nt, 3) int, CCW
    boundary_edges: list[tuple[int, int, str]]  # ordered with domain on the left
    grading: dict
    provenance: dict

    @property
    def nv(self) -> int:
        return len(self.vertices)

    @property
    def nt(self) -> int:
        return len(self.triangles)

    @property
    def fan_start(self) -> int:
        return self.grading.get("fan_start", self.nt)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def chart_coords(self) -> np.ndarray:
        """Vertex coordinates in the construction chart (identity if none)."""
        kind = self.grading.get("chart", "identity")
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        if kind == "identity":
            return self.vertices.copy()
        r = np.hypot(x, y)
        safe = np.where(r > 0, r, 1.0)
        if kind == "sector":
            theta = np.mod(np.arctan2(y, x), 2.0 * math.pi)
            return np.column_stack([np.log(safe), theta])
        if kind == "cusp":
            # the cusp straightens along the axis, not the radius
            alpha = self.grading["alpha"]
            safe_x = np.where(x > 0, x, 1.0)
            ybar = np.where(x > 0, y / safe_x**alpha, 0.0)
            return np.column_stack([np.log(safe_x), ybar])
        if kind == "logpolar":
            theta = np.mod(np.arctan2(y, x), 2.0 * math.pi)
            return np.column_stack([np.log(safe), theta])
        raise InvalidParameterError(f"unknown chart {kind!r}")

    def validate(self, theta_min_deg: float | None = None):
        """Conformity, orientation and chart shape-regularity (fan exempt)."""
        if theta_min_deg is None:
            theta_min_deg = self.grading.get("theta_min_deg", DEFAULT_THETA_MIN)
        areas = self.signed_areas()
        if areas.min() <= 0.0:
            bad = int(np.argmin(areas))
            raise GradingError(f"triangle {bad} is degenerate or mis-oriented")

        edges = np.sort(self.triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        if counts.max() > 2:
            raise GradingError("non-manifold edge: shared by more than two triangles")
        hanging = {tuple(e) for e in uniq[counts == 1]}
        tagged = {tuple(sorted((i, j))) for i, j, _ in self.boundary_edges}
        if hanging != tagged:
            raise GradingError(
                f"boundary mismatch: {len(hanging)} mesh boundary edges vs "
                f"{len(tagged)} tagged edges"
            )

        fan = self.fan_start
        if fan > 0:
            angles = _min_angles(self.chart_coords(), self.triangles[:fan])
            worst = int(np.argmin(angles))
            if angles[worst] < theta_min_deg:
                layer = self._layer_of(worst)
                raise GradingError(
                    f"layer {layer}: chart angle {angles[worst]:.2f} deg below "
                    f"threshold {theta_min_deg} deg", layer=layer,
                )

    def _layer_of(self, tri_index: int) -> int:
        sigma = self.grading.get("sigma")
        if not sigma:
            return 0
        c = self.vertices[self.triangles[tri_index]].mean(axis=0)
        r = math.hypot(c[0], c[1])
        if r <= 0:
            return self.grading.get("L", 0)
        return max(0, min(self.grading.get("L", 0), int(math.log(r) / math.log(sigma))))

    # ---- plain-text serialization (bit-exact round trip) ---------------

    def dumps(self) -> str:
        lines = [f"mesh v1 {self.nv} {self.nt} {len(self.boundary_edges)}"]
        for x, y in self.vertices:
            lines.append(f"v {float(x)!r} {float(y)!r}")
        for i, j, k in self.triangles:
            lines.append(f"t {i} {j} {k}")
        for i, j, tag in self.boundary_edges:
            lines.append(f"b {i} {j} {tag}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Mesh":
        lines = text.strip().split("\n")
        head = lines[0].split()
        if head[:2] != ["mesh", "v1"]:
            raise InvalidParameterError(f"bad mesh header: {lines[0]!r}")
        nv, nt, nb = (int(t) for t in head[2:5])
        if len(lines) != 1 + nv + nt + nb:
            raise InvalidParameterError("mesh file line count does not match header")
        verts = np.empty((nv, 2))
        for i in range(nv):
            tok = lines[1 + i].split()
            if tok[0] != "v":
                raise InvalidParameterError(f"expected vertex at line {i + 2}")
            verts[i] = [float(tok[1]), float(tok[2])]
        tris = np.empty((nt, 3), dtype=np.int64)
        for i in range(nt):
            tok = lines[1 + nv + i].split()
            if tok[0] != "t":
                raise InvalidParameterError(f"expected triangle at line {nv + i + 2}")
            tris[i] = [int(tok[1]), int(tok[2]), int(tok[3])]
        bedges = []
        for i in range(nb):
            tok = lines[1 + nv + nt + i].split()
            if tok[0] != "b":
                raise InvalidParameterError(f"expected boundary edge at line {nv + nt + i + 2}")
            bedges.append((int(tok[1]), int(tok[2]), tok[3]))
        return cls(verts, tris, bedges, {}, {})


def save_mesh(mesh: Mesh, path):
    with open(path, "w") as fh:
        fh.write(mesh.dumps())


def load_mesh(path) -> Mesh:
    with open(path) as fh:
        return Mesh.loads(fh.read())


def _min_angles(coords: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Smallest interior angle (degrees) per triangle in the given coords."""
    p = coords[triangles]
    out = np.full(len(triangles), 180.0)
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        cosang = np.clip((a * b).sum(axis=1) / (na * nb), -1.0, 1.0)
        out = np.minimum(out, np.degrees(np.arccos(cosang)))
    return out


@dataclass
class MeshQuality:
    min_angle: float          # physical degrees, all elements
    min_angle_graded: float   # physical degrees, fan excluded
    max_aspect: float         # longest edge / (2 * inradius), fan excluded
    n_elements: int
    h_min: float
    h_max: float
    g_min: float | None = None  # fan excluded
    g_max: float | None = None


def mesh_quality(mesh: Mesh, rho: Weight | None = None) -> MeshQuality:
    p = mesh.vertices[mesh.triangles]
    e0 = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
    e1 = np.linalg.norm(p[:, 2] - p[:, 1], axis=1)
    e2 = np.linalg.norm(p[:, 0] - p[:, 2], axis=1)
    h = np.maximum(np.maximum(e0, e1), e2)
    peri = e0 + e1 + e2
    area = np.abs(mesh.signed_areas())
    aspect = h * peri / (4.0 * area)
    angles = _min_angles(mesh.vertices, mesh.triangles)
    fan = mesh.fan_start
    body = slice(0, fan) if fan > 0 else slice(0, mesh.nt)
    g_min = g_max = None
    if rho is not None and fan > 0:
        centroids = p[body].mean(axis=1)
        gdiam = h[body] / eval_weight(rho, centroids)
        g_min, g_max = float(gdiam.min()), float(gdiam.max())
    return MeshQuality(
        min_angle=float(angles.min()),
        min_angle_graded=float(angles[body].min()) if fan > 0 else float(angles.min()),
        max_aspect=float(aspect[body].max()),
        n_elements=mesh.nt,
        h_min=float(h.min()),
        h_max=float(h.max()),
        g_min=g_min,
        g_max=g_max,
    )


# ---------------------------------------------------------------------------
# construction helpers


class _Builder:
    """Accumulates vertices/triangles/boundary edges in fixed order."""

    def __init__(self):
        self.verts: list[tuple[float, float]] = []
        self.tris: list[tuple[int, int, int]] = []
        self.bedges: list[tuple[int, int, str]] = []

    def add_vertices(self, pts: np.ndarray) -> np.ndarray:
        base = len(self.verts)
        self.verts.extend((float(x), float(y)) for x, y in pts)
        return np.arange(base, base + len(pts))

    def quad_rows(self, outer: np.ndarray, inner: np.ndarray):
        # outer/inner: vertex index rings of equal length, outer first
        for k in range(len(outer) - 1):
            self.tris.append((outer[k], outer[k + 1], inner[k + 1]))
            self.tris.append((outer[k], inner[k + 1], inner[k]))

    def transition_row(self, outer: np.ndarray, inner: np.ndarray):
        # 2:1 coarsening inward: len(outer) - 1 == 2 * (len(inner) - 1)
        for k in range(len(inner) - 1):
            self.tris.append((inner[k], outer[2 * k], outer[2 * k + 1]))
            self.tris.append((inner[k], outer[2 * k + 1], outer[2 * k + 2]))
            self.tris.append((inner[k], outer[2 * k + 2], inner[k + 1]))

    def fan(self, apex: int, ring: np.ndarray):
        for k in range(len(ring) - 1):
            self.tris.append((apex, ring[k], ring[k + 1]))

    def chain(self, vertex_path: list[int], tag: str):
        for a, b in zip(vertex_path[:-1], vertex_path[1:]):
            self.bedges.append((int(a), int(b), tag))

    def finish(self, grading: dict, provenance: dict) -> Mesh:
        return Mesh(
            np.asarray(self.verts, dtype=float),
            np.asarray(self.tris, dtype=np.int64),
            self.bedges,
            grading,
            provenance,
        )


def _layer_plan(H: float, kappa: float, L: int, sigma: float, n0: int,
                mode: str, extent: float = 2.0 * math.pi) -> list[tuple[int, int]]:
    """Per layer j: (angular count n_j, row count m_j)."""
    if mode == "fixed-n":
        return [(n0, 1) for _ in range(L)]
    rate = kappa * math.log2(1.0 / sigma)
    if rate > 1.0 + 1e-12:
        raise GradingError(
            f"kappa*log2(1/sigma) = {rate:.3f} > 1: angular coarsening would "
            "skip a dyadic level; decrease kappa or increase sigma"
        )
    aspect_cap = 2.4  # chart cell width/height keeping split angles > 20 deg
    plan = []
    n_cur = n0
    d_cur = 0
    for j in range(L):
        h_j = H * sigma ** (j * (1.0 - kappa))
        m_j = max(1, round(sigma**j * (1.0 - sigma) / h_j))
        d_target = int(math.floor(j * rate + 0.5))
        row_height = math.log(1.0 / sigma) / m_j
        if (d_target > d_cur and n_cur % 2 == 0 and n_cur // 2 >= 2
                and extent / (n_cur // 2) <= aspect_cap * row_height):
            n_cur //= 2
            d_cur += 1
        plan.append((n_cur, m_j))
    return plan


def _pow2_at_least(x: float) -> int:
    return max(2, 2 ** int(math.ceil(math.log2(max(x, 2.0)))))


def _sector_mesh(domain: Domain2D, H, kappa, L, sigma, n, mode, theta_min_deg) -> Mesh:
    omega = domain.params["omega"]
    if n is None:
        n = _pow2_at_least(omega / H) if mode == "sized" else 8
    plan = _layer_plan(H, kappa, L, sigma, n, mode, extent=omega)
    b = _Builder()

    def ring(radius: float, count: int) -> np.ndarray:
        theta = omega * np.arange(count + 1) / count
        pts = radius * np.column_stack([np.cos(theta), np.sin(theta)])
        return b.add_vertices(pts)

    rings = [ring(1.0, plan[0][0] if mode == "fixed-n" else n)]
    n_cur = n
    for j, (n_j, m_j) in enumerate(plan):
        r_out = sigma**j
        r_in = sigma ** (j + 1)
        radii = np.linspace(r_out, r_in, m_j + 1)[1:]
        for i, r in enumerate(radii):
            new = ring(float(r), n_j)
            if i == 0 and n_j != n_cur:
                b.transition_row(rings[-1], new)
            else:
                b.quad_rows(rings[-1], new)
            rings.append(new)
        n_cur = n_j

    apex = b.add_vertices(np.zeros((1, 2)))[0]
    b.fan(apex, rings[-1])
    fan_start = len(b.tris) - (len(rings[-1]) - 1)

    edge0 = [apex] + [r[0] for r in reversed(rings)]
    edge1 = [r[-1] for r in rings] + [apex]
    b.chain(edge0, boundary_tag(domain.curve("edge0").bc, "edge0"))
    b.chain(list(rings[0]), boundary_tag(domain.curve("arc").bc, "arc"))
    b.chain(edge1, boundary_tag(domain.curve("edge1").bc, "edge1"))

    grading = {"mode": mode, "H": H, "kappa": kappa, "L": L, "sigma": sigma,
               "n": n, "chart": "sector", "fan_start": fan_start,
               "theta_min_deg": theta_min_deg}
    prov = {"domain_args": {"template": "sector", "omega": omega,
                            "lam": domain.params.get("lam", 1.0),
                            "dirichlet": _dirichlet_of(domain)},
            "mesh_args": {"H": H, "kappa": kappa, "L": L, "sigma": sigma,
                          "n": n, "mode": mode, "theta_min_deg": theta_min_deg}}
    mesh = b.finish(grading, prov)
    mesh.validate(theta_min_deg)
    return mesh


def _cusp_mesh(domain: Domain2D, H, kappa, L, sigma, n, mode, theta_min_deg) -> Mesh:
    alpha = domain.params["alpha"]
    y0, y1 = domain.params["b"]
    if n is None:
        n = max(2, round((y1 - y0) / H)) if mode == "sized" else 8
    # transverse count is global in the straightened chart, so only the
    # m_j column of the plan matters here
    plan = _layer_plan(H, kappa, L, sigma, n, mode, extent=y1 - y0)

    # tensor grid in the chart: no angular transitions, n is global
    r_pts = [1.0]
    for j, (_, m_j) in enumerate(plan):
        r_pts.extend(np.linspace(sigma**j, sigma ** (j + 1), m_j + 1)[1:])
    r_pts = np.asarray(r_pts)          # descending from 1 to sigma^L
    ybar = np.linspace(y0, y1, n + 1)

    b = _Builder()
    cols = []
    for r in r_pts:
        pts = np.column_stack([np.full(n + 1, r), r**alpha * ybar])
        cols.append(b.add_vertices(pts))
    for outer, inner in zip(cols[:-1], cols[1:]):
        b.quad_rows(outer, inner)

    tip = b.add_vertices(np.zeros((1, 2)))[0]
    b.fan(tip, cols[-1])
    fan_start = len(b.tris) - n

    lo = [tip] + [c[0] for c in reversed(cols)]
    hi = [c[-1] for c in cols] + [tip]
    b.chain(lo, boundary_tag(domain.curve("wall_lo").bc, "wall_lo"))
    b.chain(list(cols[0]), boundary_tag(domain.curve("cap").bc, "cap"))
    b.chain(hi, boundary_tag(domain.curve("wall_hi").bc, "wall_hi"))

    grading = {"mode": mode, "H": H, "kappa": kappa, "L": L, "sigma": sigma,
               "n": n, "chart": "cusp", "alpha": alpha, "fan_start": fan_start,
               "theta_min_deg": theta_min_deg}
    prov = {"domain_args": {"template": "cusp", "alpha": alpha, "b": (y0, y1),
                            "lam": domain.params.get("lam"),
                            "dirichlet": _dirichlet_of(domain)},
            "mesh_args": {"H": H, "kappa": kappa, "L": L, "sigma": sigma,
                          "n": n, "mode": mode, "theta_min_deg": theta_min_deg}}
    mesh = b.finish(grading, prov)
    mesh.validate(theta_min_deg)
    return mesh


def _oscillating_mesh(domain: Domain2D, H, theta_min_deg) -> Mesh:
    f0 = domain.params["profile0"]
    f1 = domain.params["profile1"]
    depth = domain.params["depth"]
    gap_top = float(f1(0.0) - f0(0.0))
    m_t = max(2, round(depth / H))
    n_s = max(2, round(gap_top / H))

    t_pts = np.linspace(0.0, -depth, m_t + 1)   # outward first, like the layers
    s_pts = np.linspace(0.0, 1.0, n_s + 1)
    b = _Builder()
    rows = []
    for t in t_pts:
        theta = f0(np.full(n_s + 1, t)) + s_pts * (f1(t) - f0(t))
        pts = math.exp(t) * np.column_stack([np.cos(theta), np.sin(theta)])
        rows.append(b.add_vertices(pts))
    for outer, inner in zip(rows[:-1], rows[1:]):
        b.quad_rows(outer, inner)

    lo = [r[0] for r in reversed(rows)]
    hi = [r[-1] for r in rows]
    b.chain(lo, boundary_tag(domain.curve("wall_lo").bc, "wall_lo"))
    b.chain(list(rows[0]), boundary_tag(domain.curve("arc_outer").bc, "arc_outer"))
    b.chain(hi, boundary_tag(domain.curve("wall_hi").bc, "wall_hi"))
    inner_path = list(rows[-1][::-1])
    b.chain(inner_path, boundary_tag(domain.curve("arc_inner").bc, "arc_inner"))

    grading = {"mode": "chart-uniform", "H": H, "m_t": m_t, "n_s": n_s,
               "chart": "logpolar", "fan_start": len(b.tris),
               "theta_min_deg": theta_min_deg}
    prov = {"domain_args": {"template": "oscillating", "profile0": f0,
                            "profile1": f1, "depth": depth,
                            "lam": domain.params.get("lam", 1.0),
                            "dirichlet": _dirichlet_of(domain)},
            "mesh_args": {"H": H, "theta_min_deg": theta_min_deg}}
    mesh = b.finish(grading, prov)
    mesh.validate(theta_min_deg)
    return mesh


def _dirichlet_of(domain: Domain2D):
    names = domain.dirichlet_curves()
    if len(names) == len(domain.boundary):
        return "all"
    return tuple(names)


def grade_mesh(domain: Domain2D, H: float = 0.25, kappa: float = 1.0,
               L: int = 8, sigma: float = 0.5, n: int | None = None,
               mode: str = "sized",
               theta_min_deg: float = DEFAULT_THETA_MIN) -> Mesh:
    """Graded mesh of a domain template, quasi-uniform in the rescaled metric.

    H is the coarse element size, kappa in (0, 1] the grading exponent
    (kappa = 1 is quasi-uniform, smaller kappa grades harder toward the
    singular point), L the number of geometric layers of ratio sigma.
    mode 'fixed-n' keeps n angular intervals and one row per layer, giving
    an exactly self-similar family; 'sized' follows the h_j rule with
    dyadic angular coarsening.
    """
    if not 0.0 < H < 1.0:
        raise InvalidParameterError(f"coarse size H must lie in (0, 1), got {H}")
    if not 0.0 < kappa <= 1.0:
        raise InvalidParameterError(f"grading exponent must lie in (0, 1], got {kappa}")
    if L < 1:
        raise InvalidParameterError(f"layer count must be >= 1, got {L}")
    if not 0.0 < sigma < 1.0:
        raise InvalidParameterError(f"layer ratio must lie in (0, 1), got {sigma}")
    if mode not in ("sized", "fixed-n"):
        raise InvalidParameterError(f"unknown grading mode {mode!r}")
    if domain.template == "sector":
        return _sector_mesh(domain, H, kappa, L, sigma, n, mode, theta_min_deg)
    if domain.template == "cusp":
        return _cusp_mesh(domain, H, kappa, L, sigma, n, mode, theta_min_deg)
    if domain.template == "oscillating":
        return _oscillating_mesh(domain, H, theta_min_deg)
    raise InvalidParameterError(
        f"no grading rule for template {domain.template!r} (probe-only domain)"
    )


def rectangle_mesh(nx: int, ny: int, x0: float = 0.0, x1: float = 1.0,
                   y0: float = 0.0, y1: float = 1.0, dirichlet="all") -> Mesh:
    """Uniform right-triangle mesh of a rectangle (smooth-problem baseline)."""
    if nx < 1 or ny < 1:
        raise InvalidParameterError("rectangle mesh needs nx, ny >= 1")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    b = _Builder()
    rows = []
    for y in ys:
        rows.append(b.add_vertices(np.column_stack([xs, np.full(nx + 1, y)])))
    for lower, upper in zip(rows[:-1], rows[1:]):
        for k in range(nx):
            b.tris.append((lower[k], lower[k + 1], upper[k + 1]))
            b.tris.append((lower[k], upper[k + 1], upper[k]))

    def bc(name):
        if dirichlet == "all" or name in dirichlet:
            return "dirichlet"
        return "neumann"

    b.chain(list(rows[0]), boundary_tag(bc("bottom"), "bottom"))
    b.chain([r[-1] for r in rows], boundary_tag(bc("right"), "right"))
    b.chain(list(rows[-1][::-1]), boundary_tag(bc("top"), "top"))
    b.chain([r[0] for r in reversed(rows)], boundary_tag(bc("left"), "left"))

    grading = {"mode": "rectangle", "nx": nx, "ny": ny, "chart": "identity",
               "fan_start": len(b.tris), "theta_min_deg": DEFAULT_THETA_MIN}
    prov = {"domain_args": {"template": "rectangle", "x0": x0, "x1": x1,
                            "y0": y0, "y1": y1, "dirichlet": dirichlet},
            "mesh_args": {"nx": nx, "ny": ny}}
    mesh = b.finish(grading, prov)
    mesh.validate()
    return mesh


def refine(mesh: Mesh) -> Mesh:
    """Rebuild from provenance with H halved and resolution-consistent depth.

    The layer count grows by round(1/kappa) so the innermost resolved scale
    sigma^L keeps pace with the halved element size (the layer at which
    h_j ~ sigma^j moves inward by 1/kappa layers per halving of H).
    """
    if not mesh.provenance:
        raise InvalidParameterError("mesh carries no provenance; cannot refine")
    dom_args = dict(mesh.provenance["domain_args"])
    margs = dict(mesh.provenance["mesh_args"])
    template = dom_args.pop("template")
    if template == "rectangle":
        return rectangle_mesh(2 * margs["nx"], 2 * margs["ny"],
                              x0=dom_args["x0"], x1=dom_args["x1"],
                              y0=dom_args["y0"], y1=dom_args["y1"],
                              dirichlet=dom_args.get("dirichlet", "all"))
    if dom_args.get("lam") is None:
        dom_args.pop("lam", None)
    domain = make_domain(template, **dom_args)
    if template == "oscillating":
        return grade_mesh(domain, H=margs["H"] / 2.0,
                          theta_min_deg=margs["theta_min_deg"])
    kappa = margs["kappa"]
    return grade_mesh(
        domain,
        H=margs["H"] / 2.0,
        kappa=kappa,
        L=margs["L"] + max(1, round(1.0 / kappa)),
        sigma=margs["sigma"],
        n=2 * margs["n"],
        mode=margs["mode"],
        theta_min_deg=margs["theta_min_deg"],
    )
