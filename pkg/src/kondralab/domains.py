"""Planar domain templates with explicit singular-point records.

Every domain carries a list of singular boundary points (conical, cusp or
oscillating type), a list of smooth boundary curves meeting only at those
points, and enough chart structure for graded meshing and sampling.  Boundary
curves are oriented counter-clockwise (domain on the left); the inward unit
normal is the tangent rotated by +90 degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .weights import (
    Constant,
    ExponentialCusp,
    MollifiedDistancePower,
    RadialPower,
    Weight,
    as_points,
)

__all__ = [
    "SingularPoint",
    "BoundaryCurve",
    "Segment",
    "Arc",
    "CuspWall",
    "OscillatingWall",
    "TrigPoly",
    "Domain2D",
    "make_domain",
    "distance_to_singular_set",
    "bounded_geometry_weight",
    "admissible_scale_weight",
]

DIRICHLET = "dirichlet"
NEUMANN = "neumann"


@dataclass(frozen=True)
class SingularPoint:
    """A boundary point where smoothness of the boundary fails.

    kind is one of 'conical' (opening angle in (0, 2*pi]), 'cusp' (order
    alpha > 1) or 'oscillating'.  lam is the weight exponent attached to the
    point; epsilon the admissibility parameter (0 when lam = 1).  doubled
    marks points approached by two distinct boundary branches.
    """

    location: tuple[float, float]
    kind: str
    lam: float = 1.0
    opening: float | None = None
    order: float | None = None
    epsilon: float = 0.0
    doubled: bool = False

    def __post_init__(self):
        if self.kind not in ("conical", "cusp", "oscillating"):
            raise InvalidParameterError(f"unknown singular point kind {self.kind!r}")
        if not self.lam > 0:
            raise InvalidParameterError(f"weight exponent must be positive, got {self.lam}")
        if self.kind == "conical":
            if self.opening is None or not (0.0 < self.opening <= 2.0 * math.pi):
                raise InvalidParameterError(
                    f"conical opening must lie in (0, 2*pi], got {self.opening}"
                )
        if self.kind == "cusp":
            if self.order is None or not self.order > 1.0:
                raise InvalidParameterError(f"cusp order must exceed 1, got {self.order}")


class BoundaryCurve:
    """Base class: a smooth curve t in [0, 1] -> R^2 with derivatives."""

    name: str
    bc: str

    def point(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def velocity(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def acceleration(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # derived quantities, shared by all curve types

    def unit_tangent(self, t: np.ndarray) -> np.ndarray:
        v = self.velocity(t)
        return v / np.linalg.norm(v, axis=-1, keepdims=True)

    def inward_normal(self, t: np.ndarray) -> np.ndarray:
        tan = self.unit_tangent(t)
        return np.stack([-tan[:, 1], tan[:, 0]], axis=-1)

    def signed_curvature(self, t: np.ndarray) -> np.ndarray:
        """kappa = (x'y'' - y'x'') / |v|^3 for the CCW orientation."""
        v = self.velocity(t)
        a = self.acceleration(t)
        cross = v[:, 0] * a[:, 1] - v[:, 1] * a[:, 0]
        return cross / np.linalg.norm(v, axis=-1) ** 3


@dataclass
class Segment(BoundaryCurve):
    name: str
    bc: str
    start: tuple[float, float]
    end: tuple[float, float]

    def point(self, t):
        t = np.asarray(t, dtype=float)[:, None]
        p0 = np.asarray(self.start)
        p1 = np.asarray(self.end)
        return p0 + t * (p1 - p0)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        d = np.asarray(self.end) - np.asarray(self.start)
        return np.broadcast_to(d, (len(t), 2)).copy()

    def acceleration(self, t):
        t = np.asarray(t, dtype=float)
        return np.zeros((len(t), 2))


@dataclass
class Arc(BoundaryCurve):
    """Circular arc from angle a0 to a1 (radians, traversed a0 -> a1)."""

    name: str
    bc: str
    center: tuple[float, float]
    radius: float
    a0: float
    a1: float

    def _angles(self, t):
        t = np.asarray(t, dtype=float)
        return self.a0 + t * (self.a1 - self.a0)

    def point(self, t):
        ang = self._angles(t)
        c = np.asarray(self.center)
        return c + self.radius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)

    def velocity(self, t):
        ang = self._angles(t)
        da = self.a1 - self.a0
        return self.radius * da * np.stack([-np.sin(ang), np.cos(ang)], axis=-1)

    def acceleration(self, t):
        ang = self._angles(t)
        da = self.a1 - self.a0
        return -self.radius * da * da * np.stack([np.cos(ang), np.sin(ang)], axis=-1)


@dataclass
class CuspWall(BoundaryCurve):
    """Pushforward of a horizontal chart line: r -> (r, y_wall * r^alpha).

    Parametrized from r = lo to r = hi (choose lo > hi to reverse orientation).
    """

    name: str
    bc: str
    y_wall: float
    alpha: float
    lo: float
    hi: float

    def _r(self, t):
        t = np.asarray(t, dtype=float)
        return self.lo + t * (self.hi - self.lo)

    def point(self, t):
        r = self._r(t)
        return np.stack([r, self.y_wall * r**self.alpha], axis=-1)

    def velocity(self, t):
        r = self._r(t)
        dr = self.hi - self.lo
        return dr * np.stack([np.ones_like(r), self.y_wall * self.alpha * r ** (self.alpha - 1.0)], axis=-1)

    def acceleration(self, t):
        r = self._r(t)
        dr = self.hi - self.lo
        a = self.alpha
        return dr * dr * np.stack(
            [np.zeros_like(r), self.y_wall * a * (a - 1.0) * r ** (a - 2.0)], axis=-1
        )


@dataclass(frozen=True)
class TrigPoly:
    """const + sum_k (cos_coeffs[k-1] cos(k t) + sin_coeffs[k-1] sin(k t))."""

    const: float
    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.const)
        for k, a in enumerate(self.cos_coeffs, start=1):
            out += a * np.cos(k * t)
        for k, b in enumerate(self.sin_coeffs, start=1):
            out += b * np.sin(k * t)
        return out

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for k, a in enumerate(self.cos_coeffs, start=1):
            out += -k * a * np.sin(k * t)
        for k, b in enumerate(self.sin_coeffs, start=1):
            out += k * b * np.cos(k * t)
        return out

    def deriv2(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for k, a in enumerate(self.cos_coeffs, start=1):
            out += -(k * k) * a * np.cos(k * t)
        for k, b in enumerate(self.sin_coeffs, start=1):
            out += -(k * k) * b * np.sin(k * t)
        return out


@dataclass
class OscillatingWall(BoundaryCurve):
    """Log-polar graph t -> e^t (cos f(t), sin f(t)) for t in [t_lo, t_hi]."""

    name: str
    bc: str
    profile: TrigPoly
    t_lo: float
    t_hi: float

    def _t(self, s):
        s = np.asarray(s, dtype=float)
        return self.t_lo + s * (self.t_hi - self.t_lo)

    def point(self, s):
        t = self._t(s)
        th = self.profile(t)
        return np.exp(t)[:, None] * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def velocity(self, s):
        t = self._t(s)
        dt = self.t_hi - self.t_lo
        th, dth = self.profile(t), self.profile.deriv(t)
        e = np.exp(t)
        # d/dt of e^t (cos th, sin th)
        vx = e * (np.cos(th) - dth * np.sin(th))
        vy = e * (np.sin(th) + dth * np.cos(th))
        return dt * np.stack([vx, vy], axis=-1)

    def acceleration(self, s):
        t = self._t(s)
        dt = self.t_hi - self.t_lo
        th, d1, d2 = self.profile(t), self.profile.deriv(t), self.profile.deriv2(t)
        e = np.exp(t)
        ax = e * ((1.0 - d1 * d1) * np.cos(th) - (2.0 * d1 + d2) * np.sin(th))
        ay = e * ((1.0 - d1 * d1) * np.sin(th) + (2.0 * d1 + d2) * np.cos(th))
        return dt * dt * np.stack([ax, ay], axis=-1)


@dataclass
class Domain2D:
    template: str
    params: dict
    singular_points: list[SingularPoint]
    boundary: list[BoundaryCurve]

    def curve(self, name: str) -> BoundaryCurve:
        for c in self.boundary:
            if c.name == name:
                return c
        raise InvalidParameterError(f"no boundary curve named {name!r} in {self.template}")

    def dirichlet_curves(self) -> list[str]:
        return [c.name for c in self.boundary if c.bc == DIRICHLET]

    # ---- sampling -----------------------------------------------------

    def sample_points(self, n_radial: int = 64, n_transverse: int = 64,
                      r_min: float = 1e-4) -> np.ndarray:
        """Deterministic tensor sample grid in the natural log chart."""
        if self.template == "sector":
            omega = self.params["omega"]
            r = np.geomspace(r_min, 1.0, n_radial)
            th = np.linspace(0.0, omega, n_transverse)
            rr, tt = np.meshgrid(r, th, indexing="ij")
            return np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])
        if self.template == "cusp":
            alpha = self.params["alpha"]
            y0, y1 = self.params["b"]
            r = np.geomspace(max(r_min, self.params["r_cut_sample"]), 1.0, n_radial)
            y = np.linspace(y0, y1, n_transverse)
            rr, yy = np.meshgrid(r, y, indexing="ij")
            return np.column_stack([rr.ravel(), (rr**alpha * yy).ravel()])
        if self.template == "oscillating":
            depth = self.params["depth"]
            f0, f1 = self.params["profile0"], self.params["profile1"]
            t = np.linspace(-depth, 0.0, n_radial)
            s = np.linspace(0.0, 1.0, n_transverse)
            tt, ss = np.meshgrid(t, s, indexing="ij")
            th = f0(tt) + ss * (f1(tt) - f0(tt))
            return np.column_stack([(np.exp(tt) * np.cos(th)).ravel(),
                                    (np.exp(tt) * np.sin(th)).ravel()])
        if self.template == "circle-cusp":
            return self._circle_cusp_grid(n_radial, n_transverse, r_min)
        raise InvalidParameterError(f"no sample chart for template {self.template!r}")

    def _circle_cusp_grid(self, nx, ny, r_min):
        x = np.linspace(-2.0, 2.0, 2 * nx + 1)[1:-1]
        y = np.linspace(0.0, 2.0, ny + 1)[1:-1]
        xx, yy = np.meshgrid(x, y, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        keep = (pts[:, 0] ** 2 + (pts[:, 1] - 1.0) ** 2) > 1.0
        pts = pts[keep]
        d = distance_to_singular_set(self, pts)
        return pts[d > r_min]

    def random_interior_points(self, count: int, rng: np.random.Generator,
                               r_min: float = 1e-4) -> np.ndarray:
        """Seeded random interior samples, uniform in the natural chart."""
        if self.template == "sector":
            omega = self.params["omega"]
            t = rng.uniform(math.log(r_min), 0.0, count)
            th = rng.uniform(0.0, omega, count)
            r = np.exp(t)
            return np.column_stack([r * np.cos(th), r * np.sin(th)])
        if self.template == "cusp":
            alpha = self.params["alpha"]
            y0, y1 = self.params["b"]
            t = rng.uniform(math.log(max(r_min, self.params["r_cut_sample"])), 0.0, count)
            y = rng.uniform(y0, y1, count)
            r = np.exp(t)
            return np.column_stack([r, r**alpha * y])
        if self.template == "oscillating":
            depth = self.params["depth"]
            f0, f1 = self.params["profile0"], self.params["profile1"]
            t = rng.uniform(-depth, 0.0, count)
            s = rng.uniform(0.0, 1.0, count)
            th = f0(t) + s * (f1(t) - f0(t))
            return np.column_stack([np.exp(t) * np.cos(th), np.exp(t) * np.sin(th)])
        if self.template == "circle-cusp":
            out = []
            need = count
            while need > 0:
                cand = np.column_stack([rng.uniform(-2, 2, 4 * need), rng.uniform(0, 2, 4 * need)])
                keep = (cand[:, 0] ** 2 + (cand[:, 1] - 1.0) ** 2) > 1.0
                cand = cand[keep]
                cand = cand[distance_to_singular_set(self, cand) > r_min]
                out.append(cand[:need])
                need = count - sum(len(a) for a in out)
            return np.vstack(out)
        raise InvalidParameterError(f"no sampler for template {self.template!r}")


def _bc_of(name: str, dirichlet) -> str:
    if dirichlet == "all":
        return DIRICHLET
    return DIRICHLET if name in dirichlet else NEUMANN


def make_domain(template: str, **params) -> Domain2D:
    """Build a validated domain template.

    Templates and parameters:
      sector:       omega in (0, 2*pi], lam > 0, dirichlet ('all' or curve list)
      cusp:         alpha > 1, b = (y0, y1), lam (default alpha), dirichlet
      oscillating:  profile0/profile1 (TrigPoly), depth > 0, lam, dirichlet
      circle-cusp:  dirichlet only (fixed geometry)
    """
    if template == "sector":
        return _make_sector(**params)
    if template == "cusp":
        return _make_cusp(**params)
    if template == "oscillating":
        return _make_oscillating(**params)
    if template == "circle-cusp":
        return _make_circle_cusp(**params)
    raise InvalidParameterError(f"unknown domain template {template!r}")


def _make_sector(omega: float, lam: float = 1.0, dirichlet="all") -> Domain2D:
    if not (0.0 < omega <= 2.0 * math.pi + 1e-15):
        raise InvalidParameterError(f"sector opening must lie in (0, 2*pi], got {omega}")
    omega = min(omega, 2.0 * math.pi)
    eps = max(lam - 1.0, 0.0)
    apex = SingularPoint((0.0, 0.0), "conical", lam=lam, opening=omega, epsilon=eps,
                         doubled=omega == 2.0 * math.pi)
    end = (math.cos(omega), math.sin(omega))
    curves = [
        Segment("edge0", _bc_of("edge0", dirichlet), (0.0, 0.0), (1.0, 0.0)),
        Arc("arc", _bc_of("arc", dirichlet), (0.0, 0.0), 1.0, 0.0, omega),
        Segment("edge1", _bc_of("edge1", dirichlet), end, (0.0, 0.0)),
    ]
    return Domain2D("sector", {"omega": omega, "lam": lam}, [apex], curves)


def _make_cusp(alpha: float, b=(-1.0, 1.0), lam: float | None = None,
               dirichlet="all", r_cut_sample: float = 1e-6) -> Domain2D:
    if not alpha > 1.0:
        raise InvalidParameterError(f"cusp order must exceed 1, got {alpha}")
    y0, y1 = float(b[0]), float(b[1])
    if not y0 < y1:
        raise InvalidParameterError(f"cusp cross-section must have y0 < y1, got {b}")
    if lam is None:
        lam = alpha  # bounded-geometry choice
    tip = SingularPoint((0.0, 0.0), "cusp", lam=lam, order=alpha, epsilon=max(lam - 1.0, 0.0))
    curves = [
        CuspWall("wall_lo", _bc_of("wall_lo", dirichlet), y0, alpha, 0.0, 1.0),
        Segment("cap", _bc_of("cap", dirichlet), (1.0, y0), (1.0, y1)),
        CuspWall("wall_hi", _bc_of("wall_hi", dirichlet), y1, alpha, 1.0, 0.0),
    ]
    return Domain2D("cusp", {"alpha": alpha, "b": (y0, y1), "lam": lam,
                             "r_cut_sample": r_cut_sample}, [tip], curves)


def _make_oscillating(profile0: TrigPoly, profile1: TrigPoly, depth: float = 5.0,
                      lam: float = 1.0, dirichlet="all") -> Domain2D:
    if not depth > 0:
        raise InvalidParameterError(f"depth must be positive, got {depth}")
    t = np.linspace(-depth, 0.0, 4097)
    gap = profile1(t) - profile0(t)
    if gap.min() <= 0.0:
        raise InvalidParameterError(
            f"oscillating profiles must stay separated, min gap {gap.min():.3g}"
        )
    if profile1(t).max() - profile0(t).min() > 2.0 * math.pi:
        raise InvalidParameterError("oscillating profiles must fit inside one angular turn")
    apex = SingularPoint((0.0, 0.0), "oscillating", lam=lam, epsilon=max(lam - 1.0, 0.0))
    th0_out, th1_out = float(profile0(0.0)), float(profile1(0.0))
    th0_in, th1_in = float(profile0(-depth)), float(profile1(-depth))
    r_in = math.exp(-depth)
    curves = [
        OscillatingWall("wall_lo", _bc_of("wall_lo", dirichlet), profile0, -depth, 0.0),
        Arc("arc_outer", _bc_of("arc_outer", dirichlet), (0.0, 0.0), 1.0, th0_out, th1_out),
        OscillatingWall("wall_hi", _bc_of("wall_hi", dirichlet), profile1, 0.0, -depth),
        Arc("arc_inner", _bc_of("arc_inner", dirichlet), (0.0, 0.0), r_in, th1_in, th0_in),
    ]
    return Domain2D("oscillating",
                    {"profile0": profile0, "profile1": profile1, "depth": depth, "lam": lam},
                    [apex], curves)


CIRCLE_CUSP_CORNERS = ((2.0, 0.0), (2.0, 2.0), (-2.0, 2.0), (-2.0, 0.0))


def _make_circle_cusp(dirichlet="all") -> Domain2D:
    """Box [-2,2]x[0,2] minus the unit disk centered at (0,1).

    The disk is tangent to the bottom edge at O = (0,0) and to the top edge at
    (0,2); both tangency points are doubled cusp points of order 2, and the
    removed disk splits the box into two mirror-image components.
    """
    pts = [SingularPoint((0.0, 0.0), "cusp", lam=2.0, order=2.0, epsilon=1.0, doubled=True),
           SingularPoint((0.0, 2.0), "cusp", lam=2.0, order=2.0, epsilon=1.0, doubled=True)]
    for corner in CIRCLE_CUSP_CORNERS:
        pts.append(SingularPoint(corner, "conical", lam=1.0, opening=math.pi / 2.0))
    seg = lambda nm, p0, p1: Segment(nm, _bc_of(nm, dirichlet), p0, p1)
    curves = [
        seg("bottom_right", (0.0, 0.0), (2.0, 0.0)),
        seg("right", (2.0, 0.0), (2.0, 2.0)),
        seg("top_right", (2.0, 2.0), (0.0, 2.0)),
        seg("top_left", (0.0, 2.0), (-2.0, 2.0)),
        seg("left", (-2.0, 2.0), (-2.0, 0.0)),
        seg("bottom_left", (-2.0, 0.0), (0.0, 0.0)),
        # hole boundary: domain lies outside the circle, so traverse clockwise
        Arc("hole_right", _bc_of("hole_right", dirichlet), (0.0, 1.0), 1.0,
            math.pi / 2.0, -math.pi / 2.0),
        Arc("hole_left", _bc_of("hole_left", dirichlet), (0.0, 1.0), 1.0,
            3.0 * math.pi / 2.0, math.pi / 2.0),
    ]
    return Domain2D("circle-cusp", {}, pts, curves)


def distance_to_singular_set(domain: Domain2D, x) -> np.ndarray:
    """Euclidean distance from each point to the nearest singular point."""
    pts = as_points(x)
    dists = [np.hypot(pts[:, 0] - p.location[0], pts[:, 1] - p.location[1])
             for p in domain.singular_points]
    return np.min(np.stack(dists, axis=0), axis=0)


def bounded_geometry_weight(domain: Domain2D, mollified: bool = True) -> Weight:
    """rho = product over singular points of |x - P|^lam_P (mollified by default)."""
    factors = []
    for p in domain.singular_points:
        if mollified:
            factors.append(MollifiedDistancePower(p.location, p.lam))
        else:
            factors.append(RadialPower(p.lam, p.location))
    return Weight(tuple(factors)) if factors else Weight((Constant(1.0),))


def admissible_scale_weight(domain: Domain2D, mollified: bool = True) -> Weight:
    """f with f^{-1} df bounded in the rescaled geometry.

    Per singular point: exp(-(r/eps)^(-eps)) when lam = 1 + eps > 1, and the
    (mollified) distance power r^lam when lam = 1.
    """
    factors = []
    for p in domain.singular_points:
        if p.epsilon > 0.0:
            factors.append(ExponentialCusp(p.location, p.epsilon))
        elif mollified:
            factors.append(MollifiedDistancePower(p.location, p.lam))
        else:
            factors.append(RadialPower(p.lam, p.location))
    return Weight(tuple(factors)) if factors else Weight((Constant(1.0),))
