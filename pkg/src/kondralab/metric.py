"""Conformal rescaling g = rho^{-2} g0 and structural-hypothesis probes.

The probes certify, by dense sampling with closed-form derivatives, the
hypotheses the solver modules rely on: admissibility of the scale weight
(bounded log-derivatives in g), strong Legendre bounds and their conformal
invariance, boundary geodesic curvature after rescaling, and completeness of
radial paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .domains import Domain2D
from .errors import InvalidParameterError, SolverError
from .weights import Weight, as_points, eval_log_gradient, eval_log_hessian, eval_weight

__all__ = [
    "ConformalMetric",
    "CoefficientField",
    "coefficient_catalog",
    "admissibility_probe",
    "legendre_bounds",
    "conformal_symbol_check",
    "boundary_curvature_profile",
    "CurvatureProfile",
    "completeness_probe",
    "gauss_curvature",
]


@dataclass(frozen=True)
class ConformalMetric:
    """g = rho^{-2} g0 on the plane (m = 2).

    Covectors scale up: |xi|_g = rho |xi|_0.  Tangent vectors scale down.
    The volume element is rho^{-2} times Lebesgue measure.
    """

    rho: Weight
    dim: int = 2

    def covector_norm(self, x, xi) -> np.ndarray:
        pts = as_points(x)
        xi = np.asarray(xi, dtype=float).reshape(pts.shape)
        return eval_weight(self.rho, pts) * np.linalg.norm(xi, axis=-1)

    def volume_density(self, x) -> np.ndarray:
        return eval_weight(self.rho, x) ** (-self.dim)


class CoefficientField:
    """Symmetric 2x2 gradient coefficient a(x) plus zeroth-order c(x) >= 0.

    a may be a constant 2x2 array or a callable pts -> (n, 2, 2); c likewise
    a scalar or callable pts -> (n,).
    """

    def __init__(self, name: str, a, c=0.0):
        self.name = name
        self._a = np.asarray(a, dtype=float) if not callable(a) else a
        self._c = c
        if not callable(self._a):
            self._check_symmetric(self._a[None])

    @staticmethod
    def _check_symmetric(tensors: np.ndarray):
        skew = np.abs(tensors[:, 0, 1] - tensors[:, 1, 0])
        scale = 1.0 + np.abs(tensors).max()
        if skew.max() > 1e-12 * scale:
            raise InvalidParameterError("coefficient tensor must be symmetric")

    def a_at(self, x) -> np.ndarray:
        pts = as_points(x)
        if callable(self._a):
            out = np.asarray(self._a(pts), dtype=float)
        else:
            out = np.broadcast_to(self._a, (len(pts), 2, 2)).copy()
        self._check_symmetric(out)
        return out

    def c_at(self, x) -> np.ndarray:
        pts = as_points(x)
        if callable(self._c):
            return np.asarray(self._c(pts), dtype=float)
        return np.full(len(pts), float(self._c))

    @property
    def reaction(self):
        """Raw zeroth-order term as given (scalar or callable), for assembly."""
        return self._c

    def __repr__(self):
        return f"CoefficientField({self.name!r})"


def _rotated(theta: float, e0: float, e1: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    r = np.array([[c, -s], [s, c]])
    return r @ np.diag([e0, e1]) @ r.T


def coefficient_catalog() -> list[CoefficientField]:
    """Strong-Legendre test fields: constant, anisotropic, rotated, varying."""

    def scaled_identity(pts):
        s = 1.0 + pts[:, 0] ** 2
        out = np.zeros((len(pts), 2, 2))
        out[:, 0, 0] = s
        out[:, 1, 1] = s
        return out

    def varying_spd(pts):
        x, y = pts[:, 0], pts[:, 1]
        out = np.zeros((len(pts), 2, 2))
        out[:, 0, 0] = 2.0 + np.cos(x * y)
        out[:, 1, 1] = 1.0 + y * y
        off = 0.3 * np.sin(x + y)
        out[:, 0, 1] = off
        out[:, 1, 0] = off
        return out

    def oscillating_c(pts):
        return 1.0 + 0.5 * np.sin(3.0 * pts[:, 0]) * np.cos(2.0 * pts[:, 1])

    return [
        CoefficientField("identity", np.eye(2)),
        CoefficientField("diag21", np.diag([2.0, 1.0]), c=1.0),
        CoefficientField("scaled_identity", scaled_identity),
        CoefficientField("rotated_aniso", _rotated(0.5, 2.0, 1.0)),
        CoefficientField("varying_spd", varying_spd, c=oscillating_c),
    ]


def _sym_eig_bounds(tensors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of symmetric 2x2 batches via the mean/half-gap form."""
    p = tensors[:, 0, 0]
    s = tensors[:, 1, 1]
    q = 0.5 * (tensors[:, 0, 1] + tensors[:, 1, 0])
    mean = 0.5 * (p + s)
    gap = np.sqrt((0.5 * (p - s)) ** 2 + q * q)
    return mean - gap, mean + gap


def admissibility_probe(w: Weight, metric: ConformalMetric, samples,
                        order: int = 2) -> dict[int, float]:
    """sup over samples of |grad^j log w|_g for j = 1..order (order <= 2).

    Order 2 uses the g-covariant Hessian: the Euclidean Hessian of log w
    corrected by the conformal Christoffel terms in d(log rho).
    """
    pts = as_points(samples)
    if len(pts) == 0:
        raise InvalidParameterError("admissibility probe needs a nonempty sample set")
    if order not in (1, 2):
        raise InvalidParameterError(f"derivative order must be 1 or 2, got {order}")
    rho = eval_weight(metric.rho, pts)
    dlw = eval_log_gradient(w, pts)
    out = {1: float(np.max(rho * np.linalg.norm(dlw, axis=-1)))}
    if order == 2:
        hess = eval_log_hessian(w, pts)
        dlr = eval_log_gradient(metric.rho, pts)
        cross = dlr[:, :, None] * dlw[:, None, :]
        dot = np.einsum("ni,ni->n", dlr, dlw)
        t = hess + cross + np.swapaxes(cross, 1, 2) - dot[:, None, None] * np.eye(2)
        frob = np.sqrt(np.einsum("nij,nij->n", t, t))
        out[2] = float(np.max(rho * rho * frob))
    return out


def legendre_bounds(a: CoefficientField, metric: ConformalMetric | None,
                    samples) -> tuple[float, float]:
    """(inf, sup) over samples of the eigenvalues of a against the metric.

    metric None means the Euclidean covector product; a ConformalMetric
    divides the eigenvalues by rho^2 (covectors lengthen under g).
    """
    pts = as_points(samples)
    if len(pts) == 0:
        raise InvalidParameterError("legendre_bounds needs a nonempty sample set")
    lo, hi = _sym_eig_bounds(a.a_at(pts))
    if metric is not None:
        beta = eval_weight(metric.rho, pts) ** 2
        lo = lo / beta
        hi = hi / beta
    return float(lo.min()), float(hi.max())


def conformal_symbol_check(a: CoefficientField, rho: Weight, samples) -> float:
    """Max |Rayleigh bounds of a vs g0  -  bounds of rho^2 a vs g|.

    The two sides are computed by different arithmetic routes (mean/half-gap
    eigenvalues vs the trace/determinant quadratic formula for the pencil
    (rho^2 a, rho^2 I)) so agreement is evidence of the invariance, not of
    shared code.
    """
    pts = as_points(samples)
    if len(pts) == 0:
        raise InvalidParameterError("conformal_symbol_check needs a nonempty sample set")
    tensors = a.a_at(pts)
    lo0, hi0 = _sym_eig_bounds(tensors)

    beta = eval_weight(rho, pts) ** 2  # |xi|_g^2 = beta |xi|_0^2
    scaled = beta[:, None, None] * tensors
    tr = scaled[:, 0, 0] + scaled[:, 1, 1]
    # tr^2 - 4 det in the cancellation-free symmetric form (a-d)^2 + 4bc
    disc = np.sqrt(np.maximum(
        (scaled[:, 0, 0] - scaled[:, 1, 1]) ** 2
        + 4.0 * scaled[:, 0, 1] * scaled[:, 1, 0], 0.0))
    lo1 = (tr - disc) / (2.0 * beta)
    hi1 = (tr + disc) / (2.0 * beta)

    return float(max(np.abs(lo0 - lo1).max(), np.abs(hi0 - hi1).max()))


@dataclass
class CurvatureProfile:
    per_curve: dict[str, np.ndarray]
    sup_abs: float


def boundary_curvature_profile(domain: Domain2D, rho: Weight, n: int = 64,
                               t: np.ndarray | None = None,
                               curves: list[str] | None = None) -> CurvatureProfile:
    """Geodesic curvature of the boundary in g: kappa_g = rho (kappa_E + dn log rho).

    dn is the derivative along the inward unit normal.  Samples stay strictly
    inside each curve's parameter interval so singular endpoints are avoided.
    """
    if t is None:
        t = np.linspace(0.0, 1.0, n + 2)[1:-1]
    t = np.asarray(t, dtype=float)
    names = curves if curves is not None else [c.name for c in domain.boundary]
    per_curve: dict[str, np.ndarray] = {}
    sup = 0.0
    for name in names:
        curve = domain.curve(name)
        x = curve.point(t)
        kappa_e = curve.signed_curvature(t)
        normal = curve.inward_normal(t)
        dn_log_rho = np.einsum("ni,ni->n", normal, eval_log_gradient(rho, x))
        kg = eval_weight(rho, x) * (kappa_e + dn_log_rho)
        per_curve[name] = kg
        sup = max(sup, float(np.abs(kg).max()))
    return CurvatureProfile(per_curve, sup)


def _radial_ray(domain: Domain2D) -> tuple[np.ndarray, np.ndarray]:
    """(base point, unit direction) of a straight ray inside the domain."""
    if domain.template == "sector":
        half = 0.5 * domain.params["omega"]
        return np.zeros(2), np.array([math.cos(half), math.sin(half)])
    if domain.template == "cusp":
        y0, y1 = domain.params["b"]
        if not y0 < 0.0 < y1:
            raise InvalidParameterError(
                "cusp completeness probe needs the axis inside the cross-section"
            )
        return np.zeros(2), np.array([1.0, 0.0])
    raise InvalidParameterError(
        f"no straight radial ray for template {domain.template!r}"
    )


def completeness_probe(domain: Domain2D, rho: Weight, epsilons) -> np.ndarray:
    """g-lengths L(eps) = int_eps^1 rho^{-1} dr along a radial ray.

    Divergence of L as eps -> 0 is the completeness facet of bounded
    geometry; convergence flags an incomplete rescaled metric.
    """
    base, direction = _radial_ray(domain)

    def integrand(r: float) -> float:
        return 1.0 / float(eval_weight(rho, base + r * direction)[0])

    out = []
    for eps in np.asarray(epsilons, dtype=float):
        if not 0.0 < eps < 1.0:
            raise InvalidParameterError(f"epsilon must lie in (0, 1), got {eps}")
        val, err = quad(integrand, eps, 1.0, epsabs=1e-12, epsrel=1e-12, limit=400)
        if err > 1e-8 * (1.0 + abs(val)):
            raise SolverError(f"radial length quadrature did not converge at eps={eps}")
        out.append(val)
    return np.array(out)


def gauss_curvature(rho: Weight, x) -> np.ndarray:
    """Curvature of g = rho^{-2} g0: K = rho^2 * Laplacian(log rho)."""
    pts = as_points(x)
    hess = eval_log_hessian(rho, pts)
    lap = hess[:, 0, 0] + hess[:, 1, 1]
    return eval_weight(rho, pts) ** 2 * lap
