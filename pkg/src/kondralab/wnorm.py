"""Weighted Sobolev norms on singular domains, computed two ways.

kondratiev_norm integrates sum_{j<=ell} |rho^j grad^j (f^{-s} u)|^p against
the flat measure.  relation_check recomputes the same quantity through the
conformally rescaled metric g = rho^{-2} g_0: substitute
phi = rho^{2/p} f^{-s} u and integrate metric quantities against the g-volume
rho^{-2} dx.  At ell = 0 the two integrands agree pointwise, so the ratio is
1 up to roundoff; at ell >= 1 the routes differ by first-order commutator
terms and are only equivalent, with a mesh-stable ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .fem import FEFunction, FESpace, triangle_rule
from .weights import Weight, eval_log_gradient, eval_log_hessian, eval_weight

__all__ = [
    "WeightedNormSpec",
    "AnalyticFunction",
    "DifferenceFunction",
    "kondratiev_norm",
    "relation_check",
    "RelationReport",
]


@dataclass(frozen=True)
class WeightedNormSpec:
    """Parameters of the scale f^s K^{ell,p}_(rho)."""

    ell: int
    p: float
    rho: Weight
    f: Weight
    s: float = 1.0

    def __post_init__(self):
        if self.ell not in (0, 1, 2):
            raise InvalidParameterError(f"derivative order must be 0, 1 or 2, got {self.ell}")
        if self.p < 1.0:
            raise InvalidParameterError(f"integrability exponent must be >= 1, got {self.p}")


@dataclass(frozen=True)
class AnalyticFunction:
    """Closed-form function with optional derivative callables."""

    name: str
    fn: object
    grad: object = None
    hess: object = None


@dataclass(frozen=True)
class DifferenceFunction:
    """FE function minus a closed-form one, for weighted error norms."""

    fe: FEFunction
    exact: AnalyticFunction


def _fsum(per_element: np.ndarray) -> float:
    return math.fsum(per_element.tolist())


def _evaluate(u, ell: int, space: FESpace | None, quad_degree: int):
    """Values / gradients / Hessians of u at mesh quadrature points."""
    bary, wq = triangle_rule(quad_degree)
    if isinstance(u, DifferenceFunction):
        if ell >= 2:
            raise InvalidParameterError("error norms support ell <= 1 only")
        space, pts, qw, vals, grads, _ = _evaluate(u.fe, ell, None, quad_degree)
        flat = pts.reshape(-1, 2)
        vals = vals - np.asarray(u.exact.fn(flat), dtype=float).reshape(vals.shape)
        if ell >= 1:
            if u.exact.grad is None:
                raise InvalidParameterError("ell = 1 error norm needs a gradient callable")
            grads = grads - np.asarray(u.exact.grad(flat), dtype=float).reshape(grads.shape)
        return space, pts, qw, vals, grads, None
    if isinstance(u, FEFunction):
        if u.components != 1:
            raise InvalidParameterError("norms are defined for scalar functions")
        if ell >= 2:
            raise InvalidParameterError(
                "second derivatives of FE functions are not available; "
                "pass an AnalyticFunction for ell = 2"
            )
        space = u.space
        pts = space.quad_points(bary)
        vals = space.element_values(u.coeffs, bary)
        grads = space.element_gradients(u.coeffs, bary) if ell >= 1 else None
        hess = None
    else:
        if space is None:
            raise InvalidParameterError("analytic input needs a space for quadrature")
        if isinstance(u, AnalyticFunction):
            fn, gradfn, hessfn = u.fn, u.grad, u.hess
        elif callable(u):
            fn, gradfn, hessfn = u, None, None
        else:
            raise InvalidParameterError(f"cannot evaluate {type(u).__name__} as a function")
        pts = space.quad_points(bary)
        flat = pts.reshape(-1, 2)
        shape = pts.shape[:2]
        vals = np.asarray(fn(flat), dtype=float).reshape(shape)
        grads = hess = None
        if ell >= 1:
            if gradfn is None:
                raise InvalidParameterError(f"ell = {ell} needs a gradient callable")
            grads = np.asarray(gradfn(flat), dtype=float).reshape(shape + (2,))
        if ell >= 2:
            if hessfn is None:
                raise InvalidParameterError("ell = 2 needs a Hessian callable")
            hess = np.asarray(hessfn(flat), dtype=float).reshape(shape + (2, 2))
    qw = space.areas()[:, None] * wq[None, :]
    return space, pts, qw, vals, grads, hess


def _weight_data(w: Weight, pts: np.ndarray, order: int):
    flat = pts.reshape(-1, 2)
    shape = pts.shape[:2]
    log_w = w.log_value(flat).reshape(shape)
    dlog = d2log = None
    if order >= 1:
        dlog = eval_log_gradient(w, flat).reshape(shape + (2,))
    if order >= 2:
        d2log = eval_log_hessian(w, flat).reshape(shape + (2, 2))
    return log_w, dlog, d2log


def kondratiev_norm(u, spec: WeightedNormSpec, space: FESpace | None = None,
                    quad_degree: int = 4) -> float:
    """(sum_{j<=ell} int |rho^j grad^j(f^{-s} u)|^p dx)^(1/p)."""
    space, pts, qw, vals, grads, hess = _evaluate(u, spec.ell, space, quad_degree)
    s, p = spec.s, spec.p
    log_f, dlog_f, d2log_f = _weight_data(spec.f, pts, spec.ell)
    rho = eval_weight(spec.rho, pts.reshape(-1, 2)).reshape(pts.shape[:2])
    scale = np.exp(-s * log_f)

    v = scale * vals
    total = _fsum((qw * np.abs(v) ** p).sum(axis=1))
    if spec.ell >= 1:
        grad_v = scale[..., None] * (grads - s * vals[..., None] * dlog_f)
        mag = np.sqrt((grad_v**2).sum(axis=-1))
        total += _fsum((qw * (rho * mag) ** p).sum(axis=1))
    if spec.ell >= 2:
        outer = dlog_f[..., :, None] * grads[..., None, :]
        hess_v = (hess
                  - s * vals[..., None, None] * d2log_f
                  - s * (outer + np.swapaxes(outer, -1, -2))
                  + s**2 * vals[..., None, None]
                  * dlog_f[..., :, None] * dlog_f[..., None, :])
        hess_v = scale[..., None, None] * hess_v
        frob = np.sqrt((hess_v**2).sum(axis=(-1, -2)))
        total += _fsum((qw * (rho**2 * frob) ** p).sum(axis=1))
    return total ** (1.0 / p)


def _conformal_norm(u, spec: WeightedNormSpec, space: FESpace | None,
                    quad_degree: int) -> float:
    """Same scale through phi = rho^{2/p} f^{-s} u in W^{ell,p}(rho^{-2} g_0)."""
    space, pts, qw, vals, grads, hess = _evaluate(u, spec.ell, space, quad_degree)
    s, p = spec.s, spec.p
    order = spec.ell
    log_f, dlog_f, d2log_f = _weight_data(spec.f, pts, order)
    log_rho, dlog_rho, d2log_rho = _weight_data(spec.rho, pts, order)
    rho = np.exp(log_rho)

    h = (2.0 / p) * log_rho - s * log_f
    phi = np.exp(h) * vals
    total = _fsum((qw * np.abs(phi) ** p * rho**-2.0).sum(axis=1))
    if order >= 1:
        dh = (2.0 / p) * dlog_rho - s * dlog_f
        grad_phi = np.exp(h)[..., None] * (grads + vals[..., None] * dh)
        mag = np.sqrt((grad_phi**2).sum(axis=-1))
        # |dphi|_g = rho |dphi|, dvol_g = rho^{-2} dx
        total += _fsum((qw * rho ** (p - 2.0) * mag**p).sum(axis=1))
    if order >= 2:
        dh = (2.0 / p) * dlog_rho - s * dlog_f
        d2h = (2.0 / p) * d2log_rho - s * d2log_f
        outer_h = dh[..., :, None] * grads[..., None, :]
        hess_phi = (hess
                    + outer_h + np.swapaxes(outer_h, -1, -2)
                    + vals[..., None, None] * d2h
                    + vals[..., None, None] * dh[..., :, None] * dh[..., None, :])
        hess_phi = np.exp(h)[..., None, None] * hess_phi
        grad_phi = np.exp(h)[..., None] * (grads + vals[..., None] * dh)
        # Hessian of g = rho^{-2} g_0: flat Hessian plus Christoffel correction
        cross = dlog_rho[..., :, None] * grad_phi[..., None, :]
        dot = (dlog_rho * grad_phi).sum(axis=-1)
        eye = np.eye(2)
        hess_g = (hess_phi + cross + np.swapaxes(cross, -1, -2)
                  - dot[..., None, None] * eye)
        frob = np.sqrt((hess_g**2).sum(axis=(-1, -2)))
        total += _fsum((qw * rho ** (2.0 * p - 2.0) * frob**p).sum(axis=1))
    return total ** (1.0 / p)


@dataclass(frozen=True)
class RelationReport:
    kondratiev: float
    conformal: float

    @property
    def ratio(self) -> float:
        return self.kondratiev / self.conformal


def relation_check(u, spec: WeightedNormSpec, space: FESpace | None = None,
                   quad_degree: int = 4) -> RelationReport:
    """Both routes with independent arithmetic; ratio should be 1 at ell = 0
    and mesh-stable at ell >= 1."""
    lhs = kondratiev_norm(u, spec, space=space, quad_degree=quad_degree)
    rhs = _conformal_norm(u, spec, space, quad_degree)
    return RelationReport(lhs, rhs)
