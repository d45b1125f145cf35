"""Smooth positive weights with closed-form logarithmic derivatives.

A weight is a finite product of primitive factors.  Working with log w keeps
the calculus additive: for w = prod_i w_i,

    log w        = sum_i log w_i,
    d log w      = sum_i d log w_i,
    Hess log w   = sum_i Hess log w_i,

and every primitive below supplies those three maps in closed form.  No
numerical differentiation happens here; finite differences only appear in the
test suite as an independent cross-check.

All evaluators are vectorized over point arrays of shape (n, 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, WeightDomainError

__all__ = [
    "Constant",
    "RadialPower",
    "MollifiedDistancePower",
    "ExponentialCusp",
    "Weight",
    "eval_weight",
    "eval_log_gradient",
    "eval_log_hessian",
]


def as_points(x) -> np.ndarray:
    """Coerce a point or an array of points to shape (n, 2)."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[np.newaxis, :]
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidParameterError(f"expected points of shape (n, 2), got {pts.shape}")
    return pts


def _radial_parts(pts: np.ndarray, center) -> tuple[np.ndarray, np.ndarray]:
    """Distances r and unit directions u = (x - center)/r; raises at r = 0."""
    d = pts - np.asarray(center, dtype=float)
    r = np.hypot(d[:, 0], d[:, 1])
    if np.any(r == 0.0):
        raise WeightDomainError(f"weight evaluated at its singular point {tuple(center)}")
    return r, d / r[:, None]


def _radial_log_hessian(r, u, h1, h2) -> np.ndarray:
    """Hessian of a radial function with s'(r) = h1 and s''(r) = h2.

    Hess s(r) = h2 * u u^T + (h1 / r) * (I - u u^T).
    """
    uu = u[:, :, None] * u[:, None, :]
    eye = np.eye(2)[None, :, :]
    return h2[:, None, None] * uu + (h1 / r)[:, None, None] * (eye - uu)


@dataclass(frozen=True)
class Constant:
    """The constant weight c > 0."""

    value: float = 1.0

    def __post_init__(self):
        if not self.value > 0:
            raise InvalidParameterError(f"constant weight must be positive, got {self.value}")

    def log_value(self, pts: np.ndarray) -> np.ndarray:
        return np.full(len(pts), math.log(self.value))

    def log_gradient(self, pts: np.ndarray) -> np.ndarray:
        return np.zeros((len(pts), 2))

    def log_hessian(self, pts: np.ndarray) -> np.ndarray:
        return np.zeros((len(pts), 2, 2))

    def scaled(self, s: float) -> "Constant":
        return Constant(self.value**s)


@dataclass(frozen=True)
class RadialPower:
    """|x - center|^exponent, unmollified (singular/degenerate at the center)."""

    exponent: float
    center: tuple[float, float] = (0.0, 0.0)

    def log_value(self, pts: np.ndarray) -> np.ndarray:
        if self.exponent == 0.0:
            return np.zeros(len(pts))
        r, _ = _radial_parts(pts, self.center)
        return self.exponent * np.log(r)

    def log_gradient(self, pts: np.ndarray) -> np.ndarray:
        if self.exponent == 0.0:
            return np.zeros((len(pts), 2))
        r, u = _radial_parts(pts, self.center)
        return self.exponent * u / r[:, None]

    def log_hessian(self, pts: np.ndarray) -> np.ndarray:
        if self.exponent == 0.0:
            return np.zeros((len(pts), 2, 2))
        r, u = _radial_parts(pts, self.center)
        # log r has s'(r) = 1/r, s''(r) = -1/r^2
        return self.exponent * _radial_log_hessian(r, u, 1.0 / r, -1.0 / r**2)

    def scaled(self, s: float) -> "RadialPower":
        return RadialPower(self.exponent * s, self.center)


def _hermite_coeffs(ratio: float) -> tuple[float, float, float]:
    """Quintic q(v) = v + a v^3 + b v^4 + c v^5 with q(0)=0, q'(0)=1, q''(0)=0,
    q(1)=ratio, q'(1)=0, q''(1)=0."""
    a = 10.0 * ratio - 6.0
    b = 8.0 - 15.0 * ratio
    c = 6.0 * ratio - 3.0
    return a, b, c


@dataclass(frozen=True)
class MollifiedDistancePower:
    """|x - center|^exponent near the center, flattened to exactly 1 far away.

    With t = log r, the log-factor is exponent * psi(t) where psi(t) = t for
    t <= log r0, psi(t) = 0 for t >= log r1, joined by a C^2 monotone quintic
    Hermite interpolant.  Flattening to 1 (rather than an arbitrary constant)
    keeps products of these factors identically 1 away from the singular set.
    """

    center: tuple[float, float]
    exponent: float
    r0: float = 0.25
    r1: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.r0 < self.r1):
            raise InvalidParameterError(
                f"mollification radii must satisfy 0 < r0 < r1, got ({self.r0}, {self.r1})"
            )
        if self.r1 > 1.0:
            raise InvalidParameterError("outer mollification radius must be <= 1 so that psi(t1) = 0 is reachable monotonically")
        # ratio = psi-rise over the collar, in units of the collar width
        a, b, c = _hermite_coeffs(self._ratio())
        v = np.linspace(0.0, 1.0, 257)
        dq = 1.0 + 3 * a * v**2 + 4 * b * v**3 + 5 * c * v**4
        if dq.min() < -1e-12:
            raise InvalidParameterError(
                f"radii ({self.r0}, {self.r1}) give a non-monotone mollification profile"
            )

    def _ratio(self) -> float:
        t0, t1 = math.log(self.r0), math.log(self.r1)
        return -t0 / (t1 - t0)

    def _psi(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """psi(log r), psi'(log r), psi''(log r), vectorized."""
        t0, t1 = math.log(self.r0), math.log(self.r1)
        h = t1 - t0
        t = np.log(r)
        v = np.clip((t - t0) / h, 0.0, 1.0)
        a, b, c = _hermite_coeffs(self._ratio())
        q = v + a * v**3 + b * v**4 + c * v**5
        dq = 1.0 + 3 * a * v**2 + 4 * b * v**3 + 5 * c * v**4
        d2q = (6 * a * v + 12 * b * v**2 + 20 * c * v**3) / h
        psi = np.where(t <= t0, t, t0 + h * q)
        dpsi = np.where(t <= t0, 1.0, dq)
        d2psi = np.where(t <= t0, 0.0, d2q)
        # beyond the collar the factor is exactly constant
        outside = t >= t1
        psi = np.where(outside, 0.0, psi)
        dpsi = np.where(outside, 0.0, dpsi)
        d2psi = np.where(outside, 0.0, d2psi)
        return psi, dpsi, d2psi

    def log_value(self, pts: np.ndarray) -> np.ndarray:
        r, _ = _radial_parts(pts, self.center)
        psi, _, _ = self._psi(r)
        return self.exponent * psi

    def log_gradient(self, pts: np.ndarray) -> np.ndarray:
        r, u = _radial_parts(pts, self.center)
        _, dpsi, _ = self._psi(r)
        return self.exponent * (dpsi / r)[:, None] * u

    def log_hessian(self, pts: np.ndarray) -> np.ndarray:
        r, u = _radial_parts(pts, self.center)
        _, dpsi, d2psi = self._psi(r)
        # s(r) = psi(log r): s' = psi'/r, s'' = (psi'' - psi')/r^2
        return self.exponent * _radial_log_hessian(r, u, dpsi / r, (d2psi - dpsi) / r**2)

    def scaled(self, s: float) -> "MollifiedDistancePower":
        return MollifiedDistancePower(self.center, self.exponent * s, self.r0, self.r1)


@dataclass(frozen=True)
class ExponentialCusp:
    """exp(-amplitude * (r/epsilon)^(-epsilon)) around the center.

    log f = -amplitude * epsilon^epsilon * r^(-epsilon); the g-norm of d log f
    against the rescaled metric r^(1+epsilon) is the constant
    amplitude * epsilon^(1+epsilon).
    """

    center: tuple[float, float]
    epsilon: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParameterError(f"epsilon must be positive, got {self.epsilon}")

    def log_value(self, pts: np.ndarray) -> np.ndarray:
        r, _ = _radial_parts(pts, self.center)
        eps = self.epsilon
        return -self.amplitude * eps**eps * r**(-eps)

    def log_gradient(self, pts: np.ndarray) -> np.ndarray:
        r, u = _radial_parts(pts, self.center)
        eps = self.epsilon
        h1 = self.amplitude * eps ** (1.0 + eps) * r ** (-eps - 1.0)
        return h1[:, None] * u

    def log_hessian(self, pts: np.ndarray) -> np.ndarray:
        r, u = _radial_parts(pts, self.center)
        eps = self.epsilon
        h1 = self.amplitude * eps ** (1.0 + eps) * r ** (-eps - 1.0)
        h2 = -(eps + 1.0) * self.amplitude * eps ** (1.0 + eps) * r ** (-eps - 2.0)
        return _radial_log_hessian(r, u, h1, h2)

    def scaled(self, s: float) -> "ExponentialCusp":
        return ExponentialCusp(self.center, self.epsilon, self.amplitude * s)


Factor = Constant | RadialPower | MollifiedDistancePower | ExponentialCusp


@dataclass(frozen=True)
class Weight:
    """A finite product of primitive factors, closed under * and real powers."""

    factors: tuple[Factor, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def log_value(self, x) -> np.ndarray:
        pts = as_points(x)
        out = np.zeros(len(pts))
        for f in self.factors:
            out += f.log_value(pts)
        return out

    def value(self, x) -> np.ndarray:
        return np.exp(self.log_value(x))

    def log_gradient(self, x) -> np.ndarray:
        pts = as_points(x)
        out = np.zeros((len(pts), 2))
        for f in self.factors:
            out += f.log_gradient(pts)
        return out

    def log_hessian(self, x) -> np.ndarray:
        pts = as_points(x)
        out = np.zeros((len(pts), 2, 2))
        for f in self.factors:
            out += f.log_hessian(pts)
        return out

    def power(self, s: float) -> "Weight":
        return Weight(tuple(f.scaled(s) for f in self.factors))

    def __mul__(self, other: "Weight") -> "Weight":
        return Weight(self.factors + other.factors)

    def __repr__(self) -> str:
        inner = " * ".join(repr(f) for f in self.factors) or "1"
        return f"Weight({inner})"


def eval_weight(w: Weight, x) -> np.ndarray:
    """Pointwise values of the weight; raises WeightDomainError at singular points."""
    return w.value(x)


def eval_log_gradient(w: Weight, x) -> np.ndarray:
    """Euclidean components of d log w, shape (n, 2)."""
    return w.log_gradient(x)


def eval_log_hessian(w: Weight, x) -> np.ndarray:
    """Euclidean Hessian of log w, shape (n, 2, 2)."""
    return w.log_hessian(x)
