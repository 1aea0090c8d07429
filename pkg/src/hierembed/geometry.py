"""Lorentz-model geometry: hyperboloid points, exponential map, exterior angles.

Points on the hyperboloid of curvature c satisfy <x, x>_L = -1/c with the
Lorentzian inner product; the time component is determined by the space
component, so embeddings live in the (Euclidean) tangent space at the origin
and are projected onto the manifold with the exponential map.

All functions are pure, operate on float64, and never mutate their inputs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

# Additive floor under square roots / denominators near the angle formula's
# singularities (x at the origin, x == y).
EPS = 1e-8

# Tangent norms above this multiple of 1/sqrt(c) are clamped before the
# exponential map to keep cosh from overflowing.
MAX_TANGENT_NORM = 10.0


class DegenerateGeometryError(ValueError):
    """Raised when an angle is requested at a geometrically singular input."""


def _check_finite(name: str, a: np.ndarray) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")


def _check_curvature(c: float) -> None:
    if not (math.isfinite(c) and c > 0):
        raise ValueError(f"curvature must be a finite positive real, got {c}")


@dataclass(frozen=True)
class HyperbolicPoint:
    """A point on the hyperboloid: space components plus derived time component."""

    space: np.ndarray
    time: float

    @property
    def dim(self) -> int:
        return self.space.shape[0]


@dataclass(frozen=True)
class AnglePair:
    """The two maximized entailment angles, both in [0, pi]."""

    beta1: float
    alpha2: float


def time_component(space: np.ndarray, c: float) -> float:
    """Time component of the hyperboloid point with the given space component.

    x_time = sqrt(1/c + ||x_space||^2), always >= 1/sqrt(c).
    """
    _check_curvature(c)
    space = np.asarray(space, dtype=np.float64)
    _check_finite("space", space)
    return math.sqrt(1.0 / c + float(space @ space))


def point_from_space(space: np.ndarray, c: float) -> HyperbolicPoint:
    """Construct an on-manifold point from its space component."""
    space = np.asarray(space, dtype=np.float64)
    return HyperbolicPoint(space=space, time=time_component(space, c))


def lorentz_inner(x: HyperbolicPoint, y: HyperbolicPoint) -> float:
    """Lorentzian inner product -x0*y0 + sum_i x_i*y_i."""
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
    return float(-x.time * y.time + x.space @ y.space)


def exp_map_origin(v: np.ndarray, c: float) -> HyperbolicPoint:
    """Exponential map at the hyperboloid origin.

    space = sinh(sqrt(c)*||v||) * v / (sqrt(c)*||v||), with v = 0 mapping to
    the origin. Norms above MAX_TANGENT_NORM/sqrt(c) are clamped (logged),
    not rejected.
    """
    _check_curvature(c)
    v = np.asarray(v, dtype=np.float64)
    _check_finite("tangent vector", v)
    sqrt_c = math.sqrt(c)
    norm = float(np.linalg.norm(v))
    cap = MAX_TANGENT_NORM / sqrt_c
    if norm > cap:
        log.warning("tangent norm %.4g exceeds cap %.4g; clamping", norm, cap)
        v = v * (cap / norm)
        norm = cap
    if norm == 0.0:
        space = np.zeros_like(v)
    else:
        space = (math.sinh(sqrt_c * norm) / (sqrt_c * norm)) * v
    return point_from_space(space, c)


def exterior_angle_hyp(x: HyperbolicPoint, y: HyperbolicPoint, c: float) -> float:
    """Exterior angle at x between the extended origin->x geodesic and x->y.

    Small when y lies radially outward of x. The arccos argument is clamped
    to [-1, 1]; the square root in the denominator gets an EPS floor near
    the x == y singularity (logged when triggered).
    """
    _check_curvature(c)
    x_norm = float(np.linalg.norm(x.space))
    if x_norm <= EPS:
        raise DegenerateGeometryError("exterior angle undefined at the origin")
    inner = lorentz_inner(x, y)
    ci = c * inner
    under = ci * ci - 1.0
    if under <= EPS:
        log.debug("near-singular angle (c<x,y>)^2 - 1 = %.3g; applying EPS floor", under)
        under = EPS
    num = y.time + x.time * ci
    denom = x_norm * math.sqrt(under)
    arg = min(1.0, max(-1.0, num / denom))
    return math.acos(arg)


def exterior_angle_euc(x: np.ndarray, y: np.ndarray) -> float:
    """Euclidean exterior angle via the law-of-cosines form.

    arccos((||y||^2 - ||x||^2 - ||x-y||^2) / (2 ||x|| ||x-y||)), clamped.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_finite("x", x)
    _check_finite("y", y)
    nx = float(np.linalg.norm(x))
    nxy = float(np.linalg.norm(x - y))
    if nx <= EPS or nxy <= EPS:
        raise DegenerateGeometryError(
            "exterior angle undefined for x at the origin or x == y"
        )
    ny2 = float(y @ y)
    arg = (ny2 - nx * nx - nxy * nxy) / (2.0 * nx * nxy)
    return math.acos(min(1.0, max(-1.0, arg)))


def entailment_angles(
    x_parent,
    y_child,
    space_kind: str,
    c: float | None = None,
) -> AnglePair:
    """beta1 = pi - ext(parent, child); alpha2 = ext(child, parent).

    Both angles are maximized for a well-embedded entailment pair. For
    ``space_kind="hyperbolic"`` the arguments are HyperbolicPoints and c is
    required; for ``"euclidean"`` they are plain vectors.
    """
    if space_kind == "hyperbolic":
        if c is None:
            raise ValueError("hyperbolic angles require a curvature")
        beta1 = math.pi - exterior_angle_hyp(x_parent, y_child, c)
        alpha2 = exterior_angle_hyp(y_child, x_parent, c)
    elif space_kind == "euclidean":
        beta1 = math.pi - exterior_angle_euc(x_parent, y_child)
        alpha2 = exterior_angle_euc(y_child, x_parent)
    else:
        raise ValueError(f"unknown space kind {space_kind!r}")
    return AnglePair(beta1=beta1, alpha2=alpha2)


def tangent_entailment_angles(
    u_parent: np.ndarray,
    v_child: np.ndarray,
    space_kind: str,
    c: float = 1.0,
) -> AnglePair:
    """Angles for tangent-space vectors; hyperbolic mode exp-maps them first."""
    if space_kind == "hyperbolic":
        return entailment_angles(
            exp_map_origin(u_parent, c), exp_map_origin(v_child, c), space_kind, c
        )
    return entailment_angles(u_parent, v_child, space_kind)
