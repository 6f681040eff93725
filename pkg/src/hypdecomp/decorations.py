"""Decorated horoballs and the elementary geometry between them.

A horoball is encoded entirely by its center p on the positive light
cone: the region is {w : -1 <= <w,p> < 0}, so rescaling p by lambda > 1
shrinks the horoball.  Distances, shortest connecting segments and
bisecting fences all reduce to algebra in the Lorentzian product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .minkowski import (CausalClass, GeometryError, Model, ModelPoint,
                        classify, lorentz_product)

PROPORTIONAL_TOL = 1e-12


@dataclass(frozen=True)
class Horoball:
    """Decorated cusp lift; the center scale encodes the horoball size."""
    center: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", c)
        if classify(c) is not CausalClass.LIGHTLIKE or c[0] <= 0:
            raise GeometryError("horoball center must be future lightlike")

    def signed_distance(self, x) -> float:
        """Signed distance from a hyperboloid point to the horosphere."""
        return math.log(-lorentz_product(x, self.center))


@dataclass(frozen=True)
class ShortCut:
    """Shortest segment between two disjoint (or tangent) horoballs."""
    endpoints: tuple
    length: float
    pair: tuple


@dataclass(frozen=True)
class MiddleFence:
    """Bisecting geodesic hyperplane {x : <x,p> = <x,q>} of a short cut.

    Stored by the spacelike Lorentzian normal p - q, so all fence
    queries are algebraic and dimension independent.
    """
    normal: np.ndarray
    centers: tuple

    def side(self, x) -> float:
        return lorentz_product(x, self.normal)

    def contains(self, x, tol: float = 1e-9) -> bool:
        scale = max(1.0, float(np.max(np.abs(x))) * float(np.max(np.abs(self.normal))))
        return abs(self.side(x)) <= tol * scale


def _check_pair(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    for v in (p, q):
        if classify(v) is not CausalClass.LIGHTLIKE or v[0] <= 0:
            raise GeometryError("expected future lightlike centers")
    cross = p / np.linalg.norm(p) - q / np.linalg.norm(q)
    if np.linalg.norm(cross) < PROPORTIONAL_TOL:
        raise GeometryError("horoballs share their ideal point")
    return p, q


def horoball_distance(p, q) -> float:
    """Signed distance log(-<p,q>/2) between the two horospheres.

    Negative values mean overlapping horoballs, zero means tangency.
    The closed form is validated against the explicit upper-half-space
    construction in the test suite before anything downstream trusts it.
    """
    p, q = _check_pair(p, q)
    return math.log(-lorentz_product(p, q) / 2.0)


def short_cut(p, q, tol: float = 1e-9) -> ShortCut:
    """Geodesic segment between the horoballs of p and q.

    The connecting geodesic is x(t) = (e^t p + e^-t q)/sqrt(2s) with
    s = -<p,q>; clipping it to the complement of both horoballs leaves
    the segment t in [-log(s/2)/2, log(s/2)/2] of length log(s/2).
    """
    p, q = _check_pair(p, q)
    d = horoball_distance(p, q)
    if d < -tol:
        raise GeometryError(f"horoballs overlap (distance {d})")
    s = -lorentz_product(p, q)
    t = max(0.0, 0.5 * math.log(s / 2.0))
    scale = 1.0 / math.sqrt(2.0 * s)
    x_p = (math.exp(t) * p + math.exp(-t) * q) * scale
    x_q = (math.exp(-t) * p + math.exp(t) * q) * scale
    return ShortCut(endpoints=(ModelPoint(Model.HYPERBOLOID, x_p),
                               ModelPoint(Model.HYPERBOLOID, x_q)),
                    length=max(0.0, d), pair=(p, q))


def middle_fence(p, q) -> MiddleFence:
    """Locus of points equidistant from the two horoballs."""
    p, q = _check_pair(p, q)
    u = p - q
    if classify(u) is not CausalClass.SPACELIKE:
        raise GeometryError("fence normal p - q is not spacelike")
    return MiddleFence(normal=u, centers=(p, q))


def shadow_radius(d: float) -> float:
    """Radius (1/2) sqrt(1 + 2 e^-d) of the projected-shadow disk.

    Strictly decreasing in d with limit 1/2; defined for d >= 0 only,
    overlapping horoballs are rejected rather than extrapolated.
    """
    if d < 0:
        raise GeometryError("shadow radius is defined for d >= 0")
    return 0.5 * math.sqrt(1.0 + 2.0 * math.exp(-d))


def horoball_plane_distance(p, u) -> float:
    """Distance from the horoball of p to the plane {x : <x,u> = 0}.

    Negative values mean the horoball crosses the plane; p on the
    plane's ideal boundary (<p,u> = 0) is rejected.
    """
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    uu = lorentz_product(u, u)
    if uu <= 0:
        raise GeometryError("plane normal must be spacelike")
    pu = abs(lorentz_product(p, u))
    if pu < PROPORTIONAL_TOL * float(np.max(np.abs(p)) * np.max(np.abs(u))):
        raise GeometryError("horoball center lies on the plane's ideal boundary")
    return math.log(pu / math.sqrt(uu))
