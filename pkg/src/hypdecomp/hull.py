"""Incremental convex hull in R^d for d in {3, 4}.

Written for point sets in strictly convex position with frequent exact
coplanarities (canonical decompositions are often non-simplicial), so
the orientation predicate is a floating-point evaluation with an error
filter and an exact-rational fallback: binary floats are rationals, so
the fallback sign is exact and the hull topology is never guessed.

Insertion is sequential in the given point order; the whole computation
is deterministic.  Facets are simplicial; coplanar groups are merged by
the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .minkowski import GeometryError

# |det| below FILTER_REL * (product of row norms) is re-evaluated exactly.
FILTER_REL = 1e-11


@dataclass
class Facet:
    vertices: tuple          # point indices, sorted
    sign: int                # +1: positive orientation det means "outside"
    normal: np.ndarray       # outward Euclidean normal, unit length
    offset: float            # normal @ x = offset on the facet plane


def _det_exact(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = Fraction(0)
    sign = 1
    for j in range(n):
        if rows[0][j]:
            minor = [[r[k] for k in range(n) if k != j] for r in rows[1:]]
            total += sign * rows[0][j] * _det_exact(minor)
        sign = -sign
    return total


class OrientPredicate:
    """Sign of det[p1-p0, ..., p_{d-1}-p0, q-p0] with exact fallback."""

    def __init__(self, points, mode: str = "auto"):
        self.points = np.asarray(points, dtype=float)
        self.mode = mode
        self._frac = {}
        self.exact_evals = 0

    def _frac_row(self, i):
        row = self._frac.get(i)
        if row is None:
            row = tuple(Fraction(float(c)) for c in self.points[i])
            self._frac[i] = row
        return row

    def sign(self, base_ids, q_id=None, q_point=None) -> int:
        pts = self.points
        p0 = pts[base_ids[0]]
        rows = [pts[i] - p0 for i in base_ids[1:]]
        rows.append((pts[q_id] if q_point is None else np.asarray(q_point, float)) - p0)
        M = np.array(rows)
        det = float(np.linalg.det(M))
        scale = float(np.prod(np.linalg.norm(M, axis=1)))
        if self.mode != "always" and abs(det) > FILTER_REL * max(scale, 1e-300):
            return 1 if det > 0 else -1
        # exact path
        self.exact_evals += 1
        r0 = self._frac_row(base_ids[0])
        frows = []
        for i in base_ids[1:]:
            ri = self._frac_row(i)
            frows.append([a - b for a, b in zip(ri, r0)])
        if q_point is None:
            rq = self._frac_row(q_id)
        else:
            rq = tuple(Fraction(float(c)) for c in q_point)
        frows.append([a - b for a, b in zip(rq, r0)])
        d = _det_exact(frows)
        return (d > 0) - (d < 0)


def _initial_simplex(pred: OrientPredicate):
    pts = pred.points
    n, d = pts.shape
    ids = [0]
    # grow an affinely independent set greedily, largest measure first
    dists = np.linalg.norm(pts - pts[0], axis=1)
    ids.append(int(np.argmax(dists)))
    if dists[ids[1]] == 0.0:
        raise GeometryError("all points coincide")
    while len(ids) < d + 1:
        base = pts[ids]
        diffs = base[1:] - base[0]
        rel = pts - pts[ids[0]]
        # squared volume of the simplex extended by each candidate
        G = diffs @ diffs.T
        proj = rel @ diffs.T
        try:
            sol = np.linalg.solve(G, proj.T)
        except np.linalg.LinAlgError:
            raise GeometryError("degenerate input: points are affinely dependent")
        resid = np.einsum("ij,ij->i", rel, rel) - np.einsum("ji,ij->i", sol, proj)
        if len(ids) == d:
            # last vertex must be strictly off the hyperplane; verify the
            # float winner exactly and fall back to a scan if needed
            k = None
            for cand in np.argsort(-resid):
                if pred.sign(tuple(ids), int(cand)) != 0:
                    k = int(cand)
                    break
                if resid[cand] <= 0:
                    break
            if k is None:
                raise GeometryError("degenerate input: points span no full-"
                                    "dimensional hull")
        else:
            k = int(np.argmax(resid))
            if resid[k] <= 0:
                raise GeometryError("degenerate input: points are affinely dependent")
        ids.append(k)
    return ids


def _facet_plane(pts, vertices):
    """Outward-agnostic plane (unit normal, offset) through the vertices."""
    base = pts[list(vertices)]
    diffs = base[1:] - base[0]
    # null vector of the difference matrix
    _, _, vt = np.linalg.svd(diffs)
    normal = vt[-1]
    return normal, float(normal @ base[0])


class IncrementalHull:
    def __init__(self, points, exact_mode: str = "auto"):
        points = np.asarray(points, dtype=float)
        n, d = points.shape
        if d not in (3, 4):
            raise GeometryError(f"hull implemented for R^3 and R^4 only, got R^{d}")
        if n < d + 1:
            raise GeometryError(f"need at least {d + 1} points, got {n}")
        self.points = points
        self.dim = d
        self.pred = OrientPredicate(points, exact_mode)
        simplex = _initial_simplex(self.pred)
        self._centroid = points[simplex].mean(axis=0)
        self._centroid_frac = tuple(
            sum(Fraction(float(points[i][j])) for i in simplex) / (d + 1)
            for j in range(d))
        self.facets: list = []
        for omit in range(d + 1):
            vs = tuple(sorted(simplex[k] for k in range(d + 1) if k != omit))
            self._add_facet(vs)
        for q in range(n):
            if q in simplex:
                continue
            self._insert(q)

    def _orient_centroid(self, vs) -> int:
        s = self.pred.sign(vs, q_point=self._centroid)
        if s == 0:
            # centroid exactly on the plane cannot happen for a valid facet;
            # re-check with the exact fraction centroid to be sure
            r0 = self.pred._frac_row(vs[0])
            rows = []
            for i in vs[1:]:
                ri = self.pred._frac_row(i)
                rows.append([a - b for a, b in zip(ri, r0)])
            rows.append([a - b for a, b in zip(self._centroid_frac, r0)])
            dd = _det_exact(rows)
            s = (dd > 0) - (dd < 0)
        return s

    def _add_facet(self, vs):
        s = self._orient_centroid(vs)
        if s == 0:
            raise GeometryError(f"degenerate facet {vs}")
        normal, offset = _facet_plane(self.points, vs)
        if normal @ self._centroid > offset:
            normal, offset = -normal, -offset
        self.facets.append(Facet(vertices=vs, sign=-s, normal=normal,
                                 offset=offset))

    def _outside(self, facet: Facet, q: int) -> bool:
        # cheap float screen first, exact only near the plane
        margin = self.points[q] @ facet.normal - facet.offset
        scale = max(1.0, abs(facet.offset))
        if margin > 1e-7 * scale:
            return True
        if margin < -1e-7 * scale:
            return False
        return facet.sign * self.pred.sign(facet.vertices, q) > 0

    def _insert(self, q: int):
        visible = [f for f in self.facets if self._outside(f, q)]
        if not visible:
            return
        ridge_count = {}
        for f in visible:
            for ridge in combinations(f.vertices, self.dim - 1):
                ridge_count[ridge] = ridge_count.get(ridge, 0) + 1
        horizon = [r for r, c in ridge_count.items() if c == 1]
        visible_set = set(id(f) for f in visible)
        self.facets = [f for f in self.facets if id(f) not in visible_set]
        for ridge in horizon:
            self._add_facet(tuple(sorted(ridge + (q,))))

    def ridge_neighbors(self):
        """Map ridge (sorted vertex tuple) -> the two incident facet indices."""
        ridges = {}
        for idx, f in enumerate(self.facets):
            for ridge in combinations(f.vertices, self.dim - 1):
                ridges.setdefault(ridge, []).append(idx)
        for ridge, inc in ridges.items():
            if len(inc) != 2:
                raise GeometryError(f"hull inconsistency at ridge {ridge}")
        return ridges

    def vertex_ids(self):
        out = set()
        for f in self.facets:
            out.update(f.vertices)
        return sorted(out)


def convex_hull(points, exact_mode: str = "auto") -> IncrementalHull:
    return IncrementalHull(points, exact_mode)
