"""Cut-locus construction and the decomposition dual to it.

The cut locus of the decoration set is assembled from middle fences.
In Klein coordinates every fence is an affine hyperplane, so the
nearness domain of each horoball is a convex polytope intersected with
the unit ball and the whole complex reduces to linear algebra: domain
vertices are 0-cells, polytope edges are 1-cells, fence facets are
(n-1)-cells.  Dualizing (edges from facets, polygons from 1-cells,
regions from 0-cells in H^3; one step lower in H^2) rebuilds the
decomposition independently of the convex-hull route, which is exactly
what makes the cross-validation meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .decorations import horoball_distance, short_cut
from .ep_hull import (Decomposition, HullFace, assemble_decomposition,
                      count_face_classes)
from .group import GroupSpec, OrbitSet, orbit
from .matching import GammaClasses, find_group_element
from .minkowski import GeometryError, klein_to_hyperboloid, lorentz_gram

STRATUM_TOL = 1e-8
BALL_MARGIN = 1e-7
BOX = 1.5


@dataclass
class ReturnPath:
    """Orbit class of horoball pairs joined by a shortest segment."""
    class_id: int
    length: float
    cut: object                         # ShortCut of the class representative
    lifts: list                         # (cusp_id, partner OrbitPoint)


@dataclass
class CutCell:
    dim: int
    nearest_ids: tuple                  # orbit indices of nearest horoballs
    nearest_points: list
    sample: np.ndarray                  # hyperboloid point in the interior
    base_cusp: int
    class_id: int = -1


@dataclass
class CutComplex:
    dimension: int
    cells: dict                         # stratum dim -> list of CutCell
    class_counts: dict                  # stratum dim -> number of orbits
    orbit_points: OrbitSet


@dataclass
class CrossValidation:
    ok: bool
    detail: str
    matched: int
    max_deviation: float


# ---------------------------------------------------------------------------
# Return paths.
# ---------------------------------------------------------------------------

def enumerate_return_paths(g: GroupSpec, length_bound: float,
                           word_bound: int = 5, height_bound: float = 30.0,
                           points: OrbitSet = None):
    """Orbit classes of horoball pairs within the length bound.

    Deterministic and sorted by length; the decoration symmetry and
    disjointness conditions are assumed to hold already.
    """
    if length_bound <= 0:
        raise GeometryError("length bound must be positive")
    if points is None:
        points = OrbitSet(orbit(g, word_bound, height_bound))
    base_ops = []
    for c, p in enumerate(g.cusp_reps):
        op = points.find(p)
        if op is None:
            raise GeometryError(f"cusp representative {c} missing from orbit")
        base_ops.append(op)
    classes = GammaClasses(g, word_bound)
    paths = {}
    for c, base in enumerate(base_ops):
        p = base.point
        for q in points:
            ray_p = p / np.linalg.norm(p)
            ray_q = q.point / np.linalg.norm(q.point)
            if np.linalg.norm(ray_p - ray_q) < 1e-10:
                continue
            d = horoball_distance(p, q.point)
            if d > length_bound + 1e-9:
                continue
            cid, _ = classes.classify(np.array([p, q.point]), [base, q])
            if cid not in paths:
                paths[cid] = ReturnPath(class_id=cid, length=max(0.0, d),
                                        cut=short_cut(p, q.point),
                                        lifts=[])
            paths[cid].lifts.append((c, q))
    out = sorted(paths.values(), key=lambda rp: (round(rp.length, 9), rp.class_id))
    return out


def return_path_certificate(g: GroupSpec, length_bound: float,
                            word_bound: int, height_bound: float) -> bool:
    """Return-path classes stable under enlarged orbit bounds."""
    a = enumerate_return_paths(g, length_bound, word_bound, height_bound)
    b = enumerate_return_paths(g, length_bound, word_bound + 1,
                               2.0 * height_bound)
    if len(a) != len(b):
        return False
    return all(abs(x.length - y.length) < 1e-8 for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Domain polytopes in the Klein chart.
# ---------------------------------------------------------------------------

def _klein_constraints(p, competitors):
    """Rows (a, b) with domain(p) = {k : a . k >= b} per competitor."""
    A = []
    b = []
    for q in competitors:
        u = p - q.point
        A.append(u[1:])
        b.append(u[0])
    return np.array(A), np.array(b)


def _box_constraints(n):
    A = np.vstack([np.eye(n), -np.eye(n)])
    b = -BOX * np.ones(2 * n)
    return A, b


def _vertex_enumeration(A, b, n):
    """Feasible basic points of {A k >= b} with their active sets."""
    m = len(A)
    vertices = []
    for combo in combinations(range(m), n):
        M = A[list(combo)]
        try:
            k = np.linalg.solve(M, b[list(combo)])
        except np.linalg.LinAlgError:
            continue
        resid = A @ k - b
        if np.min(resid) < -1e-9:
            continue
        active = tuple(i for i in range(m) if abs(resid[i]) <= 1e-8)
        vertices.append((k, active))
    # dedupe coincident basic solutions
    uniq = []
    for k, active in vertices:
        hit = False
        for k2, act2, _ in uniq:
            if np.max(np.abs(k - k2)) < 1e-9:
                hit = True
                break
        if not hit:
            uniq.append((k, active, None))
    return [(k, active) for k, active, _ in uniq]


def _inside_ball(k, margin: float = BALL_MARGIN) -> bool:
    return float(k @ k) < (1.0 - margin) ** 2


def _log_distances(point_h, centers):
    prods = -lorentz_gram(point_h[None, :], centers).ravel()
    return np.log(prods)


def cut_locus_complex(paths, g: GroupSpec, word_bound: int = 5,
                      points: OrbitSet = None) -> CutComplex:
    """Stratified cell complex of the cut locus near the base horoballs.

    For each cusp the nearness domain is intersected from fence
    half-spaces; vertices, edges and fence facets strictly inside the
    unit ball become 0-, 1- and (n-1)-cells.  Cells are grouped into
    group orbits so the complex can be compared across reruns.
    """
    if not paths:
        raise GeometryError("empty return path list")
    n = g.dimension
    if points is None:
        raise GeometryError("cut_locus_complex needs the orbit used for paths")
    competitors = {c: [] for c in range(len(g.cusp_reps))}
    seen = {c: set() for c in range(len(g.cusp_reps))}
    for rp in paths:
        for c, q in rp.lifts:
            if q.index not in seen[c]:
                seen[c].add(q.index)
                competitors[c].append(q)
    cells = {k: [] for k in range(n)}
    for c, p_vec in enumerate(g.cusp_reps):
        comp = competitors[c]
        if not comp:
            continue
        base_op = points.find(p_vec)
        Af, bf = _klein_constraints(p_vec, comp)
        Ab, bb = _box_constraints(n)
        A = np.vstack([Af, Ab])
        b = np.concatenate([bf, bb])
        nf = len(comp)
        verts = _vertex_enumeration(A, b, n)
        centers = np.array([p_vec] + [q.point for q in comp])

        def nearest_at(k_point):
            x = klein_to_hyperboloid(k_point)
            d = _log_distances(x, centers)
            dmin = float(np.min(d))
            return x, tuple(np.nonzero(d <= dmin + STRATUM_TOL * max(1.0, abs(dmin)))[0])

        # 0-cells: vertices with n active fences, strictly inside the ball
        for k, active in verts:
            fences = [i for i in active if i < nf]
            if len(fences) < n or not _inside_ball(k):
                continue
            x, near = nearest_at(k)
            if len(near) < n + 1:
                raise GeometryError("inconsistent stratification at a vertex")
            ids = tuple(sorted([base_op.index] + [comp[i - 1].index
                                                  for i in near if i > 0]))
            ops = [points[i] for i in ids]
            cells[0].append(CutCell(0, ids, ops, x, c))
        # (n-1)-cells: one per fence carrying a facet
        for qi in range(nf):
            witnesses = [k for k, active in verts if qi in active]
            if len(witnesses) < n:
                continue
            hit = None
            short = False
            for sample in _facet_samples(np.array(witnesses), A, b, qi):
                x, near = nearest_at(sample)
                if len(near) < 2:
                    short = True
                    continue
                if len(near) == 2:
                    hit = x
                    break
            if hit is None:
                if short:
                    raise GeometryError("inconsistent stratification on a fence")
                continue   # every sample landed on a finer stratum
            ids = tuple(sorted([base_op.index, comp[qi].index]))
            cells[n - 1].append(CutCell(n - 1, ids, [points[i] for i in ids],
                                        hit, c))
        # 1-cells for n = 3: polytope edges inside the ball
        if n == 3:
            for (k1, a1), (k2, a2) in combinations(verts, 2):
                shared = [i for i in set(a1) & set(a2) if i < nf]
                if len(shared) < 2:
                    continue
                mid = 0.5 * (k1 + k2)
                if not _inside_ball(mid):
                    continue
                x, near = nearest_at(mid)
                if len(near) < 3:
                    raise GeometryError("inconsistent stratification on an edge")
                if len(near) != 3:
                    continue
                ids = tuple(sorted([base_op.index] + [comp[i - 1].index
                                                      for i in near if i > 0]))
                if any(cc.nearest_ids == ids and np.max(np.abs(cc.sample - x)) < 1e-9
                       for cc in cells[1]):
                    continue
                cells[1].append(CutCell(1, ids, [points[i] for i in ids], x, c))

    # orbit classification per stratum
    class_counts = {}
    for k in range(n):
        classes = GammaClasses(g, word_bound)
        dedup = []
        for cell in cells[k]:
            coords = np.array([op.point for op in cell.nearest_points])
            cid, _ = classes.classify(coords, cell.nearest_points)
            cell.class_id = cid
            dedup.append(cell)
        class_counts[k] = len(classes.reps)
    return CutComplex(dimension=n, cells=cells, class_counts=class_counts,
                      orbit_points=points)


def _facet_samples(witnesses, A, b, qi):
    """Candidate interior samples of the facet on fence qi, inside the ball."""
    inside = [w for w in witnesses if _inside_ball(w)]
    cands = []
    if inside:
        cands.append(np.mean(inside, axis=0))
    for i in range(len(witnesses)):
        for j in range(i + 1, len(witnesses)):
            for t in (0.5, 0.25, 0.75, 0.1):
                cands.append(t * witnesses[i] + (1.0 - t) * witnesses[j])
    cands.append(np.mean(witnesses, axis=0))
    for k in cands:
        if not _inside_ball(k):
            continue
        resid = A @ k - b
        if resid[qi] > 1e-8 or np.min(resid) < -1e-9:
            continue
        yield k


# ---------------------------------------------------------------------------
# Dual decomposition.
# ---------------------------------------------------------------------------

def dual_decomposition(complex_: CutComplex, g: GroupSpec,
                       word_bound: int = 5) -> Decomposition:
    """Decomposition dual to the cut locus.

    Regions come from 0-cells (their ideal vertices are the nearest
    horoball centers), faces from 1-cells and edges from (n-1)-cells;
    the quotient is assembled exactly like the hull route so the two
    results are directly comparable.
    """
    n = g.dimension
    points = complex_.orbit_points
    zero_cells = complex_.cells[0]
    if not zero_cells:
        raise GeometryError("no 0-cells: bounds too small for a dual region")
    seen = set()
    pseudo = []
    for cell in zero_cells:
        if cell.nearest_ids in seen:
            continue
        seen.add(cell.nearest_ids)
        coords = np.array([points[i].point for i in cell.nearest_ids])
        lam = -1.0 / float(lorentz_gram(cell.sample[None, :], coords[:1])[0, 0])
        support = lam * cell.sample
        pseudo.append(HullFace(vertex_ids=cell.nearest_ids, support=support,
                               max_height=float(np.max(coords[:, 0]))))
    # saturate under generators so every representative keeps its
    # neighbors inside the patch (pairings stay total)
    patch = list(pseudo)
    frontier = list(pseudo)
    for _ in range(2):
        extra = []
        for face in frontier:
            for _, m in g.letters():
                img_ids = []
                for i in face.vertex_ids:
                    op = points.find(m @ points[i].point)
                    if op is None:
                        break
                    img_ids.append(op.index)
                else:
                    ids = tuple(sorted(img_ids))
                    if ids not in seen:
                        seen.add(ids)
                        extra.append(HullFace(
                            vertex_ids=ids, support=m @ face.support,
                            max_height=float(max(points[i].point[0] for i in ids))))
        patch.extend(extra)
        frontier = extra
        if not extra:
            break
    # concyclicity of the ideal vertices around each 1-cell (n = 3)
    if n == 3:
        for cell in complex_.cells[1]:
            if not _concyclic(points, cell):
                raise GeometryError(
                    f"dual face vertices fail the common-circle test: "
                    f"{cell.nearest_ids}")
    return assemble_decomposition(pseudo, g, points, word_bound,
                                  all_faces=patch)


def _concyclic(points, cell: CutCell, tol: float = 1e-7) -> bool:
    """Ideal points around a 1-cell lie on a circle centered at its pole.

    Equivalently, the normalized centers all have the same product with
    the sample point on the equidistance geodesic, and they span a
    hyperplane section of the ball (a geodesic plane).
    """
    coords = np.array([op.point for op in cell.nearest_points])
    prods = lorentz_gram(cell.sample[None, :], coords).ravel()
    if np.max(np.abs(prods - prods[0])) > tol * max(1.0, float(np.max(np.abs(prods)))):
        return False
    if len(coords) < 4:
        return True   # three points are always concyclic
    kl = coords[:, 1:] / coords[:, :1]
    base = kl[0]
    M = kl[1:] - base
    _, s, _ = np.linalg.svd(M)
    return s[-1] <= tol * max(1.0, s[0])


def dual_edges(complex_: CutComplex):
    """One dual edge per (n-1)-cell orbit: the short cut extended to the
    complete geodesic between the two centers it separates."""
    n = complex_.dimension
    points = complex_.orbit_points
    out = {}
    for cell in complex_.cells[n - 1]:
        if cell.class_id in out:
            continue
        p, q = (points[i].point for i in cell.nearest_ids)
        out[cell.class_id] = short_cut(p, q)
    return [out[cid] for cid in sorted(out)]


def dual_count_identity(complex_: CutComplex, dual: Decomposition) -> dict:
    """Counts of dual objects against cut-locus cell orbits per stratum."""
    n = complex_.dimension
    out = {
        "regions": (len(dual.cells), complex_.class_counts[0]),
        "edges": (count_face_classes(dual, n - 1) if n == 2
                  else count_face_classes(dual, 1), None),
    }
    # edges are dual to (n-1)-cells in both dimensions
    out["edges"] = (out["edges"][0], complex_.class_counts[n - 1])
    if n == 3:
        out["faces"] = (count_face_classes(dual, 2), complex_.class_counts[1])
    return out


# ---------------------------------------------------------------------------
# Cross validation of the two constructions.
# ---------------------------------------------------------------------------

def cross_validate(a: Decomposition, b: Decomposition, g: GroupSpec,
                   word_bound: int = 5, tol: float = 1e-7) -> CrossValidation:
    """Match the cells of two decompositions of the same manifold."""
    if a.dimension != b.dimension:
        return CrossValidation(False, "dimension mismatch", 0, np.inf)
    if len(a.cells) != len(b.cells):
        return CrossValidation(
            False, f"cell counts differ: {len(a.cells)} vs {len(b.cells)}",
            0, np.inf)
    used = set()
    worst = 0.0
    for ci, cell in enumerate(a.cells):
        A = np.array([op.point for op in a.cell_points[ci]])
        hit = None
        for cj in range(len(b.cells)):
            if cj in used:
                continue
            B = np.array([op.point for op in b.cell_points[cj]])
            M = find_group_element(g, word_bound, A, B,
                                   a.cell_points[ci], b.cell_points[cj])
            if M is not None:
                hit = (cj, M)
                break
        if hit is None:
            return CrossValidation(False, f"cell {ci} has no partner", ci, worst)
        cj, M = hit
        used.add(cj)
        B = np.array([op.point for op in b.cell_points[cj]])
        img = A @ M.T
        dev = _set_deviation(img, B)
        worst = max(worst, dev)
        if dev > tol * max(1.0, float(np.max(np.abs(B)))):
            return CrossValidation(False, f"cell {ci} vertices deviate by {dev}",
                                   ci, worst)
    return CrossValidation(True, "decompositions agree", len(a.cells), worst)


def _set_deviation(A, B) -> float:
    used = np.zeros(len(B), dtype=bool)
    worst = 0.0
    for a_row in A:
        d = np.max(np.abs(B - a_row), axis=1)
        d[used] = np.inf
        j = int(np.argmin(d))
        used[j] = True
        worst = max(worst, float(d[j]))
    return worst
