"""Convex-hull pipeline: orbit hull, face extraction, projection, quotient.

The Euclidean convex hull of the truncated horoball-center orbit is
computed in R^{n+1}; facets whose support vector (the w solving
<p_i, w> = -1) is future-pointing timelike are the canonical faces.
Coplanar simplicial facets are merged into maximal polyhedral faces,
faces are grouped into group orbits, and facet pairings are extracted
from hull adjacency.  Orbit truncation is compensated by a rerun
stability certificate and by certifying only faces well below the
height horizon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .group import GroupSpec, OrbitSet, orbit
from .hull import IncrementalHull
from .matching import find_group_element, set_match
from .minkowski import (CausalClass, GeometryError, classify,
                        hyperboloid_to_klein, lorentz_product, minkowski_form)

SUPPORT_RESIDUAL_TOL = 1e-8
COPLANAR_TOL = 1e-8
CONVEX_SIDE_TOL = 1e-7
PAIR_TOL = 1e-6


@dataclass
class HullFace:
    """Maximal face of the orbit hull with future-timelike support."""
    vertex_ids: tuple
    support: np.ndarray
    max_height: float


@dataclass
class IdealCell:
    """Ideal polyhedron in the Klein model.

    Vertices are ideal (on the unit sphere); ``facets`` lists the
    (n-1)-dimensional boundary faces as sorted tuples of local vertex
    indices.  For n = 2 the vertex order is the circular boundary order.
    """
    klein_vertices: np.ndarray
    vertex_ids: tuple
    facets: list
    support: np.ndarray
    label: int = -1


@dataclass
class Pairing:
    source: tuple            # (cell index, facet index)
    target: tuple
    matrix: np.ndarray


@dataclass
class Decomposition:
    dimension: int
    cells: list
    cell_points: list        # decorated OrbitPoints per cell, vertex-aligned
    pairings: dict           # (cell, facet) -> Pairing
    unpaired: list
    class_sizes: list


def support_vector(points, tol: float = SUPPORT_RESIDUAL_TOL) -> np.ndarray:
    """The unique w with <p_i, w> = -1 for all given points.

    Over-determined systems are solved by least squares and rejected if
    the residual is visible at the given tolerance.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    k, d = P.shape
    if k < d:
        raise GeometryError(f"support vector needs at least {d} points, got {k}")
    J = minkowski_form(d)
    M = P @ J
    rhs = -np.ones(k)
    w, residual, rank, _ = np.linalg.lstsq(M, rhs, rcond=None)
    if rank < d:
        raise GeometryError("degenerate input: points are affinely dependent")
    scale = max(1.0, float(np.max(np.abs(P))))
    err = float(np.max(np.abs(M @ w - rhs)))
    if err > tol * scale:
        raise GeometryError(f"inconsistent support system, residual {err}")
    return w


def hull_faces(points, exact_mode: str = "auto"):
    """Canonical faces of the hull of a truncated orbit.

    Returns merged maximal faces sorted canonically; side and top
    facets created by the truncation (support not future timelike) are
    dropped here and the stability certificate guards the rest.
    """
    ops = list(points)
    coords = np.array([op.point for op in ops])
    d = coords.shape[1]
    if len(ops) < d:
        raise GeometryError(f"need at least {d} points, got {len(ops)}")

    def flat_single_face():
        # a flat configuration can still be one canonical face: all points
        # on a common support plane missing the origin (cone sections are
        # in convex position, so every point is a vertex)
        w = support_vector(coords)
        if classify(w) is CausalClass.TIMELIKE and w[0] > 0:
            return [HullFace(vertex_ids=tuple(range(len(ops))), support=w,
                             max_height=float(np.max(coords[:, 0])))]
        raise GeometryError("flat point set does not span a canonical face")

    if len(ops) == d:
        return flat_single_face()
    try:
        hull = IncrementalHull(coords, exact_mode)
    except GeometryError:
        return flat_single_face()
    J = minkowski_form(d)
    ep = []              # (facet, support w)
    for f in hull.facets:
        b = f.offset
        # canonical faces separate the origin from the hull: with the
        # outward normal the offset is negative; truncation lids are not
        if b >= -1e-12 * max(1.0, float(np.max(np.abs(coords)))):
            continue
        w = -(J @ f.normal) / b
        if classify(w) is CausalClass.TIMELIKE and w[0] > 0:
            ep.append((f, w))
    # merge ridge-connected facets with equal supports
    parent = list(range(len(ep)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    ridge_map = {}
    for i, (f, _) in enumerate(ep):
        from itertools import combinations
        for ridge in combinations(f.vertices, d - 1):
            ridge_map.setdefault(ridge, []).append(i)
    for inc in ridge_map.values():
        if len(inc) == 2:
            i, j = inc
            wi, wj = ep[i][1], ep[j][1]
            if np.max(np.abs(wi - wj)) <= COPLANAR_TOL * np.max(np.abs(wi + wj)):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(len(ep)):
        groups.setdefault(find(i), []).append(i)
    faces = []
    for members in groups.values():
        vs = sorted(set(v for i in members for v in ep[i][0].vertices))
        try:
            w = support_vector(coords[vs], tol=1e-5)
        except GeometryError:
            # sliver group hugging the truncation horizon; keep the shared
            # plane data, certification drops the face later
            w = np.mean([ep[i][1] for i in members], axis=0)
        faces.append(HullFace(vertex_ids=tuple(vs), support=w,
                              max_height=float(np.max(coords[vs, 0]))))
    faces.sort(key=lambda F: _face_sort_key(F, coords))
    return faces


def _face_sort_key(face: HullFace, coords):
    return tuple(sorted(tuple(np.round(coords[v], 9)) for v in face.vertex_ids))


def certified_faces(faces, height_bound: float):
    """Faces clear of the truncation horizon by the height/2 margin."""
    return [f for f in faces if f.max_height <= height_bound / 2.0]


def convex_side_check(faces, points, tol: float = CONVEX_SIDE_TOL):
    """All orbit points satisfy <q,w> <= -1 for every face support w."""
    from .minkowski import lorentz_gram
    coords = np.array([op.point for op in points])
    for f in faces:
        prods = lorentz_gram(coords, f.support[None, :]).ravel()
        if np.max(prods) > -1.0 + tol * max(1.0, float(np.max(np.abs(f.support)))):
            return False
    return True


def face_sets_equal(faces_a, points_a, faces_b, points_b, tol: float = PAIR_TOL) -> bool:
    """Geometric equality of two face collections as decorated vertex sets."""
    if len(faces_a) != len(faces_b):
        return False
    ca = np.array([op.point for op in points_a])
    cb = np.array([op.point for op in points_b])
    sets_a = [ca[list(f.vertex_ids)] for f in faces_a]
    sets_b = [cb[list(f.vertex_ids)] for f in faces_b]
    used = [False] * len(sets_b)
    for A in sets_a:
        hit = False
        for j, B in enumerate(sets_b):
            if not used[j] and set_match(A, B, tol * max(1.0, float(np.max(np.abs(A))))):
                used[j] = True
                hit = True
                break
        if not hit:
            return False
    return True


def stability_certificate(g: GroupSpec, word_bound: int, height_bound: float,
                          exact_mode: str = "auto") -> bool:
    """True iff the certified face set is unchanged under larger bounds."""
    pts_a = OrbitSet(orbit(g, word_bound, height_bound))
    pts_b = OrbitSet(orbit(g, word_bound + 1, 2.0 * height_bound))

    def faces_of(pts):
        if len(pts) < g.dimension + 1:
            return []       # no hull at all, vacuously no faces
        return [f for f in hull_faces(pts, exact_mode)
                if f.max_height <= height_bound / 2.0]

    try:
        faces_a = faces_of(pts_a)
        faces_b = faces_of(pts_b)
    except GeometryError:
        return False
    if not faces_a:
        # nothing certified: stable only when the orbit itself is already
        # complete (e.g. a trivial group), never when data is still growing
        return len(pts_a) == len(pts_b) and not faces_b
    return face_sets_equal(faces_a, pts_a.points, faces_b, pts_b.points)


# ---------------------------------------------------------------------------
# Projection to the Klein model and cell structure.
# ---------------------------------------------------------------------------

def _order_polygon(klein):
    """Circular order of a convex ideal polygon, canonical start, CCW."""
    c = klein.mean(axis=0)
    ang = np.arctan2(klein[:, 1] - c[1], klein[:, 0] - c[0])
    order = list(np.argsort(ang))
    keys = [tuple(np.round(klein[i], 9)) for i in order]
    start = keys.index(min(keys))
    return order[start:] + order[:start]


def _polytope_facets_3d(klein):
    """Facets of a convex 3-polytope with the given vertices.

    Returns sorted local-index tuples, coplanar triangles merged.
    """
    hull = IncrementalHull(klein, "auto")
    fac = hull.facets
    parent = list(range(len(fac)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    from itertools import combinations
    ridge_map = {}
    for i, f in enumerate(fac):
        for ridge in combinations(f.vertices, 2):
            ridge_map.setdefault(ridge, []).append(i)
    for inc in ridge_map.values():
        if len(inc) == 2:
            i, j = inc
            ni, oi = fac[i].normal, fac[i].offset
            nj, oj = fac[j].normal, fac[j].offset
            if min(np.max(np.abs(ni - nj)) + abs(oi - oj),
                   np.max(np.abs(ni + nj)) + abs(oi + oj)) <= COPLANAR_TOL * 10:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(len(fac)):
        groups.setdefault(find(i), []).append(i)
    return sorted(tuple(sorted(set(v for i in members for v in fac[i].vertices)))
                  for members in groups.values())


def ideal_cell_from_points(ops, support, dimension: int) -> IdealCell:
    """Build the Klein-model cell spanned by decorated ideal vertices."""
    coords = np.array([op.point for op in ops])
    klein = np.array([hyperboloid_to_klein(p) for p in coords])
    if dimension == 2:
        order = _order_polygon(klein)
        klein = klein[order]
        ops = [ops[i] for i in order]
        m = len(ops)
        facets = [tuple(sorted((i, (i + 1) % m))) for i in range(m)]
    else:
        keys = [tuple(np.round(k, 9)) for k in klein]
        order = sorted(range(len(ops)), key=lambda i: keys[i])
        klein = klein[order]
        ops = [ops[i] for i in order]
        facets = _polytope_facets_3d(klein)
    return IdealCell(klein_vertices=klein,
                     vertex_ids=tuple(op.index for op in ops),
                     facets=facets, support=np.asarray(support, float)), ops


def project_face(face: HullFace, points):
    """Vertical projection of a hull face to an ideal Klein cell."""
    ops = [points[v] for v in face.vertex_ids]
    cell, ops = ideal_cell_from_points(ops, face.support, len(face.support) - 1)
    return cell, ops


def cell_is_convex(cell: IdealCell, tol: float = 1e-9) -> bool:
    """Straight-line convexity of the cell in Klein coordinates."""
    k = cell.klein_vertices
    if k.shape[1] == 2:
        m = len(k)
        cross = []
        for i in range(m):
            a, b, c = k[i], k[(i + 1) % m], k[(i + 2) % m]
            u, v = b - a, c - b
            cross.append(u[0] * v[1] - u[1] * v[0])
        return all(x > -tol for x in cross) or all(x < tol for x in cross)
    hull = IncrementalHull(k, "auto")
    return len(hull.vertex_ids()) == len(k)


# ---------------------------------------------------------------------------
# Quotient assembly.
# ---------------------------------------------------------------------------

class _FaceClasses:
    """Union-find over faces with group elements on the edges.

    ``rel[i]`` maps face i onto its parent as a point set; find() path
    compression keeps the composed matrices consistent, so the matrix
    carrying any face onto its class representative is always available.
    """

    def __init__(self, n, dim):
        self.parent = list(range(n))
        self.rel = [np.eye(dim) for _ in range(n)]

    def find(self, i):
        if self.parent[i] == i:
            return i, self.rel[i]
        root, _ = self.find(self.parent[i])
        if self.parent[i] != root:
            self.rel[i] = self.rel[self.parent[i]] @ self.rel[i]
            self.parent[i] = root
        return root, self.rel[i]

    def union(self, i, j, gamma):
        """Record gamma . F_i = F_j."""
        ri, Ri = self.find(i)
        rj, Rj = self.find(j)
        if ri == rj:
            return
        from .group import lorentz_inverse
        self.parent[ri] = rj
        self.rel[ri] = Rj @ gamma @ lorentz_inverse(Ri)
        self.find(i)

    def matrix_between(self, i, j):
        """Matrix with M . F_i = F_j, valid when both share a root."""
        ri, Ri = self.find(i)
        rj, Rj = self.find(j)
        if ri != rj:
            return None
        from .group import lorentz_inverse
        return lorentz_inverse(Rj) @ Ri


def _face_coord_sets(faces, coords):
    return [coords[list(f.vertex_ids)] for f in faces]


def _lookup_face(face_sets, centroids, img, tol):
    c = img.mean(axis=0)
    close = np.nonzero(np.max(np.abs(centroids - c), axis=1) <= tol)[0]
    for idx in close:
        B = face_sets[idx]
        if B.shape == img.shape and set_match(img, B, tol):
            return int(idx)
    return None


def assemble_decomposition(faces, g: GroupSpec, points, word_bound: int,
                           all_faces=None) -> Decomposition:
    """Group certified faces into orbits and pair their facets.

    Orbit grouping walks generator images inside the enumerated face
    set (a union-find carrying the identifying matrices), with a
    pairwise matcher as a fallback for components the walk cannot join.
    ``all_faces`` may supply additional uncertified faces used to locate
    hull neighbors; unpaired facets are reported, never dropped.
    """
    if all_faces is None:
        all_faces = faces
    ops = list(points)
    coords = np.array([op.point for op in ops])
    dim = g.dimension + 1

    face_sets = _face_coord_sets(all_faces, coords)
    centroids = np.array([fs.mean(axis=0) for fs in face_sets])
    scale = max(1.0, float(np.max(np.abs(coords))))
    tol = PAIR_TOL * scale
    wanted = {id(f) for f in faces}
    certified_idx = [i for i, f in enumerate(all_faces) if id(f) in wanted]

    uf = _FaceClasses(len(all_faces), dim)
    letters = [m for _, m in g.letters()]
    for i, fs in enumerate(face_sets):
        for m in letters:
            img = fs @ m.T
            j = _lookup_face(face_sets, centroids, img, tol)
            if j is not None and j != i:
                uf.union(i, j, m)

    # fallback: merge remaining certified components pairwise
    roots = sorted({uf.find(i)[0] for i in certified_idx})
    for a in range(len(roots)):
        for b in range(a + 1, len(roots)):
            ra, rb = roots[a], roots[b]
            if uf.find(ra)[0] == uf.find(rb)[0]:
                continue
            A = face_sets[ra]
            B = face_sets[rb]
            M = find_group_element(g, word_bound, A, B,
                                   [ops[v] for v in all_faces[ra].vertex_ids],
                                   [ops[v] for v in all_faces[rb].vertex_ids])
            if M is not None:
                uf.union(ra, rb, M)

    # classes with at least one certified member become cells
    members = {}
    for i in certified_idx:
        root, _ = uf.find(i)
        members.setdefault(root, []).append(i)
    reps = {}
    for root, mem in members.items():
        reps[root] = min(mem, key=lambda i: _face_sort_key(all_faces[i], coords))
    order = sorted(reps.values(), key=lambda i: _face_sort_key(all_faces[i], coords))
    class_of = {}
    for ci, rep_idx in enumerate(order):
        root, _ = uf.find(rep_idx)
        class_of[root] = ci

    cells = []
    cell_points = []
    for rep_idx in order:
        cell, cops = project_face(all_faces[rep_idx], ops)
        cell.label = class_of[uf.find(rep_idx)[0]]
        cells.append(cell)
        cell_points.append(cops)
    class_sizes = [len(members[uf.find(rep_idx)[0]]) for rep_idx in order]

    # facet -> neighbor lookup over the full face list
    by_vertex = {}
    for idx, f in enumerate(all_faces):
        for v in f.vertex_ids:
            by_vertex.setdefault(v, set()).add(idx)

    def neighbor_of(face_idx, facet_global):
        sets = [by_vertex.get(v, set()) for v in facet_global]
        common = set.intersection(*sets) if sets else set()
        others = sorted(idx for idx in common if idx != face_idx)
        return others[0] if others else None

    pairings = {}
    unpaired = []
    for ci, cell in enumerate(cells):
        rep_idx = order[ci]
        for fi, facet in enumerate(cell.facets):
            facet_global = tuple(cell_points[ci][v].index for v in facet)
            nb = neighbor_of(rep_idx, facet_global)
            if nb is None:
                unpaired.append(((ci, fi), "no hull neighbor (truncation)"))
                continue
            nb_root, _ = uf.find(nb)
            if nb_root not in class_of:
                unpaired.append(((ci, fi), "neighbor face not in a certified class"))
                continue
            cj = class_of[nb_root]
            M = uf.matrix_between(nb, order[cj])
            img = np.array([ops[v].point for v in facet_global]) @ M.T
            fj = _find_facet(cells[cj], cell_points[cj], img)
            if fj is None:
                unpaired.append(((ci, fi), "no matching facet on paired cell"))
                continue
            pairings[(ci, fi)] = Pairing(source=(ci, fi), target=(cj, fj), matrix=M)
    return Decomposition(dimension=g.dimension, cells=cells,
                         cell_points=cell_points, pairings=pairings,
                         unpaired=unpaired, class_sizes=class_sizes)


def _find_facet(cell: IdealCell, cops, target_coords):
    scale = max(1.0, float(np.max(np.abs(target_coords))))
    for fi, facet in enumerate(cell.facets):
        own = np.array([cops[v].point for v in facet])
        if own.shape == target_coords.shape and set_match(own, target_coords,
                                                          PAIR_TOL * scale):
            return fi
    return None


def count_face_classes(dec: Decomposition, k: int) -> int:
    """Number of orbit classes of k-dimensional cell faces.

    k = n-1 counts facet classes (edge classes for n = 2), k = 1 counts
    edge classes for n = 3; identifications are generated by the facet
    pairings.
    """
    n = dec.dimension
    items = {}
    for ci, cell in enumerate(dec.cells):
        for sub in _k_faces(cell, k, n):
            items[(ci, sub)] = (ci, sub)
    parent = {key: key for key in items}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for (ci, fi), pairing in dec.pairings.items():
        cj, fj = pairing.target
        facet = dec.cells[ci].facets[fi]
        M = pairing.matrix
        for sub in _k_faces(dec.cells[ci], k, n):
            if not set(sub) <= set(facet):
                continue
            img = np.array([dec.cell_points[ci][v].point for v in sub]) @ M.T
            match = None
            for sub_j in _k_faces(dec.cells[cj], k, n):
                own = np.array([dec.cell_points[cj][v].point for v in sub_j])
                if own.shape == img.shape and set_match(own, img,
                                                        PAIR_TOL * max(1.0, float(np.max(np.abs(img))))):
                    match = sub_j
                    break
            if match is not None:
                union((ci, sub), (cj, match))
    return len({find(key) for key in items})


def _k_faces(cell: IdealCell, k: int, n: int):
    if k == n - 1:
        return [tuple(f) for f in cell.facets]
    if k == 0:
        return [(i,) for i in range(len(cell.klein_vertices))]
    if k == 1 and n == 3:
        edges = set()
        facets = [set(f) for f in cell.facets]
        for i in range(len(facets)):
            for j in range(i + 1, len(facets)):
                inter = facets[i] & facets[j]
                if len(inter) == 2:
                    edges.add(tuple(sorted(inter)))
        return sorted(edges)
    raise GeometryError(f"unsupported face dimension {k} for n = {n}")


# ---------------------------------------------------------------------------
# Lorentzian facet normals and dihedral angles.
# ---------------------------------------------------------------------------

def facet_normal(cell_coords, facet_ids) -> np.ndarray:
    """Spacelike normal of the plane through origin spanned by facet rays."""
    P = np.array([cell_coords[i] for i in facet_ids])
    J = minkowski_form(P.shape[1])
    _, s, vt = np.linalg.svd(P @ J)
    u = vt[-1]
    return u


def outward_facet_normal(cell_coords, facet_ids) -> np.ndarray:
    u = facet_normal(cell_coords, facet_ids)
    others = [i for i in range(len(cell_coords)) if i not in facet_ids]
    sign = sum(lorentz_product(cell_coords[i], u) for i in others)
    return -u if sign > 0 else u


def dihedral_angles(cell: IdealCell, cops):
    """Interior dihedral angle along each edge of a 3-dimensional cell."""
    coords = np.array([op.point for op in cops])
    normals = {tuple(f): outward_facet_normal(coords, f) for f in cell.facets}
    out = {}
    for e in _k_faces(cell, 1, 3):
        adj = [tuple(f) for f in cell.facets if set(e) <= set(f)]
        if len(adj) != 2:
            continue
        u1, u2 = normals[adj[0]], normals[adj[1]]
        c = -lorentz_product(u1, u2) / np.sqrt(
            lorentz_product(u1, u1) * lorentz_product(u2, u2))
        out[e] = float(np.arccos(np.clip(c, -1.0, 1.0)))
    return out
