"""Totally geodesic boundary machinery on the doubled manifold.

Covers the parts of the pipeline that only exist when the input carries
boundary-wall reflections: exact symmetrization of decorations, the
mirror-symmetry check of the hull, and the quotient that turns the
doubled decomposition into cells of the original manifold, truncating
the wall-crossing ones along the polar hyperplane of the wall.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decorations import horoball_distance, horoball_plane_distance
from .ep_hull import Decomposition, IdealCell
from .group import (GroupSpec, _matrix_key, lorentz_inverse, orbit,
                    reflection_normal)
from .matching import find_group_element, set_match
from .minkowski import (CausalClass, GeometryError, classify,
                        klein_to_hyperboloid, lorentz_product)

PAIR_TOL = 1e-6
ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class ProjectivePoint:
    """Point of RP^n as a sign-normalized homogeneous vector."""
    vector: np.ndarray

    @property
    def at_infinity(self) -> bool:
        v = self.vector
        return abs(v[0]) <= 1e-12 * float(np.max(np.abs(v)))

    @property
    def klein(self):
        """Klein-chart coordinates, or None for points at infinity."""
        if self.at_infinity:
            return None
        return self.vector[1:] / self.vector[0]


def polar_vertex(u) -> ProjectivePoint:
    """Projective pole of the hyperplane {x : <x,u> = 0}.

    For spacelike u the pole lies outside the closed Klein ball and the
    tangent lines from it touch the sphere exactly on the hyperplane.
    """
    u = np.asarray(u, dtype=float)
    if classify(u) is not CausalClass.SPACELIKE:
        raise GeometryError("polar vertex needs a spacelike normal")
    nz = np.nonzero(np.abs(u) > 1e-12 * np.max(np.abs(u)))[0]
    v = u if u[nz[0]] > 0 else -u
    return ProjectivePoint(vector=v / np.linalg.norm(v))


def symmetry_direction_check(p1, p2, tau, reference=None,
                             tol: float = 1e-9) -> bool:
    """Whether p1 - p2 is parallel to the displacement direction of tau.

    The direction is computed once from a reference lightlike vector not
    fixed by tau; for an exact reflection every symmetric pair must be
    parallel to it.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    tau = np.asarray(tau, dtype=float)
    d = p1 - p2
    nd = np.linalg.norm(d)
    if nd <= tol * max(1.0, np.linalg.norm(p1)):
        raise GeometryError("point is fixed by the reflection")
    if np.max(np.abs(tau @ p1 - p2)) > 1e-6 * max(1.0, np.max(np.abs(p1))):
        raise GeometryError("p2 is not the tau-image of p1")
    if reference is None:
        dim = len(p1)
        for k in range(1, dim):
            ref = np.zeros(dim)
            ref[0] = 1.0
            ref[k] = 1.0
            v = ref - tau @ ref
            if np.linalg.norm(v) > 1e-9:
                break
        else:
            raise GeometryError("could not find a reference vector")
    else:
        ref = np.asarray(reference, dtype=float)
        v = ref - tau @ ref
    # parallel iff all 2x2 minors of [d; v] vanish
    minors = np.abs(np.outer(d, v) - np.outer(v, d))
    return float(np.max(minors)) <= tol * nd * np.linalg.norm(v)


# ---------------------------------------------------------------------------
# Decoration symmetrization.
# ---------------------------------------------------------------------------

class SymmetrizeError(GeometryError):
    pass


def symmetrize_decorations(g: GroupSpec, margin: float = 1.0,
                           word_bound: int = 4,
                           height_bound: float = 30.0) -> GroupSpec:
    """Rescale cusp vectors so the decoration conditions hold exactly.

    (1) cusps paired by each reflection carry exactly reflected centers,
    (2) every horoball keeps hyperbolic distance >= margin from every
    wall lift it sees within the working bounds, (3) all orbit horoballs
    are pairwise disjoint.  All adjustments are a single global scale on
    top of the exact pairing, so the combinatorics downstream do not
    depend on the margin once conditions hold.
    """
    reps = [p.copy() for p in g.cusp_reps]
    ball = g.word_ball(word_bound)

    # exact pairing constraints p_j = G p_i from each reflection
    constraints = []
    for r, tau in enumerate(g.reflections):
        for i, p in enumerate(reps):
            q = tau @ p
            hit = None
            for el in ball:
                for j, pj in enumerate(reps):
                    img = el.matrix @ pj
                    ray_q = q / np.linalg.norm(q)
                    ray_i = img / np.linalg.norm(img)
                    if np.linalg.norm(ray_q - ray_i) < 1e-8:
                        hit = (j, lorentz_inverse(el.matrix) @ q)
                        break
                if hit:
                    break
            if hit is None:
                raise SymmetrizeError(
                    f"reflection {r} maps cusp {i} outside every cusp orbit")
            constraints.append((i, hit[0], tau, hit[1]))

    # propagate exact vectors from low-index anchors to a fixpoint, then
    # verify every constraint (cycles and self-pairings must close up)
    assigned = {i: reps[i] for i in range(len(reps))}

    def _target(i, j, tau):
        q = tau @ assigned[i]
        for el in ball:
            img = el.matrix @ assigned[j]
            if np.linalg.norm(q / np.linalg.norm(q)
                              - img / np.linalg.norm(img)) < 1e-8:
                return lorentz_inverse(el.matrix) @ q
        raise SymmetrizeError("pairing lost during symmetrization")

    # one canonical (first-listed) constraint assigns each cusp; every
    # other constraint is a consistency check, so repeated reflections
    # cannot ping-pong a center between nearly equal float values
    primary = {}
    for idx, (i, j, tau, _vec) in enumerate(constraints):
        if i < j and j not in primary:
            primary[j] = idx

    def _propagate():
        for _ in range(len(reps) + 1):
            changed = False
            for j, idx in sorted(primary.items()):
                i, _, tau, _vec = constraints[idx]
                target = _target(i, j, tau)
                if not np.array_equal(assigned[j], target):
                    assigned[j] = target
                    changed = True
            if not changed:
                break

    _propagate()
    for i, j, tau, _vec in constraints:
        target = _target(i, j, tau)
        rel = np.max(np.abs(assigned[j] - target)) / target[0]
        if rel > 1e-8:
            raise SymmetrizeError(
                f"no scaling satisfies the pairing of cusps {i} and {j}")
    reps = [assigned[i] for i in range(len(reps))]

    probe = GroupSpec(g.dimension, g.generators, g.reflections, reps)
    pts = orbit(probe, word_bound, height_bound)

    log_scale = 0.0
    # (2) wall margin, every orbit horoball against every base wall
    for tau in g.reflections:
        u = reflection_normal(tau)
        for op in pts:
            d = horoball_plane_distance(op.point, u)
            log_scale = max(log_scale, margin - d)
    # (3) pairwise disjointness
    coords = np.array([op.point for op in pts])
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            ra = coords[a] / np.linalg.norm(coords[a])
            rb = coords[b] / np.linalg.norm(coords[b])
            if np.linalg.norm(ra - rb) < 1e-10:
                continue
            d = horoball_distance(coords[a], coords[b])
            log_scale = max(log_scale, -d / 2.0)
    lam = float(np.exp(log_scale)) if log_scale > 1e-15 else 1.0
    if lam != 1.0:
        for i in range(len(reps)):
            assigned[i] = lam * assigned[i]
        # re-propagate so every paired center is the exact matrix image of
        # its scaled anchor (mirror partners match bitwise)
        _propagate()
        reps = [assigned[i] for i in range(len(reps))]
    return GroupSpec(g.dimension, g.generators, g.reflections, reps,
                     name=g.name)


# ---------------------------------------------------------------------------
# Hull symmetry.
# ---------------------------------------------------------------------------

@dataclass
class SymmetryReport:
    unmatched: list
    skipped: int
    checked: int

    @property
    def ok(self) -> bool:
        return not self.unmatched


def check_hull_symmetry(faces, points, tau, height_bound: float) -> SymmetryReport:
    """Verify that the reflection maps the face set to itself.

    ``faces`` is the certified face list and ``height_bound`` the
    enumeration bound; a face whose mirror image pokes above the
    certification band (height_bound/2) leaves the certified horizon
    and is skipped, every other image must reappear in the list.
    """
    tau = np.asarray(tau, dtype=float)
    coords = np.array([op.point for op in points])
    face_sets = [coords[list(f.vertex_ids)] for f in faces]
    band = height_bound / 2.0
    unmatched = []
    skipped = 0
    checked = 0
    for fi, f in enumerate(faces):
        img = face_sets[fi] @ tau.T
        if np.max(img[:, 0]) > band:
            skipped += 1
            continue
        checked += 1
        scale = max(1.0, float(np.max(np.abs(img))))
        if not any(B.shape == img.shape and set_match(img, B, PAIR_TOL * scale)
                   for B in face_sets):
            unmatched.append(f.vertex_ids)
    return SymmetryReport(unmatched=unmatched, skipped=skipped, checked=checked)


# ---------------------------------------------------------------------------
# Quotient classification.
# ---------------------------------------------------------------------------

@dataclass
class MixedCell:
    """Quotient cell: an ideal polyhedron or a 1-m truncated polyhedron."""
    kind: str                      # "ideal" | "truncated"
    klein_vertices: np.ndarray     # ideal vertices (kept side only if truncated)
    ambient_vertices: np.ndarray   # decorated light-cone vectors, aligned
    internal_facets: list          # ambient coordinate arrays
    hyperideal_vertex: ProjectivePoint = None
    external_face: np.ndarray = None      # ambient hyperboloid points
    wall_normal: np.ndarray = None
    wall_orbit: int = -1
    reflection: np.ndarray = None
    source_class: int = -1


@dataclass
class MixedDecomposition:
    dimension: int
    cells: list
    pairings: dict
    unpaired: list
    errors: list

    @property
    def ok(self) -> bool:
        return not self.errors


def wall_lifts(g: GroupSpec, word_bound: int):
    """Deduplicated conjugates (wall index, gamma tau gamma^-1)."""
    out = []
    seen = set()
    for r, tau in enumerate(g.reflections):
        for el in g.word_ball(word_bound):
            m = el.matrix @ tau @ lorentz_inverse(el.matrix)
            key = _matrix_key(m)
            if key not in seen:
                seen.add(key)
                out.append((r, m))
    return out


def _edge_wall_point(ka, kb, u):
    """Klein point where segment ka-kb crosses the chord {k . u_s = u0}."""
    us, u0 = u[1:], u[0]
    da, db = ka @ us - u0, kb @ us - u0
    t = da / (da - db)
    return ka + t * (kb - ka)


def _truncate_cell(cell: IdealCell, cops, tau, u, wall_orbit: int,
                   source_class: int) -> MixedCell:
    coords = np.array([op.point for op in cops])
    sides = np.array([lorentz_product(p, u) for p in coords])
    if np.min(np.abs(sides)) <= 1e-9 * np.max(np.abs(sides)):
        raise GeometryError("cell vertex lies on the wall plane")
    keep_pos = _canonical_side(coords, sides)
    kept = [i for i in range(len(cops)) if (sides[i] > 0) == keep_pos]
    dropped = [i for i in range(len(cops)) if i not in kept]
    if len(kept) != len(dropped):
        raise GeometryError("wall reflection does not halve the vertex set")
    klein = cell.klein_vertices
    # wall section: intersections of crossing facet-edges with the chord
    section = []
    internal = []
    for facet in cell.facets:
        fs = set(facet)
        f_kept = [i for i in facet if i in kept]
        f_drop = [i for i in facet if i in dropped]
        if not f_drop:
            internal.append(coords[list(facet)])
            continue
        if not f_kept:
            continue   # mirror facet, represented by its kept partner
        # clipped facet: kept ideal vertices plus wall crossing points
        pts = [coords[i] for i in f_kept]
        if len(cell.klein_vertices[0]) == 2:
            ka, kb = klein[f_kept[0]], klein[f_drop[0]]
            w = _edge_wall_point(ka, kb, u)
            section.append(w)
            pts.append(klein_to_hyperboloid(w))
        else:
            for a in f_kept:
                for b in f_drop:
                    if _is_cell_edge(cell, a, b):
                        w = _edge_wall_point(klein[a], klein[b], u)
                        section.append(w)
                        pts.append(klein_to_hyperboloid(w))
        internal.append(np.array(pts))
    uniq = []
    for w in section:
        if not any(np.max(np.abs(w - x)) < 1e-9 for x in uniq):
            uniq.append(w)
    if len(uniq) > 2:
        # order the section polygon angularly within the wall plane
        arr = np.array(uniq)
        c = arr.mean(axis=0)
        _, _, vt = np.linalg.svd(arr - c)
        e1, e2 = vt[0], vt[1]
        ang = np.arctan2((arr - c) @ e2, (arr - c) @ e1)
        uniq = [uniq[i] for i in np.argsort(ang)]
    external = np.array([klein_to_hyperboloid(w) for w in uniq])
    return MixedCell(kind="truncated",
                     klein_vertices=klein[kept],
                     ambient_vertices=coords[kept],
                     internal_facets=internal,
                     hyperideal_vertex=polar_vertex(u),
                     external_face=external,
                     wall_normal=u,
                     wall_orbit=wall_orbit,
                     reflection=tau,
                     source_class=source_class)


def _canonical_side(coords, sides):
    """Deterministic side choice: smaller sorted vertex key wins."""
    pos = sorted(tuple(np.round(coords[i], 9)) for i in range(len(sides))
                 if sides[i] > 0)
    neg = sorted(tuple(np.round(coords[i], 9)) for i in range(len(sides))
                 if sides[i] < 0)
    return pos <= neg


def _is_cell_edge(cell: IdealCell, a: int, b: int) -> bool:
    count = sum(1 for f in cell.facets if a in f and b in f)
    return count >= 2


def external_orthogonality(mc: MixedCell, tol: float = ORTHO_TOL) -> float:
    """Worst deviation of external/internal angles from pi/2 (radians)."""
    if mc.kind != "truncated":
        return 0.0
    u = mc.wall_normal
    worst = 0.0
    for facet in mc.internal_facets:
        # only facets meeting the wall section matter
        if not _facet_meets_wall(facet, u):
            continue
        v = _span_normal(facet)
        c = lorentz_product(u, v) / np.sqrt(
            lorentz_product(u, u) * lorentz_product(v, v))
        worst = max(worst, abs(np.arccos(np.clip(c, -1, 1)) - np.pi / 2.0))
    return worst


def _facet_meets_wall(facet_coords, u, tol: float = 1e-7) -> bool:
    vals = np.array([lorentz_product(p, u) for p in facet_coords])
    scale = max(1.0, float(np.max(np.abs(vals))))
    return bool(np.min(vals) < tol * scale and np.max(vals) > -tol * scale)


def _span_normal(facet_coords) -> np.ndarray:
    from .minkowski import minkowski_form
    P = np.atleast_2d(np.asarray(facet_coords, float))
    J = minkowski_form(P.shape[1])
    _, _, vt = np.linalg.svd(P @ J)
    return vt[-1]


def doubling_consistency(mc: MixedCell, original_coords,
                         tol: float = 1e-8) -> bool:
    """Doubling the truncated cell across its wall recovers the source."""
    if mc.kind != "truncated":
        return True
    mirrored = mc.ambient_vertices @ mc.reflection.T
    full = np.vstack([mc.ambient_vertices, mirrored])
    scale = max(1.0, float(np.max(np.abs(full))))
    return set_match(np.asarray(original_coords), full, tol * scale * 100)


def quotient_classify(dec: Decomposition, g: GroupSpec,
                      word_bound: int = 4) -> MixedDecomposition:
    """Partition doubled cells into ideal pairs and wall-crossing cells.

    Mirror pairs keep one representative as an ideal cell; wall-crossing
    cells are intersected with the kept side of their wall and emitted
    as 1-m truncated cells whose hyperideal vertex is the wall's polar
    point.  Facet pairings are recomputed on the quotient.
    """
    errors = []
    cells_out = []
    if not g.reflections:
        for ci, cell in enumerate(dec.cells):
            coords = np.array([op.point for op in dec.cell_points[ci]])
            cells_out.append(MixedCell(
                kind="ideal", klein_vertices=cell.klein_vertices,
                ambient_vertices=coords,
                internal_facets=[coords[list(f)] for f in cell.facets],
                source_class=ci))
        pairings, unpaired = _quotient_pairings(cells_out, g, word_bound)
        return MixedDecomposition(dec.dimension, cells_out, pairings,
                                  unpaired, errors)

    lifts = wall_lifts(g, word_bound)
    stack = np.stack([m for _, m in lifts])
    case2 = {}
    for ci, cell in enumerate(dec.cells):
        coords = np.array([op.point for op in dec.cell_points[ci]])
        scale = max(1.0, float(np.max(np.abs(coords))))
        planes = []
        centroid = coords.mean(axis=0)
        close = np.nonzero(np.max(np.abs(stack @ centroid - centroid), axis=1)
                           <= PAIR_TOL * scale)[0]
        for idx in close:
            r, m = lifts[idx]
            img = coords @ m.T
            if set_match(img, coords, PAIR_TOL * scale):
                u = reflection_normal(m, strict=False)
                if u is None:
                    continue   # lift too deep in the ball to be usable
                if not any(_same_plane(u, u2) for _, u2, _ in planes):
                    planes.append((r, u, m))
        if len(planes) > 1:
            errors.append((ci, "cell meets two distinct wall orbits"))
            continue
        if planes:
            case2[ci] = planes[0]

    mirrored_away = set()
    mirror_of = {}
    tau0 = g.reflections[0]
    for ci, cell in enumerate(dec.cells):
        if ci in case2 or ci in mirrored_away:
            continue
        coords = np.array([op.point for op in dec.cell_points[ci]])
        img = coords @ tau0.T
        partner = None
        for cj in range(len(dec.cells)):
            if cj in case2:
                continue
            M = find_group_element(g, word_bound, img,
                                   np.array([op.point for op in dec.cell_points[cj]]))
            if M is not None:
                partner = cj
                break
        if partner is None:
            errors.append((ci, "mirror cell class not found among certified cells"))
        elif partner == ci:
            errors.append((ci, "off-wall cell is its own mirror (inconsistent)"))
        else:
            mirror_of[ci] = partner
            if partner > ci:
                mirrored_away.add(partner)

    for ci, cell in enumerate(dec.cells):
        if ci in mirrored_away:
            continue
        cops = dec.cell_points[ci]
        if ci in case2:
            r, u, m = case2[ci]
            try:
                mc = _truncate_cell(cell, cops, m, u, r, ci)
            except GeometryError as exc:
                errors.append((ci, str(exc)))
                continue
            worst = external_orthogonality(mc)
            if worst > 1e-6:
                errors.append((ci, f"external face not orthogonal ({worst})"))
            cells_out.append(mc)
        else:
            coords = np.array([op.point for op in cops])
            cells_out.append(MixedCell(
                kind="ideal", klein_vertices=cell.klein_vertices,
                ambient_vertices=coords,
                internal_facets=[coords[list(f)] for f in cell.facets],
                source_class=ci))
    pairings, unpaired = _quotient_pairings(cells_out, g, word_bound)
    return MixedDecomposition(dec.dimension, cells_out, pairings, unpaired,
                              errors)


def _same_plane(u, v, tol: float = 1e-7) -> bool:
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return min(np.max(np.abs(u - v)), np.max(np.abs(u + v))) < tol


def _star_stack(g: GroupSpec, word_bound: int):
    from .matching import _ball_stack
    stack = _ball_stack(g, word_bound)
    if not g.reflections:
        return stack
    tau0 = g.reflections[0]
    return np.concatenate([stack, stack @ tau0])


def _quotient_pairings(cells, g: GroupSpec, word_bound: int):
    """Match internal facets across quotient cells.

    Candidate isometries live in the extended group generated by the
    deck group and one mirror lift; candidates are screened by facet
    centroid images.
    """
    stack = _star_stack(g, word_bound)
    slots = []
    for ci, mc in enumerate(cells):
        for fi, facet in enumerate(mc.internal_facets):
            slots.append(((ci, fi), np.asarray(facet, float)))
    pairings = {}
    unpaired = []
    for (key, coords) in slots:
        if key in pairings:
            continue
        c_src = coords.mean(axis=0)
        scale = max(1.0, float(np.max(np.abs(coords))))
        found = None
        images = stack @ c_src
        for (key2, coords2) in slots:
            if key2 == key or key2 in pairings or coords2.shape != coords.shape:
                continue
            c_dst = coords2.mean(axis=0)
            close = np.nonzero(np.max(np.abs(images - c_dst), axis=1)
                               <= PAIR_TOL * scale)[0]
            for idx in close:
                M = stack[idx]
                if set_match(coords @ M.T, coords2, PAIR_TOL * scale):
                    found = (key2, M)
                    break
            if found:
                break
        if found is None:
            # self-gluing: facet maps onto itself by a nontrivial element
            images_self = images
            close = np.nonzero(np.max(np.abs(images_self - c_src), axis=1)
                               <= PAIR_TOL * scale)[0]
            for idx in close:
                M = stack[idx]
                if np.max(np.abs(M - np.eye(M.shape[0]))) < 1e-9:
                    continue
                if set_match(coords @ M.T, coords, PAIR_TOL * scale):
                    found = (key, M)
                    break
        if found is None:
            unpaired.append(key)
            continue
        key2, M = found
        pairings[key] = (key2, M)
        if key2 != key:
            pairings[key2] = (key, lorentz_inverse(M))
    return pairings, unpaired
