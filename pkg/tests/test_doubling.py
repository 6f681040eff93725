import numpy as np
import pytest

from conftest import random_boost, random_lightlike
from hypdecomp.decorations import horoball_distance
from hypdecomp.doubling import (SymmetrizeError, check_hull_symmetry,
                                doubling_consistency, external_orthogonality,
                                polar_vertex, quotient_classify,
                                symmetrize_decorations, symmetry_direction_check,
                                wall_lifts)
from hypdecomp.ep_hull import certified_faces, hull_faces
from hypdecomp.group import GroupSpec, OrbitSet, orbit, reflection_normal
from hypdecomp.minkowski import (GeometryError, lorentz_product,
                                 reflection_in_hyperplane)


@pytest.fixture(scope="module")
def g_fig3_sym(spec_fig3):
    return symmetrize_decorations(spec_fig3.group,
                                  margin=spec_fig3.options.margin,
                                  word_bound=4,
                                  height_bound=spec_fig3.options.height_bound)


class TestSymmetrize:
    def test_no_reflections_only_disjointness(self, spec_torus):
        gs = symmetrize_decorations(spec_torus.group, margin=1.0,
                                    word_bound=4, height_bound=12.0)
        pts = orbit(gs, 4, 12.0)
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                ra = pts[a].point / np.linalg.norm(pts[a].point)
                rb = pts[b].point / np.linalg.norm(pts[b].point)
                if np.linalg.norm(ra - rb) < 1e-9:
                    continue
                assert horoball_distance(pts[a].point, pts[b].point) >= -1e-9

    def test_impossible_pairing_rejected(self, spec_3ps):
        g = spec_3ps.group
        bad = GroupSpec(2, g.generators,
                        [reflection_in_hyperplane(np.array([0.17, 1.3, 0.4]))],
                        g.cusp_reps)
        with pytest.raises(SymmetrizeError):
            symmetrize_decorations(bad, margin=1.0, word_bound=3,
                                   height_bound=20.0)

    def test_partner_center_exactly_reflected(self, g_fig3_sym):
        tau = g_fig3_sym.reflections[0]
        assert np.array_equal(tau @ g_fig3_sym.cusp_reps[0],
                              g_fig3_sym.cusp_reps[1])

    def test_wall_margin_enforced(self, g_fig3_sym, spec_fig3):
        pts = orbit(g_fig3_sym, spec_fig3.options.word_bound,
                    spec_fig3.options.height_bound)
        from hypdecomp.decorations import horoball_plane_distance
        for tau in g_fig3_sym.reflections:
            u = reflection_normal(tau)
            for op in pts:
                assert horoball_plane_distance(op.point, u) >= 1.0 - 1e-9


class TestSymmetryDirection:
    def test_coordinate_reflection(self):
        tau = np.diag([1.0, -1.0, 1.0])
        p1 = np.array([1.0, 1.0, 0.0])
        p2 = tau @ p1
        assert symmetry_direction_check(p1, p2, tau)

    def test_fixed_point_rejected(self):
        tau = np.diag([1.0, -1.0, 1.0])
        p = np.array([1.0, 0.0, 1.0])       # on the fixed hyperplane
        with pytest.raises(GeometryError):
            symmetry_direction_check(p, p, tau)

    def test_non_mirror_pair_rejected(self):
        tau = np.diag([1.0, -1.0, 1.0])
        p1 = np.array([1.0, 1.0, 0.0])
        with pytest.raises(GeometryError):
            symmetry_direction_check(p1, 2.0 * p1, tau)

    def test_random_conjugated_reflections(self, rng):
        # the displacement of every mirror pair is parallel to one
        # direction depending only on the wall
        for _ in range(100):
            n = int(rng.integers(2, 4))
            u = rng.normal(size=n + 1)
            while lorentz_product(u, u) <= 0.1:
                u = rng.normal(size=n + 1)
            A = random_boost(rng, n)
            tau = A @ reflection_in_hyperplane(u) @ np.linalg.inv(A)
            p1 = random_lightlike(rng, n)
            p2 = tau @ p1
            if np.linalg.norm(p1 - p2) < 1e-6:
                continue
            assert symmetry_direction_check(p1, p2, tau)


class TestHullSymmetry:
    def test_empty_face_list(self, spec_fig3):
        rep = check_hull_symmetry([], [], spec_fig3.group.reflections[0], 10.0)
        assert rep.ok and rep.checked == 0

    def test_figure3_symmetric(self, g_fig3_sym, spec_fig3):
        opts = spec_fig3.options
        pts = OrbitSet(orbit(g_fig3_sym, opts.word_bound, opts.height_bound))
        cert = certified_faces(hull_faces(pts), opts.height_bound)
        for tau in g_fig3_sym.reflections:
            rep = check_hull_symmetry(cert, pts, tau, opts.height_bound)
            assert rep.ok

    def test_missing_face_reported(self, g_fig3_sym, spec_fig3):
        opts = spec_fig3.options
        tau = g_fig3_sym.reflections[0]
        pts = OrbitSet(orbit(g_fig3_sym, opts.word_bound, opts.height_bound))
        cert = certified_faces(hull_faces(pts), opts.height_bound)
        coords = np.array([op.point for op in pts])
        band = opts.height_bound / 2.0
        victim = None
        from hypdecomp.matching import set_match
        for i, f in enumerate(cert):
            own = coords[list(f.vertex_ids)]
            img = own @ tau.T
            if np.max(img[:, 0]) <= band and not set_match(own, img, 1e-6):
                mirror_of_f = img
                victim = i
                break
        assert victim is not None
        pruned = [f for j, f in enumerate(cert)
                  if not set_match(coords[list(f.vertex_ids)], mirror_of_f, 1e-6)]
        rep = check_hull_symmetry(pruned, pts, tau, opts.height_bound)
        assert not rep.ok


class TestPolarVertex:
    def test_klein_point_and_polar_chord(self):
        pv = polar_vertex(np.array([1.0, 2.0, 0.0]))
        assert np.allclose(pv.klein, [2.0, 0.0])
        # tangent points of lines from (2,0) to the unit circle, found
        # numerically: T on circle with (T - P).T = 0
        P = np.array([2.0, 0.0])
        thetas = np.linspace(0.0, 2.0 * np.pi, 200001)
        T = np.column_stack([np.cos(thetas), np.sin(thetas)])
        tangency = np.abs(np.einsum("ij,ij->i", T - P, T))
        touched = T[tangency < 1e-4]
        assert len(touched) > 0
        # every tangency point lies on the chord k1 = 1/2
        assert np.max(np.abs(touched[:, 0] - 0.5)) < 1e-3
        for t in (touched[0], touched[-1]):
            ray = np.concatenate(([1.0], t))
            assert abs(lorentz_product(ray, np.array([1.0, 2.0, 0.0]))) < 1e-3

    def test_wall_through_origin_at_infinity(self):
        pv = polar_vertex(np.array([0.0, 1.0, 0.0]))
        assert pv.at_infinity
        assert pv.klein is None

    def test_projective_invariance(self):
        u = np.array([1.0, 2.0, 0.5])
        a = polar_vertex(u)
        b = polar_vertex(-3.0 * u)
        assert np.allclose(a.vector, b.vector)

    def test_rejects_timelike(self):
        with pytest.raises(GeometryError):
            polar_vertex(np.array([1.0, 0.1, 0.0]))


class TestQuotient:
    def test_no_walls_all_ideal(self, report_3ps):
        mixed = report_3ps.mixed
        assert all(mc.kind == "ideal" for mc in mixed.cells)
        assert mixed.ok

    def test_figure3_every_cell_1_2_truncated(self, report_fig3):
        mixed = report_fig3.mixed
        assert len(mixed.cells) == 2
        for mc in mixed.cells:
            assert mc.kind == "truncated"
            assert len(mc.klein_vertices) == 2          # two ideal vertices
            assert mc.external_face is not None         # exactly one external
            assert len(mc.external_face) == 2
            hv = mc.hyperideal_vertex
            assert hv.at_infinity or hv.klein @ hv.klein > 1.0

    def test_external_face_orthogonal(self, report_fig3):
        for mc in report_fig3.mixed.cells:
            assert external_orthogonality(mc) <= 1e-8

    def test_external_face_on_polar_hyperplane(self, report_fig3):
        #  H(v) contains the wall section: <x, u> = 0 on every section vertex
        for mc in report_fig3.mixed.cells:
            for x in mc.external_face:
                assert abs(lorentz_product(x, mc.wall_normal)) < 1e-9 * \
                    np.max(np.abs(x)) * np.max(np.abs(mc.wall_normal))

    def test_doubling_consistency(self, report_fig3):
        dec = report_fig3.ep_decomposition
        for mc in report_fig3.mixed.cells:
            src = np.array([op.point for op
                            in dec.cell_points[mc.source_class]])
            assert doubling_consistency(mc, src)

    def test_case2_cells_fixed_setwise(self, report_fig3):
        from hypdecomp.matching import set_match
        for mc in report_fig3.mixed.cells:
            full = np.vstack([mc.ambient_vertices,
                              mc.ambient_vertices @ mc.reflection.T])
            img = full @ mc.reflection.T
            assert set_match(img, full, 1e-6 * float(np.max(np.abs(full))))

    def test_single_wall_orbit_per_cell(self, report_fig3):
        assert report_fig3.mixed.ok
        orbits = {mc.wall_orbit for mc in report_fig3.mixed.cells}
        assert orbits == {0, 1}

    def test_quotient_pairings_total(self, report_fig3):
        mixed = report_fig3.mixed
        assert not mixed.unpaired
        n_internal = sum(len(mc.internal_facets) for mc in mixed.cells)
        assert len(mixed.pairings) == n_internal


class TestWallLifts:
    def test_lifts_are_involutions(self, spec_fig3):
        lifts = wall_lifts(spec_fig3.group, 2)
        assert len(lifts) > 2
        for r, m in lifts:
            scale = float(np.max(np.abs(m))) ** 2
            assert np.max(np.abs(m @ m - np.eye(3))) < 1e-9 * max(1.0, scale)


def _synthetic_decomposition(cell_vertex_sets):
    """Decomposition with the given cells, backed by a fake orbit list."""
    from hypdecomp.ep_hull import Decomposition, ideal_cell_from_points
    from hypdecomp.group import OrbitPoint
    from hypdecomp.ep_hull import support_vector
    all_pts = []
    cells = []
    cell_points = []
    for vs in cell_vertex_sets:
        ops = []
        for c in vs:
            op = OrbitPoint(point=np.asarray(c, float), word=(), cusp_id=0,
                            matrix=np.eye(3), index=len(all_pts))
            all_pts.append(op)
            ops.append(op)
        w = support_vector(np.array(vs))
        cell, ops = ideal_cell_from_points(ops, w, 2)
        cells.append(cell)
        cell_points.append(ops)
    return Decomposition(dimension=2, cells=cells, cell_points=cell_points,
                         pairings={}, unpaired=[], class_sizes=[1] * len(cells))


def _ray(theta):
    return np.array([1.0, np.cos(theta), np.sin(theta)])


class TestQuotientSynthetic:
    def test_mirror_pair_halved(self):
        # two off-wall triangles exchanged by the wall reflection keep a
        # single ideal representative
        tau = np.diag([1.0, 1.0, -1.0])        # wall {x2 = 0}
        tri = [_ray(t) for t in (0.2, 0.9, 1.6)]
        mirror = [tau @ p for p in tri]
        dec = _synthetic_decomposition([tri, mirror])
        g = GroupSpec(2, [], [tau], [np.asarray(tri[0])])
        mixed = quotient_classify(dec, g, 2)
        assert mixed.ok
        kinds = [mc.kind for mc in mixed.cells]
        assert kinds == ["ideal"]

    def test_two_wall_orbits_rejected(self):
        # a square symmetric under two distinct walls is a hard error
        tau1 = np.diag([1.0, -1.0, 1.0])
        tau2 = np.diag([1.0, 1.0, -1.0])
        square = [_ray(t) for t in (np.pi / 4, 3 * np.pi / 4,
                                    5 * np.pi / 4, 7 * np.pi / 4)]
        dec = _synthetic_decomposition([square])
        g = GroupSpec(2, [], [tau1, tau2], [np.asarray(square[0])])
        mixed = quotient_classify(dec, g, 2)
        assert not mixed.ok
        assert any("two distinct wall orbits" in msg for _, msg in mixed.errors)
