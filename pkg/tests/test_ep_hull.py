import numpy as np
import pytest

from hypdecomp.ep_hull import (HullFace, assemble_decomposition, cell_is_convex,
                               certified_faces, convex_side_check,
                               count_face_classes, dihedral_angles,
                               hull_faces, project_face,
                               stability_certificate, support_vector)
from hypdecomp.group import GroupSpec, OrbitPoint, OrbitSet, orbit
from hypdecomp.minkowski import GeometryError, lorentz_product

TRIANGLE = np.array([[1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [1.0, 0.0, 1.0]])


def make_orbit_points(coords):
    pts = []
    for i, c in enumerate(np.asarray(coords, dtype=float)):
        pts.append(OrbitPoint(point=c, word=(), cusp_id=0,
                              matrix=np.eye(len(c)), index=i))
    return pts


class TestSupportVector:
    def test_triangle_solution(self):
        # oracle: direct 3x3 linear solve of <p_i, w> = -1
        J = np.diag([-1.0, 1.0, 1.0])
        oracle = np.linalg.solve(TRIANGLE @ J, -np.ones(3))
        w = support_vector(TRIANGLE)
        assert np.allclose(w, oracle)
        assert np.allclose(w, [1.0, 0.0, 0.0])

    def test_single_point_degenerate(self):
        with pytest.raises(GeometryError):
            support_vector(TRIANGLE[:1])

    def test_scaling_inverse(self):
        w = support_vector(TRIANGLE)
        w3 = support_vector(3.0 * TRIANGLE)
        assert np.allclose(w3, w / 3.0)

    def test_inconsistent_overdetermined(self):
        bad = np.vstack([TRIANGLE, [2.0, 0.0, -2.0]])
        with pytest.raises(GeometryError):
            support_vector(bad)

    def test_consistent_overdetermined(self):
        extra = np.array([1.0, 0.0, -1.0])     # also satisfies <p,(1,0,0)> = -1
        w = support_vector(np.vstack([TRIANGLE, extra]))
        assert np.allclose(w, [1.0, 0.0, 0.0])


class TestHullFaces:
    def test_three_points_single_face(self):
        faces = hull_faces(make_orbit_points(TRIANGLE))
        assert len(faces) == 1
        assert faces[0].vertex_ids == (0, 1, 2)
        assert np.allclose(faces[0].support, [1.0, 0.0, 0.0])

    def test_scaled_copies_stay_inside(self):
        pts = make_orbit_points(np.vstack([TRIANGLE, 2.0 * TRIANGLE]))
        faces = hull_faces(pts)
        assert len(faces) == 1
        assert set(faces[0].vertex_ids) == {0, 1, 2}
        w = faces[0].support
        for q in 2.0 * TRIANGLE:
            assert lorentz_product(q, w) < -1.0

    def test_coplanar_square_merged(self):
        # four cone points on one support plane plus scaled copies above
        square = np.array([[1.0, 1.0, 0.0], [1.0, -1.0, 0.0],
                           [1.0, 0.0, 1.0], [1.0, 0.0, -1.0]])
        pts = make_orbit_points(np.vstack([square, 3.0 * square]))
        faces = hull_faces(pts)
        assert len(faces) == 1
        assert set(faces[0].vertex_ids) == {0, 1, 2, 3}

    def test_face_set_closed_under_generators(self, report_3ps):
        spec = report_3ps.spec
        g = spec.group
        pts = OrbitSet(orbit(g, spec.options.word_bound,
                             spec.options.height_bound))
        faces = hull_faces(pts)
        cert = certified_faces(faces, spec.options.height_bound)
        coords = np.array([op.point for op in pts])
        face_sets = [coords[list(f.vertex_ids)] for f in faces]
        from hypdecomp.matching import set_match
        misses = 0
        checked = 0
        for f in cert:
            A = coords[list(f.vertex_ids)]
            for gen in g.generators:
                img = A @ gen.T
                if np.max(img[:, 0]) > spec.options.height_bound / 2.0:
                    continue
                checked += 1
                if not any(B.shape == img.shape and set_match(img, B, 1e-6)
                           for B in face_sets):
                    misses += 1
        assert checked > 0 and misses == 0

    def test_convex_side(self, report_3ps):
        spec = report_3ps.spec
        pts = OrbitSet(orbit(spec.group, 6, 20.0))
        faces = hull_faces(pts)
        assert convex_side_check(faces, pts)

    def test_all_supports_future_timelike(self, report_fig8):
        spec = report_fig8.spec
        pts = OrbitSet(orbit(spec.group, 5, 8.0))
        for f in hull_faces(pts):
            assert lorentz_product(f.support, f.support) < 0
            assert f.support[0] > 0


class TestStability:
    def test_trivial_group_vacuous(self):
        g = GroupSpec(2, [], [], [np.array([1.0, 0.0, 1.0])])
        assert stability_certificate(g, 3, 10.0)

    def test_thrice_punctured_stable(self, spec_3ps):
        assert stability_certificate(spec_3ps.group, 6, 20.0)

    def test_low_word_bound_unstable(self, spec_fig8):
        assert not stability_certificate(spec_fig8.group, 1, 8.0)


class TestProjectFace:
    def test_ideal_triangle(self):
        pts = make_orbit_points(TRIANGLE)
        face = hull_faces(pts)[0]
        cell, cops = project_face(face, pts)
        expected = {(-1.0, 0.0), (1.0, 0.0), (0.0, 1.0)}
        got = {tuple(np.round(k, 9)) for k in cell.klein_vertices}
        assert got == expected

    def test_vertex_scaling_invariance(self):
        pts = make_orbit_points(TRIANGLE * np.array([[1.0], [2.0], [5.0]]))
        w = support_vector(np.array([op.point for op in pts]))
        face = HullFace(vertex_ids=(0, 1, 2), support=w, max_height=5.0)
        cell, _ = project_face(face, pts)
        expected = {(-1.0, 0.0), (1.0, 0.0), (0.0, 1.0)}
        got = {tuple(np.round(k, 9)) for k in cell.klein_vertices}
        assert got == expected

    def test_projected_cells_convex(self, report_fig8):
        dec = report_fig8.ep_decomposition
        for cell in dec.cells:
            assert cell_is_convex(cell)

    def test_projection_hits_cell_interior(self, report_3ps):
        # vertical projection of face-interior samples lands inside the
        # Klein polygon (bijection spot check)
        dec = report_3ps.ep_decomposition
        rng = np.random.default_rng(7)
        for cell, cops in zip(dec.cells, dec.cell_points):
            coords = np.array([op.point for op in cops])
            for _ in range(20):
                lam = rng.dirichlet(np.ones(len(cops)))
                x = lam @ coords
                k = x[1:] / np.sqrt(1.0 + x[1:] @ x[1:])
                assert _in_polygon(k, cell.klein_vertices)


def _in_polygon(k, poly, tol=1e-9):
    m = len(poly)
    signs = []
    for i in range(m):
        a, b = poly[i], poly[(i + 1) % m]
        u, v = b - a, k - a
        signs.append(u[0] * v[1] - u[1] * v[0])
    return all(s > -tol for s in signs) or all(s < tol for s in signs)


class TestAssemble:
    def test_single_face_trivial_group(self):
        g = GroupSpec(2, [], [], [TRIANGLE[0], TRIANGLE[1], TRIANGLE[2]])
        pts = make_orbit_points(TRIANGLE)
        faces = hull_faces(pts)
        dec = assemble_decomposition(faces, g, pts, 2)
        assert len(dec.cells) == 1
        assert len(dec.pairings) == 0
        assert len(dec.unpaired) == 3          # nothing to glue to

    def test_thrice_punctured_counts(self, report_3ps):
        dec = report_3ps.ep_decomposition
        assert len(dec.cells) == 2
        assert all(len(c.vertex_ids) == 3 for c in dec.cells)
        assert count_face_classes(dec, 1) == 3
        assert not dec.unpaired

    def test_figure_eight_counts(self, report_fig8):
        dec = report_fig8.ep_decomposition
        assert len(dec.cells) == 2
        assert all(len(c.vertex_ids) == 4 for c in dec.cells)
        assert count_face_classes(dec, 2) == 4
        assert count_face_classes(dec, 1) == 2
        assert not dec.unpaired

    def test_pairing_involution(self, all_reports):
        for report in all_reports.values():
            dec = report.ep_decomposition
            for src, pairing in dec.pairings.items():
                back = dec.pairings.get(pairing.target)
                assert back is not None
                assert back.target == src

    def test_figure_eight_dihedral_angles(self, report_fig8):
        dec = report_fig8.ep_decomposition
        angles = []
        for cell, cops in zip(dec.cells, dec.cell_points):
            angles.extend(dihedral_angles(cell, cops).values())
        assert len(angles) == 12
        assert np.max(np.abs(np.array(angles) - np.pi / 3.0)) < 1e-6


class TestDihedralAngles:
    def test_regular_ideal_tetrahedron(self):
        # Klein vertices at an inscribed regular tetrahedron
        k = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]],
                     dtype=float) / np.sqrt(3.0)
        coords = np.hstack([np.ones((4, 1)), k])
        pts = make_orbit_points(coords)
        faces = hull_faces(pts)
        assert len(faces) == 1
        cell, cops = project_face(faces[0], pts)
        angs = dihedral_angles(cell, cops)
        assert len(angs) == 6
        for a in angs.values():
            assert abs(a - np.pi / 3.0) < 1e-10
