import numpy as np
import pytest

from hypdecomp.group import (GroupSpec, OrbitSet, lorentz_inverse, orbit,
                             reflection_normal, validate_group,
                             validate_reflection)
from hypdecomp.minkowski import (GeometryError, classify, CausalClass,
                                 psl2_to_lorentz, reflection_in_hyperplane)


def trivial_group(cusps):
    return GroupSpec(2, [], [], cusps)


class TestValidateGroup:
    def test_trivial_group_valid(self):
        g = trivial_group([np.array([1.0, 0.0, 1.0])])
        assert validate_group(g).ok

    def test_bad_generator_named(self):
        g = GroupSpec(2, [np.diag([1.0, 2.0, 1.0])], [],
                      [np.array([1.0, 0.0, 1.0])])
        rep = validate_group(g)
        assert not rep.ok
        assert "generator 0" in str(rep)

    def test_figure_eight_generators(self, spec_fig8):
        # the standard parabolic pair passes all matrix checks
        assert validate_group(spec_fig8.group).ok

    def test_bad_cusp(self):
        g = trivial_group([np.array([1.0, 0.0, 0.0])])
        rep = validate_group(g)
        assert not rep.ok and "cusp 0" in str(rep)

    def test_non_involutive_reflection(self):
        g = GroupSpec(2, [], [np.diag([1.0, 2.0, 0.5])],
                      [np.array([1.0, 0.0, 1.0])])
        rep = validate_group(g)
        assert not rep.ok


class TestOrbit:
    def test_word_bound_zero(self, spec_3ps):
        pts = orbit(spec_3ps.group, 0, 50.0)
        assert len(pts) == 3
        for op in pts:
            assert op.word == ()

    def test_trivial_group(self):
        g = trivial_group([np.array([1.0, 0.0, 1.0]), np.array([1.0, 0.0, -1.0])])
        pts = orbit(g, 5, 100.0)
        assert len(pts) == 2

    def test_pairwise_sign_condition(self, spec_3ps):
        # brute-force check over all pairs: products of future null
        # vectors are nonpositive, zero only for coincident rays
        pts = orbit(spec_3ps.group, 6, 20.0)
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                p, q = pts[a].point, pts[b].point
                assert np.dot(p, np.diag([-1.0, 1, 1]) @ q) <= 1e-12

    def test_deterministic(self, spec_3ps):
        a = orbit(spec_3ps.group, 5, 20.0)
        spec_3ps.group._ball_cache.clear()
        b = orbit(spec_3ps.group, 5, 20.0)
        assert len(a) == len(b)
        for x, y in zip(a, b):
            assert x.word == y.word and np.array_equal(x.point, y.point)

    def test_monotone_in_word_bound(self, spec_3ps):
        small = OrbitSet(orbit(spec_3ps.group, 4, 20.0))
        big = OrbitSet(orbit(spec_3ps.group, 5, 20.0))
        for op in small:
            assert big.find(op.point) is not None

    def test_all_points_lightlike_positive(self, spec_fig8):
        for op in orbit(spec_fig8.group, 4, 8.0):
            assert classify(op.point) is CausalClass.LIGHTLIKE
            assert op.point[0] > 0

    def test_reflection_closure(self, report_fig3):
        # tau p stays in the orbit whenever its height is within bounds
        gs = report_fig3.spec.group
        from hypdecomp.doubling import symmetrize_decorations
        g = symmetrize_decorations(gs, margin=report_fig3.spec.options.margin,
                                   word_bound=4,
                                   height_bound=report_fig3.spec.options.height_bound)
        hb = report_fig3.spec.options.height_bound
        pts = OrbitSet(orbit(g, report_fig3.spec.options.word_bound, hb))
        misses = 0
        for tau in g.reflections:
            for op in pts:
                img = tau @ op.point
                if img[0] <= hb and pts.find(img) is None:
                    misses += 1
        assert misses == 0

    def test_bad_bounds(self, spec_3ps):
        with pytest.raises(GeometryError):
            orbit(spec_3ps.group, -1, 10.0)
        with pytest.raises(GeometryError):
            orbit(spec_3ps.group, 2, 0.0)


class TestValidateReflection:
    def test_trivial_group_any_involution(self):
        g = trivial_group([np.array([1.0, 0.0, 1.0])])
        tau = reflection_in_hyperplane(np.array([0.0, 1.0, 0.0]))
        assert validate_reflection(tau, g)

    def test_generators_closed_under_conjugation(self):
        # group closed under conjugation by diag(1,-1,1)
        tau = np.diag([1.0, -1.0, 1.0])
        a = psl2_to_lorentz(np.array([[1.0, 2.0], [0.0, 1.0]]))
        g = GroupSpec(2, [a, tau @ a @ tau], [],
                      [np.array([1.0, 0.0, -1.0])])
        assert validate_reflection(tau, g, word_bound=2)

    def test_generic_reflection_not_certified(self, spec_fig8):
        u = np.array([0.3, 1.1, 0.2, -0.4])
        tau = reflection_in_hyperplane(u)
        assert not validate_reflection(tau, spec_fig8.group, word_bound=3)

    def test_non_involution_rejected(self, spec_3ps):
        with pytest.raises(GeometryError):
            validate_reflection(spec_3ps.group.generators[0], spec_3ps.group)

    def test_figure3_walls_certified(self, spec_fig3):
        for tau in spec_fig3.group.reflections:
            assert validate_reflection(tau, spec_fig3.group, word_bound=4)


class TestReflectionNormal:
    def test_householder_roundtrip(self, rng):
        for _ in range(10):
            u = rng.normal(size=3)
            if classify(u) is not CausalClass.SPACELIKE:
                continue
            R = reflection_in_hyperplane(u)
            v = reflection_normal(R)
            cross = np.outer(u, v) - np.outer(v, u)
            assert np.max(np.abs(cross)) < 1e-8 * np.linalg.norm(u)

    def test_inverse_is_exact(self, rng):
        from conftest import random_boost
        A = random_boost(rng, 3)
        assert np.max(np.abs(A @ lorentz_inverse(A) - np.eye(4))) < 1e-12
