"""Lorentz geometry: manifold constraints, angle formulas, degeneracies."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hierembed import geometry as geo


class TestTimeComponent:
    def test_origin_unit_curvature(self):
        assert geo.time_component(np.zeros(2), 1.0) == 1.0

    def test_origin_curvature_four(self):
        assert geo.time_component(np.zeros(2), 4.0) == 0.5

    def test_three_four_five(self):
        # sqrt(1 + 9 + 16) = sqrt(26)
        assert geo.time_component(np.array([3.0, 4.0]), 1.0) == pytest.approx(
            5.0990195, abs=1e-6
        )

    def test_lower_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            c = rng.uniform(0.1, 5.0)
            v = rng.normal(size=4)
            assert geo.time_component(v, c) >= 1.0 / math.sqrt(c)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            geo.time_component(np.array([np.nan, 0.0]), 1.0)
        with pytest.raises(ValueError):
            geo.time_component(np.zeros(2), -1.0)


class TestLorentzInner:
    def test_origin_self(self):
        o = geo.point_from_space(np.zeros(2), 1.0)
        assert geo.lorentz_inner(o, o) == -1.0

    def test_origin_vs_offset(self):
        o = geo.point_from_space(np.zeros(2), 1.0)
        p = geo.point_from_space(np.array([1.0, 0.0]), 1.0)
        assert geo.lorentz_inner(o, p) == pytest.approx(-math.sqrt(2), abs=1e-7)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = geo.point_from_space(rng.normal(size=3), 1.0)
            y = geo.point_from_space(rng.normal(size=3), 1.0)
            assert geo.lorentz_inner(x, y) == geo.lorentz_inner(y, x)

    def test_dimension_mismatch(self):
        x = geo.point_from_space(np.zeros(2), 1.0)
        y = geo.point_from_space(np.zeros(3), 1.0)
        with pytest.raises(ValueError):
            geo.lorentz_inner(x, y)

    def test_upper_bound_on_manifold(self):
        rng = np.random.default_rng(2)
        c = 2.0
        for _ in range(200):
            x = geo.exp_map_origin(rng.normal(size=3), c)
            y = geo.exp_map_origin(rng.normal(size=3), c)
            assert geo.lorentz_inner(x, y) <= -1.0 / c + 1e-12


class TestExpMap:
    def test_zero_vector_is_origin(self):
        p = geo.exp_map_origin(np.zeros(3), 1.0)
        assert np.all(p.space == 0.0)
        assert p.time == 1.0

    def test_unit_vector(self):
        p = geo.exp_map_origin(np.array([1.0, 0.0]), 1.0)
        assert p.space[0] == pytest.approx(math.sinh(1.0), abs=1e-9)
        assert p.time == pytest.approx(math.cosh(1.0), abs=1e-9)

    def test_manifold_constraint(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            c = rng.uniform(0.2, 4.0)
            x = geo.exp_map_origin(rng.normal(size=5), c)
            assert abs(c * geo.lorentz_inner(x, x) + 1.0) < 1e-6

    def test_norm_cap_clamps(self, caplog):
        big = np.full(4, 100.0)
        p = geo.exp_map_origin(big, 1.0)
        assert np.isfinite(p.time)
        # clamped to norm 10 in the tangent space, so time = cosh(10)
        assert p.time == pytest.approx(math.cosh(10.0), rel=1e-9)

    def test_time_consistency(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            c = rng.uniform(0.5, 2.0)
            x = geo.exp_map_origin(rng.normal(size=3), c)
            assert x.time == pytest.approx(geo.time_component(x.space, c), rel=1e-9)


class TestExteriorAngleHyp:
    def test_radially_outward_child(self):
        u = np.array([0.6, 0.8])
        x = geo.exp_map_origin(u, 1.0)
        y = geo.exp_map_origin(2 * u, 1.0)
        assert geo.exterior_angle_hyp(x, y, 1.0) == pytest.approx(0.0, abs=1e-6)

    def test_radially_inward_child(self):
        u = np.array([0.6, 0.8])
        x = geo.exp_map_origin(2 * u, 1.0)
        y = geo.exp_map_origin(u, 1.0)
        assert geo.exterior_angle_hyp(x, y, 1.0) == pytest.approx(math.pi, abs=1e-6)

    def test_range(self):
        rng = np.random.default_rng(5)
        for _ in range(10_000):
            c = rng.uniform(0.2, 3.0)
            x = geo.exp_map_origin(rng.normal(size=3), c)
            y = geo.exp_map_origin(rng.normal(size=3), c)
            if np.linalg.norm(x.space) <= geo.EPS:
                continue
            assert 0.0 <= geo.exterior_angle_hyp(x, y, c) <= math.pi

    def test_origin_anchor_rejected(self):
        o = geo.point_from_space(np.zeros(2), 1.0)
        y = geo.exp_map_origin(np.array([1.0, 0.0]), 1.0)
        with pytest.raises(geo.DegenerateGeometryError):
            geo.exterior_angle_hyp(o, y, 1.0)

    def test_coincident_points_survive_eps_floor(self):
        x = geo.exp_map_origin(np.array([0.5, 0.5]), 1.0)
        angle = geo.exterior_angle_hyp(x, x, 1.0)
        assert 0.0 <= angle <= math.pi

    def test_small_curvature_matches_euclidean(self):
        rng = np.random.default_rng(6)
        c = 1e-6
        for _ in range(50):
            u = rng.normal(size=3)
            v = rng.normal(size=3)
            if np.linalg.norm(u) < 0.1 or np.linalg.norm(u - v) < 0.1:
                continue
            hyp = geo.exterior_angle_hyp(
                geo.exp_map_origin(u, c), geo.exp_map_origin(v, c), c
            )
            euc = geo.exterior_angle_euc(u, v)
            assert hyp == pytest.approx(euc, abs=1e-2)


class TestExteriorAngleEuc:
    def test_outward_collinear(self):
        assert geo.exterior_angle_euc([1.0, 0.0], [2.0, 0.0]) == 0.0

    def test_perpendicular(self):
        assert geo.exterior_angle_euc([1.0, 0.0], [1.0, 1.0]) == pytest.approx(
            math.pi / 2, abs=1e-12
        )

    def test_inward_collinear(self):
        assert geo.exterior_angle_euc([1.0, 0.0], [0.5, 0.0]) == pytest.approx(
            math.pi, abs=1e-12
        )

    def test_degenerate_raises(self):
        with pytest.raises(geo.DegenerateGeometryError):
            geo.exterior_angle_euc([0.0, 0.0], [1.0, 0.0])
        with pytest.raises(geo.DegenerateGeometryError):
            geo.exterior_angle_euc([1.0, 0.0], [1.0, 0.0])

    def test_matches_direct_dot_product_form(self):
        # pi minus the angle between (-x) and (y - x)
        rng = np.random.default_rng(7)
        for _ in range(500):
            x = rng.normal(size=3)
            y = rng.normal(size=3)
            if np.linalg.norm(x) < 1e-3 or np.linalg.norm(x - y) < 1e-3:
                continue
            a, b = -x, y - x
            cos_between = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
            direct = math.pi - math.acos(min(1.0, max(-1.0, cos_between)))
            assert geo.exterior_angle_euc(x, y) == pytest.approx(direct, abs=1e-9)


class TestEntailmentAngles:
    def test_euclidean_outward(self):
        pair = geo.entailment_angles(
            np.array([1.0, 0.0]), np.array([2.0, 0.0]), "euclidean"
        )
        assert pair.beta1 == pytest.approx(math.pi, abs=1e-12)
        assert pair.alpha2 == pytest.approx(math.pi, abs=1e-12)

    def test_euclidean_inward(self):
        pair = geo.entailment_angles(
            np.array([1.0, 0.0]), np.array([0.5, 0.0]), "euclidean"
        )
        assert pair.beta1 == pytest.approx(0.0, abs=1e-12)
        assert pair.alpha2 == pytest.approx(0.0, abs=1e-12)

    def test_beta1_ext_identity(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            x = rng.normal(size=3)
            y = rng.normal(size=3)
            if np.linalg.norm(x) < 1e-3 or np.linalg.norm(x - y) < 1e-3:
                continue
            pair = geo.entailment_angles(x, y, "euclidean")
            ext = geo.exterior_angle_euc(x, y)
            assert abs(pair.beta1 + ext - math.pi) < 1e-12

    def test_unknown_space_kind(self):
        with pytest.raises(ValueError):
            geo.entailment_angles(np.ones(2), np.ones(2), "spherical")


@settings(max_examples=200, deadline=None)
@given(
    u=st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    scale=st.floats(1.1, 4.0),
    c=st.floats(0.3, 3.0),
)
def test_radial_collinearity_property(u, scale, c):
    u = np.asarray(u)
    if np.linalg.norm(u) < 0.05:
        return
    x = geo.exp_map_origin(u, c)
    y = geo.exp_map_origin(scale * u, c)
    assert geo.exterior_angle_hyp(x, y, c) < 1e-5
    assert geo.exterior_angle_hyp(y, x, c) > math.pi - 1e-5
