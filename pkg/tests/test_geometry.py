"""Sphere primitives: sampling, distances, the arc-cosine kernel, and the
vector/trig inequalities the conic-update analysis rests on."""

import numpy as np
import pytest

from tsblasso.errors import InvalidArgumentError
from tsblasso.geometry import (
    geodesic_dist,
    relu_kernel,
    relu_kernel_angle,
    sample_uniform_sphere,
    tangent_projector,
)


class TestSphereSampling:
    def test_unit_norm(self):
        pts = sample_uniform_sphere(2, 3, seed=7)
        assert pts.shape == (3, 2)
        np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)

    def test_determinism(self):
        a = sample_uniform_sphere(6, 50, seed=123)
        b = sample_uniform_sphere(6, 50, seed=123)
        assert np.array_equal(a, b)

    def test_uniform_moments(self):
        # For the uniform law on S^{d-1}: E[x_i] = 0 and E[x_i^2] = 1/d.
        d, count = 5, 100_000
        pts = sample_uniform_sphere(d, count, seed=1)
        assert abs(np.mean(pts[:, 0] ** 2) - 1.0 / d) < 0.01
        # each coordinate has variance 1/d, so its sample mean has
        # standard deviation 1/sqrt(count * d); allow 4 sigma per coordinate
        assert np.max(np.abs(pts.mean(axis=0))) < 4.0 / np.sqrt(count * d)

    def test_invalid_arguments(self):
        with pytest.raises(InvalidArgumentError):
            sample_uniform_sphere(1, 5, seed=0)
        with pytest.raises(InvalidArgumentError):
            sample_uniform_sphere(3, 0, seed=0)


class TestGeodesicDist:
    def test_reference_angles(self):
        e1, e2 = np.eye(2)
        assert geodesic_dist(e1, e1) == 0.0
        assert geodesic_dist(e1, e2) == pytest.approx(np.pi / 2, abs=1e-15)
        assert geodesic_dist(e1, -e1) == pytest.approx(np.pi, abs=1e-15)

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a, b, c = sample_uniform_sphere(4, 3, rng)
            ab, ba = geodesic_dist(a, b), geodesic_dist(b, a)
            assert ab == ba
            assert ab <= geodesic_dist(a, c) + geodesic_dist(c, b) + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            geodesic_dist(np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0]))


class TestReluKernel:
    def test_diagonal_value(self):
        # coinciding directions: E[relu(<t, X>)^2] = 1/(2d)
        assert relu_kernel_angle(0.0, 2) == pytest.approx(0.25, abs=1e-15)

    def test_orthogonal_value(self):
        assert relu_kernel_angle(np.pi / 2, 2) == pytest.approx(1 / (4 * np.pi), abs=1e-15)

    def test_antipodal_value(self):
        # opposite ReLUs share support on a null set only
        for d in (2, 5, 17):
            assert relu_kernel_angle(np.pi, d) == pytest.approx(0.0, abs=1e-15)

    def test_vector_form_checks_dimension(self):
        e1, e2 = np.eye(3)[:2]
        assert relu_kernel(e1, e2) == pytest.approx(relu_kernel_angle(np.pi / 2, 3))
        with pytest.raises(InvalidArgumentError):
            relu_kernel(e1, e2, d=5)

    @pytest.mark.slow
    def test_monte_carlo_agreement(self):
        # 20 random (t1, t2, d) triples, 1e6 samples, agreement within 4 SE.
        rng = np.random.default_rng(42)
        n = 1_000_000
        for trial in range(20):
            d = int(rng.choice([2, 5, 10]))
            t1, t2 = sample_uniform_sphere(d, 2, rng)
            x = sample_uniform_sphere(d, n, rng)
            prod = np.maximum(x @ t1, 0.0) * np.maximum(x @ t2, 0.0)
            mc, se = prod.mean(), prod.std(ddof=1) / np.sqrt(n)
            exact = relu_kernel(t1, t2)
            assert abs(mc - exact) < 4 * se, f"trial {trial}: |{mc} - {exact}| >= 4*{se}"


class TestTangentProjector:
    def test_projects_out_direction(self):
        rng = np.random.default_rng(3)
        theta = sample_uniform_sphere(6, 1, rng)[0]
        proj = tangent_projector(theta)
        v = rng.standard_normal(6)
        np.testing.assert_allclose(proj @ theta, 0.0, atol=1e-12)
        assert abs((proj @ v) @ theta) < 1e-12


def _h(k):
    """(pi - arccos k)/pi * k + sqrt(1-k^2)/pi, the single-direction term of
    the population certificate."""
    return (np.pi - np.arccos(k)) / np.pi * k + np.sqrt(np.maximum(1 - k**2, 0.0)) / np.pi


def _admissible_grid(n=200):
    ks = np.linspace(-1.0, 1.0, n)
    k1, k2 = np.meshgrid(ks, ks)
    mask = k1**2 + k2**2 <= 1.0
    return k1[mask], k2[mask]


class TestTrigInequalities:
    """Grid checks of the scalar inequalities behind the certificate maximum
    principle, over 200x200 admissible (k1, k2) pairs."""

    def test_pair_merge_inequality(self):
        # h(k1) + h(k2) - h(r) - h(0) <= (k1 + k2 - r)/2 for r = sqrt(k1^2+k2^2)
        k1, k2 = _admissible_grid()
        r = np.sqrt(k1**2 + k2**2)
        lhs = _h(k1) + _h(k2) - _h(r) - 1.0 / np.pi
        rhs = 0.5 * (k1 + k2 - r)
        assert np.all(lhs <= rhs + 1e-12)

    def test_arccos_sum_lower_bound(self):
        # -arccos(k1) - arccos(k2) + arccos(r) + pi/2 <= k1 + k2 - r
        k1, k2 = _admissible_grid()
        r = np.sqrt(k1**2 + k2**2)
        lhs = -np.arccos(k1) - np.arccos(k2) + np.arccos(np.minimum(r, 1.0)) + np.pi / 2
        assert np.all(lhs <= k1 + k2 - r + 1e-12)

    def test_arccos_sum_upper_bound(self):
        # for k1, k2 >= 0: arccos(k1) + arccos(k2) <= arccos(r) + pi/2
        k1, k2 = _admissible_grid()
        keep = (k1 >= 0) & (k2 >= 0)
        k1, k2 = k1[keep], k2[keep]
        r = np.sqrt(k1**2 + k2**2)
        lhs = np.arccos(k1) + np.arccos(k2)
        rhs = np.arccos(np.minimum(r, 1.0)) + np.pi / 2
        assert np.all(lhs <= rhs + 1e-12)

    def test_single_direction_quadratic_bound(self):
        # h(k) <= 1/pi + k/2 + (1/2 - 1/pi) k^2, equality at k in {0, 1}
        k = np.linspace(-1, 1, 40_001)
        bound = 1 / np.pi + k / 2 + (0.5 - 1 / np.pi) * k**2
        assert np.all(_h(k) <= bound + 1e-12)
        assert _h(0.0) == pytest.approx(1 / np.pi)
        assert _h(1.0) == pytest.approx(1.0)


class TestVectorExpansions:
    """Random-draw checks of the norm and normalized-direction expansions
    that bound the conic-update remainders."""

    N_PAIRS = 10_000

    def _pairs(self):
        rng = np.random.default_rng(2024)
        d = rng.integers(2, 8, size=self.N_PAIRS)
        for dim in d:
            w = rng.standard_normal(dim)
            while np.linalg.norm(w) < 1e-3:
                w = rng.standard_normal(dim)
            dw = rng.standard_normal(dim)
            limit = 0.5 * np.linalg.norm(w)
            norm_dw = np.linalg.norm(dw)
            if norm_dw > limit:
                dw *= rng.uniform(0, 1) * limit / norm_dw
            yield w, dw

    def test_norm_first_order_expansion(self):
        # 0 <= ||w - dw|| - (||w|| - <w, dw>/||w||) <= ||dw||^2 / ||w||
        for w, dw in self._pairs():
            nw = np.linalg.norm(w)
            gap = np.linalg.norm(w - dw) - (nw - (w @ dw) / nw)
            assert -1e-12 <= gap <= np.linalg.norm(dw) ** 2 / nw + 1e-12

    def test_direction_first_order_expansion(self):
        # || (w-dw)/||w-dw|| - w/||w|| + P_w dw / ||w|| || <= 5 ||dw||^2/||w||^2
        for w, dw in self._pairs():
            nw = np.linalg.norm(w)
            lhs = np.linalg.norm(
                (w - dw) / np.linalg.norm(w - dw)
                - w / nw
                + (dw - (w @ dw) * w / nw**2) / nw
            )
            assert lhs <= 5 * np.linalg.norm(dw) ** 2 / nw**2 + 1e-12

    def test_cosine_gap_sandwich(self):
        # dist^2/6 <= 1 - <t1, t2> <= dist^2/2
        rng = np.random.default_rng(7)
        pts = sample_uniform_sphere(5, 2 * self.N_PAIRS, rng)
        t1, t2 = pts[::2], pts[1::2]
        cos = np.clip(np.einsum("ij,ij->i", t1, t2), -1, 1)
        dist2 = np.arccos(cos) ** 2
        assert np.all(dist2 / 6 <= 1 - cos + 1e-12)
        assert np.all(1 - cos <= dist2 / 2 + 1e-12)
