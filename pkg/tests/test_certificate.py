"""Dual-certificate machinery: feature matrices, the pre-certificate, the
closed-form population certificate, and non-degeneracy reports."""

import numpy as np
import pytest

from tsblasso.certificate import (
    DualVector,
    build_X0,
    dual_eval,
    dual_eval_batch,
    expected_K0,
    ndsc_report,
    population_certificate,
    population_constants,
    precertificate,
)
from tsblasso.errors import InvalidArgumentError, RankDeficientError
from tsblasso.geometry import sample_uniform_sphere
from tsblasso.model import Dataset, make_dataset, make_teacher


class TestBuildX0:
    def test_indicator_arithmetic(self):
        data = Dataset(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1.0, 0.0]))
        x0 = build_X0(np.array([[1.0, 0.0]]), data)
        np.testing.assert_array_equal(x0, [[1.0, 0.0], [0.0, 0.0]])

    def test_column_norm_bound(self):
        teacher = make_teacher(3, 5, np.ones(3), seed=0)
        data = make_dataset(teacher, 50, seed=1)
        x0 = build_X0(teacher.directions, data)
        assert x0.shape == (15, 50)
        assert np.all(np.linalg.norm(x0, axis=0) <= np.sqrt(3) + 1e-12)

    def test_rejects_nonorthogonal(self):
        data = make_dataset(make_teacher(1, 2, np.ones(1), seed=0), 10, seed=0)
        dirs = np.array([[1.0, 0.0], [np.sqrt(0.5), np.sqrt(0.5)]])
        with pytest.raises(InvalidArgumentError):
            build_X0(dirs, data)

    @pytest.mark.slow
    def test_empirical_eigenvalue_floor(self):
        # E[(1/n) X0 X0^T] >= (1/d)(1/4 - 1/(2 pi)) I; the sampled matrix at
        # n=4000 stays above half that floor.
        m, d, n = 2, 4, 4000
        floor = (0.25 - 0.5 / np.pi) / d
        for seed in range(3):
            teacher = make_teacher(m, d, np.ones(m), seed=seed)
            data = make_dataset(teacher, n, seed=seed + 10)
            x0 = build_X0(teacher.directions, data)
            k0 = x0 @ x0.T / n
            assert np.linalg.eigvalsh(k0)[0] > floor / 2


@pytest.fixture(scope="module")
def precert_setup():
    teacher = make_teacher(2, 4, np.ones(2), seed=3)
    data = make_dataset(teacher, 2000, seed=4)
    return teacher, data, precertificate(teacher.directions, data)


class TestPrecertificate:
    def test_values_at_teacher_are_one(self, precert_setup):
        teacher, _, p = precert_setup
        for j in range(teacher.m):
            value, _ = dual_eval(p, teacher.directions[j])
            assert value == pytest.approx(1.0, abs=1e-8)

    def test_gradient_residuals(self, precert_setup):
        teacher, _, p = precert_setup
        for j in range(teacher.m):
            _, grad = dual_eval(p, teacher.directions[j])
            assert np.linalg.norm(grad - teacher.directions[j]) <= 1e-8

    def test_off_support_below_one(self, precert_setup):
        teacher, _, p = precert_setup
        probes = sample_uniform_sphere(4, 10_000, seed=5)
        values = dual_eval_batch(p, probes)
        assert np.max(np.abs(values)) < 1.0

    def test_needs_enough_samples(self):
        teacher = make_teacher(2, 4, np.ones(2), seed=3)
        data = make_dataset(teacher, 7, seed=4)
        with pytest.raises(InvalidArgumentError):
            precertificate(teacher.directions, data)

    def test_rank_deficiency_detected(self):
        # duplicating a single input makes X0 rank 1 < m*d
        x = np.tile(np.array([[1.0, 0.0, 0.0, 0.0]]), (8, 1))
        data = Dataset(x, np.zeros(8))
        teacher = make_teacher(2, 4, np.ones(2), seed=3)
        with pytest.raises(RankDeficientError) as excinfo:
            precertificate(teacher.directions, data)
        assert excinfo.value.estimated_rank < 8
        # the pseudo-inverse fallback still produces a dual vector
        p = precertificate(teacher.directions, data, allow_rank_deficient=True)
        assert p.p.shape == (8,)


class TestDualEval:
    def test_zero_vector(self):
        data = make_dataset(make_teacher(1, 3, np.ones(1), seed=0), 10, seed=0)
        p = DualVector(np.zeros(10), data)
        value, grad = dual_eval(p, np.eye(3)[0])
        assert value == 0.0
        np.testing.assert_array_equal(grad, np.zeros(3))

    def test_single_sample_arithmetic(self):
        data = Dataset(np.array([[1.0, 0.0]]), np.array([0.0]))
        p = DualVector(np.array([2.0]), data)
        value, grad = dual_eval(p, np.array([1.0, 0.0]))
        assert value == pytest.approx(2.0)
        np.testing.assert_allclose(grad, [2.0, 0.0])

    def test_euler_identity(self):
        # <theta, grad f*(p)(theta)> == f*(p)(theta) exactly (1-homogeneity)
        rng = np.random.default_rng(6)
        data = make_dataset(make_teacher(2, 5, np.ones(2), seed=1), 60, seed=2)
        p = DualVector(rng.standard_normal(60), data)
        for theta in sample_uniform_sphere(5, 1000, rng):
            value, grad = dual_eval(p, theta)
            assert abs(theta @ grad - value) < 1e-14 * max(1.0, abs(value))


class TestPopulationConstants:
    def test_m1_sum_is_one(self):
        # the 2x2 linear system collapses to a + b = 1 at m = 1shows
        pc = population_constants(1)
        assert pc.a + pc.b == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("m", [1, 2, 3, 5, 10, 25])
    def test_solves_defining_system(self, m):
        # independently solve the 2x2 system and compare
        pi = np.pi
        mat = np.array(
            [
                [1 + (m - 1) / pi, (m + 1) / 2 + (m - 1) / pi],
                [1.0, 2 / pi + m + 1],
            ]
        )
        sol = np.linalg.solve(mat, np.array([1.0, 0.0]))
        pc = population_constants(m)
        np.testing.assert_allclose([pc.a, pc.b], sol, rtol=1e-12)

    @pytest.mark.parametrize("m", range(1, 30))
    def test_signs_and_linear_relation(self, m):
        pc = population_constants(m)
        assert pc.a > 0 > pc.b
        assert pc.a + (2 / np.pi + m + 1) * pc.b == pytest.approx(0.0, abs=1e-12)


class TestPopulationCertificate:
    @pytest.mark.parametrize("m", [1, 2, 5, 10])
    def test_equals_one_at_teacher_directions(self, m):
        dirs = np.eye(12)[:m]
        for j in range(m):
            assert population_certificate(dirs[j], dirs) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_probe_m1(self):
        dirs = np.eye(4)[:1]
        assert population_certificate(np.eye(4)[1], dirs) == pytest.approx(
            1 / np.pi, abs=1e-12
        )

    @pytest.mark.parametrize("m", [1, 2, 5])
    def test_strictly_inside_unit_interval_off_support(self, m):
        d = 12
        dirs = np.eye(d)[:m]
        probes = sample_uniform_sphere(d, 10_000, seed=m)
        ang = np.arccos(np.clip(probes @ dirs.T, -1, 1))
        keep = np.all(ang > 1e-3, axis=1)
        vals = np.array([population_certificate(t, dirs) for t in probes[keep]])
        assert np.all(vals > 0.0) and np.all(vals < 1.0)

    def test_invariant_to_orthogonal_complement(self):
        # value depends only on the coefficients along the teacher frame
        rng = np.random.default_rng(9)
        d = 6
        dirs = np.eye(d)[:2]
        k = np.array([0.3, -0.4])
        base = np.concatenate([k, np.zeros(d - 2)])
        theta1 = base + np.concatenate([np.zeros(2), [np.sqrt(1 - k @ k)], np.zeros(d - 3)])
        theta2 = base + np.concatenate([np.zeros(3), [np.sqrt(1 - k @ k)], np.zeros(d - 4)])
        assert population_certificate(theta1, dirs) == pytest.approx(
            population_certificate(theta2, dirs), abs=1e-12
        )

    def test_rejects_nonorthogonal_teacher(self):
        dirs = np.array([[1.0, 0.0], [np.sqrt(0.5), np.sqrt(0.5)]])
        with pytest.raises(InvalidArgumentError):
            population_certificate(np.array([0.0, 1.0]), dirs)


class TestExpectedK0:
    def test_single_direction_block(self):
        dirs = np.eye(3)[:1]
        np.testing.assert_allclose(expected_K0(dirs), np.eye(3) / 6)

    @pytest.mark.parametrize("m,d", [(1, 2), (2, 4), (3, 5), (5, 8)])
    def test_symmetric_positive_definite_with_floor(self, m, d):
        teacher = make_teacher(m, d, np.ones(m), seed=m + d)
        k0 = expected_K0(teacher.directions)
        np.testing.assert_allclose(k0, k0.T, atol=1e-15)
        floor = (0.25 - 0.5 / np.pi) / d
        assert np.linalg.eigvalsh(k0)[0] >= floor - 1e-12

    @pytest.mark.slow
    def test_concentration_improves_with_n(self):
        # median operator-norm error falls from n=250 to n=4000
        m, d = 2, 4
        errs = {250: [], 4000: []}
        for seed in range(10):
            teacher = make_teacher(m, d, np.ones(m), seed=seed)
            expected = expected_K0(teacher.directions)
            for n in errs:
                data = make_dataset(teacher, n, seed=1000 + seed)
                x0 = build_X0(teacher.directions, data)
                emp = x0 @ x0.T / n
                errs[n].append(np.linalg.norm(emp - expected, ord=2))
        assert np.median(errs[4000]) < np.median(errs[250])


class TestNdscReport:
    def test_pre_certificate_report(self):
        teacher = make_teacher(2, 4, np.ones(2), seed=7)
        data = make_dataset(teacher, 2000, seed=8)
        p = precertificate(teacher.directions, data)
        report = ndsc_report(p, teacher.directions, probes=4000, cap_radius=1e-3, seed=0)
        np.testing.assert_allclose(report.values_at_teacher, 1.0, atol=1e-8)
        assert np.all(report.gradient_residuals <= 1e-8)
        assert report.max_off_support < 1.0
        # within the activation cell the certificate is exactly cos(t) < 1
        assert report.local_cell_max < 1.0
        assert report.local_linearity_residual < 1e-10
        # beyond the cell a vanishing finite-sample excursion above 1 can
        # occur; it must stay microscopic at this sample size
        assert report.max_local_ray < 1.0 + 1e-4
        assert report.probe_count >= 1

    def test_zero_dual_vector(self):
        teacher = make_teacher(2, 4, np.ones(2), seed=7)
        data = make_dataset(teacher, 100, seed=8)
        p = DualVector(np.zeros(100), data)
        report = ndsc_report(p, teacher.directions, probes=100, cap_radius=1e-3, seed=0)
        np.testing.assert_array_equal(report.values_at_teacher, 0.0)
        assert report.max_off_support == 0.0


class TestCertificatePiecewiseLinearity:
    def test_no_curvature_between_activation_crossings(self):
        # along a geodesic, second differences of f*(p) vanish except where
        # an input's activation flips
        rng = np.random.default_rng(15)
        teacher = make_teacher(2, 3, np.ones(2), seed=11)
        data = make_dataset(teacher, 40, seed=12)
        p = precertificate(teacher.directions, data)
        for _ in range(100):
            a = sample_uniform_sphere(3, 1, rng)[0]
            b0 = rng.standard_normal(3)
            b0 -= (b0 @ a) * a
            b0 /= np.linalg.norm(b0)
            ts = np.linspace(0, 0.2, 41)
            pts = np.outer(np.cos(ts), a) + np.outer(np.sin(ts), b0)
            vals = dual_eval_batch(p, pts)
            signs = data.x @ pts.T >= 0
            crossing = np.any(signs[:, :-1] != signs[:, 1:], axis=0)
            second = np.abs(np.diff(vals, 2))
            smooth = ~(crossing[:-1] | crossing[1:])
            # f* restricted to the geodesic is trigonometric-linear:
            # a cos t + b sin t has second differences O(h^2) * value
            assert np.all(second[smooth] < 1e-4 * max(1.0, np.max(np.abs(vals))))


@pytest.mark.slow
class TestPopulationVsSampled:
    def test_sup_gap_shrinks_with_n(self):
        m, d = 2, 4
        gaps = {500: [], 4000: []}
        probes = sample_uniform_sphere(d, 1000, seed=99)
        for seed in range(10):
            teacher = make_teacher(m, d, np.ones(m), seed=seed)
            f_bar = np.array([population_certificate(t, teacher.directions) for t in probes])
            for n in gaps:
                data = make_dataset(teacher, n, seed=2000 + seed)
                p = precertificate(teacher.directions, data)
                f_star = dual_eval_batch(p, probes)
                gaps[n].append(np.max(np.abs(f_star - f_bar)))
        assert np.median(gaps[4000]) < np.median(gaps[500])
