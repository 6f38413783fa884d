import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from drsub import (CapacityError, InputError, check_dr_inequality,
                   coverage_function, finite_diff_grad, instance_from_json,
                   make_concave_modular, make_quadratic, multilinear_extension,
                   set_function_from_table)
from drsub.objective import (empirical_smoothness, set_is_monotone,
                             set_is_submodular)

from conftest import brute_multilinear, cut_table, exhaustive_submodularity_ok

COVER2 = coverage_function([[0, 1], [1, 2]])  # extension is 2x1 + 2x2 - x1 x2
QUAD = make_quadratic([[-2.0, 0.0], [0.0, -2.0]], [1.0, 0.5])


class TestEval:
    def test_coverage_at_ones(self):
        F = multilinear_extension(COVER2)
        assert F.value([1.0, 1.0]) == pytest.approx(3.0, abs=1e-12)

    def test_coverage_at_origin_is_empty_set_value(self):
        F = multilinear_extension(COVER2)
        assert F.value([0.0, 0.0]) == 0.0

    def test_quadratic_point(self):
        # direct polynomial evaluation: 0.625 - 0.3125 + offset 0.5
        assert QUAD.value([0.5, 0.25]) == pytest.approx(0.8125, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            QUAD.value([0.5])

    def test_clamps_roundoff(self):
        assert QUAD.value([1.0 + 1e-13, -1e-13]) == pytest.approx(QUAD.value([1.0, 0.0]))

    def test_rejects_nan(self):
        with pytest.raises(InputError):
            QUAD.value([np.nan, 0.0])


class TestGrad:
    def test_coverage_at_origin(self):
        F = multilinear_extension(COVER2)
        assert F.grad([0.0, 0.0]) == pytest.approx([2.0, 2.0], abs=1e-12)

    def test_modular_gradient_is_weights(self, rng):
        w = np.array([0.3, 1.2, 0.0])
        F = make_quadratic(np.zeros((3, 3)), w)
        for _ in range(5):
            assert F.grad(rng.uniform(size=3)) == pytest.approx(w, abs=1e-12)

    def test_quadratic_at_origin(self):
        assert QUAD.grad([0.0, 0.0]) == pytest.approx([1.0, 0.5], abs=1e-12)


class TestMultilinearExtension:
    def test_matches_bruteforce_at_random_points(self, rng):
        F = multilinear_extension(COVER2)
        for _ in range(20):
            x = rng.uniform(size=2)
            assert F.value(x) == pytest.approx(brute_multilinear(COVER2.table, x), abs=1e-12)

    def test_lattice_agreement(self):
        sf = coverage_function([[0, 1], [1, 2], [2, 3]])
        F = multilinear_extension(sf)
        for mask in range(1 << sf.m):
            x = np.array([(mask >> i) & 1 for i in range(sf.m)], dtype=float)
            assert F.value(x) == pytest.approx(sf.value(mask), abs=1e-12)

    def test_zero_function(self):
        F = multilinear_extension(set_function_from_table([0.0, 0.0, 0.0, 0.0]))
        assert F.value([0.3, 0.9]) == 0.0
        assert F.grad([0.3, 0.9]) == pytest.approx([0.0, 0.0], abs=1e-15)

    def test_modular_set_function_gives_linear_extension(self, rng):
        w = [0.5, 1.5]
        table = [0.0, w[0], w[1], w[0] + w[1]]
        F = multilinear_extension(set_function_from_table(table))
        for _ in range(10):
            x = rng.uniform(size=2)
            assert F.value(x) == pytest.approx(float(np.dot(w, x)), abs=1e-12)

    def test_gradient_is_pinning_gap(self, rng):
        sf = coverage_function([[0, 1], [1, 2], [2, 3]])
        F = multilinear_extension(sf)
        x = rng.uniform(size=3)
        g = F.grad(x)
        for i in range(3):
            hi, lo = x.copy(), x.copy()
            hi[i], lo[i] = 1.0, 0.0
            assert g[i] == pytest.approx(F.value(hi) - F.value(lo), abs=1e-12)

    def test_default_smoothness_constant(self):
        F = multilinear_extension(COVER2)
        assert F.L == pytest.approx(2 * 2 * 3.0)

    def test_lattice_agreement_at_twelve_elements(self, rng):
        table = rng.uniform(0.0, 3.0, size=1 << 12)
        table[0] = 0.0
        sf = set_function_from_table(table)
        F = multilinear_extension(sf)
        for mask in rng.integers(0, 1 << 12, size=64):
            x = np.array([(int(mask) >> i) & 1 for i in range(12)], dtype=float)
            assert F.value(x) == pytest.approx(table[int(mask)], abs=1e-12)
        assert F.value(np.ones(12)) == pytest.approx(table[-1], abs=1e-12)

    def test_capacity_error(self):
        with pytest.raises(CapacityError):
            set_function_from_table(np.zeros(1 << 21))

    def test_negative_values_rejected(self):
        with pytest.raises(InputError):
            set_function_from_table([0.0, -1.0, 0.0, 0.0])


class TestQuadraticFamily:
    def test_offdiagonal_instance(self):
        F = make_quadratic([[0.0, -1.0], [-1.0, 0.0]], [1.0, 1.0])
        # F = x1 + x2 - x1 x2, vertex minimum 0 at the origin
        assert F.value([0.0, 0.0]) == 0.0
        assert F.monotone
        x = [0.3, 0.8]
        assert F.value(x) == pytest.approx(0.3 + 0.8 - 0.24, abs=1e-12)

    def test_offset_and_spectral_norm(self):
        # vertex values are {0, -0.5, 0, -0.5}, so the lift is 0.5
        assert QUAD.value([0.0, 0.0]) == pytest.approx(0.5, abs=1e-12)
        assert QUAD.L == pytest.approx(2.0, rel=1e-9)
        assert not QUAD.monotone

    def test_modular_case(self):
        F = make_quadratic(np.zeros((2, 2)), [1.0, 2.0])
        assert F.L == 0.0
        assert F.monotone
        assert F.value([1.0, 1.0]) == pytest.approx(3.0)

    def test_positive_entry_rejected(self):
        with pytest.raises(InputError):
            make_quadratic([[0.0, 0.1], [0.1, 0.0]], [1.0, 1.0])

    def test_asymmetric_rejected(self):
        with pytest.raises(InputError):
            make_quadratic([[0.0, -1.0], [-2.0, 0.0]], [1.0, 1.0])

    def test_spectral_norm_matches_numpy(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 6))
            H = -np.abs(rng.normal(size=(n, n)))
            H = (H + H.T) / 2.0
            F = make_quadratic(H, np.zeros(n))
            assert F.L == pytest.approx(float(np.linalg.norm(H, 2)), rel=1e-8, abs=1e-10)


class TestConcaveModular:
    def test_single_weight_value(self):
        F = make_concave_modular([[1.0, 0.0]])
        expected = math.sqrt(1.001) - math.sqrt(0.001)
        assert F.value([1.0, 0.7]) == pytest.approx(expected, abs=1e-12)

    def test_empty_weight_list(self):
        F = make_concave_modular([], n=3)
        assert F.value([0.5, 0.5, 0.5]) == 0.0
        assert F.L == 0.0

    def test_gradient(self):
        F = make_concave_modular([[4.0, 0.0]])
        g = F.grad([1.0, 0.0])
        assert g[0] == pytest.approx(4.0 / (2.0 * math.sqrt(4.001)), abs=1e-12)
        assert g[1] == 0.0

    def test_negative_weight_rejected(self):
        with pytest.raises(InputError):
            make_concave_modular([[1.0, -0.5]])

    def test_zero_weight_vector_rejected(self):
        with pytest.raises(InputError):
            make_concave_modular([[0.0, 0.0]])


class TestDrInequality:
    def test_equal_points_residual_zero(self):
        x = np.array([0.4, 0.6])
        assert check_dr_inequality(QUAD, x, x) == 0.0

    def test_coverage_corner_pair(self):
        F = multilinear_extension(COVER2)
        assert check_dr_inequality(F, [0.0, 0.0], [1.0, 1.0]) == pytest.approx(1.0, abs=1e-12)

    def test_modular_residual_zero(self, rng):
        F = make_quadratic(np.zeros((3, 3)), [1.0, 2.0, 0.5])
        for _ in range(20):
            assert abs(check_dr_inequality(F, rng.uniform(size=3),
                                           rng.uniform(size=3))) <= 1e-12

    def test_nonnegative_on_instances(self, rng):
        for F in (QUAD, multilinear_extension(COVER2),
                  make_concave_modular([[1.0, 2.0]])):
            for _ in range(200):
                assert check_dr_inequality(F, rng.uniform(size=F.n),
                                           rng.uniform(size=F.n)) >= -1e-9


class TestFiniteDiff:
    def test_modular_exact(self):
        w = np.array([1.0, 2.0, 0.25])
        F = make_quadratic(np.zeros((3, 3)), w)
        assert finite_diff_grad(F, [0.2, 0.5, 0.9], 1e-4) == pytest.approx(w, abs=1e-12)

    def test_coverage_interior(self):
        F = multilinear_extension(COVER2)
        fd = finite_diff_grad(F, [0.3, 0.7], 1e-4)
        assert fd == pytest.approx([1.3, 1.7], rel=1e-6)

    def test_quadratic_interior(self, rng):
        x = rng.uniform(0.1, 0.9, size=2)
        fd = finite_diff_grad(QUAD, x, 1e-4)
        assert fd == pytest.approx(QUAD.grad(x), rel=1e-6, abs=1e-9)

    def test_boundary_fallback(self):
        fd = finite_diff_grad(QUAD, [0.0, 1.0], 1e-4)
        assert fd == pytest.approx(QUAD.grad([0.0, 1.0]), rel=1e-3, abs=1e-3)

    def test_bad_step_rejected(self):
        with pytest.raises(InputError):
            finite_diff_grad(QUAD, [0.5, 0.5], 0.0)


class TestInvariantBatteries:
    """The sampled contracts every instance family must satisfy."""

    @pytest.fixture(params=["coverage", "quadratic", "concave", "cut"])
    def instance(self, request, rng):
        if request.param == "coverage":
            return multilinear_extension(coverage_function([[0, 1], [1, 2], [2, 3]]))
        if request.param == "quadratic":
            return QUAD
        if request.param == "concave":
            return make_concave_modular([[1.0, 0.5, 0.0], [0.0, 1.0, 2.0]])
        table = cut_table(np.array([[0.0, 1.0, 0.5], [1.0, 0.0, 2.0], [0.5, 2.0, 0.0]]))
        return multilinear_extension(set_function_from_table(table))

    def test_antitone_gradient(self, instance, rng):
        for _ in range(100):
            x = rng.uniform(size=instance.n)
            y = np.minimum(x + rng.uniform(size=instance.n) * (1 - x), 1.0)
            assert np.all(instance.grad(x) >= instance.grad(y) - 1e-9)

    def test_nonnegative_values(self, instance, rng):
        for _ in range(100):
            assert instance.value(rng.uniform(size=instance.n)) >= 0.0

    def test_monotone_flag_means_nonnegative_gradient(self, instance, rng):
        if not instance.monotone:
            pytest.skip("instance is not monotone-flagged")
        for _ in range(100):
            assert np.all(instance.grad(rng.uniform(size=instance.n)) >= -1e-9)

    def test_gradient_vs_finite_difference(self, instance, rng):
        for _ in range(50):
            x = rng.uniform(size=instance.n)
            g = instance.grad(x)
            fd = finite_diff_grad(instance, x, 1e-4)
            assert np.max(np.abs(g - fd)) / (1.0 + np.max(np.abs(g))) <= 1e-5

    def test_empirical_smoothness_within_L(self, instance):
        assert empirical_smoothness(instance, samples=100) <= instance.L + 1e-9

    def test_dr_residual(self, instance, rng):
        for _ in range(200):
            res = check_dr_inequality(instance, rng.uniform(size=instance.n),
                                      rng.uniform(size=instance.n))
            assert res >= -1e-9


class TestSetFunctionChecks:
    def test_coverage_is_monotone_submodular(self):
        sf = coverage_function([[0, 1], [1, 2], [2, 3]])
        assert set_is_monotone(sf)
        assert set_is_submodular(sf)

    def test_cut_is_submodular_not_monotone(self):
        w = np.array([[0.0, 1.0, 0.5], [1.0, 0.0, 2.0], [0.5, 2.0, 0.0]])
        sf = set_function_from_table(cut_table(w))
        assert set_is_submodular(sf)
        assert not set_is_monotone(sf)

    def test_pairwise_check_matches_exhaustive_definition(self, rng):
        for _ in range(20):
            m = int(rng.integers(2, 5))
            table = rng.uniform(size=1 << m)
            table[0] = 0.0
            sf = set_function_from_table(table)
            assert set_is_submodular(sf) == exhaustive_submodularity_ok(table, m)


@settings(max_examples=40, deadline=None)
@given(weights=st.lists(st.floats(0.0, 5.0), min_size=3, max_size=6),
       seed=st.integers(0, 10_000))
def test_random_coverage_extension_properties(weights, seed):
    rng = np.random.default_rng(seed)
    n_elements = len(weights)
    subsets = [sorted(rng.choice(n_elements, size=rng.integers(1, n_elements + 1),
                                 replace=False).tolist()) for _ in range(3)]
    sf = coverage_function(subsets, weights, n_elements)
    F = multilinear_extension(sf)
    x = rng.uniform(size=3)
    y = rng.uniform(size=3)
    assert F.value(x) == pytest.approx(brute_multilinear(sf.table, x), abs=1e-9)
    assert check_dr_inequality(F, x, y) >= -1e-9
    assert np.all(F.grad(np.minimum(x, y)) >= F.grad(np.maximum(x, y)) - 1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 4))
def test_random_quadratics_are_dr(seed, n):
    rng = np.random.default_rng(seed)
    H = -np.abs(rng.normal(size=(n, n)))
    H = (H + H.T) / 2.0
    F = make_quadratic(H, rng.uniform(0.0, 2.0, size=n))
    x = rng.uniform(size=n)
    y = rng.uniform(size=n)
    assert F.value(x) >= -1e-12
    assert check_dr_inequality(F, x, y) >= -1e-9
    assert float(np.linalg.norm(F.grad(x) - F.grad(y))) <= F.L * float(
        np.linalg.norm(x - y)) + 1e-9


class TestInstanceJson:
    def test_coverage_roundtrip(self):
        F, sf = instance_from_json({"kind": "coverage", "subsets": [[0, 1], [1, 2]]})
        assert sf is not None
        assert F.value([1.0, 1.0]) == pytest.approx(3.0)

    def test_table_kind(self):
        F, sf = instance_from_json({"kind": "table", "m": 2, "values": [0, 1, 1, 1.5]})
        assert sf.value([0, 1]) == 1.5
        assert F.value([1.0, 0.0]) == pytest.approx(1.0)

    def test_smoothness_override(self):
        F, _ = instance_from_json({"kind": "coverage", "subsets": [[0], [1]], "L": 7.5})
        assert F.L == 7.5

    def test_quadratic_kind(self):
        F, sf = instance_from_json(
            {"kind": "quadratic", "H": [[-2, 0], [0, -2]], "c": [1, 0.5]})
        assert sf is None
        assert F.value([0.5, 0.25]) == pytest.approx(0.8125)

    def test_unknown_kind(self):
        with pytest.raises(InputError):
            instance_from_json({"kind": "mystery"})
