import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from hombif.catalog import BASE, SADDLE, paper_matrix
from hombif.errors import InconsistentParityError, InvalidInputError, InvertibilityError, NonzeroIndexError
from hombif.fredholm import (
    CROSSING_TOL,
    CrossingTransports,
    JumpSystem,
    SingleMatrixSystem,
    count_sign_changes,
    crossing_determinant,
    finite_section,
    grid_kernel_dimensions,
    index_bundle_w1,
    index_of_family,
    kernel_jump,
    kernel_orbit,
    locate_crossings,
    parity_of_loop,
)
from hombif.linalg import orthonormalize
from hombif.loopbundle import MatrixLoop, transport_frames
from hombif.randomized import random_hyperbolic, random_jump_system


def example_jump(K=64, offset=0.0):
    return JumpSystem.from_generators(paper_matrix, lambda t: BASE, K, offset)


def constant_jump(K=16):
    return JumpSystem.from_generators(lambda t: SADDLE, lambda t: SADDLE, K)


class TestIndex:
    def test_example(self):
        assert index_of_family(paper_matrix(1.0), paper_matrix(0.0)) == 0

    def test_diagonals(self):
        assert index_of_family(np.diag([0.5, 1 / 3, 2]), np.diag([0.5, 2, 3])) == 1

    def test_equal(self):
        assert index_of_family(SADDLE, SADDLE) == 0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31))
    def test_additive_over_blocks(self, seed):
        rng = np.random.default_rng(seed)
        pairs = []
        for _ in range(2):
            n = int(rng.integers(1, 4))
            pairs.append((random_hyperbolic(rng, n, int(rng.integers(0, n + 1))),
                          random_hyperbolic(rng, n, int(rng.integers(0, n + 1)))))
        total = index_of_family(scipy.linalg.block_diag(*(p for p, _ in pairs)),
                                scipy.linalg.block_diag(*(m for _, m in pairs)))
        assert total == sum(index_of_family(p, m) for p, m in pairs)


class TestIndexBundle:
    def test_example(self):
        assert index_bundle_w1(example_jump()) == -1

    def test_identical_bundles(self):
        jump = example_jump()
        assert index_bundle_w1(JumpSystem(jump.a_plus_loop, jump.a_plus_loop)) == 1

    def test_constant(self):
        assert index_bundle_w1(constant_jump()) == 1

    def test_nonzero_index(self):
        jump = JumpSystem.from_generators(lambda t: np.diag([0.5, 0.5]), lambda t: SADDLE, 8)
        with pytest.raises(NonzeroIndexError):
            index_bundle_w1(jump)

    def test_grid_mismatch(self):
        with pytest.raises(InvalidInputError):
            JumpSystem(MatrixLoop.from_generator(paper_matrix, 8), MatrixLoop.from_generator(paper_matrix, 16))


class TestKernel:
    def test_at_pi(self):
        f = kernel_jump(example_jump(), math.pi)
        assert f.k == 1
        assert f.same_span(orthonormalize([(0, 1)]), tol=1e-12)

    def test_at_zero(self):
        assert kernel_jump(example_jump(), 0.0).k == 0

    def test_constant(self):
        jump = constant_jump()
        assert all(kernel_jump(jump, t).k == 0 for t in np.linspace(0, 6, 7))

    def test_grid_kernel_dimensions(self):
        dims = grid_kernel_dimensions(example_jump(16))
        assert dims == [1 if k == 8 else 0 for k in range(16)]

    def test_kernel_orbit_solves_equation(self):
        jump = example_jump()
        x = kernel_orbit(jump, math.pi, [0.0, 1.0], 10, 10)
        for j, n in enumerate(range(-10, 10)):
            np.testing.assert_allclose(x[j + 1], jump.coefficient(math.pi, n) @ x[j], atol=1e-15)
        assert np.abs(x[0]).max() == pytest.approx(2.0**-10)
        assert np.abs(x[-1]).max() == pytest.approx(2.0**-10)


class TestCrossingDeterminant:
    def test_cosine(self):
        jump = example_jump(64)
        d = CrossingTransports.compute(jump).grid_values()
        np.testing.assert_allclose(d, np.cos(jump.thetas / 2), atol=1e-12)

    @pytest.mark.parametrize("theta", [0.3, 1.7, 2.9, 4.4, 6.1])
    def test_off_grid(self, theta):
        assert crossing_determinant(example_jump(64), theta) == pytest.approx(math.cos(theta / 2), abs=1e-10)

    def test_zero_at_pi(self):
        assert abs(crossing_determinant(example_jump(64), math.pi)) < 1e-15

    def test_constant(self):
        d = CrossingTransports.compute(constant_jump()).grid_values()
        np.testing.assert_allclose(np.abs(d), 1.0)

    def test_dimension_mismatch(self):
        jump = JumpSystem.from_generators(lambda t: np.diag([0.5, 0.5]), lambda t: SADDLE, 8)
        with pytest.raises(InvalidInputError):
            crossing_determinant(jump, 0.0)

    def test_holonomy_consistency(self):
        jump = example_jump(64)
        tr = CrossingTransports.compute(jump)
        d = tr.grid_values()
        sign = tr.plus_stable.w1 * tr.minus_unstable.w1
        assert d[-1] == pytest.approx(sign * d[0], abs=1e-12)


class TestSignChanges:
    def test_simple(self):
        assert count_sign_changes([1, 0.5, -0.5, -1]) == [(1, 2)]

    def test_zero_on_grid_bridged(self):
        assert count_sign_changes([1, 0.5, 1e-12, -0.5]) == [(1, 3)]

    def test_tangential_touch_flagged(self):
        with pytest.raises(InconsistentParityError):
            count_sign_changes([1, 0.5, 1e-12, 0.5, 1])

    def test_base_zero(self):
        with pytest.raises(InvertibilityError):
            count_sign_changes([1e-12, 1, -1])


class TestParity:
    def test_example(self):
        res = parity_of_loop(example_jump(), 0.0)
        assert res.parity == res.by_crossings == res.by_index_bundle == -1
        assert res.crossings == 1

    def test_constant(self):
        assert parity_of_loop(constant_jump(), 0.0).parity == 1

    def test_doubled(self):
        jump = JumpSystem.from_generators(lambda t: paper_matrix(2 * t), lambda t: BASE, 64)
        res = parity_of_loop(jump, 0.0)
        assert res.parity == 1
        assert res.crossings == 2

    def test_other_base_point(self):
        assert parity_of_loop(example_jump(), 1.0).parity == -1

    def test_base_in_kernel(self):
        with pytest.raises(InvertibilityError):
            parity_of_loop(example_jump(64), math.pi)

    def test_locate_crossings(self):
        found = locate_crossings(example_jump(64))
        assert len(found) == 1
        c = found[0]
        assert c.contains(math.pi)
        assert c.hi - c.lo <= 2 * math.pi / 2**20
        assert c.lo <= c.estimate <= c.hi


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_parity_routes_agree(seed):
    rng = np.random.default_rng(seed)
    jump, plus, minus = random_jump_system(rng, int(rng.integers(2, 5)), K=48)
    res = parity_of_loop(jump, 0.0)
    assert res.by_crossings == res.by_index_bundle == plus.expected_w1 * minus.expected_w1


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31))
def test_kernel_crossing_consistency(seed):
    rng = np.random.default_rng(seed)
    jump, _, _ = random_jump_system(rng, int(rng.integers(2, 5)), K=32)
    d = CrossingTransports.compute(jump).grid_values()
    for k, theta in enumerate(jump.thetas[:-1]):
        assert (kernel_jump(jump, theta).k > 0) == (abs(d[k]) < CROSSING_TOL)


class TestFiniteSection:
    def test_shape(self):
        s = finite_section(example_jump(), 0.0, 8, 8)
        assert s.matrix.shape == (2 * 17, 2 * 17)

    def test_invertible_at_zero(self):
        assert finite_section(example_jump(), 0.0, 8, 8).sigma_min >= 0.05

    def test_singular_at_pi(self):
        assert finite_section(example_jump(), math.pi, 8, 8).sigma_min < 1e-3
        # the jump system at pi carries the exact kernel orbit, so every length is singular
        for n in (4, 16, 32):
            assert finite_section(example_jump(), math.pi, n, n).sigma_min < 1e-12

    def test_near_kernel_decays_geometrically(self):
        theta = math.pi + 1e-3
        values = [finite_section(example_jump(), theta, n, n).sigma_min for n in (2, 4, 6, 8)]
        assert values == sorted(values, reverse=True)

    def test_uniform_lower_bound_off_kernel(self):
        s1 = finite_section(example_jump(), 0.0, 10, 10).sigma_min
        s2 = finite_section(example_jump(), 0.0, 20, 20).sigma_min
        assert abs(s2 - s1) < 0.1 * s1

    def test_boundary_rows_encode_projections(self):
        s = finite_section(example_jump(), 0.0, 3, 3)
        # x_{-3} in E^u(-inf) = span{e2}, x_3 in E^s(+inf) = span{e1}
        left, right = s.matrix[-2], s.matrix[-1]
        assert abs(left[:2] @ [0, 1]) < 1e-14 and abs(left[:2] @ [1, 0]) > 0.5
        assert abs(right[-2:] @ [1, 0]) < 1e-14 and abs(right[-2:] @ [0, 1]) > 0.5

    def test_one_sided_saddle(self):
        s = finite_section(SingleMatrixSystem(SADDLE), 0.0, 0, 40, boundary="right")
        assert s.matrix.shape == (81, 82)
        assert s.null_dimension() == 1

    def test_bad_arguments(self):
        with pytest.raises(InvalidInputError):
            finite_section(example_jump(), 0.0, 4, 0)
        with pytest.raises(InvalidInputError):
            finite_section(example_jump(), 0.0, 4, 4, boundary="top")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_one_sided_null_space(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    k = int(rng.integers(0, n + 1))
    a = random_hyperbolic(rng, n, k)
    assert finite_section(SingleMatrixSystem(a), 0.0, 0, 30, boundary="right").null_dimension() == k


def test_tabulated_jump_off_grid_rejected():
    samples = tuple(paper_matrix(2 * math.pi * k / 16) for k in range(16))
    base = tuple(BASE for _ in range(16))
    jump = JumpSystem(MatrixLoop(samples), MatrixLoop(base))
    assert kernel_jump(jump, math.pi).k == 1
    with pytest.raises(InvalidInputError):
        jump.limit(0.1, 1)


def test_transport_of_unstable_minus_bundle_is_trivial():
    assert transport_frames(example_jump().a_minus_loop, "unstable").w1 == 1
