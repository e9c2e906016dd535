import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from johncheck.calculus import (
    FDConfig,
    cross_partial_matrix,
    jacobian_wrt_x,
    jacobian_wrt_y,
    segment_line_integral,
    symmetric_eigenvalues,
)
from johncheck.core import (
    DomainError,
    InvalidArgument,
    LinearRule,
    QuadraticFamily,
    TypeProfile,
    builtin_potential_1,
)

RANK_ONE = np.array([[1.0, -1.0], [-1.0, 1.0]])


def builtin_jacobians(x, y):
    # analytic: T1 = a / (a + b), a = x1 - x2, b = y2 - y1
    a, b = x[0] - x[1], y[1] - y[0]
    D = a + b
    return b / D**2 * RANK_ONE, a / D**2 * RANK_ONE


def test_fdconfig_bounds():
    with pytest.raises(InvalidArgument):
        FDConfig(step_scale=0.0)
    with pytest.raises(InvalidArgument):
        FDConfig(step_scale=0.1)
    with pytest.raises(InvalidArgument):
        FDConfig(scheme="forward")


def test_jacobian_linear_exact(rng):
    A, B = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    rule = LinearRule(A, B)
    p = TypeProfile(rng.normal(size=3), rng.normal(size=3))
    np.testing.assert_allclose(jacobian_wrt_x(rule, p), A, atol=1e-9)
    np.testing.assert_allclose(jacobian_wrt_y(rule, p), B, atol=1e-9)


def test_jacobian_builtin_reference(builtin, ref_point):
    np.testing.assert_allclose(jacobian_wrt_x(builtin, ref_point), 3 / 16 * RANK_ONE, atol=1e-6)
    np.testing.assert_allclose(jacobian_wrt_y(builtin, ref_point), 1 / 16 * RANK_ONE, atol=1e-6)


def test_jacobian_constant_and_y_free():
    p = TypeProfile([0.3, 0.1], [2.0, -1.0])
    const = lambda x, y: np.array([1.0, 2.0])
    assert not jacobian_wrt_x(const, p).any()
    assert not jacobian_wrt_y(const, p).any()
    x_only = lambda x, y: np.array([x[0] ** 2, x[0] * x[1]])
    assert not jacobian_wrt_y(x_only, p).any()


def test_jacobian_domain_exit(builtin):
    with pytest.raises(DomainError):
        jacobian_wrt_x(builtin, TypeProfile([1.0 + 1e-7, 1.0], [0.0, 1.0]))


def test_jacobian_builtin_random_points(builtin, rng):
    for _ in range(50):
        x2, y1 = rng.uniform(0, 1.4, size=2)
        x = np.array([x2 + rng.uniform(0.1, 2), x2])
        y = np.array([y1, y1 + rng.uniform(0.1, 2)])
        Jx, Jy = builtin_jacobians(x, y)
        p = TypeProfile(x, y)
        np.testing.assert_allclose(jacobian_wrt_x(builtin, p), Jx, atol=1e-7)
        np.testing.assert_allclose(jacobian_wrt_y(builtin, p), Jy, atol=1e-7)


def test_quadratic_family_jacobian_relative_accuracy(rng):
    cfg = FDConfig()
    for _ in range(20):
        L = rng.normal(size=(3, 3))
        A = L @ L.T
        rule = QuadraticFamily(A, rng.normal(size=3))
        p = TypeProfile(rng.uniform(-3, 3, 3), rng.uniform(-3, 3, 3))
        for J, exact in ((jacobian_wrt_x(rule, p), 0.5 * A), (jacobian_wrt_y(rule, p), 0.5 * A)):
            rel = np.linalg.norm(J - exact) / np.linalg.norm(exact)
            assert rel <= 10 * cfg.step_scale**2


@pytest.mark.parametrize(
    "M, expected",
    [
        (RANK_ONE, [0.0, 2.0]),
        (RANK_ONE / 16, [0.0, 0.125]),
        (np.eye(3), [1.0, 1.0, 1.0]),
    ],
)
def test_eigenvalues_examples(M, expected):
    np.testing.assert_allclose(symmetric_eigenvalues(M), expected, atol=1e-14)


def test_eigenvalues_use_symmetric_part():
    # [[0,1],[-1,0]] has zero symmetric part
    np.testing.assert_allclose(symmetric_eigenvalues([[0, 1], [-1, 0]]), [0, 0])


def test_eigenvalues_rejects_non_square():
    with pytest.raises(InvalidArgument):
        symmetric_eigenvalues(np.zeros((2, 3)))


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 16, 32])
def test_eigenvalues_match_lapack(n, rng):
    M = rng.normal(size=(n, n))
    S = 0.5 * (M + M.T)
    got = symmetric_eigenvalues(M)
    np.testing.assert_allclose(got, np.linalg.eigvalsh(S), atol=1e-12 * max(1.0, np.linalg.norm(S)))


@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(1e-6, 1e6))
def test_eigenvalues_trace(n, seed, scale):
    M = scale * np.random.default_rng(seed).normal(size=(n, n))
    ev = symmetric_eigenvalues(M)
    assert np.all(np.diff(ev) >= 0)
    assert ev.sum() == pytest.approx(np.trace(M), abs=1e-10 * np.linalg.norm(M))


def test_eigenvalues_graded_matrix():
    M = np.diag([1e-200, 1.0, 1e200])
    M[0, 1] = M[1, 0] = 1e-210
    ev = symmetric_eigenvalues(M)
    assert ev[-1] == 1e200 and np.all(np.isfinite(ev))


def test_line_integral_builtin(builtin):
    # V1(2,1;0,3) - V1(1,1;0,3) = (2 - 3 ln 4) - (1 - 3 ln 3)
    a = TypeProfile([1.0, 1.0], [0.0, 3.0])
    b = TypeProfile([2.0, 1.0], [0.0, 3.0])
    expected = builtin_potential_1(b.x, b.y) - builtin_potential_1(a.x, a.y)
    assert expected == pytest.approx(1 - 3 * math.log(4 / 3), abs=1e-15)
    assert segment_line_integral(builtin, a, b, "x") == pytest.approx(expected, abs=1e-10)


def test_line_integral_zero_length(builtin, ref_point):
    assert segment_line_integral(builtin, ref_point, ref_point, "x") == 0.0


def test_line_integral_identity_map(rng):
    rule = LinearRule(np.eye(3), np.zeros((3, 3)))
    x0 = rng.normal(size=3)
    y = rng.normal(size=3)
    val = segment_line_integral(rule, TypeProfile(np.zeros(3), y), TypeProfile(x0, y), "x")
    assert val == pytest.approx(0.5 * x0 @ x0, rel=1e-14)


def test_line_integral_argument_checks(builtin, ref_point):
    other = TypeProfile([2.0, 1.0], [0.0, 2.0])
    with pytest.raises(InvalidArgument):
        segment_line_integral(builtin, ref_point, other, "x")
    with pytest.raises(InvalidArgument):
        segment_line_integral(builtin, ref_point, ref_point, "z")


def test_line_integral_domain_exit(builtin):
    a = TypeProfile([2.0, 1.0], [0.0, 3.0])
    b = TypeProfile([0.0, 1.0], [0.0, 3.0])
    with pytest.raises(DomainError):
        segment_line_integral(builtin, a, b, "x")


@given(st.floats(0.05, 0.95))
def test_line_integral_additive(t):
    rule = QuadraticFamily(np.array([[2.0, 0.5], [0.5, 1.0]]), np.array([0.1, -0.3]))
    y = np.array([0.4, -1.2])
    x0, x1 = np.array([-1.0, 0.5]), np.array([2.0, 1.5])
    xm = x0 + t * (x1 - x0)
    P = lambda x: TypeProfile(x, y)
    whole = segment_line_integral(rule, P(x0), P(x1), "x")
    parts = segment_line_integral(rule, P(x0), P(xm), "x") + segment_line_integral(rule, P(xm), P(x1), "x")
    assert whole == pytest.approx(parts, abs=1e-12)


def test_cross_partials_builtin(ref_point):
    C = cross_partial_matrix(builtin_potential_1, ref_point)
    np.testing.assert_allclose(C, RANK_ONE / 16, atol=1e-5)


def test_cross_partials_separable_and_bilinear(rng):
    p = TypeProfile(rng.normal(size=3), rng.normal(size=3))
    separable = lambda x, y: float(np.sum(np.sin(x)) + y @ y)
    np.testing.assert_allclose(cross_partial_matrix(separable, p), 0, atol=1e-8)
    np.testing.assert_allclose(cross_partial_matrix(lambda x, y: float(x @ y), p), np.eye(3), atol=1e-8)


def test_cross_partials_match_jacobian_wrt_y(builtin, rng):
    for _ in range(20):
        x2, y1 = rng.uniform(0, 1.4, size=2)
        p = TypeProfile([x2 + rng.uniform(0.1, 2), x2], [y1, y1 + rng.uniform(0.1, 2)])
        np.testing.assert_allclose(
            cross_partial_matrix(builtin_potential_1, p), jacobian_wrt_y(builtin, p), atol=1e-5
        )
