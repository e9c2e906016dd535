import numpy as np
import pytest
from hypothesis import given, strategies as st

from johncheck.core import (
    BuiltinTwoGoodAssignment,
    DimensionMismatch,
    DiscreteAtoms,
    DomainError,
    FiniteMenuMixture,
    LinearRule,
    Menu,
    Outcome,
    QuadraticFamily,
    TypeProfile,
    builtin_catalog,
    builtin_potential_1,
    builtin_potential_2,
    catalog_entry,
    evaluate_elementary,
    evaluate_elementary_batch,
    evaluate_rule,
    example_menu,
    validate_spec,
)

coord = st.floats(-5, 5, allow_nan=False)
gap = st.floats(0.01, 5)


def test_builtin_reference_point(builtin, ref_point):
    np.testing.assert_allclose(evaluate_rule(builtin, ref_point), [0.25, 0.75], rtol=0, atol=1e-15)


def test_builtin_symmetric_gaps(builtin):
    np.testing.assert_allclose(evaluate_rule(builtin, TypeProfile([2, 1], [0, 1])), [0.5, 0.5])


def test_linear_identity():
    rule = LinearRule(np.eye(2), np.zeros((2, 2)))
    assert evaluate_rule(rule, TypeProfile([3, -4], [7, 7])).tolist() == [3, -4]


@pytest.mark.parametrize("x, y", [([1, 2], [0, 3]), ([2, 1], [3, 0]), ([1, 1], [0, 1]), ([2, 1], [0, 0])])
def test_builtin_domain_guard(builtin, x, y):
    with pytest.raises(DomainError):
        evaluate_rule(builtin, TypeProfile(x, y))


def test_builtin_tiny_denominator(builtin):
    with pytest.raises(DomainError):
        evaluate_rule(builtin, TypeProfile([1 + 1e-10, 1], [0, 1e-10]))


def test_dimension_mismatch(builtin):
    with pytest.raises(DimensionMismatch):
        evaluate_rule(builtin, TypeProfile([1, 0, 0], [0, 1, 0]))
    with pytest.raises(DimensionMismatch):
        TypeProfile([1, 0], [0, 1, 2])


@pytest.mark.parametrize(
    "lam, x, y, expected",
    [
        (0.5, [2, 1], [0, 3], [0, 1]),  # w = (1, 2)
        (1.0, [2, 1], [0, 3], [1, 0]),  # w = x
        (0.75, [2, 1], [0, 3], [1, 0]),  # exact tie w = (1.5, 1.5): lowest index
    ],
)
def test_elementary_examples(lam, x, y, expected):
    assert evaluate_elementary(example_menu(), lam, TypeProfile(x, y)).tolist() == expected


def test_catalog_entries():
    names = dict(builtin_catalog())
    assert {"two_good_assignment", "rotation_counterexample", "negdef_counterexample"} <= names.keys()
    assert names["two_good_assignment"].d == 2
    rot = evaluate_rule(names["rotation_counterexample"], TypeProfile([1, 0], [5, 5]))
    assert rot.tolist() == [0, -1]
    neg = evaluate_rule(names["negdef_counterexample"], TypeProfile([1, 1], [1, 1]))
    assert neg.tolist() == [-2, -2]
    with pytest.raises(KeyError):
        catalog_entry("nope")


def test_validate_weights():
    menu = example_menu()
    ok = FiniteMenuMixture(menu, DiscreteAtoms(((0.2, 0.5), (0.8, 0.5))))
    assert validate_spec(ok).ok
    bad = FiniteMenuMixture(menu, DiscreteAtoms(((0.2, 0.5), (0.8, 0.4))))
    report = validate_spec(bad)
    assert not report.ok
    assert report.violations == ["weights sum 0.9 ≠ 1"]


def test_validate_not_psd():
    # eigenvalues of [[1,2],[2,1]] are 3 and -1
    report = validate_spec(QuadraticFamily([[1, 2], [2, 1]], [0, 0]))
    assert report.violations == ["A not PSD (min eig -1)"]


@pytest.mark.parametrize(
    "spec, fragment",
    [
        (FiniteMenuMixture(Menu(())), "empty menu"),
        (FiniteMenuMixture(Menu((Outcome([1, 0]), Outcome([1, 0])))), "duplicates"),
        (FiniteMenuMixture(example_menu(), DiscreteAtoms(((1.5, 1.0),))), "outside [0, 1]"),
        (FiniteMenuMixture(example_menu(), DiscreteAtoms(((0.5, 0.5), (0.5, 0.5)))), "duplicate lambda"),
        (FiniteMenuMixture(example_menu(), DiscreteAtoms(((0.5, 1.5), (0.2, -0.5)))), "not positive"),
        (QuadraticFamily([[1, 1], [0, 1]], [0, 0]), "not symmetric"),
        (QuadraticFamily(np.eye(2), [0, 0, 0]), "b has length"),
        (LinearRule(np.eye(2), np.eye(3)), "My has shape"),
    ],
)
def test_validate_violations(spec, fragment):
    report = validate_spec(spec)
    assert any(fragment in v for v in report.violations), report.violations


def test_validate_accepts_builtin_and_catalog():
    for _, spec in builtin_catalog():
        assert validate_spec(spec).ok


def test_same_outcome_different_cost_is_allowed():
    menu = Menu((Outcome([1, 0], 0.0), Outcome([1, 0], 1.0)))
    assert validate_spec(FiniteMenuMixture(menu)).ok


def test_closed_form_potentials_at_reference(ref_point):
    assert builtin_potential_1(ref_point.x, ref_point.y) == pytest.approx(2 - 3 * np.log(4), abs=1e-14)
    assert builtin_potential_2(ref_point.x, ref_point.y) == pytest.approx(3 - np.log(4), abs=1e-14)


@given(coord, gap, coord, gap)
def test_builtin_on_simplex(x2, dx, y1, dy):
    T = evaluate_rule(BuiltinTwoGoodAssignment(), TypeProfile([x2 + dx, x2], [y1, y1 + dy]))
    assert T.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all((T > 0) & (T < 1))


@given(st.lists(coord, min_size=4, max_size=4), st.floats(0, 1), st.floats(0.01, 100))
def test_elementary_scale_invariant(v, lam, c):
    menu = Menu.from_arrays([[1, 0], [0, 1], [0.5, 0.5], [2, -1]])
    p = TypeProfile(v[:2], v[2:])
    scaled = TypeProfile(c * p.x, c * p.y)
    values = menu.points @ (lam * p.x + (1 - lam) * p.y)
    top = np.sort(values)
    # skip near-ties, where rounding in the scaled problem may flip the argmax
    if len(top) > 1 and top[-1] - top[-2] < 1e-9 * max(1.0, abs(top[-1])):
        return
    np.testing.assert_array_equal(evaluate_elementary(menu, lam, p), evaluate_elementary(menu, lam, scaled))


@given(st.lists(coord, min_size=6, max_size=6))
def test_elementary_extreme_weights(v):
    menu = Menu.from_arrays([[1, 0], [0, 1], [0.3, 0.3]], [0.0, 0.1, -0.2])
    x, y, other = v[:2], v[2:4], v[4:]
    a = evaluate_elementary(menu, 1.0, TypeProfile(x, y))
    b = evaluate_elementary(menu, 1.0, TypeProfile(x, other))
    np.testing.assert_array_equal(a, b)
    a = evaluate_elementary(menu, 0.0, TypeProfile(x, y))
    b = evaluate_elementary(menu, 0.0, TypeProfile(other, y))
    np.testing.assert_array_equal(a, b)


@given(st.lists(coord, min_size=4, max_size=4), st.floats(0, 1))
def test_single_atom_mixture_matches_elementary(v, lam):
    menu = example_menu()
    p = TypeProfile(v[:2], v[2:])
    spec = FiniteMenuMixture(menu, DiscreteAtoms(((lam, 1.0),)))
    np.testing.assert_array_equal(evaluate_rule(spec, p), evaluate_elementary(menu, lam, p))


def test_batch_matches_scalar(rng):
    menu = Menu.from_arrays(rng.normal(size=(6, 3)), rng.normal(size=6))
    p = TypeProfile(rng.normal(size=3), rng.normal(size=3))
    lams = rng.uniform(size=200)
    batch = evaluate_elementary_batch(menu, lams, p)
    for lam, row in zip(lams, batch):
        np.testing.assert_array_equal(row, evaluate_elementary(menu, lam, p))


def test_quadratic_family_closed_form():
    A = np.array([[2.0, 1.0], [1.0, 2.0]])
    b = np.array([0.5, -1.0])
    p = TypeProfile([1.0, 2.0], [-1.0, 0.5])
    uniform = QuadraticFamily(A, b)
    np.testing.assert_allclose(evaluate_rule(uniform, p), A @ (0.5 * p.x + 0.5 * p.y) + b)
    atoms = QuadraticFamily(A, b, DiscreteAtoms(((0.2, 0.25), (1.0, 0.75))))
    m = 0.2 * 0.25 + 0.75
    np.testing.assert_allclose(evaluate_rule(atoms, p), A @ (m * p.x + (1 - m) * p.y) + b)
