"""Domain types, allocation rules and the builtin catalog.

Types are reported as pairs ``(x, y)`` of real vectors of a common dimension
``d``. Outcomes also live in R^d and agents have bilinear utility ``x.z - pay``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

# minimum admissible denominator x1 - x2 + y2 - y1 for the builtin rule
BUILTIN_MIN_DENOM = 1e-9


class JohnCheckError(Exception):
    """Base class for errors raised by this package."""


class DomainError(JohnCheckError):
    """A type profile lies outside the domain of a rule."""


class DimensionMismatch(JohnCheckError, ValueError):
    pass


class InvalidArgument(JohnCheckError, ValueError):
    pass


def as_vector(v, d: int | None = None, name: str = "vector") -> np.ndarray:
    arr = np.array(v, dtype=float).reshape(-1) if np.ndim(v) else np.array([v], dtype=float)
    if arr.size == 0:
        raise DimensionMismatch(f"{name} is empty")
    if d is not None and arr.size != d:
        raise DimensionMismatch(f"{name} has length {arr.size}, expected {d}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TypeProfile:
    """Reported types of agent 1 (``x``) and agent 2 (``y``)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = as_vector(self.x, name="x")
        y = as_vector(self.y, d=x.size, name="y")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def d(self) -> int:
        return self.x.size

    def __eq__(self, other):
        if not isinstance(other, TypeProfile):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    def __repr__(self):
        return f"TypeProfile(x={self.x.tolist()}, y={self.y.tolist()})"


@dataclass(frozen=True, eq=False)
class Outcome:
    z: np.ndarray
    cost: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "z", as_vector(self.z, name="z"))
        if not math.isfinite(self.cost):
            raise InvalidArgument("outcome cost must be finite")
        object.__setattr__(self, "cost", float(self.cost))


@dataclass(frozen=True, eq=False)
class Menu:
    """Finite set of outcomes with costs.

    Encodes the max-affine convex function ``phi(w) = max_k (w.z_k - cost_k)``;
    the costs are the values of its conjugate at the menu points.
    """

    outcomes: tuple[Outcome, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))

    @classmethod
    def from_arrays(cls, z, costs=None) -> "Menu":
        z = np.atleast_2d(np.asarray(z, dtype=float))
        costs = np.zeros(len(z)) if costs is None else np.asarray(costs, dtype=float)
        return cls(tuple(Outcome(zi, ci) for zi, ci in zip(z, costs)))

    @property
    def d(self) -> int:
        return self.outcomes[0].z.size if self.outcomes else 0

    @property
    def points(self) -> np.ndarray:
        """Outcomes stacked as an ``(n, d)`` array."""
        return np.array([o.z for o in self.outcomes])

    @property
    def costs(self) -> np.ndarray:
        return np.array([o.cost for o in self.outcomes])

    def phi(self, w) -> float:
        return float(np.max(self.points @ np.asarray(w, dtype=float) - self.costs))

    def __len__(self):
        return len(self.outcomes)


@dataclass(frozen=True)
class UniformOn01:
    """Lebesgue measure on [0, 1]."""

    def mean(self) -> float:
        return 0.5


@dataclass(frozen=True)
class DiscreteAtoms:
    """Finitely supported measure: ``atoms`` is a sequence of (lambda, weight)."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "atoms", tuple((float(lam), float(w)) for lam, w in self.atoms)
        )

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([lam for lam, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    def mean(self) -> float:
        return float(np.dot(self.lambdas, self.weights))


LambdaMeasure = Union[UniformOn01, DiscreteAtoms]


@dataclass(frozen=True)
class BuiltinTwoGoodAssignment:
    """Two goods split between two players.

    ``T = ((x1-x2)/D, (y2-y1)/D)`` with ``D = x1 - x2 + y2 - y1``, defined for
    ``x1 > x2`` and ``y1 < y2``. Component 1 is the probability of the direct
    assignment, component 2 that of the reverse one.
    """

    d: int = field(default=2, init=False)


@dataclass(frozen=True, eq=False)
class FiniteMenuMixture:
    """``T = integral of T_lambda d mu(lambda)`` for one menu shared by all lambda."""

    menu: Menu
    measure: LambdaMeasure = field(default_factory=UniformOn01)

    @property
    def d(self) -> int:
        return self.menu.d


@dataclass(frozen=True, eq=False)
class QuadraticFamily:
    """Mixture of ``phi(w) = 0.5 w'Aw + b'w`` (same for every lambda).

    Smooth test family: ``T = A (m x + (1-m) y) + b`` with ``m`` the mean of
    the lambda measure.
    """

    A: np.ndarray
    b: np.ndarray
    measure: LambdaMeasure = field(default_factory=UniformOn01)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(-1))

    @property
    def d(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class LinearRule:
    """``T(x, y) = Mx x + My y``; used to build counterexamples."""

    Mx: np.ndarray
    My: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Mx", np.atleast_2d(np.asarray(self.Mx, dtype=float)))
        object.__setattr__(self, "My", np.atleast_2d(np.asarray(self.My, dtype=float)))

    @property
    def d(self) -> int:
        return self.Mx.shape[0]


RuleSpec = Union[BuiltinTwoGoodAssignment, FiniteMenuMixture, QuadraticFamily, LinearRule]
RULE_TYPES = (BuiltinTwoGoodAssignment, FiniteMenuMixture, QuadraticFamily, LinearRule)

# rule callables take raw arrays (x, y) and return T(x, y)
RuleFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _builtin_denominator(x, y, strict: bool = True) -> float:
    if strict and not (x[0] > x[1] and y[0] < y[1]):
        raise DomainError(
            f"two_good_assignment requires x1 > x2 and y1 < y2, got x={list(x)}, y={list(y)}"
        )
    denom = (x[0] - x[1]) + (y[1] - y[0])
    if denom < BUILTIN_MIN_DENOM:
        raise DomainError(f"two_good_assignment denominator {denom} below guard")
    return denom


def builtin_allocation(x, y) -> np.ndarray:
    denom = _builtin_denominator(x, y)
    return np.array([(x[0] - x[1]) / denom, (y[1] - y[0]) / denom])


def builtin_potential_1(x, y) -> float:
    """Indirect utility of agent 1: ``x1 - (y2 - y1) log D``.

    Defined wherever ``D > 0``, including the boundary ``x1 = x2``.
    """
    denom = _builtin_denominator(x, y, strict=False)
    return float(x[0] - (y[1] - y[0]) * math.log(denom))


def builtin_potential_2(x, y) -> float:
    """Indirect utility of agent 2: ``y2 - (x1 - x2) log D``."""
    denom = _builtin_denominator(x, y, strict=False)
    return float(y[1] - (x[0] - x[1]) * math.log(denom))


def _check_dims(spec, p: TypeProfile):
    if p.d != spec.d:
        raise DimensionMismatch(f"profile has d={p.d}, rule has d={spec.d}")


def elementary_values(menu: Menu, lam: float, p: TypeProfile) -> np.ndarray:
    """Weighted welfare ``(lam x + (1-lam) y).z - cost`` of every outcome."""
    if menu.d != p.d:
        raise DimensionMismatch(f"profile has d={p.d}, menu has d={menu.d}")
    w = lam * p.x + (1.0 - lam) * p.y
    return menu.points @ w - menu.costs


def evaluate_elementary(menu: Menu, lam: float, p: TypeProfile) -> np.ndarray:
    """Affine welfare maximizer with agent weights ``lam`` and ``1 - lam``.

    Ties go to the lowest outcome index.
    """
    if not 0.0 <= lam <= 1.0:
        raise InvalidArgument(f"lambda must lie in [0, 1], got {lam}")
    k = int(np.argmax(elementary_values(menu, lam, p)))
    return menu.points[k].copy()


def evaluate_elementary_batch(menu: Menu, lambdas, p: TypeProfile) -> np.ndarray:
    """Elementary rule at many lambdas at once; returns an ``(m, d)`` array."""
    if menu.d != p.d:
        raise DimensionMismatch(f"profile has d={p.d}, menu has d={menu.d}")
    lambdas = np.asarray(lambdas, dtype=float)
    w = lambdas[:, None] * p.x + (1.0 - lambdas)[:, None] * p.y
    winners = np.argmax(w @ menu.points.T - menu.costs, axis=1)
    return menu.points[winners]


def evaluate_rule(spec: RuleSpec, p: TypeProfile) -> np.ndarray:
    """Allocation ``T(x, y)`` selected by ``spec`` at the profile ``p``."""
    _check_dims(spec, p)
    if isinstance(spec, BuiltinTwoGoodAssignment):
        return builtin_allocation(p.x, p.y)
    if isinstance(spec, FiniteMenuMixture):
        from johncheck import envelope

        if isinstance(spec.measure, UniformOn01):
            return envelope.integrate_uniform_mixture(spec.menu, p)
        return envelope.integrate_discrete_mixture(spec.menu, spec.measure, p)
    if isinstance(spec, QuadraticFamily):
        m = spec.measure.mean()
        return spec.A @ (m * p.x + (1.0 - m) * p.y) + spec.b
    if isinstance(spec, LinearRule):
        return spec.Mx @ p.x + spec.My @ p.y
    raise TypeError(f"not a rule spec: {spec!r}")


def rule_function(rule) -> RuleFunction:
    """Turn a RuleSpec, or any callable ``f(x, y)``, into ``f(x, y) -> ndarray``."""
    if isinstance(rule, RULE_TYPES):
        if isinstance(rule, BuiltinTwoGoodAssignment):
            return builtin_allocation
        return lambda x, y: evaluate_rule(rule, TypeProfile(x, y))
    if callable(rule):
        return lambda x, y: np.asarray(rule(x, y), dtype=float)
    raise TypeError(f"cannot evaluate {rule!r} as an allocation rule")


def closed_form_potentials(spec) -> tuple[Callable, Callable] | None:
    """Potentials ``(V1, V2)`` with ``T = grad_x V1 = grad_y V2``, when known in closed form.

    For the builtin these are the indirect utilities of the two agents. For
    the linear and quadratic families they are the straight-line
    reconstructions from the origin; for a linear rule with non-symmetric
    ``Mx`` or ``My`` they are not true potentials, but their mixed partials
    still expose the defect.
    """
    if isinstance(spec, BuiltinTwoGoodAssignment):
        return builtin_potential_1, builtin_potential_2
    if isinstance(spec, LinearRule):
        Mx, My = spec.Mx, spec.My
        return (
            lambda x, y: float(0.5 * x @ Mx @ x + x @ My @ y),
            lambda x, y: float(0.5 * y @ My @ y + y @ Mx @ x),
        )
    if isinstance(spec, QuadraticFamily):
        A, b, m = spec.A, spec.b, spec.measure.mean()
        return (
            lambda x, y: float(0.5 * m * x @ A @ x + (1 - m) * x @ A @ y + b @ x),
            lambda x, y: float(0.5 * (1 - m) * y @ A @ y + m * y @ A @ x + b @ y),
        )
    return None


def builtin_catalog() -> list[tuple[str, RuleSpec]]:
    return [
        ("two_good_assignment", BuiltinTwoGoodAssignment()),
        ("rotation_counterexample", LinearRule([[0.0, 1.0], [-1.0, 0.0]], np.zeros((2, 2)))),
        ("negdef_counterexample", LinearRule(-np.eye(2), -np.eye(2))),
    ]


def catalog_entry(name: str) -> RuleSpec:
    for entry_name, spec in builtin_catalog():
        if entry_name == name:
            return spec
    raise KeyError(name)


def example_menu() -> Menu:
    """Zero-cost menu {direct=(1,0), reverse=(0,1)}, i.e. ``phi(w) = max(w1, w2)``."""
    return Menu.from_arrays([[1.0, 0.0], [0.0, 1.0]])


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def _validate_measure(measure, out: list[str]):
    if isinstance(measure, UniformOn01):
        return
    if not isinstance(measure, DiscreteAtoms):
        out.append(f"unknown lambda measure {measure!r}")
        return
    if not measure.atoms:
        out.append("no lambda atoms")
        return
    lams, weights = measure.lambdas, measure.weights
    if not (np.all(np.isfinite(lams)) and np.all(np.isfinite(weights))):
        out.append("non-finite lambda atom")
        return
    for lam in lams:
        if not 0.0 <= lam <= 1.0:
            out.append(f"lambda {lam:g} outside [0, 1]")
    for w in weights:
        if w <= 0:
            out.append(f"weight {w:g} not positive")
    if len(set(lams.tolist())) != len(lams):
        out.append("duplicate lambda atoms")
    total = math.fsum(weights)
    if abs(total - 1.0) > 1e-12:
        out.append(f"weights sum {total:g} ≠ 1")


def _validate_square(M, d, name, out):
    if M.shape != (d, d):
        out.append(f"{name} has shape {M.shape}, expected ({d}, {d})")
        return False
    if not np.all(np.isfinite(M)):
        out.append(f"{name} has non-finite entries")
        return False
    return True


def validate_spec(spec) -> ValidationReport:
    """Check the invariants of a rule spec; violations are returned, not raised."""
    out: list[str] = []
    if isinstance(spec, BuiltinTwoGoodAssignment):
        pass
    elif isinstance(spec, FiniteMenuMixture):
        outcomes = spec.menu.outcomes
        if not outcomes:
            out.append("empty menu")
        else:
            d = outcomes[0].z.size
            seen = set()
            for k, o in enumerate(outcomes):
                if o.z.size != d:
                    out.append(f"outcome {k} has dimension {o.z.size}, expected {d}")
                    continue
                key = (tuple(o.z.tolist()), o.cost)
                if key in seen:
                    out.append(f"outcome {k} duplicates an earlier outcome")
                seen.add(key)
        _validate_measure(spec.measure, out)
    elif isinstance(spec, QuadraticFamily):
        d = spec.A.shape[0]
        if _validate_square(spec.A, d, "A", out):
            if not np.allclose(spec.A, spec.A.T, rtol=0, atol=1e-12):
                out.append("A not symmetric")
            else:
                lo = float(np.linalg.eigvalsh(spec.A)[0])
                if lo < -1e-12:
                    out.append(f"A not PSD (min eig {lo:g})")
        if spec.b.size != d:
            out.append(f"b has length {spec.b.size}, expected {d}")
        elif not np.all(np.isfinite(spec.b)):
            out.append("b has non-finite entries")
        _validate_measure(spec.measure, out)
    elif isinstance(spec, LinearRule):
        d = spec.Mx.shape[0]
        _validate_square(spec.Mx, d, "Mx", out)
        _validate_square(spec.My, d, "My", out)
    else:
        out.append(f"not a rule spec: {type(spec).__name__}")
    return ValidationReport(out)
