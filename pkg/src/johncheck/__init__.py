"""Implementability checks for two-agent allocation rules and their mixtures of affine maximizers."""

__version__ = "0.1.0"

from johncheck.core import (  # noqa: E402
    BuiltinTwoGoodAssignment,
    DimensionMismatch,
    DiscreteAtoms,
    DomainError,
    FiniteMenuMixture,
    InvalidArgument,
    LinearRule,
    Menu,
    Outcome,
    QuadraticFamily,
    TypeProfile,
    UniformOn01,
    builtin_catalog,
    evaluate_elementary,
    evaluate_rule,
    example_menu,
    validate_spec,
)

__all__ = [
    "# noqa: E402",
    "BuiltinTwoGoodAssignment",
    "DimensionMismatch",
    "DiscreteAtoms",
    "DomainError",
    "FiniteMenuMixture",
    "InvalidArgument",
    "LinearRule",
    "Menu",
    "Outcome",
    "QuadraticFamily",
    "TypeProfile",
    "UniformOn01",
    "builtin_catalog",
    "evaluate_elementary",
    "evaluate_rule",
    "example_menu",
    "validate_spec",
]
