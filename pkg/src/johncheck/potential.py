"""Potentials, payments and rule comparison.

V1 is recovered from ``T = grad_x V1`` by integrating T along a segment in x
with y held fixed, anchored so that ``V1(anchor_x, y) = 0``. It is only
determined up to a function of y, which does not change agent 1's
incentives; the same holds for V2 with the roles swapped. Payments follow
from the taxation principle ``pi = x.T - V``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from johncheck.calculus import segment_line_integral
from johncheck.core import (
    BuiltinTwoGoodAssignment,
    InvalidArgument,
    TypeProfile,
    as_vector,
    closed_form_potentials,
    rule_function,
)

DEFAULT_PANELS = 64


def reconstruct_potential_1(rule, p: TypeProfile, anchor_x, n_panels: int = DEFAULT_PANELS) -> float:
    """``V1(x, y) - V1(anchor_x, y)`` along the straight segment in x."""
    start = TypeProfile(as_vector(anchor_x, p.d, "anchor_x"), p.y)
    return segment_line_integral(rule, start, p, vary="x", n_panels=n_panels)


def reconstruct_potential_2(rule, p: TypeProfile, anchor_y, n_panels: int = DEFAULT_PANELS) -> float:
    """``V2(x, y) - V2(x, anchor_y)`` along the straight segment in y."""
    start = TypeProfile(p.x, as_vector(anchor_y, p.d, "anchor_y"))
    return segment_line_integral(rule, start, p, vary="y", n_panels=n_panels)


def _staircase(rule, p: TypeProfile, anchor, vary: str, n_panels: int) -> float:
    # move one coordinate at a time from the anchor to the target
    anchor = as_vector(anchor, p.d)
    target = p.x if vary == "x" else p.y
    fixed = p.y if vary == "x" else p.x
    total = 0.0
    current = anchor.copy()
    for i in range(p.d):
        nxt = current.copy()
        nxt[i] = target[i]
        if vary == "x":
            a, b = TypeProfile(current, fixed), TypeProfile(nxt, fixed)
        else:
            a, b = TypeProfile(fixed, current), TypeProfile(fixed, nxt)
        total += segment_line_integral(rule, a, b, vary=vary, n_panels=n_panels)
        current = nxt
    return total


def reconstruct_potential_1_staircase(rule, p, anchor_x, n_panels: int = DEFAULT_PANELS) -> float:
    """Same quantity as :func:`reconstruct_potential_1`, along the axis-aligned path."""
    return _staircase(rule, p, anchor_x, "x", n_panels)


def reconstruct_potential_2_staircase(rule, p, anchor_y, n_panels: int = DEFAULT_PANELS) -> float:
    return _staircase(rule, p, anchor_y, "y", n_panels)


def path_independence_gap(rule, p: TypeProfile, anchor, agent: int = 1, n_panels: int = DEFAULT_PANELS) -> float:
    """|straight - staircase| reconstruction; near zero for gradient fields."""
    if agent == 1:
        a = reconstruct_potential_1(rule, p, anchor, n_panels)
        b = reconstruct_potential_1_staircase(rule, p, anchor, n_panels)
    else:
        a = reconstruct_potential_2(rule, p, anchor, n_panels)
        b = reconstruct_potential_2_staircase(rule, p, anchor, n_panels)
    return abs(a - b)


def potential_function(rule, agent: int, anchor, n_panels: int = DEFAULT_PANELS) -> Callable:
    """Reconstructed potential as a function ``V(x, y)`` with fixed anchor."""
    recon = reconstruct_potential_1 if agent == 1 else reconstruct_potential_2
    return lambda x, y: recon(rule, TypeProfile(x, y), anchor, n_panels)


@dataclass(frozen=True)
class PaymentQuote:
    point: TypeProfile
    allocation: np.ndarray
    v1: Optional[float] = None
    v2: Optional[float] = None
    pi1: Optional[float] = None
    pi2: Optional[float] = None
    anchored: bool = False

    def to_dict(self) -> dict:
        return {
            "x": self.point.x.tolist(),
            "y": self.point.y.tolist(),
            "T": self.allocation.tolist(),
            "v1": self.v1,
            "v2": self.v2,
            "pi1": self.pi1,
            "pi2": self.pi2,
            "anchored": self.anchored,
        }


def _resolve_potential(rule, agent: int, closed_form, anchor, n_panels):
    # returns (value function, anchored flag)
    if closed_form is not None:
        return closed_form, False
    if anchor is not None:
        return potential_function(rule, agent, anchor, n_panels), True
    known = closed_form_potentials(rule)
    if known is None:
        raise InvalidArgument(f"no closed-form potential for {type(rule).__name__}; pass an anchor")
    # only the builtin's potentials are the true indirect utilities
    return known[agent - 1], not isinstance(rule, BuiltinTwoGoodAssignment)


def payment_agent1(
    rule,
    p: TypeProfile,
    closed_form_v1: Callable | None = None,
    anchor_x=None,
    n_panels: int = DEFAULT_PANELS,
) -> PaymentQuote:
    """Agent 1 pays ``x.T(x, y) - V1(x, y)``.

    V1 comes from ``closed_form_v1`` if given, else from a reconstruction
    anchored at ``anchor_x``, else from the rule's known closed form.
    """
    V1, anchored = _resolve_potential(rule, 1, closed_form_v1, anchor_x, n_panels)
    T = rule_function(rule)(p.x, p.y)
    v1 = float(V1(p.x, p.y))
    return PaymentQuote(p, T, v1=v1, pi1=float(p.x @ T) - v1, anchored=anchored)


def payment_agent2(
    rule,
    p: TypeProfile,
    closed_form_v2: Callable | None = None,
    anchor_y=None,
    n_panels: int = DEFAULT_PANELS,
) -> PaymentQuote:
    V2, anchored = _resolve_potential(rule, 2, closed_form_v2, anchor_y, n_panels)
    T = rule_function(rule)(p.x, p.y)
    v2 = float(V2(p.x, p.y))
    return PaymentQuote(p, T, v2=v2, pi2=float(p.y @ T) - v2, anchored=anchored)


def quote_payments(rule, p: TypeProfile, anchor_x=None, anchor_y=None, n_panels: int = DEFAULT_PANELS) -> PaymentQuote:
    """Both agents' payments in one quote."""
    q1 = payment_agent1(rule, p, anchor_x=anchor_x, n_panels=n_panels)
    q2 = payment_agent2(rule, p, anchor_y=anchor_y, n_panels=n_panels)
    return PaymentQuote(
        p, q1.allocation, v1=q1.v1, v2=q2.v2, pi1=q1.pi1, pi2=q2.pi2,
        anchored=q1.anchored or q2.anchored,
    )


def compare_rules(rule_a, rule_b, points: Sequence[TypeProfile]):
    """Largest sup-norm gap between two rules over ``points``, and where it occurs."""
    fa, fb = rule_function(rule_a), rule_function(rule_b)
    worst, where = 0.0, None
    for p in points:
        gap = float(np.max(np.abs(fa(p.x, p.y) - fb(p.x, p.y))))
        if where is None or gap > worst:
            worst, where = gap, p
    return worst, where


def misreport_gain(rule, v1: Callable, p: TypeProfile, misreports: Sequence) -> float:
    """Best utility gain for agent 1 from reporting some ``x'`` instead of ``x``.

    Payments are ``pi1(x', y) = x'.T(x', y) - V1(x', y)``; a truthful
    mechanism gives a gain of at most zero.
    """
    f = rule_function(rule)
    T0 = f(p.x, p.y)
    truthful = float(p.x @ T0) - (float(p.x @ T0) - v1(p.x, p.y))
    best = -np.inf
    for xr in misreports:
        xr = np.asarray(xr, dtype=float)
        T = f(xr, p.y)
        pay = float(xr @ T) - v1(xr, p.y)
        best = max(best, float(p.x @ T) - pay - truthful)
    return best
