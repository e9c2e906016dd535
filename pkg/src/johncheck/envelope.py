"""Exact lambda-integration of elementary rules over a finite menu.

For a fixed profile, the welfare of outcome k at weight lambda is affine in
lambda::

    (lam x + (1 - lam) y).z_k - c_k = alpha_k + lam * beta_k

with ``alpha_k = y.z_k - c_k`` and ``beta_k = (x - y).z_k``. The elementary
rule picks the top line, so integrating over lambda reduces to measuring the
pieces of the upper envelope of these lines on [0, 1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from johncheck.core import (
    DimensionMismatch,
    DiscreteAtoms,
    Menu,
    TypeProfile,
    evaluate_elementary,
)

# envelope pieces shorter than this are absorbed by a neighbour
MIN_SEGMENT = 1e-14


class Line(NamedTuple):
    alpha: float  # intercept at lambda = 0
    beta: float  # slope in lambda
    outcome_index: int


@dataclass(frozen=True)
class EnvelopeSegment:
    lo: float
    hi: float
    winner: int

    @property
    def length(self) -> float:
        return self.hi - self.lo


def line_parameters(menu: Menu, p: TypeProfile) -> list[Line]:
    if menu.d != p.d:
        raise DimensionMismatch(f"profile has d={p.d}, menu has d={menu.d}")
    diff = p.x - p.y
    lines = []
    for k, o in enumerate(menu.outcomes):
        alpha = math.fsum([*(p.y * o.z), -o.cost])
        beta = math.fsum(diff * o.z)
        lines.append(Line(alpha, beta, k))
    return lines


def _crossing(a1, b1, a2, b2) -> Fraction:
    # lambda where line 2 (steeper) overtakes line 1
    return (a1 - a2) / (b2 - b1)


def upper_envelope(lines: Sequence[Line]) -> list[EnvelopeSegment]:
    """Partition [0, 1] by the line attaining the maximum.

    Lines are sorted by slope and swept once (convex hull trick), so the cost
    is O(n log n). Crossings are computed exactly on the float coefficients
    with rational arithmetic. Identical lines resolve to the lowest outcome
    index.
    """
    if not lines:
        raise ValueError("upper_envelope needs at least one line")

    # for each slope keep the highest intercept, lowest index on ties
    best: dict[Fraction, tuple[Fraction, int]] = {}
    for ln in lines:
        a, b = Fraction(ln.alpha), Fraction(ln.beta)
        cur = best.get(b)
        if cur is None or a > cur[0] or (a == cur[0] and ln.outcome_index < cur[1]):
            best[b] = (a, ln.outcome_index)

    hull: list[tuple[Fraction, Fraction, int]] = []
    for b in sorted(best):
        a, idx = best[b]
        while len(hull) >= 2:
            a1, b1, _ = hull[-2]
            a2, b2, _ = hull[-1]
            if _crossing(a1, b1, a, b) <= _crossing(a1, b1, a2, b2):
                hull.pop()
            else:
                break
        hull.append((a, b, idx))

    zero, one = Fraction(0), Fraction(1)
    pieces: list[tuple[Fraction, Fraction, int]] = []
    for i, (a, b, idx) in enumerate(hull):
        lo = zero if i == 0 else max(zero, _crossing(*hull[i - 1][:2], a, b))
        hi = one if i == len(hull) - 1 else min(one, _crossing(a, b, *hull[i + 1][:2]))
        if lo < hi:
            pieces.append((lo, hi, idx))

    segments: list[EnvelopeSegment] = []
    pending_lo = 0.0
    for lo, hi, idx in pieces:
        lo_f = pending_lo if not segments else float(lo)
        hi_f = float(hi)
        if hi_f - lo_f < MIN_SEGMENT:
            if segments:
                last = segments.pop()
                segments.append(EnvelopeSegment(last.lo, hi_f, last.winner))
            continue
        segments.append(EnvelopeSegment(lo_f, hi_f, idx))
    if not segments:
        # every piece was negligible; cannot happen for pieces covering [0, 1]
        segments.append(EnvelopeSegment(0.0, 1.0, pieces[0][2]))
    last = segments[-1]
    segments[-1] = EnvelopeSegment(last.lo, 1.0, last.winner)
    return segments


def integrate_uniform_mixture(menu: Menu, p: TypeProfile) -> np.ndarray:
    """``integral_0^1 T_lambda(x, y) d lambda``, exact up to rounding."""
    segments = upper_envelope(line_parameters(menu, p))
    Z = menu.points
    out = np.zeros(menu.d)
    for seg in segments:
        out += seg.length * Z[seg.winner]
    return out


def integrate_discrete_mixture(menu: Menu, atoms: DiscreteAtoms, p: TypeProfile) -> np.ndarray:
    out = np.zeros(menu.d)
    for lam, weight in atoms.atoms:
        out += weight * evaluate_elementary(menu, lam, p)
    return out
