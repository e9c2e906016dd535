"""Finite differences, a Jacobi eigensolver and Gauss-Legendre line integrals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from johncheck.core import InvalidArgument, TypeProfile, rule_function

GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class FDConfig:
    """Central-difference steps, relative to ``max(1, |coordinate|)``.

    ``mixed_step_scale`` is used for second differences of potentials, whose
    roundoff grows like ``eps / h**2`` rather than ``eps / h``.
    """

    step_scale: float = 1e-5
    mixed_step_scale: float = 1e-4
    scheme: str = "central"

    def __post_init__(self):
        for name in ("step_scale", "mixed_step_scale"):
            h = getattr(self, name)
            if not 0 < h <= 1e-2:
                raise InvalidArgument(f"{name} must lie in (0, 1e-2], got {h}")
        if self.scheme != "central":
            raise InvalidArgument(f"only the central scheme is supported, got {self.scheme!r}")

    def steps(self, v: np.ndarray, mixed: bool = False) -> np.ndarray:
        scale = self.mixed_step_scale if mixed else self.step_scale
        return scale * np.maximum(1.0, np.abs(v))


DEFAULT_FD = FDConfig()


def _jacobian(f, center: np.ndarray, other: np.ndarray, cfg: FDConfig, wrt_x: bool) -> np.ndarray:
    d = center.size
    steps = cfg.steps(center)
    J = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = steps[j]
        if wrt_x:
            fp, fm = f(center + e, other), f(center - e, other)
        else:
            fp, fm = f(other, center + e), f(other, center - e)
        J[:, j] = (np.asarray(fp) - np.asarray(fm)) / (2 * steps[j])
    return J


def jacobian_wrt_x(rule, p: TypeProfile, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``J[i, j] ~ dT^i / dx_j`` by central differences."""
    return _jacobian(rule_function(rule), p.x, p.y, cfg, wrt_x=True)


def jacobian_wrt_y(rule, p: TypeProfile, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``J[i, j] ~ dT^i / dy_j`` by central differences."""
    return _jacobian(rule_function(rule), p.y, p.x, cfg, wrt_x=False)


def symmetric_eigenvalues(M, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of ``(M + M.T) / 2`` in ascending order, by cyclic Jacobi.

    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``tol * ||M||_F``.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {A.shape}")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    scale = float(np.abs(A).max()) if A.size else 0.0
    if scale == 0.0:
        return np.zeros(n)
    A /= scale  # keeps squared entries representable
    target = tol * np.linalg.norm(A)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                h = A[q, q] - A[p, p]
                if abs(h) > 1e100 * abs(apq):
                    t = apq / h  # theta**2 would overflow
                else:
                    theta = h / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                # rotate rows and columns p, q
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
    return np.sort(np.diag(A)) * scale


def segment_line_integral(
    rule, p_from: TypeProfile, p_to: TypeProfile, vary: str = "x", n_panels: int = 64
) -> float:
    """Work of T along the straight segment from ``p_from`` to ``p_to``.

    Only the ``vary`` coordinate moves; the other one must coincide in both
    profiles. Uses composite 5-point Gauss-Legendre on ``n_panels`` panels.
    """
    if vary not in ("x", "y"):
        raise InvalidArgument(f"vary must be 'x' or 'y', got {vary!r}")
    if n_panels < 1:
        raise InvalidArgument("n_panels must be positive")
    fixed = "y" if vary == "x" else "x"
    if not np.array_equal(getattr(p_from, fixed), getattr(p_to, fixed)):
        raise InvalidArgument(f"{fixed} must be equal at both ends of the segment")
    start, end = getattr(p_from, vary), getattr(p_to, vary)
    delta = end - start
    if not np.any(delta):
        return 0.0
    f = rule_function(rule)
    other = getattr(p_from, fixed)
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    terms = []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        for node, weight in zip(GAUSS_NODES, GAUSS_WEIGHTS):
            point = start + (a + half * (node + 1.0)) * delta
            T = f(point, other) if vary == "x" else f(other, point)
            terms.append(weight * half * float(delta @ T))
    return math.fsum(terms)


def cross_partial_matrix(potential, p: TypeProfile, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``C[i, j] ~ d^2 V / dx_i dy_j`` from the 4-point mixed-difference stencil."""
    hx, hy = cfg.steps(p.x, mixed=True), cfg.steps(p.y, mixed=True)
    d = p.d
    C = np.empty((d, d))
    for i in range(d):
        ex = np.zeros(d)
        ex[i] = hx[i]
        for j in range(d):
            ey = np.zeros(d)
            ey[j] = hy[j]
            C[i, j] = (
                potential(p.x + ex, p.y + ey)
                - potential(p.x + ex, p.y - ey)
                - potential(p.x - ex, p.y + ey)
                + potential(p.x - ex, p.y - ey)
            ) / (4 * hx[i] * hy[j])
    return C
