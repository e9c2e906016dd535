"""Implementability diagnostics over a sampled box of type profiles.

A smooth implementable rule has symmetric positive semidefinite Jacobians in
both ``x`` and ``y``, and its agent-1 potential has symmetric mixed partials.
These are necessary conditions only: a passing suite means no violation was
found at the sampled points, not that the rule is implementable.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from johncheck.calculus import (
    DEFAULT_FD,
    FDConfig,
    cross_partial_matrix,
    jacobian_wrt_x,
    jacobian_wrt_y,
    symmetric_eigenvalues,
)
from johncheck.core import (
    BuiltinTwoGoodAssignment,
    DomainError,
    InvalidArgument,
    JohnCheckError,
    TypeProfile,
    closed_form_potentials,
)

log = logging.getLogger(__name__)

PASS = "pass"
FAIL_SYMMETRY = "fail_symmetry"
FAIL_PSD = "fail_psd"
DOMAIN_ERROR = "domain_error"
VERDICTS = (PASS, FAIL_SYMMETRY, FAIL_PSD, DOMAIN_ERROR)

# box used for the builtin when none is given
BUILTIN_BOX = (((1.5, 3.0), (0.0, 1.4)), ((0.0, 1.4), (1.5, 3.0)))


class SamplingExhausted(JohnCheckError):
    pass


Bounds = tuple[tuple[float, float], ...]


def default_box(rule) -> tuple[Bounds, Bounds]:
    if isinstance(rule, BuiltinTwoGoodAssignment):
        return BUILTIN_BOX
    d = rule.d
    unit = tuple((-1.0, 1.0) for _ in range(d))
    return unit, unit


@dataclass(frozen=True)
class CheckConfig:
    box_x: Bounds
    box_y: Bounds
    n_samples: int = 200
    seed: int = 0
    fd: FDConfig = DEFAULT_FD
    tol_sym: float = 1e-6
    tol_psd: float = 1e-8
    margin: float = 0.1
    builtin_guard: bool = False
    percentile_verdict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "box_x", tuple((float(a), float(b)) for a, b in self.box_x))
        object.__setattr__(self, "box_y", tuple((float(a), float(b)) for a, b in self.box_y))
        if len(self.box_x) != len(self.box_y) or not self.box_x:
            raise InvalidArgument("box_x and box_y must have the same nonzero length")
        for lo, hi in self.box_x + self.box_y:
            if not lo < hi:
                raise InvalidArgument(f"box bound ({lo}, {hi}) is empty")
        if self.tol_sym <= 0 or self.tol_psd <= 0:
            raise InvalidArgument("tolerances must be positive")
        if self.n_samples < 0:
            raise InvalidArgument("n_samples must be non-negative")

    @classmethod
    def for_rule(cls, rule, box=None, **kwargs) -> "CheckConfig":
        box_x, box_y = box if box is not None else default_box(rule)
        kwargs.setdefault("builtin_guard", isinstance(rule, BuiltinTwoGoodAssignment))
        return cls(box_x=box_x, box_y=box_y, **kwargs)

    @property
    def d(self) -> int:
        return len(self.box_x)


def _guard_ok(x, y, margin) -> bool:
    return x[0] >= x[1] + margin and y[1] >= y[0] + margin


def sample_domain(cfg: CheckConfig) -> list[TypeProfile]:
    """Uniform draws from the box, reproducible from ``cfg.seed``.

    With ``builtin_guard`` set, draws within ``margin`` of the builtin's
    domain boundary are rejected and redrawn.
    """
    n = cfg.n_samples
    if n == 0:
        return []
    rng = np.random.default_rng(cfg.seed)
    lo = np.array([b[0] for b in cfg.box_x + cfg.box_y])
    hi = np.array([b[1] for b in cfg.box_x + cfg.box_y])
    d = cfg.d
    points: list[TypeProfile] = []
    draws = 0
    while len(points) < n:
        if draws >= 100 * n:
            raise SamplingExhausted(
                f"accepted {len(points)} of {draws} draws; acceptance rate below 1%"
            )
        batch = rng.uniform(lo, hi, size=(n, 2 * d))
        draws += n
        for row in batch:
            x, y = row[:d], row[d:]
            if cfg.builtin_guard and not _guard_ok(x, y, cfg.margin):
                continue
            points.append(TypeProfile(x, y))
            if len(points) == n:
                break
    return points


def _antisymmetry(M: np.ndarray) -> float:
    return float(np.linalg.norm(M - M.T))


def check_gradient_symmetry(rule, p: TypeProfile, cfg: CheckConfig | FDConfig = DEFAULT_FD):
    """Frobenius norms ``(||Jx - Jx'||, ||Jy - Jy'||)`` of the Jacobian defects."""
    fd = cfg.fd if isinstance(cfg, CheckConfig) else cfg
    return (
        _antisymmetry(jacobian_wrt_x(rule, p, fd)),
        _antisymmetry(jacobian_wrt_y(rule, p, fd)),
    )


def check_convexity_psd(rule, p: TypeProfile, cfg: CheckConfig | FDConfig = DEFAULT_FD):
    """Smallest eigenvalues of the symmetrized Jacobians in ``x`` and ``y``."""
    fd = cfg.fd if isinstance(cfg, CheckConfig) else cfg
    return (
        float(symmetric_eigenvalues(jacobian_wrt_x(rule, p, fd))[0]),
        float(symmetric_eigenvalues(jacobian_wrt_y(rule, p, fd))[0]),
    )


def check_john_residual(potential, p: TypeProfile, cfg: CheckConfig | FDConfig = DEFAULT_FD) -> float:
    """``||C - C'||_F`` for the mixed partials ``C[i, j] = d^2 V / dx_i dy_j``."""
    fd = cfg.fd if isinstance(cfg, CheckConfig) else cfg
    return _antisymmetry(cross_partial_matrix(potential, p, fd))


@dataclass
class PointDiagnostic:
    point: TypeProfile
    sym_x: Optional[float] = None
    sym_y: Optional[float] = None
    min_eig_x: Optional[float] = None
    min_eig_y: Optional[float] = None
    john_residual: Optional[float] = None
    jac_norm: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def scale(self) -> float:
        return max(1.0, self.jac_norm or 0.0)

    @property
    def rel_sym(self) -> float:
        return max(self.sym_x, self.sym_y) / self.scale

    @property
    def rel_min_eig(self) -> float:
        return min(self.min_eig_x, self.min_eig_y) / self.scale


def diagnose_point(rule, p: TypeProfile, fd: FDConfig = DEFAULT_FD, potential=None) -> PointDiagnostic:
    try:
        Jx, Jy = jacobian_wrt_x(rule, p, fd), jacobian_wrt_y(rule, p, fd)
        john = check_john_residual(potential, p, fd) if potential is not None else None
    except DomainError as exc:
        return PointDiagnostic(p, error=str(exc))
    return PointDiagnostic(
        p,
        sym_x=_antisymmetry(Jx),
        sym_y=_antisymmetry(Jy),
        min_eig_x=float(symmetric_eigenvalues(Jx)[0]),
        min_eig_y=float(symmetric_eigenvalues(Jy)[0]),
        john_residual=john,
        jac_norm=float(max(np.linalg.norm(Jx), np.linalg.norm(Jy))),
    )


@dataclass
class SuiteReport:
    diagnostics: list[PointDiagnostic]
    tol_sym: float
    tol_psd: float
    percentile_verdict: bool = False
    worst_sym: float = math.nan
    worst_min_eig: float = math.nan
    worst_rel_sym: float = math.nan
    worst_rel_min_eig: float = math.nan
    p95_rel_sym: float = math.nan
    p05_rel_min_eig: float = math.nan
    worst_john: Optional[float] = None
    n_domain_errors: int = 0
    verdict: str = PASS

    @property
    def passed(self) -> bool:
        return self.verdict == PASS


def aggregate(
    diagnostics: Sequence[PointDiagnostic],
    tol_sym: float,
    tol_psd: float,
    percentile_verdict: bool = False,
) -> SuiteReport:
    """Fold per-point diagnostics, in order, into a report and verdict.

    Residuals are compared relative to ``max(1, ||J||_F)``. Symmetry failures
    take precedence over PSD failures. More than 10% of points outside the
    domain gives ``domain_error``.
    """
    diagnostics = list(diagnostics)
    report = SuiteReport(diagnostics, tol_sym, tol_psd, percentile_verdict)
    good = [dg for dg in diagnostics if dg.ok]
    report.n_domain_errors = len(diagnostics) - len(good)
    if diagnostics and report.n_domain_errors > 0.1 * len(diagnostics):
        report.verdict = DOMAIN_ERROR
    if not good:
        return report

    rel_sym = np.array([dg.rel_sym for dg in good])
    rel_eig = np.array([dg.rel_min_eig for dg in good])
    report.worst_sym = max(max(dg.sym_x, dg.sym_y) for dg in good)
    report.worst_min_eig = min(min(dg.min_eig_x, dg.min_eig_y) for dg in good)
    report.worst_rel_sym = float(rel_sym.max())
    report.worst_rel_min_eig = float(rel_eig.min())
    report.p95_rel_sym = float(np.percentile(rel_sym, 95))
    report.p05_rel_min_eig = float(np.percentile(rel_eig, 5))
    johns = [dg.john_residual for dg in good if dg.john_residual is not None]
    report.worst_john = max(johns) if johns else None

    if report.verdict == DOMAIN_ERROR:
        return report
    sym_stat = report.p95_rel_sym if percentile_verdict else report.worst_rel_sym
    eig_stat = report.p05_rel_min_eig if percentile_verdict else report.worst_rel_min_eig
    if sym_stat > tol_sym:
        report.verdict = FAIL_SYMMETRY
    elif eig_stat < -tol_psd:
        report.verdict = FAIL_PSD
    else:
        report.verdict = PASS
    return report


def run_diagnostic_suite(rule, cfg: CheckConfig, potential: Callable | None = None) -> SuiteReport:
    """Symmetry and PSD checks at every sampled point of ``cfg``'s box.

    The John residual is filled in when an agent-1 potential is supplied or
    known in closed form for ``rule``.
    """
    if potential is None:
        known = closed_form_potentials(rule)
        potential = known[0] if known else None
    points = sample_domain(cfg)
    diagnostics = [diagnose_point(rule, p, cfg.fd, potential) for p in points]
    report = aggregate(diagnostics, cfg.tol_sym, cfg.tol_psd, cfg.percentile_verdict)
    log.info("suite over %d points: %s", len(points), report.verdict)
    return report
