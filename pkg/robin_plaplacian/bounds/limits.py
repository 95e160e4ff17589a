"""Asymptotics of the Robin eigenvalue for small and large beta."""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from ..eigensolve import IndefiniteFormError, SolverOptions, dirichlet_eigenvalue, robin_eigenvalue, torsion
from ..mesh import Mesh, geometry_stats

logger = logging.getLogger(__name__)


def richardson_limit(betas: Sequence[float], slopes: Sequence[float]) -> float:
    """Linear extrapolation to beta = 0 through the last two points."""
    if len(betas) == 0:
        return float("nan")
    if len(betas) == 1:
        return float(slopes[-1])
    (b1, s1), (b2, s2) = (betas[-2], slopes[-2]), (betas[-1], slopes[-1])
    return float((b1 * s2 - b2 * s1) / (b1 - b2))


@dataclass(frozen=True)
class SlopeRecord:
    """Slopes :math:`\\lambda(\\beta)/\\beta` along a grid shrinking to zero."""

    betas: Tuple[float, ...]
    slopes: Tuple[float, ...]
    eigenvalues: Tuple[float, ...]
    limit_estimate: float
    target: float
    negative_betas: Tuple[float, ...] = ()
    negative_slopes: Tuple[float, ...] = ()
    negative_limit_estimate: Optional[float] = None
    failures: Dict[float, str] = field(default_factory=dict)
    tolerance: float = 0.02

    @property
    def relative_error(self) -> float:
        return abs(self.limit_estimate - self.target) / self.target

    @property
    def satisfied(self) -> bool:
        """Both extrapolated slopes, when present, lie within the tolerance of the target."""
        estimates = [self.limit_estimate]
        if self.negative_limit_estimate is not None:
            estimates.append(self.negative_limit_estimate)
        return all(abs(e - self.target) <= self.tolerance * self.target for e in estimates)

    def to_dict(self) -> Dict[str, Any]:
        record = asdict(self)
        record["failures"] = {str(k): v for k, v in self.failures.items()}
        record["relative_error"] = self.relative_error
        record["satisfied"] = self.satisfied
        return record


def _check_grid(beta_grid: Sequence[float], decreasing: bool) -> Tuple[float, ...]:
    grid = tuple(float(b) for b in beta_grid)
    if not grid:
        raise ValueError("beta grid is empty")
    if any(b <= 0 for b in grid):
        raise ValueError(f"beta grid must be positive, got {grid}")
    steps = np.diff(grid)
    if np.any(steps >= 0 if decreasing else steps <= 0):
        raise ValueError(f"beta grid must be strictly {'decreasing' if decreasing else 'increasing'}, got {grid}")
    return grid


def limit_slope_beta0(
    mesh: Mesh,
    p: float,
    beta_grid: Sequence[float],
    include_negative: bool = False,
    opts: Optional[SolverOptions] = None,
    tolerance: float = 0.02,
) -> SlopeRecord:
    """Estimate :math:`\\lim_{\\beta\\to 0} \\lambda_p(\\beta)/\\beta`, expected to be :math:`P/|\\Omega|`.

    Args:
        mesh: triangulation of the domain
        p: exponent in [1.1, 10]
        beta_grid: strictly decreasing values in (0, 1]
        include_negative: also solve at the mirrored negative values
        opts: solver options
        tolerance: relative distance to the target allowed for the verdict

    Returns:
        SlopeRecord: slopes, Richardson estimate and target; negative points
        where the solver aborts are listed in :code:`failures`

    """
    grid = _check_grid(beta_grid, decreasing=True)
    if grid[0] > 1:
        raise ValueError(f"beta grid for the small-beta limit must lie in (0, 1], got {grid}")
    stats = geometry_stats(mesh)
    target = stats.perimeter / stats.area

    eigenvalues = [robin_eigenvalue(mesh, p, beta, opts).eigenvalue for beta in grid]
    slopes = [lam / beta for lam, beta in zip(eigenvalues, grid)]  # noqa: B905

    negative_betas, negative_slopes, failures = [], [], {}
    if include_negative:
        for beta in grid:
            try:
                lam = robin_eigenvalue(mesh, p, -beta, opts).eigenvalue
            except IndefiniteFormError as e:
                logger.warning(f"Negative beta={-beta:g} on {mesh.name}: {e}")
                failures[-beta] = str(e)
                continue
            negative_betas.append(-beta)
            negative_slopes.append(lam / -beta)

    record = SlopeRecord(
        betas=grid,
        slopes=tuple(slopes),
        eigenvalues=tuple(eigenvalues),
        limit_estimate=richardson_limit(grid, slopes),
        target=target,
        negative_betas=tuple(negative_betas),
        negative_slopes=tuple(negative_slopes),
        negative_limit_estimate=richardson_limit(negative_betas, negative_slopes) if negative_betas else None,
        failures=failures,
        tolerance=tolerance,
    )
    logger.info(
        f"Small-beta slope on {mesh.name} (p={p:g}): {record.limit_estimate:.6g}, target P/|Omega| = {target:.6g}"
    )
    return record


@dataclass(frozen=True)
class GapRecord:
    """Gaps :math:`\\lambda^D - \\lambda(\\beta)` along a growing grid."""

    betas: Tuple[float, ...]
    eigenvalues: Tuple[float, ...]
    gaps: Tuple[float, ...]
    lambda_dirichlet: float
    monotone: bool
    positive: bool

    @property
    def final_gap(self) -> float:
        return self.gaps[-1]

    @property
    def relative_final_gap(self) -> float:
        return self.final_gap / self.lambda_dirichlet

    @property
    def satisfied(self) -> bool:
        return self.positive and self.monotone

    def to_dict(self) -> Dict[str, Any]:
        record = asdict(self)
        record["final_gap"] = self.final_gap
        record["relative_final_gap"] = self.relative_final_gap
        record["satisfied"] = self.satisfied
        return record


def beta_infinity_gap(
    mesh: Mesh,
    p: float,
    beta_grid: Sequence[float],
    opts: Optional[SolverOptions] = None,
    lambda_dirichlet: Optional[float] = None,
    tolerance: float = 1e-8,
) -> GapRecord:
    """Check that :math:`\\lambda_p(\\beta) \\to \\lambda_p^D` from below as beta grows.

    Args:
        mesh: triangulation of the domain
        p: exponent in [1.1, 10]
        beta_grid: strictly increasing positive values
        opts: solver options
        lambda_dirichlet: Dirichlet eigenvalue of the same mesh, computed when omitted
        tolerance: negative gap allowed relative to the Dirichlet eigenvalue

    Returns:
        GapRecord: gaps and whether they are positive and strictly decreasing

    """
    grid = _check_grid(beta_grid, decreasing=False)
    if lambda_dirichlet is None:
        lambda_dirichlet = dirichlet_eigenvalue(mesh, p, opts).eigenvalue
    eigenvalues = [robin_eigenvalue(mesh, p, beta, opts).eigenvalue for beta in grid]
    gaps = [lambda_dirichlet - lam for lam in eigenvalues]
    record = GapRecord(
        betas=grid,
        eigenvalues=tuple(eigenvalues),
        gaps=tuple(gaps),
        lambda_dirichlet=float(lambda_dirichlet),
        monotone=bool(np.all(np.diff(gaps) < 0)),
        positive=bool(all(g >= -tolerance * lambda_dirichlet for g in gaps)),
    )
    logger.info(f"Dirichlet gap on {mesh.name} (p={p:g}) at beta={grid[-1]:g}: {record.final_gap:.6g}")
    return record


@dataclass(frozen=True)
class PolyaTorsionRecord:
    """:math:`T_p (\\lambda^D)^{1/(p-1)} / |\\Omega| \\leq 1`."""

    torsion_value: float
    lambda_dirichlet: float
    product: float
    satisfied: bool
    slack: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def polya_torsion_product(
    mesh: Mesh,
    p: float,
    opts: Optional[SolverOptions] = None,
    lambda_dirichlet: Optional[float] = None,
    torsion_value: Optional[float] = None,
    slack: float = 0.02,
) -> PolyaTorsionRecord:
    """The infinite-beta form of the torsion bound."""
    if lambda_dirichlet is None:
        lambda_dirichlet = dirichlet_eigenvalue(mesh, p, opts).eigenvalue
    if torsion_value is None:
        torsion_value = torsion(mesh, p, opts)
    area = float(np.sum(mesh.areas))
    product = torsion_value * lambda_dirichlet ** (1.0 / (p - 1.0)) / area
    return PolyaTorsionRecord(
        torsion_value=float(torsion_value),
        lambda_dirichlet=float(lambda_dirichlet),
        product=float(product),
        satisfied=bool(product <= 1.0 + slack),
        slack=slack,
    )
