import logging
import math
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd

from . import bounds
from .bounds.limits import richardson_limit
from .config import _getConfigDicts, _getConfigSetting
from .eigensolve import (
    IndefiniteFormError,
    NeumannFluxResult,
    SolverOptions,
    dirichlet_eigenvalue,
    neumann_flux_solve,
    robin_eigenvalue,
    torsion,
)
from .fem import ScalarField
from .mesh import DomainSpec, Mesh, ensure_meshes, geometry_stats

logger = logging.getLogger(__name__)

__all__ = [
    "tolerance",
    "maxOuterIterations",
    "meshSize",
    "slackFloor",
    "slackPerMeshSize",
    "DEFAULT_DOMAINS",
    "DEFAULT_EXPONENTS",
    "DEFAULT_BETAS",
    "EIGEN_COLUMNS",
    "SWEEP_COLUMNS",
    "buildMeshes",
    "computeRobinEigenvalues",
    "verifyBounds",
    "sweepBeta",
]

defaults, user = _getConfigDicts()

tolerance = _getConfigSetting("tolerance", user, defaults)
maxOuterIterations = _getConfigSetting("maxOuterIterations", user, defaults)
meshSize = _getConfigSetting("meshSize", user, defaults)
slackFloor = _getConfigSetting("slackFloor", user, defaults)
slackPerMeshSize = _getConfigSetting("slackPerMeshSize", user, defaults)

DEFAULT_DOMAINS = ("disk:1", "square:1", "rectangle:2:1", "hexagon:1")
DEFAULT_EXPONENTS = (1.5, 2.0, 3.0)
DEFAULT_BETAS = (0.1, 1.0, 10.0, 100.0)
SLOPE_BETAS = (0.02, 0.01)
GAP_BETAS = (1.0, 10.0, 100.0)

EIGEN_COLUMNS = ["domain", "boundary", "p", "beta", "lambda", "residual", "iterations", "converged"]
SWEEP_COLUMNS = ["kind", "domain", "p", "beta", "lambda", "slope", "dirichlet_gap", "target", "converged"]

DomainLike = Union[str, DomainSpec]


def buildMeshes(domains: Iterable[DomainLike], h: Optional[float] = None, refinements: int = 0) -> List[Mesh]:
    """Generate and refine one mesh per domain.

    Example:
        ::

            import robin_plaplacian as rp
            disk, square = rp.buildMeshes(["disk:1", "square:1"], h=0.05)

    Args:
        domains: domain strings such as :code:`disk:1` or parsed :class:`DomainSpec` objects
        h: target mesh size, defaults to the configured :code:`meshSize`
        refinements: number of uniform refinements applied after generation

    Returns:
        List[Mesh]: meshes in input order

    """
    if h is None:
        h = meshSize
    specs = [DomainSpec.parse(d, target_h=h) if isinstance(d, str) else d for d in domains]
    return ensure_meshes(specs, refinements)


def computeRobinEigenvalues(
    domains: Iterable[DomainLike],
    exponents: Sequence[float],
    betas: Sequence[float],
    h: Optional[float] = None,
    refinements: int = 0,
    opts: Optional[SolverOptions] = None,
) -> pd.DataFrame:
    """Compute the first Robin eigenvalue for every (domain, p, beta) combination.

    Adds one row per combination with the following columns:

    - 'domain' = domain identifier, e.g. :code:`disk:1`
    - 'boundary' = :code:`robin`, or :code:`dirichlet` for :code:`beta = inf`
    - 'p', 'beta' = problem parameters
    - 'lambda' = computed eigenvalue
    - 'residual', 'iterations', 'converged' = solver diagnostics

    Example:
        Robin eigenvalues of the unit disk for three parameters::

            import robin_plaplacian as rp
            df = rp.computeRobinEigenvalues(["disk:1"], [2], [0.5, 1, 5], h=0.05)

    Args:
        domains: domain strings or parsed domains
        exponents: values of p in [1.1, 10]
        betas: Robin parameters, :code:`math.inf` for Dirichlet
        h: target mesh size, defaults to the configured :code:`meshSize`
        refinements: number of uniform refinements
        opts: solver options, defaults to the configured ones

    Returns:
        pd.DataFrame: one row per combination, ordered by (domain, p, beta)

    """
    if opts is None:
        opts = SolverOptions.from_config()
    rows = []
    for mesh in buildMeshes(domains, h, refinements):
        for p in exponents:
            for beta in betas:
                rows.append(robin_eigenvalue(mesh, p, beta, opts).to_dict())
    df = pd.DataFrame(rows, columns=EIGEN_COLUMNS)
    return df.sort_values(["domain", "p", "beta"], kind="mergesort").reset_index(drop=True)


def _nu_estimate(family, neumann: Dict[str, NeumannFluxResult], p: float) -> float:
    return min(bounds.pprime_integral(f, p) / neumann[name].energy for name, f in family.items())


def _duality_tolerance(p: float) -> float:
    return 1e-8 if p == 2 else 1e-5


def _exponent_checks(
    mesh: Mesh, p: float, lambda_dirichlet: float, torsion_value: float, slack: float, opts: SolverOptions
) -> Dict[str, Any]:
    """Checks that depend on (domain, p) only and are shared by every beta."""
    return {
        "polya_torsion": bounds.polya_torsion_product(
            mesh, p, opts, lambda_dirichlet=lambda_dirichlet, torsion_value=torsion_value, slack=slack
        ),
        "limit_slope": bounds.limit_slope_beta0(
            mesh, p, SLOPE_BETAS, include_negative=True, opts=opts, tolerance=slack
        ),
        "dirichlet_gap": bounds.beta_infinity_gap(mesh, p, GAP_BETAS, opts, lambda_dirichlet=lambda_dirichlet),
    }


def _beta_checks(
    mesh: Mesh,
    p: float,
    beta: float,
    alpha: float,
    lambda_robin: float,
    one: ScalarField,
    slack: float,
    opts: SolverOptions,
) -> Dict[str, Any]:
    tolerance = _duality_tolerance(p)
    return {
        "faber_krahn": bounds.faber_krahn_check(mesh, p, beta, opts, tolerance=slack, lambda_domain=lambda_robin),
        "convexity": bounds.convexity_check(mesh, p, one, alpha, beta, opts, tolerance=tolerance),
        "duality": bounds.duality_check(mesh, p, one, alpha, beta, opts, tolerance=tolerance),
    }


def _next_level(beta: float, betas: Sequence[float]) -> float:
    larger = [b for b in betas if beta < b < math.inf]
    return min(larger) if larger else 10.0 * beta


def verifyBounds(
    domains: Iterable[DomainLike] = DEFAULT_DOMAINS,
    exponents: Sequence[float] = DEFAULT_EXPONENTS,
    betas: Sequence[float] = DEFAULT_BETAS,
    h: Optional[float] = None,
    refinements: int = 0,
    opts: Optional[SolverOptions] = None,
    certificates: bool = True,
    checks: bool = True,
) -> List[bounds.BoundsReport]:
    """Evaluate every bound on the first Robin eigenvalue over a grid of domains, exponents and parameters.

    For every (domain, p) the Dirichlet eigenvalue, the torsional rigidity and
    the constant-flux solutions of the source family are computed once and
    shared by all beta values. Each report holds the five classical bounds,
    the general-source upper bounds of the family and, when
    :code:`certificates` is set, one lower-bound certificate per source.
    When :code:`checks` is set the report also carries the Polya torsion
    product, the small-beta slope, the approach to the Dirichlet eigenvalue
    (shared by all beta of the same p) and, per positive beta, the comparison
    with the disk of equal area, the convexity of the constant-source
    functional and its flux duality between beta and the next larger beta of
    the grid (ten times beta for the largest).

    Example:
        Run the default suite and collect the verdicts::

            import robin_plaplacian as rp
            reports = rp.verifyBounds()
            all(report.all_satisfied for report in reports)

    Args:
        domains: domain strings or parsed domains, defaults to disk, square, 2:1 rectangle and hexagon
        exponents: values of p, defaults to 1.5, 2 and 3
        betas: positive Robin parameters, defaults to 0.1, 1, 10 and 100
        h: target mesh size, defaults to the configured :code:`meshSize`
        refinements: number of uniform refinements
        opts: solver options, defaults to the configured ones
        certificates: also compute the lower-bound certificates of the source family
        checks: also run the asymptotic, isoperimetric and duality checks

    Returns:
        List[BoundsReport]: one report per combination, ordered by (domain, p, beta)

    """
    if opts is None:
        opts = SolverOptions.from_config()
    reports = []
    for mesh in buildMeshes(domains, h, refinements):
        stats = geometry_stats(mesh)
        slack = bounds.discretization_slack(mesh.h, slackFloor, slackPerMeshSize)
        family = bounds.source_family(mesh)
        for p in exponents:
            dirichlet = dirichlet_eigenvalue(mesh, p, opts)
            torsion_value = torsion(mesh, p, opts)
            sources = {name: bounds.source_values(mesh, p, f, opts) for name, f in family.items()}
            neumann = {name: neumann_flux_solve(mesh, p, f, opts) for name, f in family.items()}
            nu_estimate = _nu_estimate(family, neumann, p)
            shared = _exponent_checks(mesh, p, dirichlet.eigenvalue, torsion_value, slack, opts) if checks else {}
            for beta in betas:
                eigen = robin_eigenvalue(mesh, p, beta, opts)
                records = []
                point_checks = dict(shared)
                if checks and 0 < beta < math.inf:
                    alpha = _next_level(beta, betas)
                    point_checks.update(
                        _beta_checks(mesh, p, beta, alpha, eigen.eigenvalue, family["one"], slack, opts)
                    )
                if certificates and beta > 0:
                    records = [
                        bounds.lower_bound_certificate(mesh, p, beta, f, name, opts, neumann=neumann[name])
                        for name, f in family.items()
                    ]
                report = bounds.evaluate_upper_bounds(
                    mesh,
                    p,
                    beta,
                    eigen,
                    dirichlet,
                    torsion_value,
                    stats,
                    sources=sources,
                    certificates=records,
                    nu_estimate=nu_estimate,
                    slack=slack,
                    checks=point_checks,
                )
                reports.append((report, eigen.converged and dirichlet.converged))
    for report, converged in reports:
        if not converged:
            logger.warning(f"Report for {report.domain} p={report.p:g} beta={report.beta:g} uses unconverged eigenvalues")
    return bounds.sort_reports([report for report, _ in reports])


def _sweep_point(mesh: Mesh, p: float, beta: float, lambda_dirichlet: float, opts: SolverOptions) -> Dict:
    row = {"kind": "point", "domain": mesh.name, "p": p, "beta": beta, "target": math.nan}
    try:
        eigen = robin_eigenvalue(mesh, p, beta, opts)
    except IndefiniteFormError as e:
        logger.warning(f"Skipping beta={beta:g} on {mesh.name}: {e}")
        row.update({"lambda": math.nan, "slope": math.nan, "dirichlet_gap": math.nan, "converged": False})
        return row
    row.update(
        {
            "lambda": eigen.eigenvalue,
            "slope": eigen.eigenvalue / beta if beta != 0 else math.nan,
            "dirichlet_gap": lambda_dirichlet - eigen.eigenvalue,
            "converged": eigen.converged,
        }
    )
    return row


def sweepBeta(
    domain: DomainLike,
    p: float,
    beta_grid: Sequence[float],
    h: Optional[float] = None,
    refinements: int = 0,
    opts: Optional[SolverOptions] = None,
) -> pd.DataFrame:
    """Robin eigenvalue along a grid of beta values, with the small- and large-beta asymptotics.

    Adds one 'point' row per beta with the eigenvalue, the slope
    :math:`\\lambda/\\beta` and the gap to the Dirichlet eigenvalue, followed by
    two summary rows:

    - 'limit_slope' = Richardson extrapolation to beta = 0 of the slopes of the two smallest positive betas in (0, 1], with target :math:`P/|\\Omega|`
    - 'final_gap' = Dirichlet gap at the largest beta, with target :math:`\\lambda^D`; its 'converged' column tells whether the positive gaps decrease strictly

    Example:
        ::

            import robin_plaplacian as rp
            df = rp.sweepBeta("disk:1", 2, [1e-3, 1e-2, 0.1, 1, 10, 100])

    Args:
        domain: domain string or parsed domain
        p: exponent in [1.1, 10]
        beta_grid: Robin parameters, any sign, duplicates removed
        h: target mesh size, defaults to the configured :code:`meshSize`
        refinements: number of uniform refinements
        opts: solver options, defaults to the configured ones

    Returns:
        pd.DataFrame: point rows ordered by beta, then the two summary rows

    Raises:
        ValueError: empty beta grid

    """
    grid = sorted(set(float(b) for b in beta_grid))
    if not grid:
        raise ValueError("beta grid is empty")
    if opts is None:
        opts = SolverOptions.from_config()

    (mesh,) = buildMeshes([domain], h, refinements)
    stats = geometry_stats(mesh)
    dirichlet = dirichlet_eigenvalue(mesh, p, opts)
    rows = [_sweep_point(mesh, p, beta, dirichlet.eigenvalue, opts) for beta in grid]
    for row in rows:
        logger.info(f"{mesh.name} p={p:g} beta={row['beta']:g}: lambda={row['lambda']:.10g}")

    small = [(row["beta"], row["slope"]) for row in rows if 0 < row["beta"] <= 1 and not math.isnan(row["slope"])]
    small.sort(reverse=True)
    limit = richardson_limit([b for b, _ in small], [s for _, s in small])
    rows.append(
        {
            "kind": "limit_slope",
            "domain": mesh.name,
            "p": p,
            "beta": small[-1][0] if small else math.nan,
            "lambda": math.nan,
            "slope": limit,
            "dirichlet_gap": math.nan,
            "target": stats.perimeter / stats.area,
            "converged": bool(small),
        }
    )

    positive = [row for row in rows if row["kind"] == "point" and row["beta"] > 0 and not math.isnan(row["lambda"])]
    gaps = [row["dirichlet_gap"] for row in positive]
    rows.append(
        {
            "kind": "final_gap",
            "domain": mesh.name,
            "p": p,
            "beta": positive[-1]["beta"] if positive else math.nan,
            "lambda": positive[-1]["lambda"] if positive else math.nan,
            "slope": math.nan,
            "dirichlet_gap": gaps[-1] if gaps else math.nan,
            "target": dirichlet.eigenvalue,
            "converged": bool(gaps) and all(a > b for a, b in zip(gaps, gaps[1:])),  # noqa: B905
        }
    )
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
