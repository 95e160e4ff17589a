"""Thompson (flux) characterization of the source functional and its convexity in beta."""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np

from ..eigensolve import RobinSolveResult, SolverOptions, robin_source_solve
from ..fem import ScalarField, VectorField, check_exponent, conjugate_exponent, operators
from ..mesh import Mesh

logger = logging.getLogger(__name__)


def dual_objective(mesh: Mesh, p: float, beta: float, V: VectorField, boundary_flux: np.ndarray) -> float:
    """:math:`\\int_\\Omega |V|^{p'} + \\beta^{-1/(p-1)} \\int_{\\partial\\Omega} |V\\cdot\\nu|^{p'}`.

    For fields with :math:`-\\mathrm{div} V = f` this is an upper bound on
    :math:`J_f(\\beta)`, attained by the flux of the solution.

    Args:
        mesh: triangulation the field lives on
        p: exponent in [1.1, 10]
        beta: positive Robin parameter
        V: piecewise constant field
        boundary_flux: :math:`V\\cdot\\nu` either per boundary edge, shape (k,), or per boundary quadrature point, shape (k, 3)

    Returns:
        float: dual objective

    """
    check_exponent(p)
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    pprime = conjugate_exponent(p)
    ops = operators(mesh)
    volume = float(np.dot(ops.areas, V.magnitude ** pprime))

    flux = np.asarray(boundary_flux, dtype=float)
    k = len(mesh.boundary_edges)
    if flux.shape == (k,):
        boundary = float(np.dot(mesh.edge_lengths, np.abs(flux) ** pprime))
    elif flux.ndim == 2 and flux.shape[0] == k and flux.size == len(ops.boundary_weights):
        boundary = float(np.dot(ops.boundary_weights, np.abs(flux.ravel()) ** pprime))
    else:
        raise ValueError(f"Boundary flux of shape {flux.shape} does not match {k} boundary edges")
    return volume + beta ** (-1.0 / (p - 1.0)) * boundary


def thompson_gap(
    mesh: Mesh, p: float, f: ScalarField, alpha: float, beta: float, opts: Optional[SolverOptions] = None
) -> float:
    """Dual objective at level beta of the flux of the alpha-solution, minus :math:`J_f(\\beta)`.

    Nonnegative up to solver tolerance (weak duality), zero when alpha == beta.
    """
    at_alpha = robin_source_solve(mesh, p, alpha, f, opts)
    at_beta = at_alpha if alpha == beta else robin_source_solve(mesh, p, beta, f, opts)
    return _gap(mesh, p, beta, at_alpha, at_beta)


def _gap(mesh: Mesh, p: float, beta: float, flux_of: RobinSolveResult, at_beta: RobinSolveResult) -> float:
    return dual_objective(mesh, p, beta, flux_of.flux, flux_of.boundary_flux) - at_beta.j_value


@dataclass(frozen=True)
class DualityRecord:
    """Gaps of the flux characterization at level beta.

    :code:`strong_gap` uses the flux of the beta-solution and vanishes,
    :code:`weak_gap` uses the flux of the alpha-solution and is nonnegative.
    """

    alpha: float
    beta: float
    j_value: float
    strong_gap: float
    weak_gap: float
    satisfied: bool
    tolerance: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def duality_check(
    mesh: Mesh,
    p: float,
    f: ScalarField,
    alpha: float,
    beta: float,
    opts: Optional[SolverOptions] = None,
    tolerance: float = 1e-5,
) -> DualityRecord:
    """Check strong duality at beta and weak duality for the flux of the alpha-solution.

    Args:
        mesh: triangulation of the domain
        p: exponent in [1.1, 10]
        f: nonnegative source, not identically zero
        alpha: positive Robin parameter of the competing flux
        beta: positive Robin parameter of the functional
        opts: solver options
        tolerance: gap allowed relative to :math:`\\max(1, J_f(\\beta))`

    Returns:
        DualityRecord: both gaps and the verdict

    """
    if not (alpha > 0 and beta > 0):
        raise ValueError(f"alpha and beta must be positive, got {alpha} and {beta}")
    at_beta = robin_source_solve(mesh, p, beta, f, opts)
    at_alpha = at_beta if alpha == beta else robin_source_solve(mesh, p, alpha, f, opts)

    strong = _gap(mesh, p, beta, at_beta, at_beta)
    weak = _gap(mesh, p, beta, at_alpha, at_beta)
    allowed = tolerance * max(1.0, abs(at_beta.j_value))
    satisfied = abs(strong) <= allowed and weak >= -allowed
    if not satisfied:
        logger.warning(
            f"Flux duality fails on {mesh.name} (p={p:g}, alpha={alpha:g}, beta={beta:g}): "
            f"strong gap {strong:.3g}, weak gap {weak:.3g}"
        )
    return DualityRecord(
        alpha=float(alpha),
        beta=float(beta),
        j_value=float(at_beta.j_value),
        strong_gap=float(strong),
        weak_gap=float(weak),
        satisfied=bool(satisfied),
        tolerance=tolerance,
    )


@dataclass(frozen=True)
class ConvexityRecord:
    alpha: float
    beta: float
    lhs: float
    rhs: float
    slack: float
    satisfied: bool
    tolerance: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def convexity_check(
    mesh: Mesh,
    p: float,
    f: ScalarField,
    alpha: float,
    beta: float,
    opts: Optional[SolverOptions] = None,
    tolerance: float = 1e-6,
) -> ConvexityRecord:
    """Check :math:`J_f(\\beta) \\leq J_f(\\alpha) + (\\beta^{-1/(p-1)} - \\alpha^{-1/(p-1)}) H(\\alpha)`.

    :math:`H(\\alpha)` is the p'-norm of the variational boundary flux of the
    alpha-solution.

    Args:
        mesh: triangulation of the domain
        p: exponent in [1.1, 10]
        f: nonnegative source, not identically zero
        alpha: positive Robin parameter of the expansion point
        beta: positive Robin parameter of the evaluation point
        opts: solver options
        tolerance: slack allowed relative to :math:`\\max(1, J_f(\\beta))`

    Returns:
        ConvexityRecord: both sides, their difference and the verdict

    """
    if not (alpha > 0 and beta > 0):
        raise ValueError(f"alpha and beta must be positive, got {alpha} and {beta}")
    at_alpha = robin_source_solve(mesh, p, alpha, f, opts)
    at_beta = at_alpha if alpha == beta else robin_source_solve(mesh, p, beta, f, opts)

    exponent = -1.0 / (p - 1.0)
    lhs = at_beta.j_value
    rhs = at_alpha.j_value + (beta ** exponent - alpha ** exponent) * at_alpha.flux_pprime_norm
    slack = rhs - lhs
    satisfied = slack >= -tolerance * max(1.0, abs(lhs))
    if not satisfied:
        logger.warning(f"Convexity in beta violated on {mesh.name} (p={p:g}, alpha={alpha:g}, beta={beta:g}): slack {slack:.3g}")
    return ConvexityRecord(
        alpha=float(alpha),
        beta=float(beta),
        lhs=float(lhs),
        rhs=float(rhs),
        slack=float(slack),
        satisfied=bool(satisfied),
        tolerance=tolerance,
    )
