"""Lower-bound certificates through the constant-flux problem, and the nu_p family estimate."""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Mapping, Optional, Sequence, Union

import numpy as np

from .. import radial
from ..eigensolve import (
    EigenResult,
    NeumannFluxResult,
    SolverOptions,
    dirichlet_source_solve,
    neumann_flux_solve,
    robin_source_solve,
)
from ..fem import ScalarField, conjugate_exponent, integrate, lp_norm
from ..mesh import Mesh, distance_to_boundary, geometry_stats
from .bound_base import SourceValues

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CertificateRecord:
    """:math:`J_f(\\beta) \\leq \\int|\\nabla v|^p + \\beta^{-1/(p-1)}(\\int f)^{p'}/P^{1/(p-1)}` for one source."""

    source_id: str
    j_value: float
    rhs: float
    slack: float
    energy: float
    flux_constant: float
    satisfied: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class EigenCertificateRecord:
    """Ratio :math:`J_f(\\beta)/\\int f^{p'}` against its maximum :math:`\\lambda^{-1/(p-1)}`."""

    source_id: str
    ratio: float
    reciprocal: float
    gap: float
    relative_gap: float
    satisfied: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def lower_bound_certificate(
    mesh: Mesh,
    p: float,
    beta: float,
    f: ScalarField,
    source_id: str = "f",
    opts: Optional[SolverOptions] = None,
    neumann: Optional[NeumannFluxResult] = None,
    tolerance: float = 1e-3,
) -> CertificateRecord:
    """Certificate of the lower bound for one source.

    Args:
        mesh: triangulation of the domain
        p: exponent in [1.1, 10]
        beta: positive Robin parameter
        f: nonnegative source, not identically zero
        source_id: name of the source in the report
        opts: solver options
        neumann: constant-flux solution of the same source, computed when omitted
        tolerance: negative slack allowed relative to :math:`J_f(\\beta)`

    Returns:
        CertificateRecord: both sides and the slack

    """
    robin = robin_source_solve(mesh, p, beta, f, opts)
    if neumann is None:
        neumann = neumann_flux_solve(mesh, p, f, opts)

    perimeter = float(np.sum(mesh.edge_lengths))
    rhs = neumann.energy + beta ** (-1.0 / (p - 1.0)) * integrate(f) ** conjugate_exponent(p) / perimeter ** (
        1.0 / (p - 1.0)
    )
    slack = rhs - robin.j_value
    satisfied = slack >= -tolerance * abs(robin.j_value)
    if not satisfied:
        logger.warning(f"Certificate for source {source_id} on {mesh.name} (p={p:g}, beta={beta:g}) fails by {-slack:.3g}")
    return CertificateRecord(
        source_id=source_id,
        j_value=robin.j_value,
        rhs=float(rhs),
        slack=float(slack),
        energy=neumann.energy,
        flux_constant=neumann.flux_constant,
        satisfied=bool(satisfied),
    )


def pprime_integral(f: ScalarField, p: float) -> float:
    """:math:`\\int f^{p'}`."""
    pprime = conjugate_exponent(p)
    return lp_norm(f, pprime) ** pprime


def nu_p_estimate(
    mesh: Mesh,
    p: float,
    family: Union[Mapping[str, ScalarField], Sequence[ScalarField]],
    opts: Optional[SolverOptions] = None,
) -> float:
    """Minimum of :math:`\\int f^{p'} / \\int |\\nabla v_f|^p` over a family of sources.

    An infimum over a subset, hence an upper bound of :math:`\\nu_p`.

    Raises:
        ValueError: empty family

    """
    sources = list(family.values()) if isinstance(family, Mapping) else list(family)
    if not sources:
        raise ValueError("nu_p estimate needs a nonempty source family")

    estimate = min(pprime_integral(f, p) / neumann_flux_solve(mesh, p, f, opts).energy for f in sources)
    if p == 2:
        area = float(np.sum(mesh.areas))
        reference = radial.disk_neumann_eigenvalue(float(np.sqrt(area / np.pi)))
        logger.info(
            f"nu_2 estimate on {mesh.name}: {estimate:.6g}; first Neumann eigenvalue of the equal-area disk: {reference:.6g}"
        )
    return float(estimate)


def eigenfunction_source(eigen: EigenResult) -> ScalarField:
    """:math:`f = \\lambda u^{p-1}`, the source whose solution is the eigenfunction itself."""
    u = eigen.eigenfunction
    return ScalarField(u.mesh, eigen.eigenvalue * np.abs(u.values) ** (eigen.p - 1.0))


def eigen_certificate(
    mesh: Mesh,
    p: float,
    beta: float,
    f: ScalarField,
    eigen: EigenResult,
    source_id: str = "f",
    opts: Optional[SolverOptions] = None,
    tolerance: float = 1e-3,
) -> EigenCertificateRecord:
    """Compare :math:`J_f(\\beta)/\\int f^{p'}` with :math:`\\lambda^{-1/(p-1)}`, its maximum over all sources."""
    ratio = robin_source_solve(mesh, p, beta, f, opts).j_value / pprime_integral(f, p)
    reciprocal = eigen.eigenvalue ** (-1.0 / (p - 1.0))
    gap = reciprocal - ratio
    return EigenCertificateRecord(
        source_id=source_id,
        ratio=float(ratio),
        reciprocal=float(reciprocal),
        gap=float(gap),
        relative_gap=float(gap / reciprocal),
        satisfied=bool(gap >= -tolerance * reciprocal),
    )


def source_family(mesh: Mesh) -> Dict[str, ScalarField]:
    """The constant source and three bumps of radius half the inradius.

    Bumps are centred at the deepest vertex and at the vertices of largest x
    and largest y among those at least half an inradius from the boundary.
    """
    depth = distance_to_boundary(mesh, mesh.vertices)
    inradius = geometry_stats(mesh).inradius
    deep = np.flatnonzero(depth >= 0.5 * inradius)
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    centers = {
        "bump_center": int(np.argmax(depth)),
        "bump_east": int(deep[np.argmax(x[deep])]),
        "bump_north": int(deep[np.argmax(y[deep])]),
    }
    radius = 0.5 * inradius

    family = {"one": ScalarField.constant(mesh, 1.0)}
    for name, index in centers.items():
        cx, cy = mesh.vertices[index]
        family[name] = ScalarField.from_function(
            mesh, lambda px, py, cx=cx, cy=cy: np.maximum(0.0, 1.0 - ((px - cx) ** 2 + (py - cy) ** 2) / radius**2)
        )
    return family


def source_values(mesh: Mesh, p: float, f: ScalarField, opts: Optional[SolverOptions] = None) -> SourceValues:
    """Quantities of one source needed by the general-source upper bound."""
    return SourceValues(
        j_infinity=dirichlet_source_solve(mesh, p, f, opts).j_value,
        integral=integrate(f),
        pprime_integral=pprime_integral(f, p),
    )
