import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

from ..eigensolve import SolverOptions, robin_eigenvalue
from ..mesh import DomainSpec, Mesh, generate_mesh, geometry_stats, refine

logger = logging.getLogger(__name__)


def refinement_level(mesh: Mesh) -> int:
    """Number of uniform refinements between the mesh generated from :code:`mesh.domain` and :code:`mesh`."""
    generated = generate_mesh(mesh.domain)
    return max(0, int(round(math.log(mesh.num_triangles / generated.num_triangles, 4))))


@dataclass(frozen=True)
class FaberKrahnRecord:
    """Robin eigenvalue of a domain against the disk of the same area."""

    lambda_domain: float
    lambda_disk: float
    disk_radius: float
    satisfied: bool
    tolerance: float
    refinements: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def faber_krahn_check(
    mesh: Mesh,
    p: float,
    beta: float,
    opts: Optional[SolverOptions] = None,
    tolerance: float = 0.01,
    lambda_domain: Optional[float] = None,
) -> FaberKrahnRecord:
    """Check :math:`\\lambda_p(\\beta, \\Omega) \\geq \\lambda_p(\\beta, B)` for the disk B with :math:`|B| = |\\Omega|`.

    The disk is meshed with the target size of the domain and refined as many
    times as the domain mesh was refined after generation.

    Args:
        mesh: triangulation of the domain
        p: exponent in [1.1, 10]
        beta: positive Robin parameter
        opts: solver options
        tolerance: relative slack on the comparison
        lambda_domain: eigenvalue of the domain, computed when omitted

    Returns:
        FaberKrahnRecord: both eigenvalues and the verdict

    """
    if lambda_domain is None:
        lambda_domain = robin_eigenvalue(mesh, p, beta, opts).eigenvalue
    radius = math.sqrt(geometry_stats(mesh).area / math.pi)
    target_h, refinements = mesh.h, 0
    if mesh.domain is not None and mesh.domain.kind != "file":
        target_h, refinements = mesh.domain.target_h, refinement_level(mesh)
    disk = generate_mesh(DomainSpec("disk", params=(radius,), target_h=min(target_h, radius)))
    for _ in range(refinements):
        disk = refine(disk)
    lambda_disk = robin_eigenvalue(disk, p, beta, opts).eigenvalue

    satisfied = lambda_domain >= lambda_disk * (1.0 - tolerance)
    if not satisfied:
        logger.warning(
            f"Faber-Krahn comparison fails on {mesh.name} (p={p:g}, beta={beta:g}): {lambda_domain:.6g} < {lambda_disk:.6g}"
        )
    return FaberKrahnRecord(
        lambda_domain=float(lambda_domain),
        lambda_disk=float(lambda_disk),
        disk_radius=radius,
        satisfied=bool(satisfied),
        tolerance=tolerance,
        refinements=refinements,
    )
