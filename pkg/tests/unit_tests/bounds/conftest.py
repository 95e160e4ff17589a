import math

import pytest

from robin_plaplacian.bounds import SourceValues, SpectralQuantities
from robin_plaplacian.mesh import GeometryStats

DISK_ROBIN_BETA_1 = 1.5769927308
DISK_DIRICHLET = 5.783185962946784


@pytest.fixture
def disk_stats() -> GeometryStats:
    """Fixture with the exact geometry of the unit disk.

    Returns:
        GeometryStats: area pi, perimeter 2 pi, inradius 1, convex
    """
    return GeometryStats(area=math.pi, perimeter=2 * math.pi, inradius=1.0, is_convex=True)


@pytest.fixture
def disk_quantities(disk_stats) -> SpectralQuantities:
    """Fixture with the exact spectral quantities of the unit disk for p = 2 and beta = 1.

    Args:
        disk_stats: geometry of the unit disk

    Returns:
        SpectralQuantities: Robin and Dirichlet eigenvalues, torsion and the constant source
    """
    return SpectralQuantities(
        domain="disk:1",
        p=2.0,
        beta=1.0,
        stats=disk_stats,
        mesh_size=0.0,
        lambda_robin=DISK_ROBIN_BETA_1,
        lambda_dirichlet=DISK_DIRICHLET,
        torsion_value=math.pi / 8,
        sources={"one": SourceValues(j_infinity=math.pi / 8, integral=math.pi, pprime_integral=math.pi)},
        slack=0.0,
    )
