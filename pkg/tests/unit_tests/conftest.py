import math
from typing import Callable

import pytest

from robin_plaplacian.mesh import DomainSpec, Mesh, generate_mesh


def _bessel_series(x: float, order: int, terms: int = 60) -> float:
    """:math:`J_n(x)` from its power series, independent of scipy.special."""
    total, term = 0.0, (x / 2.0) ** order / math.factorial(order)
    for k in range(terms):
        total += term
        term *= -((x / 2.0) ** 2) / ((k + 1) * (k + 1 + order))
    return total


def _disk_robin_oracle(beta: float, radius: float = 1.0) -> float:
    """First root of :math:`x J_1(x) = \\beta R J_0(x)` on (0, j_{0,1}) by bisection, returned as :math:`(x/R)^2`."""
    lo, hi = 0.0, 2.404825557695773
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * _bessel_series(mid, 1) - beta * radius * _bessel_series(mid, 0) < 0:
            lo = mid
        else:
            hi = mid
    return (0.5 * (lo + hi) / radius) ** 2


@pytest.fixture(scope="session")
def disk_robin_oracle() -> Callable[[float], float]:
    """Robin eigenvalue of the disk for p = 2 from the Bessel power series.

    Returns:
        Callable[[float], float]: beta (and optionally the radius) to eigenvalue
    """
    return _disk_robin_oracle


@pytest.fixture(scope="session")
def bessel() -> Callable[[float, int], float]:
    """Bessel function of the first kind from its power series.

    Returns:
        Callable[[float, int], float]: (x, order) to :math:`J_n(x)`
    """
    return _bessel_series


@pytest.fixture(scope="session")
def unit_disk() -> Mesh:
    """Unit disk with h = 0.1.

    Returns:
        Mesh: triangulation of the unit disk
    """
    return generate_mesh(DomainSpec.parse("disk:1", target_h=0.1))


@pytest.fixture(scope="session")
def fine_disk() -> Mesh:
    """Unit disk with h = 0.05.

    Returns:
        Mesh: triangulation of the unit disk
    """
    return generate_mesh(DomainSpec.parse("disk:1", target_h=0.05))


@pytest.fixture(scope="session")
def coarse_disk() -> Mesh:
    """Unit disk with h = 0.25, for checks that do not need accuracy.

    Returns:
        Mesh: triangulation of the unit disk
    """
    return generate_mesh(DomainSpec.parse("disk:1", target_h=0.25))


@pytest.fixture(scope="session")
def unit_square() -> Mesh:
    """Unit square with h = 0.1.

    Returns:
        Mesh: triangulation of [0, 1] x [0, 1]
    """
    return generate_mesh(DomainSpec.parse("square:1", target_h=0.1))


@pytest.fixture(scope="session")
def coarse_square() -> Mesh:
    """Unit square with h = 0.25.

    Returns:
        Mesh: triangulation of [0, 1] x [0, 1]
    """
    return generate_mesh(DomainSpec.parse("square:1", target_h=0.25))


@pytest.fixture(scope="session")
def l_shape() -> Mesh:
    """Non-convex L-shaped polygon with h = 0.2.

    Returns:
        Mesh: triangulation of the L-shape
    """
    return generate_mesh(DomainSpec.parse("polygon:0,0;2,0;2,1;1,1;1,2;0,2", target_h=0.2))
