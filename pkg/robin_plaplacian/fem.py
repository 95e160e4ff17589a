"""P1 finite element fields and the discrete energies, norms and quotients built on them.

All integrals are sums in triangle (or boundary edge) index order, so results
are reproducible bit for bit on a fixed mesh.
"""

import logging
import weakref
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import sparse

from .mesh import Mesh

logger = logging.getLogger(__name__)

P_MIN = 1.1
P_MAX = 10.0

# 6-point rule on the reference triangle, exact for polynomials of degree 4
_DUNAVANT_A = 0.445948490915965
_DUNAVANT_B = 0.091576213509771
_VOLUME_POINTS = np.array(
    [
        [1.0 - 2.0 * _DUNAVANT_A, _DUNAVANT_A, _DUNAVANT_A],
        [_DUNAVANT_A, 1.0 - 2.0 * _DUNAVANT_A, _DUNAVANT_A],
        [_DUNAVANT_A, _DUNAVANT_A, 1.0 - 2.0 * _DUNAVANT_A],
        [1.0 - 2.0 * _DUNAVANT_B, _DUNAVANT_B, _DUNAVANT_B],
        [_DUNAVANT_B, 1.0 - 2.0 * _DUNAVANT_B, _DUNAVANT_B],
        [_DUNAVANT_B, _DUNAVANT_B, 1.0 - 2.0 * _DUNAVANT_B],
    ]
)
_VOLUME_WEIGHTS = np.array([0.223381589678011] * 3 + [0.109951743655322] * 3)

# 3-point Gauss-Legendre on [0, 1]
_GAUSS_OFFSET = 0.5 * np.sqrt(3.0 / 5.0)
_EDGE_POINTS = np.array([0.5 - _GAUSS_OFFSET, 0.5, 0.5 + _GAUSS_OFFSET])
_EDGE_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0

EDGE_QUADRATURE_POINTS = len(_EDGE_POINTS)


class ExponentRangeError(ValueError):
    pass


class ZeroFieldError(ValueError):
    pass


def check_exponent(p: float) -> float:
    """Raise :class:`ExponentRangeError` unless :code:`p` is in the supported range [1.1, 10]."""
    if not (P_MIN <= p <= P_MAX):
        raise ExponentRangeError(f"Exponent p={p} outside the supported range [{P_MIN}, {P_MAX}]")
    return float(p)


def conjugate_exponent(p: float) -> float:
    return p / (p - 1.0)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Piecewise linear field, one value per mesh vertex."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.mesh.num_vertices,):
            raise ValueError(
                f"ScalarField needs {self.mesh.num_vertices} values, got array of shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("ScalarField values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, mesh: Mesh, value: float) -> "ScalarField":
        return cls(mesh, np.full(mesh.num_vertices, float(value)))

    @classmethod
    def from_function(cls, mesh: Mesh, function: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "ScalarField":
        """Nodal interpolant of :code:`function(x, y)`, evaluated vectorized on the vertices."""
        values = function(mesh.vertices[:, 0], mesh.vertices[:, 1])
        return cls(mesh, np.broadcast_to(np.asarray(values, dtype=float), (mesh.num_vertices,)).copy())

    def scaled(self, factor: float) -> "ScalarField":
        return ScalarField(self.mesh, factor * self.values)

    def is_zero(self) -> bool:
        return not np.any(self.values)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Piecewise constant vector field, one 2D vector per triangle."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.mesh.num_triangles, 2):
            raise ValueError(
                f"VectorField needs shape ({self.mesh.num_triangles}, 2), got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("VectorField values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def magnitude(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)


@dataclass(frozen=True)
class Operators:
    """Sparse operators of a mesh.

    :code:`volume` maps nodal values to the 6 quadrature points of every
    triangle, :code:`boundary` to the 3 Gauss points of every boundary edge;
    the matching weights include the triangle area and the edge length.
    """

    areas: np.ndarray
    dx: sparse.csr_matrix
    dy: sparse.csr_matrix
    volume: sparse.csr_matrix
    volume_weights: np.ndarray
    boundary: sparse.csr_matrix
    boundary_weights: np.ndarray
    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    boundary_mass: sparse.csr_matrix
    volume_load: np.ndarray
    boundary_load: np.ndarray


_OPERATORS: "weakref.WeakKeyDictionary[Mesh, Operators]" = weakref.WeakKeyDictionary()


def operators(mesh: Mesh) -> Operators:
    """Assemble (once per mesh) the gradient, quadrature and matrix operators."""
    ops = _OPERATORS.get(mesh)
    if ops is None:
        ops = _assemble(mesh)
        _OPERATORS[mesh] = ops
    return ops


def _assemble(mesh: Mesh) -> Operators:
    n, m = mesh.num_vertices, mesh.num_triangles
    tri = mesh.triangles
    x = mesh.vertices[tri, 0]
    y = mesh.vertices[tri, 1]
    areas = np.asarray(mesh.areas)
    twice = (2.0 * areas)[:, None]

    bx = np.column_stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]]) / twice
    by = np.column_stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]]) / twice
    rows = np.repeat(np.arange(m), 3)
    dx = sparse.csr_matrix((bx.ravel(), (rows, tri.ravel())), shape=(m, n))
    dy = sparse.csr_matrix((by.ravel(), (rows, tri.ravel())), shape=(m, n))

    nq = len(_VOLUME_WEIGHTS)
    volume = sparse.csr_matrix(
        (
            np.tile(_VOLUME_POINTS[None, :, :], (m, 1, 1)).ravel(),
            (np.repeat(np.arange(m * nq), 3), np.repeat(tri[:, None, :], nq, axis=1).ravel()),
        ),
        shape=(m * nq, n),
    )
    volume_weights = (areas[:, None] * _VOLUME_WEIGHTS[None, :]).ravel()

    edges = mesh.boundary_edges
    k, nb = len(edges), len(_EDGE_WEIGHTS)
    edge_shape = np.column_stack([1.0 - _EDGE_POINTS, _EDGE_POINTS])
    boundary = sparse.csr_matrix(
        (
            np.tile(edge_shape[None, :, :], (k, 1, 1)).ravel(),
            (np.repeat(np.arange(k * nb), 2), np.repeat(edges[:, None, :], nb, axis=1).ravel()),
        ),
        shape=(k * nb, n),
    )
    boundary_weights = (mesh.edge_lengths[:, None] * _EDGE_WEIGHTS[None, :]).ravel()

    area_diag = sparse.diags(areas)
    stiffness = (dx.T @ area_diag @ dx + dy.T @ area_diag @ dy).tocsr()
    mass = (volume.T @ sparse.diags(volume_weights) @ volume).tocsr()
    boundary_mass = (boundary.T @ sparse.diags(boundary_weights) @ boundary).tocsr()

    logger.debug(f"Assembled operators for {mesh}")
    return Operators(
        areas=areas,
        dx=dx,
        dy=dy,
        volume=volume,
        volume_weights=volume_weights,
        boundary=boundary,
        boundary_weights=boundary_weights,
        stiffness=stiffness,
        mass=mass,
        boundary_mass=boundary_mass,
        volume_load=volume.T @ volume_weights,
        boundary_load=boundary.T @ boundary_weights,
    )


def gradient(u: ScalarField) -> VectorField:
    ops = operators(u.mesh)
    return VectorField(u.mesh, np.column_stack([ops.dx @ u.values, ops.dy @ u.values]))


def gradient_components(mesh: Mesh, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    ops = operators(mesh)
    return ops.dx @ values, ops.dy @ values


def p_dirichlet_energy(u: ScalarField, p: float) -> float:
    """:math:`\\int_\\Omega |\\nabla u|^p`, exact for P1 fields.

    Args:
        u: field
        p: exponent in [1.1, 10]

    Returns:
        float: energy

    Raises:
        ExponentRangeError: p outside the supported range

    """
    check_exponent(p)
    ops = operators(u.mesh)
    gx, gy = ops.dx @ u.values, ops.dy @ u.values
    return float(np.dot(ops.areas, np.hypot(gx, gy) ** p))


def boundary_p_norm(u: ScalarField, p: float) -> float:
    """:math:`\\int_{\\partial\\Omega} |u|^p` by 3-point Gauss quadrature per boundary edge.

    This is the p-th power of the boundary norm, as it enters the Rayleigh quotient.
    """
    check_exponent(p)
    ops = operators(u.mesh)
    return float(np.dot(ops.boundary_weights, np.abs(ops.boundary @ u.values) ** p))


def lp_norm(u: ScalarField, q: float) -> float:
    """:math:`(\\int_\\Omega |u|^q)^{1/q}` with the 6-point rule on the interpolant.

    Exponents below 1 are accepted since reverse Hölder checks use
    :code:`q = p - 1`.
    """
    if not q > 0:
        raise ExponentRangeError(f"Norm exponent q={q} must be positive")
    ops = operators(u.mesh)
    return float(np.dot(ops.volume_weights, np.abs(ops.volume @ u.values) ** q)) ** (1.0 / q)


def integrate(u: ScalarField) -> float:
    ops = operators(u.mesh)
    return float(np.dot(ops.volume_load, u.values))


def inner(u: ScalarField, v: ScalarField) -> float:
    """:math:`\\int_\\Omega u v`."""
    ops = operators(u.mesh)
    return float(u.values @ (ops.mass @ v.values))


def boundary_integral(u: ScalarField) -> float:
    ops = operators(u.mesh)
    return float(np.dot(ops.boundary_load, u.values))


def rayleigh_quotient(u: ScalarField, p: float, beta: float) -> float:
    """Robin Rayleigh quotient :math:`(\\int |\\nabla u|^p + \\beta \\int_{\\partial\\Omega} |u|^p) / \\int |u|^p`.

    Args:
        u: trial field, not identically zero
        p: exponent in [1.1, 10]
        beta: Robin parameter, any sign

    Returns:
        float: quotient

    Raises:
        ZeroFieldError: u vanishes identically

    """
    mass = lp_norm(u, check_exponent(p)) ** p
    if u.is_zero() or mass == 0.0:
        raise ZeroFieldError("Rayleigh quotient of the zero field")
    return (p_dirichlet_energy(u, p) + beta * boundary_p_norm(u, p)) / mass
