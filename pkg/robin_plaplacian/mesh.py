"""Planar triangulations of the domains on which all solvers operate.

Example:
    ::

        from robin_plaplacian import mesh

        spec = mesh.DomainSpec.parse("disk:1", target_h=0.1)
        disk = mesh.generate_mesh(spec)
        stats = mesh.geometry_stats(disk)
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import IO, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import Delaunay

logger = logging.getLogger(__name__)

DOMAIN_KINDS = ("disk", "square", "rectangle", "ellipse", "polygon", "file")

_PARAM_COUNTS = {"disk": 1, "square": 1, "rectangle": 2, "ellipse": 2}


class MeshError(ValueError):
    pass


class MeshFormatError(MeshError):
    """Malformed mesh file; the message ends with the offending line number."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"{message} at line {line_number}"
        super().__init__(message)
        self.line_number = line_number


class DegeneratePolygonError(MeshError):
    pass


@dataclass(frozen=True)
class DomainSpec:
    """Description of a planar domain and the requested mesh size.

    Disks and ellipses are centred at the origin, squares and rectangles occupy
    :code:`[0, w] x [0, h]`, polygons are given by their vertices in
    counterclockwise order.

    Args:
        kind: one of :code:`disk, square, rectangle, ellipse, polygon, file`
        params: radius, side, (width, height) or semi-axes (a, b)
        target_h: requested maximum triangle edge length
        vertices: polygon vertices, only for :code:`kind="polygon"`
        path: mesh file, only for :code:`kind="file"`
        name: identifier used in reports, defaults to the parsed domain string
    """

    kind: str
    params: Tuple[float, ...] = ()
    target_h: float = 0.1
    vertices: Tuple[Tuple[float, float], ...] = ()
    path: Optional[str] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise MeshError(
                f"Unknown domain kind '{self.kind}', expected one of {', '.join(DOMAIN_KINDS)}"
            )
        if not self.target_h > 0:
            raise MeshError(f"target_h must be positive, got {self.target_h}")

        if self.kind in _PARAM_COUNTS:
            if len(self.params) != _PARAM_COUNTS[self.kind]:
                raise MeshError(
                    f"Domain '{self.kind}' takes {_PARAM_COUNTS[self.kind]} parameter(s), got {len(self.params)}"
                )
            if any(not x > 0 for x in self.params):
                raise MeshError(f"Domain '{self.kind}' needs positive parameters, got {self.params}")
        elif self.kind == "polygon":
            object.__setattr__(self, "vertices", _validated_polygon(self.vertices))
        elif self.path is None:
            raise MeshError("Domain 'file' needs a path")

    @classmethod
    def parse(cls, text: str, target_h: float = 0.1) -> "DomainSpec":
        """Parse the command line syntax :code:`kind:params`.

        Examples: :code:`disk:1`, :code:`square:1`, :code:`rectangle:2:1`,
        :code:`ellipse:2:1`, :code:`hexagon:1`, :code:`polygon:0,0;1,0;0,1`,
        :code:`file:meshes/l_shape.mesh`.

        Args:
            text: domain string
            target_h: requested maximum triangle edge length

        Returns:
            DomainSpec: parsed domain

        """
        kind, _, rest = text.strip().partition(":")
        kind = kind.lower()
        try:
            if kind == "file":
                return cls("file", target_h=target_h, path=rest, name=text)
            if kind == "polygon":
                vertices = tuple(
                    tuple(float(c) for c in pair.split(",")) for pair in rest.split(";") if pair
                )
                return cls("polygon", target_h=target_h, vertices=vertices, name=text)
            if kind == "hexagon":
                radius = float(rest) if rest else 1.0
                return cls(
                    "polygon", target_h=target_h, vertices=regular_polygon(6, radius), name=text
                )
            params = tuple(float(x) for x in rest.split(":") if x)
        except ValueError as e:
            if isinstance(e, MeshError):
                raise
            raise MeshError(f"Could not parse domain '{text}': {e}") from e
        return cls(kind, params=params, target_h=target_h, name=text)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "file":
            return f"file:{self.path}"
        if self.kind == "polygon":
            return "polygon:" + ";".join(f"{x:g},{y:g}" for x, y in self.vertices)
        return ":".join([self.kind] + [f"{x:g}" for x in self.params])

    @property
    def is_curved(self) -> bool:
        return self.kind in ("disk", "ellipse")

    def polygon(self) -> np.ndarray:
        """Counterclockwise corner points of a polygonal domain."""
        if self.kind == "square":
            s = self.params[0]
            return np.array([[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]])
        if self.kind == "rectangle":
            w, h = self.params
            return np.array([[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]])
        if self.kind == "polygon":
            return np.array(self.vertices, dtype=float)
        raise MeshError(f"Domain '{self.kind}' is not a polygon")

    def diameter(self) -> float:
        if self.kind == "disk":
            return 2.0 * self.params[0]
        if self.kind == "ellipse":
            return 2.0 * max(self.params)
        corners = self.polygon()
        return float(np.max(np.linalg.norm(corners[:, None, :] - corners[None, :, :], axis=2)))

    def project(self, points: np.ndarray) -> np.ndarray:
        """Project points onto the analytic boundary curve of a disk or an ellipse."""
        if self.kind == "disk":
            radius = self.params[0]
            return points * (radius / np.linalg.norm(points, axis=1))[:, None]
        if self.kind == "ellipse":
            a, b = self.params
            theta = np.arctan2(points[:, 1] / b, points[:, 0] / a)
            return np.column_stack([a * np.cos(theta), b * np.sin(theta)])
        return points

    def scaled(self, factor: float) -> "DomainSpec":
        """Domain dilated by :code:`factor` about the origin."""
        if self.kind == "file":
            return replace(self, name=None, path=self.path)
        if self.kind == "polygon":
            vertices = tuple((factor * x, factor * y) for x, y in self.vertices)
            return replace(self, vertices=vertices, target_h=factor * self.target_h, name=None)
        params = tuple(factor * x for x in self.params)
        return replace(self, params=params, target_h=factor * self.target_h, name=None)


def regular_polygon(n_sides: int, radius: float) -> Tuple[Tuple[float, float], ...]:
    """Vertices of a regular polygon with the given circumradius, counterclockwise."""
    angles = 2.0 * np.pi * np.arange(n_sides) / n_sides
    return tuple((radius * math.cos(t), radius * math.sin(t)) for t in angles)


def _signed_polygon_area(corners: np.ndarray) -> float:
    x, y = corners[:, 0], corners[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


def _validated_polygon(vertices) -> Tuple[Tuple[float, float], ...]:
    if any(len(v) != 2 for v in vertices):
        raise DegeneratePolygonError("degenerate polygon: every vertex needs two coordinates")
    corners = np.array(vertices, dtype=float).reshape(-1, 2) if len(vertices) else np.zeros((0, 2))
    if len(corners) < 3:
        raise DegeneratePolygonError(f"degenerate polygon: {len(corners)} vertices, need at least 3")
    if not np.all(np.isfinite(corners)):
        raise DegeneratePolygonError("degenerate polygon: non-finite vertex coordinates")

    n = len(corners)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(corners[i], corners[(i + 1) % n], corners[j], corners[(j + 1) % n]):
                raise DegeneratePolygonError(f"degenerate polygon: edges {i} and {j} intersect")

    area = _signed_polygon_area(corners)
    if abs(area) < 1e-14:
        raise DegeneratePolygonError("degenerate polygon: zero area")
    if area < 0:
        logger.info("Polygon given clockwise, reversing vertex order")
        corners = corners[::-1]
    return tuple((float(x), float(y)) for x, y in corners)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Planar triangulation with oriented boundary edges and outward normals.

    Triangles are counterclockwise. Boundary edges are oriented so that the
    domain lies on their left, which makes :code:`normals` point outward.
    Use :func:`from_arrays` to build a mesh, it repairs orientation and derives
    the boundary.

    Args:
        vertices: (n, 2) vertex coordinates
        triangles: (m, 3) vertex indices
        boundary_edges: (k, 2) vertex indices
        normals: (k, 2) outward unit normals
        boundary_triangles: (k,) index of the triangle owning each boundary edge
        domain: analytic description used to project new boundary vertices on refinement
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    normals: np.ndarray
    boundary_triangles: np.ndarray
    domain: Optional[DomainSpec] = None

    @classmethod
    def from_arrays(
        cls,
        vertices: np.ndarray,
        triangles: np.ndarray,
        domain: Optional[DomainSpec] = None,
        boundary_edges: Optional[np.ndarray] = None,
    ) -> "Mesh":
        """Validate raw arrays and assemble a :class:`Mesh`.

        Args:
            vertices: (n, 2) coordinates
            triangles: (m, 3) vertex indices, either orientation
            domain: optional analytic domain
            boundary_edges: optional boundary edges to check against the triangulation

        Returns:
            Mesh: validated mesh

        Raises:
            MeshError: degenerate triangles, unused vertices, non-manifold edges, open boundary loops

        """
        vertices = np.array(vertices, dtype=float).reshape(-1, 2)
        triangles = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        if len(triangles) == 0:
            raise MeshError("Mesh has no triangles")
        if not np.all(np.isfinite(vertices)):
            raise MeshError("Mesh has non-finite vertex coordinates")

        signed = _signed_areas(vertices, triangles)
        scale = max(float(np.max(np.ptp(vertices, axis=0))), 1e-300) ** 2
        if np.any(np.abs(signed) <= 1e-14 * scale):
            raise MeshError(f"Mesh has {int(np.sum(np.abs(signed) <= 1e-14 * scale))} degenerate triangles")
        clockwise = signed < 0
        if np.any(clockwise):
            logger.info(f"Repairing orientation of {int(np.sum(clockwise))} clockwise triangles")
            triangles = triangles.copy()
            triangles[clockwise] = triangles[clockwise][:, [0, 2, 1]]

        used = np.zeros(len(vertices), dtype=bool)
        used[triangles.ravel()] = True
        if not np.all(used):
            raise MeshError(f"Vertex {int(np.argmin(used))} is not used by any triangle")

        edges, owners = _boundary_from_triangles(triangles)
        if boundary_edges is not None:
            _check_declared_boundary(np.asarray(boundary_edges, dtype=np.int64), edges)
        _check_closed_loops(edges)

        tangents = vertices[edges[:, 1]] - vertices[edges[:, 0]]
        lengths = np.linalg.norm(tangents, axis=1)
        normals = np.column_stack([tangents[:, 1], -tangents[:, 0]]) / lengths[:, None]

        for array in (vertices, triangles, edges, normals, owners):
            array.setflags(write=False)
        return cls(vertices, triangles, edges, normals, owners, domain)

    @property
    def name(self) -> str:
        return self.domain.label if self.domain is not None else "mesh"

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def areas(self) -> np.ndarray:
        return _signed_areas(self.vertices, self.triangles)

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        """Lengths of the boundary edges."""
        tangents = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        return np.linalg.norm(tangents, axis=1)

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_edges)

    @cached_property
    def interior_vertices(self) -> np.ndarray:
        mask = np.ones(self.num_vertices, dtype=bool)
        mask[self.boundary_vertices] = False
        return np.flatnonzero(mask)

    @cached_property
    def h(self) -> float:
        """Longest triangle edge."""
        v = self.vertices[self.triangles]
        lengths = np.linalg.norm(v - np.roll(v, -1, axis=1), axis=2)
        return float(np.max(lengths))

    @cached_property
    def diameter(self) -> float:
        points = self.vertices[self.boundary_vertices]
        best = 0.0
        for start in range(0, len(points), 512):
            chunk = points[start : start + 512]
            d = np.linalg.norm(chunk[:, None, :] - points[None, :, :], axis=2)
            best = max(best, float(np.max(d)))
        return best

    def __str__(self):
        return f"{self.name} mesh with {self.num_vertices} vertices and {self.num_triangles} triangles"


@dataclass(frozen=True)
class GeometryStats:
    """Area, perimeter, inradius and convexity of a meshed domain."""

    area: float
    perimeter: float
    inradius: float
    is_convex: bool


def _signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def _local_edges(triangles: np.ndarray) -> np.ndarray:
    """Edges (0,1), (1,2), (2,0) of all triangles, stacked block by block."""
    return np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])


def _boundary_from_triangles(triangles: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    edges = _local_edges(triangles)
    owners = np.tile(np.arange(len(triangles)), 3)
    keys = np.sort(edges, axis=1)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if np.any(counts > 2):
        raise MeshError("Mesh has edges shared by more than two triangles")
    on_boundary = counts[inverse] == 1
    return edges[on_boundary], owners[on_boundary]


def _check_declared_boundary(declared: np.ndarray, derived: np.ndarray) -> None:
    declared_keys = {tuple(sorted(e)) for e in declared.reshape(-1, 2).tolist()}
    derived_keys = {tuple(sorted(e)) for e in derived.tolist()}
    not_boundary = declared_keys - derived_keys
    if not_boundary:
        raise MeshError(f"Declared boundary edge {sorted(not_boundary)[0]} belongs to two triangles")
    missing = derived_keys - declared_keys
    if missing:
        raise MeshError(f"open boundary loop: edge {sorted(missing)[0]} is not declared as boundary")


def _check_closed_loops(edges: np.ndarray) -> None:
    outgoing = np.bincount(edges[:, 0], minlength=int(edges.max()) + 1)
    incoming = np.bincount(edges[:, 1], minlength=int(edges.max()) + 1)
    if np.any(outgoing != incoming) or np.any(outgoing > 1):
        raise MeshError("open boundary loop: boundary edges do not form closed loops")


def boundary_loops(mesh: Mesh) -> List[List[int]]:
    """Boundary vertex indices, one counterclockwise list per closed loop."""
    successor = {int(i): int(j) for i, j in mesh.boundary_edges}
    loops = []
    remaining = set(successor)
    while remaining:
        start = min(remaining)
        loop = [start]
        remaining.discard(start)
        current = successor[start]
        while current != start:
            loop.append(current)
            remaining.discard(current)
            current = successor[current]
        loops.append(loop)
    return loops


def _even_divisions(length: float, h: float) -> int:
    n = max(2, int(math.ceil(length / h - 1e-9)))
    return n + (n % 2)


def _rectangle_mesh(width: float, height: float, h: float) -> Tuple[np.ndarray, np.ndarray]:
    nx, ny = _even_divisions(width, h), _even_divisions(height, h)
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    grid_x, grid_y = np.meshgrid(xs, ys)
    vertices = np.column_stack([grid_x.ravel(), grid_y.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    a = (j * (nx + 1) + i).ravel()
    b, c, d = a + 1, a + nx + 2, a + nx + 1
    triangles = np.stack([np.column_stack([a, b, c]), np.column_stack([a, c, d])], axis=1)
    return vertices, triangles.reshape(-1, 3)


def _ellipse_mesh(a: float, b: float, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Concentric rings of points, the outermost on the curve, joined by Delaunay."""
    reach = max(a, b)
    n_rings = max(2, int(math.ceil(reach / h - 1e-9)))
    points = [np.zeros((1, 2))]
    for k in range(1, n_rings + 1):
        rho = k / n_rings
        count = max(6 * k, int(math.ceil(2.0 * np.pi * rho * reach / h)))
        theta = 2.0 * np.pi * (np.arange(count) + 0.5 * (k % 2)) / count
        points.append(np.column_stack([a * rho * np.cos(theta), b * rho * np.sin(theta)]))
    vertices = np.vstack(points)
    return vertices, Delaunay(vertices).simplices


def _points_in_polygon(points: np.ndarray, corners: np.ndarray) -> np.ndarray:
    """Even-odd rule, vectorized over points."""
    inside = np.zeros(len(points), dtype=bool)
    x, y = points[:, 0], points[:, 1]
    for (x0, y0), (x1, y1) in zip(corners, np.roll(corners, -1, axis=0)):  # noqa: B905
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < x_cross)
    return inside


def _distance_to_segments(points: np.ndarray, start: np.ndarray, end: np.ndarray) -> np.ndarray:
    """Distance from every point to the nearest of the segments, chunked over points."""
    d = end - start
    length2 = np.maximum(np.sum(d * d, axis=1), 1e-300)
    result = np.empty(len(points))
    for first in range(0, len(points), 1024):
        chunk = points[first : first + 1024]
        rel = chunk[:, None, :] - start[None, :, :]
        t = np.clip(np.sum(rel * d[None, :, :], axis=2) / length2[None, :], 0.0, 1.0)
        closest = start[None, :, :] + t[:, :, None] * d[None, :, :]
        result[first : first + 1024] = np.min(np.linalg.norm(chunk[:, None, :] - closest, axis=2), axis=1)
    return result


def _polygon_mesh(corners: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Subdivided polygon edges plus a triangular lattice inside, joined by Delaunay."""
    boundary = []
    for p0, p1 in zip(corners, np.roll(corners, -1, axis=0)):  # noqa: B905
        n = max(1, int(math.ceil(np.linalg.norm(p1 - p0) / h - 1e-9)))
        t = np.arange(n)[:, None] / n
        boundary.append(p0 + t * (p1 - p0))
    boundary = np.vstack(boundary)

    lo, hi = corners.min(axis=0), corners.max(axis=0)
    row_step = h * math.sqrt(3.0) / 2.0
    rows = np.arange(lo[1] + row_step, hi[1], row_step)
    lattice = []
    for r, y in enumerate(rows):
        xs = np.arange(lo[0] + (0.5 * h if r % 2 else h), hi[0], h)
        lattice.append(np.column_stack([xs, np.full(len(xs), y)]))
    lattice = np.vstack(lattice) if lattice else np.zeros((0, 2))
    if len(lattice):
        lattice = lattice[_points_in_polygon(lattice, corners)]
        segments_end = np.roll(corners, -1, axis=0)
        keep = _distance_to_segments(lattice, corners, segments_end) > 0.5 * h
        lattice = lattice[keep]

    vertices = np.vstack([boundary, lattice])
    triangles = Delaunay(vertices).simplices
    centroids = vertices[triangles].mean(axis=1)
    triangles = triangles[_points_in_polygon(centroids, corners)]
    areas = np.abs(_signed_areas(vertices, triangles))
    return _compact(vertices, triangles[areas > 1e-12 * h * h])


def _compact(vertices: np.ndarray, triangles: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    used = np.unique(triangles)
    renumber = np.full(len(vertices), -1, dtype=np.int64)
    renumber[used] = np.arange(len(used))
    return vertices[used], renumber[triangles]


def generate_mesh(spec: DomainSpec) -> Mesh:
    """Triangulate the domain described by :code:`spec`.

    Squares and rectangles get a structured grid with an even number of cells
    per side, disks and ellipses concentric rings whose outer ring lies on the
    curve, other polygons a lattice fill joined by a Delaunay triangulation.
    File domains are read with :func:`load_mesh`.

    Args:
        spec: domain and requested mesh size

    Returns:
        Mesh: triangulation with maximum edge length close to :code:`spec.target_h`

    Raises:
        MeshError: target_h larger than the domain diameter

    """
    if spec.kind == "file":
        return replace_domain(load_mesh(spec.path), spec)

    if spec.target_h > spec.diameter():
        raise MeshError(
            f"target_h={spec.target_h} is larger than the diameter {spec.diameter():.6g} of {spec.label}"
        )

    if spec.kind == "disk":
        vertices, triangles = _ellipse_mesh(spec.params[0], spec.params[0], spec.target_h)
    elif spec.kind == "ellipse":
        vertices, triangles = _ellipse_mesh(*spec.params, spec.target_h)
    elif spec.kind in ("square", "rectangle"):
        corners = spec.polygon()
        vertices, triangles = _rectangle_mesh(corners[2, 0], corners[2, 1], spec.target_h)
    else:
        vertices, triangles = _polygon_mesh(spec.polygon(), spec.target_h)

    mesh = Mesh.from_arrays(vertices, triangles, domain=spec)
    logger.info(f"Generated {mesh} (h={mesh.h:.4g})")
    return mesh


def replace_domain(mesh: Mesh, domain: Optional[DomainSpec]) -> Mesh:
    return replace(mesh, domain=domain)


def refine(mesh: Mesh) -> Mesh:
    """Split every triangle into four by its edge midpoints.

    Midpoints of boundary edges are projected onto the analytic curve when
    the mesh was generated from a disk or an ellipse.

    Args:
        mesh: mesh to refine

    Returns:
        Mesh: refined mesh with four times as many triangles

    """
    triangles = mesh.triangles
    m = len(triangles)
    edges = _local_edges(triangles)
    unique_edges, inverse = np.unique(np.sort(edges, axis=1), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)

    midpoints = 0.5 * (mesh.vertices[unique_edges[:, 0]] + mesh.vertices[unique_edges[:, 1]])
    if mesh.domain is not None and mesh.domain.is_curved:
        boundary_keys = {tuple(e) for e in np.sort(mesh.boundary_edges, axis=1).tolist()}
        on_boundary = np.array([tuple(e) in boundary_keys for e in unique_edges.tolist()])
        midpoints[on_boundary] = mesh.domain.project(midpoints[on_boundary])

    n = mesh.num_vertices
    m01, m12, m20 = n + inverse[:m], n + inverse[m : 2 * m], n + inverse[2 * m :]
    v0, v1, v2 = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    children = np.stack(
        [
            np.column_stack([v0, m01, m20]),
            np.column_stack([m01, v1, m12]),
            np.column_stack([m20, m12, v2]),
            np.column_stack([m01, m12, m20]),
        ],
        axis=1,
    ).reshape(-1, 3)

    return Mesh.from_arrays(np.vstack([mesh.vertices, midpoints]), children, domain=mesh.domain)


def transformed(
    mesh: Mesh, scale: float = 1.0, angle: float = 0.0, shift: Sequence[float] = (0.0, 0.0)
) -> Mesh:
    """Dilated, rotated (about the origin) and translated copy of a mesh.

    The analytic domain is kept only for pure dilations.
    """
    rotation = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    vertices = scale * mesh.vertices @ rotation.T + np.asarray(shift, dtype=float)
    domain = None
    if mesh.domain is not None and angle == 0.0 and not np.any(shift):
        domain = mesh.domain.scaled(scale)
    return Mesh.from_arrays(vertices, mesh.triangles, domain=domain)


def _incenters(mesh: Mesh) -> np.ndarray:
    v = mesh.vertices[mesh.triangles]
    opposite = np.stack(
        [
            np.linalg.norm(v[:, 1] - v[:, 2], axis=1),
            np.linalg.norm(v[:, 2] - v[:, 0], axis=1),
            np.linalg.norm(v[:, 0] - v[:, 1], axis=1),
        ],
        axis=1,
    )
    return np.einsum("mk,mkd->md", opposite, v) / opposite.sum(axis=1)[:, None]


def _is_convex(mesh: Mesh) -> bool:
    loops = boundary_loops(mesh)
    if len(loops) != 1:
        return False
    ring = mesh.vertices[loops[0]]
    incoming = ring - np.roll(ring, 1, axis=0)
    outgoing = np.roll(ring, -1, axis=0) - ring
    cross = incoming[:, 0] * outgoing[:, 1] - incoming[:, 1] * outgoing[:, 0]
    scale = np.linalg.norm(incoming, axis=1) * np.linalg.norm(outgoing, axis=1)
    return bool(np.all(cross >= -1e-10 * scale))


def distance_to_boundary(mesh: Mesh, points: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to the nearest boundary edge."""
    start = mesh.vertices[mesh.boundary_edges[:, 0]]
    end = mesh.vertices[mesh.boundary_edges[:, 1]]
    return _distance_to_segments(np.asarray(points, dtype=float).reshape(-1, 2), start, end)


def geometry_stats(mesh: Mesh) -> GeometryStats:
    """Area, perimeter, inradius and convexity of the meshed domain.

    The inradius is the largest distance to the boundary over the vertices and
    the triangle incenters, accurate to O(h).

    Args:
        mesh: mesh to measure

    Returns:
        GeometryStats: measured quantities

    """
    area = float(np.sum(mesh.areas))
    perimeter = float(np.sum(mesh.edge_lengths))
    samples = np.vstack([mesh.vertices, _incenters(mesh)])
    inradius = float(np.max(distance_to_boundary(mesh, samples)))
    return GeometryStats(area=area, perimeter=perimeter, inradius=inradius, is_convex=_is_convex(mesh))


def _parse_number(token: str, kind, line_number: int):
    try:
        return kind(token)
    except ValueError:
        raise MeshFormatError(f"could not parse '{token}'", line_number) from None


def load_mesh(mesh_file: Union[str, IO]) -> Mesh:
    """Read a mesh in the text format written by :func:`save_mesh`.

    One record per line: :code:`v <x> <y>`, :code:`t <i> <j> <k>`,
    :code:`b <i> <j>`, 0-based indices in vertex order, :code:`#` starts a
    comment. Clockwise triangles are repaired, boundary records are checked
    against the triangulation (and derived from it when absent).

    Args:
        mesh_file: path or open text handle

    Returns:
        Mesh: validated mesh

    Raises:
        MeshFormatError: parse errors and dangling vertex indices, with the line number

    """
    handle = mesh_file
    if isinstance(mesh_file, str):
        handle = open(mesh_file)

    vertices, triangles, boundary = [], [], []
    triangle_lines, boundary_lines = [], []
    try:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tag, *tokens = line.split()
            if tag == "v" and len(tokens) == 2:
                vertices.append([_parse_number(t, float, line_number) for t in tokens])
            elif tag == "t" and len(tokens) == 3:
                triangles.append([_parse_number(t, int, line_number) for t in tokens])
                triangle_lines.append(line_number)
            elif tag == "b" and len(tokens) == 2:
                boundary.append([_parse_number(t, int, line_number) for t in tokens])
                boundary_lines.append(line_number)
            else:
                raise MeshFormatError(f"malformed record '{line}'", line_number)
    finally:
        if isinstance(mesh_file, str):
            handle.close()

    n = len(vertices)
    for records, lines in ((triangles, triangle_lines), (boundary, boundary_lines)):
        for record, line_number in zip(records, lines):  # noqa: B905
            if any(i < 0 or i >= n for i in record):
                raise MeshFormatError("dangling index", line_number)

    mesh = Mesh.from_arrays(
        np.array(vertices, dtype=float),
        np.array(triangles, dtype=np.int64),
        boundary_edges=np.array(boundary, dtype=np.int64) if boundary else None,
    )
    logger.info(f"Loaded {mesh}")
    return mesh


def save_mesh(mesh: Mesh, mesh_file: Union[str, IO]) -> None:
    """Write a mesh in the text format read by :func:`load_mesh`."""
    lines = [f"# {mesh}"]
    lines += [f"v {x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines += [f"t {i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines += [f"b {i} {j}" for i, j in mesh.boundary_edges.tolist()]
    text = "\n".join(lines) + "\n"
    if isinstance(mesh_file, str):
        with open(mesh_file, "w") as f:
            f.write(text)
    else:
        mesh_file.write(text)


def ensure_meshes(specs: Iterable[DomainSpec], refinements: int = 0) -> List[Mesh]:
    """Generate and refine a mesh per domain."""
    meshes = []
    for spec in specs:
        mesh = generate_mesh(spec)
        for _ in range(refinements):
            mesh = refine(mesh)
        meshes.append(mesh)
    return meshes
