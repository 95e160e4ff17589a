import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robin_plaplacian.mesh import (
    DegeneratePolygonError,
    DomainSpec,
    Mesh,
    MeshError,
    MeshFormatError,
    boundary_loops,
    distance_to_boundary,
    ensure_meshes,
    generate_mesh,
    geometry_stats,
    load_mesh,
    refine,
    save_mesh,
    transformed,
)

single_triangle_file = """# one triangle
v 0 0
v 1 0   # right corner
v 0 1
t 0 1 2
b 0 1
b 1 2
b 2 0
"""


class TestDomainSpec:
    """Test parsing and validation of domain descriptions."""

    def test_parse_rectangle(self):
        """Test that a rectangle string is parsed into its two side lengths."""
        spec = DomainSpec.parse("rectangle:2:1", target_h=0.2)

        assert spec.kind == "rectangle"
        assert spec.params == (2.0, 1.0)
        assert spec.target_h == 0.2
        assert spec.label == "rectangle:2:1"

    def test_parse_hexagon(self):
        """Test that a hexagon becomes a regular six-sided polygon with the given circumradius."""
        spec = DomainSpec.parse("hexagon:1")

        assert spec.kind == "polygon"
        assert len(spec.vertices) == 6
        assert spec.label == "hexagon:1"
        np.testing.assert_allclose(np.linalg.norm(spec.polygon(), axis=1), 1.0)

    def test_clockwise_polygon_is_reversed(self):
        """Test that a clockwise polygon is stored counterclockwise."""
        spec = DomainSpec.parse("polygon:0,0;0,1;1,1;1,0")
        x, y = spec.polygon()[:, 0], spec.polygon()[:, 1]

        assert 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "text",
        ["triangle:1", "disk:-1", "disk:1:2", "rectangle:1", "disk:abc"],
    )
    def test_invalid_domains(self, text):
        """Test that unknown kinds, wrong parameter counts and nonpositive parameters are rejected.

        Args:
            text: invalid domain string

        """
        with pytest.raises(MeshError):
            DomainSpec.parse(text)

    @pytest.mark.parametrize(
        "text",
        ["polygon:0,0;1,1;1,0;0,1", "polygon:0,0;1,0;2,0", "polygon:0,0;1,0"],
    )
    def test_degenerate_polygons(self, text):
        """Test that self-intersecting, collinear and too short polygons are rejected.

        Args:
            text: degenerate polygon string

        """
        with pytest.raises(DegeneratePolygonError, match="degenerate polygon"):
            DomainSpec.parse(text)

    def test_nonpositive_target_h(self):
        """Test that the mesh size must be positive."""
        with pytest.raises(MeshError):
            DomainSpec.parse("disk:1", target_h=0.0)


class TestGenerateMesh:
    """Test the meshers for the built-in domain kinds."""

    def test_square_is_structured(self, unit_square):
        """Test the vertex and triangle counts of the structured square mesh.

        Args:
            unit_square: unit square with h = 0.1

        """
        assert unit_square.num_vertices == 121
        assert unit_square.num_triangles == 200
        assert len(unit_square.boundary_vertices) == 40
        assert unit_square.h == pytest.approx(math.sqrt(2) * 0.1)
        assert str(unit_square) == "square:1 mesh with 121 vertices and 200 triangles"

    def test_square_geometry(self, unit_square):
        """Test area, perimeter, inradius and convexity of the unit square.

        Args:
            unit_square: unit square with h = 0.1

        """
        stats = geometry_stats(unit_square)

        assert stats.area == pytest.approx(1.0, rel=1e-12)
        assert stats.perimeter == pytest.approx(4.0, rel=1e-12)
        assert stats.inradius == pytest.approx(0.5, abs=1e-12)
        assert stats.is_convex

    def test_disk_geometry(self, unit_disk):
        """Test that the disk mesh approximates the unit disk and has its boundary on the circle.

        Args:
            unit_disk: unit disk with h = 0.1

        """
        stats = geometry_stats(unit_disk)

        assert stats.area == pytest.approx(math.pi, rel=0.01)
        assert stats.perimeter == pytest.approx(2 * math.pi, rel=0.01)
        assert stats.inradius == pytest.approx(1.0, abs=0.01)
        assert stats.is_convex
        np.testing.assert_allclose(
            np.linalg.norm(unit_disk.vertices[unit_disk.boundary_vertices], axis=1), 1.0, rtol=1e-12
        )
        assert unit_disk.h < 0.2

    def test_outward_normals(self, unit_disk):
        """Test that boundary normals are unit vectors pointing away from the origin.

        Args:
            unit_disk: unit disk with h = 0.1

        """
        midpoints = unit_disk.vertices[unit_disk.boundary_edges].mean(axis=1)

        np.testing.assert_allclose(np.linalg.norm(unit_disk.normals, axis=1), 1.0)
        assert np.all(np.einsum("kd,kd->k", unit_disk.normals, midpoints) > 0)

    def test_counterclockwise_triangles(self, unit_disk, l_shape):
        """Test that all generated triangles have positive area.

        Args:
            unit_disk: unit disk with h = 0.1
            l_shape: L-shaped polygon with h = 0.2

        """
        assert np.all(unit_disk.areas > 0)
        assert np.all(l_shape.areas > 0)

    def test_l_shape_is_not_convex(self, l_shape):
        """Test the geometry of a non-convex polygon.

        Args:
            l_shape: L-shaped polygon with h = 0.2

        """
        stats = geometry_stats(l_shape)

        assert not stats.is_convex
        assert stats.area == pytest.approx(3.0, rel=0.02)
        assert stats.perimeter == pytest.approx(8.0, rel=0.02)
        assert len(boundary_loops(l_shape)) == 1

    def test_hexagon(self):
        """Test that the hexagon mesh matches the regular hexagon's area and perimeter."""
        hexagon = generate_mesh(DomainSpec.parse("hexagon:1", target_h=0.2))
        stats = geometry_stats(hexagon)

        assert stats.area == pytest.approx(3 * math.sqrt(3) / 2, rel=0.02)
        assert stats.perimeter == pytest.approx(6.0, rel=0.02)
        assert stats.inradius == pytest.approx(math.sqrt(3) / 2, abs=0.2)
        assert stats.is_convex

    def test_target_h_larger_than_diameter(self):
        """Test that a mesh size exceeding the domain diameter is rejected."""
        with pytest.raises(MeshError, match="larger than the diameter"):
            generate_mesh(DomainSpec.parse("disk:1", target_h=5.0))

    def test_boundary_loop_of_square(self, unit_square):
        """Test that the square has a single boundary loop through all boundary vertices.

        Args:
            unit_square: unit square with h = 0.1

        """
        loops = boundary_loops(unit_square)

        assert len(loops) == 1
        assert sorted(loops[0]) == unit_square.boundary_vertices.tolist()

    def test_distance_to_boundary(self, unit_square):
        """Test distances from a few points of the unit square to its boundary.

        Args:
            unit_square: unit square with h = 0.1

        """
        distances = distance_to_boundary(unit_square, np.array([[0.5, 0.5], [0.1, 0.5], [0.0, 0.3]]))

        np.testing.assert_allclose(distances, [0.5, 0.1, 0.0], atol=1e-12)


class TestRefineAndTransform:
    """Test refinement and rigid transformations of meshes."""

    def test_refine_square(self, coarse_square):
        """Test that refinement quadruples the triangles and halves the mesh size.

        Args:
            coarse_square: unit square with h = 0.25

        """
        refined = refine(coarse_square)

        assert refined.num_triangles == 4 * coarse_square.num_triangles
        assert refined.h == pytest.approx(coarse_square.h / 2)
        assert geometry_stats(refined).area == pytest.approx(1.0, rel=1e-12)

    def test_refine_disk_projects_boundary(self, coarse_disk):
        """Test that new boundary vertices of a refined disk lie on the circle.

        Args:
            coarse_disk: unit disk with h = 0.25

        """
        refined = refine(coarse_disk)

        np.testing.assert_allclose(
            np.linalg.norm(refined.vertices[refined.boundary_vertices], axis=1), 1.0, rtol=1e-12
        )
        assert abs(geometry_stats(refined).area - math.pi) < abs(geometry_stats(coarse_disk).area - math.pi)

    def test_ensure_meshes_refines(self):
        """Test that ensure_meshes applies the requested number of refinements."""
        (square,) = ensure_meshes([DomainSpec.parse("square:1", target_h=0.5)], refinements=2)

        assert square.num_triangles == 16 * 8

    def test_dilation(self, coarse_disk):
        """Test that a dilation scales the area and keeps the analytic domain.

        Args:
            coarse_disk: unit disk with h = 0.25

        """
        doubled = transformed(coarse_disk, scale=2.0)

        assert geometry_stats(doubled).area == pytest.approx(4 * geometry_stats(coarse_disk).area, rel=1e-12)
        assert doubled.name == "disk:2"

    @settings(max_examples=20, deadline=None)
    @given(
        angle=st.floats(min_value=-math.pi, max_value=math.pi),
        dx=st.floats(min_value=-10, max_value=10),
        dy=st.floats(min_value=-10, max_value=10),
    )
    def test_rigid_motion_preserves_geometry(self, angle, dx, dy):
        """Test that rotations and translations leave area and perimeter unchanged.

        Args:
            angle: rotation angle
            dx: horizontal shift
            dy: vertical shift

        """
        square = generate_mesh(DomainSpec.parse("square:1", target_h=0.5))
        moved = transformed(square, angle=angle, shift=(dx, dy))
        stats = geometry_stats(moved)

        assert stats.area == pytest.approx(1.0, rel=1e-9)
        assert stats.perimeter == pytest.approx(4.0, rel=1e-9)


class TestMeshIO:
    """Test reading, writing and validating mesh files."""

    def test_load_single_triangle(self):
        """Test that comments are skipped and the boundary is read."""
        mesh = load_mesh(io.StringIO(single_triangle_file))

        assert mesh.num_vertices == 3
        assert mesh.num_triangles == 1
        assert mesh.areas[0] == pytest.approx(0.5)
        assert len(mesh.boundary_edges) == 3

    def test_save_and_load(self, coarse_disk, tmp_path):
        """Test that a saved mesh is read back with identical arrays.

        Args:
            coarse_disk: unit disk with h = 0.25
            tmp_path: temporary directory

        """
        path = str(tmp_path / "disk.mesh")
        save_mesh(coarse_disk, path)
        loaded = load_mesh(path)

        np.testing.assert_array_equal(loaded.vertices, coarse_disk.vertices)
        np.testing.assert_array_equal(loaded.triangles, coarse_disk.triangles)

    def test_file_domain(self, coarse_square, tmp_path):
        """Test that a file domain is loaded by generate_mesh and named after the file.

        Args:
            coarse_square: unit square with h = 0.25
            tmp_path: temporary directory

        """
        path = str(tmp_path / "square.mesh")
        save_mesh(coarse_square, path)
        mesh = generate_mesh(DomainSpec.parse(f"file:{path}"))

        assert mesh.name == f"file:{path}"
        assert mesh.num_triangles == coarse_square.num_triangles

    @pytest.mark.parametrize(
        "text,line_number",
        [
            ("v 0 0\nv 1 0\nv 0 1\nt 0 1 3\n", 4),
            ("v 0 zero\n", 1),
            ("v 0 0\nq 1 2\n", 2),
            ("v 0 0\nv 1 0\nv 0 1\nt 0 1 2\nb 0 7\n", 5),
        ],
    )
    def test_format_errors_report_line(self, text, line_number):
        """Test that parse errors and dangling indices report their line number.

        Args:
            text: malformed mesh file
            line_number: expected offending line

        """
        with pytest.raises(MeshFormatError) as error:
            load_mesh(io.StringIO(text))

        assert error.value.line_number == line_number
        assert str(error.value).endswith(f"line {line_number}")


class TestFromArrays:
    """Test validation and repair of raw mesh arrays."""

    def test_clockwise_triangle_is_repaired(self):
        """Test that a clockwise triangle is reoriented."""
        mesh = Mesh.from_arrays([[0, 0], [1, 0], [0, 1]], [[0, 2, 1]])

        assert mesh.areas[0] == pytest.approx(0.5)

    def test_degenerate_triangle(self):
        """Test that a triangle with collinear corners is rejected."""
        with pytest.raises(MeshError, match="degenerate"):
            Mesh.from_arrays([[0, 0], [1, 0], [2, 0]], [[0, 1, 2]])

    def test_unused_vertex(self):
        """Test that a vertex outside every triangle is rejected."""
        with pytest.raises(MeshError, match="not used"):
            Mesh.from_arrays([[0, 0], [1, 0], [0, 1], [5, 5]], [[0, 1, 2]])

    def test_non_manifold_edge(self):
        """Test that an edge shared by three triangles is rejected."""
        vertices = [[0, 0], [1, 0], [0, 1], [0, -1], [0.5, 2]]
        with pytest.raises(MeshError, match="more than two"):
            Mesh.from_arrays(vertices, [[0, 1, 2], [0, 1, 3], [0, 1, 4]])

    def test_incomplete_declared_boundary(self):
        """Test that a declared boundary missing an edge is reported as an open loop."""
        with pytest.raises(MeshError, match="open boundary loop"):
            Mesh.from_arrays([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]], boundary_edges=[[0, 1], [1, 2]])
