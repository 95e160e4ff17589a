import dataclasses
import logging
import math

import pytest

from robin_plaplacian.bounds import (
    DirichletUpperBound,
    HerschBound,
    MissingQuantityError,
    PolyaBound,
    SourceUpperBound,
    TorsionUpperBound,
    TrivialMinBound,
)
from robin_plaplacian.mesh import GeometryStats


class TestTorsionUpperBound:
    """Test the torsion upper bound."""

    def test_disk(self, disk_quantities):
        """Test the bound value 1.6 for the unit disk with p = 2 and beta = 1.

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        record = TorsionUpperBound().evaluate(disk_quantities)

        assert record.name == "upper_torsion"
        assert record.value == pytest.approx(1.6, rel=1e-12)
        assert record.margin == pytest.approx((1.6 - disk_quantities.lambda_robin) / 1.6, rel=1e-9)
        assert record.satisfied

    def test_violation(self, disk_quantities):
        """Test that an eigenvalue above the bound is flagged.

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        record = TorsionUpperBound().evaluate(dataclasses.replace(disk_quantities, lambda_robin=2.0))

        assert record.margin < 0
        assert not record.satisfied

    def test_not_applicable_for_nonpositive_beta(self, disk_quantities):
        """Test that the bound is skipped for beta <= 0.

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        assert not TorsionUpperBound().applies(dataclasses.replace(disk_quantities, beta=0.0))


class TestDirichletUpperBound:
    """Test the Dirichlet upper bound with the reverse Hölder constant."""

    def test_disk(self, disk_quantities):
        """Test the bound value for the unit disk, with K-bar = j^2 / (4 pi).

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        k_bar = disk_quantities.lambda_dirichlet / (4 * math.pi)
        reciprocal = 1 / disk_quantities.lambda_dirichlet + k_bar / (2 * math.pi)

        record = DirichletUpperBound().evaluate(disk_quantities)

        assert record.value == pytest.approx(1 / reciprocal, rel=1e-6)
        assert record.value == pytest.approx(4.0624, rel=1e-4)
        assert record.note.startswith("kbar=")
        assert record.satisfied

    def test_missing_dirichlet(self, disk_quantities):
        """Test that the Dirichlet eigenvalue is required.

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        with pytest.raises(MissingQuantityError, match="dirichlet_eigenvalue"):
            DirichletUpperBound().evaluate(dataclasses.replace(disk_quantities, lambda_dirichlet=None))


class TestTrivialMinBound:
    """Test the bound from the constant and Dirichlet test functions."""

    def test_disk(self, disk_quantities):
        """Test that the constant function wins for beta = 1 on the unit disk.

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        assert TrivialMinBound().evaluate(disk_quantities).value == pytest.approx(2.0)

    def test_large_beta(self, disk_quantities):
        """Test that the Dirichlet eigenvalue wins for large beta.

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        quantities = dataclasses.replace(disk_quantities, beta=100.0, lambda_robin=5.7)

        assert TrivialMinBound().evaluate(quantities).value == pytest.approx(disk_quantities.lambda_dirichlet)


class TestPolyaBound:
    """Test the Pólya-type bound for the Laplacian."""

    def test_disk(self, disk_quantities):
        """Test the bound value pi^2 / 5 for the unit disk with beta = 1.

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        record = PolyaBound().evaluate(disk_quantities)

        assert record.value == pytest.approx(math.pi**2 / 5, rel=1e-12)
        assert record.satisfied

    def test_only_for_p2(self, disk_quantities):
        """Test that the bound only applies for p = 2.

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        assert PolyaBound().applies(disk_quantities)
        assert not PolyaBound().applies(dataclasses.replace(disk_quantities, p=3.0))


class TestHerschBound:
    """Test the Hersch-type lower bound."""

    def test_disk(self, disk_quantities):
        """Test that the bound is a lower bound with a positive margin on the disk.

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        record = HerschBound().evaluate(disk_quantities)
        half = math.pi / 2

        assert record.kind == "lower"
        assert record.value == pytest.approx(half**2 / (1 + half) ** 2, rel=1e-12)
        assert record.margin > 0
        assert record.satisfied

    def test_non_convex_is_skipped(self, disk_quantities, caplog):
        """Test that non-convex domains are skipped with a warning.

        Args:
            disk_quantities: exact quantities of the unit disk
            caplog: log capture

        """
        stats = GeometryStats(area=3.0, perimeter=8.0, inradius=0.5, is_convex=False)
        quantities = dataclasses.replace(disk_quantities, domain="l_shape", stats=stats)

        with caplog.at_level(logging.WARNING):
            assert not HerschBound().applies(quantities)

        assert "not convex" in caplog.text


class TestSourceUpperBound:
    """Test the general-source upper bound."""

    def test_constant_source_is_torsion_bound(self, disk_quantities):
        """Test that the constant source reproduces the torsion bound.

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        record = SourceUpperBound("one").evaluate(disk_quantities)

        assert record.name == "upper_source[one]"
        assert record.value == pytest.approx(TorsionUpperBound().evaluate(disk_quantities).value, rel=1e-12)

    def test_unknown_source(self, disk_quantities):
        """Test that the bound does not apply without values for its source.

        Args:
            disk_quantities: exact quantities of the unit disk

        """
        assert not SourceUpperBound("bump").applies(disk_quantities)
