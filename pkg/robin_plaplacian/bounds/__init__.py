# flake8: noqa

"""Bounds on the first Robin eigenvalue of the p-Laplacian and the checks behind them.

Example:
    ::

        from robin_plaplacian import bounds, eigensolve, mesh

        disk = mesh.generate_mesh(mesh.DomainSpec.parse("disk:1", target_h=0.05))
        report = bounds.evaluate_upper_bounds(
            disk,
            2,
            1.0,
            eigensolve.robin_eigenvalue(disk, 2, 1.0),
            eigensolve.dirichlet_eigenvalue(disk, 2),
            eigensolve.torsion(disk, 2),
            mesh.geometry_stats(disk),
        )
        report.all_satisfied
"""

# Import all bounds so they can be imported from the robin_plaplacian.bounds subpackage.

from .bound_base import (
    Bound,
    BoundRecord,
    MissingQuantityError,
    SourceValues,
    SpectralQuantities,
    discretization_slack,
)
from .certificates import (
    CertificateRecord,
    EigenCertificateRecord,
    eigen_certificate,
    eigenfunction_source,
    lower_bound_certificate,
    nu_p_estimate,
    pprime_integral,
    source_family,
    source_values,
)
from .dirichlet_upper import DirichletUpperBound
from .duality import (
    ConvexityRecord,
    DualityRecord,
    convexity_check,
    dual_objective,
    duality_check,
    thompson_gap,
)
from .hersch import HerschBound
from .isoperimetric import FaberKrahnRecord, faber_krahn_check, refinement_level
from .limits import (
    GapRecord,
    PolyaTorsionRecord,
    SlopeRecord,
    beta_infinity_gap,
    limit_slope_beta0,
    polya_torsion_product,
    richardson_limit,
)
from .polya import PolyaBound
from .report import (
    CSV_COLUMNS,
    BoundsReport,
    atomic_write,
    default_bounds,
    evaluate_upper_bounds,
    reports_to_frame,
    sort_reports,
    to_json,
    write_frame_csv,
    write_reports_json,
)
from .source_upper import SourceUpperBound
from .torsion_upper import TorsionUpperBound
from .trivial_min import TrivialMinBound
