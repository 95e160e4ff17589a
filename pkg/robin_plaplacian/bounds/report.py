"""Assembly and serialization of bound reports."""

import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

from .. import config
from ..eigensolve import EigenResult
from ..mesh import GeometryStats, Mesh
from .bound_base import BoundRecord, SourceValues, SpectralQuantities, discretization_slack
from .certificates import CertificateRecord
from .dirichlet_upper import DirichletUpperBound
from .hersch import HerschBound
from .polya import PolyaBound
from .source_upper import SourceUpperBound
from .torsion_upper import TorsionUpperBound
from .trivial_min import TrivialMinBound

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "domain",
    "p",
    "beta",
    "lambda",
    "upper_dirichlet",
    "upper_torsion",
    "trivial_min",
    "polya_p2",
    "hersch",
    "all_satisfied",
]


def default_bounds() -> List:
    return [DirichletUpperBound(), TorsionUpperBound(), TrivialMinBound(), PolyaBound(), HerschBound()]


@dataclass(frozen=True)
class BoundsReport:
    """All bounds of one (domain, p, beta) point with their verdicts."""

    domain: str
    p: float
    beta: float
    lambda_robin: float
    lambda_dirichlet: Optional[float]
    torsion_value: Optional[float]
    mesh_size: float
    slack: float
    bounds: Dict[str, BoundRecord]
    certificates: Tuple[CertificateRecord, ...] = ()
    reciprocal_forms: Dict[str, float] = field(default_factory=dict)
    checks: Dict[str, Any] = field(default_factory=dict)

    @property
    def all_satisfied(self) -> bool:
        return not self.violations

    @property
    def violations(self) -> List[str]:
        names = [name for name, record in self.bounds.items() if not record.satisfied]
        names += [f"certificate[{c.source_id}]" for c in self.certificates if not c.satisfied]
        return names + [f"check[{name}]" for name, record in self.checks.items() if not record.satisfied]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "domain": self.domain,
            "p": self.p,
            "beta": self.beta,
            "lambda": self.lambda_robin,
            "lambda_dirichlet": self.lambda_dirichlet,
            "torsion_value": self.torsion_value,
            "mesh_size": self.mesh_size,
            "slack": self.slack,
            "inradius": "euclidean",
            "bounds": {name: record.to_dict() for name, record in self.bounds.items()},
            "certificates": [certificate.to_dict() for certificate in self.certificates],
            "reciprocal_forms": dict(self.reciprocal_forms),
            "checks": {name: record.to_dict() for name, record in self.checks.items()},
            "all_satisfied": self.all_satisfied,
        }

    def summary(self) -> str:
        verdict = "ok" if self.all_satisfied else "VIOLATED " + ",".join(self.violations)
        margins = " ".join(f"{name}={record.margin:+.2%}" for name, record in self.bounds.items())
        return f"{self.domain} p={self.p:g} beta={self.beta:g} lambda={self.lambda_robin:.6g} {margins} [{verdict}]"


def evaluate_upper_bounds(
    mesh: Mesh,
    p: float,
    beta: float,
    eigen: Optional[EigenResult],
    dirichlet: Optional[EigenResult],
    torsion_value: Optional[float],
    stats: GeometryStats,
    sources: Optional[Mapping[str, SourceValues]] = None,
    certificates: Sequence[CertificateRecord] = (),
    nu_estimate: Optional[float] = None,
    slack: Optional[float] = None,
    checks: Optional[Mapping[str, Any]] = None,
) -> BoundsReport:
    """Evaluate every applicable bound against the computed Robin eigenvalue.

    Example:
        ::

            report = evaluate_upper_bounds(disk, 2, 1.0, eigen, dirichlet, torsion(disk, 2), geometry_stats(disk))
            report.bounds["upper_torsion"].margin  # about 0.014

    Args:
        mesh: triangulation all inputs were computed on
        p: exponent
        beta: Robin parameter
        eigen: Robin eigenpair
        dirichlet: Dirichlet eigenpair
        torsion_value: p-torsional rigidity
        stats: geometry of the mesh
        sources: per-source values for the general-source bounds
        certificates: lower-bound certificates to attach
        nu_estimate: family estimate of nu_p, used for the displayed lower-bound right-hand side only
        slack: relative slack of every verdict, defaults to :code:`max(slackFloor, slackPerMeshSize * h)`
        checks: named records with a :code:`satisfied` verdict and :code:`to_dict`, counted in :code:`all_satisfied`

    Returns:
        BoundsReport: bound values, margins and verdicts

    Raises:
        MissingQuantityError: a quantity needed by an applicable bound is missing

    """
    if slack is None:
        slack = discretization_slack(
            mesh.h, config.getSetting("slackFloor"), config.getSetting("slackPerMeshSize")
        )
    sources = dict(sources or {})
    quantities = SpectralQuantities(
        domain=mesh.name,
        p=p,
        beta=beta,
        stats=stats,
        mesh_size=mesh.h,
        lambda_robin=eigen.eigenvalue if eigen is not None else None,
        lambda_dirichlet=dirichlet.eigenvalue if dirichlet is not None else None,
        torsion_value=torsion_value,
        sources=sources,
        slack=slack,
    )

    records = {}
    for bound in default_bounds() + [SourceUpperBound(source_id) for source_id in sorted(sources)]:
        if bound.applies(quantities):
            records[bound.name] = bound.evaluate(quantities)

    report = BoundsReport(
        domain=mesh.name,
        p=p,
        beta=beta,
        lambda_robin=quantities.lambda_robin,
        lambda_dirichlet=quantities.lambda_dirichlet,
        torsion_value=torsion_value,
        mesh_size=mesh.h,
        slack=slack,
        bounds=records,
        certificates=tuple(certificates),
        reciprocal_forms=_reciprocal_forms(quantities, nu_estimate),
        checks=dict(checks or {}),
    )
    logger.info(report.summary())
    return report


def _reciprocal_forms(quantities: SpectralQuantities, nu_estimate: Optional[float]) -> Dict[str, float]:
    lam, p, beta = quantities.lambda_robin, quantities.p, quantities.beta
    if lam is None or lam <= 0:
        return {}
    forms = {"reciprocal_lambda": 1.0 / lam, "reciprocal_lambda_root": lam ** (-1.0 / (p - 1.0))}
    if nu_estimate is not None and beta > 0:
        area, perimeter = quantities.stats.area, quantities.stats.perimeter
        forms["nu_estimate"] = nu_estimate
        forms["lower_bound_rhs"] = 1.0 / nu_estimate + (area / (beta * perimeter)) ** (1.0 / (p - 1.0))
    return forms


def sort_reports(reports: Sequence[BoundsReport]) -> List[BoundsReport]:
    return sorted(reports, key=lambda r: (r.domain, r.p, r.beta))


def reports_to_frame(reports: Sequence[BoundsReport]) -> pd.DataFrame:
    """One row per report, with the bound values in the CSV column order."""
    rows = []
    for report in sort_reports(reports):
        row = {"domain": report.domain, "p": report.p, "beta": report.beta, "lambda": report.lambda_robin}
        for name in CSV_COLUMNS[4:-1]:
            row[name] = report.bounds[name].value if name in report.bounds else math.nan
        row["all_satisfied"] = report.all_satisfied
        rows.append(row)
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def atomic_write(path: str, text: str) -> None:
    """Write through a temporary file in the same directory and rename over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(handle, "w", newline="") as f:
            f.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise


def to_json(records: Sequence[Dict[str, Any]]) -> str:
    return json.dumps(_json_safe(list(records)), indent=2, allow_nan=False) + "\n"


def write_reports_json(reports: Sequence[BoundsReport], path: str) -> None:
    atomic_write(path, to_json([report.to_dict() for report in sort_reports(reports)]))


def write_frame_csv(df: pd.DataFrame, path: str) -> None:
    atomic_write(path, df.to_csv(index=False, float_format="%.12g", lineterminator="\n"))
