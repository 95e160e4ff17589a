from dataclasses import asdict, dataclass, field
from functools import wraps
from typing import Any, Dict, Mapping, Optional, Protocol

from ..mesh import GeometryStats


@dataclass(frozen=True)
class SourceValues:
    """Per-source quantities for the general-source upper bound.

    Attributes:
        j_infinity: :math:`J_f(\\infty) = \\int f u_{f,\\infty}` from the Dirichlet source solve
        integral: :math:`\\int f`
        pprime_integral: :math:`\\int f^{p'}`
    """

    j_infinity: float
    integral: float
    pprime_integral: float


@dataclass(frozen=True)
class SpectralQuantities:
    """Everything a bound may need for one (domain, p, beta) point."""

    domain: str
    p: float
    beta: float
    stats: GeometryStats
    mesh_size: float
    lambda_robin: Optional[float] = None
    lambda_dirichlet: Optional[float] = None
    torsion_value: Optional[float] = None
    sources: Mapping[str, SourceValues] = field(default_factory=dict)
    slack: float = 0.02


@dataclass(frozen=True)
class BoundRecord:
    """Value of one bound and how the computed eigenvalue compares to it.

    The margin is the relative distance to the bound, positive when the
    inequality holds: :code:`(value - lambda) / |value|` for upper bounds,
    :code:`(lambda - value) / |value|` for lower bounds.
    """

    name: str
    kind: str
    value: float
    margin: float
    satisfied: bool
    slack: float
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        record = asdict(self)
        if not self.note:
            del record["note"]
        return record


class Bound(Protocol):
    """Protocol for a bound on the first Robin eigenvalue."""

    name: str
    kind: str

    def applies(self, quantities: SpectralQuantities) -> bool:
        """Whether the bound's hypotheses hold for these quantities."""

    def evaluate(self, quantities: SpectralQuantities) -> BoundRecord:
        """Compute the bound and compare it with the Robin eigenvalue.

        Args:
            quantities: computed spectral quantities of one (domain, p, beta) point

        """


class MissingQuantityError(Exception):
    pass


_INSTRUCTIONS = {
    "lambda_robin": "You can compute it with robin_eigenvalue().",
    "lambda_dirichlet": "You can compute it with dirichlet_eigenvalue().",
    "torsion_value": "You can compute it with torsion().",
    "sources": "You can compute J_f(infinity) with dirichlet_source_solve().",
}


def check_quantities(quantities):
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            # the SpectralQuantities are the first argument after self
            values = args[1] if args and len(args) > 1 else kwargs.get("quantities")

            if not isinstance(values, SpectralQuantities):
                raise ValueError("The first argument should be a SpectralQuantities record.")

            missing = [name for name in quantities if getattr(values, name) in (None, {})]

            if missing:
                instructions = " ".join(_INSTRUCTIONS[name] for name in missing if name in _INSTRUCTIONS)
                raise MissingQuantityError(f"Missing quantities: {', '.join(missing)}. {instructions}")

            return func(*args, **kwargs)

        wrapper.__doc__ = f"""{func.__doc__}

        Required quantities:
            {', '.join(map(lambda x: f':code:`{x}`', quantities))}"""

        return wrapper

    return decorator


def relative_margin(value: float, eigenvalue: float, kind: str) -> float:
    scale = abs(value) if value != 0 else 1.0
    if kind == "upper":
        return (value - eigenvalue) / scale
    return (eigenvalue - value) / scale


def make_record(name: str, kind: str, value: float, quantities: SpectralQuantities, note: str = "") -> BoundRecord:
    margin = relative_margin(value, quantities.lambda_robin, kind)
    return BoundRecord(
        name=name,
        kind=kind,
        value=float(value),
        margin=float(margin),
        satisfied=bool(margin >= -quantities.slack),
        slack=quantities.slack,
        note=note,
    )


def discretization_slack(mesh_size: float, floor: float = 0.02, per_mesh_size: float = 5.0) -> float:
    """Relative slack granted to every verdict, :code:`max(floor, per_mesh_size * h)`."""
    return max(floor, per_mesh_size * mesh_size)
