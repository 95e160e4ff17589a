from .bound_base import BoundRecord, SpectralQuantities, check_quantities, make_record


class SourceUpperBound:
    """Upper bound from a nonnegative source f and its Dirichlet solution.

    .. math::

        \\frac{1}{\\lambda^{1/(p-1)}} \\geq \\frac{J_f(\\infty)}{\\int f^{p'}}
        + \\frac{(\\int f)^{p'}}{(\\beta P)^{1/(p-1)} \\int f^{p'}}

    With f = 1 this is the torsion bound.

    Example:
        ::

            bound = SourceUpperBound("bump_center")
            record = bound.evaluate(quantities)
    """

    kind = "upper"

    def __init__(self, source_id: str):
        """
        Initialize the source this bound is evaluated for.

        Args:
            source_id: key into :code:`SpectralQuantities.sources`

        """
        self.source_id = source_id
        self.name = f"upper_source[{source_id}]"

    def applies(self, quantities: SpectralQuantities) -> bool:
        return quantities.beta > 0 and self.source_id in quantities.sources

    @check_quantities(["lambda_robin", "sources"])
    def evaluate(self, quantities: SpectralQuantities) -> BoundRecord:
        p, beta = quantities.p, quantities.beta
        source = quantities.sources[self.source_id]
        pprime = p / (p - 1.0)
        reciprocal = (
            source.j_infinity / source.pprime_integral
            + source.integral ** pprime
            / ((beta * quantities.stats.perimeter) ** (1.0 / (p - 1.0)) * source.pprime_integral)
        )
        return make_record(self.name, self.kind, reciprocal ** (-(p - 1.0)), quantities)
