from .bound_base import BoundRecord, SpectralQuantities, check_quantities, make_record


class TorsionUpperBound:
    """Upper bound through the p-torsional rigidity.

    .. math::

        \\frac{1}{\\lambda^{1/(p-1)}} \\geq \\frac{T_p}{|\\Omega|} + \\Big(\\frac{|\\Omega|}{\\beta P}\\Big)^{1/(p-1)}
    """

    name = "upper_torsion"
    kind = "upper"

    def applies(self, quantities: SpectralQuantities) -> bool:
        return quantities.beta > 0

    @check_quantities(["lambda_robin", "torsion_value"])
    def evaluate(self, quantities: SpectralQuantities) -> BoundRecord:
        """Solves the reciprocal inequality for lambda.

        Args:
            quantities: computed spectral quantities

        Returns:
            BoundRecord: bound value and margin

        """
        p, beta = quantities.p, quantities.beta
        area, perimeter = quantities.stats.area, quantities.stats.perimeter
        reciprocal = quantities.torsion_value / area + (area / (beta * perimeter)) ** (1.0 / (p - 1.0))
        return make_record(self.name, self.kind, reciprocal ** (-(p - 1.0)), quantities)
