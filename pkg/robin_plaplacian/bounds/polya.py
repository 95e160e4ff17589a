import math

from .bound_base import BoundRecord, SpectralQuantities, check_quantities, make_record


class PolyaBound:
    """Pólya-type upper bound for the Laplacian (p = 2).

    .. math::

        \\lambda \\leq \\frac{\\pi^2}{4}\\frac{P^2}{|\\Omega|^2} \\Big/ \\Big(1 + \\frac{2P}{\\beta|\\Omega|}\\Big)
    """

    name = "polya_p2"
    kind = "upper"

    def applies(self, quantities: SpectralQuantities) -> bool:
        return quantities.p == 2 and quantities.beta > 0

    @check_quantities(["lambda_robin"])
    def evaluate(self, quantities: SpectralQuantities) -> BoundRecord:
        ratio = quantities.stats.perimeter / quantities.stats.area
        value = (math.pi ** 2 / 4.0) * ratio ** 2 / (1.0 + 2.0 * ratio / quantities.beta)
        return make_record(self.name, self.kind, value, quantities)
