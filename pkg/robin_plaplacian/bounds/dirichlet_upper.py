from .. import radial
from .bound_base import BoundRecord, SpectralQuantities, check_quantities, make_record


class DirichletUpperBound:
    """Upper bound through the Dirichlet eigenvalue and the reverse Hölder constant of the matched ball.

    .. math::

        \\frac{1}{\\lambda^{1/(p-1)}} \\geq \\frac{1}{(\\lambda^D)^{1/(p-1)}} + \\frac{\\bar K}{(\\beta P)^{1/(p-1)}}

    Example:
        ::

            bound = DirichletUpperBound()
            if bound.applies(quantities):
                record = bound.evaluate(quantities)
    """

    name = "upper_dirichlet"
    kind = "upper"

    def __init__(self, dimension: int = 2):
        """
        Initialize the dimension used for the matched ball.

        Args:
            dimension: space dimension of the ball whose Dirichlet eigenvalue equals the domain's

        """
        self.dimension = dimension

    def applies(self, quantities: SpectralQuantities) -> bool:
        return quantities.beta > 0

    @check_quantities(["lambda_robin", "lambda_dirichlet"])
    def evaluate(self, quantities: SpectralQuantities) -> BoundRecord:
        """Solves the reciprocal inequality for lambda.

        Args:
            quantities: computed spectral quantities

        Returns:
            BoundRecord: bound value and margin

        """
        p, beta = quantities.p, quantities.beta
        exponent = 1.0 / (p - 1.0)
        k_bar = radial.kbar(p, quantities.lambda_dirichlet, self.dimension)
        reciprocal = quantities.lambda_dirichlet ** (-exponent) + k_bar / (beta * quantities.stats.perimeter) ** exponent
        return make_record(self.name, self.kind, reciprocal ** (-(p - 1.0)), quantities, note=f"kbar={k_bar:.10g}")
