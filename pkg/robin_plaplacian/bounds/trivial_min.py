from .bound_base import BoundRecord, SpectralQuantities, check_quantities, make_record


class TrivialMinBound:
    """:math:`\\lambda \\leq \\min\\{\\lambda^D, \\beta P / |\\Omega|\\}`, from the test functions :math:`u_\\infty` and 1."""

    name = "trivial_min"
    kind = "upper"

    def applies(self, quantities: SpectralQuantities) -> bool:
        return True

    @check_quantities(["lambda_robin", "lambda_dirichlet"])
    def evaluate(self, quantities: SpectralQuantities) -> BoundRecord:
        constant = quantities.beta * quantities.stats.perimeter / quantities.stats.area
        return make_record(self.name, self.kind, min(quantities.lambda_dirichlet, constant), quantities)
