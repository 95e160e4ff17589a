import logging

from .. import radial
from .bound_base import BoundRecord, SpectralQuantities, check_quantities, make_record

logger = logging.getLogger(__name__)


class HerschBound:
    """Hersch-type lower bound in terms of the inradius, valid on convex domains."""

    name = "hersch"
    kind = "lower"

    def applies(self, quantities: SpectralQuantities) -> bool:
        if quantities.beta <= 0:
            return False
        if not quantities.stats.is_convex:
            logger.warning(f"{quantities.domain} is not convex, skipping the Hersch lower bound")
            return False
        return True

    @check_quantities(["lambda_robin"])
    def evaluate(self, quantities: SpectralQuantities) -> BoundRecord:
        value = radial.hersch_lower_bound(quantities.p, quantities.beta, quantities.stats.inradius)
        return make_record(self.name, self.kind, value, quantities, note="euclidean inradius")
