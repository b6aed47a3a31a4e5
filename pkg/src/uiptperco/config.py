"""Run-wide numeric configuration.

All high-precision computations go through mpmath.  The working precision is
a single knob (in bits) so that every derived constant inherits the same
error budget.  It can be overridden per call, via `RunConfig`, or globally
with the UIPTPERCO_PREC_BITS environment variable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

DEFAULT_PRECISION_BITS = int(os.environ.get("UIPTPERCO_PREC_BITS", "192"))

# Default truncation order for series in x = t^3.  Coefficient asymptotics
# of the partition function need n ~ 200.
DEFAULT_SERIES_ORDER = 200

DEFAULT_QUADRATURE_TOL = 1e-12


@dataclass
class RunConfig:
    """Bundle of knobs echoed into every CLI output header."""

    precision_bits: int = DEFAULT_PRECISION_BITS
    series_order: int = DEFAULT_SERIES_ORDER
    quadrature_tol: float = DEFAULT_QUADRATURE_TOL
    ladder: tuple[float, float, int] = (1e-5, 1e-2, 13)
    output_format: str = "csv"
    extra: dict = field(default_factory=dict)

    def header_fields(self) -> dict:
        return {
            "precision_bits": self.precision_bits,
            "series_order": self.series_order,
            "quadrature_tol": self.quadrature_tol,
        }
