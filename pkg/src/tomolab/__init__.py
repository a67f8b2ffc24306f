"""tomolab: simulation and diagnostics for counted quantum measurements
and their Gaussian trace-regression surrogates."""

from . import bases, diagnostics, equivalence, hermitian, measurement, regression, states
from .errors import TomolabError

__version__ = "0.1.0"

__all__ = [
    "bases",
    "diagnostics",
    "equivalence",
    "hermitian",
    "measurement",
    "regression",
    "states",
    "TomolabError",
    "__version__",
]
