"""entropylab: a numerical laboratory for entropies of weighted sums.

The package computes Shannon entropies of integer-weighted sums of
independent lattice- and cyclic-group-valued random variables, and
differential entropies of their piecewise-constant continuous
counterparts on dyadic grids, exactly enough to test entropy
inequalities on both sides and the quantization machinery connecting
them.
"""

__version__ = "0.1.0"

from entropylab.backend import get_backend
from entropylab.nats import Nats

__all__ = ["Nats", "get_backend", "__version__"]
