"""spinzeno: exact dynamics of local decoherence in small spin-1/2 magnets."""

__version__ = "0.1.0"

from .errors import (                                    # noqa: F401
    CapacityError,
    ConfigurationError,
    NumericalFailure,
    SpinzenoError,
)
from .hilbert import (                                   # noqa: F401
    StateVector,
    Term,
    TermList,
    apply_term_list,
    basis_state,
    expectation,
    inner_product,
    tensor_product,
    to_matrix,
)
