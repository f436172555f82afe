"""Exception hierarchy shared across the package.

The CLI maps each class onto the ``error.class`` field of its JSON error
object, so subclass names are part of the external contract.
"""


class AccrualError(Exception):
    """Base class for all package-specific failures."""

    kind = "error"


class ParseError(AccrualError):
    """Malformed input file (bad header, row, day index, or count)."""

    kind = "parse"


class DataError(AccrualError):
    """Structurally valid input that cannot be used (empty corpus, zero totals, missing ids)."""

    kind = "data"


class ModelError(AccrualError):
    """Data violates a model assumption, e.g. the posterior-propriety guard."""

    kind = "model"


class NumericalError(AccrualError):
    """Numerical failure: overflow, non-convergence, or envelope breakdown."""

    kind = "numerical"


class RequestError(AccrualError):
    """Invalid run configuration (conflicting flags, empty horizon list, ...)."""

    kind = "request"
