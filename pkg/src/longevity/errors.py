"""Exception types shared across the toolkit.

Three failure categories are distinguished so that callers (the CLI in
particular) can map them onto distinct exit codes:

* ``ValueError`` for domain errors on in-memory arguments,
* :class:`DataError` for malformed or inconsistent input data,
* :class:`NumericalError` for non-convergence or detected instability.
"""


class DataError(ValueError):
    """Input data (a file, a table, a sample) failed validation."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge or went unstable."""
