class ModobError(Exception):
    """Base class for all errors raised by modob."""


class MissingAnchor(ModobError):
    """A basis symbol needed for numeric evaluation has no numeric value."""


class ProductIncomplete(ModobError):
    """The product table does not cover every pair of basis symbols."""


class PrecisionExhausted(ModobError):
    """Integer-relation search could not conclude at the working precision."""


class NotAntisymmetric(ModobError):
    pass


class PairingMismatch(ModobError):
    pass


class SizeLimit(ModobError):
    """A dense table or matrix would exceed the configured size cap."""


class NotACocycle(ModobError):
    pass


class DenominatorMismatch(ModobError):
    pass
