"""Exception hierarchy.  Everything raised on purpose derives from
PadicFormsError so callers can catch library failures in one clause."""


class PadicFormsError(Exception):
    pass


class PrecisionMismatch(PadicFormsError):
    """Operands live at different precisions, or a query needs digits
    beyond the trusted window."""


class NotAUnit(PadicFormsError):
    pass


class NotADthPower(PadicFormsError):
    pass


class HenselError(PadicFormsError):
    """A lifting precondition (valuation gap, seed residual) fails."""


class DegreeShapeError(PadicFormsError):
    """Degree is not of the form 2m with m odd."""


class NoValidShift(PadicFormsError):
    """Normalization could not pick a rotation; indicates a bug, since a
    valid rotation always exists by the cycle argument."""


class OracleBudgetError(PadicFormsError):
    """Exhaustive enumeration would exceed the configured state budget."""


class CertificateError(PadicFormsError):
    """A certificate failed independent validation."""


class SearchBudgetExceeded(PadicFormsError):
    """Contraction search ran out of node budget before resolving."""
