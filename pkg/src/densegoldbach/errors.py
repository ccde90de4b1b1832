"""Exception hierarchy shared by every module."""


class GoldbachError(Exception):
    pass


class NonCoprimeModuli(GoldbachError, ValueError):
    pass


class PreconditionViolated(GoldbachError, ValueError):
    pass


class HypothesisViolated(GoldbachError, ValueError):
    pass


class InternalContradiction(GoldbachError, RuntimeError):
    """A proven existence statement failed; always a bug or a numerical defect."""


class LimitTooSmall(GoldbachError, ValueError):
    pass


class NoPrimeInRange(GoldbachError, ValueError):
    pass


class NonSquarefreeW(GoldbachError, ValueError):
    pass


class LengthMismatch(GoldbachError, ValueError):
    pass


class BoundViolation(GoldbachError, RuntimeError):
    pass


class SpectralPrecisionError(GoldbachError, RuntimeError):
    pass


class DescriptorError(GoldbachError, ValueError):
    pass


class RepresentationNotFound(GoldbachError, LookupError):
    pass
