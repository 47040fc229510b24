"""Exception hierarchy shared by all modules."""


class LintransError(Exception):
    """Base class for every error raised by this package."""


class NonPrimeP(LintransError, ValueError):
    pass


class DegreeCapExceeded(LintransError, ValueError):
    pass


class CapExceeded(LintransError, ValueError):
    pass


class DivisionByZero(LintransError, ZeroDivisionError):
    pass


class TowerMismatch(LintransError, ValueError):
    pass


class NotInTopField(LintransError, ValueError):
    pass


class NonDividingDegrees(LintransError, ValueError):
    pass


class NonSquare(LintransError, ValueError):
    pass


class BothZero(LintransError, ValueError):
    pass


class CoefficientsOutsideFq(LintransError, ValueError):
    pass


class InvariantViolation(LintransError, ValueError):
    pass


class NotInFrakM(LintransError, ValueError):
    pass


class FormNotApplicable(LintransError, ValueError):
    pass


class AuxFieldMissing(LintransError, ValueError):
    pass


class InstanceInvariantViolation(LintransError, ValueError):
    pass


class PredicateFailed(LintransError, ValueError):
    pass


class UnknownId(LintransError, KeyError):
    pass


class ManifestMissing(LintransError, FileNotFoundError):
    pass


class WitnessNotFound(AssertionError):
    """A valid difference class had no realizing permutation."""


class ExtractionFailure(AssertionError):
    """The greedy substitution x^q - x left a degree not divisible by q."""


class DeterminantCapExceeded(CapExceeded):
    pass
