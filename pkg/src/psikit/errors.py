"""Exception hierarchy shared by every psikit module."""


class PsiKitError(Exception):
    """Base class for all psikit errors."""


class PoleError(PsiKitError, ValueError):
    """An argument sits within the pole tolerance of a singularity."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class DivergentError(PsiKitError, ArithmeticError):
    """A series was requested outside its region of convergence."""


class NoConvergence(PsiKitError, ArithmeticError):
    """Summation hit its term budget before reaching the requested accuracy.

    ``partial`` holds the best result available when the budget ran out.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConstraintError(PsiKitError, ValueError):
    """An identity case violates one of the hypotheses of its theorem."""

    def __init__(self, message, hypothesis=None):
        super().__init__(message)
        self.hypothesis = hypothesis or message


class ExhaustedError(PsiKitError, RuntimeError):
    """Rejection sampling ran out of attempts."""


class CaseFileError(PsiKitError, ValueError):
    """Malformed case file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
