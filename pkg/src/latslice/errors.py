"""Exception types shared by every module.

Each error carries a short machine-readable ``code`` that the command line
front end prints next to the message.
"""


class LatsliceError(Exception):
    code = "error"

    def __init__(self, message=None):
        super().__init__(message or self.code.replace("_", " "))


class SingularBasisError(LatsliceError, ValueError):
    code = "singular_basis"


class IllConditionedError(LatsliceError, ValueError):
    code = "ill_conditioned"


class DimensionMismatchError(LatsliceError, ValueError):
    code = "dimension_mismatch"


class InvalidBodyError(LatsliceError, ValueError):
    code = "invalid_body"


class BudgetExceededError(LatsliceError, RuntimeError):
    code = "budget_exceeded"


class OutOfRegimeError(LatsliceError, ValueError):
    code = "out_of_regime"


class JohnUnsupportedError(LatsliceError, NotImplementedError):
    code = "john_unsupported"


class NotFullDimensionalError(LatsliceError, ValueError):
    code = "not_full_dimensional"


class FullRankError(LatsliceError, ValueError):
    code = "full_rank"


class AttemptsExhaustedError(LatsliceError, RuntimeError):
    code = "attempts_exhausted"


class RankDeficientError(LatsliceError, ValueError):
    code = "rank_deficient"


class NoCandidatesError(LatsliceError, ValueError):
    code = "no_candidates"


class NoHyperplaneError(LatsliceError, ValueError):
    code = "no_hyperplane"
