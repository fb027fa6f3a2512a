"""Exception hierarchy shared by the front end and the evaluator."""


class IQuError(Exception):
    """Base class for every diagnostic raised by the toolchain."""


class EvalError(IQuError):
    """A run-time failure while evaluating a well-typed program."""

    kind = "RuntimeError"

    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


class IllFormedCircuit(EvalError):
    kind = "IllFormedCircuit"


class DanglingLocation(EvalError):
    kind = "DanglingLocation"


class FuelExhausted(EvalError):
    kind = "FuelExhausted"


class Overflow(EvalError):
    kind = "Overflow"


class PredOfZeroStrict(EvalError):
    kind = "PredOfZeroStrict"


class CapacityError(EvalError):
    kind = "CapacityError"
