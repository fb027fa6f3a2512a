"""IQu: an Idealized-Algol-style language with quantum registers and circuits."""

from .errors import (
    CapacityError, DanglingLocation, EvalError, FuelExhausted, IllFormedCircuit,
    IQuError, Overflow, PredOfZeroStrict,
)
from .evaluator import EvalConfig, Evaluator, Outcome, Report, run_program
from .parser import ParseError, format_term, parse_term, tokenize
from .typechecker import TypeCheckError, check_program, infer

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "DanglingLocation", "EvalConfig", "EvalError", "Evaluator",
    "FuelExhausted", "IllFormedCircuit", "IQuError", "Outcome", "Overflow",
    "ParseError", "PredOfZeroStrict", "Report", "TypeCheckError", "check_program",
    "format_term", "infer", "parse_term", "run_program", "tokenize",
]
