"""Syntax-directed type inference.

Each term form is handled by exactly one typing rule; the rule label is
carried on every :class:`TypeCheckError` so diagnostics can name it.
The polymorphic constants ``if`` and ``fix`` are resolved from their
arguments (or, for a bare occurrence, from the type expected by the
context), so no unification is needed.
"""

from __future__ import annotations

from typing import Mapping, Optional

from .errors import IQuError
from .quantum import GATES
from .syntax import (
    CIRC, CMD, CVAR, MAX_NAT, NAT, QVAR, Abs, App, Arrow, Assign, CNew, CSize,
    Fix, Gate, If, Loc, Meas, Num, ParComp, Pred, QApply, QNew, Read,
    Reverse, RSize, Seq, SeqComp, Skip, Succ, Term, Type, Var, While, arrow,
    is_ground, unwind,
)

Base = Mapping[str, Type]

RULES = (
    "tv", "tn", "ts", "tp", "tab", "tap", "tY", "ti", "tk", "tc", "tw", "tA",
    "tR", "tcnw", "tc1", "tc2", "tc3", "tmc", "tsc", "tsr", "tC", "tM", "tqnw",
)


class TypeCheckError(IQuError):
    def __init__(self, term: Term, rule: str, expected, actual=None, message: str = ""):
        assert rule in RULES or rule == "program", rule
        self.term = term
        self.rule = rule
        self.expected = expected
        self.actual = actual
        found = "nothing" if actual is None else str(actual)
        text = message or f"expected {expected}, found {found}"
        super().__init__(f"rule ({rule}): {text}")


def infer(base: Base, t: Term) -> Type:
    """The unique type of ``t`` under ``base``."""
    return _infer(dict(base), t)


def check(base: Base, t: Term, expected: Type) -> None:
    """Check ``t`` against ``expected``; lets bare ``if``/``fix`` take their index from it."""
    _check(dict(base), t, expected)


def check_program(t: Term, base: Optional[Base] = None) -> Type:
    """Accept closed-over-store programs of ground type; return that type."""
    base = dict(base or {})
    for name, ty in base.items():
        if ty not in (CVAR, QVAR):
            raise TypeCheckError(
                Var(name), "program", "cVar or qVar", ty,
                f"free variables must be store variables: {name} : {ty}",
            )
    ty = _infer(base, t)
    if not is_ground(ty):
        raise TypeCheckError(t, "program", "a ground type", ty, f"program type must be ground, found {ty}")
    return ty


# ------------------------------------------------------------ internals


def _expect(t: Term, rule: str, expected: Type, actual: Type) -> None:
    if expected != actual:
        raise TypeCheckError(t, rule, expected, actual)


def _sub(base: Base, t: Term, expected: Type, rule: str) -> None:
    # premise of `rule`: a mismatch at the top of `t` is reported against `rule`
    actual = _infer_against(base, t, expected)
    _expect(t, rule, expected, actual)


def _infer_against(base: Base, t: Term, expected: Type) -> Type:
    head, args = unwind(t)
    if isinstance(head, If) and len(args) < 2 or isinstance(head, Fix) and head.at is None and not args:
        _check(base, t, expected)
        return expected
    return _infer(base, t)


def _check(base: Base, t: Term, expected: Type) -> None:
    head, args = unwind(t)
    if isinstance(head, If) and len(args) < 2:
        # if : Nat -> b -> b -> b with b read off the expected type
        rest = expected
        for _ in args:
            if not isinstance(rest, Arrow):
                raise TypeCheckError(t, "ti", "a function type", rest)
            rest = rest.codomain
        beta = _if_index(t, rest, len(args))
        result = _apply_args(base, t, arrow(NAT, beta, beta, beta), args, "ti")
        _expect(t, "ti", expected, result)
        return
    if isinstance(head, Fix) and head.at is None and not args:
        if not (isinstance(expected, Arrow) and isinstance(expected.domain, Arrow)
                and expected.domain.domain == expected.domain.codomain == expected.codomain):
            raise TypeCheckError(t, "tY", "(s -> s) -> s", expected)
        return
    _expect(t, _rule_of(t), expected, _infer(base, t))


def _if_index(t: Term, rest: Type, n_args: int) -> Type:
    # after consuming n_args of Nat -> b -> b -> b, `rest` has 3 - n_args arrows left
    shape = rest
    for _ in range(3 - n_args - 1):
        if not isinstance(shape, Arrow):
            raise TypeCheckError(t, "ti", "a function type", shape)
        shape = shape.codomain
    if not isinstance(shape, Arrow):
        raise TypeCheckError(t, "ti", "a function type", shape)
    beta = shape.codomain
    if not is_ground(beta):
        raise TypeCheckError(t, "ti", "a ground branch type", beta)
    return beta


def _apply_args(base: Base, t: Term, fun_ty: Type, args, rule: str) -> Type:
    for a in args:
        if not isinstance(fun_ty, Arrow):
            raise TypeCheckError(t, "tap", "a function type", fun_ty)
        _sub(base, a, fun_ty.domain, rule)
        fun_ty = fun_ty.codomain
    return fun_ty


def _rule_of(t: Term) -> str:
    head, args = unwind(t)
    if args:
        return "tap"
    return {
        Var: "tv", Num: "tn", Succ: "ts", Pred: "tp", Abs: "tab", Fix: "tY",
        If: "ti", Skip: "tk", Seq: "tc", While: "tw", Assign: "tA", Read: "tR",
        CNew: "tcnw", Gate: "tc1", SeqComp: "tc2", ParComp: "tc3", Reverse: "tmc",
        CSize: "tsc", RSize: "tsr", QApply: "tC", Meas: "tM", QNew: "tqnw", Loc: "tv",
    }[type(head)]


def _infer(base: Base, t: Term) -> Type:
    match t:
        case Var(name):
            if name not in base:
                raise TypeCheckError(t, "tv", "a bound variable", None, f"unbound variable {name}")
            return base[name]
        case Loc(loc):
            return CVAR if loc.kind == "classical" else QVAR
        case Num(n):
            if not 0 <= n <= MAX_NAT:
                raise TypeCheckError(t, "tn", "a 64-bit natural", n, f"numeral {n} out of range")
            return NAT
        case Succ():
            return Arrow(NAT, NAT)
        case Pred():
            return Arrow(NAT, NAT)
        case Abs(x, ann, body):
            inner = dict(base)
            inner[x] = ann
            return Arrow(ann, _infer(inner, body))
        case App():
            return _infer_app(base, t)
        case Fix(at):
            if at is None:
                raise TypeCheckError(t, "tY", "an index type", None, "cannot infer the index of a bare fix")
            return Arrow(Arrow(at, at), at)
        case If():
            raise TypeCheckError(t, "ti", "a branch type", None, "cannot infer the branch type of a bare if")
        case Skip():
            return CMD
        case Seq(first, second):
            _sub(base, first, CMD, "tc")
            ty = _infer(base, second)
            if not is_ground(ty):
                raise TypeCheckError(second, "tc", "a ground type", ty)
            return ty
        case While(guard, body):
            _sub(base, guard, NAT, "tw")
            _sub(base, body, CMD, "tw")
            return CMD
        case Assign(lhs, rhs):
            _sub(base, lhs, CVAR, "tA")
            _sub(base, rhs, NAT, "tA")
            return CMD
        case Read(operand):
            _sub(base, operand, CVAR, "tR")
            return NAT
        case CNew(x, init, body) | QNew(x, init, body):
            rule, vty = ("tcnw", CVAR) if isinstance(t, CNew) else ("tqnw", QVAR)
            _sub(base, init, NAT, rule)
            inner = dict(base)
            inner[x] = vty
            ty = _infer(inner, body)
            if not is_ground(ty):
                raise TypeCheckError(body, rule, "a ground type", ty)
            return ty
        case Gate(sym, k):
            g = GATES.get(sym)
            if g is None or g.arity != k or k < 1:
                raise TypeCheckError(t, "tc1", "a gate of the table", f"{sym}^{k}", f"{sym}^{k} is not a known gate")
            return CIRC
        case SeqComp(left, right) | ParComp(left, right):
            rule = "tc2" if isinstance(t, SeqComp) else "tc3"
            _sub(base, left, CIRC, rule)
            _sub(base, right, CIRC, rule)
            return CIRC
        case Reverse(operand):
            _sub(base, operand, CIRC, "tmc")
            return CIRC
        case CSize(operand):
            _sub(base, operand, CIRC, "tsc")
            return NAT
        case RSize(operand):
            _sub(base, operand, QVAR, "tsr")
            return NAT
        case QApply(target, circuit):
            _sub(base, target, QVAR, "tC")
            _sub(base, circuit, CIRC, "tC")
            return CMD
        case Meas(count, target):
            _sub(base, target, QVAR, "tM")
            _sub(base, count, NAT, "tM")
            return NAT
    raise TypeError(f"not a term: {t!r}")


def _infer_app(base: Base, t: Term) -> Type:
    head, args = unwind(t)
    if isinstance(head, If):
        if len(args) < 2:
            raise TypeCheckError(t, "ti", "a branch type", None, "cannot infer the branch type of a partial if")
        beta = _infer(base, args[1])
        if not is_ground(beta):
            raise TypeCheckError(args[1], "ti", "a ground branch type", beta)
        return _apply_args(base, t, arrow(NAT, beta, beta, beta), args, "ti")
    if isinstance(head, Fix) and head.at is None:
        fty = _infer(base, args[0])
        if not (isinstance(fty, Arrow) and fty.domain == fty.codomain):
            raise TypeCheckError(args[0], "tY", "s -> s", fty)
        sigma = fty.domain
        return _apply_args(base, t, arrow(Arrow(sigma, sigma), sigma), args, "tY")
    if isinstance(head, (Succ, Pred)) and len(args) == 1:
        # report a bad operand against the constant's own rule
        return _apply_args(base, t, Arrow(NAT, NAT), args, "ts" if isinstance(head, Succ) else "tp")
    return _apply_args(base, t, _infer(base, head), args, "tap")
