"""Abstract syntax of IQu: types, terms, evaluated circuits and values.

Every node is an immutable dataclass, so terms can be shared freely
between evaluation branches and compared structurally.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Union

MAX_NAT = 2**64 - 1


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class Ground:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Arrow:
    domain: "Type"
    codomain: "Type"

    def __str__(self):
        dom = f"({self.domain})" if isinstance(self.domain, Arrow) else str(self.domain)
        return f"{dom} -> {self.codomain}"


Type = Union[Ground, Arrow]

NAT = Ground("Nat")
CVAR = Ground("cVar")
QVAR = Ground("qVar")
CMD = Ground("cmd")
CIRC = Ground("circ")
GROUND_TYPES = (NAT, CVAR, QVAR, CMD, CIRC)


def arrow(*types: Type) -> Type:
    """Right-nested arrow: ``arrow(a, b, c)`` is ``a -> (b -> c)``."""
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Arrow(t, result)
    return result


def is_ground(t: Type) -> bool:
    return isinstance(t, Ground)


# ------------------------------------------------------------ locations


@dataclass(frozen=True, order=True)
class Location:
    kind: str  # "classical" | "quantum"
    serial: int

    def __str__(self):
        tag = "c" if self.kind == "classical" else "q"
        return f"{tag}{self.serial}"


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Num:
    n: int


@dataclass(frozen=True)
class Pred:
    pass


@dataclass(frozen=True)
class Succ:
    pass


@dataclass(frozen=True)
class If:
    pass


@dataclass(frozen=True)
class Abs:
    name: str
    annotation: Type
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Fix:
    # None when the index is left for the checker to infer from the argument.
    at: Optional[Type] = None


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Seq:
    first: "Term"
    second: "Term"


@dataclass(frozen=True)
class While:
    guard: "Term"
    body: "Term"


@dataclass(frozen=True)
class Assign:
    lhs: "Term"
    rhs: "Term"


@dataclass(frozen=True)
class Read:
    operand: "Term"


@dataclass(frozen=True)
class CNew:
    name: str
    init: "Term"
    body: "Term"


@dataclass(frozen=True)
class Gate:
    symbol: str
    arity: int


@dataclass(frozen=True)
class SeqComp:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class ParComp:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Reverse:
    operand: "Term"


@dataclass(frozen=True)
class CSize:
    operand: "Term"


@dataclass(frozen=True)
class RSize:
    operand: "Term"


@dataclass(frozen=True)
class QApply:
    target: "Term"
    circuit: "Term"


@dataclass(frozen=True)
class Meas:
    count: "Term"
    target: "Term"


@dataclass(frozen=True)
class QNew:
    name: str
    size: "Term"
    body: "Term"


@dataclass(frozen=True)
class Loc:
    """A store location standing in for a variable bound by cnew/qnew.

    Never produced by the parser; the evaluator substitutes these for
    binder names so that every allocation is distinct.
    """

    location: Location


Term = Union[
    Var, Num, Pred, Succ, If, Abs, App, Fix, Skip, Seq, While, Assign, Read,
    CNew, Gate, SeqComp, ParComp, Reverse, CSize, RSize, QApply, Meas, QNew, Loc,
]


def apply(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def unwind(t: Term) -> tuple[Term, list[Term]]:
    """Split an application spine ``h a1 ... an`` into ``(h, [a1..an])``."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


# ---------------------------------------------------- evaluated circuits


@dataclass(frozen=True)
class GateRef:
    symbol: str
    arity: int

    def __str__(self):
        return f"{self.symbol}^{self.arity}"


@dataclass(frozen=True)
class SeqC:
    left: "EvaluatedCircuit"
    right: "EvaluatedCircuit"

    def __str__(self):
        left = f"({self.left})" if isinstance(self.left, ParC) else str(self.left)
        right = str(self.right) if isinstance(self.right, GateRef) else f"({self.right})"
        return f"{left} :: {right}"


@dataclass(frozen=True)
class ParC:
    left: "EvaluatedCircuit"
    right: "EvaluatedCircuit"

    def __str__(self):
        left = f"({self.left})" if isinstance(self.left, SeqC) else str(self.left)
        right = str(self.right)
        if not isinstance(self.right, GateRef):
            right = f"({right})"
        return f"{left} || {right}"


EvaluatedCircuit = Union[GateRef, SeqC, ParC]


def circuit_term(c: EvaluatedCircuit) -> Term:
    """Read an evaluated circuit back as a closed circuit expression."""
    if isinstance(c, GateRef):
        return Gate(c.symbol, c.arity)
    if isinstance(c, SeqC):
        return SeqComp(circuit_term(c.left), circuit_term(c.right))
    return ParComp(circuit_term(c.left), circuit_term(c.right))


# --------------------------------------------------------------- values


@dataclass(frozen=True)
class NumV:
    n: int

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True)
class SkipV:
    def __str__(self):
        return "skip"


@dataclass(frozen=True)
class CircV:
    circuit: EvaluatedCircuit

    def __str__(self):
        return str(self.circuit)


@dataclass(frozen=True)
class CVarV:
    location: Location

    def __str__(self):
        return f"<cVar {self.location}>"


@dataclass(frozen=True)
class QVarV:
    location: Location

    def __str__(self):
        return f"<qVar {self.location}>"


Value = Union[NumV, SkipV, CircV, CVarV, QVarV]


# ------------------------------------------------ variables and binding


def free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset([name])
        case Abs(name, _, body):
            return free_vars(body) - {name}
        case CNew(name, init, body) | QNew(name, init, body):
            return free_vars(init) | (free_vars(body) - {name})
        case _:
            out = frozenset()
            for child in children(t):
                out |= free_vars(child)
            return out


def children(t: Term) -> tuple[Term, ...]:
    match t:
        case App(a, b) | Seq(a, b) | While(a, b) | Assign(a, b) | SeqComp(a, b) \
                | ParComp(a, b) | QApply(a, b) | Meas(a, b):
            return (a, b)
        case Read(a) | Reverse(a) | CSize(a) | RSize(a):
            return (a,)
        case Abs(_, _, body):
            return (body,)
        case CNew(_, a, b) | QNew(_, a, b):
            return (a, b)
        case _:
            return ()


def _rebuild(t: Term, kids: list[Term]) -> Term:
    match t:
        case Abs(name, ann, _):
            return Abs(name, ann, kids[0])
        case CNew(name, _, _):
            return CNew(name, kids[0], kids[1])
        case QNew(name, _, _):
            return QNew(name, kids[0], kids[1])
        case _:
            return type(t)(*kids)


def fresh_name(base: str, avoid) -> str:
    stem = base.rstrip("0123456789").rstrip("_") or "v"
    for i in itertools.count(1):
        candidate = f"{stem}_{i}"
        if candidate not in avoid:
            return candidate


def substitute(body: Term, name: str, replacement: Term) -> Term:
    """Capture-avoiding ``body[replacement/name]``."""
    if name not in free_vars(body):
        return body
    return _subst(body, name, replacement, free_vars(replacement))


def _subst(t: Term, name: str, rep: Term, rep_fv: frozenset[str]) -> Term:
    match t:
        case Var(x):
            return rep if x == name else t
        case Abs(x, ann, body):
            if x == name:
                return t
            if x in rep_fv and name in free_vars(body):
                y = fresh_name(x, rep_fv | free_vars(body) | {name})
                body = _subst(body, x, Var(y), frozenset([y]))
                x = y
            return Abs(x, ann, _subst(body, name, rep, rep_fv))
        case CNew(x, init, body) | QNew(x, init, body):
            init = _subst(init, name, rep, rep_fv)
            if x != name:
                if x in rep_fv and name in free_vars(body):
                    y = fresh_name(x, rep_fv | free_vars(body) | {name})
                    body = _subst(body, x, Var(y), frozenset([y]))
                    x = y
                body = _subst(body, name, rep, rep_fv)
            return type(t)(x, init, body)
        case _:
            kids = children(t)
            if not kids:
                return t
            return _rebuild(t, [_subst(k, name, rep, rep_fv) for k in kids])


def term_size(t: Term) -> int:
    return 1 + sum(term_size(k) for k in children(t))


def contains_meas(t: Term) -> bool:
    return isinstance(t, Meas) or any(contains_meas(k) for k in children(t))
