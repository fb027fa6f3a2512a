"""Big-step probabilistic evaluation.

``Evaluator.eval`` returns every derivation reachable from a store and a
term as a list of :class:`Outcome` records.  In distribution mode a
measurement fans out into one outcome per measured value; in sample mode
a seeded generator picks one, so the list always has a single element.
Probabilities multiply along a derivation.
"""

from __future__ import annotations

import logging
import random
import sys
import threading
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, TextIO

from . import quantum
from . import store as st
from .errors import (
    EvalError, FuelExhausted, IllFormedCircuit, Overflow, PredOfZeroStrict,
)
from .parser import format_term, parse_with_positions
from .store import Store
from .syntax import (
    CIRC, CMD, CVAR, MAX_NAT, NAT, QVAR, Abs, App, Assign, CircV, CNew, CSize,
    CVarV, Fix, Gate, GateRef, If, Loc, Meas, Num, NumV, ParC, ParComp, Pred,
    QApply, QNew, QVarV, Read, Reverse, RSize, Seq, SeqC, SeqComp, Skip, SkipV,
    Succ, Term, Type, Value, Var, While, apply, substitute, unwind,
)
from .typechecker import check_program, infer

log = logging.getLogger(__name__)

DEFAULT_FUEL = 10**7
DEFAULT_MAX_DEPTH = 50_000
_STACK_BYTES = 1 << 30
SKIP = SkipV()


@dataclass
class EvalConfig:
    mode: str = "distribution"  # "distribution" | "sample"
    seed: int = 0
    fuel: Optional[int] = DEFAULT_FUEL
    max_qubits: int = st.DEFAULT_MAX_QUBITS
    strict_pred: bool = False
    faithful_divergence: bool = False
    # nesting bound for derivations; exceeding it counts as running out of fuel
    max_depth: int = DEFAULT_MAX_DEPTH
    trace: Optional[TextIO] = None
    # debug: check every rule conclusion against the value shape its type dictates
    check_shapes: bool = False

    def __post_init__(self):
        if self.mode not in ("distribution", "sample"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class Outcome:
    store: Store
    value: Value
    probability: float


class Evaluator:
    def __init__(self, config: Optional[EvalConfig] = None):
        self.config = config or EvalConfig()
        self.rng = random.Random(self.config.seed)
        self.steps = 0

    # ---------------------------------------------------------- public

    def eval(self, s: Store, t: Term) -> list[Outcome]:
        return _with_deep_stack(lambda: self._eval(s, t, 0), self.config.max_depth)

    # ------------------------------------------------------- machinery

    def _tick(self, t: Term, depth: int) -> None:
        self.steps += 1
        fuel = self.config.fuel
        if fuel is not None and self.steps > fuel:
            raise FuelExhausted(f"fuel of {fuel} rule applications exhausted", t)
        if depth > self.config.max_depth:
            raise FuelExhausted(f"derivation deeper than {self.config.max_depth}", t)

    def _conclude(self, rule: str, depth: int, t: Term, outs: list[Outcome]) -> list[Outcome]:
        if self.config.trace is not None:
            summary = format_term(t)
            if len(summary) > 60:
                summary = summary[:57] + "..."
            for o in outs:
                print(f"{'  ' * depth}{rule}  {o.probability:.6g}  {summary}", file=self.config.trace)
        if self.config.check_shapes:
            ty = infer({}, t)
            for o in outs:
                assert value_matches(o.value, ty), f"{rule}: {o.value} is not a value of {ty}"
        return outs

    def _then(self, outs: list[Outcome], k: Callable[[Store, Value], list[Outcome]]) -> list[Outcome]:
        result = []
        for o in outs:
            for o2 in k(o.store, o.value):
                result.append(Outcome(o2.store, o2.value, o.probability * o2.probability))
        return result

    def _loc(self, v: Value, kind: type):
        assert isinstance(v, kind), f"expected {kind.__name__}, got {v}"
        return v.location

    # ------------------------------------------------------------ rules

    def _eval(self, s: Store, t: Term, d: int) -> list[Outcome]:
        self._tick(t, d)
        e = d + 1
        match t:
            case Num(n):
                return self._conclude("en", d, t, [Outcome(s, NumV(n), 1.0)])
            case Skip():
                return self._conclude("esk", d, t, [Outcome(s, SKIP, 1.0)])
            case Loc(loc):
                v = CVarV(loc) if loc.kind == "classical" else QVarV(loc)
                return self._conclude("eVar", d, t, [Outcome(s, v, 1.0)])
            case Var(name):
                raise EvalError(f"unbound variable {name} at run time", t)
            case App():
                return self._eval_app(s, t, d)
            case Seq(first, second):
                def after_first(s1, v):
                    assert v == SKIP, f"command evaluated to {v}"
                    return self._eval(s1, second, e)
                return self._conclude("e;", d, t, self._then(self._eval(s, first, e), after_first))
            case While():
                return self._eval_while(s, t, d)
            case Assign(lhs, rhs):
                def store_value(s1, n):
                    def write(s2, var):
                        loc = self._loc(var, CVarV)
                        return [Outcome(st.write_classical(s2, loc, n.n), SKIP, 1.0)]
                    return self._then(self._eval(s1, lhs, e), write)
                return self._conclude("ecA", d, t, self._then(self._eval(s, rhs, e), store_value))
            case Read(operand):
                def read(s1, var):
                    return [Outcome(s1, NumV(st.read_classical(s1, self._loc(var, CVarV))), 1.0)]
                return self._conclude("ecR", d, t, self._then(self._eval(s, operand, e), read))
            case CNew(x, init, body):
                def declare(s1, n):
                    s2, loc = st.alloc_classical(s1, n.n)
                    inner = self._eval(s2, substitute(body, x, Loc(loc)), e)
                    return [Outcome(st.restrict(o.store, loc), o.value, o.probability) for o in inner]
                return self._conclude("ecN", d, t, self._then(self._eval(s, init, e), declare))
            case QNew(x, size, body):
                def declare(s1, n):
                    s2, loc = st.alloc_quantum(s1, n.n, self.config.max_qubits)
                    inner = self._eval(s2, substitute(body, x, Loc(loc)), e)
                    return [Outcome(st.restrict(o.store, loc), o.value, o.probability) for o in inner]
                return self._conclude("eqN", d, t, self._then(self._eval(s, size, e), declare))
            case Gate(sym, k):
                return self._conclude("eu1", d, t, [Outcome(s, CircV(GateRef(sym, k)), 1.0)])
            case SeqComp(left, right):
                return self._conclude("eu2", d, t, self._eval_compose(s, t, e, left, right, SeqC))
            case ParComp(left, right):
                return self._conclude("eu3", d, t, self._eval_compose(s, t, e, left, right, ParC))
            case Reverse(operand):
                outs = [
                    Outcome(o.store, CircV(quantum.structural_adjoint(o.value.circuit)), o.probability)
                    for o in self._eval(s, operand, e)
                ]
                for o in outs:
                    rule = {GateRef: "er1", SeqC: "er2", ParC: "er3"}[type(o.value.circuit)]
                    self._conclude(rule, d, t, [o])
                return outs
            case CSize(operand):
                outs = [
                    Outcome(o.store, NumV(quantum.wires(o.value.circuit)), o.probability)
                    for o in self._eval(s, operand, e)
                ]
                return self._conclude("ecsz", d, t, outs)
            case RSize(operand):
                def size(s1, var):
                    return [Outcome(s1, NumV(st.qubit_count(s1, self._loc(var, QVarV))), 1.0)]
                return self._conclude("ersz", d, t, self._then(self._eval(s, operand, e), size))
            case QApply(target, circuit):
                return self._eval_qapply(s, t, d, target, circuit)
            case Meas(count, target):
                return self._eval_meas(s, t, d, count, target)
            case Abs() | Fix() | If() | Succ() | Pred():
                raise EvalError(f"cannot evaluate a term of functional type: {format_term(t)}", t)
        raise TypeError(f"not a term: {t!r}")

    def _eval_app(self, s: Store, t: Term, d: int) -> list[Outcome]:
        e = d + 1
        head, args = unwind(t)
        match head:
            case Abs(x, _, body):
                reduct = apply(substitute(body, x, args[0]), *args[1:])
                return self._conclude("ebeta", d, t, self._eval(s, reduct, e))
            case Fix():
                m = args[0]
                unfolded = apply(App(m, App(head, m)), *args[1:])
                return self._conclude("eY", d, t, self._eval(s, unfolded, e))
            case If() if len(args) >= 3:
                guard, left, right, rest = args[0], args[1], args[2], args[3:]
                outs = []
                for g in self._eval(s, guard, e):
                    rule, branch = ("eif_l", left) if g.value.n == 0 else ("eif_r", right)
                    for o in self._eval(g.store, apply(branch, *rest), e):
                        o = Outcome(o.store, o.value, g.probability * o.probability)
                        outs.extend(self._conclude(rule, d, t, [o]))
                return outs
            case Succ() if len(args) == 1:
                def succ(s1, n):
                    if n.n >= MAX_NAT:
                        raise Overflow("succ past the largest 64-bit natural", t)
                    return [Outcome(s1, NumV(n.n + 1), 1.0)]
                return self._conclude("es", d, t, self._then(self._eval(s, args[0], e), succ))
            case Pred() if len(args) == 1:
                def pred(s1, n):
                    if n.n == 0 and self.config.strict_pred:
                        raise PredOfZeroStrict("pred applied to 0", t)
                    return [Outcome(s1, NumV(max(n.n - 1, 0)), 1.0)]
                return self._conclude("ep", d, t, self._then(self._eval(s, args[0], e), pred))
        raise EvalError(f"cannot evaluate application headed by {format_term(head)}", t)

    def _eval_while(self, s: Store, t: While, d: int) -> list[Outcome]:
        # (ew1) recurses on the loop itself; unrolled here to keep the stack flat
        e = d + 1
        frontier = [Outcome(s, SKIP, 1.0)]
        done = []
        while frontier:
            pending = []
            for o in frontier:
                for g in self._eval(o.store, t.guard, e):
                    p = o.probability * g.probability
                    if g.value.n == 0:
                        done.extend(self._conclude("ew0", d, t, [Outcome(g.store, SKIP, p)]))
                        continue
                    for b in self._eval(g.store, t.body, e):
                        assert b.value == SKIP, f"loop body evaluated to {b.value}"
                        self._conclude("ew1", d, t, [Outcome(b.store, SKIP, p * b.probability)])
                        pending.append(Outcome(b.store, SKIP, p * b.probability))
            frontier = pending
            if frontier:
                self._tick(t, d)
        return done

    def _eval_compose(self, s, t, e, left, right, node) -> list[Outcome]:
        def after_left(s1, c0):
            def combine(s2, c1):
                if node is SeqC:
                    w0, w1 = quantum.wires(c0.circuit), quantum.wires(c1.circuit)
                    if w0 is None or w1 is None or w0 != w1:
                        if self.config.faithful_divergence:
                            while True:
                                self._tick(t, e)
                        raise IllFormedCircuit(
                            f"sequential composition of circuits with {w0} and {w1} wires", t
                        )
                return [Outcome(s2, CircV(node(c0.circuit, c1.circuit)), 1.0)]
            return self._then(self._eval(s1, right, e), combine)
        return self._then(self._eval(s, left, e), after_left)

    def _eval_qapply(self, s, t, d, target, circuit) -> list[Outcome]:
        e = d + 1
        outs = []
        for c in self._eval(s, circuit, e):
            for x in self._eval(c.store, target, e):
                loc = self._loc(x.value, QVarV)
                p = c.probability * x.probability
                circ = c.value.circuit
                n = st.qubit_count(x.store, loc)
                if quantum.wires(circ) == n:
                    state = quantum.apply_circuit(circ, st.read_quantum(x.store, loc))
                    out = Outcome(st.write_quantum(x.store, loc, state), SKIP, p)
                    outs.extend(self._conclude("eqA0", d, t, [out]))
                else:
                    log.warning(
                        "circuit %s has %s wires but register %s holds %d qubits; not applied",
                        circ, quantum.wires(circ), loc, n,
                    )
                    outs.extend(self._conclude("eqA1", d, t, [Outcome(x.store, SKIP, p)]))
        return outs

    def _eval_meas(self, s, t, d, count, target) -> list[Outcome]:
        e = d + 1
        outs = []
        for k in self._eval(s, count, e):
            for x in self._eval(k.store, target, e):
                loc = self._loc(x.value, QVarV)
                p = k.probability * x.probability
                results = quantum.partial_measure(st.read_quantum(x.store, loc), k.value.n)
                if self.config.mode == "sample":
                    results = [self._draw(results)]
                for r in results:
                    out = Outcome(st.write_quantum(x.store, loc, r.residual), NumV(r.result), p * r.probability)
                    outs.extend(self._conclude("eqM", d, t, [out]))
        return outs

    def _draw(self, results):
        total = sum(r.probability for r in results)
        u = self.rng.random() * total
        acc = 0.0
        for r in results:
            acc += r.probability
            if u < acc:
                return r
        return results[-1]


def value_matches(v: Value, ty: Type) -> bool:
    """Does ``v`` have the shape a term of ground type ``ty`` must evaluate to?"""
    if ty == NAT:
        return isinstance(v, NumV) and 0 <= v.n <= MAX_NAT
    if ty == CMD:
        return isinstance(v, SkipV)
    if ty == CVAR:
        return isinstance(v, CVarV) and v.location.kind == "classical"
    if ty == QVAR:
        return isinstance(v, QVarV) and v.location.kind == "quantum"
    if ty == CIRC:
        return isinstance(v, CircV) and _well_formed(v.circuit)
    return False


def _well_formed(c) -> bool:
    if isinstance(c, GateRef):
        return c.arity >= 1
    if not (_well_formed(c.left) and _well_formed(c.right)):
        return False
    if isinstance(c, SeqC):
        return quantum.wires(c.left) == quantum.wires(c.right)
    return True


def _with_deep_stack(fn, max_depth: int):
    """Run ``fn`` on a thread with a large stack so deep derivations fit."""
    box = {}

    def target():
        try:
            box["value"] = fn()
        except BaseException as exc:  # re-raised on the calling thread
            box["error"] = exc

    old_limit = sys.getrecursionlimit()
    old_size = threading.stack_size()
    sys.setrecursionlimit(max(old_limit, 12 * max_depth + 1000))
    threading.stack_size(_STACK_BYTES)
    try:
        worker = threading.Thread(target=target, name="iqu-eval")
        worker.start()
        worker.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in box:
        raise box["error"]
    return box["value"]


# ------------------------------------------------------------ pipeline


@dataclass
class Report:
    type: Type
    outcomes: list[Outcome]
    mode: str = "distribution"

    def distribution(self) -> list[tuple[Value, float]]:
        """Outcomes merged by value, ordered by value."""
        merged: dict[Value, float] = {}
        for o in self.outcomes:
            merged[o.value] = merged.get(o.value, 0.0) + o.probability
        return sorted(merged.items(), key=lambda kv: _value_key(kv[0]))

    def format(self) -> str:
        return "\n".join(f"{v}\t{p:.12f}" for v, p in self.distribution())

    def __str__(self):
        return ", ".join(f"{v}: {round(p, 12)!r}" for v, p in self.distribution())


def _value_key(v: Value):
    if isinstance(v, NumV):
        return (0, v.n, "")
    return (1, 0, str(v))


def prepare_store(bindings: Mapping[str, tuple[Type, int]], max_qubits: int = st.DEFAULT_MAX_QUBITS):
    """Allocate the program's free store variables; return (store, name -> Loc)."""
    s = Store()
    locs = {}
    for name, (ty, init) in bindings.items():
        if ty == CVAR:
            s, loc = st.alloc_classical(s, init)
        elif ty == QVAR:
            s, loc = st.alloc_quantum(s, init, max_qubits)
        else:
            raise ValueError(f"binding {name} must be cVar or qVar, not {ty}")
        locs[name] = Loc(loc)
    return s, locs


def run_program(
    source: str,
    bindings: Optional[Mapping[str, tuple[Type, int]]] = None,
    config: Optional[EvalConfig] = None,
) -> Report:
    """Parse, type-check and evaluate ``source``.

    ``bindings`` declares the program's free variables: a ``cVar`` binding
    carries its initial value, a ``qVar`` binding its qubit count.
    """
    config = config or EvalConfig()
    bindings = dict(bindings or {})
    term, _ = parse_with_positions(source)
    ty = check_program(term, {name: ty for name, (ty, _) in bindings.items()})
    s, locs = prepare_store(bindings, config.max_qubits)
    for name, loc in locs.items():
        term = substitute(term, name, loc)
    outcomes = Evaluator(config).eval(s, term)
    return Report(ty, outcomes, config.mode)
