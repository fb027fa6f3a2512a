"""Classical and quantum stores.

A :class:`Store` is a persistent value: every update returns a new store
and leaves the old one untouched, so measurement branches can keep their
own copy cheaply. State vectors are never mutated in place; updates
install a fresh read-only array.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import CapacityError, DanglingLocation
from .quantum import basis_state
from .syntax import Location

DEFAULT_MAX_QUBITS = 20
NORM_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class QuantumRegister:
    state: np.ndarray
    qubits: int

    def __post_init__(self):
        assert self.state.shape == (2**self.qubits,)
        assert abs(np.linalg.norm(self.state) - 1.0) <= NORM_TOLERANCE, "unnormalized state"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Store:
    classical: Mapping[Location, int] = field(default_factory=dict)
    quantum: Mapping[Location, QuantumRegister] = field(default_factory=dict)
    # next serial to hand out; monotone along a path, so locations are never reused
    next_serial: int = 0

    def __post_init__(self):
        object.__setattr__(self, "classical", MappingProxyType(dict(self.classical)))
        object.__setattr__(self, "quantum", MappingProxyType(dict(self.quantum)))

    def __eq__(self, other):
        if not isinstance(other, Store):
            return NotImplemented
        if dict(self.classical) != dict(other.classical):
            return False
        if self.quantum.keys() != other.quantum.keys():
            return False
        return all(
            self.quantum[k].qubits == other.quantum[k].qubits
            and np.array_equal(self.quantum[k].state, other.quantum[k].state)
            for k in self.quantum
        )

    def __contains__(self, loc):
        return loc in self.classical or loc in self.quantum

    def _replace(self, classical=None, quantum=None, next_serial=None) -> "Store":
        return Store(
            self.classical if classical is None else classical,
            self.quantum if quantum is None else quantum,
            self.next_serial if next_serial is None else next_serial,
        )

    def __repr__(self):
        parts = [f"{k}={v}" for k, v in sorted(self.classical.items())]
        parts += [f"{k}=<{r.qubits} qubits>" for k, r in sorted(self.quantum.items())]
        return "Store(" + ", ".join(parts) + ")"


def alloc_classical(s: Store, init: int) -> tuple[Store, Location]:
    loc = Location("classical", s.next_serial)
    classical = dict(s.classical)
    classical[loc] = init
    return s._replace(classical=classical, next_serial=s.next_serial + 1), loc


def alloc_quantum(s: Store, n: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> tuple[Store, Location]:
    if n < 1 or n > max_qubits:
        raise CapacityError(f"cannot allocate a register of {n} qubits (limit {max_qubits})")
    loc = Location("quantum", s.next_serial)
    quantum = dict(s.quantum)
    quantum[loc] = QuantumRegister(_frozen(basis_state(n)), n)
    return s._replace(quantum=quantum, next_serial=s.next_serial + 1), loc


def _check(s: Store, loc: Location, table) -> None:
    if loc not in table:
        raise DanglingLocation(f"location {loc} is not in the store (escaped its scope?)")


def read_classical(s: Store, loc: Location) -> int:
    _check(s, loc, s.classical)
    return s.classical[loc]


def write_classical(s: Store, loc: Location, n: int) -> Store:
    _check(s, loc, s.classical)
    classical = dict(s.classical)
    classical[loc] = n
    return s._replace(classical=classical)


def qubit_count(s: Store, loc: Location) -> int:
    _check(s, loc, s.quantum)
    return s.quantum[loc].qubits


def read_quantum(s: Store, loc: Location) -> np.ndarray:
    _check(s, loc, s.quantum)
    return s.quantum[loc].state


def write_quantum(s: Store, loc: Location, state: np.ndarray) -> Store:
    _check(s, loc, s.quantum)
    reg = s.quantum[loc]
    quantum = dict(s.quantum)
    quantum[loc] = QuantumRegister(_frozen(state), reg.qubits)
    return s._replace(quantum=quantum)


def restrict(s: Store, loc: Location) -> Store:
    _check(s, loc, s.classical if loc.kind == "classical" else s.quantum)
    if loc.kind == "classical":
        classical = dict(s.classical)
        del classical[loc]
        return s._replace(classical=classical)
    quantum = dict(s.quantum)
    del quantum[loc]
    return s._replace(quantum=quantum)
