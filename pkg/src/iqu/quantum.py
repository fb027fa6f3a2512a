"""Dense state-vector co-processor.

Qubit ordering throughout: the leftmost ket symbol is the most significant
bit of the amplitude index, is the top wire of a circuit, and is the left
factor of a parallel composition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .syntax import EvaluatedCircuit, GateRef, ParC, SeqC

PRUNE_TOLERANCE = 1e-12
MATRIX_WIRE_LIMIT = 10


@dataclass(frozen=True)
class GateSymbol:
    name: str
    arity: int
    adjoint_name: str
    matrix: np.ndarray


def _controlled(u: np.ndarray) -> np.ndarray:
    n = u.shape[0]
    out = np.eye(2 * n, dtype=complex)
    out[n:, n:] = u
    return out


_S2 = 1 / np.sqrt(2)
_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex)
_S = np.diag([1, 1j]).astype(complex)
_T = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def _table() -> dict[str, GateSymbol]:
    rows = [
        ("Id", _I, "Id"),
        ("Not", _X, "Not"),
        ("X", _X, "X"),
        ("Y", _Y, "Y"),
        ("Z", _Z, "Z"),
        ("H", _H, "H"),
        ("S", _S, "Sdg"),
        ("Sdg", _S.conj().T, "S"),
        ("T", _T, "Tdg"),
        ("Tdg", _T.conj().T, "T"),
        ("CNOT", _controlled(_X), "CNOT"),
        ("CZ", _controlled(_Z), "CZ"),
        ("SWAP", _SWAP, "SWAP"),
        ("Toffoli", _controlled(_controlled(_X)), "Toffoli"),
        ("CCNOT", _controlled(_controlled(_X)), "CCNOT"),
    ]
    table = {}
    for name, m, adj in rows:
        m = np.array(m, dtype=complex)
        m.setflags(write=False)
        table[name] = GateSymbol(name, int(np.log2(m.shape[0])), adj, m)
    return table


GATES: dict[str, GateSymbol] = _table()


def gate_arity(name: str) -> Optional[int]:
    g = GATES.get(name)
    return g.arity if g else None


def adjoint_gate(name: str) -> str:
    return GATES[name].adjoint_name


# --------------------------------------------------------------- wires


def wires(c: EvaluatedCircuit) -> Optional[int]:
    """Wire count of a circuit, or None where it is undefined."""
    if isinstance(c, GateRef):
        return c.arity
    left, right = wires(c.left), wires(c.right)
    if left is None or right is None:
        return None
    if isinstance(c, SeqC):
        return left if left == right else None
    return left + right


# ------------------------------------------------------ unitary action


def apply_circuit(c: EvaluatedCircuit, state: np.ndarray) -> np.ndarray:
    n = wires(c)
    assert n is not None, f"circuit {c} has no wire count"
    assert state.shape == (2**n,), f"state of length {state.shape} for {n} wires"
    psi = np.array(state, dtype=complex).reshape((2,) * n)
    psi = _apply(c, psi, 0)
    return psi.reshape(-1)


def _apply(c: EvaluatedCircuit, psi: np.ndarray, offset: int) -> np.ndarray:
    if isinstance(c, GateRef):
        return _apply_gate(GATES[c.symbol].matrix, psi, offset, c.arity)
    if isinstance(c, SeqC):
        return _apply(c.right, _apply(c.left, psi, offset), offset)
    psi = _apply(c.left, psi, offset)
    return _apply(c.right, psi, offset + wires(c.left))


def _apply_gate(matrix: np.ndarray, psi: np.ndarray, offset: int, k: int) -> np.ndarray:
    axes = list(range(offset, offset + k))
    u = matrix.reshape((2,) * (2 * k))
    # contract the gate's input indices with the target axes, then move the
    # output indices back into place
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def build_matrix(c: EvaluatedCircuit) -> np.ndarray:
    """Dense unitary of ``c`` by explicit products and Kronecker products.

    Independent of :func:`apply_circuit`; used to cross-check it.
    """
    n = wires(c)
    if n is None:
        raise ValueError(f"circuit {c} has no wire count")
    if n > MATRIX_WIRE_LIMIT:
        raise ValueError(f"refusing to build a {2**n}x{2**n} matrix")
    return _matrix(c)


def _matrix(c: EvaluatedCircuit) -> np.ndarray:
    if isinstance(c, GateRef):
        return np.array(GATES[c.symbol].matrix)
    if isinstance(c, SeqC):
        return _matrix(c.right) @ _matrix(c.left)
    return np.kron(_matrix(c.left), _matrix(c.right))


def structural_adjoint(c: EvaluatedCircuit) -> EvaluatedCircuit:
    if isinstance(c, GateRef):
        return GateRef(adjoint_gate(c.symbol), c.arity)
    if isinstance(c, SeqC):
        return SeqC(structural_adjoint(c.right), structural_adjoint(c.left))
    return ParC(structural_adjoint(c.left), structural_adjoint(c.right))


# --------------------------------------------------------- measurement


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    result: int
    residual: np.ndarray
    probability: float


def basis_state(n: int, index: int = 0) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[index] = 1.0
    return v


def partial_measure(state: np.ndarray, k: int) -> list[MeasurementOutcome]:
    """Measure the leftmost ``k mod (n+1)`` qubits of an n-qubit state.

    Returns one outcome per measured bit string with non-negligible
    probability, ordered by the measured value.
    """
    dim = state.shape[0]
    n = dim.bit_length() - 1
    assert dim == 2**n and n >= 1, f"state length {dim} is not 2^n, n >= 1"
    j = k % (n + 1)
    if j == 0:
        return [MeasurementOutcome(0, np.array(state, dtype=complex), 1.0)]
    rows = np.asarray(state, dtype=complex).reshape(2**j, 2 ** (n - j))
    probs = np.sum(np.abs(rows) ** 2, axis=1)
    outcomes = []
    for m, p in enumerate(probs):
        if p <= PRUNE_TOLERANCE:
            continue
        residual = np.zeros_like(rows)
        residual[m] = rows[m] / np.sqrt(p)
        outcomes.append(MeasurementOutcome(m, residual.reshape(-1), float(p)))
    return outcomes


def format_gate_table() -> str:
    """Row-major dump of every gate matrix, 12 significant digits."""
    lines = []
    for g in GATES.values():
        lines.append(f"{g.name} arity={g.arity} adjoint={g.adjoint_name}")
        for row in g.matrix:
            lines.append(" ".join(_fmt_complex(z) for z in row))
    return "\n".join(lines)


def _fmt_complex(z: complex) -> str:
    re, im = z.real + 0.0, z.imag + 0.0
    return f"{re:.12g}{im:+.12g}j"
