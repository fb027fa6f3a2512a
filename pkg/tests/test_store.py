import numpy as np
import pytest

from iqu.errors import CapacityError, DanglingLocation
from iqu.store import (
    Store, alloc_classical, alloc_quantum, qubit_count, read_classical,
    read_quantum, restrict, write_classical, write_quantum,
)


def test_alloc_classical_on_empty_store():
    s, loc = alloc_classical(Store(), 0)
    assert dict(s.classical) == {loc: 0}
    assert loc.kind == "classical"


def test_allocations_are_distinct():
    s, a = alloc_classical(Store(), 1)
    s, b = alloc_classical(s, 1)
    s, q = alloc_quantum(s, 1)
    assert len({a, b, q}) == 3


def test_locations_are_never_reused_after_restrict():
    s, a = alloc_classical(Store(), 1)
    s = restrict(s, a)
    s, b = alloc_classical(s, 1)
    assert a != b


def test_alloc_then_read():
    s, loc = alloc_classical(Store(), 5)
    assert read_classical(s, loc) == 5


def test_alloc_quantum_two_qubits():
    s, r = alloc_quantum(Store(), 2)
    np.testing.assert_array_equal(read_quantum(s, r), [1, 0, 0, 0])
    assert qubit_count(s, r) == 2


def test_alloc_quantum_one_qubit():
    s, r = alloc_quantum(Store(), 1)
    np.testing.assert_array_equal(read_quantum(s, r), [1, 0])


@pytest.mark.parametrize("n", [0, 21, 64])
def test_alloc_quantum_capacity(n):
    with pytest.raises(CapacityError):
        alloc_quantum(Store(), n)


def test_capacity_is_configurable():
    s, r = alloc_quantum(Store(), 3, max_qubits=3)
    with pytest.raises(CapacityError):
        alloc_quantum(s, 4, max_qubits=3)


def test_write_then_read():
    s, loc = alloc_classical(Store(), 0)
    assert read_classical(write_classical(s, loc, 9), loc) == 9


def test_writes_do_not_touch_the_original():
    s0, loc = alloc_classical(Store(), 0)
    s1 = write_classical(s0, loc, 9)
    assert read_classical(s0, loc) == 0 and read_classical(s1, loc) == 9


def test_quantum_write_installs_a_read_only_copy():
    s0, r = alloc_quantum(Store(), 1)
    state = np.array([0, 1], dtype=complex)
    s1 = write_quantum(s0, r, state)
    state[0] = 5  # the caller's array is not shared
    np.testing.assert_array_equal(read_quantum(s1, r), [0, 1])
    np.testing.assert_array_equal(read_quantum(s0, r), [1, 0])
    with pytest.raises(ValueError):
        read_quantum(s1, r)[0] = 1


def test_unnormalized_states_are_rejected():
    s, r = alloc_quantum(Store(), 1)
    with pytest.raises(AssertionError):
        write_quantum(s, r, np.array([1, 1], dtype=complex))


def test_restrict_then_read():
    s, loc = alloc_classical(Store(), 0)
    s = restrict(s, loc)
    with pytest.raises(DanglingLocation):
        read_classical(s, loc)
    s, r = alloc_quantum(s, 1)
    s = restrict(s, r)
    with pytest.raises(DanglingLocation):
        qubit_count(s, r)


def test_qubit_count():
    s, r = alloc_quantum(Store(), 3)
    assert qubit_count(s, r) == 3


def test_equality_ignores_the_serial_counter():
    s, a = alloc_classical(Store(), 0)
    assert restrict(s, a) == Store()
    assert restrict(s, a).next_serial == 1
