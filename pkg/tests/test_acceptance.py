"""Acceptance criteria, one test per criterion.

Each test prints a ``criterion N: PASS|FAIL`` line (visible with ``-s``)
and records it for the summary printed at the end of the session.
Tolerances are fixed by the criteria themselves.
"""

import contextlib
import io
import random
import time
from math import sqrt
from pathlib import Path

import numpy as np

from iqu.errors import EvalError, FuelExhausted
from iqu.evaluator import EvalConfig, Evaluator, prepare_store, run_program, value_matches
from iqu.parser import parse_term
from iqu.quantum import GATES, apply_circuit, basis_state, build_matrix, partial_measure, structural_adjoint, wires
from iqu.store import Store
from iqu.syntax import GROUND_TYPES, NAT, NumV, substitute
from iqu.typechecker import RULES, TypeCheckError, check, check_program, infer

from conftest import ACCEPTANCE
from generators import BASE, BINDINGS, ProgramGenerator, depth, random_circuit, random_state
from test_typechecker import B, NEGATIVE, POSITIVE

CORPUS = Path(__file__).parent.parent / "src" / "iqu" / "corpus"
AMPLITUDE_TOL = 1e-9
PROBABILITY_TOL = 1e-9
BELL_RUNTIME_LIMIT = 0.1  # seconds
SAMPLE_COUNT = 10_000
SAMPLE_BAND = (0.48, 0.52)


@contextlib.contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except AssertionError as exc:
        detail = str(exc).splitlines()[0] if str(exc) else "assertion failed"
        ACCEPTANCE[number] = (title, False, detail)
        print(f"criterion {number}: FAIL  {title}  ({detail})")
        raise
    ACCEPTANCE[number] = (title, True, "")
    print(f"criterion {number}: PASS  {title}")


def distribution(name: str) -> dict:
    report = run_program((CORPUS / name).read_text())
    return {v.n: p for v, p in report.distribution()}


def ket(bits: str) -> np.ndarray:
    return basis_state(len(bits), int(bits, 2))


# -------------------------------------------------------------------- 1


def test_criterion_1_bell_experiment():
    with criterion(1, "Bell experiment gives {0: 0.5, 1: 0.5} in under 0.1 s"):
        src = (CORPUS / "bell.iqu").read_text()
        start = time.perf_counter()
        report = run_program(src)
        elapsed = time.perf_counter() - start
        dist = {v.n: p for v, p in report.distribution()}
        assert dist.keys() == {0, 1}, f"support {sorted(dist)}"
        assert abs(dist[0] - 0.5) <= PROBABILITY_TOL and abs(dist[1] - 0.5) <= PROBABILITY_TOL, dist
        assert elapsed < BELL_RUNTIME_LIMIT, f"took {elapsed:.3f} s"


# -------------------------------------------------------------------- 2


def test_criterion_2_partial_measurement():
    with criterion(2, "partial measurement worked example, and k=2 agrees with k=6"):
        v = ket("0010") / sqrt(2) + ket("1011") / 2 + ket("0001") / 2
        outs = partial_measure(v, 2)
        assert [o.result for o in outs] == [0, 2], [o.result for o in outs]
        assert abs(outs[0].probability - 3 / 4) <= AMPLITUDE_TOL
        assert abs(outs[1].probability - 1 / 4) <= AMPLITUDE_TOL
        np.testing.assert_allclose(
            outs[0].residual, sqrt(2 / 3) * ket("0010") + sqrt(1 / 3) * ket("0001"), atol=AMPLITUDE_TOL, rtol=0
        )
        np.testing.assert_allclose(outs[1].residual, ket("1011"), atol=AMPLITUDE_TOL, rtol=0)

        # k = 6 on four qubits measures 6 mod 5 = 1 qubit, so the
        # recorded results differ even though probabilities coincide here
        other = partial_measure(v, 6)
        assert [o.result for o in other] == [o.result for o in outs], (
            f"results {[o.result for o in outs]} for k=2 but {[o.result for o in other]} for k=6"
        )
        for a, b in zip(outs, other):
            assert abs(a.probability - b.probability) <= AMPLITUDE_TOL
            np.testing.assert_allclose(a.residual, b.residual, atol=AMPLITUDE_TOL, rtol=0)


# -------------------------------------------------------------------- 3


def test_criterion_3_deutsch_jozsa():
    with criterion(3, "Deutsch-Jozsa separates constant from balanced oracles, n = 2, 3"):
        for n in (2, 3):
            const = distribution(f"dj_const{n}.iqu")
            assert const.keys() == {0} and abs(const[0] - 1) <= PROBABILITY_TOL, f"dj_const{n}: {const}"
            bal = distribution(f"dj_bal{n}.iqu")
            assert bal.get(0, 0.0) < PROBABILITY_TOL, f"dj_bal{n}: {bal}"


# -------------------------------------------------------------------- 4


def _dot(y: int, s: int) -> int:
    return bin(y & s).count("1") % 2


def test_criterion_4_simon():
    files = {0b11: "simon2.iqu", 0b01: "simon2_s01.iqu", 0b10: "simon2_s10.iqu"}
    with criterion(4, "Simon subroutine outcomes are orthogonal to s for s in {01, 10, 11}"):
        for s, name in files.items():
            dist = distribution(name)
            bad = [y for y in dist if _dot(y, s) != 0]
            assert not bad, f"{name}: outcomes {bad} violate y.s = 0"
            assert abs(sum(dist.values()) - 1) <= PROBABILITY_TOL, f"{name}: total {sum(dist.values())}"


# ---------------------------------------------------------------- 5, 6


def _circuits():
    rng = random.Random(2024)
    return [random_circuit(rng, max_wires=5) for _ in range(200)]


def _gate_names(c, acc):
    if hasattr(c, "symbol"):
        acc.add(c.symbol)
    else:
        _gate_names(c.left, acc)
        _gate_names(c.right, acc)
    return acc


def test_criterion_5_oracle_equivalence():
    with criterion(5, "apply_circuit agrees with build_matrix on 200 circuits x 20 states"):
        circuits = _circuits()
        used = set()
        for c in circuits:
            _gate_names(c, used)
        assert used == set(GATES), f"gates never drawn: {sorted(set(GATES) - used)}"
        assert all(wires(c) <= 5 for c in circuits)
        rng = np.random.default_rng(7)
        worst = 0.0
        for c in circuits:
            m = build_matrix(c)
            for _ in range(20):
                v = random_state(rng, wires(c))
                worst = max(worst, float(np.max(np.abs(apply_circuit(c, v) - m @ v))))
        assert worst <= AMPLITUDE_TOL, f"max deviation {worst:.3g}"


def test_criterion_6_adjoint_soundness():
    with criterion(6, "structural adjoint is the conjugate transpose and an involution"):
        worst = 0.0
        for c in _circuits():
            adj = structural_adjoint(c)
            assert structural_adjoint(adj) == c, f"not an involution on {c}"
            worst = max(worst, float(np.max(np.abs(build_matrix(adj) - build_matrix(c).conj().T))))
        assert worst <= AMPLITUDE_TOL, f"max deviation {worst:.3g}"


# -------------------------------------------------------------------- 7


def test_criterion_7_type_safety():
    with criterion(7, "1000 random well-typed programs evaluate to values of their type"):
        gen = ProgramGenerator(random.Random(7))
        counts = {"values": 0, "fuel": 0}
        for i in range(1000):
            ty = GROUND_TYPES[i % len(GROUND_TYPES)]
            t = gen.program(ty, max_depth=8)
            assert depth(t) <= 8
            assert check_program(t, BASE) == ty
            s, locs = prepare_store(BINDINGS)
            for name, loc in locs.items():
                t = substitute(t, name, loc)
            try:
                outs = Evaluator(EvalConfig(fuel=10_000, check_shapes=True)).eval(s, t)
            except FuelExhausted:
                counts["fuel"] += 1
                continue
            except EvalError as exc:
                raise AssertionError(f"program {i} ({ty}) raised {exc.kind}: {exc}") from exc
            bad = [o.value for o in outs if not value_matches(o.value, ty)]
            assert not bad, f"program {i}: {bad} are not values of {ty}"
            counts["values"] += 1
        print(f"  {counts['values']} evaluated to values, {counts['fuel']} ran out of fuel")


# -------------------------------------------------------------------- 8


def test_criterion_8_typing_rules():
    with criterion(8, "one positive and one negative test per typing rule, plus |101> = 5"):
        for rule in RULES:
            term, ty = POSITIVE[rule]
            assert infer(B, term) == ty, f"({rule}) positive case"
            term, expected, failing = NEGATIVE[rule]
            try:
                infer(B, term) if expected is None else check(B, term, expected)
            except TypeCheckError as exc:
                assert exc.rule == failing, f"({rule}) negative case blamed ({exc.rule})"
            else:
                raise AssertionError(f"({rule}) negative case was accepted")
        src = "qnew r := 3 in (r <| (Not^1 || Id^1) || Not^1; meas^3 r)"
        assert check_program(parse_term(src)) == NAT
        dist = {v.n: p for v, p in run_program(src).distribution()}
        assert dist.keys() == {5} and abs(dist[5] - 1) <= PROBABILITY_TOL, dist


# -------------------------------------------------------------------- 9


def _sample(term, seed):
    trace = io.StringIO()
    (out,) = Evaluator(EvalConfig(mode="sample", seed=seed, trace=trace)).eval(Store(), term)
    return out, trace.getvalue()


def test_criterion_9_sampling():
    with criterion(9, "seeded sampling is bit-identical and Bell frequency lies in [0.48, 0.52]"):
        term = parse_term((CORPUS / "bell.iqu").read_text())
        for seed in range(20):
            (a, ta), (b, tb) = _sample(term, seed), _sample(term, seed)
            assert (a.value, a.probability, ta) == (b.value, b.probability, tb), f"seed {seed} differs"
            assert a.store == b.store
        simon = parse_term((CORPUS / "simon2.iqu").read_text())
        assert _sample(simon, 99) == _sample(simon, 99)

        ev = Evaluator(EvalConfig(mode="sample", seed=12345))
        zeros = sum(ev.eval(Store(), term)[0].value == NumV(0) for _ in range(SAMPLE_COUNT))
        freq = zeros / SAMPLE_COUNT
        print(f"  frequency of 0 over {SAMPLE_COUNT} samples: {freq:.4f}")
        assert SAMPLE_BAND[0] <= freq <= SAMPLE_BAND[1], f"frequency {freq}"
