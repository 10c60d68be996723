"""Coalition attacks: cheaters B_1..B_N standing just outside the restricted area.

Every attack intercepts the verifiers' messages, does local quantum
operations plus pre-shared entanglement, swaps one round of classical
messages, and replies.  All measurements go through :class:`_Run`, which
either samples, takes a forced outcome from ``forced``, or (inside
:func:`enumerate_branches`) asks to be branched over.  The product of the
Born probabilities of the selected outcomes is kept, so exact success
probabilities come from plain enumeration.

Register layouts are documented per attack; qubit 0 is always the first
intercepted qubit.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .pauli import PauliString
from .protocols import (ModifiedInstance, ProtocolAInstance, ProtocolBInstance, expected_answer, retarget,
                        rotation_to_angles)
from .quantum_core import (ZERO_PROB, BlochAngles, CodeSpace, NamedGate, PureState, apply_gate, apply_gates,
                           bell_code, bell_pair, equal_up_to_phase, factor_out, ghz_code, inverse_sequence,
                           make_ghz, make_qubit, measure_pauli, pauli_outcome_probabilities, projective_measure,
                           projective_probabilities, sequence_matrix, tensor_all)
from .spacetime import Geometry, ScheduleReport, cheat_completion
from .stabilizer import (StabilizerTableau, apply_clifford, conjugate, residual_stabilizer,
                         tableau_measure)


def _bit(sign: int) -> int:
    return (1 - sign) // 2


def _sign(bit: int) -> int:
    return 1 - 2 * bit


@dataclass(frozen=True)
class AttackOutcome:
    attack: str
    answer: tuple[int, ...]
    expected: tuple[int, ...]
    answers: tuple[tuple[int, ...], ...]
    schedule: ScheduleReport
    records: dict = field(default_factory=dict)
    probability: float = 1.0

    @property
    def consistent(self) -> bool:
        return len(set(self.answers)) == 1

    @property
    def correct(self) -> bool:
        return self.consistent and self.answers[0] == self.expected

    @property
    def success(self) -> bool:
        return self.correct and self.schedule.meets_deadline

    def as_dict(self) -> dict:
        return {
            "attack": self.attack,
            "answer": list(self.answer),
            "expected": list(self.expected),
            "answers": [list(a) for a in self.answers],
            "success": self.success,
            "consistent": self.consistent,
            "branch_probability": self.probability,
            "schedule": self.schedule.as_dict(),
            "records": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.records.items()},
        }


# ---------------------------------------------------------------------------
# measurement bookkeeping
# ---------------------------------------------------------------------------

class _NeedChoice(Exception):
    def __init__(self, key: str, options: list[tuple[Any, float]]):
        super().__init__(key)
        self.key = key
        self.options = options


class _Run:
    def __init__(self, rng, forced: dict | None, explore: bool = False):
        self.rng = rng
        self.forced = dict(forced or {})
        self.explore = explore
        self.p = 1.0
        self.records: dict[str, Any] = {}

    def _pick(self, key, values, probs):
        if key in self.forced:
            v = self.forced[key]
            if v not in values:
                raise ValueError(f"forced value {v!r} for {key} not in {values}")
            i = values.index(v)
            if probs[i] < ZERO_PROB:
                raise ValueError(f"forced outcome {key}={v!r} has zero probability")
        elif self.explore:
            raise _NeedChoice(key, [(v, float(p)) for v, p in zip(values, probs) if p >= ZERO_PROB])
        else:
            if self.rng is None:
                raise ValueError("need an rng or forced outcomes")
            probs = np.asarray(probs, dtype=float)
            probs = np.where(probs < ZERO_PROB, 0.0, probs)
            i = int(self.rng.choice(len(values), p=probs / probs.sum()))
        self.p *= float(probs[i])
        self.records[key] = values[i]
        return i

    def pauli(self, state: PureState, letters: str | PauliString, key: str) -> tuple[int, PureState]:
        p = letters if isinstance(letters, PauliString) else PauliString.parse(letters)
        probs = pauli_outcome_probabilities(state, p)
        i = self._pick(key, [1, -1], list(probs))
        s = 1 - 2 * i
        _, post = measure_pauli(state, p, forced=s)
        return s, post

    def basis(self, state: PureState, code: CodeSpace, targets, key: str) -> tuple[Any, PureState]:
        probs = projective_probabilities(state, code, targets)
        labels = [tuple(l) if isinstance(l, (list, tuple)) else l for l in code.labels]
        i = self._pick(key, labels, list(probs))
        _, post = projective_measure(state, code, targets, forced=i)
        return labels[i], post

    def bell(self, state: PureState, pair, key: str) -> tuple[int, int, PureState]:
        (a, b), post = self.basis(state, bell_code(), pair, key)
        return a, b, post


def _pauli_on(n: int, ops: dict[int, str]) -> PauliString:
    return PauliString.on(n, ops)


def _broadcast(name, answer, expected, geometry, run: _Run, plan=None) -> AttackOutcome:
    sched = cheat_completion(geometry, plan)
    answer = tuple(int(v) for v in answer)
    return AttackOutcome(name, answer, tuple(expected), (answer,) * len(sched.arrivals), sched,
                         run.records, run.p)


def _require_n(geometry: Geometry, n: int):
    if geometry.n != n:
        raise ValueError(f"attack needs {n} verifiers, geometry has {geometry.n}")


def _teleport(state: PureState, src: int, half: int, run: _Run, keys=("s1", "s2")) -> tuple[int, int, PureState]:
    """CNOT(src->half), X on src, Z on half.  Far half ends up X^m2 Z^m1 |psi>."""
    n = state.n
    state = apply_gate(state, NamedGate("CNOT", (src, half)))
    s1, state = run.pauli(state, _pauli_on(n, {src: "X"}), keys[0])
    s2, state = run.pauli(state, _pauli_on(n, {half: "Z"}), keys[1])
    return s1, s2, state


# ---------------------------------------------------------------------------
# Protocol A
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PauliEncoding:
    """A bit u stored as the (-1)^u eigenstate of X, Y or Z."""
    u: int
    basis: str

    def __post_init__(self):
        if self.basis not in ("X", "Y", "Z"):
            raise ValueError(f"basis must be one of X, Y, Z; got {self.basis!r}")
        if self.u not in (0, 1):
            raise ValueError("u is a bit")

    def encoded_state(self) -> PureState:
        z = PureState.from_bits([self.u])
        if self.basis == "Z":
            return z
        s = apply_gate(z, NamedGate("H", (0,)))
        return s if self.basis == "X" else apply_gate(s, NamedGate("S", (0,)))


def _flip_after_teleport(basis: str, s1: int, s2: int) -> int:
    """Does the byproduct X^m2 Z^m1 anticommute with the basis Pauli?"""
    m1, m2 = _bit(s1), _bit(s2)
    return (m2 if basis in ("Z", "Y") else 0) ^ (m1 if basis in ("X", "Y") else 0)


def _teleport_and_read(psi: PureState, basis: str, run: _Run) -> int:
    state = psi @ bell_pair()                       # 0: intercepted, 1: B1 half, 2: B2 half
    s1, s2, state = _teleport(state, 0, 1, run)
    o, _ = run.pauli(state, _pauli_on(3, {2: basis}), "B2_outcome")
    run.records["B2_basis"] = basis
    return _bit(o) ^ _flip_after_teleport(basis, s1, s2)


def attack_A_n2(instance: ProtocolAInstance, geometry: Geometry, rng=None, forced: dict | None = None,
                _run: _Run | None = None) -> AttackOutcome:
    """Teleport V1's qubit to B2, who learns q directly and measures in the right basis.

    Register: 0 = intercepted ``H^q|u>``, (1, 2) = shared Bell pair.
    """
    if instance.N != 2:
        raise ValueError("attack_A_n2 needs N=2")
    _require_n(geometry, 2)
    run = _run or _Run(rng, forced)
    u = _teleport_and_read(instance.encoded_state(), "X" if instance.q else "Z", run)
    return _broadcast("A_n2", (u,), expected_answer(instance), geometry, run)


def attack_A_n2_xyz(instance: PauliEncoding, geometry: Geometry, rng=None, forced: dict | None = None,
                    _run: _Run | None = None) -> AttackOutcome:
    _require_n(geometry, 2)
    run = _run or _Run(rng, forced)
    u = _teleport_and_read(instance.encoded_state(), instance.basis, run)
    return _broadcast("A_n2_xyz", (u,), (instance.u,), geometry, run)


def qss_residual(q_shares: Sequence[int], signs: Sequence[int]) -> tuple[str, int]:
    """B1's single-qubit stabilizer after parties 2..N measure their GHZ qubits.

    Party i measures X (q_i=0) or Y (q_i=1) with outcome s_i.  Returns the
    letter and its sign; the product of all N letters must be a stabilizer
    of the ``(|0..0>+|1..1>)/sqrt2`` state, which fixes both.
    """
    if len(q_shares) != len(signs) or len(q_shares) < 1:
        raise ValueError("need one sign per share")
    k = sum(int(b) & 1 for b in q_shares)
    letter = "Y" if k % 2 else "X"
    y_total = k + (letter == "Y")                   # even by construction
    sign = (-1) ** (y_total // 2)
    for s in signs:
        sign *= int(s)
    return letter, sign


def qss_residual_dense(q_shares: Sequence[int], signs: Sequence[int]) -> tuple[str, int]:
    """Dense-state counterpart of :func:`qss_residual` (forced outcomes on a GHZ vector)."""
    n = len(q_shares) + 1
    state = make_ghz(n, [0] * n, 0)
    for i, (q, s) in enumerate(zip(q_shares, signs), start=1):
        _, state = measure_pauli(state, _pauli_on(n, {i: "Y" if q else "X"}), forced=int(s))
    first = factor_out(state, 0)
    for letter in "XYZ":
        ev = np.vdot(first.amps, PauliString.parse(letter).matrix() @ first.amps).real
        if abs(abs(ev) - 1) < 1e-9:
            return letter, int(round(ev))
    raise AssertionError("residual is not a Pauli eigenstate")


def attack_A_nN_qss(instance: ProtocolAInstance, geometry: Geometry, rng=None, forced: dict | None = None,
                    _run: _Run | None = None) -> AttackOutcome:
    """Secret-sharing attack with a pre-shared N-party GHZ state.

    Register: 0 = intercepted qubit, 1..N = GHZ qubits of B1..BN.
    B_i (i>=2) measures X or Y by q_i; B1 rotates its GHZ qubit with S.H so
    the residual X/Y becomes Z/X, then Bell-measures it with V1's qubit.
    """
    N = instance.N
    if not 3 <= N <= 5:
        raise ValueError("attack_A_nN_qss supports N in 3..5")
    _require_n(geometry, N)
    run = _run or _Run(rng, forced)
    state = instance.encoded_state() @ make_ghz(N, [0] * N, 0)
    n = state.n
    signs = []
    for i, q in enumerate(instance.q_shares, start=2):
        s, state = run.pauli(state, _pauli_on(n, {i: "Y" if q else "X"}), f"s{i}")
        signs.append(s)
    letter, sigma = qss_residual(instance.q_shares, signs)
    run.records["residual"] = f"{'+' if sigma > 0 else '-'}{letter}"
    state = apply_gates(state, [NamedGate("H", (1,)), NamedGate("S", (1,))])
    a, b, _ = run.bell(state, (0, 1), "bell")
    parity = _sign(b) if letter == "Y" else _sign(a)      # XX after S.H for Y, ZZ for X
    u = _bit(parity * sigma)
    return _broadcast(f"A_n{N}_qss", (u,), expected_answer(instance), geometry, run)


def attack_A_n3_qss(instance: ProtocolAInstance, geometry: Geometry, rng=None, forced: dict | None = None,
                    _run: _Run | None = None) -> AttackOutcome:
    if instance.N != 3:
        raise ValueError("attack_A_n3_qss needs N=3")
    out = attack_A_nN_qss(instance, geometry, rng, forced, _run)
    return AttackOutcome("A_n3_qss", out.answer, out.expected, out.answers, out.schedule, out.records,
                         out.probability)


# ---------------------------------------------------------------------------
# Protocol B
# ---------------------------------------------------------------------------

def _decrypt_locals(state: PureState, instance: ProtocolBInstance) -> PureState:
    for i, seq in enumerate(instance.locals):
        state = apply_gates(state, retarget(inverse_sequence(seq), i))
    return state


def attack_B_n2(instance: ProtocolBInstance, geometry: Geometry, rng=None, forced: dict | None = None,
                _run: _Run | None = None) -> AttackOutcome:
    """Register: 0,1 = codeword qubits 1,2; (2, 3) = Bell pair, 2 with B2, 3 with B1."""
    if instance.N != 2:
        raise ValueError("attack_B_n2 needs N=2")
    _require_n(geometry, 2)
    run = _run or _Run(rng, forced)
    state = _decrypt_locals(instance.encrypted_state(), instance) @ bell_pair()
    s2, s3, state = _teleport(state, 1, 2, run, keys=("s2", "s3"))
    a_, b_, _ = run.bell(state, (0, 3), "bell")
    answer = (a_ ^ _bit(s3), b_ ^ _bit(s2))
    return _broadcast("B_n2", answer, instance.label, geometry, run)


def attack_B_n3(instance: ProtocolBInstance, geometry: Geometry, rng=None, forced: dict | None = None,
                _run: _Run | None = None) -> AttackOutcome:
    """Teleport qubits 2 and 3 of the GHZ codeword to B1, then GHZ-measure.

    Register (0-based): 0,1,2 = codeword; (3, 4) Bell pair B2-B1; (5, 6)
    Bell pair B3-B1.  B1 ends up holding 0, 4, 6.
    """
    if instance.N != 3:
        raise ValueError("attack_B_n3 needs N=3")
    _require_n(geometry, 3)
    run = _run or _Run(rng, forced)
    state = tensor_all([_decrypt_locals(instance.encrypted_state(), instance), bell_pair(), bell_pair()])
    s2, s4, state = _teleport(state, 1, 3, run, keys=("s2", "s4"))
    s3, s6, state = _teleport(state, 2, 5, run, keys=("s3", "s6"))
    (c1, c2, c3), _ = run.basis(state, ghz_code(3), (0, 4, 6), "ghz")
    answer = (c1 ^ _bit(s2 * s3), c2 ^ _bit(s4), c3 ^ _bit(s6))
    return _broadcast("B_n3", answer, instance.label, geometry, run)


def protocol_b_n3_tableau(label: Sequence[int], signs: dict[str, int]) -> StabilizerTableau:
    """Stabilizer group after both teleports of the N=3 attack (tableau engine)."""
    b1, b2, b3 = label
    tab = StabilizerTableau.from_strings([
        ("-" if b1 else "+") + "XXXIIII",
        ("-" if b2 else "+") + "ZZIIIII",
        ("-" if b3 else "+") + "ZIZIIII",
        "+IIIZZII", "+IIIXXII", "+IIIIIZZ", "+IIIIIXX",
    ])
    tab = apply_clifford(tab, "CNOT", (1, 3))
    tab = apply_clifford(tab, "CNOT", (2, 5))
    for q, letter, key in ((1, "X", "s2"), (3, "Z", "s4"), (2, "X", "s3"), (5, "Z", "s6")):
        _, tab = tableau_measure(tab, PauliString.single(7, q, letter), forced=signs[key])
    return tab


def protocol_b_n3_expected_generators(label: Sequence[int], signs: dict[str, int]) -> list[PauliString]:
    """Closed-form generators: codeword on (0, 4, 6) with outcome-dependent signs."""
    b1, b2, b3 = label
    s2, s3, s4, s6 = (signs[k] for k in ("s2", "s3", "s4", "s6"))
    on = lambda ops, sg: PauliString.on(7, ops, sg)
    return [
        on({0: "X", 4: "X", 6: "X"}, _sign(b1) * s2 * s3),
        on({0: "Z", 4: "Z"}, _sign(b2) * s4),
        on({0: "Z", 6: "Z"}, _sign(b3) * s6),
        on({1: "X"}, s2), on({2: "X"}, s3), on({3: "Z"}, s4), on({5: "Z"}, s6),
    ]


# ---------------------------------------------------------------------------
# Clifford shares through a cluster chain
# ---------------------------------------------------------------------------

_QUARTER = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _phase(a: float) -> np.ndarray:
    return np.diag([1, np.exp(1j * a)])


def euler_quarter_angles(target: np.ndarray) -> tuple[float, float, float]:
    """(a, b, c) in multiples of pi/2 with ``P(c) H P(b) H P(a) = target`` up to phase."""
    for a, b, c in itertools.product(_QUARTER, repeat=3):
        m = _phase(c) @ _H @ _phase(b) @ _H @ _phase(a)
        ov = abs(np.vdot(m, target)) / 2
        if abs(ov - 1) < 1e-9:
            return a, b, c
    raise ValueError("unitary is not a single-qubit Clifford")


def _angle_letter(a: float) -> str:
    """Measuring at angle -a is X for a in {0, pi} and Y for a in {pi/2, 3pi/2}."""
    return "X" if round(a / (math.pi / 2)) % 2 == 0 else "Y"


def chain_layout(N: int) -> list[tuple[int, list[int]]]:
    """Stations and their chain qubits (1..4N-3, qubit 1 is B1's) in logical order.

    Each station measures four qubits, moving toward chain qubit 1.
    """
    return [(i, [4 * i - 3, 4 * i - 4, 4 * i - 5, 4 * i - 6]) for i in range(N, 1, -1)]


def _z_image(seq: Sequence[NamedGate]) -> PauliString:
    p = PauliString.parse("Z")
    for g in seq:
        if not g.is_clifford:
            raise ValueError(f"gate {g.kind} is not Clifford")
        p = conjugate(p, g.kind, (0,))
    return p


def attack_A_csqc_chain(instance: ModifiedInstance, geometry: Geometry, rng=None, forced: dict | None = None,
                        _run: _Run | None = None) -> AttackOutcome:
    """Clifford-only shares: cheaters compute ``U2..UN|0>`` on a linear cluster.

    Register: 0 = intercepted ``U2..UN|u>``, 1..4N-3 = chain qubits c_1..,
    c_1 held by B1 and the far end c_{4N-3} by BN.  B_N's three rotation
    angles realise ``U_N H`` (the chain input is |+>), every other B_i's
    realise U_i; the fourth qubit of each block is measured in X.  All
    angles are Pauli so no feed-forward is needed and B1 decodes from the
    outcomes with a tableau replay.
    """
    N = instance.N
    if N not in (2, 3):
        raise ValueError("chain attack supports N in {2, 3}")
    _require_n(geometry, N)
    for seq in instance.shares:
        for g in seq:
            if not g.is_clifford:
                raise ValueError(f"share contains non-Clifford gate {g.kind}; chain attack needs Clifford shares")
    run = _run or _Run(rng, forced)
    m = 4 * N - 3
    n = m + 1

    plan = []
    for station, idx in chain_layout(N):
        u_i = sequence_matrix(instance.shares[station - 2])
        target = u_i @ _H if station == N else u_i
        angles = euler_quarter_angles(target)
        letters = [_angle_letter(a) for a in angles] + ["X"]
        plan.append((station, idx, letters))
    run.records["chain_plan"] = [(st, idx, "".join(ls)) for st, idx, ls in plan]

    plus = apply_gate(PureState.zeros(1), NamedGate("H", (0,)))
    state = instance.encoded_state() @ tensor_all([plus] * m)
    for j in range(1, m):
        state = apply_gate(state, NamedGate("CZ", (j, j + 1)))

    tab = StabilizerTableau(m, tuple(PauliString.single(m, j, "X") for j in range(m)))
    for j in range(m - 1):
        tab = apply_clifford(tab, "CZ", (j, j + 1))

    for station, idx, letters in plan:
        for j, letter in zip(idx, letters):
            s, state = run.pauli(state, _pauli_on(n, {j: letter}), f"c{j}")
            _, tab = tableau_measure(tab, PauliString.single(m, j - 1, letter), forced=s)

    # dense sanity: chain end holds a Pauli image of U2..UN|0>
    c1 = factor_out(state_without_v(state), 0)
    target = PureState.normalized((2,), instance.encrypt_matrix()[:, 0])
    run.records["chain_state_ok"] = any(
        equal_up_to_phase(c1, PureState.normalized((2,), p.matrix() @ target.amps))
        for p in map(PauliString.parse, "IXYZ"))

    res = residual_stabilizer(tab, 0)
    tau_l = _z_image(instance.encrypt_sequence())
    if res is None or res.letters[0] != tau_l.letters:
        raise AssertionError("chain residual does not match the encrypted Z image")
    sigma, tau, letter = res.sign, tau_l.sign, tau_l.letters
    run.records["residual"] = str(res)
    run.records["z_image"] = str(tau_l)

    a, b, _ = run.bell(state, (0, 1), "bell")
    parity = {"Z": _sign(a), "X": _sign(b), "Y": -_sign(a) * _sign(b)}[letter]
    u = _bit(parity * sigma * tau)
    return _broadcast("A_csqc_chain", (u,), (instance.u,), geometry, run)


def state_without_v(state: PureState) -> PureState:
    """State of subsystems 1.. when subsystem 0 is a product factor."""
    psi = state.tensor_view().reshape(state.dims[0], -1)
    u, sv, vh = np.linalg.svd(psi, full_matrices=False)
    if sv.size > 1 and sv[1] > 1e-9:
        raise ValueError("intercepted qubit is entangled with the chain")
    return PureState.normalized(state.dims[1:], vh[0])


# ---------------------------------------------------------------------------
# modified protocol, N = 2
# ---------------------------------------------------------------------------

class ModifiedStrategy(enum.Enum):
    RANDOM_GUESS = "RandomGuess"
    MEASURE_HOLD = "MeasureHold"
    TELEPORT_OPTIMAL = "TeleportOptimal"
    ENTANGLE_MEMORY = "EntangleMemory"

    @classmethod
    def parse(cls, text: str) -> ModifiedStrategy:
        for s in cls:
            if text in (s.value, s.name, s.value.lower()):
                return s
        raise ValueError(f"unknown strategy {text!r}; choose from {[s.value for s in cls]}")


def _frame_code(angles: BlochAngles) -> CodeSpace:
    return CodeSpace([make_qubit(angles), make_qubit(angles, anti=True)], [0, 1])


def _hold_answer(b: int, theta: float) -> int:
    return b if theta <= math.pi / 2 else 1 - b


def attack_modified(instance: ModifiedInstance, strategy: ModifiedStrategy | str, geometry: Geometry, rng=None,
                    forced: dict | None = None, _run: _Run | None = None) -> AttackOutcome:
    """N=2 strategies against an arbitrary rotation.

    B2 learns the rotation (theta, phi) at intercept time, B1 only after the
    exchange.  Register: 0 = intercepted qubit, then strategy-specific.
    """
    if isinstance(strategy, str):
        strategy = ModifiedStrategy.parse(strategy)
    if instance.N != 2:
        raise ValueError("modified-protocol strategies are for N=2")
    _require_n(geometry, 2)
    run = _run or _Run(rng, forced)
    ang = instance.angles
    psi = instance.encoded_state()
    expected = (instance.u,)

    if strategy is ModifiedStrategy.RANDOM_GUESS:
        o, _ = run.pauli(psi, "Z", "b")
        return _broadcast(strategy.value, (_bit(o),), expected, geometry, run)

    if strategy is ModifiedStrategy.MEASURE_HOLD:
        o, _ = run.pauli(psi, "Z", "b")
        return _broadcast(strategy.value, (_hold_answer(_bit(o), ang.theta),), expected, geometry, run)

    if strategy is ModifiedStrategy.TELEPORT_OPTIMAL:
        state = psi @ bell_pair()
        s1, s2, state = _teleport(state, 0, 1, run)
        code = _frame_code(ang)
        w, _ = run.basis(state, code, (2,), "w")
        byp = PauliString.from_letters("X") if s2 < 0 else PauliString.identity(1)
        if s1 < 0:
            byp = byp * PauliString.from_letters("Z")
        seen = code[w].amps
        like = [abs(np.vdot(seen, byp.matrix() @ code[v].amps)) ** 2 for v in (0, 1)]
        u = 0 if like[0] >= like[1] - 1e-12 else 1
        run.records["likelihoods"] = tuple(float(x) for x in like)
        return _broadcast(strategy.value, (u,), expected, geometry, run)

    # ENTANGLE_MEMORY: copy the Z value into a qubit sent on to B2; the two
    # cheaters then read it in different bases and need not agree.
    state = apply_gate(psi @ PureState.zeros(1), NamedGate("CNOT", (0, 1)))
    o, state = run.pauli(state, _pauli_on(2, {0: "Z"}), "b")
    w, _ = run.basis(state, _frame_code(ang), (1,), "w")
    sched = cheat_completion(geometry)
    answers = ((_hold_answer(_bit(o), ang.theta),), (int(w),))
    return AttackOutcome(strategy.value, answers[0], expected, answers, sched, run.records, run.p)


def maximally_entangled(d: int) -> PureState:
    return PureState.normalized((d, d), np.eye(d).ravel())


def schmidt_state(weights: Sequence[float]) -> PureState:
    """``sum_j sqrt(p_j) |j>|j>``."""
    p = np.asarray(weights, float)
    if np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-9:
        raise ValueError("Schmidt weights must be a probability vector")
    d = len(p)
    return PureState.normalized((d, d), (np.sqrt(np.clip(p, 0, None))[:, None] * np.eye(d)).ravel())


def resource_decision(basis: CodeSpace, states: np.ndarray, angles: BlochAngles) -> np.ndarray:
    """Answer table ``[j, k]``: the likelier u given B1's state j (columns of ``states``) and outcome k."""
    d = states.shape[1]
    psi = [make_qubit(angles, anti=bool(u)).amps for u in (0, 1)]
    table = np.zeros((d, len(basis)), dtype=int)
    for j in range(d):
        for k in range(len(basis)):
            like = [abs(np.vdot(basis[k].amps, np.kron(p, states[:, j]))) ** 2 for p in psi]
            table[j, k] = 0 if like[0] >= like[1] - 1e-12 else 1
    return table


def attack_resource(instance: ModifiedInstance, basis: CodeSpace, frame: np.ndarray, geometry: Geometry, rng=None,
                    forced: dict | None = None, schmidt: Sequence[float] | None = None,
                    _run: _Run | None = None) -> AttackOutcome:
    """General shared-resource strategy for N=2 with a d-level entangled pair.

    The pair is ``sum_j sqrt(p_j)|j>|j>`` (maximally entangled when
    ``schmidt`` is None).  B2, knowing (theta, phi), measures his half in
    the conjugate of ``frame`` (columns); outcome j leaves B1's half
    proportional to ``diag(sqrt p) frame[:, j]``.  B1 measures (intercepted
    qubit, his half) in the fixed ``basis``.  After the exchange both
    announce the likelier u for (j, k).
    Register: 0 = intercepted qubit, 1 = B1's half, 2 = B2's half.
    """
    if instance.N != 2:
        raise ValueError("resource strategy is for N=2")
    _require_n(geometry, 2)
    frame = np.asarray(frame, dtype=complex)
    d = frame.shape[0]
    if frame.shape != (d, d) or not np.allclose(frame.conj().T @ frame, np.eye(d), atol=1e-9):
        raise ValueError("frame must be a unitary matrix (columns = frame states)")
    if basis.dims != (2, d):
        raise ValueError(f"B1's basis must act on 2 x {d}")
    p = np.full(d, 1.0 / d) if schmidt is None else np.asarray(schmidt, float)
    if p.shape != (d,):
        raise ValueError(f"need {d} Schmidt weights")
    run = _run or _Run(rng, forced)
    state = instance.encoded_state() @ schmidt_state(p)
    b2_basis = CodeSpace([PureState((d,), frame[:, j].conj()) for j in range(d)], list(range(d)))
    j, state = run.basis(state, b2_basis, (2,), "j")
    k, _ = run.basis(state, basis, (0, 1), "k")
    k_index = [tuple(l) if isinstance(l, (list, tuple)) else l for l in basis.labels].index(k)
    states = np.sqrt(p)[:, None] * frame
    states = states / np.maximum(np.linalg.norm(states, axis=0), 1e-300)
    u = int(resource_decision(basis, states, instance.angles)[j, k_index])
    return _broadcast("resource", (u,), (instance.u,), geometry, run)


# ---------------------------------------------------------------------------
# exact enumeration
# ---------------------------------------------------------------------------

ATTACKS: dict[str, Callable[..., AttackOutcome]] = {
    "A_n2": attack_A_n2,
    "A_n2_xyz": attack_A_n2_xyz,
    "A_n3_qss": attack_A_n3_qss,
    "A_nN_qss": attack_A_nN_qss,
    "B_n2": attack_B_n2,
    "B_n3": attack_B_n3,
    "A_csqc_chain": attack_A_csqc_chain,
    "modified": attack_modified,
    "resource": attack_resource,
}


def enumerate_branches(attack: Callable[..., AttackOutcome], *args, **kwargs) -> list[AttackOutcome]:
    """Every measurement branch with nonzero probability, each run with forced outcomes."""
    out = []
    stack: list[dict] = [dict(kwargs.pop("forced", None) or {})]
    while stack:
        fixed = stack.pop()
        run = _Run(None, fixed, explore=True)
        try:
            out.append(attack(*args, _run=run, **kwargs))
        except _NeedChoice as need:
            for value, _ in need.options:
                stack.append({**fixed, need.key: value})
    return out


def exact_success_probability(attack: Callable[..., AttackOutcome], *args, **kwargs) -> float:
    return float(sum(o.probability for o in enumerate_branches(attack, *args, **kwargs) if o.success))


def sample_branches(attack: Callable[..., AttackOutcome], trials: int, rng: np.random.Generator, *args,
                    **kwargs) -> list[AttackOutcome]:
    """``trials`` draws from the attack's branch distribution.

    Equivalent in law to calling ``attack(..., rng=rng)`` ``trials`` times,
    but enumerates the branches once and samples indices.
    """
    branches = enumerate_branches(attack, *args, **kwargs)
    p = np.array([b.probability for b in branches])
    if abs(p.sum() - 1) > 1e-9:
        raise AssertionError(f"branch probabilities sum to {p.sum()}")
    idx = rng.choice(len(branches), size=trials, p=p / p.sum())
    return [branches[i] for i in idx]


def b2_marginal_counts(trials: int, rng: np.random.Generator, geometry: Geometry | None = None) -> dict:
    """Counts of B2's +1 outcome in ``attack_A_n2`` for each (u, q), ``trials`` runs each."""
    from .spacetime import collinear_geometry
    geometry = geometry or collinear_geometry()
    out = {}
    for u, q in itertools.product((0, 1), repeat=2):
        runs = sample_branches(attack_A_n2, trials, rng, ProtocolAInstance.from_shares(u, (q,)), geometry)
        out[(u, q)] = sum(r.records["B2_outcome"] == 1 for r in runs)
    return out
