"""Honest runs of the three position-verification protocols.

* Protocol A: V1 sends ``H^q |u>``; the basis bit q is split into XOR
  shares sent by V2..VN.
* Protocol B: a GHZ codeword, each qubit scrambled by a local unitary
  U_i whose description is sent by V_i.
* Modified protocol: V1 sends ``U2 ... UN |u>`` with arbitrary (generally
  non-Clifford) single-qubit U_i announced by V2..VN.

Gate sequences are lists of single-qubit :class:`NamedGate` on target 0,
in application order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from operator import xor
from typing import Sequence

import numpy as np

from .quantum_core import (BlochAngles, CodeSpace, NamedGate, PureState, apply_gate, apply_gates,
                           bell_code, ghz_code, inverse_sequence, make_ghz, make_qubit, measure_pauli,
                           projective_measure, sequence_matrix)
from .pauli import PauliString
from .spacetime import Geometry, ScheduleReport, feasibility_check, honest_completion, on_time

GateSeq = tuple[NamedGate, ...]


def retarget(seq: Sequence[NamedGate], qubit: int) -> list[NamedGate]:
    return [g.on(qubit) for g in seq]


def parse_gate_sequence(text: str) -> GateSeq:
    """``"HTHTT"`` (operator-product order, rightmost acts first) -> application-order gates.

    Letters: H S T X Y Z I, plus ``s``/``t`` for S-dagger/T-dagger.
    """
    names = {"H": "H", "S": "S", "T": "T", "X": "X", "Y": "Y", "Z": "Z", "I": "I", "s": "SDG", "t": "TDG"}
    text = text.strip()
    if text in ("", "-"):
        return ()
    try:
        return tuple(NamedGate(names[ch], (0,)) for ch in reversed(text))
    except KeyError as e:
        raise ValueError(f"unknown gate letter {e.args[0]!r} in {text!r}") from None


def sequence_label(seq: Sequence[NamedGate]) -> str:
    """Operator-product label of an application-order sequence (inverse of parse)."""
    letters = {"SDG": "s", "TDG": "t"}
    out = []
    for g in reversed(seq):
        if g.kind == "U":
            raise ValueError("U gates have no letter label")
        out.append(letters.get(g.kind, g.kind))
    return "".join(out)


def compile_bit_program(bits: str) -> GateSeq:
    """'0' -> H, '1' -> T, read as an operator product: '01011' is HTHTT."""
    if any(b not in "01" for b in bits):
        raise ValueError(f"program must be a bit string, got {bits!r}")
    return parse_gate_sequence(bits.replace("0", "H").replace("1", "T"))


def rotation_to_angles(angles: BlochAngles) -> GateSeq:
    """One U gate sending |0> to |psi> and |1> to |psi-bar> (up to phase)."""
    return (NamedGate("U", (0,), (angles.theta, angles.phi, 0.0)),)


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProtocolAInstance:
    N: int
    u: int
    q: int
    q_shares: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "q_shares", tuple(int(b) for b in self.q_shares))
        if self.N < 2:
            raise ValueError("Protocol A needs N >= 2")
        if len(self.q_shares) != self.N - 1:
            raise ValueError(f"need {self.N - 1} shares q_2..q_N")
        if any(b not in (0, 1) for b in (self.u, self.q, *self.q_shares)):
            raise ValueError("u, q and shares are bits")
        if reduce(xor, self.q_shares, 0) != self.q:
            raise ValueError("q must equal the XOR of its shares")

    @classmethod
    def from_shares(cls, u: int, q_shares: Sequence[int]) -> ProtocolAInstance:
        shares = tuple(int(b) for b in q_shares)
        return cls(len(shares) + 1, u, reduce(xor, shares, 0), shares)

    @classmethod
    def random(cls, N: int, rng: np.random.Generator) -> ProtocolAInstance:
        return cls.from_shares(int(rng.integers(2)), rng.integers(0, 2, N - 1).tolist())

    def encoded_state(self) -> PureState:
        s = PureState.from_bits([self.u])
        return apply_gate(s, NamedGate("H", (0,))) if self.q else s


@dataclass(frozen=True)
class ProtocolBInstance:
    N: int
    a: tuple[int, ...]
    b1: int
    locals: tuple[GateSeq, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        locs = tuple(tuple(s) for s in self.locals) or ((),) * self.N
        object.__setattr__(self, "locals", locs)
        if len(self.a) != self.N:
            raise ValueError(f"need {self.N} bits a_1..a_N")
        if len(locs) != self.N:
            raise ValueError(f"need {self.N} local gate sequences")
        for seq in locs:
            if any(len(g.targets) != 1 for g in seq):
                raise ValueError("local unitaries must be single-qubit gates")

    @property
    def label(self) -> tuple[int, ...]:
        """Codeword label: Bell ``(a, b)`` for N=2, ``(b1, b2, ..., bN)`` otherwise."""
        b = tuple(self.a[0] ^ self.a[i] for i in range(1, self.N))
        if self.N == 2:
            return (b[0], self.b1)
        return (self.b1,) + b

    @classmethod
    def from_label(cls, label: Sequence[int], locals: Sequence[Sequence[NamedGate]] = ()) -> ProtocolBInstance:
        label = tuple(int(v) for v in label)
        if len(label) == 2:
            a, b = label
            return cls(2, (0, a), b, tuple(tuple(s) for s in locals))
        return cls(len(label), (0,) + label[1:], label[0], tuple(tuple(s) for s in locals))

    def code(self) -> CodeSpace:
        return bell_code() if self.N == 2 else ghz_code(self.N)

    def code_state(self) -> PureState:
        return make_ghz(self.N, self.a, self.b1)

    def encrypted_state(self) -> PureState:
        s = self.code_state()
        for i, seq in enumerate(self.locals):
            s = apply_gates(s, retarget(seq, i))
        return s


@dataclass(frozen=True)
class ModifiedInstance:
    N: int
    u: int
    shares: tuple[GateSeq, ...]
    program: BlochAngles | str | None = None

    def __post_init__(self):
        object.__setattr__(self, "shares", tuple(tuple(s) for s in self.shares))
        if self.N < 2:
            raise ValueError("need N >= 2")
        if self.u not in (0, 1):
            raise ValueError("u is a bit")
        if len(self.shares) != self.N - 1:
            raise ValueError(f"need {self.N - 1} shares U_2..U_N")
        for seq in self.shares:
            if any(len(g.targets) != 1 for g in seq):
                raise ValueError("shares must be single-qubit gates")
        # decrypt(encrypt(|u>)) must give back |u>
        if not np.allclose(self.decrypt_matrix() @ self.encrypt_matrix(), np.eye(2), atol=1e-10):
            raise ValueError("shares do not compose to an invertible encryption")

    @classmethod
    def from_bits(cls, u: int, bits: str, N: int = 2) -> ModifiedInstance:
        """Split the bit program into N-1 contiguous chunks, chunk i going to V_{i+2}."""
        if N < 2:
            raise ValueError("need N >= 2")
        cuts = np.linspace(0, len(bits), N).round().astype(int)
        chunks = [bits[cuts[i]:cuts[i + 1]] for i in range(N - 1)]
        return cls(N, u, tuple(compile_bit_program(ch) for ch in chunks), bits)

    @classmethod
    def from_angles(cls, u: int, angles: BlochAngles) -> ModifiedInstance:
        return cls(2, u, (rotation_to_angles(angles),), angles)

    @classmethod
    def from_sequences(cls, u: int, labels: Sequence[str]) -> ModifiedInstance:
        return cls(len(labels) + 1, u, tuple(parse_gate_sequence(s) for s in labels))

    def encrypt_sequence(self) -> list[NamedGate]:
        """Gates producing ``U2 ... UN |u>``: U_N acts first."""
        return [g for seq in reversed(self.shares) for g in seq]

    def decrypt_sequence(self) -> list[NamedGate]:
        """U_2^dag first, then U_3^dag, ..."""
        return [g for seq in self.shares for g in inverse_sequence(seq)]

    def encrypt_matrix(self) -> np.ndarray:
        return sequence_matrix(self.encrypt_sequence())

    def decrypt_matrix(self) -> np.ndarray:
        return sequence_matrix(self.decrypt_sequence())

    @property
    def angles(self) -> BlochAngles:
        """Bloch angles of the ``u=0`` encoded state."""
        if isinstance(self.program, BlochAngles):
            return self.program
        v = self.encrypt_matrix()[:, 0]
        v = v * np.exp(-1j * np.angle(v[0])) if abs(v[0]) > 1e-12 else v * np.exp(-1j * np.angle(v[1]))
        theta = 2 * math.atan2(abs(v[1]), abs(v[0]))
        phi = float(np.angle(v[1]) % (2 * math.pi)) if abs(v[1]) > 1e-12 else 0.0
        return BlochAngles(min(theta, math.pi), 0.0 if phi >= 2 * math.pi - 1e-15 else phi)

    def encoded_state(self) -> PureState:
        if isinstance(self.program, BlochAngles):
            return make_qubit(self.program, anti=bool(self.u))
        return apply_gates(PureState.from_bits([self.u]), self.encrypt_sequence())


@dataclass(frozen=True)
class Transcript:
    answer: tuple[int, ...]
    schedule: ScheduleReport
    answers: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.answers) != len(self.schedule.arrivals):
            raise ValueError("every verifier needs an answer")


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: str

    def __bool__(self) -> bool:
        return self.accepted


# ---------------------------------------------------------------------------
# honest runs
# ---------------------------------------------------------------------------

def _check_geometry(geometry: Geometry, n: int):
    if geometry.n != n:
        raise ValueError(f"geometry has {geometry.n} verifiers, protocol needs {n}")
    feasible, _ = feasibility_check(geometry)
    if not feasible:
        raise ValueError("geometry infeasible: P is not strictly inside the verifiers' hull")


def _broadcast(answer: tuple[int, ...], geometry: Geometry) -> Transcript:
    sched = honest_completion(geometry)
    return Transcript(answer, sched, (answer,) * geometry.n)


def protA_run_honest(instance: ProtocolAInstance, geometry: Geometry, rng: np.random.Generator | None = None
                     ) -> Transcript:
    _check_geometry(geometry, instance.N)
    q = reduce(xor, instance.q_shares, 0)
    s = instance.encoded_state()
    if q:
        s = apply_gate(s, NamedGate("H", (0,)))
    out, _ = measure_pauli(s, PauliString.parse("Z"), rng)
    return _broadcast(((1 - out) // 2,), geometry)


def protB_run_honest(instance: ProtocolBInstance, geometry: Geometry, rng: np.random.Generator | None = None
                     ) -> Transcript:
    if instance.N not in (2, 3):
        raise ValueError("Protocol B honest run supports N in {2, 3}")
    _check_geometry(geometry, instance.N)
    s = instance.encrypted_state()
    for i, seq in enumerate(instance.locals):
        s = apply_gates(s, retarget(inverse_sequence(seq), i))
    code = instance.code()
    k, _ = projective_measure(s, code, rng=rng)
    return _broadcast(tuple(code.labels[k]), geometry)


def modified_run_honest(instance: ModifiedInstance, geometry: Geometry, rng: np.random.Generator | None = None
                        ) -> Transcript:
    _check_geometry(geometry, instance.N)
    s = instance.encoded_state()
    if isinstance(instance.program, BlochAngles):
        # explicit angles: P undoes the U(theta, phi, 0) rotation
        s = apply_gates(s, inverse_sequence(rotation_to_angles(instance.program)))
    else:
        s = apply_gates(s, instance.decrypt_sequence())
    out, _ = measure_pauli(s, PauliString.parse("Z"), rng)
    return _broadcast(((1 - out) // 2,), geometry)


def missing_share_trials(N: int, trials: int, rng: np.random.Generator, drop: int = 0) -> tuple[float, float]:
    """Protocol A with share ``q_{drop+2}`` withheld and replaced by a fair coin.

    Returns ``(basis_accuracy, decode_accuracy)``.  The reconstructed basis
    is right half the time; a wrong basis still decodes ``u`` with
    probability 1/2, so decoding succeeds 3/4 of the time overall.
    """
    if not 0 <= drop < N - 1:
        raise ValueError(f"drop must index one of the {N - 1} shares")
    basis_ok = decode_ok = 0
    z = PauliString.parse("Z")
    for _ in range(trials):
        inst = ProtocolAInstance.random(N, rng)
        shares = list(inst.q_shares)
        shares[drop] = int(rng.integers(2))
        q_guess = reduce(xor, shares, 0)
        s = inst.encoded_state()
        if q_guess:
            s = apply_gate(s, NamedGate("H", (0,)))
        out, _ = measure_pauli(s, z, rng)
        basis_ok += q_guess == inst.q
        decode_ok += (1 - out) // 2 == inst.u
    return basis_ok / trials, decode_ok / trials


def expected_answer(instance) -> tuple[int, ...]:
    if isinstance(instance, ProtocolBInstance):
        return instance.label
    return (instance.u,)


def verify_response(transcript, expected: Sequence[int] | int, geometry: Geometry | None = None) -> Verdict:
    """Accept iff all verifiers got the same, correct answer on time.

    ``transcript`` is anything with ``answers`` and ``schedule`` (a
    :class:`Transcript` or an attack outcome).
    """
    expected = (expected,) if isinstance(expected, int) else tuple(expected)
    answers = [tuple(a) for a in transcript.answers]
    sched = transcript.schedule
    deadline = sched.deadline if geometry is None else honest_completion(geometry).completion
    if len(answers) != len(sched.arrivals) or not answers:
        return Verdict(False, "missing answer")
    if len(set(answers)) > 1:
        return Verdict(False, "inconsistent answers across verifiers")
    if answers[0] != expected:
        return Verdict(False, "wrong answer")
    if not on_time(sched.completion, deadline):
        return Verdict(False, f"late: completion {sched.completion:.12g} > deadline {deadline:.12g}")
    return Verdict(True, "accepted")
