"""Dense pure-state simulation of small qubit/qutrit registers.

States are immutable: every operation returns a new :class:`PureState`.
Subsystem 0 is the most significant tensor factor, so ``|q0 q1 ...>``
matches ``np.kron`` ordering and the leftmost letter of a Pauli string.

Measurement outcomes of Pauli observables are reported as +1/-1.  Every
stochastic call takes a generator explicitly, or a ``forced`` outcome so
that individual branches can be enumerated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString, pauli_matrix

MAX_QUBIT_EQUIVALENTS = 16
NORM_TOL = 1e-10
PHASE_TOL = 1e-9
ZERO_PROB = 1e-12


class DimensionError(ValueError):
    """A qubit-only operation touched a non-qubit subsystem."""


def make_rng(seed: int | np.random.SeedSequence | None = None) -> np.random.Generator:
    """Counter-based (Philox) generator; the only RNG the package uses."""
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(seed: int | np.random.SeedSequence, count: int) -> list[np.random.Generator]:
    """Independent per-trial generators derived from one seed."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [make_rng(child) for child in ss.spawn(count)]


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PureState:
    dims: tuple[int, ...]
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d not in (2, 3) for d in dims):
            raise ValueError(f"subsystem dimensions must be 2 or 3, got {dims}")
        size = math.prod(dims)
        if math.log2(size) > MAX_QUBIT_EQUIVALENTS + 1e-9:
            raise ValueError(f"register of size {size} exceeds {MAX_QUBIT_EQUIVALENTS} qubit-equivalents")
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != size:
            raise ValueError(f"{amps.size} amplitudes for dims {dims}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def normalized(cls, dims: Sequence[int], amps) -> PureState:
        a = np.asarray(amps, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(a)
        if nrm < ZERO_PROB:
            raise ValueError("cannot normalize a zero vector")
        return cls(tuple(dims), a / nrm)

    @classmethod
    def basis(cls, dims: Sequence[int], digits: Sequence[int]) -> PureState:
        dims = tuple(dims)
        a = np.zeros(math.prod(dims), dtype=complex)
        a[np.ravel_multi_index(tuple(digits), dims)] = 1.0
        return cls(dims, a)

    @classmethod
    def zeros(cls, n: int) -> PureState:
        return cls.basis((2,) * n, (0,) * n)

    @classmethod
    def from_bits(cls, bits: str | Sequence[int]) -> PureState:
        digits = [int(b) for b in bits]
        return cls.basis((2,) * len(digits), digits)

    @property
    def n(self) -> int:
        return len(self.dims)

    def tensor(self, other: PureState) -> PureState:
        return PureState(self.dims + other.dims, np.kron(self.amps, other.amps))

    __matmul__ = tensor

    def inner(self, other: PureState) -> complex:
        """``<self|other>``."""
        if self.dims != other.dims:
            raise ValueError("dimension mismatch")
        return complex(np.vdot(self.amps, other.amps))

    def tensor_view(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    def to_text(self) -> str:
        """Plain interleaved ``re im`` decimal text (debugging aid)."""
        head = "dims " + " ".join(str(d) for d in self.dims)
        body = "\n".join(f"{a.real:.17g} {a.imag:.17g}" for a in self.amps)
        return head + "\n" + body + "\n"

    @classmethod
    def from_text(cls, text: str) -> PureState:
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("dims"):
            raise ValueError("missing dims header")
        dims = tuple(int(t) for t in lines[0].split()[1:])
        vals = [complex(float(r), float(i)) for r, i in (ln.split() for ln in lines[1:])]
        return cls(dims, np.array(vals))


def tensor_all(states: Iterable[PureState]) -> PureState:
    it = iter(states)
    out = next(it)
    for s in it:
        out = out.tensor(s)
    return out


@dataclass(frozen=True)
class BlochAngles:
    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi + 1e-12):
            raise ValueError(f"theta={self.theta} outside [0, pi]")
        if not (0.0 <= self.phi < 2 * math.pi + 1e-12):
            raise ValueError(f"phi={self.phi} outside [0, 2pi)")

    @property
    def axis(self) -> np.ndarray:
        t, p = self.theta, self.phi
        return np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])


def make_qubit(angles: BlochAngles, anti: bool = False) -> PureState:
    """``cos(t/2)|0> + sin(t/2)e^{ip}|1>`` or its orthogonal partner."""
    c, s = math.cos(angles.theta / 2), math.sin(angles.theta / 2)
    e = complex(math.cos(angles.phi), math.sin(angles.phi))
    if anti:
        return PureState((2,), [s, -c * e])
    return PureState((2,), [c, s * e])


# ---------------------------------------------------------------------------
# gates
# ---------------------------------------------------------------------------

_S2 = 1 / math.sqrt(2)
_FIXED = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "TDG": np.diag([1, np.exp(-1j * math.pi / 4)]),
    "X": pauli_matrix("X"),
    "Y": pauli_matrix("Y"),
    "Z": pauli_matrix("Z"),
}
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)
_DAGGER = {"S": "SDG", "SDG": "S", "T": "TDG", "TDG": "T"}

SINGLE_QUBIT_KINDS = frozenset(_FIXED) | {"U"}
TWO_QUBIT_KINDS = frozenset({"CNOT", "CZ"})
CLIFFORD_KINDS = frozenset({"I", "H", "S", "SDG", "X", "Y", "Z", "CNOT", "CZ"})


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]],
        dtype=complex,
    )


@dataclass(frozen=True)
class NamedGate:
    """A named gate on qubit subsystems.

    ``kind`` is one of H, S, SDG, T, TDG, X, Y, Z, I, U (arbitrary
    single-qubit, ``params=(theta, phi, lam)``), CNOT (control, target)
    or CZ.
    """

    kind: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind in SINGLE_QUBIT_KINDS:
            arity = 1
        elif self.kind in TWO_QUBIT_KINDS:
            arity = 2
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != arity:
            raise ValueError(f"{self.kind} takes {arity} target(s), got {self.targets}")
        if len(set(self.targets)) != arity:
            raise ValueError(f"repeated target in {self.targets}")
        if (self.kind == "U") != bool(self.params):
            raise ValueError("only U takes parameters (theta, phi, lam)")
        if self.kind == "U" and len(self.params) != 3:
            raise ValueError("U needs exactly (theta, phi, lam)")

    @property
    def matrix(self) -> np.ndarray:
        if self.kind == "U":
            return u3_matrix(*self.params)
        if self.kind == "CNOT":
            return _CNOT
        if self.kind == "CZ":
            return _CZ
        return _FIXED[self.kind]

    @property
    def is_clifford(self) -> bool:
        return self.kind in CLIFFORD_KINDS

    def dagger(self) -> NamedGate:
        if self.kind in _DAGGER:
            return NamedGate(_DAGGER[self.kind], self.targets)
        if self.kind == "U":
            t, p, lam = self.params
            return NamedGate("U", self.targets, (-t, -lam, -p))
        return self

    def on(self, *targets: int) -> NamedGate:
        return NamedGate(self.kind, targets, self.params)


def gate(kind: str, *targets: int, params: Sequence[float] = ()) -> NamedGate:
    return NamedGate(kind, targets, tuple(params))


def apply_unitary(state: PureState, unitary: np.ndarray, targets: Sequence[int]) -> PureState:
    """Apply an explicit unitary on ``targets`` (any mix of qubits/qutrits)."""
    targets = tuple(targets)
    if any(t < 0 or t >= state.n for t in targets) or len(set(targets)) != len(targets):
        raise ValueError(f"bad targets {targets} for {state.n} subsystems")
    d = math.prod(state.dims[t] for t in targets)
    u = np.asarray(unitary, dtype=complex)
    if u.shape != (d, d):
        raise DimensionError(f"unitary of shape {u.shape} does not act on subsystems of dims "
                             f"{[state.dims[t] for t in targets]}")
    psi = np.moveaxis(state.tensor_view(), targets, range(len(targets)))
    shape = psi.shape
    psi = (u @ psi.reshape(d, -1)).reshape(shape)
    psi = np.moveaxis(psi, range(len(targets)), targets)
    return PureState.normalized(state.dims, psi)


def apply_gate(state: PureState, g: NamedGate) -> PureState:
    for t in g.targets:
        if t < 0 or t >= state.n:
            raise ValueError(f"target {t} out of range for {state.n} subsystems")
        if state.dims[t] != 2:
            raise DimensionError(f"{g.kind} targets subsystem {t} of dimension {state.dims[t]}")
    return apply_unitary(state, g.matrix, g.targets)


def apply_gates(state: PureState, gates: Iterable[NamedGate]) -> PureState:
    for g in gates:
        state = apply_gate(state, g)
    return state


def sequence_matrix(gates: Sequence[NamedGate]) -> np.ndarray:
    """2x2 matrix of a single-qubit gate list given in application order."""
    out = np.eye(2, dtype=complex)
    for g in gates:
        if len(g.targets) != 1:
            raise ValueError("sequence_matrix handles single-qubit gates only")
        out = g.matrix @ out
    return out


def inverse_sequence(gates: Sequence[NamedGate]) -> list[NamedGate]:
    return [g.dagger() for g in reversed(gates)]


def apply_pauli(state: PureState, pauli: PauliString) -> PureState:
    _check_pauli(state, pauli)
    out = state
    for q in pauli.support:
        out = apply_unitary(out, pauli_matrix(pauli.letters[q]), (q,))
    return PureState(out.dims, out.amps * pauli.phase)


# ---------------------------------------------------------------------------
# named states
# ---------------------------------------------------------------------------

def bell_state(a: int, b: int) -> PureState:
    """``|Phi_ab> = (|0,a> + (-1)^b |1,1+a>)/sqrt2``: a is the flip bit, b the phase bit."""
    amps = np.zeros(4, dtype=complex)
    amps[a] = _S2
    amps[2 + (1 - a)] = _S2 * (-1) ** b
    return PureState((2, 2), amps)


def bell_pair() -> PureState:
    return bell_state(0, 0)


def make_ghz(n: int, a: Sequence[int], b1: int) -> PureState:
    """``(|a> + (-1)^b1 |not a>)/sqrt2`` on n qubits."""
    if n < 2:
        raise ValueError("GHZ needs n >= 2")
    a = [int(v) & 1 for v in a]
    if len(a) != n:
        raise ValueError(f"bit vector of length {len(a)} for n={n}")
    amps = np.zeros(2 ** n, dtype=complex)
    idx = int("".join(map(str, a)), 2)
    amps[idx] += _S2
    amps[(2 ** n - 1) ^ idx] += _S2 * (-1) ** (b1 & 1)
    return PureState((2,) * n, amps)


def ghz_code_state(bits: Sequence[int]) -> PureState:
    """GHZ codeword labelled by ``(b1, b2, ..., bn)`` with ``b_i = a1 xor a_i``."""
    b1, rest = bits[0], list(bits[1:])
    return make_ghz(len(bits), [0] + rest, b1)


def ghz_code(n: int) -> CodeSpace:
    """All 2**n GHZ codewords, index = bits (b1, b2..bn) read as a binary number."""
    labels = [tuple((i >> (n - 1 - j)) & 1 for j in range(n)) for i in range(2 ** n)]
    return CodeSpace([ghz_code_state(lab) for lab in labels], labels=labels)


def bell_code() -> CodeSpace:
    labels = [(0, 0), (0, 1), (1, 0), (1, 1)]
    return CodeSpace([bell_state(a, b) for a, b in labels], labels=labels)


# ---------------------------------------------------------------------------
# code spaces
# ---------------------------------------------------------------------------

class CodeSpace:
    """An orthonormal list of states on identical dims."""

    def __init__(self, states: Sequence[PureState], labels: Sequence | None = None):
        states = list(states)
        if not states:
            raise ValueError("empty code")
        dims = states[0].dims
        if any(s.dims != dims for s in states):
            raise ValueError("code states have different dims")
        mat = np.array([s.amps for s in states])
        gram = mat.conj() @ mat.T
        if not np.allclose(gram, np.eye(len(states)), atol=NORM_TOL):
            raise ValueError("code states are not orthonormal")
        self.states = states
        self.dims = dims
        self.labels = list(labels) if labels is not None else list(range(len(states)))
        self._mat = mat

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, i: int) -> PureState:
        return self.states[i]

    @property
    def matrix(self) -> np.ndarray:
        """Rows are the code states."""
        return self._mat

    def is_complete(self) -> bool:
        return len(self.states) == math.prod(self.dims)

    def locate(self, state: PureState) -> int | None:
        """Index of the code state equal to ``state`` up to phase, else None."""
        overlaps = np.abs(self._mat.conj() @ state.amps)
        i = int(np.argmax(overlaps))
        return i if abs(overlaps[i] - 1.0) < PHASE_TOL else None


def fidelity(s1: PureState, s2: PureState) -> float:
    return abs(s1.inner(s2)) ** 2


def equal_up_to_phase(s1: PureState, s2: PureState, tol: float = PHASE_TOL) -> bool:
    if s1.dims != s2.dims:
        raise ValueError("dimension mismatch")
    return abs(abs(s1.inner(s2)) - 1.0) < tol


@dataclass(frozen=True)
class ClosureWitness:
    byproduct: PauliString
    codeword: int


def code_closure_check(code: CodeSpace, byproducts: Iterable[PauliString]):
    """Does every byproduct map every codeword onto a codeword (up to phase)?

    Returns ``(True, None)`` or ``(False, ClosureWitness)`` naming the first
    violating pair in iteration order.
    """
    for p in byproducts:
        for i, s in enumerate(code.states):
            if code.locate(apply_pauli(s, p)) is None:
                return False, ClosureWitness(p, i)
    return True, None


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------

def _check_pauli(state: PureState, pauli: PauliString):
    if pauli.n != state.n:
        raise ValueError(f"Pauli string on {pauli.n} qubits for a {state.n}-subsystem state")
    for q in pauli.support:
        if state.dims[q] != 2:
            raise DimensionError(f"Pauli acts on subsystem {q} of dimension {state.dims[q]}")


def _choose(probs: Sequence[float], rng: np.random.Generator | None, forced: int | None) -> int:
    if forced is not None:
        if probs[forced] < ZERO_PROB:
            raise ValueError(f"forced outcome {forced} has zero probability")
        return forced
    if rng is None:
        raise ValueError("need an rng or a forced outcome")
    r = rng.random() * sum(probs)
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if r < acc and p >= ZERO_PROB:
            return i
    return max(i for i, p in enumerate(probs) if p >= ZERO_PROB)


def pauli_outcome_probabilities(state: PureState, pauli: PauliString) -> tuple[float, float]:
    """``(P(+1), P(-1))`` for a Hermitian Pauli observable."""
    _check_pauli(state, pauli)
    ev = state.inner(apply_pauli(state, pauli)).real
    return (1 + ev) / 2, (1 - ev) / 2


def measure_pauli(state: PureState, pauli: PauliString, rng: np.random.Generator | None = None,
                  forced: int | None = None) -> tuple[int, PureState]:
    """Projective measurement of a Hermitian Pauli; returns (+1 or -1, post-state)."""
    if not pauli.is_hermitian:
        raise ValueError(f"{pauli} is not an observable")
    p_plus, p_minus = pauli_outcome_probabilities(state, pauli)
    idx = _choose([p_plus, p_minus], rng, None if forced is None else (0 if forced == 1 else 1))
    s = 1 if idx == 0 else -1
    flipped = apply_pauli(state, pauli)
    return s, PureState.normalized(state.dims, (state.amps + s * flipped.amps) / 2)


def _project(state: PureState, basis: CodeSpace, targets):
    targets = tuple(range(state.n)) if targets is None else tuple(targets)
    if tuple(state.dims[t] for t in targets) != basis.dims:
        raise ValueError("basis dims do not match the measured subsystems")
    if not basis.is_complete():
        raise ValueError("basis does not span the measured space")
    d = basis.matrix.shape[1]
    psi = np.moveaxis(state.tensor_view(), targets, range(len(targets)))
    shape = psi.shape
    proj = basis.matrix.conj() @ psi.reshape(d, -1)   # (k, rest) amplitudes
    return targets, shape, proj, np.sum(np.abs(proj) ** 2, axis=1)


def projective_probabilities(state: PureState, basis: CodeSpace, targets: Sequence[int] | None = None
                             ) -> np.ndarray:
    return _project(state, basis, targets)[3]


def projective_measure(state: PureState, basis: CodeSpace, targets: Sequence[int] | None = None,
                       rng: np.random.Generator | None = None, forced: int | None = None
                       ) -> tuple[int, PureState]:
    """Von Neumann measurement in ``basis`` on ``targets`` (default: all).

    The measured subsystems collapse onto the selected basis state.
    """
    targets, shape, proj, probs = _project(state, basis, targets)
    k = _choose(list(probs), rng, forced)
    post = np.outer(basis.matrix[k], proj[k]).reshape(shape)
    post = np.moveaxis(post, range(len(targets)), targets)
    return k, PureState.normalized(state.dims, post)


def bell_measure(state: PureState, pair: tuple[int, int], rng: np.random.Generator | None = None,
                 forced: tuple[int, int] | None = None) -> tuple[int, int, PureState]:
    """Bell-basis measurement; returns ``(a', b', post)`` with the pair left in ``|Phi_a'b'>``."""
    i, j = pair
    if state.dims[i] != 2 or state.dims[j] != 2:
        raise DimensionError("Bell measurement needs two qubits")
    code = bell_code()
    k, post = projective_measure(state, code, (i, j), rng,
                                 None if forced is None else code.labels.index(tuple(forced)))
    a, b = code.labels[k]
    return a, b, post


def teleport(state: PureState, src: int, half: int, rng: np.random.Generator | None = None,
             forced: tuple[int, int] | None = None) -> tuple[int, int, PureState]:
    """Teleport qubit ``src`` through the pair whose near half is ``half``.

    CNOT(src -> half), then X on ``src`` (outcome s1) and Z on ``half``
    (outcome s2).  The far half of the pair is left in
    ``X^{(1-s2)/2} Z^{(1-s1)/2} |psi>``.
    """
    n = state.n
    state = apply_gate(state, NamedGate("CNOT", (src, half)))
    f1, f2 = (None, None) if forced is None else forced
    s1, state = measure_pauli(state, PauliString.single(n, src, "X"), rng, f1)
    s2, state = measure_pauli(state, PauliString.single(n, half, "Z"), rng, f2)
    return s1, s2, state


def teleport_byproduct(s1: int, s2: int) -> PauliString:
    """Single-qubit ``X^{(1-s2)/2} Z^{(1-s1)/2}``; applying it again undoes it up to phase."""
    out = PauliString.identity(1)
    if s1 < 0:
        out = PauliString.from_letters("Z") * out
    if s2 < 0:
        out = PauliString.from_letters("X") * out
    return out


def factor_out(state: PureState, subsystem: int, tol: float = 1e-9) -> PureState:
    """Pure state of one subsystem when it is unentangled from the rest."""
    psi = np.moveaxis(state.tensor_view(), subsystem, 0).reshape(state.dims[subsystem], -1)
    u, sv, _ = np.linalg.svd(psi, full_matrices=False)
    if sv.size > 1 and sv[1] > tol:
        raise ValueError(f"subsystem {subsystem} is entangled (second Schmidt coefficient {sv[1]:.3g})")
    return PureState.normalized((state.dims[subsystem],), u[:, 0])
