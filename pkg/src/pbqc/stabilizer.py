"""Clifford tableau simulation and sign-symbolic stabilizer bookkeeping.

A :class:`StabilizerTableau` holds n commuting, independent, Hermitian
generators.  Measurement follows the usual rule: a Pauli that anticommutes
with some generator gives a random (or forced) outcome and replaces that
generator; otherwise it is +-1 times an element of the group and the sign
is recovered by GF(2) elimination.

Forced outcomes are first class, which is how sign tables written in terms
of symbolic outcomes ``s_i`` get checked: enumerate every assignment.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString
from .quantum_core import CLIFFORD_KINDS, PureState

_X, _Z = "X", "Z"


def _img(n: int, ops: dict[int, str], k: int = 0) -> PauliString:
    # ops uses XZ-form letters: "X", "Z", or "XZ"
    x = [0] * n
    z = [0] * n
    for q, s in ops.items():
        x[q] = int("X" in s)
        z[q] = int("Z" in s)
    return PauliString(k, tuple(x), tuple(z))


def _images(kind: str, targets: Sequence[int], n: int) -> dict[tuple[int, str], PauliString]:
    """Conjugation images ``G X_q G^dag`` and ``G Z_q G^dag`` in XZ form."""
    if kind in ("H", "S", "SDG", "X", "Y", "Z", "I"):
        (q,) = targets
        table = {
            "I": ((0, "X"), (0, "Z")),
            "H": ((0, "Z"), (0, "X")),
            "S": ((1, "XZ"), (0, "Z")),
            "SDG": ((3, "XZ"), (0, "Z")),
            "X": ((0, "X"), (2, "Z")),
            "Y": ((2, "X"), (2, "Z")),
            "Z": ((2, "X"), (0, "Z")),
        }[kind]
        (kx, sx), (kz, sz) = table
        return {(q, _X): _img(n, {q: sx}, kx), (q, _Z): _img(n, {q: sz}, kz)}
    if kind == "CNOT":
        c, t = targets
        return {
            (c, _X): _img(n, {c: "X", t: "X"}),
            (c, _Z): _img(n, {c: "Z"}),
            (t, _X): _img(n, {t: "X"}),
            (t, _Z): _img(n, {c: "Z", t: "Z"}),
        }
    if kind == "CZ":
        a, b = targets
        return {
            (a, _X): _img(n, {a: "X", b: "Z"}),
            (a, _Z): _img(n, {a: "Z"}),
            (b, _X): _img(n, {a: "Z", b: "X"}),
            (b, _Z): _img(n, {b: "Z"}),
        }
    raise ValueError(f"{kind} is not a supported Clifford gate")


def conjugate(pauli: PauliString, kind: str, targets: Sequence[int]) -> PauliString:
    """``G P G^dag`` for a Clifford gate G."""
    targets = tuple(targets)
    imgs = _images(kind, targets, pauli.n)
    x = list(pauli.x)
    z = list(pauli.z)
    for q in targets:
        x[q] = z[q] = 0
    out = PauliString(pauli.k, tuple(x), tuple(z))
    for q in targets:
        if pauli.x[q]:
            out = out * imgs[(q, _X)]
        if pauli.z[q]:
            out = out * imgs[(q, _Z)]
    return out


# ---------------------------------------------------------------------------
# GF(2) helpers
# ---------------------------------------------------------------------------

def _symplectic(p: PauliString) -> np.ndarray:
    return np.array(p.x + p.z, dtype=np.uint8)


def _gf2_rank(rows: np.ndarray) -> int:
    m = rows.copy() % 2
    rank = 0
    for col in range(m.shape[1]):
        piv = next((r for r in range(rank, m.shape[0]) if m[r, col]), None)
        if piv is None:
            continue
        m[[rank, piv]] = m[[piv, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def _gf2_solve(gens: np.ndarray, target: np.ndarray) -> np.ndarray | None:
    """Bits c with ``c @ gens == target (mod 2)``, or None."""
    a = np.concatenate([gens.T, target[:, None]], axis=1).astype(np.uint8) % 2
    rows, cols = a.shape[0], gens.shape[0]
    pivots = []
    r = 0
    for col in range(cols):
        piv = next((i for i in range(r, rows) if a[i, col]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(rows):
            if i != r and a[i, col]:
                a[i] ^= a[r]
        pivots.append(col)
        r += 1
    if any(a[i, -1] for i in range(r, rows)):
        return None
    c = np.zeros(cols, dtype=np.uint8)
    for i, col in enumerate(pivots):
        c[col] = a[i, -1]
    return c


# ---------------------------------------------------------------------------
# tableau
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilizerTableau:
    n: int
    generators: tuple[PauliString, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if len(gens) != self.n:
            raise ValueError(f"need {self.n} generators, got {len(gens)}")
        for g in gens:
            if g.n != self.n:
                raise ValueError(f"generator {g} has wrong length")
            if g.phase not in (1, -1):
                raise ValueError(f"generator {g} has a non-real phase")
        for i, g in enumerate(gens):
            for h in gens[i + 1:]:
                if not g.commutes(h):
                    raise ValueError(f"generators {g} and {h} anticommute")
        if _gf2_rank(np.array([_symplectic(g) for g in gens])) != self.n:
            raise ValueError("generators are not independent")

    @classmethod
    def from_strings(cls, strings: Iterable[str | PauliString]) -> StabilizerTableau:
        gens = [s if isinstance(s, PauliString) else PauliString.parse(s) for s in strings]
        return cls(len(gens), tuple(gens))

    @classmethod
    def zeros(cls, n: int) -> StabilizerTableau:
        return cls(n, tuple(PauliString.single(n, q, "Z") for q in range(n)))

    def __str__(self) -> str:
        return "<" + ", ".join(str(g) for g in self.generators) + ">"

    def tensor(self, other: StabilizerTableau) -> StabilizerTableau:
        n = self.n + other.n
        gens = [PauliString.from_letters(g.letters + "I" * other.n, g.sign) for g in self.generators]
        gens += [PauliString.from_letters("I" * self.n + g.letters, g.sign) for g in other.generators]
        return StabilizerTableau(n, tuple(gens))

    def expectation(self, pauli: PauliString) -> int | None:
        """+1/-1 if ``+-pauli`` is in the stabilizer group, else None."""
        if any(not pauli.commutes(g) for g in self.generators):
            return None
        gens = np.array([_symplectic(g) for g in self.generators])
        c = _gf2_solve(gens, _symplectic(pauli))
        if c is None:
            return None
        prod = PauliString.identity(self.n)
        for bit, g in zip(c, self.generators):
            if bit:
                prod = prod * g
        if prod == pauli:
            return 1
        if prod == -pauli:
            return -1
        raise AssertionError("group element differs from target by an imaginary phase")

    def contains(self, pauli: PauliString) -> bool:
        return self.expectation(pauli) == 1


def apply_clifford(tab: StabilizerTableau, kind: str, targets: Sequence[int]) -> StabilizerTableau:
    if kind not in CLIFFORD_KINDS:
        raise ValueError(f"{kind} is not Clifford")
    return StabilizerTableau(tab.n, tuple(conjugate(g, kind, targets) for g in tab.generators))


def apply_cliffords(tab: StabilizerTableau, ops: Iterable[tuple[str, Sequence[int]]]) -> StabilizerTableau:
    for kind, targets in ops:
        tab = apply_clifford(tab, kind, targets)
    return tab


def tableau_measure(tab: StabilizerTableau, pauli: PauliString, rng: np.random.Generator | None = None,
                    forced: int | None = None) -> tuple[int, StabilizerTableau]:
    """Measure a Hermitian Pauli; returns (+1 or -1, updated tableau)."""
    if pauli.phase not in (1, -1):
        raise ValueError(f"{pauli} is not an observable")
    anti = [i for i, g in enumerate(tab.generators) if not g.commutes(pauli)]
    if not anti:
        value = tab.expectation(pauli)
        if forced is not None and forced != value:
            raise ValueError(f"forced outcome {forced} contradicts deterministic outcome {value}")
        return value, tab
    if forced is not None:
        if forced not in (1, -1):
            raise ValueError("forced outcome must be +1 or -1")
        s = forced
    elif rng is None:
        raise ValueError("need an rng or a forced outcome")
    else:
        s = 1 if rng.random() < 0.5 else -1
    p = anti[0]
    gens = list(tab.generators)
    for i in anti[1:]:
        gens[i] = gens[i] * gens[p]
    gens[p] = pauli if s == 1 else -pauli
    return s, StabilizerTableau(tab.n, tuple(gens))


def residual_stabilizer(tab: StabilizerTableau, qubit: int) -> PauliString | None:
    """The signed single-qubit element of the group on ``qubit``, if any."""
    for letter in "XYZ":
        p = PauliString.single(tab.n, qubit, letter)
        v = tab.expectation(p)
        if v is not None:
            return p if v == 1 else -p
    return None


def ghz_party_rule(q_bits: Sequence[int]) -> str:
    """Basis of B1's GHZ qubit after parties 2..N measure X (q=0) or Y (q=1)."""
    if len(q_bits) < 2:
        raise ValueError("rule defined for N >= 3 (at least two measuring parties)")
    return "Y" if sum(int(b) & 1 for b in q_bits) % 2 else "X"


def ghz_tableau(n: int, a: Sequence[int] | None = None, b1: int = 0) -> StabilizerTableau:
    """Stabilizers of ``(|a> + (-1)^b1 |not a>)/sqrt2``."""
    a = [0] * n if a is None else [int(v) & 1 for v in a]
    gens = [PauliString.from_letters("X" * n, (-1) ** b1)]
    for i in range(1, n):
        gens.append(PauliString.on(n, {i - 1: "Z", i: "Z"}, (-1) ** (a[i - 1] ^ a[i])))
    return StabilizerTableau(n, tuple(gens))


def bell_tableau(a: int = 0, b: int = 0) -> StabilizerTableau:
    return StabilizerTableau.from_strings([("-" if a else "+") + "ZZ", ("-" if b else "+") + "XX"])


def tableau_to_state(tab: StabilizerTableau) -> PureState:
    """Dense joint +1 eigenvector (reference oracle; small n only)."""
    dim = 2 ** tab.n
    proj = np.eye(dim, dtype=complex)
    for g in tab.generators:
        proj = proj @ (np.eye(dim) + g.matrix()) / 2
    col = int(np.argmax(np.linalg.norm(proj, axis=0)))
    return PureState.normalized((2,) * tab.n, proj[:, col])


def qss_residual_tableau(q_shares: Sequence[int], signs: Sequence[int]) -> PauliString:
    """B1's single-qubit stabilizer after parties 2..N measure X (q=0) or Y (q=1) on a GHZ state."""
    n = len(q_shares) + 1
    if len(signs) != n - 1:
        raise ValueError("need one outcome per measuring party")
    tab = ghz_tableau(n)
    for i, (q, s) in enumerate(zip(q_shares, signs), start=1):
        _, tab = tableau_measure(tab, PauliString.single(n, i, "Y" if q else "X"), forced=int(s))
    res = residual_stabilizer(tab, 0)
    if res is None:
        raise AssertionError("first qubit is still entangled")
    return PauliString.from_letters(res.letters[0], res.sign)
