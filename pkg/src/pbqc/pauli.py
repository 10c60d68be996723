"""Phased Pauli strings.

A Pauli string is stored in "XZ form": ``i**k * X^x0 Z^z0 (x) X^x1 Z^z1 ...``
so multiplication is a couple of xors and one dot product.  The printed
form uses letters (``Y = i X Z``) with qubit 1 leftmost, e.g. ``"-XIZY"``
or ``"+iXZ"``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(letter: str) -> np.ndarray:
    return _MATS[letter].copy()


@dataclass(frozen=True, eq=False)
class PauliString:
    """``i**k`` times a tensor product of X/Z powers.

    ``k`` is the XZ-form phase exponent; :attr:`phase` gives the phase in
    front of the *letter* form, which is what people write down.
    """

    k: int
    x: tuple[int, ...]
    z: tuple[int, ...]

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise ValueError("x and z bit vectors differ in length")
        object.__setattr__(self, "k", self.k % 4)
        object.__setattr__(self, "x", tuple(int(b) & 1 for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) & 1 for b in self.z))

    # construction -----------------------------------------------------
    @classmethod
    def from_letters(cls, letters: str, phase: complex = 1) -> PauliString:
        x, z = [], []
        for ch in letters:
            try:
                bx, bz = _LETTER_BITS[ch]
            except KeyError:
                raise ValueError(f"bad Pauli letter {ch!r}") from None
            x.append(bx)
            z.append(bz)
        ny = sum(1 for ch in letters if ch == "Y")
        return cls(_phase_exponent(phase) + ny, tuple(x), tuple(z))

    @classmethod
    def parse(cls, text: str) -> PauliString:
        """Parse ``"-XIZY"``, ``"+iXX"``, ``"-iZ"`` or bare ``"XZ"``."""
        s = text.strip()
        phase: complex = 1
        if s[:1] in "+-":
            phase = -1 if s[0] == "-" else 1
            s = s[1:]
            if s[:1] == "i":
                phase *= 1j
                s = s[1:]
        if not s:
            raise ValueError(f"empty Pauli string {text!r}")
        return cls.from_letters(s, phase)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(0, (0,) * n, (0,) * n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, sign: int = 1) -> PauliString:
        letters = ["I"] * n
        letters[qubit] = letter
        return cls.from_letters("".join(letters), sign)

    @classmethod
    def on(cls, n: int, ops: dict[int, str], sign: complex = 1) -> PauliString:
        letters = ["I"] * n
        for q, letter in ops.items():
            letters[q] = letter
        return cls.from_letters("".join(letters), sign)

    # views ------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.x)

    @cached_property
    def letters(self) -> str:
        return "".join(_BITS_LETTER[(a, b)] for a, b in zip(self.x, self.z))

    @property
    def phase(self) -> complex:
        """Phase in front of the letter form."""
        return 1j ** ((self.k - self.letters.count("Y")) % 4)

    @property
    def sign(self) -> int:
        """Real sign of a Hermitian string; raises for ``+-i`` phases."""
        p = self.phase
        if p == 1:
            return 1
        if p == -1:
            return -1
        raise ValueError(f"{self} is not Hermitian")

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (1, -1)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, (a, b) in enumerate(zip(self.x, self.z)) if a or b)

    def __str__(self) -> str:
        e = (self.k - self.letters.count("Y")) % 4
        return _PHASE_TEXT[e] + self.letters

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self.k, self.x, self.z) == (other.k, other.x, other.z)

    def __hash__(self) -> int:
        return hash((self.k, self.x, self.z))

    # algebra ----------------------------------------------------------
    def __mul__(self, other: PauliString) -> PauliString:
        if not isinstance(other, PauliString):
            return NotImplemented
        if other.n != self.n:
            raise ValueError("Pauli strings act on different registers")
        # Z^b X^c = (-1)^(b.c) X^c Z^b
        swap = sum(b & c for b, c in zip(self.z, other.x))
        return PauliString(
            self.k + other.k + 2 * swap,
            tuple(a ^ c for a, c in zip(self.x, other.x)),
            tuple(b ^ d for b, d in zip(self.z, other.z)),
        )

    def __neg__(self) -> PauliString:
        return PauliString(self.k + 2, self.x, self.z)

    def scaled(self, phase: complex) -> PauliString:
        return PauliString(self.k + _phase_exponent(phase), self.x, self.z)

    def unsigned(self) -> PauliString:
        """Same letters with phase +1."""
        return PauliString.from_letters(self.letters)

    def commutes(self, other: PauliString) -> bool:
        s = sum(a & d for a, d in zip(self.x, other.z)) + sum(b & c for b, c in zip(self.z, other.x))
        return s % 2 == 0

    def same_letters(self, other: PauliString) -> bool:
        return self.x == other.x and self.z == other.z

    def matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix, qubit 1 most significant."""
        out = np.array([[self.phase]], dtype=complex)
        for ch in self.letters:
            out = np.kron(out, _MATS[ch])
        return out


def _phase_exponent(phase: complex) -> int:
    for e in range(4):
        if abs(phase - 1j ** e) < 1e-12:
            return e
    raise ValueError(f"phase {phase!r} is not a power of i")
