# %% [markdown]
# # Teleportation byproducts and code spaces
#
# A cheater who teleports a qubit does not control which Pauli lands on it.
# Whether that matters depends on whether the code the verifiers use is
# closed under those Paulis.

# %%
import numpy as np

from pbqc.pauli import PauliString
from pbqc.quantum_core import (CodeSpace, PureState, apply_pauli, bell_code, bell_pair, code_closure_check, fidelity,
                               make_rng, teleport, teleport_byproduct)

rng = make_rng(1)
psi = PureState.normalized((2,), rng.normal(size=2) + 1j * rng.normal(size=2))

# %% Every branch of the Bell measurement, corrected by its byproduct
for forced in [(1, 1), (1, -1), (-1, 1), (-1, -1)]:
    s1, s2, post = teleport(psi @ bell_pair(), 0, 1, forced=forced)
    amps = post.amps.reshape(2, 2, 2)
    i, j, _ = np.unravel_index(np.argmax(np.abs(amps)), amps.shape)
    far = PureState.normalized((2,), amps[i, j])
    fixed = apply_pauli(far, teleport_byproduct(s1, s2))
    print(f"s1={s1:+d} s2={s2:+d}  byproduct {teleport_byproduct(s1, s2)}  fidelity after fix {fidelity(fixed, psi):.12f}")

# %% The Bell code is closed under every two-qubit Pauli
paulis = [PauliString.parse(a + b) for a in "IXYZ" for b in "IXYZ"]
print("Bell code closed:", code_closure_check(bell_code(), paulis)[0])

# %% Mixing product states with triplet/singlet breaks closure
r = 1 / np.sqrt(2)
mixed = CodeSpace([PureState((2, 2), [1, 0, 0, 0]), PureState((2, 2), [0, r, r, 0]),
                   PureState((2, 2), [0, r, -r, 0]), PureState((2, 2), [0, 0, 0, 1])])
closed, witness = code_closure_check(mixed, paulis)
print("mixed code closed:", closed, "| witness:", witness.byproduct, "on codeword", witness.codeword)
