# %% [markdown]
# # Splitting the basis does not help
#
# Protocol A hides the basis bit q in XOR shares.  A coalition holding a GHZ
# state measures X or Y per share; B1's leftover qubit is then an X or Y
# eigenstate whose sign the others' outcomes reveal.

# %%
import itertools

from pbqc.attacks import (attack_A_n3_qss, attack_B_n3, enumerate_branches, exact_success_probability, qss_residual)
from pbqc.protocols import ProtocolAInstance, ProtocolBInstance, parse_gate_sequence
from pbqc.spacetime import regular_geometry
from pbqc.stabilizer import qss_residual_tableau

print("q2 q3 | residual for (s2, s3) = (+,+) (+,-) (-,+) (-,-)")
for q2, q3 in itertools.product((0, 1), repeat=2):
    row = []
    for s in itertools.product((1, -1), repeat=2):
        letter, sign = qss_residual((q2, q3), s)
        tab = qss_residual_tableau((q2, q3), s)
        assert (tab.letters, tab.sign) == (letter, sign)
        row.append(("+" if sign > 0 else "-") + letter)
    print(f" {q2}  {q3} | " + "  ".join(row))

# %% Exhaustive branches of the three-station attack
geo = regular_geometry(3, 1.0, 0.1)
for u, q2, q3 in itertools.product((0, 1), repeat=3):
    p = exact_success_probability(attack_A_n3_qss, ProtocolAInstance.from_shares(u, (q2, q3)), geo)
    print(f"u={u} q=({q2},{q3})  success probability {p:.3f}")

# %% GHZ codewords scrambled by local Cliffords fare no better
inst = ProtocolBInstance.from_label((1, 0, 1), [parse_gate_sequence(s) for s in ("H", "S", "HS")])
branches = enumerate_branches(attack_B_n3, inst, geo)
print(f"Protocol B, 3 stations: {sum(b.success for b in branches)}/{len(branches)} branches succeed")
