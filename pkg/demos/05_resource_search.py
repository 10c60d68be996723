# %% [markdown]
# # Searching for a perfect shared resource
#
# Fix B1's measurement once, let B2 pick a frame per encoding axis, and ask
# the optimiser for the worst axis.  On the six Pauli axes a qubit pair is
# enough.  Add tilted axes and the best found stays clearly below one.
# Small restart counts keep this quick; the acceptance suite uses 32.

# %%
from pbqc.analysis.search import parse_grid, pauli_axes, qutrit_cheat_search, two_qubit_cheat_search

res = two_qubit_cheat_search(pauli_axes(), restarts=4, seed=0)
print(f"qubit pair, Pauli axes: {res.best_success:.9f}  replay verified {res.verified_perfect}")

for grid in ("ring:pi/2:16", "ring:pi/3:8", "pauli+ring:pi/3:6+ring:2pi/3:6"):
    res = two_qubit_cheat_search(parse_grid(grid), restarts=4, seed=0)
    print(f"qubit pair, {grid:32s} best {res.best_success:.4f}  gap {res.gap:.4f}")

# %% A qutrit pair, with the Schmidt weights free or fixed to equal
for weights in ("schmidt", "equal"):
    res = qutrit_cheat_search(pauli_axes(), restarts=4, seed=0, weights=weights)
    print(f"qutrit pair, Pauli axes, {weights:7s} weights {tuple(round(p, 3) for p in res.schmidt)}: "
          f"{res.best_success:.6f}")

res = qutrit_cheat_search(parse_grid("pauli+ring:pi/3:6"), restarts=4, seed=0)
print(f"qutrit pair, Pauli + tilted ring: best {res.best_success:.4f}, "
      f"residuals {res.constraint_residuals['max_even']:.3f} / {res.constraint_residuals['max_cross']:.3f}")
