# %% [markdown]
# # Who gets there first
#
# Cheaters sit just outside the restricted area, intercept, swap classical
# notes and reply.  With two stations on a line they arrive exactly on the
# honest deadline; with three around a triangle they arrive early.

# %%
import math

from pbqc.spacetime import (Geometry, Position, cheat_completion, feasibility_check, honest_completion,
                            regular_geometry, witness_dominates)

for n in (2, 3, 4, 5):
    g = regular_geometry(n, d=1.0, l=0.1, c=1.0)
    cheat = cheat_completion(g)
    print(f"N={n}: honest {honest_completion(g).completion:.6f}  cheaters {cheat.completion:.6f}  "
          f"on time: {cheat.meets_deadline}")

print("triangle closed form 2d + (sqrt3 - 2) l =", 2 + (math.sqrt(3) - 2) * 0.1)

# %% Sweep the restricted radius for the triangle
for l in (0.05, 0.1, 0.2, 0.4):
    r = cheat_completion(regular_geometry(3, 1.0, l))
    print(f"l={l:.2f}  cheat completion {r.completion:.4f}  slack {r.deadline - r.completion:.4f}")

# %% A claimed position outside the verifiers' triangle
tri = (Position(0, 0), Position(2, 0), Position(1, 1.5))
g = Geometry(tri, Position(1, -0.6), 0.05, 1.0).with_default_cheaters()
ok, witness = feasibility_check(g)
print("feasible:", ok, "| interior witness:", witness, "| dominates:", witness_dominates(g, witness))
