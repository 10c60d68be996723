# %% [markdown]
# # Arbitrary rotations
#
# With a rotation drawn from the whole sphere the simple strategies stop
# being perfect.  Guessing wins half the time, measuring in Z and holding
# wins three quarters, teleporting and letting B2 measure in the rotated
# frame wins a bit more.

# %%
import numpy as np

from pbqc.analysis.rates import (TELEPORT_RATE_EXACT, measure_hold_rate_exact, rate_monte_carlo, rate_profile,
                                 rate_quadrature_teleport)

for name in ("RandomGuess", "MeasureHold", "TeleportOptimal"):
    r = rate_monte_carlo(name, 100_000, seed=2024)
    print(f"{name:16s} {r.rate:.4f} +- {r.stderr:.4f}")

quad, history = rate_quadrature_teleport()
print("MeasureHold exact:", measure_hold_rate_exact())
print(f"TeleportOptimal quadrature {quad:.8f} after {len(history)} refinements "
      f"(closed form {TELEPORT_RATE_EXACT:.8f})")

# %% Success against the polar angle, averaged over phi
for row in rate_profile(np.linspace(0, np.pi, 9)):
    bar = "#" * int(round(40 * (row["TeleportOptimal"] - 0.5)))
    print(f"theta={row['theta']:.3f}  hold {row['MeasureHold']:.3f}  teleport {row['TeleportOptimal']:.3f} {bar}")
