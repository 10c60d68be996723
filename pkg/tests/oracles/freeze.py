"""Regenerate ``frozen.json``: ``python3 tests/oracles/freeze.py``."""
from __future__ import annotations

import itertools
import json
import math
from pathlib import Path

import numpy as np

from independent import (ghz_residual, matrix_chain, rotated_rate_gauss, rx, teleport_born, teleport_rate_mc,
                         teleport_slice)

OUT = Path(__file__).with_name("frozen.json")


def main():
    m = matrix_chain("HTHTT")
    mean, se = teleport_rate_mc(4_000_000, seed=20240611)
    thetas = np.linspace(0, math.pi, 13)
    frozen = {
        "hththt_on_zero": [[float(z.real), float(z.imag)] for z in m[:, 0]],
        "teleport_rate_mc": {"mean": mean, "stderr": se, "samples": 4_000_000, "seed": 20240611},
        "teleport_instance_pi3_pi5": teleport_born(math.pi / 3, math.pi / 5),
        "teleport_instance_pi2_0": teleport_born(math.pi / 2, 0.0),
        "teleport_profile": [{"theta": float(t), "value": teleport_slice(float(t))} for t in thetas],
        "b2_rate_identity": rotated_rate_gauss(np.eye(2)),
        "b2_rate_rx_half_pi": rotated_rate_gauss(rx(math.pi / 2)),
        "ghz_residual_n5_1110": list(ghz_residual((1, 1, 1, 0), (1, 1, 1, 1))),
        "ghz_residuals_n3": [
            {"q": list(q), "s": list(s), "residual": list(ghz_residual(q, s))}
            for q in itertools.product((0, 1), repeat=2) for s in itertools.product((1, -1), repeat=2)
        ],
    }
    OUT.write_text(json.dumps(frozen, indent=2, sort_keys=True) + "\n")
    print(json.dumps({k: v for k, v in frozen.items() if k not in ("teleport_profile", "ghz_residuals_n3")},
                     indent=2))


if __name__ == "__main__":
    main()
