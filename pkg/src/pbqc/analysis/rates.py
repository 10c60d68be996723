"""Success rates of the N=2 strategies against the modified protocol.

Encodings are drawn from the uniform sphere measure: cos(theta) uniform on
[-1, 1] and phi uniform on [0, 2pi).  Two Monte Carlo engines exist:

* ``batched`` replays each strategy's measurement sequence with vectorised
  Born sampling (same outcomes, same decision rules as the attacks module);
* ``scalar`` calls :func:`attacks.attack_modified` once per sample.

They agree in distribution; the tests cross-check them.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from ..attacks import ModifiedStrategy, attack_modified
from ..protocols import ModifiedInstance
from ..quantum_core import BlochAngles, make_rng, spawn_rngs
from ..spacetime import collinear_geometry

TELEPORT_RATE_EXACT = (2 + math.sqrt(2)) / 4      # closed form of the sphere average
QUADRATURE_TOL = 1e-6

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_BYPRODUCTS = (np.eye(2, dtype=complex), _X, _Z, _X @ _Z)     # X^m2 Z^m1 with (m1, m2)


@dataclass(frozen=True)
class RateReport:
    strategy: str
    rate: float
    stderr: float
    samples: int
    quadrature: float | None = None
    engine: str = "batched"
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate {self.rate} outside [0, 1]")

    def as_dict(self) -> dict:
        return asdict(self)


def _strategy(s) -> ModifiedStrategy:
    return s if isinstance(s, ModifiedStrategy) else ModifiedStrategy.parse(s)


def sample_sphere(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(theta, phi) arrays under the uniform sphere measure."""
    t = rng.uniform(-1.0, 1.0, n)
    return np.arccos(t), rng.uniform(0.0, 2 * math.pi, n)


def qubit_pair(theta, phi) -> tuple[np.ndarray, np.ndarray]:
    """|psi> and |psi-bar> amplitude arrays of shape (n, 2)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    c, s, e = np.cos(theta / 2), np.sin(theta / 2), np.exp(1j * phi)
    return np.stack([c + 0j, s * e], -1), np.stack([s + 0j, -c * e], -1)


def _hold(b: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return np.where(theta <= math.pi / 2, b, 1 - b)


def simulate_batch(strategy, theta, phi, u, rng: np.random.Generator) -> np.ndarray:
    """Per-sample success flags for the given encodings and message bits."""
    strategy = _strategy(strategy)
    theta, phi, u = np.asarray(theta, float), np.asarray(phi, float), np.asarray(u, int)
    n = theta.size
    psi0, psi1 = qubit_pair(theta, phi)
    sent = np.where(u[:, None] == 0, psi0, psi1)
    if strategy in (ModifiedStrategy.RANDOM_GUESS, ModifiedStrategy.MEASURE_HOLD,
                    ModifiedStrategy.ENTANGLE_MEMORY):
        b = (rng.random(n) >= np.abs(sent[:, 0]) ** 2).astype(int)
        if strategy is ModifiedStrategy.RANDOM_GUESS:
            return b == u
        first = _hold(b, theta)
        if strategy is ModifiedStrategy.MEASURE_HOLD:
            return first == u
        # B2 reads the copied Z value |b> in the {psi, psi-bar} frame
        amp0 = np.where(b == 0, psi0[:, 0], psi0[:, 1])
        w = (rng.random(n) >= np.abs(amp0) ** 2).astype(int)
        return (first == u) & (w == u)
    # teleport: byproduct uniform over 4, B2 measures in {psi, psi-bar}
    m = rng.integers(0, 4, n)
    byp = np.stack(_BYPRODUCTS)[m]                               # (n, 2, 2)
    arrived = np.einsum("nij,nj->ni", byp, sent)
    p_w0 = np.abs(np.einsum("ni,ni->n", psi0.conj(), arrived)) ** 2
    w = (rng.random(n) >= p_w0).astype(int)
    seen = np.where(w[:, None] == 0, psi0, psi1)
    like0 = np.abs(np.einsum("ni,nij,nj->n", seen.conj(), byp, psi0)) ** 2
    like1 = np.abs(np.einsum("ni,nij,nj->n", seen.conj(), byp, psi1)) ** 2
    guess = np.where(like0 >= like1 - 1e-12, 0, 1)
    return guess == u


def rate_monte_carlo(strategy, samples: int, seed: int, engine: str = "batched", batch: int = 200_000
                     ) -> RateReport:
    strategy = _strategy(strategy)
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    if engine == "scalar":
        wins = _scalar_wins(strategy, samples, seed)
    elif engine == "batched":
        rng = make_rng(seed)
        wins = 0
        left = samples
        while left:
            k = min(batch, left)
            theta, phi = sample_sphere(rng, k)
            u = rng.integers(0, 2, k)
            wins += int(simulate_batch(strategy, theta, phi, u, rng).sum())
            left -= k
    else:
        raise ValueError(f"unknown engine {engine!r}")
    p = wins / samples
    quad = rate_quadrature_teleport()[0] if strategy is ModifiedStrategy.TELEPORT_OPTIMAL else None
    return RateReport(strategy.value, p, math.sqrt(p * (1 - p) / samples), samples, quad, engine, seed)


def _scalar_wins(strategy: ModifiedStrategy, samples: int, seed: int) -> int:
    geo = collinear_geometry()
    wins = 0
    for rng in spawn_rngs(seed, samples):
        theta, phi = sample_sphere(rng, 1)
        angles = BlochAngles(float(theta[0]), float(phi[0]))
        inst = ModifiedInstance.from_angles(int(rng.integers(2)), angles)
        wins += attack_modified(inst, strategy, geo, rng).success
    return wins


# ---------------------------------------------------------------------------
# closed forms and quadrature
# ---------------------------------------------------------------------------

def success_closed_form(strategy, theta, phi=0.0) -> np.ndarray:
    """Per-encoding success probability, averaged over u."""
    strategy = _strategy(strategy)
    theta = np.asarray(theta, float)
    if strategy is ModifiedStrategy.RANDOM_GUESS:
        return np.cos(theta / 2) ** 2
    if strategy is ModifiedStrategy.MEASURE_HOLD:
        return (1 + np.abs(np.cos(theta))) / 2
    if strategy is ModifiedStrategy.TELEPORT_OPTIMAL:
        return teleport_integrand(theta, phi)
    raise ValueError(f"no closed form for {strategy.value}")


def teleport_integrand(theta, phi) -> np.ndarray:
    """(1/4) sum over byproducts B of max(|<psi|B|psi>|^2, |<psi|B|psi-bar>|^2)."""
    psi, bar = qubit_pair(theta, phi)
    total = 0.0
    for b in _BYPRODUCTS:
        moved = psi @ b.T
        same = np.abs(np.sum(psi.conj() * moved, -1)) ** 2
        other = np.abs(np.sum(bar.conj() * moved, -1)) ** 2
        total = total + np.maximum(same, other)
    return total / 4


def teleport_integral(n_t: int, n_phi: int, t_range=(-1.0, 1.0), phi_range=(0.0, 2 * math.pi)) -> float:
    """Midpoint-rule integral of the integrand over a (cos theta, phi) box, divided by 4 pi."""
    (t0, t1), (p0, p1) = t_range, phi_range
    t = t0 + (np.arange(n_t) + 0.5) * (t1 - t0) / n_t
    ph = p0 + (np.arange(n_phi) + 0.5) * (p1 - p0) / n_phi
    theta = np.arccos(np.clip(t, -1, 1))
    vals = teleport_integrand(theta[:, None], ph[None, :])
    return float(vals.sum() * (t1 - t0) * (p1 - p0) / (n_t * n_phi) / (4 * math.pi))


def rate_quadrature_teleport(tol: float = QUADRATURE_TOL, start: int = 64, max_n: int = 8192
                             ) -> tuple[float, list[tuple[int, float]]]:
    """Refine the grid by doubling until successive values differ by < tol."""
    history = []
    n = start
    prev = None
    while n <= max_n:
        val = teleport_integral(n, n)
        history.append((n, val))
        if prev is not None and abs(val - prev) < tol:
            return val, history
        prev = val
        n *= 2
    raise RuntimeError(f"quadrature did not converge to {tol} by n={max_n}: {history[-2:]}")


def measure_hold_rate_exact() -> Fraction:
    """Sphere average of (1 + |cos theta|)/2; |t| averages to 1/2 for t uniform on [-1, 1]."""
    mean_abs_t = Fraction(1, 2)
    return (1 + mean_abs_t) / 2


def rate_profile(thetas: Sequence[float], n_phi: int = 512) -> list[dict]:
    """phi-averaged success of each strategy at fixed theta."""
    ph = (np.arange(n_phi) + 0.5) * 2 * math.pi / n_phi
    rows = []
    for th in thetas:
        rows.append({
            "theta": float(th),
            "RandomGuess": float(np.cos(th / 2) ** 2),
            "MeasureHold": float((1 + abs(math.cos(th))) / 2),
            "TeleportOptimal": float(teleport_integrand(np.full(n_phi, th), ph).mean()),
        })
    return rows


# ---------------------------------------------------------------------------
# B2 basis search
# ---------------------------------------------------------------------------

def su2(params: Sequence[float]) -> np.ndarray:
    """exp(-i (p . sigma) / 2)."""
    p = np.asarray(params, float)
    ang = np.linalg.norm(p)
    if ang < 1e-15:
        return np.eye(2, dtype=complex)
    nx, ny, nz = p / ang
    gen = np.array([[nz, nx - 1j * ny], [nx + 1j * ny, -nz]])
    return math.cos(ang / 2) * np.eye(2) - 1j * math.sin(ang / 2) * gen


def _sphere_grid(n_t: int, n_phi: int):
    t = (np.arange(n_t) + 0.5) * 2 / n_t - 1
    ph = (np.arange(n_phi) + 0.5) * 2 * math.pi / n_phi
    tt, pp = np.meshgrid(np.arccos(t), ph, indexing="ij")
    return tt.ravel(), pp.ravel()


def b2_basis_rate(rotation: np.ndarray, grid=(64, 128)) -> float:
    """Teleport strategy where B2 measures in ``U_psi R {|0>, |1>}`` instead of ``{psi, psi-bar}``.

    Success = sum_B (1/4) sum_w max_u (1/2)|<m_w| B |psi_u>|^2, sphere-averaged.
    """
    theta, phi = _sphere_grid(*grid)
    psi0, psi1 = qubit_pair(theta, phi)
    frame = np.stack([psi0, psi1], -1)                       # (n, 2, 2), columns psi, psi-bar
    meas = frame @ rotation                                   # columns m_0, m_1
    total = np.zeros(theta.size)
    for b in _BYPRODUCTS:
        moved = np.einsum("ij,njk->nik", b, frame)             # B psi_u as columns
        amp = np.einsum("niw,niu->nwu", meas.conj(), moved)     # <m_w|B|psi_u>
        total += (np.abs(amp) ** 2).max(axis=2).sum(axis=1) / 2
    return float(total.mean() / 4)


@dataclass(frozen=True)
class BasisSearchResult:
    best_rate: float
    best_params: tuple[float, ...]
    identity_rate: float
    restarts: int
    seed: int
    restart_values: tuple[float, ...]

    def as_dict(self) -> dict:
        return asdict(self)


def optimal_b2_basis_search(restarts: int = 8, seed: int = 0, grid=(32, 64), final_grid=(64, 128),
                            maxiter: int = 400) -> BasisSearchResult:
    """Multi-start Nelder-Mead over a constant SU(2) rotation of B2's basis.

    The search runs on a coarse grid; the winner is re-scored on ``final_grid``.
    """
    if restarts < 8:
        raise ValueError("need at least 8 restarts")
    rngs = spawn_rngs(seed, restarts)
    values, points = [], []
    for rng in rngs:
        x0 = rng.uniform(-math.pi, math.pi, 3)
        res = minimize(lambda p: -b2_basis_rate(su2(p), grid), x0, method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": 1e-6, "fatol": 1e-9})
        values.append(b2_basis_rate(su2(res.x), final_grid))
        points.append(res.x)
    i = int(np.argmax(values))
    return BasisSearchResult(values[i], tuple(float(v) for v in points[i]),
                             b2_basis_rate(np.eye(2), final_grid), restarts, seed, tuple(values))
