"""Reference computations written from scratch, sharing no code with pbqc.

Values produced here are frozen into ``frozen.json`` by ``freeze.py``; the
tests compare the package against the frozen numbers.
"""
from __future__ import annotations

import math

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
S = np.diag([1, 1j])
T = np.diag([1, np.exp(1j * math.pi / 4)])
LETTERS = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H, "S": S, "T": T}


def matrix_chain(word: str) -> np.ndarray:
    """Operator product of the letters, left to right as written."""
    m = np.eye(2, dtype=complex)
    for ch in word:
        m = m @ LETTERS[ch]
    return m


def kron(*ms):
    out = np.array([[1.0 + 0j]])
    for m in ms:
        out = np.kron(out, m)
    return out


def qubit(theta, phi):
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def anti(theta, phi):
    return np.array([math.sin(theta / 2), -np.exp(1j * phi) * math.cos(theta / 2)])


# ---------------------------------------------------------------------------
# teleport-then-measure success for the modified protocol
# ---------------------------------------------------------------------------

def teleport_born(theta: float, phi: float, rotation: np.ndarray | None = None) -> float:
    """Exact success averaged over u, the four byproducts and B2's outcome.

    B2 measures in the columns of ``[psi, psi_bar] @ rotation``.
    """
    psis = [qubit(theta, phi), anti(theta, phi)]
    frame = np.stack(psis, 1)
    meas = frame if rotation is None else frame @ rotation
    total = 0.0
    for b in (I2, X, Z, X @ Z):
        for w in range(2):
            probs = [abs(np.vdot(meas[:, w], b @ p)) ** 2 for p in psis]
            total += 0.25 * 0.5 * max(probs)
    return total


def _batch_teleport(theta, phi, rotation=None):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    e = np.exp(1j * phi)
    p0 = np.stack([c + 0j, e * s], -1)
    p1 = np.stack([s + 0j, -e * c], -1)
    frame = np.stack([p0, p1], -1)
    meas = frame if rotation is None else frame @ rotation
    total = np.zeros(theta.shape)
    for b in (I2, X, Z, X @ Z):
        for w in range(2):
            m = meas[..., :, w]
            a0 = np.abs(np.einsum("...i,ij,...j->...", m.conj(), b, p0)) ** 2
            a1 = np.abs(np.einsum("...i,ij,...j->...", m.conj(), b, p1)) ** 2
            total += 0.125 * np.maximum(a0, a1)
    return total


def teleport_rate_mc(samples: int, seed: int, chunk: int = 500_000) -> tuple[float, float]:
    """Sphere average of :func:`teleport_born` by plain Monte Carlo (mean, standard error)."""
    rng = np.random.default_rng(seed)
    s1 = s2 = 0.0
    left = samples
    while left:
        k = min(chunk, left)
        theta = np.arccos(rng.uniform(-1, 1, k))
        phi = rng.uniform(0, 2 * math.pi, k)
        v = _batch_teleport(theta, phi)
        s1 += v.sum()
        s2 += (v * v).sum()
        left -= k
    mean = s1 / samples
    var = s2 / samples - mean ** 2
    return mean, math.sqrt(var / samples)


def teleport_slice(theta: float, n_phi: int = 4096, rotation=None) -> float:
    phi = (np.arange(n_phi) + 0.5) * 2 * math.pi / n_phi
    return float(_batch_teleport(np.full(n_phi, theta), phi, rotation).mean())


def rotated_rate_gauss(rotation: np.ndarray, n_t: int = 96, n_phi: int = 192) -> float:
    """Gauss-Legendre in cos(theta), uniform in phi."""
    t, wt = np.polynomial.legendre.leggauss(n_t)
    phi = (np.arange(n_phi) + 0.5) * 2 * math.pi / n_phi
    th, ph = np.meshgrid(np.arccos(t), phi, indexing="ij")
    vals = _batch_teleport(th, ph, rotation)
    return float((vals.mean(axis=1) * wt).sum() / 2)


def rx(angle: float) -> np.ndarray:
    return math.cos(angle / 2) * I2 - 1j * math.sin(angle / 2) * X


# ---------------------------------------------------------------------------
# GHZ residual by projectors on dense vectors
# ---------------------------------------------------------------------------

def ghz_residual(q_shares, signs) -> tuple[str, int]:
    """Project parties 2..N of (|0..0>+|1..1>)/sqrt2 onto X/Y eigenvalue s; read party 1."""
    n = len(q_shares) + 1
    v = np.zeros(2 ** n, complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    for i, (q, s) in enumerate(zip(q_shares, signs), start=1):
        op = Y if q else X
        ops = [I2] * n
        ops[i] = op
        proj = (np.eye(2 ** n) + s * kron(*ops)) / 2
        v = proj @ v
        v = v / np.linalg.norm(v)
    rho = v.reshape(2, -1)
    rho1 = rho @ rho.conj().T
    for name, op in (("X", X), ("Y", Y), ("Z", Z)):
        ev = np.trace(rho1 @ op).real
        if abs(abs(ev) - 1) < 1e-9:
            return name, int(round(ev))
    raise AssertionError("no Pauli eigenstate")


# ---------------------------------------------------------------------------
# selection-matrix residuals by explicit loops
# ---------------------------------------------------------------------------

def component_residuals(basis: np.ndarray, frame: np.ndarray, selections: np.ndarray):
    """``basis`` columns are |M_i> in the |a>|j> ordering (index a*d + j)."""
    d = frame.shape[0]
    n = basis.shape[1]
    even = np.zeros(n)
    cross = np.zeros(n)
    for i in range(n):
        zero_side = one_side = 0.0
        for j in range(d):
            for a in range(2):
                amp = 0j
                for jj in range(d):
                    amp += np.conj(frame[jj, j]) * basis[a * d + jj, i]
                w = abs(amp) ** 2
                if a == 0 and selections[i, j] == 1:
                    zero_side += w
                if a == 1 and selections[i, j] == 0:
                    one_side += w
        allowed = zero_side + one_side
        even[i] = abs(zero_side / allowed - 0.5) if allowed > 0 else 0.5
        cross[i] = max(0.0, 1 - allowed)
    return even, cross


# ---------------------------------------------------------------------------
# arrival-time grid for feasibility
# ---------------------------------------------------------------------------

def arrivals(point, verifiers, c=1.0):
    dist = [math.dist(point, v) for v in verifiers]
    return [(max(dist) + di) / c for di in dist]


def strictly_inside_triangle(pt, a, b, cc, tol=1e-12):
    def cross(o, p, q):
        return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])
    d1, d2, d3 = cross(a, b, pt), cross(b, cc, pt), cross(cc, a, pt)
    return (d1 > tol and d2 > tol and d3 > tol) or (d1 < -tol and d2 < -tol and d3 < -tol)


def grid_witness(p, verifiers, n=201):
    """Interior grid point whose arrivals are all no later than p's, or None."""
    target = arrivals(p, verifiers)
    xs = [v[0] for v in verifiers]
    ys = [v[1] for v in verifiers]
    best = None
    for x in np.linspace(min(xs), max(xs), n):
        for y in np.linspace(min(ys), max(ys), n):
            pt = (x, y, 0.0)
            if not strictly_inside_triangle(pt, *verifiers):
                continue
            margin = min(t - a for t, a in zip(target, arrivals(pt, verifiers)))
            if margin >= -1e-12 and (best is None or margin > best[1]):
                best = (pt, margin)
    return best
