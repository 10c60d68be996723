"""Numerical search for perfect cheating with a shared d-level resource (d = 2, 3).

Model, for one encoding axis n (encoded states are the +-n eigenstates):
B1 and B2 share ``sum_j sqrt(p_j) |j>|j>``.  Knowing n, B2 measures his half
in the basis conjugate to the columns ``f_m`` of a unitary chosen per grid
point, which leaves B1's half in ``v_m = D f_m`` (``D = diag(sqrt p)``,
unnormalised; the norm squared is the probability of m).  B1 measures
(intercepted qubit, his half) in a fixed basis ``{M_k}`` of C^2 x C^d.
Knowing m and k the pair guess u, so

    success(n) = 1/2 + 1/4 * sum_{m,k} |<M_k| (n.sigma) x |v_m><v_m| |M_k>|.

``weights`` picks the resource:

* ``"schmidt"`` (default): the Schmidt weights p are optimised, shared by
  every grid point.  Any shared pure state is of this form up to local
  unitaries, so every value found is achieved by a real strategy.
* ``"equal"``: p uniform, the maximally entangled pair.
* ``"free"``: per point the cheaters keep whichever frame state scores
  best.  A relaxation that ignores no-signalling; an upper bound only.

The search maximises the worst case over a grid of axes, jointly over the
basis, the weights and every per-point frame.  Unitaries are exponentials
of Hermitian generators.  L-BFGS-B runs on a smoothed objective
(|x| -> sqrt(x^2+eps^2), min -> soft-min at temperature tau) along a
decreasing (eps, tau) schedule, with analytic gradients (divided
differences of exp through the eigendecomposition).  The final score uses
the exact objective.

A value of 1 is re-checked by running the strategy through the attacks
module with every measurement branch enumerated.  A value below 1 is
evidence, not proof: the optimiser may miss the optimum.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from ..quantum_core import BlochAngles, CodeSpace, PureState, spawn_rngs

SIGMA = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
SCHEDULE = ((1e-2, 1e-2), (1e-3, 1e-3), (1e-4, 1e-4))
POLISH = ((1e-6, 1e-6), (1e-8, 1e-8))
PERFECT_TOL = 1e-6


# ---------------------------------------------------------------------------
# encoding grids
# ---------------------------------------------------------------------------

def fibonacci_sphere(k: int) -> np.ndarray:
    i = np.arange(k) + 0.5
    z = 1 - 2 * i / k
    ph = math.pi * (1 + math.sqrt(5)) * i
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(ph), r * np.sin(ph), z], 1)


def theta_ring(theta: float, k: int, offset: float = 0.0) -> np.ndarray:
    ph = offset + np.arange(k) * 2 * math.pi / k
    return np.stack([math.sin(theta) * np.cos(ph), math.sin(theta) * np.sin(ph),
                     np.full(k, math.cos(theta))], 1)


def pauli_axes() -> np.ndarray:
    return np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)


def _angle(text: str) -> float:
    text = text.strip().replace(" ", "")
    if "pi" in text:
        num, _, den = text.partition("/")
        coef = num.replace("*pi", "").replace("pi", "") or "1"
        return float(coef) * math.pi / (float(den) if den else 1.0)
    return float(text)


def parse_grid(spec: str) -> np.ndarray:
    """Grid from terms joined by '+': ``pauli``, ``fibonacci:K``, ``ring:THETA:K``, ``point:THETA:PHI``.

    Angles accept forms like ``pi/3`` or ``2pi/5``.
    """
    parts = []
    for term in spec.split("+"):
        name, *args = [a.strip() for a in term.split(":")]
        if name == "pauli" and not args:
            parts.append(pauli_axes())
        elif name == "fibonacci" and len(args) == 1:
            parts.append(fibonacci_sphere(int(args[0])))
        elif name == "ring" and len(args) == 2:
            parts.append(theta_ring(_angle(args[0]), int(args[1])))
        elif name == "point" and len(args) == 2:
            parts.append(BlochAngles(_angle(args[0]), _angle(args[1])).axis[None, :])
        else:
            raise ValueError(f"bad grid term {term!r}")
    return np.vstack(parts)


def axis_angles(n: np.ndarray) -> BlochAngles:
    n = np.asarray(n, float) / np.linalg.norm(n)
    theta = math.acos(max(-1.0, min(1.0, n[2])))
    phi = math.atan2(n[1], n[0]) % (2 * math.pi) if math.hypot(n[0], n[1]) > 1e-12 else 0.0
    return BlochAngles(theta, 0.0 if phi >= 2 * math.pi else phi)


# ---------------------------------------------------------------------------
# objective
# ---------------------------------------------------------------------------

WEIGHT_MODES = ("schmidt", "equal", "free")


def hermitian_basis(d: int) -> np.ndarray:
    out = []
    for i in range(d):
        m = np.zeros((d, d), complex)
        m[i, i] = 1
        out.append(m)
    r = 1 / math.sqrt(2)
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), complex)
            m[i, j] = m[j, i] = r
            out.append(m)
            m = np.zeros((d, d), complex)
            m[i, j], m[j, i] = -1j * r, 1j * r
            out.append(m)
    return np.array(out)


def _expi(params: np.ndarray, basis: np.ndarray):
    """exp(i H) and the pieces needed to differentiate it."""
    h = np.einsum("...p,pij->...ij", params, basis)
    w, v = np.linalg.eigh(h)
    ew = np.exp(1j * w)
    u = np.einsum("...ij,...j,...kj->...ik", v, ew, v.conj())
    return u, w, v, ew


def unitary_from_params(params: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """exp(i H) with H = sum p_a basis_a; batches over leading axes of ``params``."""
    return _expi(params, basis)[0]


def _expi_grad(w, v, ew, basis, g):
    """d/dp_a of 2 Re tr(U^dag G) for U = exp(i sum p_a basis_a); batched like ``w``."""
    dw = w[..., :, None] - w[..., None, :]
    de = ew[..., :, None] - ew[..., None, :]
    close = np.abs(dw) < 1e-9
    phi = np.where(close, 1j * ew[..., :, None], de / np.where(close, 1.0, dw))
    x = np.einsum("...ji,ajk,...kl->...ail", v.conj(), basis, v)
    gt = np.einsum("...ji,...jk,...kl->...il", v.conj(), g, v)
    return 2 * np.einsum("...aij,...ij->...a", (phi[..., None, :, :] * x).conj(), gt).real


def _resource_vectors(frames: np.ndarray, schmidt: np.ndarray) -> np.ndarray:
    return np.sqrt(schmidt)[None, :, None] * frames


def _w_matrices(meas: np.ndarray, axes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = meas.shape[0] // 2
    r = meas.T.reshape(2 * d, 2, d)                      # M_k as a 2 x d block
    a = np.einsum("ps,sab->pab", axes, SIGMA)
    return r, np.einsum("kai,pab,kbj->pkij", r.conj(), a, r)


def overlaps(meas: np.ndarray, vecs: np.ndarray, axes: np.ndarray) -> np.ndarray:
    """``e[p, m, k] = <M_k| (n_p.sigma) x |v_pm><v_pm| |M_k>`` (real).

    ``vecs[p]`` holds the (possibly unnormalised) vectors ``v_pm`` as columns.
    """
    _, w = _w_matrices(meas, axes)
    # <M_k| A x |v><v| |M_k> = v^T W v^*  with W = R^dag A R
    return np.einsum("pim,pkij,pjm->pmk", vecs, w, vecs.conj()).real


def point_success(e: np.ndarray, weights: str = "schmidt", eps: float = 0.0, tau: float = 0.0) -> np.ndarray:
    """Per-point success from overlaps of weighted (schmidt/equal) or unit (free) vectors."""
    a = np.sqrt(e * e + eps * eps) if eps else np.abs(e)
    if weights in ("schmidt", "equal"):
        return 0.5 + a.sum(axis=(1, 2)) / 4
    if weights == "free":
        per_m = 0.5 + a.sum(axis=2) / 4
        if tau:
            m = per_m.max(axis=1, keepdims=True)
            return (m + tau * np.log(np.exp((per_m - m) / tau).sum(axis=1, keepdims=True)))[:, 0]
        return per_m.max(axis=1)
    raise ValueError(f"weights must be one of {WEIGHT_MODES}, got {weights!r}")


def soft_min(f: np.ndarray, tau: float) -> tuple[float, np.ndarray]:
    m = f.min()
    w = np.exp(-(f - m) / tau)
    z = w.sum()
    return float(m - tau * math.log(z)), w / z


def _softmax(x: np.ndarray) -> np.ndarray:
    z = np.exp(x - x.max())
    return z / z.sum()


@dataclass(frozen=True)
class ResourceSearchResult:
    dimension: int
    grid_size: int
    best_success: float
    worst_axis: tuple[float, float, float]
    restarts: int
    seed: int
    restart_values: tuple[float, ...]
    weights: str
    schmidt: tuple[float, ...]
    basis: np.ndarray = field(repr=False)
    frames: np.ndarray = field(repr=False)
    per_point: np.ndarray = field(repr=False)
    constraint_residuals: dict | None = None
    verified_perfect: bool | None = None
    label: str = "numerical evidence (local search), not a proof"

    def __post_init__(self):
        if self.best_success > 1 + 1e-9:
            raise ValueError(f"success {self.best_success} exceeds 1")

    @property
    def gap(self) -> float:
        return 1.0 - self.best_success

    def as_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k not in ("basis", "frames", "per_point")}
        out["gap"] = self.gap
        out["basis_real"] = self.basis.real.tolist()
        out["basis_imag"] = self.basis.imag.tolist()
        return out


class _Problem:
    """Parameter vector: basis generator, Schmidt logits (``schmidt`` mode only), per-point frame generators."""

    def __init__(self, axes: np.ndarray, d: int, weights: str):
        if weights not in WEIGHT_MODES:
            raise ValueError(f"weights must be one of {WEIGHT_MODES}, got {weights!r}")
        self.axes = np.asarray(axes, float)
        self.d = d
        self.weights = weights
        self.bm = hermitian_basis(2 * d)
        self.bf = hermitian_basis(d)
        self.nm, self.nf = len(self.bm), len(self.bf)
        self.ns = d if weights == "schmidt" else 0
        self.k = len(self.axes)
        self.size = self.nm + self.ns + self.k * self.nf

    def split(self, x):
        mp = x[:self.nm]
        sp = x[self.nm:self.nm + self.ns]
        fp = x[self.nm + self.ns:].reshape(self.k, self.nf)
        return mp, sp, fp

    def schmidt(self, sp) -> np.ndarray:
        if self.weights == "schmidt":
            return _softmax(sp)
        if self.weights == "equal":
            return np.full(self.d, 1.0 / self.d)
        return np.ones(self.d)

    def objective(self, x, eps, tau):
        """Negative soft-min of the smoothed per-point success, and its gradient."""
        mp, sp, fp = self.split(x)
        meas, wm, vm, em = _expi(mp, self.bm)
        frames, wf, vf, ef = _expi(fp, self.bf)
        p = self.schmidt(sp)
        sq = np.sqrt(p)
        vecs = sq[None, :, None] * frames
        r, w = _w_matrices(meas, self.axes)
        e = np.einsum("pim,pkij,pjm->pmk", vecs, w, vecs.conj()).real
        a = np.sqrt(e * e + eps * eps)
        da = e / a
        if self.weights == "free":
            per_m = 0.5 + a.sum(axis=2) / 4
            top = per_m.max(axis=1, keepdims=True)
            z = np.exp((per_m - top) / tau)
            f = (top + tau * np.log(z.sum(axis=1, keepdims=True)))[:, 0]
            omega = z / z.sum(axis=1, keepdims=True)
        else:
            f = 0.5 + a.sum(axis=(1, 2)) / 4
            omega = np.ones(e.shape[:2])
        val, wp = soft_min(f, tau)
        c = wp[:, None, None] * omega[:, :, None] * da / 4          # dF/de[p, m, k]

        amat = np.einsum("ps,sab->pab", self.axes, SIGMA)
        # basis: G_k = sum_pm c (A_p R_k v*_pm) v_pm^T, laid out as columns of a 2d x 2d matrix
        t = np.einsum("pab,kbj,pjm->pmka", amat, r, vecs.conj())
        gblk = np.einsum("pmk,pmka,pim->kai", c, t, vecs)
        gmeas = gblk.reshape(2 * self.d, 2 * self.d).T
        grad_m = _expi_grad(wm, vm, em, self.bm, gmeas)
        # frames: e = y^dag W y with y = conj(v)
        g = np.einsum("pmk,pkij,pjm->pim", c, w, vecs.conj())
        grad_f = _expi_grad(wf, vf, ef, self.bf, np.conj(sq[None, :, None] * g))
        out = [grad_m]
        if self.ns:
            dsq = 2 * np.einsum("pim,pim->i", frames, g).real
            half = sq * dsq / 2
            out.append(half - p * half.sum())
        out.append(grad_f.ravel())
        return -val, -np.concatenate(out)

    def run(self, x, schedule, maxiter):
        for eps, tau in schedule:
            res = minimize(self.objective, x, args=(eps, tau), jac=True, method="L-BFGS-B",
                           options={"maxiter": maxiter})
            x = res.x
        return x

    def exact(self, x):
        mp, sp, fp = self.split(x)
        meas = unitary_from_params(mp, self.bm)
        frames = unitary_from_params(fp, self.bf)
        p = self.schmidt(sp)
        f = point_success(overlaps(meas, _resource_vectors(frames, p), self.axes), self.weights)
        return meas, frames, p, f


def resource_cheat_search(axes: np.ndarray, d: int, restarts: int = 32, seed: int = 0, weights: str = "schmidt",
                          schedule=SCHEDULE, maxiter: int = 1500, verify: bool = True) -> ResourceSearchResult:
    axes = np.asarray(axes, float)
    if axes.ndim != 2 or axes.shape[1] != 3 or not len(axes):
        raise ValueError("axes must be an (K, 3) array")
    axes = axes / np.linalg.norm(axes, axis=1, keepdims=True)
    if d not in (2, 3):
        raise ValueError("resource dimension must be 2 or 3")
    if restarts < 1:
        raise ValueError("need at least one restart")
    prob = _Problem(axes, d, weights)
    best = None
    values = []
    for rng in spawn_rngs(seed, restarts):
        x = prob.run(rng.normal(size=prob.size), schedule, maxiter)
        f = prob.exact(x)[3]
        if f.min() > 1 - 1e-3:
            x2 = prob.run(x, POLISH, maxiter)
            f2 = prob.exact(x2)[3]
            if f2.min() >= f.min():
                x, f = x2, f2
        values.append(float(f.min()))
        if best is None or f.min() > best[1].min():
            best = (x, f)
    meas, frames, p, f = prob.exact(best[0])
    worst = int(np.argmin(f))
    result = ResourceSearchResult(
        dimension=d, grid_size=len(axes), best_success=float(min(f.min(), 1.0)),
        worst_axis=tuple(float(v) for v in axes[worst]), restarts=restarts, seed=seed,
        restart_values=tuple(values), weights=weights, schmidt=tuple(float(v) for v in p),
        basis=meas, frames=frames, per_point=f)
    if verify and result.best_success >= 1 - PERFECT_TOL and weights != "free":
        result = _with(result, verified_perfect=verify_perfect(result, axes))
    return result


def _with(result: ResourceSearchResult, **kw) -> ResourceSearchResult:
    data = {k: getattr(result, k) for k in result.__dataclass_fields__}
    data.update(kw)
    return ResourceSearchResult(**data)


def basis_codespace(meas: np.ndarray) -> CodeSpace:
    d = meas.shape[0] // 2
    return CodeSpace([PureState((2, d), meas[:, k]) for k in range(meas.shape[1])])


def verify_perfect(result: ResourceSearchResult, axes: np.ndarray, tol: float = PERFECT_TOL) -> bool:
    """Replay every grid point through the attacks module with all branches enumerated."""
    from ..attacks import attack_resource, exact_success_probability
    from ..protocols import ModifiedInstance
    from ..spacetime import collinear_geometry

    if result.weights == "free":
        raise ValueError("the free-weight relaxation has no strategy to replay")
    geo = collinear_geometry()
    code = basis_codespace(result.basis)
    for n, frame in zip(axes, result.frames):
        angles = axis_angles(n)
        p = np.mean([exact_success_probability(attack_resource, ModifiedInstance.from_angles(u, angles),
                                               code, frame, geo, schmidt=result.schmidt) for u in (0, 1)])
        if p < 1 - tol:
            return False
    return True


def two_qubit_cheat_search(axes, restarts: int = 32, seed: int = 0, **kw) -> ResourceSearchResult:
    return resource_cheat_search(np.asarray(axes, float), 2, restarts, seed, **kw)


def conditional_states(result: ResourceSearchResult, point: int) -> np.ndarray:
    """B1's normalised states (columns) after B2's outcome at grid point ``point``."""
    v = np.sqrt(np.asarray(result.schmidt))[:, None] * result.frames[point]
    if result.weights == "free":
        v = result.frames[point]
    norms = np.linalg.norm(v, axis=0)
    return np.where(norms > 1e-9, v / np.where(norms > 1e-9, norms, 1.0), result.frames[point])


def qutrit_cheat_search(axes, restarts: int = 32, seed: int = 0, **kw) -> ResourceSearchResult:
    res = resource_cheat_search(np.asarray(axes, float), 3, restarts, seed, **kw)
    # residuals relative to B1's states at the axis closest to +Z
    axes = np.asarray(axes, float)
    zi = int(np.argmax(axes[:, 2] / np.linalg.norm(axes, axis=1)))
    check = qutrit_constraint_check(basis_codespace(res.basis), frame=conditional_states(res, zi))
    return _with(res, constraint_residuals={
        "frame_axis": [float(v) for v in axes[zi]],
        "even": check.even.tolist(),
        "cross": check.cross.tolist(),
        "max_even": float(check.even.max()),
        "max_cross": float(check.cross.max()),
    })


# ---------------------------------------------------------------------------
# selection-matrix constraints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstraintResiduals:
    even: np.ndarray          # |weight on the |0>-associated components - 1/2| per basis element
    cross: np.ndarray         # weight on components the selection forbids
    selections: np.ndarray    # (n_basis, d) 0/1 diagonals


def component_weights(basis: CodeSpace, frame: np.ndarray | None = None) -> np.ndarray:
    """``w[i, a, j] = |<a, phi_j | M_i>|^2`` for qubit value a and frame state j."""
    if len(basis.dims) != 2 or basis.dims[0] != 2:
        raise ValueError("basis must act on C^2 x C^d")
    d = basis.dims[1]
    frame = np.eye(d, dtype=complex) if frame is None else np.asarray(frame, complex)
    coeffs = np.einsum("kaj,jm->kam", basis.matrix.reshape(-1, 2, d), frame.conj())
    return np.abs(coeffs) ** 2


def infer_selection(basis: CodeSpace, frame: np.ndarray | None = None) -> np.ndarray:
    """S_jj = 1 where the |0>-component dominates the |1>-component of M_i."""
    w = component_weights(basis, frame)
    return (w[:, 0, :] >= w[:, 1, :]).astype(int)


def qutrit_constraint_check(basis: CodeSpace, selections: np.ndarray | None = None,
                            frame: np.ndarray | None = None) -> ConstraintResiduals:
    if len(basis) != math.prod(basis.dims) or not basis.is_complete():
        raise ValueError("basis must be a complete orthonormal basis")
    w = component_weights(basis, frame)
    if selections is None:
        selections = infer_selection(basis, frame)
    s = np.asarray(selections)
    if s.ndim == 3:                       # accept full diagonal matrices
        if np.any(s - np.einsum("kjj->kj", s)[:, :, None] * np.eye(s.shape[1])):
            raise ValueError("selection matrices must be diagonal")
        s = np.einsum("kjj->kj", s)
    if s.shape != w[:, 0, :].shape or np.any((s != 0) & (s != 1)):
        raise ValueError("selections must be 0/1 with one diagonal per basis element")
    zero_side = (w[:, 0, :] * s).sum(axis=1)
    one_side = (w[:, 1, :] * (1 - s)).sum(axis=1)
    allowed = zero_side + one_side
    even = np.abs(zero_side / np.where(allowed > 0, allowed, 1) - 0.5)
    cross = 1 - allowed
    return ConstraintResiduals(even, np.clip(cross, 0, None), s)
