"""Flat-spacetime geometry and message timing.

Every station transmits at t=0 and every signal (quantum or classical)
travels in a straight line at speed ``c``.  Processing is instantaneous
unless ``Geometry.latency`` is set, in which case each deciding party adds
that constant once.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull

DEADLINE_TOL = 1e-12
GRID_POINTS = 201


@dataclass(frozen=True)
class Position:
    x: float
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite position {self}")

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def of(cls, v) -> Position:
        v = [float(t) for t in v]
        return cls(*(v + [0.0] * (3 - len(v))))

    def dist(self, other: Position) -> float:
        return float(np.linalg.norm(self.vec - other.vec))


@dataclass(frozen=True)
class Geometry:
    verifiers: tuple[Position, ...]
    receiver: Position
    l: float
    c: float
    cheaters: tuple[Position, ...] = ()
    latency: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "verifiers", tuple(self.verifiers))
        object.__setattr__(self, "cheaters", tuple(self.cheaters))
        if self.l <= 0:
            raise ValueError("restricted-area radius l must be positive")
        if self.c <= 0:
            raise ValueError("signal speed c must be positive")
        if self.latency < 0:
            raise ValueError("latency must be non-negative")
        for i, b in enumerate(self.cheaters):
            if b.dist(self.receiver) < self.l * (1 - 1e-12):
                raise ValueError(f"cheater {i + 1} sits inside the restricted area")

    @property
    def n(self) -> int:
        return len(self.verifiers)

    def with_default_cheaters(self) -> Geometry:
        """One cheater per verifier on segment V_i-P at distance l from P."""
        p = self.receiver.vec
        out = []
        for v in self.verifiers:
            u = v.vec - p
            dist = np.linalg.norm(u)
            if dist <= self.l:
                raise ValueError("verifier lies inside the restricted area")
            out.append(Position.of(p + u / dist * self.l))
        return Geometry(self.verifiers, self.receiver, self.l, self.c, tuple(out), self.latency)


def collinear_geometry(d: float = 1.0, l: float = 0.1, c: float = 1.0, latency: float = 0.0) -> Geometry:
    """Two stations at -d and +d on the x axis, P at the origin."""
    g = Geometry((Position(-d), Position(d)), Position(0.0), l, c, latency=latency)
    return g.with_default_cheaters()


def regular_geometry(n: int, d: float = 1.0, l: float = 0.1, c: float = 1.0, latency: float = 0.0) -> Geometry:
    """n stations at distance d from P at the origin, arranged symmetrically.

    n=2 collinear, n=3 equilateral triangle (xy plane), n=4 regular
    tetrahedron, n=5 triangular bipyramid.
    """
    if n == 2:
        return collinear_geometry(d, l, c, latency)
    if n == 3:
        pts = [(d * math.cos(a), d * math.sin(a), 0.0) for a in (math.pi / 2, math.pi / 2 + 2 * math.pi / 3,
                                                                 math.pi / 2 + 4 * math.pi / 3)]
    elif n == 4:
        s = d / math.sqrt(3)
        pts = [(s, s, s), (s, -s, -s), (-s, s, -s), (-s, -s, s)]
    elif n == 5:
        pts = [(d * math.cos(a), d * math.sin(a), 0.0) for a in (0, 2 * math.pi / 3, 4 * math.pi / 3)]
        pts += [(0.0, 0.0, d), (0.0, 0.0, -d)]
    else:
        raise ValueError(f"no regular layout for n={n}")
    g = Geometry(tuple(Position(*p) for p in pts), Position(0.0), l, c, latency=latency)
    return g.with_default_cheaters()


@dataclass(frozen=True)
class ScheduleReport:
    arrivals: tuple[float, ...]
    completion: float
    deadline: float
    meets_deadline: bool
    intercepts: tuple[float, ...] = ()
    exchange: tuple[float, ...] = ()

    def as_dict(self) -> dict:
        return {
            "arrivals": list(self.arrivals),
            "completion": self.completion,
            "deadline": self.deadline,
            "meets_deadline": self.meets_deadline,
            "intercepts": list(self.intercepts),
            "exchange": list(self.exchange),
        }


def on_time(completion: float, deadline: float) -> bool:
    return completion <= deadline + DEADLINE_TOL


def honest_completion(geometry: Geometry) -> ScheduleReport:
    p = geometry.receiver
    t_in = max(v.dist(p) for v in geometry.verifiers) / geometry.c + geometry.latency
    arrivals = tuple(t_in + v.dist(p) / geometry.c for v in geometry.verifiers)
    done = max(arrivals)
    return ScheduleReport(arrivals, done, done, True)


def all_to_all(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i, j in itertools.permutations(range(n), 2))


def cheat_completion(geometry: Geometry, plan: Sequence[tuple[int, int]] | None = None) -> ScheduleReport:
    """Timing of intercept -> classical exchange -> reply-to-own-verifier.

    ``plan`` lists (sender, receiver) cheater indices; default all-to-all.
    Cheater i answers verifier i.
    """
    if not geometry.cheaters:
        geometry = geometry.with_default_cheaters()
    bs, vs, c = geometry.cheaters, geometry.verifiers, geometry.c
    if len(bs) != len(vs):
        raise ValueError("need exactly one cheater per verifier")
    for i, b in enumerate(bs):
        if b.dist(geometry.receiver) < geometry.l * (1 - 1e-12):
            raise ValueError(f"cheater {i + 1} inside the restricted area")
    plan = all_to_all(len(bs)) if plan is None else tuple(plan)
    for s, r in plan:
        if not (0 <= s < len(bs) and 0 <= r < len(bs)) or s == r:
            raise ValueError(f"bad exchange edge {(s, r)}")
    intercept = [v.dist(b) / c for v, b in zip(vs, bs)]
    exchange = list(intercept)
    for s, r in plan:
        exchange[r] = max(exchange[r], intercept[s] + bs[s].dist(bs[r]) / c)
    exchange = [t + geometry.latency for t in exchange]
    arrivals = tuple(t + b.dist(v) / c for t, b, v in zip(exchange, bs, vs))
    deadline = honest_completion(geometry).completion
    done = max(arrivals)
    return ScheduleReport(arrivals, done, deadline, on_time(done, deadline), tuple(intercept), tuple(exchange))


# ---------------------------------------------------------------------------
# feasibility
# ---------------------------------------------------------------------------

def _affine_frame(points: np.ndarray, tol: float = 1e-9):
    center = points.mean(axis=0)
    scale = max(np.abs(points - center).max(), 1.0)
    _, sv, vt = np.linalg.svd(points - center, full_matrices=False)
    basis = vt[sv > tol * scale]
    return center, basis


def _strictly_inside(coords: np.ndarray, hull_pts: np.ndarray, tol: float) -> np.ndarray:
    """Mask of points strictly inside the hull of ``hull_pts`` (same subspace coords)."""
    if hull_pts.shape[1] == 1:
        lo, hi = hull_pts.min(), hull_pts.max()
        return (coords[:, 0] > lo + tol) & (coords[:, 0] < hi - tol)
    hull = ConvexHull(hull_pts)
    return np.all(coords @ hull.equations[:, :-1].T + hull.equations[:, -1] < -tol, axis=1)


def _response_arrivals(points: np.ndarray, verifiers: np.ndarray, c: float) -> np.ndarray:
    """Per-verifier reply arrival times for candidate receiver positions (rows)."""
    dist = np.linalg.norm(points[:, None, :] - verifiers[None, :, :], axis=2)
    return (dist.max(axis=1, keepdims=True) + dist) / c


def feasibility_check(geometry: Geometry, grid: int = GRID_POINTS) -> tuple[bool, Position | None]:
    """Is P strictly inside the convex hull of the verifiers?

    When it is not, look for a witness: a point strictly inside the hull
    whose reply reaches every verifier no later than P's would.  The search
    is a uniform grid over the hull bounding box, refined once around the
    best candidate; a missing witness means none was found, not that none
    exists.
    """
    vs = np.array([v.vec for v in geometry.verifiers])
    if len(vs) < 2:
        raise ValueError("need at least two verifiers")
    center, basis = _affine_frame(vs)
    if basis.shape[0] == 0:
        raise ValueError("degenerate hull: all verifiers coincide")
    scale = float(np.abs(vs - center).max())
    tol = 1e-9 * scale
    hull_pts = (vs - center) @ basis.T
    p = geometry.receiver.vec
    p_coords = (p - center) @ basis.T
    off_span = np.linalg.norm((p - center) - p_coords @ basis)
    if off_span <= tol and _strictly_inside(p_coords[None, :], hull_pts, tol)[0]:
        return True, None

    target = _response_arrivals(p[None, :], vs, geometry.c)[0]
    lo, hi = hull_pts.min(axis=0), hull_pts.max(axis=0)
    best = _grid_best(lo, hi, grid, center, basis, hull_pts, vs, target, geometry.c, tol)
    if best is not None:
        step = (hi - lo) / (grid - 1)
        refined = _grid_best(best[0] - step, best[0] + step, grid, center, basis, hull_pts, vs,
                             target, geometry.c, tol)
        if refined is not None and refined[1] >= best[1]:
            best = refined
    if best is None or best[1] < -DEADLINE_TOL:
        return False, None
    return False, Position.of(center + best[0] @ basis)


def _grid_best(lo, hi, grid, center, basis, hull_pts, vs, target, c, tol, chunk=400_000):
    axes = [np.linspace(a, b, grid) for a, b in zip(lo, hi)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    best = None
    for start in range(0, len(mesh), chunk):
        block = mesh[start:start + chunk]
        block = block[_strictly_inside(block, hull_pts, tol)]
        if not len(block):
            continue
        margin = (target[None, :] - _response_arrivals(center + block @ basis, vs, c)).min(axis=1)
        i = int(np.argmax(margin))
        if best is None or margin[i] > best[1]:
            best = (block[i], float(margin[i]))
    return best


def witness_dominates(geometry: Geometry, witness: Position) -> bool:
    vs = np.array([v.vec for v in geometry.verifiers])
    t_p = _response_arrivals(geometry.receiver.vec[None, :], vs, geometry.c)[0]
    t_w = _response_arrivals(witness.vec[None, :], vs, geometry.c)[0]
    return bool(np.all(t_w <= t_p + DEADLINE_TOL))
