"""Quasi-uniform collocation points in a box and their distance statistics."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

__all__ = [
    "Domain",
    "PointSet",
    "generate_halton",
    "generate_boundary",
    "separation_distance",
    "fill_distance",
    "boundary_fill_distance",
    "make_point_set",
    "point_set_for_fill_distance",
    "save_points_csv",
    "load_points_csv",
]

DEFAULT_PROBES = 2**14


class LowConfidenceWarning(UserWarning):
    """The probe set is too coarse for the fill distance estimate to mean much."""


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box ``prod_i [lo_i, hi_i]`` (unit cube by default)."""

    d: int
    bounds: tuple = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d}")
        bounds = self.bounds
        if bounds is None:
            bounds = tuple((0.0, 1.0) for _ in range(self.d))
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if len(bounds) != self.d:
            raise ValueError("need one interval per axis")
        for lo, hi in bounds:
            if not hi > lo:
                raise ValueError(f"degenerate interval [{lo}, {hi}]")
        object.__setattr__(self, "bounds", bounds)

    @property
    def lo(self):
        return np.array([b[0] for b in self.bounds])

    @property
    def hi(self):
        return np.array([b[1] for b in self.bounds])

    @property
    def faces(self):
        """The ``2d`` faces as ``(axis, side)`` with ``side`` 0 for lo, 1 for hi."""
        return [(axis, side) for axis in range(self.d) for side in (0, 1)]

    def scale(self, unit_points):
        unit_points = np.asarray(unit_points, dtype=float)
        return self.lo + (self.hi - self.lo) * unit_points


@dataclass(frozen=True)
class PointSet:
    """Collocation points ``X = I u B``, interior points first."""

    interior: np.ndarray
    boundary: np.ndarray
    h: float = float("nan")
    q: float = float("nan")
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def points(self):
        return np.vstack([self.interior, self.boundary])

    @property
    def n_interior(self):
        return len(self.interior)

    @property
    def n(self):
        return len(self.interior) + len(self.boundary)

    @property
    def d(self):
        return self.points.shape[1]

    @property
    def c_qu(self):
        return self.h / self.q


def generate_halton(count: int, domain: Domain, seed_skip: int = 0) -> np.ndarray:
    """Unscrambled Halton points (bases = first ``d`` primes) scaled into ``domain``.

    Index 0 of the sequence (the origin) is always skipped, so every point lies
    strictly inside the box.  ``seed_skip`` drops a further number of leading
    entries.
    """
    if int(count) != count or count < 1:
        raise ValueError(f"count must be a positive integer, got {count}")
    if seed_skip < 0:
        raise ValueError("seed_skip must be nonnegative")
    sampler = qmc.Halton(d=domain.d, scramble=False)
    sampler.fast_forward(1 + int(seed_skip))
    return domain.scale(sampler.random(int(count)))


def generate_boundary(domain: Domain, per_face: int) -> np.ndarray:
    """``per_face`` Halton points on every face of the box, deduplicated."""
    if int(per_face) != per_face or per_face < 1:
        raise ValueError(f"per_face must be a positive integer, got {per_face}")
    d = domain.d
    lo, hi = domain.lo, domain.hi
    pts = []
    for axis, side in domain.faces:
        if d == 1:
            face = np.zeros((1, 1))
        else:
            sub = Domain(d - 1, tuple(b for i, b in enumerate(domain.bounds) if i != axis))
            inner = generate_halton(per_face, sub)
            face = np.insert(inner, axis, 0.0, axis=1)
        face[:, axis] = hi[axis] if side else lo[axis]
        pts.append(face)
    pts = np.vstack(pts)
    _, idx = np.unique(pts, axis=0, return_index=True)
    return pts[np.sort(idx)]


def separation_distance(points) -> float:
    """Half the smallest pairwise Euclidean distance."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if len(points) < 2:
        raise ValueError("separation distance needs at least two points")
    dist, _ = cKDTree(points).query(points, k=2)
    dmin = dist[:, 1].min()
    if dmin == 0.0:
        raise ValueError("point set contains duplicate points")
    return 0.5 * float(dmin)


def _probe_points(domain: Domain, probe_count: int) -> np.ndarray:
    d = domain.d
    if d <= 3:
        m = max(1, int(np.floor(probe_count ** (1.0 / d) + 1e-9)))
        if m == 1:
            axes = [np.array([0.5])] * d
        else:
            axes = [np.linspace(0.0, 1.0, m)] * d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        return domain.scale(grid)
    # corners matter most in high dimension; cap them so the count is honoured
    n_corner = min(2**d, probe_count // 2)
    corners = np.array(np.meshgrid(*[[0.0, 1.0]] * d, indexing="ij")).reshape(d, -1).T
    sampler = qmc.Halton(d=d, scramble=False)
    rest = sampler.random(max(probe_count - n_corner, 1))
    return domain.scale(np.vstack([corners[:n_corner], rest]))


def fill_distance(points, domain: Domain, probe_count: int = DEFAULT_PROBES) -> float:
    """Lower estimate of ``sup_x min_j ||x - x_j||`` over a probe set.

    Probes are a tensor lattice including the box corners for ``d <= 3`` and a
    Halton cloud plus corners above that.  A single probe sits at the box
    centre and raises :class:`LowConfidenceWarning`.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if len(points) < 1:
        raise ValueError("fill distance needs at least one point")
    if probe_count < 2:
        warnings.warn("fill distance from a single probe", LowConfidenceWarning, stacklevel=2)
    probes = _probe_points(domain, probe_count)
    dist, _ = cKDTree(points).query(probes, k=1)
    return float(dist.max())


def boundary_fill_distance(boundary, domain: Domain, probe_count: int = DEFAULT_PROBES) -> float:
    """Largest within-face fill distance of the boundary points (0 when ``d = 1``)."""
    boundary = np.asarray(boundary, dtype=float)
    d = domain.d
    if d == 1:
        return 0.0
    worst = 0.0
    tol = 1e-12 * float(np.max(domain.hi - domain.lo))
    for axis, side in domain.faces:
        level = domain.hi[axis] if side else domain.lo[axis]
        on_face = boundary[np.abs(boundary[:, axis] - level) <= tol]
        sub = Domain(d - 1, tuple(b for i, b in enumerate(domain.bounds) if i != axis))
        if len(on_face) == 0:
            return float("inf")
        face_pts = np.delete(on_face, axis, axis=1)
        worst = max(worst, fill_distance(face_pts, sub, probe_count))
    return worst


def default_per_face(n_interior: int, d: int) -> int:
    """Boundary density matched to the interior spacing."""
    if d == 1:
        return 1
    return max(1, int(np.ceil(n_interior ** ((d - 1) / d))))


def boundary_skeleton(domain: Domain, per_face: int) -> np.ndarray:
    """Face points plus the points of every lower-dimensional face (edges, corners).

    Each face receives ``per_face`` Halton points in its relative interior and,
    recursively, the skeleton of its own boundary, so that corners and edges
    are covered.
    """
    d = domain.d
    if d == 1:
        return generate_boundary(domain, 1)
    pts = [generate_boundary(domain, per_face)]
    lo, hi = domain.lo, domain.hi
    for axis, side in domain.faces:
        sub = Domain(d - 1, tuple(b for i, b in enumerate(domain.bounds) if i != axis))
        sub_per_face = max(1, int(np.ceil(per_face ** ((d - 2) / (d - 1))))) if d > 2 else 1
        edges = boundary_skeleton(sub, sub_per_face)
        edges = np.insert(edges, axis, hi[axis] if side else lo[axis], axis=1)
        pts.append(edges)
    pts = np.vstack(pts)
    _, idx = np.unique(np.round(pts, 14), axis=0, return_index=True)
    return pts[np.sort(idx)]


def greedy_thin(candidates, radius, accepted=None):
    """Keep candidates in order, dropping any closer than ``radius`` to a kept point."""
    candidates = np.asarray(candidates, dtype=float)
    if radius <= 0 or len(candidates) == 0:
        return candidates
    d = candidates.shape[1]
    base = np.empty((0, d)) if accepted is None else np.asarray(accepted, dtype=float)
    blocked = np.zeros(len(candidates), dtype=bool)
    if len(base):
        dist, _ = cKDTree(base).query(candidates, k=1)
        blocked |= dist < radius
    tree = cKDTree(candidates)
    neighbours = tree.query_ball_point(candidates, r=radius)
    keep = np.zeros(len(candidates), dtype=bool)
    for i in range(len(candidates)):
        if blocked[i]:
            continue
        keep[i] = True
        for j in neighbours[i]:
            if j > i and np.linalg.norm(candidates[j] - candidates[i]) < radius:
                blocked[j] = True
    return candidates[keep]


def make_point_set(
    domain: Domain,
    n_interior: int,
    per_face: int | None = None,
    seed_skip: int = 0,
    thin: float = 0.3,
    probe_count: int = DEFAULT_PROBES,
) -> PointSet:
    """Halton interior plus Halton boundary skeleton, with ``h`` and ``q`` filled in.

    Raw Halton streams occasionally place two points much closer than their
    nominal spacing ``n_interior**(-1/d)``.  Points are therefore thinned
    greedily (boundary first, then interior in sequence order) so that no two
    kept points are closer than ``thin`` times that spacing, measured in
    unit-cube units.  ``thin=0`` disables this.
    """
    d = domain.d
    if per_face is None:
        per_face = default_per_face(n_interior, d)
    width = float(np.min(domain.hi - domain.lo))
    radius = thin * width * n_interior ** (-1.0 / d)
    boundary = greedy_thin(boundary_skeleton(domain, per_face), radius)
    interior = greedy_thin(generate_halton(n_interior, domain, seed_skip), radius, boundary)
    allpts = np.vstack([interior, boundary])
    q = separation_distance(allpts)
    h_int = fill_distance(allpts, domain, probe_count)
    h_bdy = boundary_fill_distance(boundary, domain, probe_count)
    meta = {
        "n_interior_requested": int(n_interior),
        "per_face": int(per_face),
        "seed_skip": int(seed_skip),
        "thin_radius": float(radius),
        "h_interior": h_int,
        "h_boundary": h_bdy,
    }
    return PointSet(interior, boundary, max(h_int, h_bdy), q, meta)


def point_set_for_fill_distance(
    domain: Domain, target_h: float, seed_skip: int = 0, probe_count: int = DEFAULT_PROBES
) -> PointSet:
    """Smallest Halton point set (over ``n_interior``) whose fill distance is ``<= target_h``."""
    if target_h <= 0:
        raise ValueError("target fill distance must be positive")

    def build(n):
        return make_point_set(domain, n, seed_skip=seed_skip, probe_count=probe_count)

    lo, hi = 0, 1
    best = build(hi)
    while best.h > target_h:
        lo, hi = hi, 2 * hi
        best = build(hi)
        if hi > 2**16:
            raise ValueError(f"cannot reach fill distance {target_h} at desk scale")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        cand = build(mid)
        if cand.h <= target_h:
            hi, best = mid, cand
        else:
            lo = mid
    return best


def save_points_csv(path, points: PointSet):
    """One point per row: coordinates, then ``tag`` (``interior``/``boundary``)."""
    d = points.d
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(d)] + ["tag"])
        for row in points.interior:
            w.writerow([repr(float(v)) for v in row] + ["interior"])
        for row in points.boundary:
            w.writerow([repr(float(v)) for v in row] + ["boundary"])


def load_points_csv(path, domain: Domain | None = None, probe_count: int = DEFAULT_PROBES) -> PointSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[-1] != "tag":
        raise ValueError(f"{path}: last column must be 'tag'")
    d = len(header) - 1
    interior, boundary = [], []
    for row in body:
        coords = [float(v) for v in row[:d]]
        if row[d] == "interior":
            interior.append(coords)
        elif row[d] == "boundary":
            boundary.append(coords)
        else:
            raise ValueError(f"{path}: unknown tag {row[d]!r}")
    interior = np.array(interior, dtype=float).reshape(-1, d)
    boundary = np.array(boundary, dtype=float).reshape(-1, d)
    allpts = np.vstack([interior, boundary])
    q = separation_distance(allpts) if len(allpts) > 1 else float("nan")
    h = float("nan")
    if domain is not None:
        h = max(
            fill_distance(allpts, domain, probe_count),
            boundary_fill_distance(boundary, domain, probe_count),
        )
    return PointSet(interior, boundary, h, q)
