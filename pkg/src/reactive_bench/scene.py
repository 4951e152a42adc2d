"""Core domain types: agent states, trajectories, maps, and the geometric
primitives (oriented boxes, polygon containment, path statistics) that the
simulator and the metric suite are built on.

All types are immutable value objects; they can be shared freely across
concurrently evaluated scenarios.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

TICK_PERIOD = 0.1  # simulation runs at 10 Hz


class SceneError(ValueError):
    """Invalid scene-level input (bad state, malformed map, short trajectory)."""


@dataclass(frozen=True)
class AgentState:
    """Kinematic state of one agent at one tick.

    Heading is stored as (sin, cos) and renormalized on construction so the
    unit-circle invariant survives arithmetic done upstream.
    """

    x: float
    y: float
    sin_heading: float
    cos_heading: float
    vx: float
    vy: float
    length: float
    width: float

    def __post_init__(self):
        norm = math.hypot(self.sin_heading, self.cos_heading)
        if norm <= 0.0 or not math.isfinite(norm):
            raise SceneError("heading (sin, cos) must have positive norm")
        object.__setattr__(self, "sin_heading", self.sin_heading / norm)
        object.__setattr__(self, "cos_heading", self.cos_heading / norm)
        if self.length <= 0.0 or self.width <= 0.0:
            raise SceneError("agent length and width must be positive")

    @property
    def heading(self) -> float:
        return math.atan2(self.sin_heading, self.cos_heading)

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @classmethod
    def from_heading(cls, x, y, heading, vx, vy, length, width) -> "AgentState":
        return cls(x, y, math.sin(heading), math.cos(heading), vx, vy, length, width)


@dataclass(frozen=True)
class Trajectory:
    """Ordered agent states at a fixed tick period, indexed by absolute tick."""

    states: tuple
    tick_period: float = TICK_PERIOD
    start_tick: int = 0

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) == 0:
            raise SceneError("trajectory must be non-empty")
        if self.tick_period <= 0.0:
            raise SceneError("tick_period must be positive")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def end_tick(self) -> int:
        return self.start_tick + len(self.states) - 1

    def covers(self, tick: int) -> bool:
        return self.start_tick <= tick <= self.end_tick

    def state_at(self, tick: int) -> AgentState:
        if not self.covers(tick):
            raise SceneError(
                f"tick {tick} outside trajectory range "
                f"[{self.start_tick}, {self.end_tick}]"
            )
        return self.states[tick - self.start_tick]

    def slice(self, first_tick: int, last_tick: int) -> "Trajectory":
        """Inclusive sub-trajectory [first_tick, last_tick]."""
        if first_tick < self.start_tick or last_tick > self.end_tick:
            raise SceneError("slice outside trajectory range")
        lo = first_tick - self.start_tick
        hi = last_tick - self.start_tick + 1
        return Trajectory(self.states[lo:hi], self.tick_period, first_tick)

    def positions(self) -> np.ndarray:
        return np.array([[s.x, s.y] for s in self.states])


@dataclass(frozen=True)
class Lane:
    id: str
    points: np.ndarray  # (N, 2) polyline, N >= 2
    speed_limit: Optional[float] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
            raise SceneError(f"lane {self.id!r}: polyline needs >= 2 2-D points")
        object.__setattr__(self, "points", pts)
        if self.speed_limit is not None and self.speed_limit <= 0:
            raise SceneError(f"lane {self.id!r}: speed limit must be positive")


@dataclass(frozen=True)
class DrivablePolygon:
    outer: np.ndarray  # (N, 2), N >= 3, implicitly closed
    holes: tuple = ()

    def __post_init__(self):
        outer = _validate_ring(np.asarray(self.outer, dtype=float))
        holes = tuple(_validate_ring(np.asarray(h, dtype=float)) for h in self.holes)
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "holes", holes)


def _validate_ring(ring: np.ndarray) -> np.ndarray:
    # Accepts rings given either open or explicitly closed; stores them open.
    if ring.ndim != 2 or ring.shape[1] != 2:
        raise SceneError("polygon ring must be an (N, 2) array")
    if ring.shape[0] >= 2 and np.allclose(ring[0], ring[-1]):
        ring = ring[:-1]
    if ring.shape[0] < 3:
        raise SceneError("polygon ring needs >= 3 points")
    e1 = ring[1] - ring[0]
    collinear = True
    for p in ring[2:]:
        if abs(np.cross(e1, p - ring[0])) > 1e-12:
            collinear = False
            break
    if collinear:
        raise SceneError("polygon ring points are collinear")
    return ring


@dataclass(frozen=True)
class MapModel:
    lanes: tuple = ()
    drivable: tuple = ()
    route: tuple = ()  # ordered lane ids for the ego

    def __post_init__(self):
        object.__setattr__(self, "lanes", tuple(self.lanes))
        object.__setattr__(self, "drivable", tuple(self.drivable))
        object.__setattr__(self, "route", tuple(self.route))
        ids = {ln.id for ln in self.lanes}
        for rid in self.route:
            if rid not in ids:
                raise SceneError(f"route references unknown lane {rid!r}")

    def lane_by_id(self, lane_id: str) -> Lane:
        for ln in self.lanes:
            if ln.id == lane_id:
                return ln
        raise SceneError(f"unknown lane {lane_id!r}")

    def route_polyline(self) -> np.ndarray:
        """Concatenated route-lane centerline (duplicate joints dropped)."""
        if not self.route:
            raise SceneError("map has no route")
        parts = []
        for rid in self.route:
            pts = self.lane_by_id(rid).points
            if parts and np.allclose(parts[-1][-1], pts[0]):
                pts = pts[1:]
            parts.append(pts)
        return np.vstack(parts)


@dataclass(frozen=True)
class Scenario:
    """One unit of evaluation: a map, recorded agent histories, and an ego."""

    id: str
    map: MapModel
    agents: tuple  # ((agent_id, Trajectory), ...)
    ego_id: str
    duration_ticks: int
    history_ticks: int

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        ids = [aid for aid, _ in self.agents]
        if ids.count(self.ego_id) != 1:
            raise SceneError(f"ego id {self.ego_id!r} must appear exactly once")
        if len(set(ids)) != len(ids):
            raise SceneError("duplicate agent ids")
        if not (0 < self.history_ticks < self.duration_ticks):
            raise SceneError("need 0 < history_ticks < duration_ticks")
        for aid, traj in self.agents:
            if traj.start_tick > 0 or traj.end_tick < self.history_ticks:
                raise SceneError(f"agent {aid!r}: recording must cover [0, history_ticks]")
        ego = self.recording(self.ego_id)
        if ego.end_tick < self.duration_ticks:
            raise SceneError("ego recording must cover [0, duration_ticks]")

    @property
    def agent_ids(self) -> tuple:
        return tuple(aid for aid, _ in self.agents)

    def recording(self, agent_id: str) -> Trajectory:
        for aid, traj in self.agents:
            if aid == agent_id:
                return traj
        raise SceneError(f"unknown agent {agent_id!r}")


@dataclass(frozen=True)
class OrientedBox:
    center: np.ndarray
    half_length: float
    half_width: float
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.half_length <= 0 or self.half_width <= 0:
            raise SceneError("box half-extents must be positive")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    def corners(self) -> np.ndarray:
        """Corners in CCW order starting front-left, shape (4, 2)."""
        c, s = math.cos(self.heading), math.sin(self.heading)
        local = np.array(
            [
                [self.half_length, self.half_width],
                [-self.half_length, self.half_width],
                [-self.half_length, -self.half_width],
                [self.half_length, -self.half_width],
            ]
        )
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + self.center

    def axes(self) -> np.ndarray:
        c, s = math.cos(self.heading), math.sin(self.heading)
        return np.array([[c, s], [-s, c]])  # longitudinal, lateral unit vectors

    @property
    def circumradius(self) -> float:
        return math.hypot(self.half_length, self.half_width)


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def footprint(state: AgentState) -> OrientedBox:
    return OrientedBox(
        center=np.array([state.x, state.y]),
        half_length=state.length / 2.0,
        half_width=state.width / 2.0,
        heading=math.atan2(state.sin_heading, state.cos_heading),
    )


def obb_intersects(a: OrientedBox, b: OrientedBox) -> bool:
    """Separating-axis test over the 4 face normals; touching counts as overlap."""
    d = b.center - a.center
    if np.dot(d, d) > (a.circumradius + b.circumradius) ** 2:
        return False
    axes = np.vstack([a.axes(), b.axes()])
    ca = np.abs(axes @ a.axes().T)  # |axis . a_axes|
    cb = np.abs(axes @ b.axes().T)
    ext_a = ca @ np.array([a.half_length, a.half_width])
    ext_b = cb @ np.array([b.half_length, b.half_width])
    dist = np.abs(axes @ d)
    return bool(np.all(dist <= ext_a + ext_b))


def obb_separation_margin(a: OrientedBox, b: OrientedBox) -> float:
    """Max over the 4 face axes of (projected gap); positive means separated.

    Used as a contact-proximity measure, not an exact distance.
    """
    d = b.center - a.center
    axes = np.vstack([a.axes(), b.axes()])
    ext_a = np.abs(axes @ a.axes().T) @ np.array([a.half_length, a.half_width])
    ext_b = np.abs(axes @ b.axes().T) @ np.array([b.half_length, b.half_width])
    gaps = np.abs(axes @ d) - (ext_a + ext_b)
    return float(np.max(gaps))


def _points_on_ring_edge(points: np.ndarray, ring: np.ndarray, tol: float) -> np.ndarray:
    """Boolean mask of points within tol of any edge of the (closed) ring."""
    a = ring
    b = np.roll(ring, -1, axis=0)
    ab = b - a  # (E, 2)
    ap = points[:, None, :] - a[None, :, :]  # (P, E, 2)
    denom = np.einsum("ej,ej->e", ab, ab)
    denom = np.where(denom == 0.0, 1.0, denom)
    t = np.clip(np.einsum("pej,ej->pe", ap, ab) / denom, 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    dist2 = np.sum((points[:, None, :] - closest) ** 2, axis=2)
    return np.min(dist2, axis=1) <= tol * tol


def _points_in_ring(points: np.ndarray, ring: np.ndarray, boundary_tol: float = 1e-9) -> np.ndarray:
    """Even-odd containment for many points; boundary points count as inside."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = points[:, 0], points[:, 1]
    inside = np.zeros(len(points), dtype=bool)
    xs, ys = ring[:, 0], ring[:, 1]
    xe, ye = np.roll(xs, -1), np.roll(ys, -1)
    for i in range(len(ring)):
        crosses = (ys[i] > y) != (ye[i] > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (y - ys[i]) / (ye[i] - ys[i])
            x_cross = xs[i] + t * (xe[i] - xs[i])
        hit = crosses & (x < x_cross)
        inside ^= hit
    on_edge = _points_on_ring_edge(points, ring, boundary_tol)
    return inside | on_edge


def point_in_drivable(p: Sequence[float], map_model: MapModel) -> bool:
    """True iff p lies inside some drivable polygon and outside its holes.

    Boundary points (outer or hole boundary) count as inside.
    """
    pt = np.asarray(p, dtype=float).reshape(1, 2)
    for poly in map_model.drivable:
        if not _points_in_ring(pt, poly.outer)[0]:
            continue
        in_hole = False
        for hole in poly.holes:
            if _points_in_ring(pt, hole)[0] and not _points_on_ring_edge(pt, hole, 1e-9)[0]:
                in_hole = True
                break
        if not in_hole:
            return True
    return False


def points_in_drivable(points: np.ndarray, map_model: MapModel) -> np.ndarray:
    """Vectorized point_in_drivable over an (N, 2) array."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    result = np.zeros(len(points), dtype=bool)
    for poly in map_model.drivable:
        in_outer = _points_in_ring(points, poly.outer)
        in_poly = in_outer.copy()
        for hole in poly.holes:
            strict_hole = _points_in_ring(points, hole) & ~_points_on_ring_edge(
                points, hole, 1e-9
            )
            in_poly &= ~strict_hole
        result |= in_poly
    return result


def path_length(traj: Trajectory) -> float:
    if len(traj) < 2:
        raise SceneError("insufficient points")
    pos = traj.positions()
    return float(np.sum(np.linalg.norm(np.diff(pos, axis=0), axis=1)))


def mean_abs_curvature(traj: Trajectory) -> float:
    """Mean |heading change| / arc-length over interior points.

    Segments shorter than 1e-6 m carry no reliable tangent and contribute zero.
    """
    if len(traj) < 3:
        raise SceneError("insufficient points")
    pos = traj.positions()
    seg = np.diff(pos, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    curvatures = []
    for i in range(1, len(pos) - 1):
        l0, l1 = seg_len[i - 1], seg_len[i]
        if l0 < 1e-6 or l1 < 1e-6:
            curvatures.append(0.0)
            continue
        h0 = math.atan2(seg[i - 1, 1], seg[i - 1, 0])
        h1 = math.atan2(seg[i, 1], seg[i, 0])
        dh = abs(wrap_angle(h1 - h0))
        curvatures.append(dh / (0.5 * (l0 + l1)))
    return float(np.mean(curvatures))


def project_to_polyline(point: Sequence[float], polyline: np.ndarray):
    """Project a point onto a polyline.

    Returns (arc_length, signed_lateral_offset, tangent_heading). The sign of
    the lateral offset is positive to the left of the travel direction.
    """
    p = np.asarray(point, dtype=float)
    pts = np.asarray(polyline, dtype=float)
    a = pts[:-1]
    b = pts[1:]
    ab = b - a
    seg_len2 = np.einsum("ij,ij->i", ab, ab)
    seg_len2_safe = np.where(seg_len2 == 0.0, 1.0, seg_len2)
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / seg_len2_safe, 0.0, 1.0)
    proj = a + t[:, None] * ab
    d2 = np.sum((proj - p) ** 2, axis=1)
    i = int(np.argmin(d2))
    seg_lengths = np.sqrt(seg_len2)
    arc = float(np.sum(seg_lengths[:i]) + t[i] * seg_lengths[i])
    tangent = ab[i] / seg_lengths[i] if seg_lengths[i] > 0 else np.array([1.0, 0.0])
    rel = p - proj[i]
    lateral = float(tangent[0] * rel[1] - tangent[1] * rel[0])
    return arc, lateral, float(math.atan2(tangent[1], tangent[0]))


def point_along_polyline(polyline: np.ndarray, arc: float):
    """Point and tangent heading at a given arc-length (clamped to the ends)."""
    pts = np.asarray(polyline, dtype=float)
    seg = np.diff(pts, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    total = float(np.sum(seg_len))
    arc = min(max(arc, 0.0), total)
    acc = 0.0
    for i in range(len(seg)):
        if acc + seg_len[i] >= arc or i == len(seg) - 1:
            t = 0.0 if seg_len[i] == 0 else (arc - acc) / seg_len[i]
            point = pts[i] + t * seg[i]
            direction = seg[i] / seg_len[i] if seg_len[i] > 0 else np.array([1.0, 0.0])
            return point, float(math.atan2(direction[1], direction[0]))
        acc += seg_len[i]
    return pts[-1], 0.0


def polyline_arclength(polyline: np.ndarray) -> float:
    pts = np.asarray(polyline, dtype=float)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
