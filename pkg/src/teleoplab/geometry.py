"""Closed test-route geometry: construction, projection, sampling, rasterization.

A route is an ordered chain of straight and circular-arc segments that must
close back on its start pose. All queries (station projection, centerline
sampling, drivable-area rasters) are answered in closed form per segment, so
they are exact up to float precision rather than sample-table resolution.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ClosureError, OffMapError

POSITION_CLOSURE_TOL = 0.1          # m
HEADING_CLOSURE_TOL = math.radians(0.5)
OFF_MAP_DISTANCE = 50.0             # m
SAMPLE_SPACING = 0.5                # m, Route.samples spacing
DEFAULT_RASTER_EXTENT = (40.0, 40.0)   # m (ahead, lateral total)
DEFAULT_RASTER_RESOLUTION = 1.25       # m / cell


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    return -((-np.asarray(a) + np.pi) % (2.0 * np.pi) - np.pi)


@dataclass(frozen=True)
class Straight:
    length: float


@dataclass(frozen=True)
class Arc:
    radius: float
    angle: float  # signed rad, positive = left turn


@dataclass(frozen=True)
class RouteSpec:
    segments: tuple
    road_half_width: float = 3.5

    def validate(self) -> None:
        if not self.segments:
            raise ValueError("route spec needs at least one segment")
        if self.road_half_width <= 0:
            raise ValueError("road_half_width must be positive")
        for seg in self.segments:
            if isinstance(seg, Straight):
                if seg.length <= 0:
                    raise ValueError(f"straight length must be positive, got {seg.length}")
            elif isinstance(seg, Arc):
                if seg.radius <= 0:
                    raise ValueError(f"arc radius must be positive, got {seg.radius}")
                if not (0.0 < abs(seg.angle) < 2.0 * math.pi):
                    raise ValueError(f"arc angle must be in (0, 2*pi), got {seg.angle}")
            else:
                raise ValueError(f"unknown segment type: {seg!r}")


@dataclass(frozen=True)
class StationProjection:
    s: float        # arc length along the route, m
    e: float        # signed lateral offset, m, positive = left of centerline
    psi_ref: float  # centerline heading at the foot point, rad
    kappa: float    # centerline curvature at the foot point, 1/m


@dataclass
class OccupancyRaster:
    """Drivable-area grid in the vehicle body frame (x forward, y left).

    grid[ix, iy] is True when the cell center lies within road_half_width of
    the centerline. ix indexes forward distance, iy lateral (iy=0 rightmost).
    """

    grid: np.ndarray
    extent: tuple
    resolution: float

    def cell_centers_body(self) -> np.ndarray:
        nx, ny = self.grid.shape
        xs = (np.arange(nx) + 0.5) * self.resolution
        ys = -self.extent[1] / 2.0 + (np.arange(ny) + 0.5) * self.resolution
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.stack([gx, gy], axis=-1)


class _Seg:
    """Placed segment: geometry resolved into world coordinates."""

    __slots__ = ("kind", "s0", "length", "x0", "y0", "psi0", "radius",
                 "sgn", "cx", "cy", "a0")

    def __init__(self, kind, s0, length, x0, y0, psi0,
                 radius=0.0, sgn=0.0, cx=0.0, cy=0.0, a0=0.0):
        self.kind = kind
        self.s0 = s0
        self.length = length
        self.x0 = x0
        self.y0 = y0
        self.psi0 = psi0
        self.radius = radius
        self.sgn = sgn
        self.cx = cx
        self.cy = cy
        self.a0 = a0


class Route:
    """Immutable closed route with exact arc-length lookup."""

    def __init__(self, spec: RouteSpec, segs, total_length, straight_length,
                 curved_length):
        self.spec = spec
        self.road_half_width = spec.road_half_width
        self._segs = segs
        self._seg_s0 = np.array([sg.s0 for sg in segs])
        self.total_length = total_length
        self.straight_length = straight_length
        self.curved_length = curved_length
        n = int(round(total_length / SAMPLE_SPACING))
        stations = np.arange(n) * SAMPLE_SPACING
        xy, psi, kappa = self._pose_arrays(stations)
        self.samples = np.column_stack([xy, psi, kappa])

    # -- pose queries ------------------------------------------------------

    def wrap_station(self, s):
        return np.asarray(s) % self.total_length

    def _segment_index(self, s: float) -> int:
        i = bisect_right(self._seg_s0, s) - 1
        return max(0, min(i, len(self._segs) - 1))

    def _pose_arrays(self, stations):
        """Vectorized pose lookup: stations -> (xy (n,2), psi (n,), kappa (n,))."""
        s = self.wrap_station(stations).astype(float)
        idx = np.searchsorted(self._seg_s0, s, side="right") - 1
        x = np.empty_like(s)
        y = np.empty_like(s)
        psi = np.empty_like(s)
        kappa = np.zeros_like(s)
        for i, sg in enumerate(self._segs):
            m = idx == i
            if not m.any():
                continue
            u = s[m] - sg.s0
            if sg.kind == "straight":
                x[m] = sg.x0 + u * math.cos(sg.psi0)
                y[m] = sg.y0 + u * math.sin(sg.psi0)
                psi[m] = sg.psi0
            else:
                a = sg.a0 + sg.sgn * u / sg.radius
                x[m] = sg.cx + sg.radius * np.cos(a)
                y[m] = sg.cy + sg.radius * np.sin(a)
                psi[m] = sg.psi0 + sg.sgn * u / sg.radius
                kappa[m] = sg.sgn / sg.radius
        return np.column_stack([x, y]), wrap_angle(psi), kappa

    def pose_at(self, s: float):
        xy, psi, kappa = self._pose_arrays(np.array([s]))
        return float(xy[0, 0]), float(xy[0, 1]), float(psi[0]), float(kappa[0])

    # -- projection --------------------------------------------------------

    def _project_candidates(self, pts):
        """Per-segment closed-form feet for an (n,2) point array.

        Returns distance, signed lateral offset, station, heading, curvature
        arrays of shape (n_segments, n_points).
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        n = pts.shape[0]
        ns = len(self._segs)
        dist = np.full((ns, n), np.inf)
        e = np.zeros((ns, n))
        st = np.zeros((ns, n))
        psi = np.zeros((ns, n))
        kap = np.zeros((ns, n))
        for i, sg in enumerate(self._segs):
            if sg.kind == "straight":
                c, sn = math.cos(sg.psi0), math.sin(sg.psi0)
                dx = pts[:, 0] - sg.x0
                dy = pts[:, 1] - sg.y0
                u = np.clip(dx * c + dy * sn, 0.0, sg.length)
                fx = sg.x0 + u * c
                fy = sg.y0 + u * sn
                rx = pts[:, 0] - fx
                ry = pts[:, 1] - fy
                d = np.hypot(rx, ry)
                lat = rx * (-sn) + ry * c
                dist[i] = d
                e[i] = np.where(lat >= 0.0, d, -d)
                st[i] = sg.s0 + u
                psi[i] = sg.psi0
            else:
                R = sg.radius
                wx = pts[:, 0] - sg.cx
                wy = pts[:, 1] - sg.cy
                phi = np.arctan2(wy, wx)
                span = sg.length / R  # |angle|
                xi = (sg.sgn * (phi - sg.a0)) % (2.0 * math.pi)
                # exterior queries clamp to whichever arc endpoint is nearer
                a_start = sg.a0
                a_end = sg.a0 + sg.sgn * span
                d_start = np.hypot(pts[:, 0] - (sg.cx + R * np.cos(a_start)),
                                   pts[:, 1] - (sg.cy + R * np.sin(a_start)))
                d_end = np.hypot(pts[:, 0] - (sg.cx + R * np.cos(a_end)),
                                 pts[:, 1] - (sg.cy + R * np.sin(a_end)))
                xi_cl = np.where(xi <= span, xi,
                                 np.where(d_end <= d_start, span, 0.0))
                a = sg.a0 + sg.sgn * xi_cl
                fx = sg.cx + R * np.cos(a)
                fy = sg.cy + R * np.sin(a)
                d = np.hypot(pts[:, 0] - fx, pts[:, 1] - fy)
                psi_f = sg.psi0 + sg.sgn * xi_cl
                rx = pts[:, 0] - fx
                ry = pts[:, 1] - fy
                lat = rx * (-np.sin(psi_f)) + ry * np.cos(psi_f)
                dist[i] = d
                e[i] = np.where(lat >= 0.0, d, -d)
                st[i] = sg.s0 + xi_cl * R
                psi[i] = psi_f
                kap[i] = sg.sgn / R
        return dist, e, st, psi, kap

    def project_points(self, pts) -> tuple:
        """Global nearest-foot projection of an (n,2) array.

        Returns (dist, e, s, psi_ref, kappa) arrays of shape (n,).
        """
        dist, e, st, psi, kap = self._project_candidates(pts)
        best = np.argmin(dist, axis=0)
        cols = np.arange(dist.shape[1])
        return (dist[best, cols], e[best, cols], st[best, cols],
                wrap_angle(psi[best, cols]), kap[best, cols])


def build_route(spec: RouteSpec) -> Route:
    """Place segments in the world and verify the loop closes.

    Raises ClosureError when the chained segments miss the start pose by more
    than 0.1 m or 0.5 degrees.
    """
    spec.validate()
    segs = []
    x = y = psi = 0.0
    s = 0.0
    straight_total = 0.0
    curved_total = 0.0
    for seg in spec.segments:
        if isinstance(seg, Straight):
            segs.append(_Seg("straight", s, seg.length, x, y, psi))
            x += seg.length * math.cos(psi)
            y += seg.length * math.sin(psi)
            s += seg.length
            straight_total += seg.length
        else:
            R, th = seg.radius, seg.angle
            sgn = 1.0 if th > 0 else -1.0
            # turn center sits a radius away along the (left/right) normal
            cx = x - math.sin(psi) * R * sgn
            cy = y + math.cos(psi) * R * sgn
            a0 = math.atan2(y - cy, x - cx)
            length = abs(th) * R
            segs.append(_Seg("arc", s, length, x, y, psi,
                             radius=R, sgn=sgn, cx=cx, cy=cy, a0=a0))
            a1 = a0 + th
            x = cx + R * math.cos(a1)
            y = cy + R * math.sin(a1)
            psi += th
            s += length
            curved_total += length
    position_gap = math.hypot(x, y)
    heading_gap = abs(float(wrap_angle(psi)))
    if position_gap > POSITION_CLOSURE_TOL or heading_gap > HEADING_CLOSURE_TOL:
        raise ClosureError(position_gap, heading_gap)
    return Route(spec, segs, s, straight_total, curved_total)


def project(route: Route, point, hint_s=None) -> StationProjection:
    """Project a world point onto the centerline.

    With hint_s the foot is chosen among candidates whose station lies within
    a +-60 m window of the hint (wrapped), which keeps sequential tracking
    monotone where the loop approaches itself. Raises OffMapError beyond 50 m.
    """
    pts = np.asarray(point, dtype=float).reshape(1, 2)
    dist, e, st, psi, kap = route._project_candidates(pts)
    dist = dist[:, 0]
    if hint_s is not None:
        half = route.total_length / 2.0
        ds = (st[:, 0] - float(hint_s) + half) % route.total_length - half
        in_window = np.abs(ds) <= 60.0
        if in_window.any():
            dist = np.where(in_window, dist, np.inf)
    i = int(np.argmin(dist))
    if not np.isfinite(dist[i]) or dist[i] > OFF_MAP_DISTANCE:
        raise OffMapError(f"point {point} is {dist[i]:.1f} m from the centerline")
    return StationProjection(
        s=float(st[i, 0] % route.total_length),
        e=float(e[i, 0]),
        psi_ref=float(wrap_angle(psi[i, 0])),
        kappa=float(kap[i, 0]),
    )


def sample_centerline(route: Route, s0: float, ds: float, n: int) -> np.ndarray:
    """n centerline samples from station s0 at arc-length spacing ds.

    Stations wrap modulo the total route length. Returns an (n, 4) array of
    (x, y, psi_ref, kappa).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if ds <= 0:
        raise ValueError("ds must be positive")
    stations = s0 + ds * np.arange(n)
    xy, psi, kappa = route._pose_arrays(stations)
    return np.column_stack([xy, psi, kappa])


def drivable_raster(route: Route, pose, extent=DEFAULT_RASTER_EXTENT,
                    resolution=DEFAULT_RASTER_RESOLUTION) -> OccupancyRaster:
    """Rasterize the drivable corridor in the body frame of `pose`.

    `pose` is anything with x, y, psi attributes. The grid covers
    extent[0] m ahead and +-extent[1]/2 m laterally. A cell is drivable iff
    its center projects within road_half_width of the centerline.
    """
    x0, y0, psi = pose.x, pose.y, pose.psi
    # reject poses that are themselves off-map
    project(route, (x0, y0))
    nx = int(round(extent[0] / resolution))
    ny = int(round(extent[1] / resolution))
    xs = (np.arange(nx) + 0.5) * resolution
    ys = -extent[1] / 2.0 + (np.arange(ny) + 0.5) * resolution
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    c, sn = math.cos(psi), math.sin(psi)
    wx = x0 + gx * c - gy * sn
    wy = y0 + gx * sn + gy * c
    pts = np.column_stack([wx.ravel(), wy.ravel()])
    dist, _, _, _, _ = route.project_points(pts)
    grid = (dist <= route.road_half_width).reshape(nx, ny)
    return OccupancyRaster(grid=grid, extent=tuple(extent), resolution=resolution)


# -- route config files ----------------------------------------------------

def route_spec_to_dict(spec: RouteSpec) -> dict:
    segments = []
    for seg in spec.segments:
        if isinstance(seg, Straight):
            segments.append({"straight": seg.length})
        else:
            segments.append({"arc": {"radius": seg.radius, "angle": seg.angle}})
    return {"segments": segments, "road_half_width": spec.road_half_width}


def route_spec_from_dict(data: dict) -> RouteSpec:
    segments = []
    for item in data["segments"]:
        if "straight" in item:
            segments.append(Straight(float(item["straight"])))
        elif "arc" in item:
            arc = item["arc"]
            segments.append(Arc(float(arc["radius"]), float(arc["angle"])))
        else:
            raise ValueError(f"unknown segment entry: {item!r}")
    return RouteSpec(segments=tuple(segments),
                     road_half_width=float(data.get("road_half_width", 3.5)))


def load_route_spec(path) -> RouteSpec:
    with open(path) as fh:
        return route_spec_from_dict(json.load(fh))


def save_route_spec(spec: RouteSpec, path) -> None:
    Path(path).write_text(json.dumps(route_spec_to_dict(spec), indent=2) + "\n")


def canonical_route_spec() -> RouteSpec:
    """The committed 622 m test circuit.

    Six corner radii of 11/45/12/10/18/19 m separated by straights; curved
    segments total 180 m and straights 442 m. Five corners turn left and the
    12 m-radius corner turns right, so the heading budget closes at +2*pi.
    """
    path = Path(__file__).parent / "data" / "route_canonical.json"
    return load_route_spec(path)
