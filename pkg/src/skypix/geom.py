"""Spherical geometry: coordinates, geodesics, windows and triangulation.

Windows are closed regions: points exactly on a disc rim or polygon edge
count as inside.  Polygon vertices are joined by great-circle arcs and the
polygon must fit inside an open hemisphere; larger regions are expressed as
complements or window-set combinations.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GeometryError

CARTESIAN = "cartesian"
SPHERICAL = "spherical"
GEOGRAPHIC = "geographic"

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class SphericalPoint:
    """Colatitude/longitude pair in radians, theta in [0, pi], phi in [0, 2pi)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise DomainError("non-finite angle")
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError("theta must be in [0, pi]")
        object.__setattr__(self, "phi", self.phi % (2 * math.pi))

    def to_vector(self):
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi),
                         math.cos(self.theta)])


@dataclass(frozen=True)
class UnitVector:
    """Point on the unit sphere; the norm must be 1 within 1e-12."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)
        if abs(norm - 1.0) > 1e-12:
            raise DomainError("vector is not normalized")

    def to_array(self):
        return np.array([self.x, self.y, self.z])

    @property
    def theta(self):
        return math.acos(min(1.0, max(-1.0, self.z)))

    @property
    def phi(self):
        if abs(self.z) == 1.0:
            return 0.0
        return math.atan2(self.y, self.x) % (2 * math.pi)


def cart2sph(xyz):
    """Unit vectors ``(..., 3)`` -> ``(theta, phi)``; phi canonical in [0, 2pi)."""
    xyz = np.asarray(xyz, dtype=np.float64)
    theta = np.arccos(np.clip(xyz[..., 2], -1.0, 1.0))
    phi = np.arctan2(xyz[..., 1], xyz[..., 0]) % (2 * np.pi)
    phi = np.where(np.abs(xyz[..., 2]) >= 1.0, 0.0, phi)
    return theta, phi


def sph2cart(theta, phi):
    """``(theta, phi)`` -> unit vectors, stacked on the last axis."""
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def geo2sph(lon, lat):
    """Geographic (lon, lat) radians -> (theta, phi): theta = pi/2 - lat."""
    lon = np.asarray(lon, dtype=np.float64)
    lat = np.asarray(lat, dtype=np.float64)
    if np.any(np.abs(lat) > math.pi / 2 + 1e-12):
        raise DomainError("latitude must be in [-pi/2, pi/2]")
    return math.pi / 2 - lat, lon % (2 * np.pi)


def sph2geo(theta, phi):
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    return phi % (2 * np.pi), math.pi / 2 - theta


def convert_coords(point, source, target):
    """Convert a point tuple between cartesian/spherical/geographic systems.

    ``cartesian`` is ``(x, y, z)``, ``spherical`` is ``(theta, phi)`` and
    ``geographic`` is ``(lon, lat)``, all angles in radians.
    """
    systems = (CARTESIAN, SPHERICAL, GEOGRAPHIC)
    if source not in systems or target not in systems:
        raise DomainError("unknown coordinate system")
    values = np.asarray(point, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DomainError("non-finite coordinates")
    if source == CARTESIAN:
        norm = np.linalg.norm(values)
        if abs(norm - 1.0) > 1e-9:
            raise DomainError("cartesian input must be a unit vector")
        theta, phi = cart2sph(values)
    elif source == SPHERICAL:
        theta, phi = values[0], values[1] % (2 * math.pi)
        if not 0 <= theta <= math.pi:
            raise DomainError("theta must be in [0, pi]")
    else:
        theta, phi = geo2sph(values[0], values[1])
    if target == CARTESIAN:
        return tuple(sph2cart(theta, phi))
    if target == SPHERICAL:
        return float(theta), float(phi)
    lon, lat = sph2geo(theta, phi)
    return float(lon), float(lat)


def hms_to_degrees(hours, minutes, seconds):
    """Celestial (h, m, s) -> degrees: 15 * (h + m/60 + s/3600)."""
    if not (0 <= hours < 24 and 0 <= minutes < 60 and 0 <= seconds < 60):
        raise DomainError("h/m/s out of range")
    return 15.0 * (hours + minutes / 60.0 + seconds / 3600.0)


def geodesic_distance(a, b):
    """Great-circle angle between unit vectors, arccos of the clipped dot."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.arccos(np.clip((a * b).sum(axis=-1), -1.0, 1.0))


def extremal_distance(points, target=None, mode="max"):
    """Extremal geodesic distance, pairwise or from every point to a target."""
    if mode not in ("max", "min"):
        raise DomainError("mode must be 'max' or 'min'")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.size == 0:
        raise DomainError("empty point set")
    if target is not None:
        d = geodesic_distance(pts, np.asarray(target, dtype=np.float64))
        return float(d.max() if mode == "max" else d.min())
    if len(pts) < 2:
        raise DomainError("pairwise mode needs at least two points")
    best = 0.0 if mode == "max" else math.pi
    block = 2048
    for i in range(0, len(pts), block):
        chunk = pts[i:i + block]
        dots = np.clip(chunk @ pts.T, -1.0, 1.0)
        d = np.arccos(dots)
        # mask self and duplicate pairs only for the minimum
        if mode == "max":
            best = max(best, float(d.max()))
        else:
            np.fill_diagonal(d[:, i:i + block], math.pi)
            best = min(best, float(d.min()))
    return best


# ---------------------------------------------------------------------------
# windows

@dataclass(frozen=True)
class Window:
    """A spherical disc or polygon, optionally complemented.

    ``center``/``r`` describe a disc (geodesic radius in (0, pi)); polygons
    list at least three vertices, joined by great-circle arcs, all within an
    open hemisphere.  ``assumed_convex`` unlocks the cheap edge-sign
    membership test for polygons known to be convex.
    """

    kind: str
    complement: bool = False
    center: SphericalPoint | None = None
    r: float | None = None
    vertices: tuple = ()
    assumed_convex: bool = False

    def __post_init__(self):
        if self.kind == "disc":
            if self.center is None or self.r is None:
                raise GeometryError("disc window needs center and r")
            if not 0.0 < self.r < math.pi:
                raise GeometryError("disc radius must be in (0, pi)")
        elif self.kind == "polygon":
            verts = tuple(self.vertices)
            if len(verts) < 3:
                raise GeometryError("polygon needs at least 3 vertices")
            arr = np.array([v.to_vector() for v in verts])
            same = (np.abs(arr - np.roll(arr, -1, axis=0)).max(axis=1) < 1e-15)
            if same.any():
                raise GeometryError("repeated consecutive vertices")
            object.__setattr__(self, "vertices", verts)
        else:
            raise GeometryError("window kind must be 'disc' or 'polygon'")

    # -- geometry ---------------------------------------------------------

    def vertex_array(self):
        return np.array([v.to_vector() for v in self.vertices])

    def base_area(self):
        """Area of the un-complemented shape, steradians."""
        if self.kind == "disc":
            return 2 * math.pi * (1 - math.cos(self.r))
        return sum(spherical_triangle_area(*t) for t in triangulate(self))

    def area(self):
        """Analytic window area; 4*pi minus the base area when complemented."""
        base = self.base_area()
        return 4 * math.pi - base if self.complement else base

    def complemented(self):
        return Window(self.kind, not self.complement, self.center, self.r,
                      self.vertices, self.assumed_convex)

    def contains(self, xyz):
        """Membership of unit vectors ``(..., 3)``; boundaries are inside."""
        inside = self._base_contains(np.asarray(xyz, dtype=np.float64))
        return ~inside if self.complement else inside

    def _base_contains(self, xyz):
        if self.kind == "disc":
            c = self.center.to_vector()
            return (xyz @ c) >= math.cos(self.r) - _EDGE_TOL
        verts = self.vertex_array()
        if self.assumed_convex:
            return _convex_contains(verts, xyz)
        out = np.zeros(xyz.shape[:-1], dtype=bool)
        for tri in triangulate(self):
            out |= _convex_contains(np.array(tri), xyz)
        return out

    def describe(self):
        kind = ("minus." if self.complement else "") + self.kind
        return {"kind": kind, "area": self.area()}

    # -- serialization ----------------------------------------------------

    def to_dict(self):
        d = {"kind": self.kind, "complement": self.complement}
        if self.kind == "disc":
            d["center"] = {"theta": self.center.theta, "phi": self.center.phi}
            d["r"] = self.r
        else:
            d["vertices"] = [{"theta": v.theta, "phi": v.phi} for v in self.vertices]
            d["assumedConvex"] = self.assumed_convex
        return d

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind")
        complement = bool(d.get("complement", False))
        if kind == "disc":
            c = d["center"]
            return cls("disc", complement,
                       center=SphericalPoint(c["theta"], c["phi"]), r=float(d["r"]))
        if kind == "polygon":
            verts = tuple(SphericalPoint(v["theta"], v["phi"]) for v in d["vertices"])
            return cls("polygon", complement, vertices=verts,
                       assumed_convex=bool(d.get("assumedConvex", False)))
        raise GeometryError("window spec kind must be 'disc' or 'polygon'")


def disc(theta, phi, r, complement=False):
    """Shorthand for a disc window centered at (theta, phi)."""
    return Window("disc", complement, center=SphericalPoint(theta, phi), r=r)


def polygon(points, complement=False, assumed_convex=False):
    """Shorthand for a polygon window from (theta, phi) pairs."""
    verts = tuple(SphericalPoint(t, p) for t, p in points)
    return Window("polygon", complement, vertices=verts,
                  assumed_convex=assumed_convex)


def _convex_contains(verts, xyz):
    """Same-side test: inside iff on the interior side of every edge plane."""
    centroid = verts.mean(axis=0)
    norm = np.linalg.norm(centroid)
    if norm < 1e-12:
        raise GeometryError("degenerate polygon")
    centroid = centroid / norm
    inside = np.ones(np.asarray(xyz).shape[:-1], dtype=bool)
    for i in range(len(verts)):
        n = np.cross(verts[i], verts[(i + 1) % len(verts)])
        sign = 1.0 if n @ centroid >= 0 else -1.0
        inside &= (np.asarray(xyz) @ (sign * n)) >= -_EDGE_TOL
    return inside


@dataclass(frozen=True)
class WindowSet:
    """Combination of windows: the union of the plain members intersected
    with every complemented member (no plain members = the full sphere)."""

    windows: tuple

    def __init__(self, windows):
        if isinstance(windows, Window):
            windows = (windows,)
        object.__setattr__(self, "windows", tuple(windows))

    def contains(self, xyz):
        xyz = np.asarray(xyz, dtype=np.float64)
        plain = [w for w in self.windows if not w.complement]
        comp = [w for w in self.windows if w.complement]
        if plain:
            inside = np.zeros(xyz.shape[:-1], dtype=bool)
            for w in plain:
                inside |= w.contains(xyz)
        else:
            inside = np.ones(xyz.shape[:-1], dtype=bool)
        for w in comp:
            inside &= w.contains(xyz)
        return inside

    def describe(self):
        return [w.describe() for w in self.windows]

    def to_list(self):
        return [w.to_dict() for w in self.windows]

    @classmethod
    def from_spec(cls, spec):
        """Build from parsed JSON: a window object or a list of them."""
        if isinstance(spec, dict):
            spec = [spec]
        return cls(tuple(Window.from_dict(d) for d in spec))


def window_area(w):
    """Analytic area of a single window, in steradians."""
    return w.area()


# ---------------------------------------------------------------------------
# triangulation

def spherical_triangle_area(a, b, c):
    """Spherical excess via L'Huilier's theorem (stable for thin triangles)."""
    ar = geodesic_distance(b, c)
    br = geodesic_distance(a, c)
    cr = geodesic_distance(a, b)
    s = 0.5 * (ar + br + cr)
    inner = (math.tan(0.5 * s) * math.tan(0.5 * (s - ar))
             * math.tan(0.5 * (s - br)) * math.tan(0.5 * (s - cr)))
    return 4.0 * math.atan(math.sqrt(max(0.0, inner)))


def _gnomonic(verts, pole):
    """Project onto the tangent plane at ``pole``; geodesics map to lines."""
    e1 = np.cross(pole, [0.0, 0.0, 1.0])
    if np.linalg.norm(e1) < 1e-9:
        e1 = np.cross(pole, [1.0, 0.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(pole, e1)
    w = verts @ pole
    if np.any(w <= 1e-9):
        raise GeometryError("polygon does not fit inside a hemisphere")
    return np.stack([verts @ e1 / w, verts @ e2 / w], axis=-1)


def _segments_intersect(p1, p2, p3, p4):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def triangulate(w):
    """Split a polygon window into n-2 spherical triangles with disjoint
    interiors whose union is the polygon (ear clipping in the gnomonic
    plane about the vertex centroid)."""
    if w.kind != "polygon":
        raise GeometryError("only polygon windows can be triangulated")
    verts = w.vertex_array()
    n = len(verts)
    centroid = verts.mean(axis=0)
    if np.linalg.norm(centroid) < 1e-12:
        raise GeometryError("degenerate polygon")
    centroid /= np.linalg.norm(centroid)
    plane = _gnomonic(verts, centroid)

    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(plane[i], plane[(i + 1) % n],
                                   plane[j], plane[(j + 1) % n]):
                raise GeometryError("self-intersecting polygon")

    order = list(range(n))
    signed = 0.0
    for i in range(n):
        x1, y1 = plane[i]
        x2, y2 = plane[(i + 1) % n]
        signed += x1 * y2 - x2 * y1
    if signed < 0:
        order.reverse()

    def cross2(o, a, b):
        return ((plane[a][0] - plane[o][0]) * (plane[b][1] - plane[o][1])
                - (plane[a][1] - plane[o][1]) * (plane[b][0] - plane[o][0]))

    def point_in_tri(p, a, b, c):
        def side(u, v):
            return ((plane[v][0] - plane[u][0]) * (plane[p][1] - plane[u][1])
                    - (plane[v][1] - plane[u][1]) * (plane[p][0] - plane[u][0]))
        return side(a, b) > 0 and side(b, c) > 0 and side(c, a) > 0

    triangles = []
    guard = 0
    while len(order) > 3:
        guard += 1
        if guard > 2 * n * n:
            raise GeometryError("triangulation failed; polygon may be degenerate")
        m = len(order)
        clipped = False
        for k in range(m):
            a, b, c = order[(k - 1) % m], order[k], order[(k + 1) % m]
            if cross2(a, b, c) <= 0:
                continue
            if any(point_in_tri(q, a, b, c) for q in order if q not in (a, b, c)):
                continue
            triangles.append((verts[a], verts[b], verts[c]))
            order.pop(k)
            clipped = True
            break
        if not clipped:
            raise GeometryError("no ear found; polygon may be self-intersecting")
    triangles.append(tuple(verts[i] for i in order))
    return triangles
