"""Bounded domains in 2D/3D and uniform cell meshes over them.

Membership is for the open domain. Float predicates decide almost every
point; points inside a thin band around the boundary are re-decided with
exact rational arithmetic on the (exactly representable) float inputs, so a
mesh is the same on every platform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "DomainError",
    "DegenerateDomainError",
    "SelfIntersectionError",
    "MeshResolutionError",
    "Domain",
    "Disc",
    "Ball",
    "Box",
    "Ellipsoid",
    "Polygon",
    "Triangle",
    "Mesh",
    "make_domain",
    "domain_from_spec",
    "normalize_measure",
    "equilateral_triangle",
    "regular_polygon",
    "make_mesh",
]

_BAND = 1e-14
MIN_CELLS = 16


class DomainError(ValueError):
    """Malformed domain description."""


class DegenerateDomainError(DomainError):
    pass


class SelfIntersectionError(DomainError):
    pass


class MeshResolutionError(ValueError):
    """Mesh too coarse to include the minimum number of cells."""


def _vec(values, dim=None, name="value"):
    arr = tuple(float(v) for v in values)
    if dim is not None and len(arr) != dim:
        raise DomainError(f"{name} must have {dim} components, got {len(arr)}")
    if not all(math.isfinite(v) for v in arr):
        raise DomainError(f"{name} must be finite")
    return arr


def _points(points, dim):
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[-1] != dim:
        raise ValueError(f"expected points with {dim} coordinates")
    return pts


def _exact_quadric(pts, center, inv_sq):
    """sum_i ((x_i - c_i)^2 * inv_sq_i) < 1, exactly, for each row of pts."""
    c = [Fraction(v) for v in center]
    w = [Fraction(v) for v in inv_sq]
    out = np.empty(len(pts), dtype=bool)
    for k, row in enumerate(pts):
        total = sum((Fraction(float(x)) - ci) ** 2 * wi for x, ci, wi in zip(row, c, w))
        out[k] = total < 1
    return out


class Domain:
    """Common interface; concrete shapes are frozen dataclasses."""

    dimension: int

    @property
    def measure(self) -> float:
        raise NotImplementedError

    @property
    def centroid(self) -> tuple:
        raise NotImplementedError

    def contains(self, points) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self):
        raise NotImplementedError

    def scaled(self, factor: float) -> "Domain":
        """Dilation about the centroid."""
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError


class _Quadric(Domain):
    # shared by Disc, Ball, Ellipsoid: sum ((x - c)/a)^2 < 1

    def _axes(self):
        raise NotImplementedError

    def contains(self, points):
        pts = _points(points, self.dimension)
        axes = np.array(self._axes())
        inv_sq = 1.0 / axes ** 2
        center = np.array(self.center)
        q = np.sum((pts - center) ** 2 * inv_sq, axis=1)
        inside = q < 1.0
        band = np.abs(q - 1.0) <= 64 * np.finfo(float).eps
        if band.any():
            inside[band] = _exact_quadric(pts[band], self.center, tuple(inv_sq))
        return inside

    def bounding_box(self):
        c = np.array(self.center)
        a = np.array(self._axes())
        return c - a, c + a

    @property
    def centroid(self):
        return self.center


@dataclass(frozen=True)
class Disc(_Quadric):
    radius: float
    center: tuple = (0.0, 0.0)
    dimension: int = field(default=2, init=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("disc radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "center", _vec(self.center, 2, "center"))

    def _axes(self):
        return (self.radius, self.radius)

    @property
    def measure(self):
        return math.pi * self.radius ** 2

    def scaled(self, factor):
        return Disc(self.radius * factor, self.center)

    def to_spec(self):
        return {"shape": "disc", "params": {"radius": self.radius, "center": list(self.center)}}


@dataclass(frozen=True)
class Ball(_Quadric):
    radius: float
    center: tuple = (0.0, 0.0, 0.0)
    dimension: int = field(default=3, init=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "center", _vec(self.center, 3, "center"))

    def _axes(self):
        return (self.radius,) * 3

    @property
    def measure(self):
        return 4.0 * math.pi / 3.0 * self.radius ** 3

    def scaled(self, factor):
        return Ball(self.radius * factor, self.center)

    def to_spec(self):
        return {"shape": "ball", "params": {"radius": self.radius, "center": list(self.center)}}


@dataclass(frozen=True)
class Ellipsoid(_Quadric):
    semi_axes: tuple
    center: tuple | None = None
    dimension: int = field(default=3, init=False)

    def __post_init__(self):
        axes = _vec(self.semi_axes, name="semi_axes")
        if len(axes) not in (2, 3) or not all(a > 0 for a in axes):
            raise DomainError("ellipsoid needs 2 or 3 positive semi-axes")
        object.__setattr__(self, "semi_axes", axes)
        object.__setattr__(self, "dimension", len(axes))
        center = (0.0,) * len(axes) if self.center is None else self.center
        object.__setattr__(self, "center", _vec(center, len(axes), "center"))

    def _axes(self):
        return self.semi_axes

    @property
    def measure(self):
        prod = math.prod(self.semi_axes)
        return math.pi * prod if self.dimension == 2 else 4.0 * math.pi / 3.0 * prod

    def scaled(self, factor):
        return Ellipsoid(tuple(a * factor for a in self.semi_axes), self.center)

    def to_spec(self):
        return {"shape": "ellipsoid",
                "params": {"semi_axes": list(self.semi_axes), "center": list(self.center)}}


@dataclass(frozen=True)
class Box(Domain):
    extents: tuple
    center: tuple | None = None
    dimension: int = field(default=3, init=False)

    def __post_init__(self):
        ext = _vec(self.extents, name="extents")
        if len(ext) not in (2, 3) or not all(e > 0 for e in ext):
            raise DomainError("box needs 2 or 3 positive extents")
        object.__setattr__(self, "extents", ext)
        object.__setattr__(self, "dimension", len(ext))
        center = (0.0,) * len(ext) if self.center is None else self.center
        object.__setattr__(self, "center", _vec(center, len(ext), "center"))

    @property
    def measure(self):
        return math.prod(self.extents)

    @property
    def centroid(self):
        return self.center

    def contains(self, points):
        pts = _points(points, self.dimension)
        lo, hi = self.bounding_box()
        return np.all((pts > lo) & (pts < hi), axis=1)

    def bounding_box(self):
        c = np.array(self.center)
        half = np.array(self.extents) / 2.0
        return c - half, c + half

    def scaled(self, factor):
        return Box(tuple(e * factor for e in self.extents), self.center)

    def to_spec(self):
        return {"shape": "box", "params": {"extents": list(self.extents), "center": list(self.center)}}


def _orient(ax, ay, bx, by, px, py):
    return (bx - ax) * (py - ay) - (px - ax) * (by - ay)


def _segments_intersect(p1, p2, q1, q2):
    """Closed-segment intersection test in exact arithmetic."""
    p1, p2, q1, q2 = ([Fraction(c) for c in v] for v in (p1, p2, q1, q2))

    def orient(a, b, c):
        return _orient(a[0], a[1], b[0], b[1], c[0], c[1])

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0:
        return True
    return ((d1 == 0 and on_seg(q1, q2, p1)) or (d2 == 0 and on_seg(q1, q2, p2))
            or (d3 == 0 and on_seg(p1, p2, q1)) or (d4 == 0 and on_seg(p1, p2, q2)))


@dataclass(frozen=True)
class Polygon(Domain):
    """Simple polygon; vertices are stored counter-clockwise."""

    vertices: tuple
    dimension: int = field(default=2, init=False)

    def __post_init__(self):
        verts = tuple(_vec(v, 2, "vertex") for v in self.vertices)
        if len(verts) >= 2 and verts[0] == verts[-1]:
            verts = verts[:-1]  # tolerate an explicitly closed ring
        if len(verts) < 3:
            raise DomainError("polygon needs at least 3 vertices")
        if len(verts) > 3:
            self._check_simple(verts)
        area2 = self._signed_area2(verts)
        if area2 == 0:
            raise DegenerateDomainError("polygon has zero area")
        if area2 < 0:
            verts = verts[::-1]
        object.__setattr__(self, "vertices", verts)

    @staticmethod
    def _signed_area2(verts):
        total = Fraction(0)
        n = len(verts)
        for i in range(n):
            x0, y0 = (Fraction(c) for c in verts[i])
            x1, y1 = (Fraction(c) for c in verts[(i + 1) % n])
            total += x0 * y1 - x1 * y0
        return total

    @staticmethod
    def _check_simple(verts):
        n = len(verts)
        edges = [(verts[i], verts[(i + 1) % n]) for i in range(n)]
        for a, b in edges:
            if a == b:
                raise DegenerateDomainError("polygon has a zero-length edge")
        for i in range(n):
            for j in range(i + 1, n):
                adjacent = j == i + 1 or (i == 0 and j == n - 1)
                if adjacent:
                    # adjacent edges may only share their common vertex
                    a, b = edges[i]
                    c, d = edges[j]
                    shared = b if j == i + 1 else a
                    other_i = a if j == i + 1 else b
                    other_j = d if j == i + 1 else c
                    o = _orient(*(Fraction(v) for v in (*shared, *other_i, *other_j)))
                    if o == 0:
                        # collinear neighbours must point away from each other
                        u = [Fraction(other_i[k]) - Fraction(shared[k]) for k in range(2)]
                        w = [Fraction(other_j[k]) - Fraction(shared[k]) for k in range(2)]
                        if u[0] * w[0] + u[1] * w[1] > 0 and n > 3:
                            raise SelfIntersectionError("polygon folds back on itself")
                    continue
                if _segments_intersect(*edges[i], *edges[j]):
                    raise SelfIntersectionError(f"polygon edges {i} and {j} intersect")

    @property
    def measure(self):
        return float(self._signed_area2(self.vertices)) / 2.0

    @property
    def centroid(self):
        v = np.array(self.vertices)
        x, y = v[:, 0], v[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        a = cross.sum() / 2.0
        return (float(np.sum((x + xn) * cross) / (6 * a)), float(np.sum((y + yn) * cross) / (6 * a)))

    def bounding_box(self):
        v = np.array(self.vertices)
        return v.min(axis=0), v.max(axis=0)

    def contains(self, points):
        pts = _points(points, 2)
        px, py = pts[:, 0], pts[:, 1]
        v = np.array(self.vertices)
        winding = np.zeros(len(pts), dtype=np.int64)
        near = np.zeros(len(pts), dtype=bool)
        lo, hi = self.bounding_box()
        scale = float(np.max(hi - lo)) or 1.0
        for i in range(len(v)):
            (x0, y0), (x1, y1) = v[i], v[(i + 1) % len(v)]
            cross = _orient(x0, y0, x1, y1, px, py)
            up = (y0 <= py) & (y1 > py) & (cross > 0)
            down = (y1 <= py) & (y0 > py) & (cross < 0)
            winding += up.astype(np.int64) - down.astype(np.int64)
            in_box = ((px >= min(x0, x1) - _BAND * scale) & (px <= max(x0, x1) + _BAND * scale)
                      & (py >= min(y0, y1) - _BAND * scale) & (py <= max(y0, y1) + _BAND * scale))
            near |= in_box & (np.abs(cross) <= _BAND * scale * scale)
        inside = winding != 0
        if near.any():
            idx = np.nonzero(near)[0]
            inside[idx] = [self._contains_exact(pts[k]) for k in idx]
        return inside

    def _contains_exact(self, point):
        px, py = Fraction(float(point[0])), Fraction(float(point[1]))
        verts = [(Fraction(a), Fraction(b)) for a, b in self.vertices]
        winding = 0
        for i in range(len(verts)):
            (x0, y0), (x1, y1) = verts[i], verts[(i + 1) % len(verts)]
            cross = _orient(x0, y0, x1, y1, px, py)
            if (cross == 0 and min(x0, x1) <= px <= max(x0, x1)
                    and min(y0, y1) <= py <= max(y0, y1)):
                return False  # on the boundary: not in the open set
            if y0 <= py < y1 and cross > 0:
                winding += 1
            elif y1 <= py < y0 and cross < 0:
                winding -= 1
        return winding != 0

    def scaled(self, factor):
        cx, cy = self.centroid
        return type(self)(tuple((cx + factor * (x - cx), cy + factor * (y - cy))
                                for x, y in self.vertices))

    def to_spec(self):
        return {"shape": "polygon", "params": {"vertices": [list(v) for v in self.vertices]}}


@dataclass(frozen=True)
class Triangle(Polygon):
    def __post_init__(self):
        if len(self.vertices) != 3:
            raise DomainError("triangle needs exactly 3 vertices")
        super().__post_init__()

    def to_spec(self):
        return {"shape": "triangle", "params": {"vertices": [list(v) for v in self.vertices]}}


_SHAPES = {
    "disc": lambda p: Disc(p["radius"], p.get("center", (0.0, 0.0))),
    "ball": lambda p: Ball(p["radius"], p.get("center", (0.0, 0.0, 0.0))),
    "box": lambda p: Box(p["extents"], p.get("center")),
    "ellipsoid": lambda p: Ellipsoid(p["semi_axes"], p.get("center")),
    "polygon": lambda p: Polygon(p["vertices"]),
    "triangle": lambda p: Triangle(p["vertices"]),
}


def make_domain(spec):
    """Build a domain from ``{"shape": ..., "params": {...}, "normalize_measure_to": x}``.

    Also accepts an existing :class:`Domain`, returned unchanged.
    """
    if isinstance(spec, Domain):
        return spec
    if not isinstance(spec, dict):
        raise DomainError("domain spec must be a mapping")
    shape = spec.get("shape")
    if shape not in _SHAPES:
        raise DomainError(f"unknown shape {shape!r}; expected one of {sorted(_SHAPES)}")
    params = spec.get("params")
    if not isinstance(params, dict):
        raise DomainError("domain spec needs a 'params' mapping")
    try:
        domain = _SHAPES[shape](params)
    except KeyError as exc:
        raise DomainError(f"{shape} spec is missing parameter {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad {shape} parameters: {exc}") from None
    target = spec.get("normalize_measure_to")
    if target is not None:
        domain = normalize_measure(domain, float(target))
    return domain


domain_from_spec = make_domain


def normalize_measure(domain, target):
    """Dilate ``domain`` about its centroid so its measure equals ``target``."""
    if not target > 0:
        raise DomainError("target measure must be positive")
    if domain.measure == target:
        return domain
    return domain.scaled((target / domain.measure) ** (1.0 / domain.dimension))


def regular_polygon(sides, area=math.pi, rotation=0.0):
    """Regular n-gon centred at the origin with the given area."""
    if sides < 3:
        raise DomainError("need at least 3 sides")
    # area = (n/2) R^2 sin(2 pi / n)
    radius = math.sqrt(2.0 * area / (sides * math.sin(2.0 * math.pi / sides)))
    angles = rotation + math.pi / 2 + 2.0 * math.pi * np.arange(sides) / sides
    verts = tuple((radius * math.cos(t), radius * math.sin(t)) for t in angles)
    cls = Triangle if sides == 3 else Polygon
    return cls(verts)


def equilateral_triangle(area):
    """Equilateral triangle with centroid at the origin and one vertex up."""
    if not area > 0:
        raise DomainError("area must be positive")
    return regular_polygon(3, area)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Cells of a uniform grid whose centroids fall inside the domain.

    With ``scale != 1`` the included cells were dilated about the domain
    centroid so that ``included_cell_count * cell_measure == domain.measure``.
    """

    domain: Domain
    h: float
    centroids: np.ndarray
    base_h: float
    scale: float = 1.0

    @property
    def dimension(self):
        return self.centroids.shape[1]

    @property
    def cell_measure(self):
        return self.h ** self.dimension

    @property
    def included_cell_count(self):
        return self.centroids.shape[0]

    @property
    def total_measure(self):
        return self.included_cell_count * self.cell_measure

    @classmethod
    def from_points(cls, domain, h, centroids):
        """Mesh from explicit cell centroids (no inclusion test, no minimum)."""
        pts = np.array(centroids, dtype=np.float64, copy=True)
        pts.setflags(write=False)
        return cls(domain=domain, h=float(h), centroids=pts, base_h=float(h))


def make_mesh(domain, h, match_measure=False, min_cells=MIN_CELLS):
    """Uniform grid over the bounding box, centred on it; keep inside centroids."""
    h = float(h)
    if not h > 0:
        raise MeshResolutionError("cell size must be positive")
    lo, hi = domain.bounding_box()
    center = (lo + hi) / 2.0
    counts = np.ceil((hi - lo) / h - 1e-9).astype(int)
    if np.prod(counts.astype(float)) > 5e7:
        raise MeshResolutionError(f"h = {h} gives an impractically large grid")
    axes = [center[k] + (np.arange(counts[k]) + 0.5 - counts[k] / 2.0) * h
            for k in range(domain.dimension)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.dimension)
    pts = grid[domain.contains(grid)]
    if pts.shape[0] < min_cells:
        raise MeshResolutionError(
            f"h = {h} keeps {pts.shape[0]} cells; need at least {min_cells}")
    scale = 1.0
    cell = h
    if match_measure:
        scale = (domain.measure / (pts.shape[0] * h ** domain.dimension)) ** (1.0 / domain.dimension)
        c0 = np.array(domain.centroid)
        pts = c0 + scale * (pts - c0)
        cell = scale * h
    pts = np.ascontiguousarray(pts)
    pts.setflags(write=False)
    return Mesh(domain=domain, h=cell, centroids=pts, base_h=h, scale=scale)
