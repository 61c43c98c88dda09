"""Cheeger constants and Cheeger sets of bounded convex polygons.

For a bounded convex domain there is a unique ``r* > 0`` at which the inner
parallel set (all points deeper than ``r*`` from the boundary) has area
exactly ``pi * r*^2``.  The Cheeger constant is then ``1/r*`` and the Cheeger
set is the Minkowski sum of that inner set with the disc of radius ``r*``,
which for a polygon means the surviving edges pushed back outward joined by
corner arcs of radius ``r*``.

``solve_convex`` finds the root by bisection: the gap ``|O^r| - pi r^2`` is
strictly decreasing in ``r``, positive at 0 and negative at the inradius.
Half-plane clipping is redone from scratch at every radius; each clip keeps
track of which original edge generated each surviving piece so the final
rounded set can be assembled exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import DomainError, SolverError, ValidationError
from .geometry import ArcEdge, ArcPolygon, SegmentEdge, rot90
from .results import CheegerResult

TWO_PI = 2.0 * math.pi

__all__ = [
    "ConvexPolygon",
    "inner_parallel",
    "solve_convex",
    "rectangle_h",
    "rectangle_k",
    "rounded_rectangle",
    "chebyshev_radius",
]


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon given by counterclockwise vertices (n >= 3)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValidationError("need an (n, 2) vertex array with n >= 3")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        scale = float(np.abs(e).max()) ** 2
        if np.any(cross < -1e-12 * scale):
            raise ValidationError("vertices are not in convex counterclockwise order")
        if self.area <= 0.0:
            raise ValidationError("polygon has no area")

    @property
    def area(self) -> float:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0]))

    @property
    def perimeter(self) -> float:
        v = self.vertices
        return float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())

    @property
    def diameter(self) -> float:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def edge_normals(self) -> np.ndarray:
        """Outward unit normals, one per edge (edge i runs v[i] -> v[i+1])."""
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        n = -rot90(e)
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def edge_offsets(self) -> np.ndarray:
        """Support values c with edge i on the line n_i . x = c_i."""
        return np.einsum("ij,ij->i", self.edge_normals(), self.vertices)

    def scaled(self, factor: float) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices * factor)

    def to_dict(self) -> dict:
        return {"vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ConvexPolygon":
        return cls(np.asarray(data["vertices"], dtype=float))

    @classmethod
    def rectangle(cls, a: float, b: float) -> "ConvexPolygon":
        """Axis-aligned rectangle (-b, b) x (-a, a)."""
        return cls(np.array([[-b, -a], [b, -a], [b, a], [-b, a]]))

    @classmethod
    def regular(cls, n: int, radius: float = 1.0, center=(0.0, 0.0)) -> "ConvexPolygon":
        th = np.linspace(0.0, TWO_PI, n, endpoint=False)
        c = np.asarray(center, dtype=float)
        return cls(c + radius * np.stack([np.cos(th), np.sin(th)], axis=-1))


def chebyshev_radius(poly: ConvexPolygon) -> float:
    """Inradius (radius of the largest inscribed disc) via a tiny LP."""
    n = poly.edge_normals()
    c = poly.edge_offsets()
    # maximize r subject to n_i . x + r <= c_i
    res = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=np.column_stack([n, np.ones(len(c))]),
        b_ub=c,
        bounds=[(None, None), (None, None), (0.0, None)],
        method="highs",
    )
    if not res.success:
        raise SolverError(f"inradius LP failed: {res.message}")
    return float(res.x[2])


def _clip_labeled(verts, labels, n, c, new_label):
    """Clip polygon ``verts`` against half-plane n.x <= c, tracking edge labels.

    ``labels[i]`` names the edge running from vertex i to vertex i+1.  Pieces
    of surviving input edges keep their label; chords created along the clip
    line get ``new_label``.  Returns (verts, labels) or None when empty.
    """
    d = verts @ n - c
    inside = d <= 0.0
    if inside.all():
        return verts, labels
    if not inside.any():
        return None
    nxt_inside = np.roll(inside, -1)
    nxt_verts = np.roll(verts, -1, axis=0)
    nxt_d = np.roll(d, -1)
    nxt_labels = np.roll(labels, -1)
    crossing = inside != nxt_inside
    den = d - nxt_d
    t = np.where(np.abs(den) > 0.0, d / np.where(den == 0.0, 1.0, den), 0.0)
    cross_pts = verts + t[:, None] * (nxt_verts - verts)

    m = verts.shape[0]
    pts = np.empty((2 * m, 2))
    labs = np.empty(2 * m, dtype=labels.dtype)
    keep = np.zeros(2 * m, dtype=bool)
    # slot 2i: crossing point on edge i, slot 2i+1: vertex i+1
    pts[0::2] = cross_pts
    pts[1::2] = nxt_verts
    labs[0::2] = np.where(inside, new_label, labels)  # exit -> chord, entry -> edge rest
    labs[1::2] = nxt_labels
    keep[0::2] = crossing
    keep[1::2] = nxt_inside
    out_v = pts[keep]
    if out_v.shape[0] < 3:
        return None
    return out_v, labs[keep]


def _dedupe(verts, labels, tol):
    gap = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
    keep = gap > tol
    if keep.sum() < 3:
        return None
    return verts[keep], labels[keep]


def _inner_parallel_labeled(poly: ConvexPolygon, r: float):
    """Inner parallel set with per-edge provenance labels, or None if empty."""
    normals = poly.edge_normals()
    offsets = poly.edge_offsets() - r
    verts = np.asarray(poly.vertices, dtype=float)
    labels = np.arange(verts.shape[0])
    for i in range(normals.shape[0]):
        res = _clip_labeled(verts, labels, normals[i], offsets[i], i)
        if res is None:
            return None
        verts, labels = res
    res = _dedupe(verts, labels, 1e-12 * poly.diameter)
    if res is None:
        return None
    verts, labels = res
    if _shoelace(verts) <= 0.0:
        return None
    return verts, labels


def _shoelace(v: np.ndarray) -> float:
    w = np.roll(v, -1, axis=0)
    return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0]))


def inner_parallel(poly: ConvexPolygon, r: float):
    """Points of the polygon deeper than ``r`` from its boundary.

    Returns a :class:`ConvexPolygon`, or ``None`` once the inset has no
    interior.  ``r = 0`` returns the polygon itself.
    """
    if r < 0.0:
        raise DomainError("inset distance must be nonnegative")
    if r == 0.0:
        return poly
    res = _inner_parallel_labeled(poly, r)
    if res is None:
        return None
    return ConvexPolygon(res[0])


def _build_cheeger_set(verts, labels, normals, r) -> ArcPolygon:
    """Push surviving inset edges back out by r and join them with arcs."""
    m = verts.shape[0]
    edges = []
    for i in range(m):
        j = (i + 1) % m
        ni = normals[labels[i]]
        # corner arc at verts[i] between the previous edge's normal and ours
        nprev = normals[labels[(i - 1) % m]]
        a0 = math.atan2(nprev[1], nprev[0])
        a1 = math.atan2(ni[1], ni[0])
        span = (a1 - a0) % TWO_PI
        if 1e-12 < span < TWO_PI - 1e-12:
            edges.append(ArcEdge(verts[i], r, a0, span, tag="free"))
        edges.append(SegmentEdge(verts[i] + r * ni, verts[j] + r * ni))
    return ArcPolygon(edges=tuple(edges))


def solve_convex(poly: ConvexPolygon, tol: float | None = None) -> CheegerResult:
    """Cheeger constant and Cheeger set of a bounded convex polygon.

    Bisects on ``g(r) = |O^r| - pi r^2`` down to ``|dr| <= tol``
    (default ``1e-12 * diameter``), then assembles the rounded optimal set.
    """
    if tol is None:
        tol = 1e-12 * poly.diameter
    if tol <= 0.0:
        raise DomainError("tolerance must be positive")

    inr = chebyshev_radius(poly)
    lo, hi = 0.0, inr
    # g(lo) = |poly| > 0; g at the inradius is -pi*inr^2 <= 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        res = _inner_parallel_labeled(poly, mid)
        g = (-math.pi * mid**2) if res is None else _shoelace(res[0]) - math.pi * mid**2
        if g > 0.0:
            lo = mid
        else:
            hi = mid
    r_star = 0.5 * (lo + hi)
    res = _inner_parallel_labeled(poly, r_star)
    if res is None:
        res = _inner_parallel_labeled(poly, lo)
    if res is None:
        raise SolverError("inner parallel set vanished at the computed root")
    verts, labels = res
    cheeger_set = _build_cheeger_set(verts, labels, poly.edge_normals(), r_star)
    h = 1.0 / r_star
    return CheegerResult(
        h=h,
        r_star=r_star,
        lower_bound=h * (1.0 - tol / r_star),
        upper_bound=h * (1.0 + tol / r_star),
        cheeger_set=cheeger_set,
        method="convex-bisection",
        tolerance=hi - lo,
    )


# ---------------------------------------------------------------------------
# rectangles in closed form
# ---------------------------------------------------------------------------


def rectangle_k(a: float, b: float) -> float:
    """Dimensionless excess k for the rectangle (-b, b) x (-a, a)."""
    if a <= 0.0 or b <= 0.0:
        raise DomainError("rectangle half-sides must be positive")
    return (a - b + math.sqrt((a - b) ** 2 + math.pi * a * b)) / a


def rounded_rectangle(a: float, b: float, r: float) -> ArcPolygon:
    """Rectangle (-b, b) x (-a, a) with its corners rounded at radius r."""
    if not 0.0 < r <= min(a, b):
        raise DomainError("corner radius must lie in (0, min(a, b)]")
    pi_2 = math.pi / 2.0
    edges = [
        SegmentEdge((r - b, -a), (b - r, -a)),
        ArcEdge((b - r, r - a), r, -pi_2, pi_2, tag="free"),
        SegmentEdge((b, r - a), (b, a - r)),
        ArcEdge((b - r, a - r), r, 0.0, pi_2, tag="free"),
        SegmentEdge((b - r, a), (r - b, a)),
        ArcEdge((r - b, a - r), r, pi_2, pi_2, tag="free"),
        SegmentEdge((-b, a - r), (-b, r - a)),
        ArcEdge((r - b, r - a), r, math.pi, pi_2, tag="free"),
    ]
    return ArcPolygon(edges=tuple(edges))


def rectangle_h(a: float, b: float) -> CheegerResult:
    """Closed-form Cheeger data for the rectangle (-b, b) x (-a, a).

    The constant is ``(a + b + sqrt((a - b)^2 + pi a b)) / (2 a b)`` and the
    Cheeger set is the rectangle with corner arcs of radius ``1/h``.
    """
    if a <= 0.0 or b <= 0.0:
        raise DomainError("rectangle half-sides must be positive")
    root = math.sqrt((a - b) ** 2 + math.pi * a * b)
    h = (a + b + root) / (2.0 * a * b)
    k = rectangle_k(a, b)
    r_star = 1.0 / h
    return CheegerResult(
        h=h,
        r_star=r_star,
        lower_bound=1.0 / a + 1.0 / (400.0 * 2.0 * b),
        upper_bound=1.0 / a + 2.0 / (2.0 * b),
        cheeger_set=rounded_rectangle(a, b, r_star),
        k=k,
        method="rectangle-closed-form",
        tolerance=0.0,
    )
