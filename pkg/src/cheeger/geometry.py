"""Planar curves, tubular strips, and exact arc-polygon boundaries.

Conventions used throughout the package:

* curves are parametrized by arclength ``q``, so tangents are unit vectors;
* the unit normal is the tangent rotated by +pi/2, and the signed curvature
  is ``kappa = gamma'' . N`` under that fixed choice.  A counterclockwise
  circle of radius ``R`` therefore has ``kappa = +1/R`` and its normal points
  toward the centre;
* the tube map ``L(q, t) = gamma(q) + t * N(q)`` realizes the strip of
  half-width ``a`` about a curve as the image of ``|t| <= a``.  Along a
  counterclockwise circle, positive ``t`` moves inward.

Angles are radians, lengths are abstract planar units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, ValidationError

TWO_PI = 2.0 * math.pi

__all__ = [
    "Curve",
    "SegmentCurve",
    "ArcCurve",
    "CircleCurve",
    "PolylineCurve",
    "curve_from_dict",
    "Strip",
    "tube_map",
    "curvature",
    "check_admissible",
    "AdmissibilityReport",
    "SegmentEdge",
    "ArcEdge",
    "ArcPolygon",
    "arcpolygon_metrics",
    "polygonize",
    "polygonize_loops",
    "rot90",
]


def rot90(v: np.ndarray) -> np.ndarray:
    """Rotate vectors by +pi/2 (counterclockwise).  Works on (..., 2) arrays."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def _unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


def _as_point(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(2)
    p.flags.writeable = False
    return p


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------


class Curve:
    """Abstract arclength-parametrized planar curve.

    Subclasses provide ``point``, ``tangent`` and ``curvature`` as vectorized
    functions of the arclength parameter, plus ``length``, ``closed`` and a
    ``kind`` tag used by the JSON serialization.
    """

    kind: str = "abstract"
    closed: bool = False
    length: float = 0.0

    def point(self, q):
        raise NotImplementedError

    def tangent(self, q):
        raise NotImplementedError

    def normal(self, q):
        """Unit normal, tangent rotated by +pi/2."""
        return rot90(self.tangent(q))

    def curvature(self, q):
        """Signed curvature at arclength ``q`` (domain checked)."""
        self._check_domain(q)
        return self._curvature_raw(q)

    def _curvature_raw(self, q):
        raise NotImplementedError

    def _check_domain(self, q) -> None:
        if self.closed:
            return
        q = np.asarray(q, dtype=float)
        tol = 1e-9 * max(self.length, 1.0)
        if np.any(q < -tol) or np.any(q > self.length + tol):
            raise DomainError(
                f"arclength outside [0, {self.length!r}] for kind {self.kind!r}"
            )

    def _wrap(self, q):
        q = np.asarray(q, dtype=float)
        if self.closed:
            return np.mod(q, self.length)
        return q

    def to_dict(self) -> dict:
        raise NotImplementedError


class SegmentCurve(Curve):
    """Straight segment from ``p0`` to ``p1``."""

    kind = "segment"
    closed = False

    def __init__(self, p0, p1):
        self.p0 = _as_point(p0)
        self.p1 = _as_point(p1)
        d = self.p1 - self.p0
        self.length = float(np.linalg.norm(d))
        if self.length <= 0.0:
            raise ValidationError("segment endpoints coincide")
        self._dir = d / self.length

    def point(self, q):
        self._check_domain(q)
        q = np.asarray(q, dtype=float)
        return self.p0 + q[..., None] * self._dir

    def tangent(self, q):
        q = np.asarray(q, dtype=float)
        return np.broadcast_to(self._dir, q.shape + (2,)).copy()

    def _curvature_raw(self, q):
        q = np.asarray(q, dtype=float)
        return np.zeros(q.shape)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "p0": self.p0.tolist(), "p1": self.p1.tolist()}


class ArcCurve(Curve):
    """Open circular arc: ``center``, ``radius``, start angle and signed span.

    Positive span runs counterclockwise.  ``|span|`` must stay below 2*pi;
    use :class:`CircleCurve` for a full circle.
    """

    kind = "circular-arc"
    closed = False

    def __init__(self, center, radius: float, angle0: float, span: float):
        if radius <= 0.0:
            raise ValidationError("arc radius must be positive")
        if not 0.0 < abs(span) < TWO_PI:
            raise ValidationError("arc span must lie in (0, 2*pi); use CircleCurve")
        self.center = _as_point(center)
        self.radius = float(radius)
        self.angle0 = float(angle0)
        self.span = float(span)
        self.length = self.radius * abs(self.span)
        self._sgn = 1.0 if span > 0 else -1.0

    def _theta(self, q):
        q = np.asarray(q, dtype=float)
        return self.angle0 + self._sgn * q / self.radius

    def point(self, q):
        self._check_domain(q)
        th = self._theta(q)
        return self.center + self.radius * np.stack(
            [np.cos(th), np.sin(th)], axis=-1
        )

    def tangent(self, q):
        th = self._theta(q)
        return self._sgn * np.stack([-np.sin(th), np.cos(th)], axis=-1)

    def _curvature_raw(self, q):
        q = np.asarray(q, dtype=float)
        return np.full(q.shape, self._sgn / self.radius)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "center": self.center.tolist(),
            "radius": self.radius,
            "angle0": self.angle0,
            "span": self.span,
        }


class CircleCurve(Curve):
    """Full circle; counterclockwise unless ``ccw=False``."""

    kind = "full-circle"
    closed = True

    def __init__(self, center, radius: float, ccw: bool = True, angle0: float = 0.0):
        if radius <= 0.0:
            raise ValidationError("circle radius must be positive")
        self.center = _as_point(center)
        self.radius = float(radius)
        self.ccw = bool(ccw)
        self.angle0 = float(angle0)
        self.length = TWO_PI * self.radius
        self._sgn = 1.0 if self.ccw else -1.0

    def _theta(self, q):
        q = self._wrap(q)
        return self.angle0 + self._sgn * q / self.radius

    def point(self, q):
        th = self._theta(q)
        return self.center + self.radius * np.stack(
            [np.cos(th), np.sin(th)], axis=-1
        )

    def tangent(self, q):
        th = self._theta(q)
        return self._sgn * np.stack([-np.sin(th), np.cos(th)], axis=-1)

    def _curvature_raw(self, q):
        q = np.asarray(q, dtype=float)
        return np.full(q.shape, self._sgn / self.radius)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "center": self.center.tolist(),
            "radius": self.radius,
            "ccw": self.ccw,
            "angle0": self.angle0,
        }


class PolylineCurve(Curve):
    """Curve given by ordered samples, parametrized by cumulative chord length.

    The samples are assumed to discretize a C^2 curve finely enough that the
    tangent turns by at most 0.1 rad between consecutive samples.  Tangents
    and signed curvature at the samples come from three-point central
    differences on the nonuniform arclength grid; in between, positions are
    interpolated linearly and tangent angles/curvatures are interpolated
    linearly in arclength.  Endpoint curvature is not extrapolated: queries
    must stay at least one sample away from an open end.
    """

    kind = "sampled-polyline"

    MAX_TURN = 0.1  # rad between consecutive samples

    def __init__(self, points, closed: bool = False):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
            raise ValidationError("polyline needs an (n, 2) array with n >= 4")
        if closed and np.linalg.norm(pts[0] - pts[-1]) <= 1e-12 * _bbox_diag(pts):
            pts = pts[:-1]
        self.closed = bool(closed)

        chords = np.diff(pts, axis=0)
        if self.closed:
            chords = np.vstack([chords, pts[0] - pts[-1]])
        lens = np.linalg.norm(chords, axis=1)
        if np.any(lens <= 0.0):
            raise ValidationError("polyline has coincident consecutive samples")
        ang = np.arctan2(chords[:, 1], chords[:, 0])
        dang = np.diff(ang)
        if self.closed:
            dang = np.append(dang, ang[0] - ang[-1])
        dang = (dang + math.pi) % TWO_PI - math.pi
        max_turn = float(np.max(np.abs(dang))) if dang.size else 0.0
        if max_turn > self.MAX_TURN + 1e-12:
            raise ValidationError(
                f"tangent turns by {max_turn:.3f} rad between samples; "
                f"resample below {self.MAX_TURN} rad"
            )

        s = np.concatenate([[0.0], np.cumsum(lens)])
        self.length = float(s[-1])
        if self.closed:
            # duplicate the first sample at arclength L so every lookup is
            # an ordinary interpolation on [0, L]
            self._pts = np.vstack([pts, pts[:1]])
        else:
            self._pts = pts
        self._s = s
        self._n_raw = pts.shape[0]

        kap, phi = self._samples_kappa_phi(pts, s)
        self._kappa = kap
        self._phi = phi

    def _samples_kappa_phi(self, pts, s):
        n = pts.shape[0]
        m = self._pts.shape[0]
        kap = np.zeros(m)
        tan = np.zeros((m, 2))
        if self.closed:
            prev = np.roll(pts, 1, axis=0)
            nxt = np.roll(pts, -1, axis=0)
            h1 = np.linalg.norm(pts - prev, axis=1)
            h2 = np.linalg.norm(nxt - pts, axis=1)
            d0 = (pts - prev) / h1[:, None]
            d1 = (nxt - pts) / h2[:, None]
            body = slice(0, n)
        else:
            mid, prev, nxt = pts[1:-1], pts[:-2], pts[2:]
            h1 = np.linalg.norm(mid - prev, axis=1)
            h2 = np.linalg.norm(nxt - mid, axis=1)
            d0 = (mid - prev) / h1[:, None]
            d1 = (nxt - mid) / h2[:, None]
            body = slice(1, n - 1)
        t = (h2[:, None] * d0 + h1[:, None] * d1) / (h1 + h2)[:, None]
        dd = 2.0 * (d1 - d0) / (h1 + h2)[:, None]
        speed = np.linalg.norm(t, axis=1)
        kap[body] = (t[:, 0] * dd[:, 1] - t[:, 1] * dd[:, 0]) / speed**3
        tan[body] = t / speed[:, None]
        if self.closed:
            kap[-1] = kap[0]
            tan[-1] = tan[0]
        else:
            # ends use one-sided chord directions; curvature copied inward
            tan[0] = d0[0]
            tan[-1] = d1[-1]
            kap[0] = kap[1]
            kap[-1] = kap[-2]
        raw = np.arctan2(tan[:, 1], tan[:, 0])
        phi = np.unwrap(raw)
        return kap, phi

    def point(self, q):
        self._check_domain(q)
        q = self._wrap(q)
        i, w = self._locate(q)
        return self._pts[i] + w[..., None] * (self._pts[i + 1] - self._pts[i])

    def tangent(self, q):
        q = self._wrap(np.clip(np.asarray(q, dtype=float), 0.0, self.length))
        i, w = self._locate(q)
        phi = self._phi[i] + w * (self._phi[i + 1] - self._phi[i])
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1)

    def curvature(self, q):
        self._check_domain(q)
        if not self.closed:
            q = np.asarray(q, dtype=float)
            if np.any(q < self._s[1] - 1e-12) or np.any(q > self._s[-2] + 1e-12):
                raise DomainError(
                    "polyline curvature queries must stay one sample away "
                    "from the endpoints"
                )
        return self._curvature_raw(q)

    def _curvature_raw(self, q):
        q = self._wrap(np.clip(np.asarray(q, dtype=float), 0.0, self.length))
        i, w = self._locate(q)
        return self._kappa[i] + w * (self._kappa[i + 1] - self._kappa[i])

    def _locate(self, q):
        q = np.asarray(q, dtype=float)
        i = np.searchsorted(self._s, q, side="right") - 1
        i = np.clip(i, 0, self._s.size - 2)
        w = (q - self._s[i]) / (self._s[i + 1] - self._s[i])
        return i, w

    @property
    def samples(self) -> np.ndarray:
        return self._pts[: self._n_raw]

    @property
    def sample_arclengths(self) -> np.ndarray:
        return self._s[: self._n_raw]

    def reversed(self) -> "PolylineCurve":
        return PolylineCurve(self.samples[::-1], closed=self.closed)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "points": self.samples.tolist(),
            "closed": self.closed,
        }


def _bbox_diag(pts: np.ndarray) -> float:
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    return float(np.linalg.norm(hi - lo)) or 1.0


_CURVE_KINDS = {
    "segment": lambda d: SegmentCurve(d["p0"], d["p1"]),
    "circular-arc": lambda d: ArcCurve(d["center"], d["radius"], d["angle0"], d["span"]),
    "full-circle": lambda d: CircleCurve(
        d["center"], d["radius"], d.get("ccw", True), d.get("angle0", 0.0)
    ),
    "sampled-polyline": lambda d: PolylineCurve(d["points"], d.get("closed", False)),
}


def curve_from_dict(data: dict) -> Curve:
    """Rebuild a curve from its JSON dictionary form."""
    try:
        kind = data["kind"]
        builder = _CURVE_KINDS[kind]
    except KeyError as exc:
        raise ValidationError(f"unknown or missing curve kind: {exc}") from exc
    return builder(data)


def curvature(curve: Curve, q):
    """Signed curvature of ``curve`` at arclength ``q``."""
    return curve.curvature(q)


# ---------------------------------------------------------------------------
# strips
# ---------------------------------------------------------------------------

STRIP_KINDS = ("annulus", "finite", "semi-infinite", "infinite")


@dataclass(frozen=True)
class Strip:
    """Tubular neighbourhood of half-width ``halfwidth`` about a curve.

    ``kind`` defaults to "annulus" for closed curves and "finite" otherwise.
    Declaring "semi-infinite" or "infinite" means the stored curve is a
    finite window of an unbounded curve; metric evaluations then apply to
    that window, whose length is exposed as ``truncation_length`` (the
    window of an infinite strip extends ``truncation_length`` to each side).
    """

    curve: Curve
    halfwidth: float
    kind: str = ""

    def __post_init__(self):
        if self.halfwidth <= 0.0:
            raise ValidationError("strip half-width must be positive")
        kind = self.kind
        if not kind:
            kind = "annulus" if self.curve.closed else "finite"
            object.__setattr__(self, "kind", kind)
        if kind not in STRIP_KINDS:
            raise ValidationError(f"unknown strip kind {kind!r}")
        if kind == "annulus" and not self.curve.closed:
            raise ValidationError("annulus strips need a closed curve")
        if kind != "annulus" and self.curve.closed:
            raise ValidationError(f"closed curves only build annuli, got {kind!r}")
        qs = _sample_parameters(self.curve, 129)
        kmax = float(np.max(np.abs(self.curve._curvature_raw(qs))))
        if kmax * self.halfwidth > 1.0 + 1e-9:
            raise ValidationError(
                f"max |curvature| * halfwidth = {kmax * self.halfwidth:.6g} > 1"
            )

    @property
    def a(self) -> float:
        return self.halfwidth

    @property
    def truncation_length(self) -> Optional[float]:
        if self.kind == "semi-infinite":
            return self.curve.length
        if self.kind == "infinite":
            return self.curve.length / 2.0
        return None

    def map(self, q, t):
        return tube_map(self, q, t)

    def to_dict(self) -> dict:
        out = {
            "curve": self.curve.to_dict(),
            "halfwidth": self.halfwidth,
            "kind": self.kind,
        }
        if self.truncation_length is not None:
            out["truncation_length"] = self.truncation_length
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Strip":
        return cls(
            curve=curve_from_dict(data["curve"]),
            halfwidth=float(data["halfwidth"]),
            kind=data.get("kind", ""),
        )


def _sample_parameters(curve: Curve, n: int) -> np.ndarray:
    if curve.closed:
        return np.linspace(0.0, curve.length, n, endpoint=False)
    return np.linspace(0.0, curve.length, n)


def tube_map(strip: Strip, q, t):
    """Map strip coordinates ``(q, t)`` to the plane: ``gamma(q) + t N(q)``."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > strip.halfwidth * (1.0 + 1e-12)):
        raise DomainError("offset |t| exceeds the strip half-width")
    q = np.asarray(q, dtype=float)
    return strip.curve.point(q) + t[..., None] * strip.curve.normal(q)


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of the sampled admissibility test for a strip.

    ``curvature_ok`` is the necessary condition max|kappa|*a <= 1.  The
    injectivity check is a sampled heuristic in two parts: normal fibers at
    arclength separation above one grid step must stay farther apart than
    ``1e-6 * a``, and every mapped grid point must be no closer to the curve
    than its own offset |t| allows.  The second part catches tubes whose
    sheets overlap while running parallel, which no pairwise crossing test
    can see.  A passing report is necessary but, being sampled, not a proof.
    """

    max_kappa_a: float
    curvature_ok: bool
    min_fiber_gap: float
    max_normal_deficit: float
    injectivity_ok: bool
    n_samples: int

    @property
    def ok(self) -> bool:
        return self.curvature_ok and self.injectivity_ok

    def to_dict(self) -> dict:
        return {
            "max_kappa_a": self.max_kappa_a,
            "curvature_ok": self.curvature_ok,
            "min_fiber_gap": self.min_fiber_gap,
            "max_normal_deficit": self.max_normal_deficit,
            "injectivity_ok": self.injectivity_ok,
            "n_samples": self.n_samples,
            "ok": self.ok,
        }


def _segseg_distance(p1, p2, q1, q2):
    """Distance between segments [p1, p2] and [q1, q2], vectorized (..., 2)."""
    d1 = p2 - p1
    d2 = q2 - q1
    r = p1 - q1
    a = np.einsum("...i,...i", d1, d1)
    e = np.einsum("...i,...i", d2, d2)
    f = np.einsum("...i,...i", d2, r)
    c = np.einsum("...i,...i", d1, r)
    b = np.einsum("...i,...i", d1, d2)
    denom = a * e - b * b
    s = np.where(denom > 1e-30, (b * f - c * e) / np.where(denom > 1e-30, denom, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    t = np.where(e > 1e-30, (b * s + f) / np.where(e > 1e-30, e, 1.0), 0.0)
    t_clamped = np.clip(t, 0.0, 1.0)
    # re-project s where t was clamped
    s = np.where(
        t != t_clamped,
        np.clip((b * t_clamped - c) / np.where(a > 1e-30, a, 1.0), 0.0, 1.0),
        s,
    )
    t = t_clamped
    cp1 = p1 + s[..., None] * d1
    cp2 = q1 + t[..., None] * d2
    return np.linalg.norm(cp1 - cp2, axis=-1)


def check_admissible(strip: Strip, n_samples: int = 256) -> AdmissibilityReport:
    """Sampled admissibility test: curvature bound plus tube injectivity."""
    if n_samples < 16:
        raise DomainError("need at least 16 samples")
    curve = strip.curve
    a = strip.halfwidth
    L = curve.length
    qs = _sample_parameters(curve, n_samples)
    spacing = L / n_samples if curve.closed else L / (n_samples - 1)

    kap = np.abs(curve._curvature_raw(qs))
    max_ka = float(np.max(kap) * a)
    curvature_ok = max_ka <= 1.0 + 1e-9

    # fiber-fiber separation for pairs more than one grid step apart
    lo = tube_map(strip, qs, np.full(n_samples, -a))
    hi = tube_map(strip, qs, np.full(n_samples, a))
    ii, kk = np.triu_indices(n_samples, k=1)
    dq = np.abs(qs[ii] - qs[kk])
    if curve.closed:
        dq = np.minimum(dq, L - dq)
    far = dq > spacing * (1.0 + 1e-9)
    ii, kk = ii[far], kk[far]
    gaps = _segseg_distance(lo[ii], hi[ii], lo[kk], hi[kk])
    min_gap = float(gaps.min()) if gaps.size else math.inf
    pairs_ok = min_gap > 1e-6 * a

    # normal-distance consistency: dist(L(q, t), curve) must equal |t|
    t_levels = np.linspace(-a, a, 7)
    dense_q = _sample_parameters(curve, 4 * n_samples)
    dense_pts = curve.point(dense_q)
    deficit = 0.0
    dense_spacing = spacing / 4.0
    eps = 1e-6 * a + dense_spacing**2 * float(np.max(kap))
    for t in t_levels:
        if t == 0.0:
            continue
        pts = tube_map(strip, qs, np.full(n_samples, t))
        d2 = np.sum((pts[:, None, :] - dense_pts[None, :, :]) ** 2, axis=-1)
        dmin = np.sqrt(d2.min(axis=1))
        deficit = max(deficit, float(np.max(abs(t) - dmin)))
    normals_ok = deficit <= eps

    return AdmissibilityReport(
        max_kappa_a=max_ka,
        curvature_ok=curvature_ok,
        min_fiber_gap=min_gap,
        max_normal_deficit=deficit,
        injectivity_ok=pairs_ok and normals_ok,
        n_samples=n_samples,
    )


# ---------------------------------------------------------------------------
# arc polygons
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SegmentEdge:
    """Straight boundary edge from ``start`` to ``end``."""

    start: np.ndarray
    end: np.ndarray
    tag: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "start", _as_point(self.start))
        object.__setattr__(self, "end", _as_point(self.end))

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    @property
    def direction(self) -> np.ndarray:
        return (self.end - self.start) / self.length

    def tangent_start(self) -> np.ndarray:
        return self.direction

    def tangent_end(self) -> np.ndarray:
        return self.direction

    def chord_points(self, chord_tolerance: float) -> np.ndarray:
        return np.vstack([self.start, self.end])

    def to_dict(self) -> dict:
        out = {"type": "segment", "p0": self.start.tolist(), "p1": self.end.tolist()}
        if self.tag:
            out["tag"] = self.tag
        return out


@dataclass(frozen=True)
class ArcEdge:
    """Circular boundary edge with signed angular span.

    Spans are normalized to [-2*pi, 2*pi]; a full circle is span exactly
    +/-2*pi.  Positive span is traversed counterclockwise, so on a
    positively oriented outer loop it bounds material inside its disc.
    """

    center: np.ndarray
    radius: float
    angle0: float
    span: float
    tag: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center))
        if self.radius <= 0.0:
            raise ValidationError("arc edge radius must be positive")
        if not 0.0 < abs(self.span) <= TWO_PI + 1e-12:
            raise ValidationError("arc edge span must lie in (0, 2*pi]")
        span = float(np.clip(self.span, -TWO_PI, TWO_PI))
        object.__setattr__(self, "span", span)

    def _pt(self, theta: float) -> np.ndarray:
        return self.center + self.radius * np.array(
            [math.cos(theta), math.sin(theta)]
        )

    @property
    def start(self) -> np.ndarray:
        return self._pt(self.angle0)

    @property
    def end(self) -> np.ndarray:
        return self._pt(self.angle0 + self.span)

    @property
    def length(self) -> float:
        return self.radius * abs(self.span)

    @property
    def ccw(self) -> bool:
        return self.span > 0

    def tangent_at(self, theta: float) -> np.ndarray:
        s = 1.0 if self.ccw else -1.0
        return s * np.array([-math.sin(theta), math.cos(theta)])

    def tangent_start(self) -> np.ndarray:
        return self.tangent_at(self.angle0)

    def tangent_end(self) -> np.ndarray:
        return self.tangent_at(self.angle0 + self.span)

    def chord_points(self, chord_tolerance: float) -> np.ndarray:
        """Sample the arc with chords whose sagitta stays below tolerance."""
        tol = min(chord_tolerance, self.radius)
        dth = 2.0 * math.acos(max(1.0 - tol / self.radius, -1.0))
        n = max(1, int(math.ceil(abs(self.span) / max(dth, 1e-9))))
        th = self.angle0 + self.span * np.linspace(0.0, 1.0, n + 1)
        return self.center + self.radius * np.stack(
            [np.cos(th), np.sin(th)], axis=-1
        )

    def to_dict(self) -> dict:
        out = {
            "type": "arc",
            "center": self.center.tolist(),
            "radius": self.radius,
            "angle0": self.angle0,
            "span": self.span,
        }
        if self.tag:
            out["tag"] = self.tag
        return out


Edge = SegmentEdge | ArcEdge


def edge_from_dict(data: dict) -> Edge:
    if data.get("type") == "segment":
        return SegmentEdge(data["p0"], data["p1"], tag=data.get("tag"))
    if data.get("type") == "arc":
        return ArcEdge(
            data["center"], data["radius"], data["angle0"], data["span"],
            tag=data.get("tag"),
        )
    raise ValidationError(f"unknown edge type {data.get('type')!r}")


def _loop_signed_area(edges: Sequence[Edge]) -> float:
    """Shoelace over edge endpoints plus circular-segment corrections."""
    area = 0.0
    for e in edges:
        p, q = e.start, e.end
        area += 0.5 * (p[0] * q[1] - p[1] * q[0])
        if isinstance(e, ArcEdge):
            area += 0.5 * e.radius**2 * (e.span - math.sin(e.span))
    return area


def _loop_perimeter(edges: Sequence[Edge]) -> float:
    return sum(e.length for e in edges)


def _loop_diameter(edges: Sequence[Edge]) -> float:
    pts = [e.start for e in edges] + [edges[-1].end]
    for e in edges:
        if isinstance(e, ArcEdge):
            r = np.array([e.radius, e.radius])
            pts.extend([e.center + r, e.center - r])
    return _bbox_diag(np.asarray(pts))


def _validate_loop(edges: Sequence[Edge], diam: float, where: str) -> None:
    if not edges:
        raise ValidationError(f"{where}: empty edge loop")
    tol = 1e-9 * max(diam, 1e-30)
    for i, e in enumerate(edges):
        nxt = edges[(i + 1) % len(edges)]
        gap = float(np.linalg.norm(np.asarray(e.end) - np.asarray(nxt.start)))
        if gap > tol:
            raise ValidationError(
                f"{where}: edges {i} and {(i + 1) % len(edges)} leave a gap of {gap:.3e}"
            )


@dataclass(frozen=True)
class ArcPolygon:
    """Closed region bounded by line segments and circular arcs.

    The outer loop must be positively oriented (counterclockwise).  Optional
    ``holes`` are additional closed loops subtracted from the region, so an
    annulus is an outer circle plus one circular hole.  ``slits`` declares
    zero-width cuts (segments traversed twice by the outer loop, as in a
    slit disc); they are honoured by rasterization and exempt from the
    self-intersection expectations.
    """

    edges: tuple
    holes: tuple = ()
    slits: tuple = ()

    def __post_init__(self):
        edges = tuple(self.edges)
        holes = tuple(tuple(h) for h in self.holes)
        slits = tuple(
            np.asarray(s, dtype=float).reshape(2, 2) for s in self.slits
        )
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "holes", holes)
        object.__setattr__(self, "slits", slits)
        diam = _loop_diameter(edges)
        _validate_loop(edges, diam, "outer loop")
        if _loop_signed_area(edges) <= 0.0:
            raise ValidationError("outer loop must be positively oriented")
        for j, h in enumerate(holes):
            _validate_loop(h, diam, f"hole {j}")

    def metrics(self) -> tuple:
        return arcpolygon_metrics(self)

    @property
    def perimeter(self) -> float:
        return self.metrics()[0]

    @property
    def area(self) -> float:
        return self.metrics()[1]

    def bounds(self) -> tuple:
        pts = np.vstack(
            [e.chord_points(1e-3 * _loop_diameter(self.edges)) for e in self.edges]
            + [e.chord_points(1e-3 * _loop_diameter(self.edges)) for h in self.holes for e in h]
        )
        return (
            float(pts[:, 0].min()),
            float(pts[:, 1].min()),
            float(pts[:, 0].max()),
            float(pts[:, 1].max()),
        )

    def diameter(self) -> float:
        x0, y0, x1, y1 = self.bounds()
        return math.hypot(x1 - x0, y1 - y0)

    def to_dict(self) -> dict:
        out = {"edges": [e.to_dict() for e in self.edges]}
        if self.holes:
            out["holes"] = [[e.to_dict() for e in h] for h in self.holes]
        if self.slits:
            out["slits"] = [s.tolist() for s in self.slits]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ArcPolygon":
        return cls(
            edges=tuple(edge_from_dict(e) for e in data["edges"]),
            holes=tuple(
                tuple(edge_from_dict(e) for e in h) for h in data.get("holes", ())
            ),
            slits=tuple(data.get("slits", ())),
        )


def arcpolygon_metrics(shape: ArcPolygon) -> tuple:
    """Exact (perimeter, area); hole loops add perimeter and subtract area."""
    per = _loop_perimeter(shape.edges)
    area = _loop_signed_area(shape.edges)
    for h in shape.holes:
        per += _loop_perimeter(h)
        area -= abs(_loop_signed_area(h))
    if area <= 0.0:
        raise ValidationError("arc polygon encloses no area")
    return per, area


def _polygonize_loop(edges: Sequence[Edge], chord_tolerance: float) -> np.ndarray:
    pts = []
    for e in edges:
        chunk = e.chord_points(chord_tolerance)
        pts.append(chunk[:-1])  # drop shared endpoint, next edge supplies it
    out = np.vstack(pts)
    # collapse numerically repeated consecutive vertices
    keep = np.ones(out.shape[0], dtype=bool)
    nxt = np.roll(out, -1, axis=0)
    keep[np.linalg.norm(out - nxt, axis=1) <= 1e-15 * _bbox_diag(out)] = False
    return out[keep]


def polygonize(shape: ArcPolygon, chord_tolerance: float) -> np.ndarray:
    """Outer loop as a vertex array; arcs become chords with bounded sagitta."""
    if chord_tolerance <= 0.0:
        raise DomainError("chord tolerance must be positive")
    return _polygonize_loop(shape.edges, chord_tolerance)


def polygonize_loops(shape: ArcPolygon, chord_tolerance: float) -> list:
    """All loops (outer first, then holes) as vertex arrays."""
    if chord_tolerance <= 0.0:
        raise DomainError("chord tolerance must be positive")
    loops = [_polygonize_loop(shape.edges, chord_tolerance)]
    loops.extend(_polygonize_loop(h, chord_tolerance) for h in shape.holes)
    return loops
