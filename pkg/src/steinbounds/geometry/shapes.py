"""Shape sets with deterministic membership oracles and boundary metadata.

Every shape exposes contains(points) and boundary_distance(points) on (m, d)
arrays.  The Koch flake keeps its vertices in exact arithmetic over the field
Q[sqrt(3)] so that membership queries falling within float round-off of an
edge can be resolved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from ..errors import DimensionMismatch


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def _check_points(points: np.ndarray, d: int) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != d:
        raise DimensionMismatch(f"points have dimension {pts.shape[1]}, shape has {d}")
    return pts


@dataclass(frozen=True)
class Ball:
    center: Tuple[float, ...]
    radius: float
    alpha: float = 1.0
    s_plus: Optional[float] = None
    s_minus: Optional[float] = None
    kind: str = "ball"

    @property
    def d(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.d) * self.radius ** self.d

    def contains(self, points) -> np.ndarray:
        pts = _check_points(points, self.d)
        return ((pts - np.asarray(self.center)) ** 2).sum(axis=1) <= self.radius**2

    def boundary_distance(self, points) -> np.ndarray:
        pts = _check_points(points, self.d)
        r = np.sqrt(((pts - np.asarray(self.center)) ** 2).sum(axis=1))
        return np.abs(r - self.radius)


@dataclass(frozen=True)
class AxisBox:
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]
    alpha: float = 1.0
    s_plus: Optional[float] = None
    s_minus: Optional[float] = None
    kind: str = "box"

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(np.asarray(self.hi) - np.asarray(self.lo)))

    def contains(self, points) -> np.ndarray:
        pts = _check_points(points, self.d)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def boundary_distance(self, points) -> np.ndarray:
        pts = _check_points(points, self.d)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        inside_gap = np.minimum(pts - lo, hi - pts)
        inside = np.all(inside_gap >= 0, axis=1)
        out = np.empty(len(pts))
        out[inside] = inside_gap[inside].min(axis=1)
        if np.any(~inside):
            clip = np.clip(pts[~inside], lo, hi)
            out[~inside] = np.sqrt(((pts[~inside] - clip) ** 2).sum(axis=1))
        return out


@dataclass(frozen=True)
class HalfInterval:
    """K = [0, threshold] inside the unit interval (d = 1)."""

    threshold: float
    alpha: float = 1.0
    s_plus: Optional[float] = None
    s_minus: Optional[float] = None
    kind: str = "half-interval"
    d: int = 1

    @property
    def volume(self) -> float:
        return self.threshold

    @property
    def intervals(self):
        return [(0.0, self.threshold)]

    def contains(self, points) -> np.ndarray:
        pts = _check_points(points, 1)
        return pts[:, 0] <= self.threshold

    def boundary_distance(self, points) -> np.ndarray:
        pts = _check_points(points, 1)
        return np.abs(pts[:, 0] - self.threshold)


# --- exact arithmetic over Q[sqrt(3)] for the Koch flake ------------------
#
# A number a + b*sqrt(3) is stored as the pair (a, b) of Fractions.

Q3 = Tuple[Fraction, Fraction]


def _q3(a=0, b=0) -> Q3:
    return (Fraction(a), Fraction(b))


def _q3_add(x: Q3, y: Q3) -> Q3:
    return (x[0] + y[0], x[1] + y[1])


def _q3_sub(x: Q3, y: Q3) -> Q3:
    return (x[0] - y[0], x[1] - y[1])


def _q3_mul(x: Q3, y: Q3) -> Q3:
    return (x[0] * y[0] + 3 * x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _q3_scale(x: Q3, r: Fraction) -> Q3:
    return (x[0] * r, x[1] * r)


def _q3_sign(x: Q3) -> int:
    a, b = x
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return (b > 0) - (b < 0)
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # opposite signs: compare a^2 with 3 b^2
    lead = 1 if a > 0 else -1
    if a * a == 3 * b * b:
        return 0
    return lead if a * a > 3 * b * b else -lead


def _q3_float(x: Q3) -> float:
    return float(x[0]) + float(x[1]) * math.sqrt(3.0)


def _rot_minus_60(v: tuple[Q3, Q3]) -> tuple[Q3, Q3]:
    # (x, y) -> (x/2 + y*sqrt(3)/2, -x*sqrt(3)/2 + y/2)
    half = Fraction(1, 2)
    s = _q3(0, half)  # sqrt(3)/2
    x, y = v
    return (
        _q3_add(_q3_scale(x, half), _q3_mul(y, s)),
        _q3_sub(_q3_scale(y, half), _q3_mul(x, s)),
    )


def _koch_vertices(depth: int, center: tuple, circumradius) -> list:
    cx, cy = Fraction(center[0]), Fraction(center[1])
    r = Fraction(circumradius)
    half = Fraction(1, 2)
    # counterclockwise equilateral triangle: top, lower-left, lower-right
    verts = [
        ((_q3(cx), _q3(cy + r))),
        ((_q3(cx, -r * half), _q3(cy - r * half))),
        ((_q3(cx, r * half), _q3(cy - r * half))),
    ]
    third = Fraction(1, 3)
    for _ in range(depth):
        out = []
        for i in range(len(verts)):
            a = verts[i]
            b = verts[(i + 1) % len(verts)]
            step = (_q3_scale(_q3_sub(b[0], a[0]), third),
                    _q3_scale(_q3_sub(b[1], a[1]), third))
            p1 = (_q3_add(a[0], step[0]), _q3_add(a[1], step[1]))
            p3 = (_q3_add(p1[0], step[0]), _q3_add(p1[1], step[1]))
            bump = _rot_minus_60(step)
            p2 = (_q3_add(p1[0], bump[0]), _q3_add(p1[1], bump[1]))
            out.extend([a, p1, p2, p3])
        verts = out
    return verts


class KochFlake:
    """Koch snowflake polygon at a fixed iteration depth (d = 2).

    Membership uses an even-odd crossing test in floats; query points whose
    crossing decision is within round-off of an edge are re-resolved with the
    exact vertex coordinates, so membership is a total deterministic function
    of the depth-L polygon.  Boundary points count as inside.
    """

    kind = "koch-flake"
    d = 2

    def __init__(self, depth: int = 4, center=(0.5, 0.5), circumradius="7/20",
                 alpha: Optional[float] = None):
        if depth < 0:
            raise ValueError("depth must be >= 0")
        self.depth = depth
        self.center = (float(Fraction(center[0])), float(Fraction(center[1])))
        self.circumradius = float(Fraction(circumradius))
        self._exact = _koch_vertices(depth, (Fraction(center[0]), Fraction(center[1])),
                                     Fraction(circumradius))
        self.vertices = np.array(
            [[_q3_float(vx), _q3_float(vy)] for vx, vy in self._exact])
        # boundary dimension of the limiting flake: 2 - log4/log3
        self.alpha = alpha if alpha is not None else 2.0 - math.log(4) / math.log(3)
        self.s_plus = None
        self.s_minus = None

    @property
    def volume(self) -> float:
        """Exact polygon area at this depth (shoelace in Q[sqrt(3)])."""
        acc = _q3(0, 0)
        n = len(self._exact)
        for i in range(n):
            x1, y1 = self._exact[i]
            x2, y2 = self._exact[(i + 1) % n]
            acc = _q3_add(acc, _q3_sub(_q3_mul(x1, y2), _q3_mul(x2, y1)))
        return abs(_q3_float(acc)) / 2.0

    def _edges(self):
        v = self.vertices
        return v, np.roll(v, -1, axis=0)

    def contains(self, points) -> np.ndarray:
        pts = _check_points(points, 2)
        a, b = self._edges()
        x1, y1 = a[:, 0], a[:, 1]
        x2, y2 = b[:, 0], b[:, 1]
        out = np.zeros(len(pts), dtype=bool)
        ambiguous = np.zeros(len(pts), dtype=bool)
        chunk = max(1, int(4e6 / max(len(x1), 1)))
        for s in range(0, len(pts), chunk):
            qx = pts[s:s + chunk, 0:1]
            qy = pts[s:s + chunk, 1:2]
            straddle = (y1 > qy) != (y2 > qy)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = x1 + (qy - y1) * (x2 - x1) / (y2 - y1)
            cross = straddle & (qx < xint)
            out[s:s + chunk] = cross.sum(axis=1) % 2 == 1
            near_edge = straddle & (np.abs(qx - xint) < 1e-12)
            near_vertex = (np.abs(qy - y1) < 1e-15) | (np.abs(qy - y2) < 1e-15)
            ambiguous[s:s + chunk] = (near_edge | near_vertex).any(axis=1)
        for i in np.flatnonzero(ambiguous):
            out[i] = self._contains_exact(pts[i, 0], pts[i, 1])
        return out

    def _contains_exact(self, qx: float, qy: float) -> bool:
        qx3, qy3 = _q3(Fraction(qx)), _q3(Fraction(qy))
        n = len(self._exact)
        count = 0
        for i in range(n):
            xa, ya = self._exact[i]
            xb, yb = self._exact[(i + 1) % n]
            sa = _q3_sign(_q3_sub(ya, qy3))
            sb = _q3_sign(_q3_sub(yb, qy3))
            if sa == 0 and sb == 0:
                # horizontal edge on the ray line: on-edge counts as inside
                lo = min(_q3_float(xa), _q3_float(xb))
                hi = max(_q3_float(xa), _q3_float(xb))
                if lo - 1e-15 <= qx <= hi + 1e-15:
                    sx_a = _q3_sign(_q3_sub(xa, qx3))
                    sx_b = _q3_sign(_q3_sub(xb, qx3))
                    if sx_a == 0 or sx_b == 0 or sx_a != sx_b:
                        return True
                continue
            if (sa > 0) == (sb > 0):
                continue
            den = _q3_sub(yb, ya)
            num = _q3_add(_q3_mul(_q3_sub(xa, qx3), den),
                          _q3_mul(_q3_sub(qy3, ya), _q3_sub(xb, xa)))
            s_num, s_den = _q3_sign(num), _q3_sign(den)
            if s_num == 0:
                return True  # exactly on the edge
            if s_num == s_den:
                count += 1
        return count % 2 == 1

    def boundary_distance(self, points) -> np.ndarray:
        pts = _check_points(points, 2)
        a, b = self._edges()
        seg = b - a
        seg_len2 = (seg**2).sum(axis=1)
        out = np.full(len(pts), np.inf)
        chunk = max(1, int(2e6 / max(len(a), 1)))
        for s in range(0, len(pts), chunk):
            q = pts[s:s + chunk]
            diff = q[:, None, :] - a[None, :, :]
            tpar = (diff * seg[None, :, :]).sum(axis=2) / seg_len2[None, :]
            tpar = np.clip(tpar, 0.0, 1.0)
            proj = a[None, :, :] + tpar[:, :, None] * seg[None, :, :]
            dist2 = ((q[:, None, :] - proj) ** 2).sum(axis=2)
            out[s:s + chunk] = np.sqrt(dist2.min(axis=1))
        return out


SHAPE_KINDS = {
    "ball": Ball,
    "box": AxisBox,
    "half-interval": HalfInterval,
    "koch-flake": KochFlake,
}
