"""Exact rational geometry used by the space partition.

Points are stored homogeneously as four Python integers ``(x, y, z, w)`` with
``w > 0`` and no common factor, which keeps equality and hashing canonical and
makes plane-side tests pure integer arithmetic. Planes are integer
coefficient tuples ``(a, b, c, d)`` meaning ``a x + b y + c z + d = 0``.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, NamedTuple, Sequence, Tuple


class ExactPoint(NamedTuple):
    x: int
    y: int
    z: int
    w: int

    @classmethod
    def from_rationals(cls, x, y, z) -> "ExactPoint":
        fx, fy, fz = Fraction(x), Fraction(y), Fraction(z)
        w = _lcm(_lcm(fx.denominator, fy.denominator), fz.denominator)
        return _canon(fx.numerator * (w // fx.denominator), fy.numerator * (w // fy.denominator),
                      fz.numerator * (w // fz.denominator), w)

    @classmethod
    def from_floats(cls, p: Sequence[float]) -> "ExactPoint":
        # float -> Fraction is exact (dyadic), so input geometry is preserved bit for bit
        return cls.from_rationals(Fraction(float(p[0])), Fraction(float(p[1])), Fraction(float(p[2])))

    @property
    def coords(self) -> Tuple[Fraction, Fraction, Fraction]:
        return (Fraction(self.x, self.w), Fraction(self.y, self.w), Fraction(self.z, self.w))

    def to_floats(self) -> Tuple[float, float, float]:
        # Fraction -> float rounds correctly
        return tuple(float(c) for c in self.coords)


class ExactPlane(NamedTuple):
    a: int
    b: int
    c: int
    d: int

    @classmethod
    def from_coefficients(cls, a, b, c, d) -> "ExactPlane":
        fr = [Fraction(v) for v in (a, b, c, d)]
        den = 1
        for f in fr:
            den = _lcm(den, f.denominator)
        ints = [f.numerator * (den // f.denominator) for f in fr]
        if ints[0] == ints[1] == ints[2] == 0:
            raise ValueError("plane normal is zero")
        g = 0
        for v in ints:
            g = gcd(g, v)
        return cls(*(v // g for v in ints))

    @classmethod
    def through(cls, p: ExactPoint, q: ExactPoint, r: ExactPoint) -> "ExactPlane":
        """Plane through three points, normal by the right-hand rule on p->q->r."""
        n = cross(hsub(q, p), hsub(r, p))
        if n == (0, 0, 0):
            raise ValueError("plane normal is zero")
        g = gcd(gcd(n[0], n[1]), n[2])
        n = (n[0] // g, n[1] // g, n[2] // g)
        # n . P + d = 0 with P = p.xyz / p.w
        num = -(n[0] * p.x + n[1] * p.y + n[2] * p.z)
        return cls.from_coefficients(n[0], n[1], n[2], Fraction(num, p.w))

    @property
    def normal(self) -> Tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def side(self, p: ExactPoint) -> int:
        return plane_side(self, p)

    def flipped(self) -> "ExactPlane":
        return ExactPlane(-self.a, -self.b, -self.c, -self.d)

    def canonical(self) -> Tuple["ExactPlane", int]:
        """Orientation-free key and the sign relating it to ``self``."""
        for v in (self.a, self.b, self.c):
            if v != 0:
                return (self, 1) if v > 0 else (self.flipped(), -1)
        raise AssertionError("unreachable")


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _canon(x: int, y: int, z: int, w: int) -> ExactPoint:
    if w < 0:
        x, y, z, w = -x, -y, -z, -w
    g = gcd(gcd(x, y), gcd(z, w))
    if g > 1:
        x, y, z, w = x // g, y // g, z // g, w // g
    return ExactPoint(x, y, z, w)


def plane_value(h: ExactPlane, p: ExactPoint) -> int:
    """``w * (a x + b y + c z + d)`` evaluated at ``p``; same sign as the plane value."""
    return h[0] * p[0] + h[1] * p[1] + h[2] * p[2] + h[3] * p[3]


def plane_side(h: ExactPlane, p: ExactPoint) -> int:
    v = h[0] * p[0] + h[1] * p[1] + h[2] * p[2] + h[3] * p[3]
    return (v > 0) - (v < 0)


def cross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def sub(p: ExactPoint, q: ExactPoint):
    P, Q = p.coords, q.coords
    return (P[0] - Q[0], P[1] - Q[1], P[2] - Q[2])


def hsub(p: ExactPoint, q: ExactPoint) -> Tuple[int, int, int]:
    """A positive integer multiple of ``p - q``; signs of derived predicates are exact."""
    return (p.x * q.w - q.x * p.w, p.y * q.w - q.y * p.w, p.z * q.w - q.z * p.w)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def orient3d(a: ExactPoint, b: ExactPoint, c: ExactPoint, d: ExactPoint) -> int:
    """Sign of det(b - a, c - a, d - a)."""
    return _sign(dot(hsub(b, a), cross(hsub(c, a), hsub(d, a))))


def intersect_segment_plane(p: ExactPoint, q: ExactPoint, h: ExactPlane) -> ExactPoint:
    """The point where segment ``pq`` meets ``h``.

    Valid when the endpoints lie on different sides or exactly one lies on the
    plane.
    """
    alpha = plane_value(h, p)
    beta = plane_value(h, q)
    if alpha == beta:
        raise ValueError("segment is parallel to or lies in the plane")
    if alpha == 0:
        return p
    if beta == 0:
        return q
    if (alpha > 0) == (beta > 0):
        raise ValueError("segment does not cross the plane")
    # alpha*q - beta*p lies on the line through p, q and satisfies h exactly
    return _canon(alpha * q[0] - beta * p[0], alpha * q[1] - beta * p[1],
                  alpha * q[2] - beta * p[2], alpha * q[3] - beta * p[3])


def intersect_three_planes(h1: ExactPlane, h2: ExactPlane, h3: ExactPlane) -> ExactPoint:
    """Unique common point of three planes (Cramer's rule in integers)."""
    n = cross(h2[:3], h3[:3])
    det = dot(h1[:3], n)
    if det == 0:
        raise ValueError("planes have no unique common point")
    d1, d2, d3 = -h1[3], -h2[3], -h3[3]
    c23 = n
    c31 = cross(h3[:3], h1[:3])
    c12 = cross(h1[:3], h2[:3])
    num = [d1 * c23[i] + d2 * c31[i] + d3 * c12[i] for i in range(3)]
    return _canon(num[0], num[1], num[2], det)


def dominant_axis(normal) -> int:
    mags = [abs(v) for v in normal]
    return mags.index(max(mags))


def project2d(p: ExactPoint, axis: int):
    c = p.coords
    return tuple(c[i] for i in range(3) if i != axis)


def orient2d(a, b, c) -> int:
    return _sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


INSIDE, BOUNDARY, OUTSIDE = "inside", "boundary", "outside"


def point_in_triangle(p: ExactPoint, tri: Sequence[ExactPoint]) -> str:
    """Exact classification of ``p`` against a triangle in 3D."""
    a, b, c = tri
    ab, ac = hsub(b, a), hsub(c, a)
    n = cross(ab, ac)
    if n == (0, 0, 0):
        raise ValueError("degenerate triangle")
    if dot(n, hsub(p, a)) != 0:
        return OUTSIDE
    # p is coplanar: the sign of each sub-triangle normal along n decides
    o1 = _sign(dot(n, cross(ab, hsub(p, a))))
    o2 = _sign(dot(n, cross(hsub(c, b), hsub(p, b))))
    o3 = _sign(dot(n, cross(hsub(a, c), hsub(p, c))))
    if o1 < 0 or o2 < 0 or o3 < 0:
        return OUTSIDE
    if o1 == 0 or o2 == 0 or o3 == 0:
        return BOUNDARY
    return INSIDE


def barycentric(p: ExactPoint, tri: Sequence[ExactPoint]) -> Tuple[Fraction, Fraction, Fraction]:
    """Exact barycentric weights of an on-plane point."""
    a, b, c = tri
    n = cross(sub(b, a), sub(c, a))
    ax = dominant_axis(n)
    pa, pb, pc, pp = (project2d(x, ax) for x in (a, b, c, p))

    def area(u, v, w):
        return (v[0] - u[0]) * (w[1] - u[1]) - (v[1] - u[1]) * (w[0] - u[0])

    tot = area(pa, pb, pc)
    wa = area(pp, pb, pc) / tot
    wb = area(pa, pp, pc) / tot
    return (wa, wb, 1 - wa - wb)


def vector_area(points: Sequence[ExactPoint]):
    """Exact vector area (half the sum of consecutive cross products) of a loop."""
    W = 1
    for p in points:
        W = _lcm(W, p.w)
    cs = [(p.x * (W // p.w), p.y * (W // p.w), p.z * (W // p.w)) for p in points]
    sx = sy = sz = 0
    n = len(cs)
    for i in range(n):
        p, q = cs[i], cs[(i + 1) % n]
        sx += p[1] * q[2] - p[2] * q[1]
        sy += p[2] * q[0] - p[0] * q[2]
        sz += p[0] * q[1] - p[1] * q[0]
    den = 2 * W * W
    return (Fraction(sx, den), Fraction(sy, den), Fraction(sz, den))


def centroid(points: Iterable[ExactPoint]) -> ExactPoint:
    """Vertex average; lies strictly inside any non-degenerate convex polygon."""
    pts = list(points)
    W = 1
    for p in pts:
        W = _lcm(W, p.w)
    sx = sum(p.x * (W // p.w) for p in pts)
    sy = sum(p.y * (W // p.w) for p in pts)
    sz = sum(p.z * (W // p.w) for p in pts)
    return _canon(sx, sy, sz, W * len(pts))
