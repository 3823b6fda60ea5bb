"""Exact rational geometry primitives for translation-space computations.

Everything operates on squared Euclidean lengths over ``fractions.Fraction``
so that all downstream comparisons are exact. Translations live in the same
plane as the input points: translating the second point set by ``t`` moves
point ``b`` to ``b + t``, and the squared length of a matched pair ``(a, b)``
is ``|b + t - a|^2``. The identity

    |b + t - a|^2 = |t - (a - b)|^2

reduces every length comparison to point-to-site distances in translation
space, with site ``a - b`` per edge. Also the reason bisectors of two edges
are ordinary perpendicular bisectors of their sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

Scalar = Fraction

ScalarLike = Union[int, str, Fraction]


def to_scalar(value: ScalarLike) -> Fraction:
    """Parse an exact scalar: int, Fraction, or a 'p/q' / 'p' string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact scalar")


def format_scalar(value: Fraction) -> str:
    """Canonical 'p/q' (or 'p' when integral) rendering of a scalar."""
    return str(value)


@dataclass(frozen=True, order=True)
class Point:
    """A point (or translation vector) with exact rational coordinates."""

    x: Fraction
    y: Fraction

    def __add__(self, other: "Point") -> "Point":
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point") -> "Point":
        return Point(self.x - other.x, self.y - other.y)

    def scale(self, factor: Fraction) -> "Point":
        return Point(self.x * factor, self.y * factor)

    def dot(self, other: "Point") -> Fraction:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Point") -> Fraction:
        return self.x * other.y - self.y * other.x

    def norm2(self) -> Fraction:
        """Squared Euclidean norm."""
        return self.x * self.x + self.y * self.y

    def dist2(self, other: "Point") -> Fraction:
        return (self - other).norm2()

    def __str__(self) -> str:
        return f"({self.x}, {self.y})"


def point(x: ScalarLike, y: ScalarLike) -> Point:
    return Point(to_scalar(x), to_scalar(y))


ORIGIN = Point(Fraction(0), Fraction(0))


class EdgeRef(NamedTuple):
    """A potential matched pair: index into A times index into B."""

    a: int
    b: int


@dataclass(frozen=True)
class Instance:
    """Two labeled planar point sets; B is the smaller, fully matched side.

    Invariants: 1 <= k <= n, points within each set pairwise distinct.
    """

    A: tuple[Point, ...]
    B: tuple[Point, ...]

    def __post_init__(self) -> None:
        if not (1 <= len(self.B) <= len(self.A)):
            raise ValueError("need 1 <= |B| <= |A|")
        if len(set(self.A)) != len(self.A):
            raise ValueError("points of A must be pairwise distinct")
        if len(set(self.B)) != len(self.B):
            raise ValueError("points of B must be pairwise distinct")

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def k(self) -> int:
        return len(self.B)

    def edges(self) -> Iterator[EdgeRef]:
        for b in range(self.k):
            for a in range(self.n):
                yield EdgeRef(a, b)

    def anchor(self, e: EdgeRef) -> Point:
        """The translation aligning edge ``e`` exactly: a - b."""
        return self.A[e.a] - self.B[e.b]

    def diff(self, e: EdgeRef) -> Point:
        """Difference vector b - a; equal vectors mean equivalent edges."""
        return self.B[e.b] - self.A[e.a]


def instance(A: Iterable[Sequence[ScalarLike]], B: Iterable[Sequence[ScalarLike]]) -> Instance:
    """Build an Instance from coordinate pairs (ints, Fractions, 'p/q')."""
    return Instance(
        tuple(point(x, y) for x, y in A),
        tuple(point(x, y) for x, y in B),
    )


def squared_edge_length(inst: Instance, e: EdgeRef, t: Point) -> Fraction:
    """Exact squared length |b + t - a|^2 of edge ``e`` at translation ``t``."""
    return t.dist2(inst.anchor(e))


def _normalize_line(alpha: Fraction, beta: Fraction, gamma: Fraction) -> tuple[Fraction, Fraction, Fraction]:
    if alpha != 0:
        return Fraction(1), beta / alpha, gamma / alpha
    if beta == 0:
        raise ValueError("zero line")
    return Fraction(0), Fraction(1), gamma / beta


@dataclass(frozen=True)
class Line:
    """The line alpha*x + beta*y = gamma, normalized.

    Normalization: the first nonzero of (alpha, beta) equals 1, so equal
    lines compare and hash equal. Never a zero line.
    """

    alpha: Fraction
    beta: Fraction
    gamma: Fraction

    def __post_init__(self) -> None:
        first = self.alpha if self.alpha != 0 else self.beta
        if first != 1:
            raise ValueError("line must be normalized; use make_line()")

    def side(self, p: Point) -> Fraction:
        """Signed residual alpha*x + beta*y - gamma (zero iff on the line)."""
        return self.alpha * p.x + self.beta * p.y - self.gamma

    def direction(self) -> Point:
        """A direction vector of the line."""
        return Point(self.beta, -self.alpha)

    def some_point(self) -> Point:
        """An arbitrary exact point on the line."""
        if self.alpha != 0:
            return Point(self.gamma / self.alpha, Fraction(0))
        return Point(Fraction(0), self.gamma / self.beta)

    def primitive_triple(self) -> tuple[int, int, int]:
        """Coprime integer (A, B, C) with A*x + B*y = C and canonical sign."""
        den = math.lcm(
            self.alpha.denominator, self.beta.denominator, self.gamma.denominator
        )
        a = int(self.alpha * den)
        b = int(self.beta * den)
        c = int(self.gamma * den)
        g = math.gcd(math.gcd(abs(a), abs(b)), abs(c))
        if g:
            a, b, c = a // g, b // g, c // g
        if a < 0 or (a == 0 and b < 0):
            a, b, c = -a, -b, -c
        return a, b, c

    def foot(self, p: Point) -> Point:
        """Orthogonal projection of ``p`` onto the line."""
        n = Point(self.alpha, self.beta)
        lam = (self.gamma - n.dot(p)) / n.norm2()
        return p + n.scale(lam)


def make_line(alpha: ScalarLike, beta: ScalarLike, gamma: ScalarLike) -> Line:
    """Normalized line from arbitrary rational coefficients."""
    return Line(*_normalize_line(to_scalar(alpha), to_scalar(beta), to_scalar(gamma)))


def line_intersection(l1: Line, l2: Line) -> Point | None:
    """Intersection point of two lines, None when parallel (or equal)."""
    det = l1.alpha * l2.beta - l2.alpha * l1.beta
    if det == 0:
        return None
    x = (l1.gamma * l2.beta - l2.gamma * l1.beta) / det
    y = (l1.alpha * l2.gamma - l2.alpha * l1.gamma) / det
    return Point(x, y)


def perpendicular_bisector(p: Point, q: Point) -> Line:
    """Perpendicular bisector of two distinct points: |t-p|^2 = |t-q|^2."""
    if p == q:
        raise ValueError("coincident points have no bisector line")
    return make_line(
        2 * (q.x - p.x),
        2 * (q.y - p.y),
        q.norm2() - p.norm2(),
    )


def bisector_line(inst: Instance, e1: EdgeRef, e2: EdgeRef) -> Line | None:
    """Locus of translations where edges ``e1`` and ``e2`` have equal length.

    Returns ``None`` for equivalent edges (equal difference vectors): their
    lengths agree at every translation, the locus is the whole plane.
    Otherwise the locus is the perpendicular bisector of the two alignment
    translations a1 - b1 and a2 - b2.
    """
    p = inst.anchor(e1)
    q = inst.anchor(e2)
    if p == q:
        return None
    return perpendicular_bisector(p, q)


def equivalence_classes(inst: Instance) -> list[list[EdgeRef]]:
    """Partition all edges by difference vector b - a.

    Classes are sorted lexicographically by difference vector, members by
    (a, b). Equivalent edges keep equal lengths at every translation, so a
    class never has two edges sharing an endpoint; class size is at most k.
    """
    groups: dict[Point, list[EdgeRef]] = {}
    for e in inst.edges():
        groups.setdefault(inst.diff(e), []).append(e)
    out = []
    for d in sorted(groups, key=lambda v: (v.x, v.y)):
        members = sorted(groups[d])
        assert len(members) <= inst.k
        out.append(members)
    return out


def _is_strictly_convex_ccw(vertices: Sequence[Point]) -> bool:
    m = len(vertices)
    for i in range(m):
        u = vertices[(i + 1) % m] - vertices[i]
        v = vertices[(i + 2) % m] - vertices[(i + 1) % m]
        if u.cross(v) <= 0:
            return False
    return True


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex region given by ccw vertices.

    Three or more vertices: strictly convex ccw order, no repeats, no three
    collinear. One or two vertices are allowed as degenerate regions (a point
    or a segment); erosion produces these naturally.
    """

    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        m = len(self.vertices)
        if m == 0:
            raise ValueError("empty polygon; use None for the empty region")
        if len(set(self.vertices)) != m:
            raise ValueError("repeated vertices")
        if m >= 3 and not _is_strictly_convex_ccw(self.vertices):
            raise ValueError("vertices must be in strictly convex ccw order")

    @property
    def dim(self) -> int:
        return min(len(self.vertices) - 1, 2)

    def edges(self) -> Iterator[tuple[Point, Point]]:
        m = len(self.vertices)
        if m == 1:
            return
        if m == 2:
            yield self.vertices[0], self.vertices[1]
            return
        for i in range(m):
            yield self.vertices[i], self.vertices[(i + 1) % m]

    def contains(self, p: Point) -> bool:
        """Closed containment test."""
        verts = self.vertices
        if len(verts) == 1:
            return p == verts[0]
        if len(verts) == 2:
            return _on_segment(p, verts[0], verts[1])
        for v, w in self.edges():
            if (w - v).cross(p - v) < 0:
                return False
        return True

    def contains_interior(self, p: Point) -> bool:
        """Strict interior test (false for degenerate polygons)."""
        if len(self.vertices) < 3:
            return False
        for v, w in self.edges():
            if (w - v).cross(p - v) <= 0:
                return False
        return True

    def centroid(self) -> Point:
        """Vertex average; interior for convex polygons."""
        m = len(self.vertices)
        sx = sum((v.x for v in self.vertices), Fraction(0))
        sy = sum((v.y for v in self.vertices), Fraction(0))
        return Point(sx / m, sy / m)


def convex_polygon(coords: Iterable[Sequence[ScalarLike]]) -> ConvexPolygon:
    return ConvexPolygon(tuple(point(x, y) for x, y in coords))


def _on_segment(p: Point, v: Point, w: Point) -> bool:
    d = w - v
    if d.cross(p - v) != 0:
        return False
    lam = d.dot(p - v)
    return 0 <= lam <= d.norm2()


def _closest_on_segment(p: Point, v: Point, w: Point) -> Point:
    d = w - v
    denom = d.norm2()
    if denom == 0:
        return v
    lam = d.dot(p - v) / denom
    if lam <= 0:
        return v
    if lam >= 1:
        return w
    return v + d.scale(lam)


def closest_point_in_polygon(p: Point, poly: ConvexPolygon) -> Point:
    """Exact nearest point of a convex region to ``p`` (p itself if inside)."""
    if poly.contains(p):
        return p
    best: Point | None = None
    best_d2: Fraction | None = None
    if len(poly.vertices) == 1:
        return poly.vertices[0]
    for v, w in poly.edges():
        q = _closest_on_segment(p, v, w)
        d2 = p.dist2(q)
        if best_d2 is None or d2 < best_d2 or (d2 == best_d2 and (q.x, q.y) < (best.x, best.y)):
            best, best_d2 = q, d2
    assert best is not None
    return best


def min_envelope_on_segment(
    inst: Instance,
    edges: Sequence[EdgeRef],
    seg: tuple[Point, Point],
) -> tuple[Point, Fraction]:
    """Minimize max squared edge length over a segment of translations.

    Each edge contributes |t - site|^2; restricted to the segment these are
    quadratics sharing one leading coefficient, so their maximum is convex
    piecewise quadratic. Candidate parameters: segment ends, every pairwise
    breakpoint of the linear parts, and each piece's unconstrained vertex,
    all exact. Returns the minimizing point and value, preferring the
    smallest parameter on ties.
    """
    if not edges:
        raise ValueError("need at least one edge")
    s0, s1 = seg
    d = s1 - s0
    sites = [inst.anchor(e) for e in edges]
    # f_i(lam) = |s0 + lam*d - site|^2 = q(lam) + p_i + m_i*lam with shared
    # q(lam) = lam^2*|d|^2 + 2*lam*<s0,d> + |s0|^2.
    dd = d.norm2()
    sd = s0.dot(d)
    p_lin = [site.norm2() - 2 * s0.dot(site) for site in sites]
    m_lin = [-2 * d.dot(site) for site in sites]

    def g(lam: Fraction) -> Fraction:
        base = lam * lam * dd + 2 * lam * sd + s0.norm2()
        return base + max(p + m * lam for p, m in zip(p_lin, m_lin))

    zero, one = Fraction(0), Fraction(1)
    candidates = {zero, one}
    n_e = len(edges)
    for i in range(n_e):
        for j in range(i + 1, n_e):
            dm = m_lin[j] - m_lin[i]
            if dm != 0:
                lam = (p_lin[i] - p_lin[j]) / dm
                if zero < lam < one:
                    candidates.add(lam)
    if dd != 0:
        for m in m_lin:
            lam = -(2 * sd + m) / (2 * dd)
            if zero < lam < one:
                candidates.add(lam)
    best_lam = min(sorted(candidates), key=lambda lam: (g(lam), lam))
    return s0 + d.scale(best_lam), g(best_lam)


def _halfplane_clip(
    vertices: list[Point], n: Point, c: Fraction
) -> list[Point]:
    """Clip a ccw polygon to the half-plane <n, t> <= c (Sutherland-Hodgman)."""
    if not vertices:
        return []
    out: list[Point] = []
    m = len(vertices)
    for i in range(m):
        v, w = vertices[i], vertices[(i + 1) % m]
        fv, fw = n.dot(v) - c, n.dot(w) - c
        if fv <= 0:
            out.append(v)
            if fw > 0:
                lam = fv / (fv - fw)
                out.append(v + (w - v).scale(lam))
        elif fw < 0:
            lam = fv / (fv - fw)
            out.append(v + (w - v).scale(lam))
    dedup: list[Point] = []
    for p in out:
        if not dedup or p != dedup[-1]:
            dedup.append(p)
    if len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    return dedup


def canonical_convex(vertices: list[Point]) -> ConvexPolygon | None:
    """Canonicalize a weakly convex ccw vertex chain into a ConvexPolygon."""
    if not vertices:
        return None
    pts = sorted(set(vertices))
    if len(pts) == 1:
        return ConvexPolygon((pts[0],))
    # Collinear chains collapse to their extreme pair.
    p0 = pts[0]
    if all((pts[-1] - p0).cross(p - p0) == 0 for p in pts):
        return ConvexPolygon((p0, pts[-1]))
    # Full-dimensional: drop collinear middles, restart from the lex-min vertex.
    m = len(vertices)
    start = vertices.index(min(vertices))
    ring = [vertices[(start + i) % m] for i in range(m)]
    kept: list[Point] = []
    for p in ring:
        while len(kept) >= 2 and (kept[-1] - kept[-2]).cross(p - kept[-1]) <= 0:
            kept.pop()
        kept.append(p)
    while len(kept) >= 3 and (kept[-1] - kept[-2]).cross(kept[0] - kept[-1]) <= 0:
        kept.pop()
    return ConvexPolygon(tuple(kept))


def erode_polygon(Q: ConvexPolygon, B: Sequence[Point]) -> ConvexPolygon | None:
    """Translations placing every point of ``B`` inside ``Q`` (closed).

    Each supporting half-plane <n, x> <= c of Q tightens to
    <n, t> <= c - max_b <n, b>, the maximum over the B points extreme in
    direction n. Returns ``None`` when no translation fits; the result may
    degenerate to a segment or a single point.
    """
    if len(Q.vertices) < 3:
        raise ValueError("Q must be a full-dimensional convex polygon")
    if not B:
        raise ValueError("B must be nonempty")
    b0 = B[0]
    xs = [v.x for v in Q.vertices]
    ys = [v.y for v in Q.vertices]
    poly = [
        Point(min(xs) - b0.x, min(ys) - b0.y),
        Point(max(xs) - b0.x, min(ys) - b0.y),
        Point(max(xs) - b0.x, max(ys) - b0.y),
        Point(min(xs) - b0.x, max(ys) - b0.y),
    ]
    for v, w in Q.edges():
        d = w - v
        n = Point(d.y, -d.x)  # outward normal of a ccw edge
        c = n.dot(v) - max(n.dot(b) for b in B)
        poly = _halfplane_clip(poly, n, c)
        if not poly:
            return None
    return canonical_convex(poly)
