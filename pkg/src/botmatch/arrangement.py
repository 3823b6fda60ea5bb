"""Bisectors, the used-line reduction, and an exact clipped line arrangement.

Translation space is subdivided by the perpendicular bisectors of pairs of
alignment translations a - b. Only bisectors that can support an order-k
candidate-set change are kept (a cheap per-line sweep gives a sound
superset); the survivors are clipped to an adaptive integer bounding box and
assembled into a DCEL with exact homogeneous integer vertices, per-cell
convex polygons, and a dual cell-adjacency graph.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

import numpy as _np

from .geom import (
    ConvexPolygon,
    EdgeRef,
    Instance,
    Line,
    Point,
    canonical_convex,
    bisector_line,
)
from .matching import DIFF_B, SAME_B


class OutsideBox(Exception):
    """Query point lies outside the arrangement's bounding box."""


@dataclass(frozen=True)
class Bisector:
    """A bisector line with every edge pair that ties along it."""

    line: Line
    edge_pairs: tuple[tuple[EdgeRef, EdgeRef, str], ...]


def all_bisectors(inst: Instance) -> list[Bisector]:
    """One Bisector per distinct line over all non-equivalent edge pairs."""
    groups: dict[Line, list[tuple[EdgeRef, EdgeRef, str]]] = {}
    edges = list(inst.edges())
    for i, e1 in enumerate(edges):
        for e2 in edges[i + 1 :]:
            line = bisector_line(inst, e1, e2)
            if line is None:
                continue
            kind = SAME_B if e1.b == e2.b else DIFF_B
            groups.setdefault(line, []).append((e1, e2, kind))
    return [
        Bisector(line, tuple(sorted(groups[line])))
        for line in sorted(groups, key=lambda l: l.primitive_triple())
    ]


def _min_coverage(
    always: int, less: list[Fraction], greater: list[Fraction], stop_at: int
) -> int:
    """Minimum over the line parameter of how many half-line constraints hold.

    ``less`` holds thresholds of open conditions "lam < theta", ``greater``
    of "lam > theta"; ``always`` counts parameter-free ones. Early exit once
    the minimum reaches ``stop_at``.
    """
    best = always + len(less)
    if best <= stop_at:
        return best
    thetas = sorted(set(less) | set(greater))
    n_less: dict[Fraction, int] = {}
    for th in less:
        n_less[th] = n_less.get(th, 0) + 1
    n_greater: dict[Fraction, int] = {}
    for th in greater:
        n_greater[th] = n_greater.get(th, 0) + 1
    active_less = len(less)
    active_greater = 0
    for th in thetas:
        active_less -= n_less.get(th, 0)
        best = min(best, always + active_less + active_greater)
        active_greater += n_greater.get(th, 0)
        best = min(best, always + active_less + active_greater)
        if best <= stop_at:
            return best
    return best


def _pair_supports_candidate_change(
    inst: Instance, line: Line, e1: EdgeRef, e2: EdgeRef, kind: str
) -> bool:
    """Necessary condition for the pair's tie to matter somewhere on the line.

    Somewhere on the line, the open disk centered at the translation through
    the tying alignment points must contain few enough other alignment
    points that both edges can sit at a candidate-set boundary: at most
    k - 1 of A - b for a same-b pair, at most 2k - 2 of the merged
    (A - b) u (A - b') for a differing pair.
    """
    base = line.some_point()
    d = line.direction()
    p = inst.anchor(e1)
    q = inst.anchor(e2)
    sites = {inst.A[a] - inst.B[e1.b] for a in range(inst.n)}
    if kind == SAME_B:
        threshold = inst.k - 1
    else:
        sites |= {inst.A[a] - inst.B[e2.b] for a in range(inst.n)}
        threshold = 2 * inst.k - 2
    sites.discard(p)
    sites.discard(q)
    always = 0
    less: list[Fraction] = []
    greater: list[Fraction] = []
    for s in sites:
        u = p - s
        coef = 2 * d.dot(u)
        const = 2 * base.dot(u) - p.norm2() + s.norm2()
        if coef == 0:
            if const < 0:
                always += 1
        elif coef > 0:
            less.append(-const / coef)
        else:
            greater.append(-const / coef)
    return _min_coverage(always, less, greater, threshold) <= threshold


def used_bisectors(inst: Instance, bisectors: Sequence[Bisector]) -> list[Bisector]:
    """Filter to bisectors that can border a candidate-set change.

    A sound superset of the lines the labeled diagram needs: dropping the
    rest merges only cells whose candidate structure agrees.
    """
    kept = []
    for bi in bisectors:
        if any(
            _pair_supports_candidate_change(inst, bi.line, e1, e2, kind)
            for e1, e2, kind in bi.edge_pairs
        ):
            kept.append(bi)
    return kept


# ---------------------------------------------------------------------------
# Clipped arrangement


# Largest |line coefficient| for the int64 vectorized path. All intermediate
# products are then bounded by 2*C*(2*C**2 + 4) < 2**63.
_COEF_LIMIT = 1 << 20

_LEFT, _RIGHT, _BOTTOM, _TOP = 0, 1, 2, 3


class FaceRef(NamedTuple):
    """Reference to an arrangement face: dim 0 vertex, 1 edge, 2 cell."""

    dim: int
    index: int


def _reduced_direction(alpha: int, beta: int) -> tuple[int, int]:
    dx, dy = beta, -alpha
    g = math.gcd(abs(dx), abs(dy))
    return dx // g, dy // g


def _angular_ranks(dirs: list[tuple[int, int]]) -> dict[tuple[int, int], int]:
    """Rank distinct primitive directions by ccw angle from the +x axis."""

    def cmp(d1: tuple[int, int], d2: tuple[int, int]) -> int:
        h1 = 0 if (d1[1] > 0 or (d1[1] == 0 and d1[0] > 0)) else 1
        h2 = 0 if (d2[1] > 0 or (d2[1] == 0 and d2[0] > 0)) else 1
        if h1 != h2:
            return h1 - h2
        cr = d1[0] * d2[1] - d1[1] * d2[0]
        return 0 if cr == 0 else (-1 if cr > 0 else 1)

    distinct = sorted(set(dirs), key=functools.cmp_to_key(cmp))
    return {d: i for i, d in enumerate(distinct)}


def _reduced_triple(x: int, y: int, w: int) -> tuple[int, int, int]:
    g = math.gcd(math.gcd(x, y), w)
    return x // g, y // g, w // g


def _cross_triples(t1: tuple[int, int, int], t2: tuple[int, int, int]):
    """Homogeneous intersection of two lines alpha*x + beta*y = gamma."""
    a1, b1, g1 = t1
    a2, b2, g2 = t2
    x = g1 * b2 - g2 * b1
    y = g2 * a1 - g1 * a2
    w = a1 * b2 - a2 * b1
    if w == 0:
        return None
    if w < 0:
        x, y, w = -x, -y, -w
    g = math.gcd(math.gcd(abs(x), abs(y)), w)
    return x // g, y // g, w // g


def _box_from_candidates(
    crossing_bounds: tuple[int, int, int, int] | None,
    extras: Sequence[Point],
    trip_set: set[tuple[int, int, int]],
) -> tuple[int, int, int, int]:
    """Integer box strictly containing all candidates with margin >= 1.

    Sides are nudged outward until none coincides with an input line.
    """
    lo_x: list[int] = []
    hi_x: list[int] = []
    lo_y: list[int] = []
    hi_y: list[int] = []
    if crossing_bounds is not None:
        bx0, bx1, by0, by1 = crossing_bounds
        lo_x.append(bx0)
        hi_x.append(bx1)
        lo_y.append(by0)
        hi_y.append(by1)
    for p in extras:
        lo_x.append(math.floor(p.x))
        hi_x.append(math.ceil(p.x))
        lo_y.append(math.floor(p.y))
        hi_y.append(math.ceil(p.y))
    if not lo_x:
        lo_x = hi_x = [0]
        lo_y = hi_y = [0]
    x0, x1 = min(lo_x) - 1, max(hi_x) + 1
    y0, y1 = min(lo_y) - 1, max(hi_y) + 1
    while (1, 0, x0) in trip_set:
        x0 -= 1
    while (1, 0, x1) in trip_set:
        x1 += 1
    while (0, 1, y0) in trip_set:
        y0 -= 1
    while (0, 1, y1) in trip_set:
        y1 += 1
    return x0, y0, x1, y1


def _boundary_rows(
    trips: list[tuple[int, int, int]],
    sides: list[tuple[int, int, int]],
    box: tuple[int, int, int, int],
) -> list[tuple[int, tuple[int, int, int]]]:
    """(line_id, vertex triple) rows for chord endpoints, side hits, corners."""
    L = len(trips)
    x0, y0, x1, y1 = box
    rows: list[tuple[int, tuple[int, int, int]]] = []
    for i, t in enumerate(trips):
        found: dict[tuple[int, int, int], list[int]] = {}
        for s, st in enumerate(sides):
            c = _cross_triples(t, st)
            if c is None:
                continue
            x, y, w = c
            if x0 * w <= x <= x1 * w and y0 * w <= y <= y1 * w:
                found.setdefault(c, []).append(s)
        assert len(found) == 2, "every input line must cross the box in a chord"
        for c, ss in found.items():
            rows.append((i, c))
            for s in ss:
                rows.append((L + s, c))
    for s1, s2 in ((_LEFT, _BOTTOM), (_LEFT, _TOP), (_RIGHT, _BOTTOM), (_RIGHT, _TOP)):
        c = _cross_triples(sides[s1], sides[s2])
        assert c is not None
        rows.append((L + s1, c))
        rows.append((L + s2, c))
    return rows


def _exact_lam_key(coord: tuple[int, int, int], d: tuple[int, int]) -> Fraction:
    x, y, w = coord
    return Fraction(d[0] * x + d[1] * y, w)


def _geometry_fast(
    trips: list[tuple[int, int, int]],
    dirs_all: list[tuple[int, int]],
    extras: Sequence[Point],
):
    """Vectorized exact geometry stage (int64-safe by the _COEF_LIMIT guard)."""
    L = len(trips)
    al = _np.array([t[0] for t in trips], dtype=_np.int64)
    be = _np.array([t[1] for t in trips], dtype=_np.int64)
    ga = _np.array([t[2] for t in trips], dtype=_np.int64)
    I, J = _np.triu_indices(L, 1)
    x = ga[I] * be[J] - ga[J] * be[I]
    y = ga[J] * al[I] - ga[I] * al[J]
    w = al[I] * be[J] - al[J] * be[I]
    m = w != 0
    x, y, w, I, J = x[m], y[m], w[m], I[m], J[m]
    neg = w < 0
    x = _np.where(neg, -x, x)
    y = _np.where(neg, -y, y)
    w = _np.where(neg, -w, w)
    if x.size:
        g = _np.gcd(_np.gcd(_np.abs(x), _np.abs(y)), w)
        x //= g
        y //= g
        w //= g
        bounds = (
            int((x // w).min()),
            int(-((-x) // w).min()),
            int((y // w).min()),
            int(-((-y) // w).min()),
        )
    else:
        bounds = None
    box = _box_from_candidates(bounds, extras, set(trips))
    if max(abs(v) for v in box) * max(1, int(_np.abs(_np.stack([al, be, ga])).max()) if L else 1) >= 1 << 61:
        return None  # box too large for the int64 path; caller falls back
    # sides order: left, right, bottom, top
    sides = [(1, 0, box[0]), (1, 0, box[2]), (0, 1, box[1]), (0, 1, box[3])]
    extra_rows = _boundary_rows(trips, sides, box)
    ni = x.size
    allt = _np.concatenate(
        [
            _np.stack([x, y, w], axis=1),
            _np.array([list(c) for _, c in extra_rows], dtype=_np.int64).reshape(-1, 3),
        ]
    )
    uniq, inv = _np.unique(allt, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    iv = inv[:ni]
    bv = inv[ni:]
    row_line = _np.concatenate(
        [I, J, _np.array([l for l, _ in extra_rows], dtype=_np.int64)]
    )
    row_vid = _np.concatenate([iv, iv, bv])
    fx = uniq[:, 0] / uniq[:, 2]
    fy = uniq[:, 1] / uniq[:, 2]
    dxf = _np.array([d[0] for d in dirs_all], dtype=float)
    dyf = _np.array([d[1] for d in dirs_all], dtype=float)
    lam = dxf[row_line] * fx[row_vid] + dyf[row_line] * fy[row_vid]
    order = _np.lexsort((lam, row_line))
    row_line = row_line[order]
    row_vid = row_vid[order]
    lam = lam[order]
    # repair float-ambiguous runs with exact comparisons
    same = row_line[1:] == row_line[:-1]
    tol = 1e-9 * _np.maximum(1.0, _np.maximum(_np.abs(lam[1:]), _np.abs(lam[:-1])))
    amb = same & (lam[1:] - lam[:-1] <= tol)
    idx = _np.flatnonzero(amb)
    if idx.size:
        runs: list[tuple[int, int]] = []
        rs = int(idx[0])
        prev = rs
        for ii in idx[1:]:
            ii = int(ii)
            if ii != prev + 1:
                runs.append((rs, prev + 1))
                rs = ii
            prev = ii
        runs.append((rs, prev + 1))
        for a, b in runs:  # rows a..b inclusive share one float cluster
            sl = slice(a, b + 1)
            vids = [int(v) for v in row_vid[sl]]
            line_id = int(row_line[a])
            d = dirs_all[line_id]
            coords = [
                (int(uniq[v, 0]), int(uniq[v, 1]), int(uniq[v, 2])) for v in vids
            ]
            srt = sorted(range(len(vids)), key=lambda i: _exact_lam_key(coords[i], d))
            row_vid[sl] = _np.array([vids[i] for i in srt], dtype=row_vid.dtype)
    dup = (row_line[1:] == row_line[:-1]) & (row_vid[1:] == row_vid[:-1])
    keep = _np.ones(len(row_line), dtype=bool)
    keep[1:][dup] = False
    row_line = row_line[keep]
    row_vid = row_vid[keep]
    lam = lam[keep]
    line_ptr = _np.searchsorted(row_line, _np.arange(L + 5))
    return {
        "mode": "np",
        "uniq": uniq,
        "coords": None,
        "vindex": None,
        "V": len(uniq),
        "row_line": row_line,
        "row_vid": row_vid,
        "row_lam": lam,
        "line_ptr": line_ptr,
        "box": box,
    }


def _geometry_slow(
    trips: list[tuple[int, int, int]],
    dirs_all: list[tuple[int, int]],
    extras: Sequence[Point],
):
    """Pure-Python exact geometry stage for oversized coefficients."""
    L = len(trips)
    crossings: list[tuple[tuple[int, int, int], int, int]] = []
    bounds = None
    lo_x = hi_x = lo_y = hi_y = None
    for i in range(L):
        for j in range(i + 1, L):
            c = _cross_triples(trips[i], trips[j])
            if c is None:
                continue
            crossings.append((c, i, j))
            x, y, w = c
            fx_lo, fx_hi = x // w, -((-x) // w)
            fy_lo, fy_hi = y // w, -((-y) // w)
            if lo_x is None:
                lo_x, hi_x, lo_y, hi_y = fx_lo, fx_hi, fy_lo, fy_hi
            else:
                lo_x = min(lo_x, fx_lo)
                hi_x = max(hi_x, fx_hi)
                lo_y = min(lo_y, fy_lo)
                hi_y = max(hi_y, fy_hi)
    if lo_x is not None:
        bounds = (lo_x, hi_x, lo_y, hi_y)
    box = _box_from_candidates(bounds, extras, set(trips))
    sides = [(1, 0, box[0]), (1, 0, box[2]), (0, 1, box[1]), (0, 1, box[3])]
    rows: list[tuple[int, tuple[int, int, int]]] = []
    for c, i, j in crossings:
        rows.append((i, c))
        rows.append((j, c))
    rows.extend(_boundary_rows(trips, sides, box))
    vindex: dict[tuple[int, int, int], int] = {}
    coords: list[tuple[int, int, int]] = []
    per_line: list[list[tuple[Fraction, int]]] = [[] for _ in range(L + 4)]
    for line_id, c in rows:
        vid = vindex.get(c)
        if vid is None:
            vid = len(coords)
            vindex[c] = vid
            coords.append(c)
        per_line[line_id].append((_exact_lam_key(c, dirs_all[line_id]), vid))
    row_line: list[int] = []
    row_vid: list[int] = []
    row_lam: list[float] = []
    line_ptr = [0]
    for line_id, entries in enumerate(per_line):
        entries.sort()
        prev = None
        for lam, vid in entries:
            if vid == prev:
                continue
            prev = vid
            row_line.append(line_id)
            row_vid.append(vid)
            row_lam.append(float(lam))
        line_ptr.append(len(row_line))
    return {
        "mode": "py",
        "uniq": None,
        "coords": coords,
        "vindex": vindex,
        "V": len(coords),
        "row_line": _np.array(row_line, dtype=_np.int64),
        "row_vid": _np.array(row_vid, dtype=_np.int64),
        "row_lam": _np.array(row_lam, dtype=float),
        "line_ptr": _np.array(line_ptr, dtype=_np.int64),
        "box": box,
    }


class Arrangement:
    """Immutable clipped line arrangement with dual cell graph.

    Vertices are exact homogeneous integer triples (x, y, w), w > 0. Edge ids
    are grouped line-major in parameter order; box sides come after the input
    lines. Cells are the bounded faces in deterministic discovery order.
    """

    def __init__(self, **kw) -> None:
        self.__dict__.update(kw)
        self._poly_cache: dict[int, ConvexPolygon] = {}

    # --- counts ---------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return self._V

    @property
    def n_edges(self) -> int:
        return len(self._eu)

    @property
    def n_cells(self) -> int:
        return len(self._cell_start_he)

    @property
    def n_lines(self) -> int:
        """Number of input lines (box sides excluded)."""
        return len(self.lines)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_cells + 1

    # --- vertices -------------------------------------------------------

    def vertex_triple(self, vid: int) -> tuple[int, int, int]:
        if self._uniq is not None:
            return (
                int(self._uniq[vid, 0]),
                int(self._uniq[vid, 1]),
                int(self._uniq[vid, 2]),
            )
        return self._coords[vid]

    def vertex_point(self, vid: int) -> Point:
        x, y, w = self.vertex_triple(vid)
        return Point(Fraction(x, w), Fraction(y, w))

    def _find_vertex(self, x: int, y: int, w: int) -> int | None:
        if self._uniq is None:
            return self._vindex.get((x, y, w))
        if max(abs(x), abs(y), w) >= 1 << 62:
            return None  # vertices are bounded far below this
        U = self._uniq
        i0 = int(_np.searchsorted(U[:, 0], x, "left"))
        i1 = int(_np.searchsorted(U[:, 0], x, "right"))
        if i0 == i1:
            return None
        j0 = i0 + int(_np.searchsorted(U[i0:i1, 1], y, "left"))
        j1 = i0 + int(_np.searchsorted(U[i0:i1, 1], y, "right"))
        if j0 == j1:
            return None
        k0 = j0 + int(_np.searchsorted(U[j0:j1, 2], w, "left"))
        if k0 < j1 and int(U[k0, 2]) == w:
            return k0
        return None

    # --- edges ----------------------------------------------------------

    def edge_endpoints(self, eid: int) -> tuple[int, int]:
        return int(self._eu[eid]), int(self._ev[eid])

    def edge_line(self, eid: int) -> int:
        return int(self._eline[eid])

    def is_boundary_edge(self, eid: int) -> bool:
        return int(self._eline[eid]) >= self.n_lines

    def edge_midpoint(self, eid: int) -> Point:
        u, v = self.edge_endpoints(eid)
        pu = self.vertex_point(u)
        pv = self.vertex_point(v)
        return (pu + pv).scale(Fraction(1, 2))

    def edge_midpoint_triple(self, eid: int) -> tuple[int, int, int]:
        u, v = self.edge_endpoints(eid)
        xu, yu, wu = self.vertex_triple(u)
        xv, yv, wv = self.vertex_triple(v)
        return _reduced_triple(xu * wv + xv * wu, yu * wv + yv * wu, 2 * wu * wv)

    # --- cells ----------------------------------------------------------

    def _cell_hes(self, cid: int) -> list[int]:
        h0 = int(self._cell_start_he[cid])
        out = [h0]
        h = int(self._nxt[h0])
        while h != h0:
            out.append(h)
            h = int(self._nxt[h])
        return out

    def cell_cycle(self, cid: int) -> list[int]:
        """Vertex ids around the cell, ccw, collinear vertices included."""
        return [int(self._he_origin(h)) for h in self._cell_hes(cid)]

    def _he_origin(self, h: int) -> int:
        e, odd = divmod(h, 2)
        return int(self._ev[e]) if odd else int(self._eu[e])

    def _he_line(self, h: int) -> int:
        return int(self._eline[h // 2])

    def cell_polygon(self, cid: int) -> ConvexPolygon:
        poly = self._poly_cache.get(cid)
        if poly is None:
            pts = [self.vertex_point(v) for v in self.cell_cycle(cid)]
            poly = canonical_convex(pts)
            assert poly is not None and poly.dim == 2, "cells are full-dimensional"
            self._poly_cache[cid] = poly
        return poly

    def cell_centroid(self, cid: int) -> Point:
        cyc = self.cell_cycle(cid)
        sx = Fraction(0)
        sy = Fraction(0)
        for v in cyc:
            x, y, w = self.vertex_triple(v)
            sx += Fraction(x, w)
            sy += Fraction(y, w)
        return Point(sx / len(cyc), sy / len(cyc))

    def cell_sample_triple(self, cid: int) -> tuple[int, int, int]:
        """Interior rational point with a small denominator, homogeneous.

        Midpoint of (edge midpoint, third non-collinear cycle vertex): lands
        strictly inside the triangle they span, hence inside the convex cell,
        while keeping the denominator near the product of three vertex w's
        instead of the lcm over the whole cycle.
        """
        h0 = int(self._cell_start_he[cid])
        e0 = h0 >> 1
        t0 = self.vertex_triple(int(self._eu[e0]))
        t1 = self.vertex_triple(int(self._ev[e0]))
        x0, y0, w0 = t0
        x1, y1, w1 = t1
        h = int(self._nxt[int(self._nxt[h0])])
        while True:
            t2 = self.vertex_triple(self._he_origin(h))
            x2, y2, w2 = t2
            cross = (x1 * w0 - x0 * w1) * (y2 * w0 - y0 * w2) - (
                y1 * w0 - y0 * w1
            ) * (x2 * w0 - x0 * w2)
            if cross != 0:
                break
            h = int(self._nxt[h])
            assert h != h0, "cell cycle is degenerate"
        mx, my, mw = x0 * w1 + x1 * w0, y0 * w1 + y1 * w0, 2 * w0 * w1
        return _reduced_triple(mx * w2 + x2 * mw, my * w2 + y2 * mw, 2 * mw * w2)

    def face_sample_triple(self, ref: FaceRef) -> tuple[int, int, int]:
        """Exact relative-interior sample as a homogeneous integer triple."""
        if ref.dim == 2:
            return self.cell_sample_triple(ref.index)
        if ref.dim == 1:
            return self.edge_midpoint_triple(ref.index)
        return self.vertex_triple(ref.index)

    def cell_bounds_float(self) -> "_np.ndarray":
        """(n_cells, 4) float array [min x, min y, max x, max y] per cell."""
        bounds = _np.empty((self.n_cells, 4), dtype=_np.float64)
        if self._uniq is not None:
            vx = self._uniq[:, 0] / self._uniq[:, 2]
            vy = self._uniq[:, 1] / self._uniq[:, 2]
        else:
            vx = _np.array([x / w for x, y, w in self._coords])
            vy = _np.array([y / w for x, y, w in self._coords])
        E = len(self._eu)
        vids = _np.empty(2 * E, dtype=_np.int64)
        vids[0::2] = self._eu
        vids[1::2] = self._ev
        cells = _np.asarray(self._cell_of_face, dtype=_np.int64)[
            _np.asarray(self._face, dtype=_np.int64)
        ]
        keep = cells >= 0
        cells = cells[keep]
        hx = vx[vids[keep]]
        hy = vy[vids[keep]]
        order = _np.argsort(cells, kind="stable")
        cells = cells[order]
        starts = _np.flatnonzero(_np.r_[True, cells[1:] != cells[:-1]])
        assert len(starts) == self.n_cells
        bounds[:, 0] = _np.minimum.reduceat(hx[order], starts)
        bounds[:, 1] = _np.minimum.reduceat(hy[order], starts)
        bounds[:, 2] = _np.maximum.reduceat(hx[order], starts)
        bounds[:, 3] = _np.maximum.reduceat(hy[order], starts)
        return bounds

    def cell_neighbors(self, cid: int) -> list[tuple[int, int]]:
        """(neighbor cell, shared edge id) pairs, sorted."""
        a, b = int(self._adj_ptr[cid]), int(self._adj_ptr[cid + 1])
        return [
            (int(self._adj_nbr[i]), int(self._adj_eid[i])) for i in range(a, b)
        ]

    def dual_edges(self) -> Iterator[tuple[int, int, int]]:
        """Each interior edge as (cell, cell, edge id), cells ordered."""
        cof = self._cell_of_face
        for e in range(self.n_edges):
            c0 = int(cof[self._face[2 * e]])
            c1 = int(cof[self._face[2 * e + 1]])
            if c0 >= 0 and c1 >= 0:
                yield (min(c0, c1), max(c0, c1), e)

    # --- faces ----------------------------------------------------------

    def iter_faces(self) -> Iterator[FaceRef]:
        for c in range(self.n_cells):
            yield FaceRef(2, c)
        for e in range(self.n_edges):
            yield FaceRef(1, e)
        for v in range(self.n_vertices):
            yield FaceRef(0, v)

    def face_sample(self, ref: FaceRef) -> Point:
        """A rational point in the face's relative interior."""
        if ref.dim == 2:
            return self.cell_centroid(ref.index)
        if ref.dim == 1:
            return self.edge_midpoint(ref.index)
        return self.vertex_point(ref.index)

    # --- point location --------------------------------------------------

    def locate(self, t: Point) -> FaceRef:
        x0, y0, x1, y1 = self.box
        if not (x0 <= t.x <= x1 and y0 <= t.y <= y1):
            raise OutsideBox(f"{t} outside box {self.box}")
        den = math.lcm(t.x.denominator, t.y.denominator)
        X = int(t.x * den)
        Y = int(t.y * den)
        W = den
        g = math.gcd(math.gcd(abs(X), abs(Y)), W)
        X, Y, W = X // g, Y // g, W // g
        vid = self._find_vertex(X, Y, W)
        if vid is not None:
            return FaceRef(0, vid)
        signs = [
            (1 if s > 0 else (-1 if s < 0 else 0))
            for s in (a * X + b * Y - c * W for a, b, c in self._trips_all)
        ]
        zeros = [l for l, s in enumerate(signs) if s == 0]
        assert len(zeros) <= 1, "multi-line point must be a vertex"
        cur = 0
        steps = 0
        while True:
            steps += 1
            assert steps <= self.n_lines + 6, "point-location walk must terminate"
            moved = False
            for h in self._cell_hes(cur):
                sig = -1 if h & 1 else 1
                if sig * signs[self._he_line(h)] < 0:
                    nf = int(self._face[h ^ 1])
                    nxt_cell = int(self._cell_of_face[nf])
                    assert nxt_cell >= 0, "walk stays inside the box"
                    cur = nxt_cell
                    moved = True
                    break
            if not moved:
                break
        if zeros:
            l0 = zeros[0]
            d = self.dirs_all[l0]
            lam_t = Fraction(d[0] * X + d[1] * Y, W)
            for h in self._cell_hes(cur):
                if self._he_line(h) != l0:
                    continue
                e = h // 2
                lu = _exact_lam_key(self.vertex_triple(int(self._eu[e])), d)
                lv = _exact_lam_key(self.vertex_triple(int(self._ev[e])), d)
                if lu < lam_t < lv:
                    return FaceRef(1, e)
            raise AssertionError("on-line point must lie on an edge of its cell")
        return FaceRef(2, cur)


def build_arrangement(
    lines: Sequence[Line], must_contain: Sequence[Point] = ()
) -> Arrangement:
    """Exact DCEL of ``lines`` clipped to an adaptive integer box.

    The box strictly contains every pairwise intersection, a chord of every
    line, and every ``must_contain`` point, with margin at least 1. Faces of
    the subdivision are convex; the bounded ones become cells of the dual
    graph.
    """
    lines = list(lines)
    if len(set(lines)) != len(lines):
        raise ValueError("lines must be deduplicated")
    trips = [ln.primitive_triple() for ln in lines]
    L = len(trips)
    coef = max((max(abs(a), abs(b), abs(c)) for a, b, c in trips), default=1)
    extras = list(must_contain) + [ln.some_point() for ln in lines]
    geo = None
    if coef <= _COEF_LIMIT:
        geo = _geometry_fast_entry(trips, extras)
    if geo is None:
        dirs_all = [_reduced_direction(a, b) for a, b, _ in trips]
        dirs_all += [(0, -1), (0, -1), (1, 0), (1, 0)]
        geo = _geometry_slow(trips, dirs_all, extras)
    return _assemble(lines, trips, geo)


def _geometry_fast_entry(trips, extras):
    dirs_all = [_reduced_direction(a, b) for a, b, _ in trips]
    dirs_all += [(0, -1), (0, -1), (1, 0), (1, 0)]
    return _geometry_fast(trips, dirs_all, extras)


def _assemble(lines: list[Line], trips: list[tuple[int, int, int]], geo) -> Arrangement:
    L = len(trips)
    box = geo["box"]
    x0, y0, x1, y1 = box
    trips_all = trips + [(1, 0, x0), (1, 0, x1), (0, 1, y0), (0, 1, y1)]
    dirs_all = [_reduced_direction(a, b) for a, b, _ in trips_all]
    V = geo["V"]
    row_line = geo["row_line"]
    row_vid = geo["row_vid"]
    row_lam = geo["row_lam"]
    line_ptr = geo["line_ptr"]
    assert bool(
        ((line_ptr[1:] - line_ptr[:-1]) >= 2).all()
    ), "every line needs at least one segment inside the box"

    # edges: consecutive vertices along each line
    same = row_line[1:] == row_line[:-1]
    eu = row_vid[:-1][same]
    ev = row_vid[1:][same]
    eline = row_line[:-1][same]
    E = int(eu.size)
    line_edge_start = _np.searchsorted(eline, _np.arange(L + 5))

    # half-edges: 2e along +direction, 2e+1 reversed; twin(h) = h ^ 1
    ranks = _angular_ranks(dirs_all + [(-dx, -dy) for dx, dy in dirs_all])
    rp = _np.array([ranks[d] for d in dirs_all], dtype=_np.int64)
    rn = _np.array([ranks[(-d[0], -d[1])] for d in dirs_all], dtype=_np.int64)
    H = 2 * E
    he_origin = _np.empty(H, dtype=_np.int64)
    he_origin[0::2] = eu
    he_origin[1::2] = ev
    he_head = _np.empty(H, dtype=_np.int64)
    he_head[0::2] = ev
    he_head[1::2] = eu
    he_rank = _np.empty(H, dtype=_np.int64)
    he_rank[0::2] = rp[eline]
    he_rank[1::2] = rn[eline]

    counts = _np.bincount(he_origin, minlength=V)
    assert int(counts.min()) > 0, "every vertex lies on some edge"
    ring_start = _np.zeros(V + 1, dtype=_np.int64)
    _np.cumsum(counts, out=ring_start[1:])
    order = _np.lexsort((he_rank, he_origin))
    pos = _np.empty(H, dtype=_np.int64)
    pos[order] = _np.arange(H, dtype=_np.int64) - ring_start[he_origin[order]]
    twin_pos = _np.empty(H, dtype=_np.int64)
    twin_pos[0::2] = pos[1::2]
    twin_pos[1::2] = pos[0::2]
    size_at_head = counts[he_head]
    # next half-edge: the cw neighbor of the twin in the ccw ring at the head,
    # which keeps the face on the left of every half-edge
    nxt = order[ring_start[he_head] + (twin_pos - 1) % size_at_head]

    # face traversal
    face = _np.full(H, -1, dtype=_np.int64)
    nxt_list = nxt.tolist()
    face_list = face.tolist()
    starts: list[int] = []
    fid = 0
    for h0 in range(H):
        if face_list[h0] >= 0:
            continue
        h = h0
        while face_list[h] < 0:
            face_list[h] = fid
            h = nxt_list[h]
        assert h == h0, "half-edge cycles must close at their start"
        starts.append(h0)
        fid += 1
    face = _np.array(face_list, dtype=_np.int64)
    n_faces = fid

    # the outer face is left of the reversed half-edge of any bottom edge
    bottom_first = int(line_edge_start[L + _BOTTOM])
    outer = int(face[2 * bottom_first + 1])
    assert bool((eline[_np.flatnonzero(face[0::2] == outer)] >= L).all()) and bool(
        (eline[_np.flatnonzero(face[1::2] == outer)] >= L).all()
    ), "the outer face touches only box sides"

    cell_of_face = _np.full(n_faces, -1, dtype=_np.int64)
    cell_start_he: list[int] = []
    for f in range(n_faces):
        if f == outer:
            continue
        cell_of_face[f] = len(cell_start_he)
        cell_start_he.append(starts[f])
    n_cells = len(cell_start_he)

    assert V - E + (n_cells + 1) == 2, "Euler relation"

    # convexity of bounded faces via integer turn tests
    if geo["mode"] == "np":
        dxl = _np.array([d[0] for d in dirs_all], dtype=_np.int64)
        dyl = _np.array([d[1] for d in dirs_all], dtype=_np.int64)
        he_line_arr = _np.repeat(eline, 2)
        sgn = _np.where(_np.arange(H) % 2 == 0, 1, -1)
        dhx = dxl[he_line_arr] * sgn
        dhy = dyl[he_line_arr] * sgn
        cross = dhx * dhy[nxt] - dhy * dhx[nxt]
        bounded = cell_of_face[face] >= 0
        assert bool((cross[bounded] >= 0).all()), "bounded faces are convex"
    else:
        for h in range(H):
            if cell_of_face[face[h]] < 0:
                continue
            e1, o1 = divmod(h, 2)
            h2 = nxt_list[h]
            e2, o2 = divmod(h2, 2)
            d1 = dirs_all[int(eline[e1])]
            d2 = dirs_all[int(eline[e2])]
            s1 = -1 if o1 else 1
            s2 = -1 if o2 else 1
            cr = s1 * s2 * (d1[0] * d2[1] - d1[1] * d2[0])
            assert cr >= 0, "bounded faces are convex"

    # dual adjacency over interior edges (both sides bounded)
    f_even = face[0::2]
    f_odd = face[1::2]
    c_even = cell_of_face[f_even]
    c_odd = cell_of_face[f_odd]
    interior = (c_even >= 0) & (c_odd >= 0)
    eids = _np.flatnonzero(interior)
    src = _np.concatenate([c_even[eids], c_odd[eids]])
    dst = _np.concatenate([c_odd[eids], c_even[eids]])
    de = _np.concatenate([eids, eids])
    o = _np.lexsort((de, dst, src))
    src, dst, de = src[o], dst[o], de[o]
    adj_ptr = _np.zeros(n_cells + 1, dtype=_np.int64)
    _np.cumsum(_np.bincount(src, minlength=n_cells), out=adj_ptr[1:])

    return Arrangement(
        lines=tuple(lines),
        box=box,
        dirs_all=dirs_all,
        _trips_all=trips_all,
        _uniq=geo["uniq"],
        _coords=geo["coords"],
        _vindex=geo["vindex"],
        _V=V,
        _row_line=row_line,
        _row_vid=row_vid,
        _row_lam=row_lam,
        _line_ptr=line_ptr,
        _eu=eu,
        _ev=ev,
        _eline=eline,
        _line_edge_start=line_edge_start,
        _nxt=nxt,
        _face=face,
        _outer=outer,
        _cell_start_he=cell_start_he,
        _cell_of_face=cell_of_face,
        _adj_ptr=adj_ptr,
        _adj_nbr=dst,
        _adj_eid=de,
    )
