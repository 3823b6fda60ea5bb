"""Labeling the translation-space arrangement with matchings.

Per cell: a bottleneck matching, its longest edge and bottleneck rank, either
recomputed from scratch at each cell's sample or carried across cell borders
by the swap rules of the matching module. Per face (cells, edges, vertices):
a lex-bottleneck matching with its exact cost vector. eval_E answers the
bottleneck value anywhere.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as _np

from .arrangement import (
    Arrangement,
    Bisector,
    FaceRef,
    all_bisectors,
    build_arrangement,
    used_bisectors,
)
from .geom import EdgeRef, Instance, Point, Scalar, squared_edge_length
from .matching import (
    ContractViolation,
    Matching,
    SAME_B,
    assignment_by_cost,
    bottleneck_matching,
    canonical_complete_matching,
    cross_bisector,
    matching_from_map,
    prune_candidates,
)


@dataclass(frozen=True)
class CellLabel:
    """Bottleneck matching of one cell with its longest edge and rank."""

    matching: Matching
    longest: EdgeRef
    rank: int


class LexLabel:
    """Lex-bottleneck matching of one face.

    The cost vector (squared edge lengths at the face sample, decreasing) is
    stored as integer numerators over a shared denominator and materialized
    to Fractions on access; at full scale almost no vector is ever read.
    """

    __slots__ = ("matching", "_nums", "_den")

    def __init__(self, matching: Matching, nums_desc: tuple[int, ...], den: int):
        self.matching = matching
        self._nums = nums_desc
        self._den = den

    @property
    def cost_vector(self) -> tuple[Scalar, ...]:
        return tuple(Fraction(nv, self._den) for nv in self._nums)

    def __repr__(self) -> str:  # pragma: no cover
        return f"LexLabel({self.matching!r}, {self.cost_vector!r})"


@dataclass
class LabeledDiagram:
    """Arrangement plus labels: bottleneck per cell, optionally lex per face."""

    inst: Instance
    bisectors: tuple[Bisector, ...]
    arrangement: Arrangement
    cells: list[CellLabel] | None = None
    faces: dict[FaceRef, LexLabel] | None = None

    def cell_label(self, cid: int) -> CellLabel:
        assert self.cells is not None, "cell labels were not computed"
        return self.cells[cid]

    def face_lex(self, ref: FaceRef) -> LexLabel:
        assert self.faces is not None, "lex labels were not computed"
        return self.faces[ref]


def eval_E(inst: Instance, t: Point) -> tuple[Scalar, Matching]:
    """Exact bottleneck value at translation t, with a witness matching."""
    G = prune_candidates(inst, t)
    mu, _rank = bottleneck_matching(G)
    value = max(squared_edge_length(inst, e, t) for e in mu)
    return value, mu


def _label_at(inst: Instance, t: Point) -> CellLabel:
    G = prune_candidates(inst, t)
    mu, rank = bottleneck_matching(G)
    longest = G.longest_of(mu)
    assert G.w(longest) == rank
    return CellLabel(mu, longest, rank)


def _check_alignment(arr: Arrangement, bisectors: Sequence[Bisector]) -> None:
    if len(bisectors) != arr.n_lines:
        raise ValueError("one bisector per arrangement line required")
    for i, b in enumerate(bisectors):
        if b.line != arr.lines[i]:
            raise ValueError(f"bisector {i} does not match arrangement line {i}")


def label_cells_recompute(
    inst: Instance, arr: Arrangement, bisectors: Sequence[Bisector] = ()
) -> LabeledDiagram:
    """Independent per-cell labeling: prune + bottleneck at each centroid."""
    if bisectors:
        _check_alignment(arr, bisectors)
    cells = [
        _label_at(inst, arr.cell_centroid(cid)) for cid in range(arr.n_cells)
    ]
    return LabeledDiagram(inst, tuple(bisectors), arr, cells=cells)


class _TraversalState:
    """Shared (graph, matching) state for a run of equally-labeled cells."""

    __slots__ = ("G", "mu", "zset", "label")

    def __init__(self, G, mu: Matching):
        self.G = G
        self.mu = mu
        self.zset = set(G.class_of)
        self.label: CellLabel | None = None

    def cell_label(self) -> CellLabel:
        if self.label is None:
            longest = self.G.longest_of(self.mu)
            self.label = CellLabel(self.mu, longest, self.G.w(longest))
        return self.label


def label_cells_incremental(
    inst: Instance, arr: Arrangement, bisectors: Sequence[Bisector]
) -> LabeledDiagram:
    """Label every cell by walking the dual graph and updating on crossings.

    Breadth-first from cell 0 (deterministic); the first label comes from a
    recompute at the start centroid, every other label is derived by applying
    the crossed bisector's edge-pair swaps. Crossings whose pairs cannot touch
    the current candidate set share the predecessor's state object.
    """
    _check_alignment(arr, bisectors)
    t0 = arr.cell_centroid(0)
    G0 = prune_candidates(inst, t0)
    _mu, rank0 = bottleneck_matching(G0)
    mu0 = canonical_complete_matching(G0, rank0)

    # Per line: the pair list, the same-b edge set (any member in the
    # candidate set forces an update) and diff-b partner map (an update is
    # needed only when some pair has both edges present).
    pair_lists = []
    same_edges = []
    diff_partners = []
    for b in bisectors:
        pair_lists.append(tuple(b.edge_pairs))
        same_e: set[EdgeRef] = set()
        partners: dict[EdgeRef, tuple[EdgeRef, ...]] = {}
        acc: dict[EdgeRef, list[EdgeRef]] = {}
        for e1, e2, kind in b.edge_pairs:
            if kind == SAME_B:
                same_e.add(e1)
                same_e.add(e2)
            else:
                acc.setdefault(e1, []).append(e2)
                acc.setdefault(e2, []).append(e1)
        partners = {e: tuple(v) for e, v in acc.items()}
        same_edges.append(same_e)
        diff_partners.append(partners)

    n_cells = arr.n_cells
    states: list[object] = [None] * n_cells
    states[0] = _TraversalState(G0, mu0)
    queue = deque([0])
    ptr = arr._adj_ptr
    nbrs = arr._adj_nbr
    eids = arr._adj_eid
    eline = arr._eline
    done = 0
    while queue:
        c = queue.popleft()
        st = states[c]
        for i in range(int(ptr[c]), int(ptr[c + 1])):
            nbr = int(nbrs[i])
            if states[nbr] is not None:
                continue
            line = int(eline[eids[i]])
            zset = st.zset
            needs_update = not zset.isdisjoint(same_edges[line])
            if not needs_update:
                partners = diff_partners[line]
                for e in partners.keys() & zset:
                    if any(p in zset for p in partners[e]):
                        needs_update = True
                        break
            if needs_update:
                g2, mu2 = cross_bisector(st.G, st.mu, pair_lists[line])
                states[nbr] = _TraversalState(g2, mu2)
            else:
                states[nbr] = st
            queue.append(nbr)
        states[c] = st.cell_label()
        done += 1
    if done != n_cells:
        raise ContractViolation("dual cell graph is not connected")
    return LabeledDiagram(inst, tuple(bisectors), arr, cells=states)


# -- lex labeling --------------------------------------------------------------


def _int_anchors(inst: Instance) -> tuple[int, list[list[tuple[int, int]]]]:
    """Clear anchor denominators: returns M and (a - b) * M as integers."""
    dens = [
        c.denominator for p in inst.A + inst.B for c in (p.x, p.y)
    ]
    M = math.lcm(*dens)
    by_b: list[list[tuple[int, int]]] = []
    for b in range(inst.k):
        row = []
        for a in range(inst.n):
            d = inst.A[a] - inst.B[b]
            dx, dy = d.x * M, d.y * M
            assert dx.denominator == 1 and dy.denominator == 1
            row.append((int(dx), int(dy)))
        by_b.append(row)
    return M, by_b


def _screen_candidate_bits(
    fx: "_np.ndarray", fy: "_np.ndarray", anchors_f: "_np.ndarray", k: int
) -> list[list[int]]:
    """Float prefilter: per b, a bitmask over a of possible candidates.

    Sound superset of the k shortest (ties included): the threshold carries a
    relative margin far above float error, and the exact kernel re-trims.
    """
    F = fx.size
    n = anchors_f.shape[1]
    out: list[list[int]] = []
    weights = (1 << _np.arange(n, dtype=_np.int64)).astype(_np.int64)
    chunk = 1 << 18
    for b in range(k):
        bits = _np.empty(F, dtype=_np.int64)
        ax = anchors_f[b, :, 0]
        ay = anchors_f[b, :, 1]
        for lo in range(0, F, chunk):
            hi = min(lo + chunk, F)
            dx = fx[lo:hi, None] - ax[None, :]
            dy = fy[lo:hi, None] - ay[None, :]
            D = dx * dx + dy * dy
            kth = _np.partition(D, k - 1, axis=1)[:, k - 1]
            thr = kth * (1 + 1e-9) + 1e-12
            bits[lo:hi] = (D <= thr[:, None]).astype(_np.int64) @ weights
        out.append(bits.tolist())
    return out


_FULL_SCAN_LIMIT = 20_000  # faces; below this the float prefilter cannot pay off


def label_faces_lex(
    inst: Instance, arr: Arrangement, bisectors: Sequence[Bisector] = ()
) -> LabeledDiagram:
    """Lex-bottleneck label for every face (cells, edges, vertices).

    Each face gets an exact relative-interior rational sample; the candidate
    sets, ranks with ties active at that sample, and the lex-optimal matching
    are all computed in exact integer arithmetic over homogeneous coordinates
    (squared lengths share the denominator (M*w)^2 at one sample, so ranks
    reduce to integer comparisons). Large face counts get a vectorized float
    prefilter of the per-b candidate sets; the exact kernel re-trims, so the
    filter only bounds the work, never the answer.
    """
    if bisectors:
        _check_alignment(arr, bisectors)
    k, n = inst.k, inst.n
    M, anchors = _int_anchors(inst)

    refs: list[FaceRef] = []
    Xs: list[int] = []
    Ys: list[int] = []
    Ws: list[int] = []
    for ref in arr.iter_faces():
        x, y, w = arr.face_sample_triple(ref)
        refs.append(ref)
        Xs.append(x)
        Ys.append(y)
        Ws.append(w)

    F = len(refs)
    bits: list[list[int]] | None = None
    if F * n * k >= _FULL_SCAN_LIMIT:
        fx = _np.array([x / w for x, w in zip(Xs, Ws)])
        fy = _np.array([y / w for y, w in zip(Ys, Ws)])
        anchors_f = _np.array(anchors, dtype=_np.float64) / M
        bits = _screen_candidate_bits(fx, fy, anchors_f, k)

    faces: dict[FaceRef, LexLabel] = {}
    cells: list[CellLabel | None] = [None] * arr.n_cells
    base = k + 1
    full_mask = (1 << n) - 1
    memo: dict[tuple, tuple] = {}
    for i in range(F):
        W = Ws[i]
        XM = Xs[i] * M
        YM = Ys[i] * M
        WM = W * M
        kept: list[tuple[int, int, int]] = []  # (numerator, b, a)
        for b in range(k):
            mask = bits[b][i] if bits is not None else full_mask
            row = anchors[b]
            vals: list[tuple[int, int]] = []
            while mask:
                low = mask & -mask
                a = low.bit_length() - 1
                mask ^= low
                axm, aym = row[a]
                dx = XM - axm * W
                dy = YM - aym * W
                vals.append((dx * dx + dy * dy, a))
            vals.sort()
            thr = vals[k - 1][0]
            for N, a in vals:
                if N > thr:
                    break
                kept.append((N, b, a))
        distinct = sorted({N for N, _b, _a in kept})
        rank_of = {N: r for r, N in enumerate(distinct, start=1)}
        key = tuple(sorted((b, a, rank_of[N]) for N, b, a in kept))
        hit = memo.get(key)
        if hit is None:
            cols = sorted({a for _N, _b, a in kept})
            col_of = {a: j for j, a in enumerate(cols)}
            nranks = len(distinct)
            pow_table = [base**r for r in range(nranks + 2)]
            infinity = pow_table[nranks + 1] * (k + 1)
            cost = [[infinity] * len(cols) for _ in range(k)]
            for N, b, a in kept:
                cost[b][col_of[a]] = pow_table[rank_of[N]]
            chosen = assignment_by_cost(cost, infinity)
            assign = tuple(cols[j] for j in chosen)
            memo[key] = assign
        else:
            assign = hit
        num_of = {(b, a): N for N, b, a in kept}
        mu = matching_from_map({b: a for b, a in enumerate(assign)})
        nums = sorted((num_of[(e.b, e.a)] for e in mu), reverse=True)
        label = LexLabel(mu, tuple(nums), WM * WM)
        ref = refs[i]
        faces[ref] = label
        if ref.dim == 2:
            top = max(mu, key=lambda e: (num_of[(e.b, e.a)], e))
            cells[ref.index] = CellLabel(
                mu, top, rank_of[num_of[(top.b, top.a)]]
            )
    return LabeledDiagram(inst, tuple(bisectors), arr, cells=cells, faces=faces)


# -- orchestration --------------------------------------------------------------


def build_diagram(
    inst: Instance,
    *,
    must_contain: Sequence[Point] = (),
    keep_all_bisectors: bool = False,
    labels: str | None = "incremental",
    lex: bool = False,
) -> LabeledDiagram:
    """Full pipeline: bisectors, reduction, arrangement, labels.

    The bounding box always contains every anchor a - b (so the global
    bottleneck optimum is inside) plus any extra query points supplied.
    """
    bis = all_bisectors(inst)
    if not keep_all_bisectors:
        bis = used_bisectors(inst, bis)
    anchors = [inst.anchor(e) for e in inst.edges()]
    arr = build_arrangement(
        [b.line for b in bis], must_contain=list(anchors) + list(must_contain)
    )
    diagram: LabeledDiagram
    if lex:
        diagram = label_faces_lex(inst, arr, bis)
        if labels == "incremental":
            diagram.cells = label_cells_incremental(inst, arr, bis).cells
        elif labels == "recompute":
            diagram.cells = label_cells_recompute(inst, arr, bis).cells
        return diagram
    if labels == "incremental":
        return label_cells_incremental(inst, arr, bis)
    if labels == "recompute":
        return label_cells_recompute(inst, arr, bis)
    if labels is None:
        return LabeledDiagram(inst, tuple(bis), arr)
    raise ValueError(f"unknown labels mode {labels!r}")
