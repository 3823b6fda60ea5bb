"""Bottleneck and lexicographic assignment on rank-weighted candidate graphs.

The candidate graph of a translation keeps, per matched-side point b, the k
shortest edges incident to b (extended over ties), so a complete matching
optimal for the bottleneck or lexicographic-bottleneck cost always survives
inside it. Edge weights are dense ranks over the distinct squared lengths;
edges of equal length share a rank. Crossing a bisector in translation space
changes the graph by one of two local moves, and the matching follows with
one augmentation or one thresholded rematch; see ``update_on_swap``.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Hashable, Iterable, Sequence

from .geom import EdgeRef, Instance, Point, squared_edge_length


class NoCompleteMatching(Exception):
    """The candidate graph cannot match every b (precondition failure)."""


class ContractViolation(Exception):
    """An internal matching invariant broke; indicates a bug, not bad input."""


Matching = tuple[EdgeRef, ...]


def matching_from_map(assign: dict[int, int]) -> Matching:
    """Canonical matching value: EdgeRefs sorted by b index."""
    return tuple(EdgeRef(assign[b], b) for b in sorted(assign))


def matching_map(mu: Matching) -> dict[int, int]:
    out: dict[int, int] = {}
    for e in mu:
        if e.b in out:
            raise ContractViolation(f"b index {e.b} matched twice")
        out[e.b] = e.a
    if len({e.a for e in mu}) != len(mu):
        raise ContractViolation("a index matched twice")
    return out


class CandidateGraph:
    """Rank-weighted bipartite graph on the per-b candidate edge sets.

    ``levels`` lists equivalence-class keys in increasing squared-length
    order; the rank of an edge is the 1-based index of its class's level.
    A level holds more than one class only when the construction translation
    ties two inequivalent edges exactly (samples on bisectors); the swap
    machinery requires singleton levels, which cell interiors guarantee.
    """

    __slots__ = ("k", "levels", "members", "class_of", "by_b", "class_key")

    def __init__(
        self,
        k: int,
        levels: list[list[Hashable]],
        members: dict[Hashable, set[EdgeRef]],
        class_key: Callable[[EdgeRef], Hashable],
    ) -> None:
        self.k = k
        self.levels = levels
        self.members = members
        self.class_key = class_key
        self.class_of: dict[EdgeRef, Hashable] = {}
        self.by_b: dict[int, set[EdgeRef]] = {b: set() for b in range(k)}
        for key, edges in members.items():
            for e in edges:
                self.class_of[e] = key
                self.by_b[e.b].add(e)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_ranks(
        cls, k: int, ranked_edges: dict[EdgeRef, int]
    ) -> "CandidateGraph":
        """Test helper: explicit ranks, every rank its own class."""
        by_rank: dict[int, set[EdgeRef]] = {}
        for e, r in ranked_edges.items():
            by_rank.setdefault(r, set()).add(e)
        ranks = sorted(by_rank)
        levels: list[list[Hashable]] = [[("rank", r)] for r in ranks]
        members = {("rank", r): by_rank[r] for r in ranks}
        return cls(k, levels, members, class_key=lambda e: ("edge", e))

    def clone(self) -> "CandidateGraph":
        g = object.__new__(CandidateGraph)
        g.k = self.k
        g.levels = [list(level) for level in self.levels]
        g.members = {key: set(v) for key, v in self.members.items()}
        g.class_key = self.class_key
        g.class_of = dict(self.class_of)
        g.by_b = {b: set(v) for b, v in self.by_b.items()}
        return g

    # -- queries -----------------------------------------------------------

    @property
    def rank_count(self) -> int:
        return len(self.levels)

    def edges(self) -> Iterable[EdgeRef]:
        return self.class_of.keys()

    def level_of(self, key: Hashable) -> int:
        for i, level in enumerate(self.levels):
            if key in level:
                return i
        raise KeyError(key)

    def w(self, e: EdgeRef) -> int:
        """Rank weight of a candidate edge (1-based)."""
        return self.level_of(self.class_of[e]) + 1

    def longest_of(self, mu: Matching) -> EdgeRef:
        return max(mu, key=lambda e: (self.w(e), e))

    def check_invariants(self) -> None:
        for b, edges in self.by_b.items():
            if len(edges) < self.k:
                raise ContractViolation(f"|E_b| < k for b={b}")
        for level in self.levels:
            if not level:
                raise ContractViolation("empty rank level")
            for key in level:
                if not self.members.get(key):
                    raise ContractViolation("empty class in a level")

    # -- mutations used by crossings ----------------------------------------

    def _singleton_level_index(self, key: Hashable) -> int:
        i = self.level_of(key)
        if len(self.levels[i]) != 1:
            raise ContractViolation("rank tie across classes during a swap")
        return i

    def _remove_edge(self, e: EdgeRef) -> Hashable:
        key = self.class_of.pop(e)
        self.members[key].discard(e)
        self.by_b[e.b].discard(e)
        if not self.members[key]:
            del self.members[key]
            i = self.level_of(key)
            self.levels[i].remove(key)
            if not self.levels[i]:
                del self.levels[i]
        return key

    def _add_edge(self, e: EdgeRef, key: Hashable, below: Hashable | None) -> None:
        if key not in self.members:
            self.members[key] = set()
            if below is None:
                raise ContractViolation("new class needs an insertion anchor")
            self.levels.insert(self._singleton_level_index(below), [key])
        self.class_of[e] = key
        self.members[key].add(e)
        self.by_b[e.b].add(e)


def prune_candidates(inst: Instance, t: Point) -> CandidateGraph:
    """Candidate graph at translation ``t``: k shortest edges per b, tie-closed.

    Ranks are dense over the distinct squared lengths occurring in the kept
    union, so inequivalent edges share a rank exactly when ``t`` lies on
    their bisector.
    """
    k = inst.k
    kept: list[tuple] = []  # (value, diff, edge)
    for b in range(k):
        incident = sorted(
            (squared_edge_length(inst, EdgeRef(a, b), t), a) for a in range(inst.n)
        )
        threshold = incident[k - 1][0]
        for value, a in incident:
            if value > threshold:
                break
            e = EdgeRef(a, b)
            kept.append((value, inst.diff(e), e))

    values: dict[Hashable, object] = {}
    members: dict[Hashable, set[EdgeRef]] = {}
    for value, diff, e in kept:
        members.setdefault(diff, set()).add(e)
        values[diff] = value
    distinct = sorted(set(values.values()))
    index = {v: i for i, v in enumerate(distinct)}
    levels: list[list[Hashable]] = [[] for _ in distinct]
    for key in sorted(members, key=lambda d: (d.x, d.y)):
        levels[index[values[key]]].append(key)
    return CandidateGraph(k, levels, members, class_key=inst.diff)


# -- maximum matching ---------------------------------------------------------


def _adjacency(G: CandidateGraph, rank_cap: int) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {b: [] for b in range(G.k)}
    for i, level in enumerate(G.levels[: max(rank_cap, 0)]):
        for key in level:
            for e in G.members[key]:
                adj[e.b].append(e.a)
    for b in adj:
        adj[b].sort()
    return adj


def _hopcroft_karp(adj: dict[int, list[int]], k: int) -> dict[int, int]:
    """Maximum matching; returns the b -> a assignment."""
    INF = float("inf")
    match_b: dict[int, int | None] = {b: None for b in range(k)}
    match_a: dict[int, int] = {}
    while True:
        dist: dict[int, float] = {}
        queue: deque[int] = deque()
        for b in range(k):
            if match_b[b] is None:
                dist[b] = 0
                queue.append(b)
        found = False
        while queue:
            b = queue.popleft()
            for a in adj[b]:
                nb = match_a.get(a)
                if nb is None:
                    found = True
                elif nb not in dist:
                    dist[nb] = dist[b] + 1
                    queue.append(nb)
        if not found:
            break

        def dfs(b: int) -> bool:
            for a in adj[b]:
                nb = match_a.get(a)
                if nb is None or (
                    dist.get(nb) == dist[b] + 1 and dfs(nb)
                ):
                    match_b[b] = a
                    match_a[a] = b
                    return True
            dist[b] = INF
            return False

        for b in range(k):
            if match_b[b] is None:
                dfs(b)
    return {b: a for b, a in match_b.items() if a is not None}


def _kuhn_augment(
    adj: dict[int, list[int]], match_a: dict[int, int], match_b: dict[int, int], b: int
) -> bool:
    """One augmenting-path attempt from exposed ``b`` (simple DFS)."""

    def dfs(u: int, seen: set[int]) -> bool:
        for a in adj[u]:
            if a in seen:
                continue
            seen.add(a)
            if a not in match_a or dfs(match_a[a], seen):
                match_a[a] = u
                match_b[u] = a
                return True
        return False

    return dfs(b, set())


def max_matching(G: CandidateGraph, rank_cap: int) -> Matching:
    """Maximum matching among edges of rank <= rank_cap (Hopcroft-Karp).

    A second, independent augmenting-path search verifies maximality before
    returning; a success there would be a bug in this module.
    """
    adj = _adjacency(G, rank_cap)
    assign = _hopcroft_karp(adj, G.k)
    match_a = {a: b for b, a in assign.items()}
    for b in range(G.k):
        if b not in assign and _kuhn_augment(adj, match_a, dict(assign), b):
            raise ContractViolation("augmenting path found after maximum matching")
    return matching_from_map(assign)


def bottleneck_matching(G: CandidateGraph) -> tuple[Matching, int]:
    """Complete matching minimizing the maximum edge rank, plus that rank.

    Binary search over ranks; feasibility is monotone in the rank cap and is
    asserted to be so across all probes of the search.
    """
    for b in range(G.k):
        if not G.by_b[b]:
            raise NoCompleteMatching(f"b index {b} has no candidate edges")
    probes: dict[int, bool] = {}

    def feasible(r: int) -> tuple[bool, Matching]:
        mu = max_matching(G, r)
        ok = len(mu) == G.k
        probes[r] = ok
        return ok, mu

    lo, hi = 1, G.rank_count
    ok, best = feasible(hi)
    if not ok:
        raise NoCompleteMatching("no complete matching in the candidate graph")
    while lo < hi:
        mid = (lo + hi) // 2
        ok, mu = feasible(mid)
        if ok:
            hi, best = mid, mu
        else:
            lo = mid + 1
    if lo > 1:
        ok, _ = feasible(lo - 1)
        if ok:
            raise ContractViolation("bottleneck rank not minimal")
    if any(
        r1 < r2 and probes[r1] and not probes[r2] for r1 in probes for r2 in probes
    ):
        raise ContractViolation("matching feasibility not monotone in rank cap")
    return best, lo


def canonical_complete_matching(G: CandidateGraph, rank_cap: int) -> Matching:
    """The complete matching within the cap whose (b, a) pair list is lex-least.

    Used where labels should not depend on search order. Greedy per b with a
    feasibility probe per candidate a.
    """
    used_a: set[int] = set()
    chosen: dict[int, int] = {}
    adj = _adjacency(G, rank_cap)

    def completable() -> bool:
        rest = {
            b: [a for a in adj[b] if a not in used_a]
            for b in range(G.k)
            if b not in chosen
        }
        if not rest:
            return True
        assign = _hopcroft_karp({i: rest[b] for i, b in enumerate(sorted(rest))}, len(rest))
        return len(assign) == len(rest)

    for b in range(G.k):
        placed = False
        for a in adj[b]:
            if a in used_a:
                continue
            chosen[b] = a
            used_a.add(a)
            if completable():
                placed = True
                break
            del chosen[b]
            used_a.discard(a)
        if not placed:
            raise NoCompleteMatching(f"no completion for b index {b}")
    return matching_from_map(chosen)


# -- lexicographic bottleneck -------------------------------------------------


def assignment_by_cost(cost: list[list[int]], infinity: int) -> list[int]:
    """Minimum-cost row-to-column assignment (Hungarian with potentials).

    ``cost`` is rows x cols with len(rows) <= len(cols); entries are exact
    integers, ``infinity`` marks forbidden pairs. Returns the matched column
    per row. Raises NoCompleteMatching if only forbidden assignments exist.
    """
    k = len(cost)
    n_cols = len(cost[0]) if cost else 0
    if n_cols < k:
        raise NoCompleteMatching("fewer columns than rows to assign")
    u = [0] * (k + 1)
    v = [0] * (n_cols + 1)
    way = [0] * (n_cols + 1)
    p = [0] * (n_cols + 1)  # p[j] = row matched to column j (1-based rows)
    huge = infinity * (k + 2)
    for i in range(1, k + 1):
        p[0] = i
        j0 = 0
        minv = [huge] * (n_cols + 1)
        used = [False] * (n_cols + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = huge
            j1 = 0
            row = cost[i0 - 1]
            ui = u[i0]
            for j in range(1, n_cols + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - ui - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n_cols + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    cols = [-1] * k
    for j in range(1, n_cols + 1):
        if p[j]:
            cols[p[j] - 1] = j - 1
    if any(c < 0 for c in cols) or any(
        cost[i][c] >= infinity for i, c in enumerate(cols)
    ):
        raise NoCompleteMatching("no assignment avoids forbidden pairs")
    return cols


def lex_bottleneck_matching(G: CandidateGraph) -> tuple[Matching, tuple[int, ...]]:
    """Complete matching with lexicographically least sorted-decreasing ranks.

    Exact reduction to minimum-cost assignment: cost (k+1)^w(e) in big
    integers. A matching holds at most k edges, so every rank multiset maps
    to a distinct base-(k+1) numeral and cost order equals lexicographic
    order of the sorted rank vectors.
    """
    k = G.k
    a_vertices = sorted({e.a for e in G.edges()})
    if len(a_vertices) < k:
        raise NoCompleteMatching("fewer candidate a vertices than k")
    col_of = {a: i for i, a in enumerate(a_vertices)}
    n_cols = len(a_vertices)
    base = k + 1
    infinity = base ** (G.rank_count + 1) * (k + 1)
    cost = [[infinity] * n_cols for _ in range(k)]
    for e in G.edges():
        cost[e.b][col_of[e.a]] = base ** G.w(e)
    cols = assignment_by_cost(cost, infinity)
    assign = {b: a_vertices[j] for b, j in enumerate(cols)}
    mu = matching_from_map(assign)
    ranks = tuple(sorted((G.w(e) for e in mu), reverse=True))
    return mu, ranks


# -- crossing updates ---------------------------------------------------------

SAME_B = "same_b"
DIFF_B = "diff_b"


def _augment_exposed(
    G: CandidateGraph, partial: dict[int, int], exposed_b: int, cap: int
) -> dict[int, int] | None:
    adj = _adjacency(G, cap)
    match_a = {a: b for b, a in partial.items()}
    match_b = dict(partial)
    if _kuhn_augment(adj, match_a, match_b, exposed_b):
        return match_b
    return None


def _cross_class_pair(
    G: CandidateGraph,
    mu_map: dict[int, int],
    membership: list[tuple[EdgeRef, EdgeRef]],
    swap_keys: tuple[Hashable, Hashable] | None,
) -> dict[int, int]:
    """Apply one class pair's crossing to ``G`` (mutated) and the matching.

    ``membership`` holds (leaving, entering) same-b pairs; ``swap_keys`` is
    set when both classes hold candidate edges so their ranks transpose.
    """
    exiting_key = None
    entering_key = None
    if membership:
        exiting_key = G.class_of[membership[0][0]]
        entering_key = G.class_key(membership[0][1])
        for x, y in membership:
            if G.class_of.get(x) != exiting_key or G.class_key(y) != entering_key:
                raise ContractViolation("inconsistent classes in one crossing")

    removed: list[tuple[EdgeRef, EdgeRef]] = []
    if membership:
        had_entering = entering_key in G.members
        if not had_entering:
            # The entering class sits directly above the exiting one on this
            # side of the bisector; the swap below moves it underneath.
            i = G._singleton_level_index(exiting_key)
            G.levels.insert(i + 1, [entering_key])
            G.members[entering_key] = set()
        for x, y in membership:
            G.members[exiting_key].discard(x)
            del G.class_of[x]
            G.by_b[x.b].discard(x)
            G.class_of[y] = entering_key
            G.members[entering_key].add(y)
            G.by_b[y.b].add(y)
            removed.append((x, y))
        survivor = bool(G.members[exiting_key])
        if not survivor:
            del G.members[exiting_key]
            i = G.level_of(exiting_key)
            G.levels[i].remove(exiting_key)
            if not G.levels[i]:
                del G.levels[i]
        lower_key = entering_key
        if survivor:
            i = G._singleton_level_index(exiting_key)
            j = G._singleton_level_index(entering_key)
            if j != i + 1:
                raise ContractViolation("entering class not directly above exiting")
            G.levels[i], G.levels[j] = G.levels[j], G.levels[i]
    else:
        assert swap_keys is not None
        key1, key2 = swap_keys
        i = G._singleton_level_index(key1)
        j = G._singleton_level_index(key2)
        if abs(i - j) != 1:
            raise ContractViolation("crossing classes not rank-adjacent")
        G.levels[i], G.levels[j] = G.levels[j], G.levels[i]
        lower_key = G.levels[min(i, j)][0]

    # Matching maintenance. First restore completeness after removals.
    exposed: list[int] = []
    for x, _ in removed:
        if mu_map.get(x.b) == x.a:
            del mu_map[x.b]
            exposed.append(x.b)
    for b in sorted(exposed):
        cap = max(
            [G.level_of(G.class_of[EdgeRef(ma, mb)]) + 1 for mb, ma in mu_map.items()]
            + [G.level_of(entering_key) + 1],
        )
        result = _augment_exposed(G, mu_map, b, cap)
        if result is None:
            result = _augment_exposed(G, mu_map, b, cap + 1)
        if result is None:
            raise ContractViolation("lost completeness after a candidate swap")
        mu_map = result

    if len(mu_map) != G.k:
        raise ContractViolation("matching incomplete after crossing")

    # Rank transposition may let the matching drop below its old bottleneck:
    # only possible when the longest edge sits directly above the lower class.
    j_low = G.level_of(lower_key) + 1
    longest_rank = max(G.level_of(G.class_of[EdgeRef(a, b)]) + 1 for b, a in mu_map.items())
    if longest_rank == j_low + 1:
        candidate = max_matching(G, j_low)
        if len(candidate) == G.k:
            mu_map = matching_map(candidate)
    return mu_map


def update_on_swap(
    G: CandidateGraph,
    mu: Matching,
    pair: tuple[EdgeRef, EdgeRef],
    kind: str,
) -> tuple[CandidateGraph, Matching]:
    """Carry a bottleneck matching across one bisector crossing.

    ``pair`` are the two edges whose lengths tie on the crossed bisector.
    For ``same_b`` pairs with exactly one edge in the candidate set, the
    contained edge leaves and the other enters (the per-b candidate boundary
    moves); a removed matching edge is repaired by one augmentation capped
    near the old bottleneck rank. For pairs with both edges present the two
    adjacent ranks transpose and the matching is rethresholded exactly when
    its longest rank sits just above the transposition (this is the only
    case the bottleneck can improve).

    Returns fresh values; inputs are not mutated.
    """
    if len(mu) != G.k:
        raise ContractViolation("matching must be complete before a crossing")
    if kind not in (SAME_B, DIFF_B):
        raise ValueError(f"unknown crossing kind {kind!r}")
    e1, e2 = pair
    if kind == SAME_B and e1.b != e2.b:
        raise ValueError("same_b crossing with distinct b indices")
    in1, in2 = e1 in G.class_of, e2 in G.class_of
    g = G.clone()
    mu_map = matching_map(mu)
    if not in1 and not in2:
        return g, mu  # nothing the candidate set can see
    if in1 != in2:
        if kind == DIFF_B:
            return g, mu  # only same-b pairs move the candidate boundary
        x, y = (e1, e2) if in1 else (e2, e1)
        mu_map = _cross_class_pair(g, mu_map, [(x, y)], None)
    else:
        k1, k2 = g.class_of[e1], g.class_of[e2]
        if k1 == k2:
            raise ContractViolation("crossing pair within one equivalence class")
        mu_map = _cross_class_pair(g, mu_map, [], (k1, k2))
    return g, matching_from_map(mu_map)


def cross_bisector(
    G: CandidateGraph,
    mu: Matching,
    pairs: Sequence[tuple[EdgeRef, EdgeRef, str]],
) -> tuple[CandidateGraph, Matching]:
    """Apply a whole bisector crossing: every edge pair tying on one line.

    Pairs are grouped by the (unordered) pair of equivalence classes they
    connect; each class pair crosses once, no matter how many edge pairs
    witness it. Distinct class pairs on one line never interact (their rank
    positions are disjoint), so groups apply sequentially.
    """
    if len(mu) != G.k:
        raise ContractViolation("matching must be complete before a crossing")
    g = G.clone()
    mu_map = matching_map(mu)
    groups: dict[frozenset, dict] = {}
    for e1, e2, kind in pairs:
        in1, in2 = e1 in g.class_of, e2 in g.class_of
        if not in1 and not in2:
            continue
        key1 = g.class_of[e1] if in1 else g.class_key(e1)
        key2 = g.class_of[e2] if in2 else g.class_key(e2)
        group = groups.setdefault(
            frozenset((key1, key2)), {"membership": [], "both": False}
        )
        if in1 != in2:
            if kind == SAME_B:
                x, y = (e1, e2) if in1 else (e2, e1)
                group["membership"].append((x, y))
        else:
            group["both"] = True
            group["keys"] = (key1, key2)
    for group in groups.values():
        if group["membership"]:
            mu_map = _cross_class_pair(g, mu_map, group["membership"], None)
        elif group["both"]:
            mu_map = _cross_class_pair(g, mu_map, [], group["keys"])
    return g, matching_from_map(mu_map)
