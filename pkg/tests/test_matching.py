import random
from fractions import Fraction

import pytest

from botmatch.geom import EdgeRef, Instance, Point, point, squared_edge_length
from botmatch.matching import (
    DIFF_B,
    SAME_B,
    CandidateGraph,
    NoCompleteMatching,
    bottleneck_matching,
    canonical_complete_matching,
    cross_bisector,
    lex_bottleneck_matching,
    matching_map,
    max_matching,
    prune_candidates,
    update_on_swap,
)
from botmatch.oracle import brute_force_E, brute_force_lex

E = EdgeRef


def _pts(coords):
    return tuple(point(x, y) for x, y in coords)


def _mk(a_coords, b_coords):
    return Instance(_pts(a_coords), _pts(b_coords))


def _random_instance(rng, n_max=6, k_max=3, span=7):
    n = rng.randint(2, n_max)
    k = rng.randint(1, min(k_max, n))
    pts: set[tuple[int, int]] = set()
    while len(pts) < n + k:
        pts.add((rng.randint(-span, span), rng.randint(-span, span)))
    flat = sorted(pts)
    rng.shuffle(flat)
    return _mk(flat[:n], flat[n : n + k])


def _random_t(rng):
    return Point(
        Fraction(rng.randint(-80, 80), 16), Fraction(rng.randint(-80, 80), 16)
    )


# -- pruning ------------------------------------------------------------------


def test_prune_collinear_example():
    inst = _mk([(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)], [(0, 0), (4, 0)])
    G = prune_candidates(inst, point(0, 0))
    assert G.by_b[0] == {E(0, 0), E(1, 0)}
    assert G.by_b[1] == {E(4, 1), E(3, 1)}
    assert len(list(G.edges())) == 4
    # a0b0 and a4b1 share a difference vector: one class at rank 1. The two
    # rank-2 edges are inequivalent but tie in length at this translation.
    assert G.w(E(0, 0)) == G.w(E(4, 1)) == 1
    assert G.w(E(1, 0)) == G.w(E(3, 1)) == 2
    assert G.class_of[E(0, 0)] == G.class_of[E(4, 1)]
    assert G.rank_count == 2 and len(G.levels[1]) == 2


def test_prune_single_edge():
    G = prune_candidates(_mk([(3, 4)], [(0, 0)]), point(1, 1))
    assert set(G.edges()) == {E(0, 0)}
    assert G.w(E(0, 0)) == 1


def test_prune_tie_extension():
    # k-th and (k+1)-th incident edges equally long: both stay.
    inst = _mk([(1, 0), (-1, 0), (5, 0)], [(0, 0)])
    G = prune_candidates(inst, point(0, 0))
    assert G.by_b[0] == {E(0, 0), E(1, 0)}


def test_prune_candidate_sets_are_k_smallest():
    rng = random.Random(7)
    for _ in range(30):
        inst = _random_instance(rng)
        t = _random_t(rng)
        G = prune_candidates(inst, t)
        G.check_invariants()
        for b in range(inst.k):
            kept = G.by_b[b]
            assert len(kept) >= inst.k
            worst = max(squared_edge_length(inst, e, t) for e in kept)
            for a in range(inst.n):
                e = E(a, b)
                if e not in kept:
                    assert squared_edge_length(inst, e, t) > worst


# -- maximum matching and bottleneck ------------------------------------------


def test_max_matching_small():
    G = CandidateGraph.from_ranks(2, {E(0, 0): 1, E(1, 0): 2, E(0, 1): 3, E(1, 1): 4})
    assert len(max_matching(G, 4)) == 2
    assert max_matching(G, 0) == ()
    star = CandidateGraph.from_ranks(3, {E(0, 0): 1, E(0, 1): 2, E(0, 2): 3})
    assert len(max_matching(star, 3)) == 1


def test_bottleneck_example():
    G = CandidateGraph.from_ranks(2, {E(0, 0): 1, E(0, 1): 2, E(1, 1): 3, E(1, 0): 4})
    mu, rank = bottleneck_matching(G)
    assert mu == (E(0, 0), E(1, 1))
    assert rank == 3


def test_bottleneck_k1_and_tied_ranks():
    G = CandidateGraph.from_ranks(1, {E(2, 0): 1, E(0, 0): 2})
    assert bottleneck_matching(G) == ((E(2, 0),), 1)
    tied = CandidateGraph.from_ranks(
        2, {E(0, 0): 1, E(1, 0): 1, E(0, 1): 1, E(1, 1): 1}
    )
    mu, rank = bottleneck_matching(tied)
    assert rank == 1 and len(mu) == 2


def test_no_complete_matching():
    with pytest.raises(NoCompleteMatching):
        bottleneck_matching(CandidateGraph.from_ranks(2, {E(0, 0): 1}))
    shared_a = CandidateGraph.from_ranks(2, {E(0, 0): 1, E(0, 1): 2})
    with pytest.raises(NoCompleteMatching):
        bottleneck_matching(shared_a)
    with pytest.raises(NoCompleteMatching):
        lex_bottleneck_matching(shared_a)


def test_bottleneck_matches_brute_force():
    rng = random.Random(11)
    for _ in range(40):
        inst = _random_instance(rng)
        t = _random_t(rng)
        G = prune_candidates(inst, t)
        mu, rank = bottleneck_matching(G)
        value = max(squared_edge_length(inst, e, t) for e in mu)
        ref_value, _ = brute_force_E(inst, t)
        assert value == ref_value
        assert rank == max(G.w(e) for e in mu)
        matching_map(mu)  # validates injectivity


# -- lexicographic bottleneck -------------------------------------------------


def test_lex_example():
    G = CandidateGraph.from_ranks(
        2,
        {E(0, 0): 1, E(1, 1): 2, E(1, 0): 3, E(0, 1): 4, E(2, 0): 5, E(2, 1): 6},
    )
    mu, ranks = lex_bottleneck_matching(G)
    assert mu == (E(0, 0), E(1, 1))
    assert ranks == (2, 1)


def test_lex_matches_brute_force():
    # Also checks that pruning kept a lex-optimal matching (the candidate
    # sets are supersets of b-minimal sets).
    rng = random.Random(13)
    for _ in range(30):
        inst = _random_instance(rng, n_max=5, k_max=3)
        t = _random_t(rng)
        G = prune_candidates(inst, t)
        mu, ranks = lex_bottleneck_matching(G)
        vec = tuple(
            sorted((squared_edge_length(inst, e, t) for e in mu), reverse=True)
        )
        assert vec == brute_force_lex(inst, t)
        assert ranks == tuple(sorted((G.w(e) for e in mu), reverse=True))


def test_canonical_complete_matching():
    G = CandidateGraph.from_ranks(2, {E(0, 0): 1, E(1, 0): 2, E(0, 1): 3, E(1, 1): 4})
    assert canonical_complete_matching(G, 4) == (E(0, 0), E(1, 1))
    forced = CandidateGraph.from_ranks(2, {E(0, 0): 1, E(0, 1): 2, E(1, 0): 3})
    # b0 cannot take a0 (b1 needs it); the probe forces b0 -> a1.
    assert canonical_complete_matching(forced, 3) == (E(1, 0), E(0, 1))


# -- crossing updates ---------------------------------------------------------


def test_update_rank_swap_improves_matching():
    G = CandidateGraph.from_ranks(2, {E(0, 0): 1, E(1, 1): 2, E(2, 1): 3})
    mu = (E(0, 0), E(1, 1))
    g2, mu2 = update_on_swap(G, mu, (E(1, 1), E(2, 1)), SAME_B)
    assert mu2 == (E(0, 0), E(2, 1))
    assert g2.w(E(2, 1)) == 2 and g2.w(E(1, 1)) == 3
    assert max(g2.w(e) for e in mu2) == 2
    # inputs untouched
    assert G.w(E(2, 1)) == 3 and mu == (E(0, 0), E(1, 1))


def test_update_swap_far_from_bottleneck():
    G = CandidateGraph.from_ranks(2, {E(0, 0): 1, E(1, 1): 2, E(2, 0): 3, E(3, 1): 4})
    mu = (E(0, 0), E(1, 1))
    g2, mu2 = update_on_swap(G, mu, (E(2, 0), E(3, 1)), DIFF_B)
    assert mu2 == mu
    assert g2.w(E(3, 1)) == 3 and g2.w(E(2, 0)) == 4


def test_update_same_b_replaces_nonmatching_edge():
    G = CandidateGraph.from_ranks(2, {E(0, 0): 1, E(1, 1): 2, E(2, 0): 3, E(3, 1): 4})
    mu = (E(0, 0), E(1, 1))
    g2, mu2 = update_on_swap(G, mu, (E(2, 0), E(9, 0)), SAME_B)
    assert mu2 == mu
    assert E(2, 0) not in g2.class_of
    assert g2.w(E(9, 0)) == 3
    assert g2.by_b[0] == {E(0, 0), E(9, 0)}


def test_update_same_b_replaces_matching_edge():
    G = CandidateGraph.from_ranks(2, {E(0, 0): 1, E(2, 1): 2, E(1, 0): 3, E(3, 1): 4})
    mu = (E(0, 0), E(2, 1))
    g2, mu2 = update_on_swap(G, mu, (E(0, 0), E(5, 0)), SAME_B)
    assert mu2 == (E(5, 0), E(2, 1))
    assert g2.w(E(5, 0)) == 1
    assert E(0, 0) not in g2.class_of


def test_update_ignores_pairs_outside_candidates():
    G = CandidateGraph.from_ranks(2, {E(0, 0): 1, E(1, 1): 2})
    mu = (E(0, 0), E(1, 1))
    g2, mu2 = update_on_swap(G, mu, (E(7, 0), E(8, 0)), SAME_B)
    assert mu2 == mu and set(g2.edges()) == set(G.edges())
    g3, mu3 = update_on_swap(G, mu, (E(7, 0), E(8, 1)), DIFF_B)
    assert mu3 == mu and set(g3.edges()) == set(G.edges())


def test_cross_bisector_groups_class_pairs():
    # Two edge pairs witnessing the same class pair: one transposition, not
    # two. Naive per-pair processing would cancel itself out.
    members = {"P": {E(0, 0), E(1, 1)}, "Q": {E(2, 0), E(3, 1)}}
    G = CandidateGraph(2, [["P"], ["Q"]], members, class_key=lambda e: ("edge", e))
    mu = (E(0, 0), E(1, 1))
    pairs = [(E(0, 0), E(2, 0), SAME_B), (E(1, 1), E(3, 1), SAME_B)]
    g2, mu2 = cross_bisector(G, mu, pairs)
    assert g2.w(E(2, 0)) == 1 and g2.w(E(0, 0)) == 2
    assert mu2 == (E(2, 0), E(3, 1))


def _random_rank_graph(rng):
    # |E_b| >= k per b, as pruning guarantees; without that floor the
    # crossing rules are not meant to hold.
    k = rng.randint(1, 4)
    n_a = k + rng.randint(0, 3)
    edges = set()
    for b in range(k):
        edges.update(E(a, b) for a in rng.sample(range(n_a), k))
    for a in range(n_a):
        for b in range(k):
            if rng.random() < 0.4:
                edges.add(E(a, b))
    order = sorted(edges)
    rng.shuffle(order)
    return CandidateGraph.from_ranks(k, {e: i + 1 for i, e in enumerate(order)}), n_a


def test_update_sequences_match_recompute():
    rng = random.Random(17)
    steps = 0
    for _ in range(60):
        G, n_a = _random_rank_graph(rng)
        try:
            mu, _ = bottleneck_matching(G)
        except NoCompleteMatching:
            continue
        for _ in range(5):
            if G.rank_count >= 2 and rng.random() < 0.6:
                i = rng.randrange(G.rank_count - 1)
                x = min(G.members[G.levels[i][0]])
                y = min(G.members[G.levels[i + 1][0]])
                kind = SAME_B if x.b == y.b else DIFF_B
                G, mu = update_on_swap(G, mu, (x, y), kind)
            else:
                b = rng.randrange(G.k)
                x = max(G.by_b[b], key=lambda e: (G.w(e), e))
                free = [a for a in range(n_a + 2) if E(a, b) not in G.class_of]
                y = E(rng.choice(free), b)
                G, mu = update_on_swap(G, mu, (x, y), SAME_B)
            fresh = CandidateGraph.from_ranks(G.k, {e: G.w(e) for e in G.edges()})
            _, ref_rank = bottleneck_matching(fresh)
            assert len(mu) == G.k
            assert max(G.w(e) for e in mu) == ref_rank
            matching_map(mu)
            steps += 1
    assert steps >= 250
