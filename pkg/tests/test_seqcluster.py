import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from behavior_mining import seqcluster as sc
from behavior_mining.errors import BadK, EmptyCluster, TooFewClusters, TooFewItems
from behavior_mining.seqcluster import ActivityProfile, BehaviorType

from oracles import edit_path_search, naive_agglomerate

seqs = st.text(alphabet="cps", max_size=12)


def test_levenshtein_examples():
    assert sc.levenshtein("", "ccs") == 3
    assert sc.levenshtein("ccs", "cps") == 1
    assert sc.levenshtein("kitten", "sitting") == 3
    assert sc.levenshtein("abc", "abc") == 0


@given(seqs, seqs)
def test_levenshtein_matches_recursion(a, b):
    assert sc.levenshtein(a, b) == edit_path_search(a, b)


@given(seqs, seqs, seqs)
def test_levenshtein_triangle(a, b, c):
    assert sc.levenshtein(a, c) <= sc.levenshtein(a, b) + sc.levenshtein(b, c)
    assert abs(len(a) - len(b)) <= sc.levenshtein(a, b) <= max(len(a), len(b))


def test_distance_matrix_small_cases():
    assert sc.distance_matrix(["ccs"]).tolist() == [[0.0]]
    m = sc.distance_matrix(["c", "p", "s"])
    assert m.tolist() == [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    with pytest.raises(TooFewItems):
        sc.distance_matrix([])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.text(alphabet="cps", max_size=15), min_size=1, max_size=12))
def test_batched_distances_match_scalar(group):
    m = sc.distance_matrix(group)
    for i, j in itertools.product(range(len(group)), repeat=2):
        assert m[i, j] == sc.levenshtein(group[i], group[j])


def test_distance_matrix_independent_of_threads():
    rng = random.Random(5)
    group = ["".join(rng.choice("cps") for _ in range(rng.randint(1, 40))) for _ in range(60)]
    assert np.array_equal(sc.distance_matrix(group), sc.distance_matrix(group, threads=4))


def test_agglomerate_hand_example():
    d = np.array([[0, 1, 10], [1, 0, 10], [10, 10, 0]], dtype=float)
    dend = sc.agglomerate(d, "average")
    assert dend.merges.tolist() == [[0, 1, 1, 2], [2, 3, 10, 3]]
    assert sc.cut(dend, 2) == [0, 0, 1]
    assert sc.cut(dend, 1) == [0, 0, 0]
    assert sc.cut(dend, 3) == [0, 1, 2]
    with pytest.raises(BadK):
        sc.cut(dend, 4)
    with pytest.raises(TooFewItems):
        sc.agglomerate(np.zeros((1, 1)))


def test_agglomerate_accepts_condensed():
    d = np.array([[0, 2, 6], [2, 0, 5], [6, 5, 0]], dtype=float)
    condensed = d[np.triu_indices(3, 1)]
    assert np.array_equal(sc.agglomerate(d, "single").merges, sc.agglomerate(condensed, "single").merges)


def test_ties_go_to_smallest_pair():
    d = np.ones((4, 4)) - np.eye(4)
    dend = sc.agglomerate(d, "complete")
    assert dend.merges[0, :2].tolist() == [0, 1]
    # slot 0 (now node 4) ties with everything; its pair with leaf 2 is smallest
    assert dend.merges[1, :2].tolist() == [2, 4]


@pytest.mark.parametrize("linkage", sc.LINKAGES)
@settings(max_examples=25, deadline=None)
@given(st.integers(2, 14), st.integers(0, 2 ** 32 - 1), st.booleans())
def test_agglomerate_matches_naive(linkage, n, seed, integer):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 4, (n, n)).astype(float) if integer else rng.random((n, n))
    d = np.triu(a, 1) + np.triu(a, 1).T
    dend = sc.agglomerate(d, linkage)
    ref = np.array(naive_agglomerate(d, linkage))
    assert np.array_equal(dend.merges[:, [0, 1, 3]], ref[:, [0, 1, 3]])
    assert np.allclose(dend.heights, ref[:, 2], rtol=0, atol=1e-12)
    assert np.all(np.diff(dend.heights) >= -1e-12)
    for k in range(1, n + 1):
        assert len(set(sc.cut(dend, k))) == k


def test_profile():
    p = sc.profile(["ccs"])
    assert (p.frac_c, p.frac_p, p.frac_s) == pytest.approx((2 / 3, 0, 1 / 3))
    p = sc.profile(["ps", "ps"])
    assert (p.frac_p, p.frac_s, p.mean_length, p.count) == (0.5, 0.5, 2, 2)
    p = sc.profile(["c", "ppp"])
    assert (p.frac_c, p.frac_p) == (0.25, 0.75)
    with pytest.raises(EmptyCluster):
        sc.profile([])


@given(st.lists(st.text(alphabet="cps", min_size=1, max_size=20), min_size=1, max_size=10))
def test_profile_fractions_sum_to_one(members):
    p = sc.profile(members)
    assert p.frac_c + p.frac_p + p.frac_s == pytest.approx(1, abs=1e-9)


def test_label_behavior_rules():
    def mk(c, p, s):
        return ActivityProfile(c, p, s, 10, 1)

    assert sc.label_behavior(mk(0.05, 0.45, 0.50)) is BehaviorType.OBSERVATION
    assert sc.label_behavior(mk(0.9, 0.05, 0.05)) is BehaviorType.CONSTRUCTION
    assert sc.label_behavior(mk(0.34, 0.33, 0.33)) is BehaviorType.FULL_CYCLE
    assert sc.label_behavior(mk(0.6, 0.2, 0.2)) is BehaviorType.CONSTRUCTION
    strict = sc.LabelThresholds(0.95, 0.7, 0.3)
    assert sc.label_behavior(mk(0.9, 0.05, 0.05), strict) is BehaviorType.FULL_CYCLE
    assert BehaviorType.FULL_CYCLE.type_number == 3


def test_merge_groups_planted_profiles():
    rng = np.random.default_rng(11)
    centres = [(0.05, 0.5, 0.45, 20), (0.85, 0.1, 0.05, 15), (0.4, 0.3, 0.3, 150)]
    plan = [0, 0, 1, 1, 2, 2, 2]
    profiles = []
    for g in plan:
        c, p, s, m = centres[g]
        e = rng.normal(0, 0.005, 2)
        profiles.append(ActivityProfile(c + e[0], p - e[0] + e[1], s - e[1], m * (1 + rng.normal(0, 0.02)), 5))
    merged = sc.merge_groups(profiles, 3)
    assert sorted(merged) == [[0, 1], [2, 3], [4, 5, 6]]
    # exhaustive check that this is the 3-partition with the smallest within-group spread
    x = sc.profile_features(profiles)

    def spread(labels):
        return sum(((x[labels == g] - x[labels == g].mean(0)) ** 2).sum() for g in set(labels.tolist()))

    best = min((spread(np.array(lab)), lab) for lab in itertools.product(range(3), repeat=7)
               if len(set(lab)) == 3)[1]
    groups = sorted(sorted(i for i in range(7) if best[i] == g) for g in set(best))
    assert groups == sorted(merged)


def test_merge_groups_identity_and_errors():
    ps = [ActivityProfile(1, 0, 0, 3, 1), ActivityProfile(0, 1, 0, 3, 1)]
    assert sc.merge_groups(ps, 2) == [[0], [1]]
    with pytest.raises(TooFewClusters):
        sc.merge_groups(ps, 3)
    same = [ActivityProfile(0.2, 0.4, 0.4, 8, 1), ActivityProfile(0.9, 0.1, 0, 8, 1),
            ActivityProfile(0.2, 0.4, 0.4, 8, 1)]
    assert [0, 2] in sc.merge_groups(same, 2)


def test_cluster_sequences_small():
    seqs = ["ccccc", "cccc", "cccccc", "psps", "spsp", "pssp",
            "ccpscpscps" * 3, "cpsscpccps" * 3, "ccspsccpsp" * 3]
    groups = [0, 0, 0, 0, 0, 0, 1, 1, 1]
    res = sc.cluster_sequences(seqs, groups, 2, group_clusters=(2, 1))
    assert res.behaviors[:3] == [BehaviorType.CONSTRUCTION] * 3
    assert res.behaviors[3:6] == [BehaviorType.OBSERVATION] * 3
    assert res.behaviors[6:] == [BehaviorType.FULL_CYCLE] * 3
    again = sc.cluster_sequences(seqs, groups, 2, group_clusters=(2, 1), threads=3)
    assert again.merged_labels == res.merged_labels


def test_k_by_height_gap():
    d = np.array([[0, 1, 9, 9], [1, 0, 9, 9], [9, 9, 0, 1], [9, 9, 1, 0]], dtype=float)
    assert sc.k_by_height_gap(sc.agglomerate(d), 3) == 2
