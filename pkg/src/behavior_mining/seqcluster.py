"""Edit-distance clustering of activity sequences into behavior types.

Within each length stratum the sequences are compared with unit-cost
Levenshtein distance and clustered bottom-up.  The per-stratum clusters are
then pooled: clusters with similar activity mix are merged by a second,
small agglomeration over their profiles, and each merged cluster is named by
:func:`label_behavior`.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BadK, EmptyCluster, TooFewClusters, TooFewItems

LINKAGES = ("single", "complete", "average")


class BehaviorType(enum.Enum):
    OBSERVATION = "Observation"
    CONSTRUCTION = "Construction"
    FULL_CYCLE = "FullCycle"

    @property
    def type_number(self):
        return {"Observation": 1, "Construction": 2, "FullCycle": 3}[self.value]


@dataclass(frozen=True)
class ActivityProfile:
    frac_c: float
    frac_p: float
    frac_s: float
    mean_length: float
    count: int

    def vector(self):
        return (self.frac_c, self.frac_p, self.frac_s)


@dataclass(frozen=True)
class Dendrogram:
    """Merge history in linkage-matrix layout.

    Row ``t`` of ``merges`` is ``(left, right, height, size)``; leaves are
    nodes ``0..n-1`` and the cluster formed at step ``t`` is node ``n + t``.
    """

    n: int
    merges: np.ndarray
    linkage: str

    @property
    def heights(self):
        return self.merges[:, 2]


@dataclass(frozen=True)
class LabelThresholds:
    construction_min_c: float = 0.6
    observation_min_ps: float = 0.7
    observation_max_c: float = 0.3


# -- edit distance ------------------------------------------------------------

def levenshtein(a, b) -> int:
    """Unit-cost edit distance, O(len(a)*len(b)) time and O(min) extra space."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _encode(seqs):
    seqs = [s if isinstance(s, str) else "".join(s) for s in seqs]
    lengths = np.array([len(s) for s in seqs], dtype=np.int64)
    codes = np.full((len(seqs), int(lengths.max())), -1, dtype=np.int32)
    for i, s in enumerate(seqs):
        codes[i, :len(s)] = np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32)
    return codes, lengths


def _distances_to_batch(a_codes, codes, lengths):
    """Edit distance from one sequence to every row of a padded batch.

    Each DP row is vectorised across the batch; the insertion recurrence
    ``cur[j] = min(cand[j], cur[j-1] + 1)`` is a running minimum of
    ``cand[j] - j`` shifted back by ``j``.
    """
    m, width = codes.shape
    cols = np.arange(width + 1, dtype=np.int32)
    prev = np.broadcast_to(cols, (m, width + 1)).copy()
    for i, ca in enumerate(a_codes, start=1):
        cand = np.empty_like(prev)
        cand[:, 0] = i
        np.minimum(prev[:, :-1] + (codes != ca), prev[:, 1:] + 1, out=cand[:, 1:])
        prev = np.minimum.accumulate(cand - cols, axis=1) + cols
    return prev[np.arange(m), lengths]


def distance_matrix(group, threads=1) -> np.ndarray:
    """Symmetric matrix of pairwise edit distances (float, zero diagonal)."""
    n = len(group)
    if n == 0:
        raise TooFewItems("empty group")
    codes, lengths = _encode(group)
    out = np.zeros((n, n))

    def row(i):
        if i + 1 < n:
            d = _distances_to_batch(codes[i, :lengths[i]], codes[i + 1:], lengths[i + 1:])
            out[i, i + 1:] = d
            out[i + 1:, i] = d

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(row, range(n)))
    else:
        for i in range(n):
            row(i)
    return out


# -- hierarchical clustering --------------------------------------------------

def _as_square(matrix):
    d = np.asarray(matrix, dtype=float)
    if d.ndim == 1:
        n = int(round((1 + math.sqrt(1 + 8 * d.size)) / 2))
        if n * (n - 1) // 2 != d.size:
            raise ValueError("condensed matrix has invalid size")
        sq = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        sq[iu] = d
        sq[(iu[1], iu[0])] = d
        return sq
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square or condensed")
    return d


def agglomerate(matrix, linkage="average") -> Dendrogram:
    """Bottom-up clustering with Lance-Williams updates.

    Clusters live in slots; merging slots ``i < j`` keeps the result in ``i``.
    Each step merges the active pair with the smallest linkage distance, ties
    going to the lexicographically smallest ``(i, j)``.  Average linkage keeps
    unnormalised distance sums so integer inputs stay exact.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}")
    d = _as_square(matrix)
    n = d.shape[0]
    if n < 2:
        raise TooFewItems("need at least 2 items to cluster")

    work = d.copy()
    sums = d.copy() if linkage == "average" else None
    size = np.ones(n)
    node = list(range(n))
    lower = np.where(np.tril(np.ones((n, n), dtype=bool)), np.inf, 0.0)
    work += lower
    merges = np.empty((n - 1, 4))

    for step in range(n - 1):
        flat = int(np.argmin(work))
        i, j = divmod(flat, n)
        h = work[i, j]
        a = np.minimum(work[i], work[:, i])
        b = np.minimum(work[j], work[:, j])
        if linkage == "single":
            new = np.minimum(a, b)
        elif linkage == "complete":
            new = np.maximum(a, b)
        else:
            sums[i] += sums[j]
            sums[:, i] = sums[i]
            with np.errstate(divide="ignore", invalid="ignore"):
                new = sums[i] / ((size[i] + size[j]) * size)
        size[i] += size[j]
        size[j] = 0
        new[i] = new[j] = np.inf
        new[size == 0] = np.inf
        # keep only the upper triangle finite
        work[i, i + 1:] = new[i + 1:]
        work[:i, i] = new[:i]
        work[j, :] = np.inf
        work[:, j] = np.inf
        left, right = sorted((node[i], node[j]))
        merges[step] = (left, right, h, size[i])
        node[i] = n + step
    return Dendrogram(n, merges, linkage)


def cut(dendrogram: Dendrogram, k) -> list[int]:
    """Flat clusters from undoing the last ``k - 1`` merges.

    Labels are numbered in order of each cluster's smallest leaf index.
    """
    n = dendrogram.n
    if not 1 <= k <= n:
        raise BadK(f"k must be in [1, {n}], got {k}")
    parent = list(range(2 * n - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step in range(n - k):
        left, right = int(dendrogram.merges[step, 0]), int(dendrogram.merges[step, 1])
        parent[find(left)] = n + step
        parent[find(right)] = n + step
    labels, seen = [], {}
    for leaf in range(n):
        root = find(leaf)
        labels.append(seen.setdefault(root, len(seen)))
    return labels


def k_by_height_gap(dendrogram: Dendrogram, k_max=None) -> int:
    """Cluster count implied by the widest gap between consecutive merge heights."""
    n = dendrogram.n
    k_max = n if k_max is None else min(k_max, n)
    h = dendrogram.heights
    best_k, best_gap = 1, -1.0
    # cutting between merge t-1 and t leaves n - t clusters
    for t in range(1, n - 1):
        k = n - t
        if not 2 <= k <= k_max:
            continue
        gap = h[t] - h[t - 1]
        if gap > best_gap or (gap == best_gap and k < best_k):
            best_k, best_gap = k, gap
    return best_k if best_gap >= 0 else min(2, n)


# -- profiles and behavior types ----------------------------------------------

def profile(members) -> ActivityProfile:
    """Pooled symbol fractions and mean length of a cluster's sequences."""
    if not members:
        raise EmptyCluster("cluster has no members")
    counts = {"c": 0, "p": 0, "s": 0}
    total = 0
    for seq in members:
        for sym in seq:
            counts[sym] += 1
        total += len(seq)
    if total == 0:
        raise EmptyCluster("cluster members are all empty")
    return ActivityProfile(
        counts["c"] / total, counts["p"] / total, counts["s"] / total,
        total / len(members), len(members),
    )


def profile_features(profiles, length_weight=0.25):
    """Profile vectors for merging: symbol fractions plus min-max scaled log mean length."""
    logs = np.log([p.mean_length for p in profiles])
    span = logs.max() - logs.min()
    scaled = (logs - logs.min()) / span if span > 0 else np.zeros_like(logs)
    return np.column_stack([
        [p.frac_c for p in profiles],
        [p.frac_p for p in profiles],
        [p.frac_s for p in profiles],
        length_weight * scaled,
    ])


def merge_groups(profiles, target=3, length_weight=0.25) -> list[list[int]]:
    """Merge per-stratum clusters with similar profiles into ``target`` clusters.

    Average-linkage agglomeration on Euclidean distance between profile
    vectors (see :func:`profile_features`).  Returns, for each merged
    cluster, the indices of the input clusters it pools.
    """
    profiles = list(profiles)
    if len(profiles) < target or target < 1:
        raise TooFewClusters(f"{len(profiles)} clusters cannot be merged into {target}")
    if len(profiles) == target:
        return [[i] for i in range(target)]
    x = profile_features(profiles, length_weight)
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    labels = cut(agglomerate(dist, "average"), target)
    return [[i for i, lab in enumerate(labels) if lab == g] for g in range(target)]


def label_behavior(p: ActivityProfile, thresholds: LabelThresholds = LabelThresholds()) -> BehaviorType:
    if p.frac_c >= thresholds.construction_min_c:
        return BehaviorType.CONSTRUCTION
    if p.frac_p + p.frac_s >= thresholds.observation_min_ps and p.frac_c < thresholds.observation_max_c:
        return BehaviorType.OBSERVATION
    return BehaviorType.FULL_CYCLE


# -- whole-stage driver ---------------------------------------------------------

@dataclass
class BehaviorClustering:
    """Result of clustering every stratum and merging across strata.

    ``group_labels[i]`` / ``merged_labels[i]`` / ``behaviors[i]`` refer to the
    i-th input sequence; entries for sequences outside every stratum are None.
    """

    dendrograms: dict
    group_k: dict
    group_labels: list
    cluster_keys: list
    cluster_profiles: list
    merged: list
    merged_profiles: list
    merged_behaviors: list
    merged_labels: list
    behaviors: list
    options: dict = field(default_factory=dict)


def cluster_sequences(sequences, groups, n_groups, group_clusters=(5, 5, 5),
                      linkage="average", target=3, auto_k=False,
                      thresholds: LabelThresholds = LabelThresholds(),
                      length_weight=0.25, threads=1) -> BehaviorClustering:
    """Cluster each length stratum, merge clusters across strata, label them.

    ``groups[i]`` is the stratum index of sequence ``i`` (None for removed
    outliers).  ``group_clusters`` gives the flat-cluster count per stratum;
    with ``auto_k`` the count comes from the widest dendrogram height gap
    instead, capped by the same value.
    """
    if len(group_clusters) != n_groups:
        raise ValueError(f"need {n_groups} per-group cluster counts, got {len(group_clusters)}")
    n = len(sequences)
    group_labels = [None] * n
    dendrograms, group_k = {}, {}
    cluster_keys, cluster_members = [], []
    for g in range(n_groups):
        idx = [i for i in range(n) if groups[i] == g]
        if not idx:
            continue
        if len(idx) == 1:
            labels, k = [0], 1
        else:
            dend = agglomerate(distance_matrix([sequences[i] for i in idx], threads), linkage)
            dendrograms[g] = (idx, dend)
            k = min(group_clusters[g], len(idx))
            if auto_k:
                k = k_by_height_gap(dend, k)
            labels = cut(dend, k)
        group_k[g] = k
        for c in range(k):
            cluster_keys.append((g, c))
            cluster_members.append([idx[t] for t, lab in enumerate(labels) if lab == c])
        for t, i in enumerate(idx):
            group_labels[i] = labels[t]

    profiles = [profile([sequences[i] for i in m]) for m in cluster_members]
    merged = merge_groups(profiles, min(target, len(profiles)), length_weight)
    merged_profiles, merged_behaviors = [], []
    merged_labels = [None] * n
    behaviors = [None] * n
    for mi, parts in enumerate(merged):
        seq_idx = sorted(i for c in parts for i in cluster_members[c])
        p = profile([sequences[i] for i in seq_idx])
        b = label_behavior(p, thresholds)
        merged_profiles.append(p)
        merged_behaviors.append(b)
        for i in seq_idx:
            merged_labels[i] = mi
            behaviors[i] = b
    return BehaviorClustering(
        dendrograms, group_k, group_labels, cluster_keys, profiles, merged,
        merged_profiles, merged_behaviors, merged_labels, behaviors,
        options={"linkage": linkage, "group_clusters": list(group_clusters),
                 "auto_k": auto_k, "target": target, "length_weight": length_weight,
                 "thresholds": [thresholds.construction_min_c, thresholds.observation_min_ps,
                                thresholds.observation_max_c]},
    )
