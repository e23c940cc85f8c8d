"""Independent reference implementations used only by the tests."""

import itertools
from collections import deque
from functools import lru_cache

import numpy as np

ALPHABET = "cps"


def all_strings(max_len, alphabet=ALPHABET):
    out = [""]
    for n in range(1, max_len + 1):
        out += ["".join(t) for t in itertools.product(alphabet, repeat=n)]
    return out


def _neighbours(s, alphabet, max_len):
    for i in range(len(s)):
        yield s[:i] + s[i + 1:]
        for a in alphabet:
            if a != s[i]:
                yield s[:i] + a + s[i + 1:]
    if len(s) < max_len:
        for i in range(len(s) + 1):
            for a in alphabet:
                yield s[:i] + a + s[i:]


def edit_graph_distances(source, max_len, alphabet=ALPHABET):
    """Breadth-first search over single-symbol edits from ``source``.

    Returns the number of edits to reach every string of length <= max_len.
    """
    dist = {source: 0}
    queue = deque([source])
    while queue:
        s = queue.popleft()
        for t in _neighbours(s, alphabet, max_len):
            if t not in dist:
                dist[t] = dist[s] + 1
                queue.append(t)
    return dist


def edit_path_search(a, b):
    """Minimum edit-path cost by exhaustive recursion over the first symbols."""

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(go(i + 1, j) + 1, go(i, j + 1) + 1, go(i + 1, j + 1) + (a[i] != b[j]))

    return go(0, 0)


def naive_agglomerate(d, linkage):
    """Re-scan every cluster pair each step, linkage computed from the raw matrix.

    Clusters are keyed by their smallest leaf; ties go to the
    lexicographically smallest key pair.  Returns (left, right, height, size) rows.
    """
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    clusters = {i: [i] for i in range(n)}
    node = {i: i for i in range(n)}
    rows = []
    for step in range(n - 1):
        best = None
        keys = sorted(clusters)
        for x, y in itertools.combinations(keys, 2):
            block = d[np.ix_(clusters[x], clusters[y])]
            if linkage == "single":
                v = block.min()
            elif linkage == "complete":
                v = block.max()
            else:
                v = block.sum() / block.size
            if best is None or v < best[0]:
                best = (v, x, y)
        v, x, y = best
        left, right = sorted((node[x], node[y]))
        clusters[x] = clusters[x] + clusters.pop(y)
        node[x] = n + step
        del node[y]
        rows.append((left, right, v, len(clusters[x])))
    return rows


def best_two_partition_sse(x):
    """Smallest SSE over every split of the rows of ``x`` into two nonempty groups."""
    n = x.shape[0]
    best = np.inf
    for mask in range(1, 2 ** (n - 1)):
        sel = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
        a, b = x[sel], x[~sel]
        sse = ((a - a.mean(0)) ** 2).sum() + ((b - b.mean(0)) ** 2).sum()
        best = min(best, sse)
    return best
