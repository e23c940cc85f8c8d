"""Length outlier removal and density-based length strata.

Edit distance between two sequences is bounded below by their length
difference, so sequences are clustered only against others of similar
length.  Lengths are first trimmed to ``mean +/- k*sd``; the remaining
lengths are smoothed with a Gaussian KDE and split at its most pronounced
valleys.
"""

from __future__ import annotations

import bisect
import math
import numbers
from dataclasses import dataclass, field

import numpy as np

from .errors import BadThresholds, DegenerateData, TooFewSequences

GROUP_NAMES = ("short", "medium", "long")


@dataclass(frozen=True)
class OutlierBounds:
    mean: float
    sd: float
    k: float
    lower: float
    upper: float


@dataclass(frozen=True)
class DensityEstimate:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    data: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class CutPoints:
    cuts: list
    fallback: bool


@dataclass(frozen=True)
class LengthSegments:
    thresholds: list
    groups: list
    counts: list

    @property
    def names(self):
        return group_names(len(self.thresholds) + 1)

    def members(self, g):
        return [i for i, gi in enumerate(self.groups) if gi == g]


def group_names(n_groups):
    if n_groups == 3:
        return list(GROUP_NAMES)
    return [f"g{i}" for i in range(n_groups)]


def filter_outliers(lengths, k=2.0, sample_sd=False):
    """Split indices into retained and removed by the ``mean +/- k*sd`` window.

    Mean and sd are taken over all lengths (population sd unless
    ``sample_sd``).  ``k = inf`` disables trimming.
    Returns ``(retained, removed, bounds)``.
    """
    x = np.asarray(lengths, dtype=float)
    if x.size < 2:
        raise TooFewSequences(f"need at least 2 lengths, got {x.size}")
    mean = float(x.mean())
    sd = float(x.std(ddof=1 if sample_sd else 0))
    if math.isinf(k):
        lower, upper = -math.inf, math.inf
    else:
        lower, upper = mean - k * sd, mean + k * sd
    removed = [i for i, v in enumerate(x) if v > upper or v < lower]
    dropped = set(removed)
    retained = [i for i in range(x.size) if i not in dropped]
    return retained, removed, OutlierBounds(mean, sd, k, lower, upper)


def silverman_bandwidth(x):
    x = np.asarray(x, dtype=float)
    sd = x.std(ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if spread <= 0:
        # heavy ties collapse the IQR; sd still carries the scale
        spread = sd
    if spread <= 0:
        raise DegenerateData("all lengths identical; bandwidth cannot be chosen")
    return 0.9 * spread * x.size ** -0.2


def kde(lengths, bandwidth="auto", grid_size=512):
    """Gaussian kernel density on a uniform grid over ``[min - 3h, max + 3h]``."""
    x = np.sort(np.asarray(lengths, dtype=float))
    if x.size == 0:
        raise TooFewSequences("no lengths")
    if bandwidth is None or bandwidth == "auto":
        if x.size < 2:
            raise DegenerateData("automatic bandwidth needs at least 2 lengths")
        h = silverman_bandwidth(x)
    else:
        h = float(bandwidth)
        if not h > 0:
            raise ValueError("bandwidth must be positive")
    grid = np.linspace(x[0] - 3 * h, x[-1] + 3 * h, grid_size)
    density = np.empty(grid_size)
    norm = 1.0 / (x.size * h * math.sqrt(2 * math.pi))
    # chunked so memory stays bounded; each grid point sums in data order
    step = max(1, 2_000_000 // max(x.size, 1))
    for lo in range(0, grid_size, step):
        z = (grid[lo:lo + step, None] - x[None, :]) / h
        density[lo:lo + step] = np.exp(-0.5 * z * z).sum(axis=1) * norm
    return DensityEstimate(grid, density, h, x)


def _valleys(d):
    """Interior local minima as (index, value); flat-bottomed valleys report their midpoint."""
    out = []
    i, n = 1, len(d)
    while i < n - 1:
        if d[i] < d[i - 1]:
            j = i
            while j + 1 < n and d[j + 1] == d[i]:
                j += 1
            if j + 1 < n and d[j + 1] > d[i]:
                out.append(((i + j) // 2, d[i]))
            i = j + 1
        else:
            i += 1
    return out


def valley_depths(density: DensityEstimate):
    """Each valley's depth below the lower of the highest peaks on its two sides.

    Returns ``(grid_index, density, depth)`` triples in grid order.
    """
    d = np.asarray(density.density)
    left = np.maximum.accumulate(d)
    right = np.maximum.accumulate(d[::-1])[::-1]
    return [(i, v, float(min(left[i], right[i]) - v)) for i, v in _valleys(d)]


def find_cutpoints(density: DensityEstimate, n_cuts=2) -> CutPoints:
    """Cut points at the ``n_cuts`` most pronounced density valleys.

    Valleys are ranked by depth (see :func:`valley_depths`), then by lower
    density; isolated points in a sparse tail make valleys that are low but
    shallow, and those rank last.  With fewer valleys than requested the
    data are split into equal-count groups at empirical quantiles and
    ``fallback`` is set.
    """
    if n_cuts < 1:
        raise ValueError("n_cuts must be >= 1")
    valleys = valley_depths(density)
    if len(valleys) >= n_cuts:
        ranked = sorted(valleys, key=lambda v: (-v[2], v[1], v[0]))[:n_cuts]
        idx = sorted(i for i, _, _ in ranked)
        return CutPoints([float(density.grid[i]) for i in idx], False)

    probs = [(i + 1) / (n_cuts + 1) for i in range(n_cuts)]
    data = density.data if density.data is not None and len(density.data) else density.grid
    cuts = [float(q) for q in np.quantile(data, probs)]
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        lo, hi = float(np.min(data)), float(np.max(data))
        if hi <= lo:
            lo, hi = float(density.grid[0]), float(density.grid[-1])
        cuts = [float(c) for c in np.linspace(lo, hi, n_cuts + 2)[1:-1]]
    return CutPoints(cuts, True)


def segment(lengths, cuts) -> LengthSegments:
    """Assign each length to a stratum: below the first cut, between cuts, or above the last.

    Lower bounds are closed, so a length equal to a cut goes to the upper group.
    """
    cuts = [float(c) for c in cuts]
    if not cuts or any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise BadThresholds(f"cut points must be strictly ascending, got {cuts}")
    lengths = [v if isinstance(v, numbers.Real) else len(v.symbols) for v in lengths]
    groups = [bisect.bisect_right(cuts, v) for v in lengths]
    counts = [groups.count(g) for g in range(len(cuts) + 1)]
    return LengthSegments(cuts, groups, counts)
