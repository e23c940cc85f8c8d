"""Learner engagement clustering.

Each learner is summarised by five numbers: original-model count,
copied-model count and the construction / parameterization / simulation
activity totals over their models.  The standardized features are projected
onto the leading principal components and grouped with K-means++; singleton
groups are set aside and the rest are lettered A, B, ... from most to least
active along the first component.
"""

from __future__ import annotations

import string
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BadK, DimensionMismatch, NoModels, NumericalFailure, TooFewLearners

FEATURES = ("original_models", "copied_models", "construction", "parameterization", "simulation")


@dataclass(frozen=True)
class PcaModel:
    means: np.ndarray
    scales: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    explained_ratio: np.ndarray
    all_ratios: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class KMeansResult:
    k: int
    centroids: np.ndarray
    labels: np.ndarray
    sse: float
    iterations: int
    seed: int
    restart: int = 0
    sse_history: tuple = ()


@dataclass(frozen=True)
class ElbowReport:
    ks: list
    sse: list
    relative_drop: list
    elbow_k: int


@dataclass(frozen=True)
class EngagementGroup:
    label: str
    members: list
    centroid: tuple
    excluded: bool = False


# -- features -----------------------------------------------------------------

def per_model_frequencies(models) -> np.ndarray:
    """Activity counts per model, one row per model ordered by first timestamp.

    ``models`` holds ``(first_timestamp, symbols)`` pairs; a model with no
    activities contributes a zero row.
    """
    models = sorted(models, key=lambda m: m[0])
    if not models:
        raise NoModels("learner has no models")
    return np.array([[s.count("c"), s.count("p"), s.count("s")] for _, s in models],
                    dtype=np.int64).reshape(len(models), 3)


def learner_features(inventory, sequences, aggregate="sum"):
    """Five-column feature matrix, rows in sorted learner-id order.

    ``inventory`` is the full model list (zero-activity models included) and
    ``sequences`` the activity sequences; ``aggregate`` is ``"sum"`` or
    ``"mean"`` over each learner's per-model counts.
    Returns ``(learner_ids, matrix)``.
    """
    if aggregate not in ("sum", "mean"):
        raise ValueError(f"unknown aggregate {aggregate!r}")
    symbols = {(s.learner_id, s.model_id): s.symbols for s in sequences}
    by_learner = {}
    for r in inventory:
        by_learner.setdefault(r.learner_id, []).append(r)
    ids = sorted(by_learner)
    rows = []
    for lid in ids:
        recs = by_learner[lid]
        freq = per_model_frequencies(
            [(r.first_timestamp, symbols.get((lid, r.model_id), "")) for r in recs])
        agg = freq.sum(axis=0) if aggregate == "sum" else freq.mean(axis=0)
        n_copied = sum(r.is_copied for r in recs)
        rows.append([len(recs) - n_copied, n_copied, *agg])
    return ids, np.array(rows, dtype=float).reshape(len(ids), 5)


def standardize(matrix):
    """Column z-scores with population sd.

    Returns ``(scaled, means, scales, constant)``; constant columns become
    zeros, get scale 1 and are flagged in ``constant``.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise TooFewLearners("need at least 2 rows to standardize")
    means = x.mean(axis=0)
    sd = x.std(axis=0)
    constant = sd == 0
    scales = np.where(constant, 1.0, sd)
    scaled = (x - means) / scales
    scaled[:, constant] = 0.0
    return scaled, means, scales, constant


# -- PCA ------------------------------------------------------------------------

def jacobi_eigh(matrix, tol=1e-12, max_sweeps=100):
    """Eigenpairs of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, vectors)`` with eigenvalues descending and the
    matching unit eigenvectors as the rows of ``vectors``.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0))):
        raise ValueError("matrix must be square and symmetric")
    a = (a + a.T) / 2
    v = np.eye(n)
    scale = np.sqrt((a * a).sum())
    for _ in range(max_sweeps):
        off = np.sqrt((np.triu(a, 1) ** 2).sum())
        if off <= tol * scale or off == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J on rows/columns p, q
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise NumericalFailure(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
    evals = np.diag(a).copy()
    order = np.argsort(-evals, kind="stable")
    return evals[order], v[:, order].T.copy()


def pca(matrix, n_components=2, scales=None) -> PcaModel:
    """Principal components of the population covariance of ``matrix``.

    Each component is signed so that its largest-magnitude entry is positive.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise TooFewLearners("need at least 2 rows for PCA")
    if not 1 <= n_components <= x.shape[1]:
        raise DimensionMismatch(f"n_components must be in [1, {x.shape[1]}]")
    means = x.mean(axis=0)
    xc = x - means
    cov = xc.T @ xc / x.shape[0]
    evals, vecs = jacobi_eigh(cov)
    for row in vecs:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1
    positive = np.clip(evals, 0.0, None)
    total = positive.sum()
    ratios = positive / total if total > 0 else np.zeros_like(positive)
    return PcaModel(
        means=means,
        scales=np.ones(x.shape[1]) if scales is None else np.asarray(scales, dtype=float),
        components=vecs[:n_components],
        eigenvalues=evals,
        explained_ratio=ratios[:n_components],
        all_ratios=ratios,
    )


def project(model: PcaModel, matrix) -> np.ndarray:
    """Inner products of each (already centred) row with the retained components."""
    x = np.asarray(matrix, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != model.components.shape[1]:
        raise DimensionMismatch(f"expected {model.components.shape[1]} columns, got {x.shape[1]}")
    return x @ model.components.T


def feature_importance(model: PcaModel):
    """Absolute loadings per component and, per component, the index of the dominant feature."""
    mags = np.abs(model.components)
    return mags, [int(i) for i in np.argmax(mags, axis=1)]


# -- K-means++ ------------------------------------------------------------------

def _sq_dists(x, centroids):
    return ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _seed_centroids(x, k, rng):
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            rest = [i for i in range(n) if i not in chosen]
            nxt = rest[int(rng.integers(len(rest)))]
        chosen.append(nxt)
        d2 = np.minimum(d2, ((x - x[nxt]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _update(x, labels, k):
    centroids = np.zeros((k, x.shape[1]))
    counts = np.bincount(labels, minlength=k)
    for c in range(k):
        if counts[c]:
            centroids[c] = x[labels == c].mean(axis=0)
    for c in np.flatnonzero(counts == 0):
        # steal the point farthest from its own centroid out of a cluster that can spare it
        dist = ((x - centroids[labels]) ** 2).sum(axis=1)
        dist[counts[labels] < 2] = -1.0
        p = int(np.argmax(dist))
        old = labels[p]
        labels[p] = c
        counts[old] -= 1
        counts[c] = 1
        centroids[c] = x[p]
        centroids[old] = x[labels == old].mean(axis=0)
    return centroids


def _sse(x, labels, centroids):
    return float(((x - centroids[labels]) ** 2).sum())


def _lloyd(x, centroids, max_iter):
    k = centroids.shape[0]
    labels = np.argmin(_sq_dists(x, centroids), axis=1)
    history = [_sse(x, labels, centroids)]
    it = 0
    for it in range(1, max_iter + 1):
        centroids = _update(x, labels, k)
        history.append(_sse(x, labels, centroids))
        new = np.argmin(_sq_dists(x, centroids), axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
    labels = np.argmin(_sq_dists(x, centroids), axis=1)
    return centroids, labels, _sse(x, labels, centroids), it, history


def kmeans_pp(points, k, seed, restarts=10, max_iter=300) -> KMeansResult:
    """K-means with K-means++ seeding, best of ``restarts`` by SSE.

    Restart ``r`` draws from its own PCG64 stream spawned from ``seed``, so
    results do not depend on the order restarts are run in; SSE ties go to
    the lowest restart index.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k <= n:
        raise BadK(f"k must be in [1, {n}], got {k}")
    best = None
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = np.random.Generator(np.random.PCG64(child))
        centroids, labels, sse, it, hist = _lloyd(x, _seed_centroids(x, k, rng), max_iter)
        if best is None or sse < best.sse:
            best = KMeansResult(k, centroids, labels, sse, it, seed, r, tuple(hist))
    return best


def elbow(points, k_range, seed, restarts=10) -> ElbowReport:
    """Best SSE for each k and the k with the largest relative SSE drop.

    The relative drop at k is ``(SSE(k-1) - SSE(k)) / SSE(k-1)``; a k whose
    SSE is zero (a perfect fit, e.g. k = n) is never flagged.
    """
    ks = sorted(k_range)
    sse = [kmeans_pp(points, k, seed, restarts).sse for k in ks]
    drops = [None]
    for i in range(1, len(ks)):
        prev, cur = sse[i - 1], sse[i]
        drops.append((prev - cur) / prev if prev > 0 and ks[i] == ks[i - 1] + 1 else None)
    scale = sse[0] if sse else 0.0
    candidates = [(d, -ks[i]) for i, d in enumerate(drops)
                  if d is not None and sse[i] > 1e-12 * max(scale, 1e-300)]
    elbow_k = -max(candidates)[1] if candidates else ks[0]
    return ElbowReport(ks, sse, drops, elbow_k)


def exclude_singletons(result: KMeansResult, projected) -> list[EngagementGroup]:
    """Letter the non-singleton clusters by descending mean first-component score.

    Singleton clusters come last, flagged ``excluded`` and unlabelled.
    """
    proj = np.asarray(projected, dtype=float)
    kept, dropped = [], []
    for c in range(result.k):
        members = [int(i) for i in np.flatnonzero(result.labels == c)]
        if not members:
            continue
        centre = tuple(float(v) for v in proj[members].mean(axis=0))
        (dropped if len(members) == 1 else kept).append((c, members, centre))
    kept.sort(key=lambda g: (-g[2][0], g[0]))
    letters = list(string.ascii_uppercase)
    groups = [EngagementGroup(letters[i] if i < 26 else f"G{i}", m, ctr)
              for i, (_, m, ctr) in enumerate(kept)]
    groups += [EngagementGroup("", m, ctr, excluded=True) for _, m, ctr in dropped]
    if not kept:
        warnings.warn("every engagement cluster is a singleton; no groups remain", RuntimeWarning)
    return groups
