"""SVG figures for the pipeline reports.

matplotlib is imported lazily so the numerical modules never need it.
Output is made reproducible by fixing the SVG id salt and dropping the
creation date.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "behavior-mining"
    plt.rcParams["svg.fonttype"] = "path"
    return plt


def _save(fig, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    fig.clf()


def dendrogram_svg(dendrogram, path, title=""):
    from scipy.cluster.hierarchy import dendrogram as draw

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 4))
    draw(np.asarray(dendrogram.merges, dtype=float), ax=ax, no_labels=True,
         color_threshold=0, above_threshold_color="k")
    ax.set_ylabel("height")
    ax.set_title(title)
    _save(fig, path)
    plt.close(fig)


def scatter_svg(projected, labels, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 5))
    labels = np.asarray(labels, dtype=object)
    for lab in sorted(set(labels.tolist())):
        mask = labels == lab
        ax.scatter(projected[mask, 0], projected[mask, 1], s=12, label=lab or "excluded")
    ax.set_xlabel("PC1")
    ax.set_ylabel("PC2")
    ax.legend()
    _save(fig, path)
    plt.close(fig)


def elbow_svg(ks, sse, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(ks, sse, marker="o", color="k")
    ax.set_xlabel("k")
    ax.set_ylabel("SSE")
    _save(fig, path)
    plt.close(fig)


def boxplot_svg(samples: dict, path, ylabel):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    names = list(samples)
    ax.boxplot([samples[n] for n in names])
    ax.set_xticks(range(1, len(names) + 1), names)
    ax.set_ylabel(ylabel)
    _save(fig, path)
    plt.close(fig)
