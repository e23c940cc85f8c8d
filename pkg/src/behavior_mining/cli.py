"""Command-line pipeline.

Each stage is a subcommand that reads plain files from ``--in`` (default:
the output directory) and writes its own artifacts plus ``meta/<stage>.json``
into ``--out``.  ``pipeline`` runs the stages in order on one directory, so
its output is the same as running the stages one after another.

Exit status: 0 on success, 1 for bad input or usage, 2 for numerical or
internal failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import platform
import sys
import time
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np

from . import __version__
from . import ingest, learners, quality, segmentation, seqcluster, stats, synth
from .artifacts import read_csv, read_json, write_csv, write_json
from .errors import InputError, NumericalFailure

STAGES = ("ingest", "segment", "cluster-behaviors", "cluster-learners", "quality", "stats")


@dataclass(frozen=True)
class PipelineConfig:
    """Every option of every stage; field names double as config-file keys."""

    log: str = None
    format: str = "tsv"
    models: str = None
    out: str = None
    inputs: str = None
    outlier_k: float = 2.0
    sample_sd: bool = False
    bandwidth: object = "auto"
    grid_size: int = 512
    n_cuts: int = 2
    linkage: str = "average"
    group_clusters: tuple = (5, 5, 5)
    auto_group_clusters: bool = False
    merge_target: int = 3
    label_thresholds: tuple = (0.6, 0.7, 0.3)
    length_weight: float = 0.25
    aggregate: str = "sum"
    k: int = 5
    k_range: tuple = (1, 10)
    restarts: int = 10
    seed: int = None
    yates: bool = False
    welch: bool = False
    bonferroni: bool = False
    split_variety: bool = False
    truth: str = None
    threads: int = 1
    plots: bool = False
    record_timings: bool = False


# options echoed into each stage's metadata; paths are reduced to file names
# and thread count is left out because results do not depend on it
STAGE_KEYS = {
    "ingest": ("log", "format"),
    "segment": ("outlier_k", "sample_sd", "bandwidth", "grid_size", "n_cuts"),
    "cluster-behaviors": ("linkage", "group_clusters", "auto_group_clusters", "merge_target",
                          "label_thresholds", "length_weight"),
    "cluster-learners": ("aggregate", "k", "k_range", "restarts", "seed"),
    "quality": ("models", "split_variety"),
    "stats": ("yates", "welch", "bonferroni"),
    "eval": ("truth",),
    "synth": ("seed",),
}
PATH_KEYS = ("log", "models", "truth")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# -- option parsing -------------------------------------------------------------

def _int_list(text):
    try:
        return tuple(int(v) for v in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return tuple(float(v) for v in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _k_range(text):
    parts = str(text).replace(":", "-").split("-")
    try:
        lo, hi = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO-HI, got {text!r}") from None
    return lo, hi


def _bandwidth(text):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from None


def _add(parser, *flags, **kw):
    parser.add_argument(*flags, default=argparse.SUPPRESS, **kw)


def _common(p):
    _add(p, "--out", required=True, help="output directory")
    _add(p, "--in", dest="inputs", help="directory holding the previous stages' files (default: --out)")
    _add(p, "--config", help="JSON file with option values; flags override it")
    _add(p, "--threads", type=int, help="worker threads for distance matrices")
    _add(p, "--plots", action="store_true", help="also write SVG figures")
    _add(p, "--record-timings", action="store_true", help="put wall-clock timings in run metadata")


def _ingest_opts(p):
    _add(p, "--log", help="event log file")
    _add(p, "--format", choices=("tsv", "jsonl"), help="event log format (default tsv)")


def _segment_opts(p):
    _add(p, "--outlier-k", type=float, help="trim lengths outside mean +/- k*sd (default 2; inf disables)")
    _add(p, "--sample-sd", action="store_true", help="use the sample sd for trimming")
    _add(p, "--bandwidth", type=_bandwidth, help="KDE bandwidth or 'auto' (Silverman)")
    _add(p, "--grid-size", type=int, help="KDE grid points (default 512)")
    _add(p, "--n-cuts", type=int, help="number of length cut points (default 2)")


def _behavior_opts(p):
    _add(p, "--linkage", choices=seqcluster.LINKAGES, help="agglomeration linkage (default average)")
    _add(p, "--group-clusters", type=_int_list, help="clusters per length group, e.g. 5,5,5")
    _add(p, "--auto-group-clusters", action="store_true",
         help="pick each group's cluster count at the widest dendrogram gap, capped by --group-clusters")
    _add(p, "--merge-target", type=int, help="behavior types after merging (default 3)")
    _add(p, "--label-thresholds", type=_float_list,
         help="construction_min_c,observation_min_ps,observation_max_c (default 0.6,0.7,0.3)")
    _add(p, "--length-weight", type=float, help="weight of log mean length when merging profiles")


def _learner_opts(p):
    _add(p, "--aggregate", choices=("sum", "mean"), help="per-model activity aggregation (default sum)")
    _add(p, "--k", type=int, help="K-means cluster count (default 5)")
    _add(p, "--k-range", type=_k_range, help="elbow k range LO-HI (default 1-10)")
    _add(p, "--restarts", type=int, help="K-means++ restarts (default 10)")
    _add(p, "--seed", type=int, help="random seed")


def _quality_opts(p):
    _add(p, "--models", help="model JSON file or directory of JSON files")
    _add(p, "--split-variety", action="store_true",
         help="also report component and relationship variety separately")


def _stats_opts(p):
    _add(p, "--yates", action="store_true", help="Yates correction for 2x2 chi-square tables")
    _add(p, "--welch", action="store_true", help="Welch instead of pooled t tests")
    _add(p, "--bonferroni", action="store_true", help="Bonferroni-adjust pairwise p-values")


def build_parser():
    parser = _Parser(prog="behavior-mining",
                     description="Mine behavior types and engagement groups from modeling logs.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    specs = {
        "ingest": ("parse an event log into activity sequences", [_ingest_opts]),
        "segment": ("trim outliers and split sequences into length groups", [_segment_opts]),
        "cluster-behaviors": ("cluster sequences into behavior types", [_behavior_opts]),
        "cluster-learners": ("group learners by engagement", [_learner_opts]),
        "quality": ("score model complexity and variety", [_quality_opts]),
        "stats": ("test behavior, engagement and quality relations", [_stats_opts]),
        "pipeline": ("run every stage in order", [_ingest_opts, _segment_opts, _behavior_opts,
                                                 _learner_opts, _quality_opts, _stats_opts]),
    }
    for name, (help_text, adders) in specs.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        _common(p)
        for add in adders:
            add(p)
        if name == "pipeline":
            _add(p, "--truth", help="ground-truth CSV; adds eval.csv with the adjusted Rand index")
    p = sub.add_parser("synth", help="generate a synthetic cohort", description="generate a synthetic cohort")
    _add(p, "--out", required=True, help="output directory")
    _add(p, "--seed", type=int, required=True, help="random seed")
    _add(p, "--record-timings", action="store_true", help="put wall-clock timings in run metadata")
    return parser


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}
_TUPLE_KEYS = ("group_clusters", "label_thresholds", "k_range")


def load_config_file(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: config must be a JSON object")
    values = {}
    for key, value in doc.items():
        name = key.replace("-", "_")
        if name not in _FIELDS or name in ("out", "inputs"):
            raise InputError(f"{path}: unknown config key {key!r}")
        values[name] = tuple(value) if name in _TUPLE_KEYS and isinstance(value, list) else value
    return values


def validate(cfg: PipelineConfig):
    def need(cond, msg):
        if not cond:
            raise InputError(msg)

    need(cfg.format in ("tsv", "jsonl"), f"unknown format {cfg.format!r}")
    need(cfg.outlier_k > 0, "outlier k must be positive")
    need(cfg.bandwidth == "auto" or (isinstance(cfg.bandwidth, (int, float)) and cfg.bandwidth > 0),
         "bandwidth must be 'auto' or positive")
    need(cfg.grid_size >= 3, "grid size must be at least 3")
    need(cfg.n_cuts >= 1, "need at least one cut point")
    need(len(cfg.group_clusters) == cfg.n_cuts + 1,
         f"--group-clusters needs {cfg.n_cuts + 1} values for {cfg.n_cuts} cut point(s)")
    need(all(k >= 1 for k in cfg.group_clusters), "cluster counts must be >= 1")
    need(cfg.linkage in seqcluster.LINKAGES, f"unknown linkage {cfg.linkage!r}")
    need(cfg.merge_target >= 1, "merge target must be >= 1")
    need(len(cfg.label_thresholds) == 3 and all(0 <= t <= 1 for t in cfg.label_thresholds),
         "label thresholds must be three numbers in [0, 1]")
    need(cfg.length_weight >= 0, "length weight must be >= 0")
    need(cfg.aggregate in ("sum", "mean"), f"unknown aggregate {cfg.aggregate!r}")
    need(cfg.k >= 1, "k must be >= 1")
    need(len(cfg.k_range) == 2 and 1 <= cfg.k_range[0] <= cfg.k_range[1], "k range must satisfy 1 <= LO <= HI")
    need(cfg.restarts >= 1, "restarts must be >= 1")
    need(cfg.threads >= 1, "threads must be >= 1")


def resolve(args) -> PipelineConfig:
    given = {k: v for k, v in vars(args).items() if k in _FIELDS}
    values = load_config_file(args.config) if getattr(args, "config", None) else {}
    values.update(given)
    cfg = dataclasses.replace(PipelineConfig(), **values)
    validate(cfg)
    return cfg


# -- shared helpers ---------------------------------------------------------------

def _echo(cfg, keys):
    out = {}
    for k in keys:
        v = getattr(cfg, k)
        out[k] = Path(v).name if k in PATH_KEYS and v else v
    return out


def _versions():
    return {
        "behavior_mining": __version__,
        "numpy": metadata.version("numpy"),
        "python": platform.python_version(),
    }


def _write_meta(out, stage, cfg, seconds=None, extra=None):
    doc = {"stage": stage, "versions": _versions(), "config": _echo(cfg, STAGE_KEYS[stage])}
    if "seed" in STAGE_KEYS[stage]:
        doc["seed"] = cfg.seed
    if extra:
        doc.update(extra)
    if cfg.record_timings and seconds is not None:
        doc["timings"] = {"seconds": seconds}
    write_json(Path(out) / "meta" / f"{stage}.json", doc)


def _need_file(path, hint):
    path = Path(path)
    if not path.is_file():
        raise InputError(f"missing input {path} ({hint})")
    return path


def _in_dir(cfg):
    return Path(cfg.inputs or cfg.out)


def _load_sequences(cfg):
    rows = read_csv(_need_file(_in_dir(cfg) / "sequences.csv", "run ingest first"))
    return [ingest.ActivitySequence(r["learner_id"], r["model_id"], r["is_copied"] == "true",
                                    r["symbols"], int(r["first_timestamp"])) for r in rows]


def _load_inventory(cfg):
    rows = read_csv(_need_file(_in_dir(cfg) / "models.csv", "run ingest first"))
    return [ingest.ModelRecord(r["learner_id"], r["model_id"], r["is_copied"] == "true",
                               int(r["first_timestamp"]), int(r["n_activities"])) for r in rows]


# -- stages -------------------------------------------------------------------------

def run_ingest(cfg, out):
    if not cfg.log:
        raise InputError("ingest needs --log")
    path = _need_file(cfg.log, "event log")
    with path.open(encoding="utf-8") as fh:
        try:
            events = ingest.parse_event_log(fh, cfg.format)
        except InputError as exc:
            raise InputError(f"{path}: {exc}") from None
    seqs = ingest.build_sequences(events)
    inventory = ingest.model_inventory(events)
    write_csv(out / "sequences.csv",
              ["sequence_id", "learner_id", "model_id", "is_copied", "first_timestamp", "length", "symbols"],
              [(s.sequence_id, s.learner_id, s.model_id, s.is_copied, s.first_timestamp, s.length, s.symbols)
               for s in seqs])
    write_csv(out / "models.csv", ["learner_id", "model_id", "is_copied", "first_timestamp", "n_activities"],
              [(r.learner_id, r.model_id, r.is_copied, r.first_timestamp, r.n_activities) for r in inventory])
    report = ingest.ingest_report(events)
    if seqs:
        report["length_summary"] = dataclasses.asdict(ingest.sequence_stats(seqs))
    write_json(out / "ingest_report.json", report)


def run_segment(cfg, out):
    seqs = _load_sequences(cfg)
    lengths = [s.length for s in seqs]
    retained, removed, bounds = segmentation.filter_outliers(lengths, cfg.outlier_k, cfg.sample_sd)
    kept = [lengths[i] for i in retained]
    density = segmentation.kde(kept, cfg.bandwidth, cfg.grid_size)
    cuts = segmentation.find_cutpoints(density, cfg.n_cuts)
    segs = segmentation.segment(kept, cuts.cuts)
    names = segs.names
    group = ["outlier"] * len(seqs)
    for t, i in enumerate(retained):
        group[i] = names[segs.groups[t]]
    write_json(out / "segmentation.json", {
        "outlier_bounds": dataclasses.asdict(bounds),
        "removed": len(removed),
        "retained": len(retained),
        "bandwidth": density.bandwidth,
        "cuts": cuts.cuts,
        "fallback": cuts.fallback,
        "groups": names,
        "counts": segs.counts,
    })
    write_csv(out / "density.csv", ["grid", "density"], zip(density.grid, density.density))
    write_csv(out / "segments.csv", ["sequence_id", "length", "group"],
              [(s.sequence_id, s.length, g) for s, g in zip(seqs, group)])


def run_cluster_behaviors(cfg, out):
    seqs = _load_sequences(cfg)
    seg = read_json(_need_file(_in_dir(cfg) / "segmentation.json", "run segment first"))
    names = seg["groups"]
    rows = read_csv(_need_file(_in_dir(cfg) / "segments.csv", "run segment first"))
    by_id = {r["sequence_id"]: r["group"] for r in rows}
    index = {n: g for g, n in enumerate(names)}
    try:
        groups = [index.get(by_id[s.sequence_id]) for s in seqs]
    except KeyError as exc:
        raise InputError(f"segments.csv has no row for sequence {exc.args[0]}") from None
    if len(cfg.group_clusters) != len(names):
        raise InputError(f"--group-clusters has {len(cfg.group_clusters)} values for {len(names)} length groups")
    thresholds = seqcluster.LabelThresholds(*cfg.label_thresholds)
    res = seqcluster.cluster_sequences(
        [s.symbols for s in seqs], groups, len(names), cfg.group_clusters, cfg.linkage,
        cfg.merge_target, cfg.auto_group_clusters, thresholds, cfg.length_weight, cfg.threads)

    for g, (idx, dend) in sorted(res.dendrograms.items()):
        write_json(out / f"dendrogram_{names[g]}.json", {
            "group": names[g], "linkage": dend.linkage, "n": dend.n,
            "leaves": [seqs[i].sequence_id for i in idx],
            "merges": [[int(a), int(b), float(h), int(n)] for a, b, h, n in dend.merges],
        })
        if cfg.plots:
            from .plots import dendrogram_svg
            dendrogram_svg(dend, out / f"dendrogram_{names[g]}.svg", f"{names[g]} sequences")
    write_csv(out / "clusters.csv",
              ["sequence_id", "group", "cluster", "merged_cluster", "behavior_type", "learner_id", "model_id"],
              [(s.sequence_id, names[groups[i]], res.group_labels[i], res.merged_labels[i],
                res.behaviors[i].value, s.learner_id, s.model_id)
               for i, s in enumerate(seqs) if res.behaviors[i] is not None])
    merged_of = {c: m for m, parts in enumerate(res.merged) for c in parts}

    def prof(p):
        return {"frac_c": p.frac_c, "frac_p": p.frac_p, "frac_s": p.frac_s,
                "mean_length": p.mean_length, "count": p.count}

    write_json(out / "behavior_profiles.json", {
        "options": res.options,
        "group_k": {names[g]: k for g, k in sorted(res.group_k.items())},
        "clusters": [{"group": names[g], "cluster": c, "merged_cluster": merged_of[i], **prof(p)}
                     for i, ((g, c), p) in enumerate(zip(res.cluster_keys, res.cluster_profiles))],
        "merged": [{"merged_cluster": m, "behavior_type": b.value, "type_number": b.type_number, **prof(p)}
                   for m, (b, p) in enumerate(zip(res.merged_behaviors, res.merged_profiles))],
    })


def run_cluster_learners(cfg, out):
    if cfg.seed is None:
        raise InputError("cluster-learners needs --seed")
    ids, feats = learners.learner_features(_load_inventory(cfg), _load_sequences(cfg), cfg.aggregate)
    scaled, means, scales, constant = learners.standardize(feats)
    model = learners.pca(scaled, 2, scales)
    proj = learners.project(model, scaled)
    n = len(ids)
    lo, hi = cfg.k_range
    ks = list(range(lo, min(hi, n) + 1))
    if not ks:
        raise InputError(f"k range {lo}-{hi} is empty for {n} learners")
    report = learners.elbow(proj, ks, cfg.seed, cfg.restarts)
    if cfg.k > n:
        raise InputError(f"k = {cfg.k} exceeds the {n} learners")
    km = learners.kmeans_pp(proj, cfg.k, cfg.seed, cfg.restarts)
    groups = learners.exclude_singletons(km, proj)
    label_of = {}
    for grp in groups:
        for i in grp.members:
            label_of[i] = grp.label
    importance, dominant = learners.feature_importance(model)

    write_csv(out / "learner_features.csv", ["learner_id", "v1", "v2", "v3", "v4", "v5"],
              [(lid, *row) for lid, row in zip(ids, feats)])
    write_csv(out / "projection.csv", ["learner_id", "pc1", "pc2", "cluster", "group"],
              [(lid, proj[i, 0], proj[i, 1], km.labels[i], label_of[i]) for i, lid in enumerate(ids)])
    write_csv(out / "loadings.csv", ["component", "feature", "value"],
              [(f"pc{c + 1}", f"v{j + 1}", model.components[c, j])
               for c in range(model.components.shape[0]) for j in range(model.components.shape[1])])
    write_csv(out / "elbow.csv", ["k", "sse", "relative_drop"],
              zip(report.ks, report.sse, report.relative_drop))
    write_json(out / "learner_groups.json", {
        "features": dict(zip(("v1", "v2", "v3", "v4", "v5"), learners.FEATURES)),
        "standardization": {"means": means, "scales": scales, "constant": constant},
        "pca": {"eigenvalues": model.eigenvalues, "explained_ratio": model.all_ratios,
                "importance": importance, "dominant_feature": [f"v{j + 1}" for j in dominant]},
        "kmeans": {"k": km.k, "sse": km.sse, "iterations": km.iterations, "restart": km.restart,
                   "seed": km.seed, "centroids": km.centroids},
        "elbow_k": report.elbow_k,
        "groups": [{"label": g.label, "excluded": g.excluded, "size": len(g.members),
                    "centroid": g.centroid, "members": [ids[i] for i in g.members]} for g in groups],
    })
    if cfg.plots:
        from .plots import elbow_svg, scatter_svg
        scatter_svg(proj, [label_of[i] for i in range(n)], out / "projection.svg")
        elbow_svg(report.ks, report.sse, out / "elbow.svg")


def run_quality(cfg, out):
    if not cfg.models:
        raise InputError("quality needs --models")
    path = Path(cfg.models)
    if not path.exists():
        raise InputError(f"missing input {path} (model documents)")
    models = quality.load_models(path)
    behavior = {}
    clusters = _in_dir(cfg) / "clusters.csv"
    if clusters.is_file():
        for r in read_csv(clusters):
            behavior.setdefault(r["model_id"], r["behavior_type"])
    header = ["model_id", "behavior_type", "complexity", "variety"]
    if cfg.split_variety:
        header += ["component_variety", "relationship_variety"]
    rows = []
    for m in models:
        row = [m.model_id, behavior.get(m.model_id, ""), quality.complexity(m), quality.variety(m)]
        if cfg.split_variety:
            row += list(quality.variety(m, split=True))
        rows.append(row)
    write_csv(out / "quality.csv", header, rows)
    if cfg.plots:
        from .plots import boxplot_svg
        for metric, col in (("complexity", 2), ("variety", 3)):
            samples = {b.value: [r[col] for r in rows if r[1] == b.value] for b in seqcluster.BehaviorType}
            boxplot_svg({k: v for k, v in samples.items() if v}, out / f"{metric}_by_behavior.svg", metric)


def _result(res: stats.TestResult, **inputs):
    return {"kind": res.kind, "statistic": res.statistic, "df": list(res.df), "p_value": res.p_value,
            "inputs": inputs}


def _attempt(fn, **inputs):
    try:
        return _result(fn(), **inputs)
    except InputError as exc:
        return {"skipped": str(exc), "inputs": inputs}


def run_stats(cfg, out):
    d = _in_dir(cfg)
    clusters = read_csv(_need_file(d / "clusters.csv", "run cluster-behaviors first"))
    proj = read_csv(_need_file(d / "projection.csv", "run cluster-learners first"))
    qrows = read_csv(_need_file(d / "quality.csv", "run quality first"))
    types = [b.value for b in seqcluster.BehaviorType]
    group_of = {r["learner_id"]: r["group"] for r in proj if r["group"]}
    labels = sorted(set(group_of.values()))
    table = np.zeros((len(labels), len(types)), dtype=np.int64)
    for r in clusters:
        g = group_of.get(r["learner_id"])
        if g is not None:
            table[labels.index(g), types.index(r["behavior_type"])] += 1
    keep_r = [i for i in range(len(labels)) if table[i].sum() > 0]
    keep_c = [j for j in range(len(types)) if table[:, j].sum() > 0]
    sub = table[np.ix_(keep_r, keep_c)]
    chi_inputs = {"rows": [labels[i] for i in keep_r], "columns": [types[j] for j in keep_c],
                  "table": sub, "dropped_rows": [labels[i] for i in range(len(labels)) if i not in keep_r],
                  "dropped_columns": [types[j] for j in range(len(types)) if j not in keep_c]}
    if len(keep_r) < 2 or len(keep_c) < 2:
        chi = {"skipped": "table needs at least 2 non-empty rows and columns", "inputs": chi_inputs}
    else:
        chi = _attempt(lambda: stats.chi_square_independence(sub, cfg.yates), **chi_inputs)

    mode = "welch" if cfg.welch else "pooled"
    report = {"behavior_by_engagement": chi, "quality": {}}
    for metric in ("complexity", "variety"):
        samples = {t: [float(r[metric]) for r in qrows if r["behavior_type"] == t] for t in types}
        samples = {t: v for t, v in samples.items() if v}
        summary = {t: {"n": len(v), "mean": float(np.mean(v)), "sd": float(np.std(v, ddof=1)) if len(v) > 1 else None}
                   for t, v in samples.items()}
        anova = _attempt(lambda: stats.one_way_anova(list(samples.values())), groups=list(samples))
        pairs = {}
        for (a, b) in [(a, b) for i, a in enumerate(samples) for b in list(samples)[i + 1:]]:
            pairs[f"{a} vs {b}"] = _attempt(lambda: stats.t_test(samples[a], samples[b], mode), a=a, b=b)
        if cfg.bonferroni:
            m = len(pairs)
            for res in pairs.values():
                if "p_value" in res:
                    res["p_value"] = min(1.0, res["p_value"] * m)
        report["quality"][metric] = {"summary": summary, "anova": anova, "t_tests": pairs,
                                     "t_mode": mode, "bonferroni": cfg.bonferroni}
    write_json(out / "stats_report.json", report)


def run_eval(cfg, out):
    truth = {}
    for r in read_csv(_need_file(cfg.truth, "ground truth")):
        if r.get("kind") == "model":
            truth[r["entity_id"]] = r["label"]
    rows = read_csv(_need_file(_in_dir(cfg) / "clusters.csv", "run cluster-behaviors first"))
    scored = [(truth[r["model_id"]], r["merged_cluster"], r["behavior_type"])
              for r in rows if r["model_id"] in truth]
    if not scored:
        raise InputError("no clustered sequence has a ground-truth label")
    ari = synth.adjusted_rand_index([t for t, _, _ in scored], [m for _, m, _ in scored])
    accuracy = sum(t == b for t, _, b in scored) / len(scored)
    write_csv(out / "eval.csv", ["metric", "value"],
              [("ari", ari), ("label_accuracy", accuracy), ("sequences_scored", len(scored))])


def run_synth(cfg, out):
    cohort = synth.generate(synth.default_cohort(cfg.seed))
    out.mkdir(parents=True, exist_ok=True)
    (out / "log.tsv").write_text("\n".join(cohort.log_lines()) + "\n", encoding="utf-8")
    write_json(out / "models.json", cohort.model_documents())
    write_csv(out / "truth.csv", ["entity_id", "kind", "label"], cohort.truth.rows())


RUNNERS = {
    "ingest": run_ingest,
    "segment": run_segment,
    "cluster-behaviors": run_cluster_behaviors,
    "cluster-learners": run_cluster_learners,
    "quality": run_quality,
    "stats": run_stats,
    "eval": run_eval,
    "synth": run_synth,
}


def _run_stage(stage, cfg, out):
    t0 = time.perf_counter()
    RUNNERS[stage](cfg, out)
    _write_meta(out, stage, cfg, time.perf_counter() - t0)


def run_pipeline(cfg, out):
    missing = [flag for flag, v in (("--log", cfg.log), ("--models", cfg.models), ("--seed", cfg.seed))
               if v is None]
    if missing:
        raise InputError(f"pipeline needs {', '.join(missing)}")
    cfg = dataclasses.replace(cfg, inputs=None)
    stages = list(STAGES) + (["eval"] if cfg.truth else [])
    for stage in stages:
        _run_stage(stage, cfg, out)
    write_json(out / "meta" / "pipeline.json", {
        "stages": stages, "versions": _versions(), "seed": cfg.seed,
        "config": _echo(cfg, [k for k in _FIELDS if k not in ("out", "inputs", "threads", "record_timings")]),
    })


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if not args.command:
        print(parser.format_help(), file=sys.stderr)
        return 1
    try:
        cfg = resolve(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "pipeline":
            run_pipeline(cfg, out)
        else:
            _run_stage(args.command, cfg, out)
    except (InputError, OSError, ValueError) as exc:
        print(f"behavior-mining {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"behavior-mining {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort guard so the exit code stays meaningful
        print(f"behavior-mining {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0
