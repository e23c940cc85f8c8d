"""
Sessions and their lengths
==========================

A synthetic cohort is turned into activity sequences, trimmed of very long
sessions and split into length groups at the valleys of a kernel density.
"""

import numpy as np

from behavior_mining import ingest, segmentation, synth

# about 300 learners and 800 models, every model tagged with a planted behavior
cohort = synth.generate(synth.default_cohort(seed=7))
events = ingest.parse_event_log(cohort.log_lines())
print(ingest.ingest_report(events))

# one symbol per activity: c = construction, p = parameterization, s = simulation
sequences = ingest.build_sequences(events)
for s in sequences[:3]:
    print(s.sequence_id, s.symbols[:40])

lengths = np.array([s.length for s in sequences])
kept, removed, bounds = segmentation.filter_outliers(lengths)
print(f"trimmed {len(removed)} sessions longer than {bounds.upper:.1f} actions")

density = segmentation.kde(lengths[kept])
cuts = segmentation.find_cutpoints(density)
groups = segmentation.segment(lengths[kept], cuts.cuts)
print("cut points", [round(c, 2) for c in cuts.cuts], "group sizes", groups.counts)

# the two short behaviors share a group; long full-cycle sessions sit apart
truth = [cohort.truth.model_behavior[sequences[i].model_id] for i in kept]
for name in synth.BEHAVIORS:
    share = np.bincount([g for g, t in zip(groups.groups, truth) if t == name], minlength=3)
    print(f"{name:>12}: {share}")
