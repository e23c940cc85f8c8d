"""
Behavior types from edit distance
=================================

Within each length group, sequences are compared by Levenshtein distance
and clustered bottom-up.  The per-group clusters are then merged by their
activity mix into three behavior types.
"""

from collections import Counter

import numpy as np

from behavior_mining import ingest, segmentation, seqcluster, synth

cohort = synth.generate(synth.default_cohort(seed=7))
sequences = ingest.build_sequences(ingest.parse_event_log(cohort.log_lines()))
lengths = np.array([s.length for s in sequences])

kept, _, _ = segmentation.filter_outliers(lengths)
cuts = segmentation.find_cutpoints(segmentation.kde(lengths[kept])).cuts
groups = [None] * len(sequences)
for i, g in zip(kept, segmentation.segment(lengths[kept], cuts).groups):
    groups[i] = g

# a toy distance first: two substitutions and an insertion
print(seqcluster.levenshtein("ccpsc", "cpps"), "edits between ccpsc and cpps")

result = seqcluster.cluster_sequences([s.symbols for s in sequences], groups, 3)
for behavior, p in zip(result.merged_behaviors, result.merged_profiles):
    print(f"{behavior.value:>12}  c={p.frac_c:.2f} p={p.frac_p:.2f} s={p.frac_s:.2f}  "
          f"mean length {p.mean_length:6.1f}  n={p.count}")

scored = [i for i in range(len(sequences)) if result.behaviors[i] is not None]
truth = [cohort.truth.model_behavior[sequences[i].model_id] for i in scored]
predicted = [result.behaviors[i].value for i in scored]
print("adjusted Rand index", round(synth.adjusted_rand_index(truth, predicted), 3))
print(Counter(zip(truth, predicted)).most_common())
