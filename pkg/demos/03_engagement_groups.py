"""
Engagement groups
=================

Learners are described by how many models they made or copied and by their
activity totals.  The z-scored features are projected on two principal
components and grouped with K-means++.
"""

import numpy as np

from behavior_mining import ingest, learners, synth

cohort = synth.generate(synth.default_cohort(seed=7))
events = ingest.parse_event_log(cohort.log_lines())
ids, features = learners.learner_features(ingest.model_inventory(events), ingest.build_sequences(events))

scaled, *_ = learners.standardize(features)
model = learners.pca(scaled, 2)
projected = learners.project(model, scaled)
print("explained variance", np.round(model.explained_ratio, 3))
for c, row in enumerate(model.components):
    print(f"PC{c + 1} loadings", {f: round(float(v), 2) for f, v in zip(learners.FEATURES, row)})

report = learners.elbow(projected, range(1, 11), seed=7)
print("SSE by k", [round(v, 1) for v in report.sse], "largest relative drop at k =", report.elbow_k)

result = learners.kmeans_pp(projected, 5, seed=7)
for g in learners.exclude_singletons(result, projected):
    planted = [cohort.truth.learner_engagement[ids[i]] for i in g.members]
    print(g.label or "excluded", len(g.members), "learners; planted", sorted(set(planted)))
