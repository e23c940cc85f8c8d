"""Synthetic event logs with planted behavior and engagement structure.

Every model follows one of three behavior archetypes.  An archetype is a
first-order Markov chain over ``c``/``p``/``s`` plus a session-length law;
each sampled symbol becomes a concrete action, and the conceptual model the
learner ends with is replayed from the construction actions so its quality
metrics agree with the log.  Learners belong to engagement archetypes that
set how many models they make and which behaviors those models follow.

All randomness comes from PCG64 streams spawned per learner from one seed,
so the output does not depend on generation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import InvalidSpec, LengthMismatch
from .quality import ConceptualModel, Component, Relationship, model_to_dict

BEHAVIORS = ("Observation", "Construction", "FullCycle")
COMPONENT_CATEGORIES = ("biotic", "abiotic")
RELATIONSHIP_CATEGORIES = ("consume", "destroy", "produce", "compete", "shelter")
EPOCH_MS = 1_538_352_000_000  # 2018-10-01
SPAN_MS = 3 * 365 * 86_400_000


@dataclass(frozen=True)
class ArchetypeSpec:
    """Behavior archetype.

    ``initial`` and the rows of ``transition`` are distributions over
    (c, p, s).  Session length is ``geometric`` or ``negbin``; for the latter
    ``length_sd`` sets the spread around ``mean_length``.  ``complexity_mean``
    is the model size the learner builds toward and ``relationship_palette``
    how many relationship categories the model draws from.
    """

    name: str
    initial: tuple
    transition: tuple
    mean_length: float
    length_dist: str = "geometric"
    length_sd: float = 0.0
    copy_prob: float = 0.0
    complexity_mean: float = 8.0
    relationship_palette: int = 3

    def validate(self):
        init = np.asarray(self.initial, dtype=float)
        trans = np.asarray(self.transition, dtype=float)
        if init.shape != (3,) or trans.shape != (3, 3):
            raise InvalidSpec(f"{self.name}: initial must have 3 entries and transition be 3x3")
        if (init < 0).any() or abs(init.sum() - 1) > 1e-9:
            raise InvalidSpec(f"{self.name}: initial distribution must sum to 1")
        if (trans < 0).any() or np.abs(trans.sum(axis=1) - 1).max() > 1e-9:
            raise InvalidSpec(f"{self.name}: transition rows must sum to 1")
        if self.mean_length < 1:
            raise InvalidSpec(f"{self.name}: mean length must be >= 1")
        if not 0 <= self.copy_prob <= 1:
            raise InvalidSpec(f"{self.name}: copy probability must be in [0, 1]")
        if self.length_dist not in ("geometric", "negbin"):
            raise InvalidSpec(f"{self.name}: unknown length distribution {self.length_dist!r}")
        if self.length_dist == "negbin" and self.length_sd ** 2 <= self.mean_length - 1:
            raise InvalidSpec(f"{self.name}: negative binomial needs variance above mean - 1")
        if not 1 <= self.relationship_palette <= len(RELATIONSHIP_CATEGORIES):
            raise InvalidSpec(f"{self.name}: relationship palette out of range")


@dataclass(frozen=True)
class EngagementSpec:
    n_learners: int
    models_per_learner: float
    mixture: tuple


@dataclass(frozen=True)
class CohortSpec:
    engagement: dict
    seed: int = 0
    archetypes: tuple = None
    marathon_rate: float = 0.04
    marathon_length: tuple = (600, 1600)
    idle_copy_rate: float = 0.02

    def resolved_archetypes(self):
        return self.archetypes if self.archetypes is not None else default_archetypes()

    def validate(self):
        for a in self.resolved_archetypes():
            a.validate()
        if [a.name for a in self.resolved_archetypes()] != list(BEHAVIORS):
            raise InvalidSpec(f"archetypes must be named {BEHAVIORS} in that order")
        for label, e in self.engagement.items():
            if e.n_learners < 0 or e.models_per_learner < 1:
                raise InvalidSpec(f"engagement {label}: need n_learners >= 0 and models_per_learner >= 1")
            mix = np.asarray(e.mixture, dtype=float)
            if mix.shape != (3,) or (mix < 0).any() or abs(mix.sum() - 1) > 1e-9:
                raise InvalidSpec(f"engagement {label}: mixture must be 3 probabilities summing to 1")
        if not 0 <= self.marathon_rate <= 1 or not 0 <= self.idle_copy_rate <= 1:
            raise InvalidSpec("rates must be in [0, 1]")
        lo, hi = self.marathon_length
        if not 1 <= lo <= hi:
            raise InvalidSpec("marathon length range must satisfy 1 <= lo <= hi")


@dataclass
class GroundTruth:
    model_behavior: dict = field(default_factory=dict)
    learner_engagement: dict = field(default_factory=dict)

    def rows(self):
        out = [(m, "model", b) for m, b in self.model_behavior.items()]
        out += [(l, "learner", g) for l, g in self.learner_engagement.items()]
        return out


@dataclass
class SyntheticCohort:
    events: list
    models: list
    truth: GroundTruth

    def log_lines(self):
        lines = ["#timestamp_ms\tlearner_id\tmodel_id\taction_kind\tcopied_from"]
        lines += [f"{ts}\t{l}\t{m}\t{a}\t{cf or ''}" for ts, l, m, a, cf in self.events]
        return lines

    def model_documents(self):
        return [model_to_dict(m) for m in self.models]


def default_archetypes():
    """The three behavior archetypes.

    Session lengths center on 22.62, 16 and 154.73 actions.  Matrices are
    rows c, p, s; columns c, p, s.
    """
    observation = ArchetypeSpec(
        "Observation",
        initial=(0.1, 0.5, 0.4),
        transition=((0.20, 0.45, 0.35),
                    (0.04, 0.36, 0.60),
                    (0.04, 0.56, 0.40)),
        mean_length=22.62, length_dist="negbin", length_sd=7.0,
        copy_prob=0.8, complexity_mean=10.5, relationship_palette=3,
    )
    construction = ArchetypeSpec(
        "Construction",
        initial=(0.9, 0.05, 0.05),
        transition=((0.90, 0.06, 0.04),
                    (0.60, 0.30, 0.10),
                    (0.70, 0.10, 0.20)),
        mean_length=16.0, length_dist="negbin", length_sd=5.0,
        copy_prob=0.1, complexity_mean=6.0, relationship_palette=2,
    )
    full_cycle = ArchetypeSpec(
        "FullCycle",
        initial=(0.6, 0.2, 0.2),
        transition=((0.60, 0.32, 0.08),
                    (0.08, 0.50, 0.42),
                    (0.40, 0.10, 0.50)),
        mean_length=154.73, length_dist="negbin", length_sd=40.0,
        copy_prob=0.3, complexity_mean=12.5, relationship_palette=4,
    )
    return (observation, construction, full_cycle)


def default_cohort(seed=0):
    """About 300 learners and 800 models with engagement-dependent behavior mixtures."""
    return CohortSpec(
        engagement={
            "A": EngagementSpec(30, 4.0, (0.49, 0.28, 0.23)),
            "B": EngagementSpec(45, 3.0, (0.50, 0.25, 0.25)),
            "C": EngagementSpec(75, 4.0, (0.38, 0.55, 0.07)),
            "D": EngagementSpec(150, 1.5, (0.52, 0.44, 0.04)),
        },
        seed=seed,
    )


def sample_length(arch: ArchetypeSpec, rng) -> int:
    if arch.length_dist == "geometric":
        return int(rng.geometric(1.0 / arch.mean_length))
    # 1 + NB(r, p) with mean m - 1 and variance sd^2
    m = arch.mean_length - 1.0
    var = arch.length_sd ** 2
    p = m / var
    r = m * p / (1.0 - p)
    return 1 + int(rng.negative_binomial(r, p))


def sample_symbols(arch: ArchetypeSpec, length, rng) -> str:
    init = np.asarray(arch.initial, dtype=float)
    trans = np.asarray(arch.transition, dtype=float)
    cum_init = np.cumsum(init)
    cum_trans = np.cumsum(trans, axis=1)
    u = rng.random(length)
    state = min(int(np.searchsorted(cum_init, u[0], side="right")), 2)
    out = [state]
    for x in u[1:]:
        state = min(int(np.searchsorted(cum_trans[state], x, side="right")), 2)
        out.append(state)
    return "".join("cps"[s] for s in out)


class _ModelBuilder:
    """Replays construction actions onto a model so the final document matches the log."""

    def __init__(self, model_id, arch, rng, copied=False):
        self.model_id = model_id
        self.rng = rng
        self.rel_categories = RELATIONSHIP_CATEGORIES[:arch.relationship_palette]
        self.components = []
        self.relationships = []
        self.parameters = {}
        self.next_id = 0
        self.target = max(1, int(rng.poisson(arch.complexity_mean)))
        self.last_was_add_component = False
        self.refill = None
        if copied:
            # a copy starts from an exemplar already at the target size
            while self.size < self.target:
                self._add()

    @property
    def size(self):
        return len(self.components) + len(self.relationships)

    def _add_component(self):
        cid = f"e{self.next_id}"
        self.next_id += 1
        cat = COMPONENT_CATEGORIES[0] if self.rng.random() < 0.75 else COMPONENT_CATEGORIES[1]
        self.components.append((cid, cat))
        self.last_was_add_component = True
        return "add_component"

    def _add_relationship(self):
        n = len(self.components)
        i, j = self.rng.choice(n, size=2, replace=False)
        cat = self.rel_categories[int(self.rng.integers(len(self.rel_categories)))]
        self.relationships.append((self.components[i][0], self.components[j][0], cat))
        self.last_was_add_component = False
        return "add_relationship"

    def _add(self):
        if len(self.components) < 2 or not self.last_was_add_component:
            return self._add_component()
        return self._add_relationship()

    def _remove(self):
        # drop a relationship or a component no relationship touches, chosen
        # in proportion to how many of each the model holds
        used = {e for s, t, _ in self.relationships for e in (s, t)}
        free = [i for i, (cid, _) in enumerate(self.components) if cid not in used]
        n_rel = len(self.relationships)
        if free and (not n_rel or self.rng.random() < len(free) / (len(free) + n_rel)):
            self.components.pop(free[int(self.rng.integers(len(free)))])
            self.refill = "component"
            return "remove_component"
        self.relationships.pop(int(self.rng.integers(n_rel)))
        self.refill = "relationship"
        return "remove_relationship"

    def construct(self):
        if self.refill is not None:
            # second half of a swap: put back the kind just removed
            kind, self.refill = self.refill, None
            if kind == "relationship" and len(self.components) >= 2:
                return self._add_relationship()
            return self._add_component()
        if self.size < self.target or self.size == 0:
            return self._add()
        return self._remove()

    def parameterize(self):
        names = [c[0] for c in self.components] or ["world"]
        name = names[int(self.rng.integers(len(names)))]
        key = f"{name}.initial_population" if name != "world" else "world.duration"
        self.parameters[key] = int(self.rng.integers(1, 500))

    def document(self):
        return ConceptualModel(
            self.model_id,
            tuple(Component(cid, cat, cid) for cid, cat in self.components),
            tuple(Relationship(s, t, c) for s, t, c in self.relationships),
            dict(sorted(self.parameters.items())),
        )


def _generate_learner(cohort, archetypes, learner_id, eng, rng):
    events, models, labels = [], [], {}
    n_models = 1 + int(rng.poisson(eng.models_per_learner - 1.0))
    ts = EPOCH_MS + int(rng.integers(SPAN_MS))
    for j in range(n_models):
        model_id = f"{learner_id}-M{j + 1:02d}"
        b = int(rng.choice(3, p=np.asarray(eng.mixture, dtype=float)))
        arch = archetypes[b]
        ts += 1 + int(rng.exponential(3_600_000))
        if rng.random() < cohort.idle_copy_rate:
            events.append((ts, learner_id, model_id, "copy_model", f"exemplar-{int(rng.integers(1, 21))}"))
            builder = _ModelBuilder(model_id, arch, rng, copied=True)
            models.append(builder.document())
            labels[model_id] = "Idle"
            continue
        copied = rng.random() < arch.copy_prob
        if rng.random() < cohort.marathon_rate:
            lo, hi = cohort.marathon_length
            length = int(rng.integers(lo, hi + 1))
        else:
            length = sample_length(arch, rng)
        symbols = sample_symbols(arch, length, rng)
        if copied:
            events.append((ts, learner_id, model_id, "copy_model", f"exemplar-{int(rng.integers(1, 21))}"))
        else:
            events.append((ts, learner_id, model_id, "create_model", None))
        builder = _ModelBuilder(model_id, arch, rng, copied)
        for sym in symbols:
            ts += 1 + int(rng.exponential(15_000))
            if sym == "c":
                kind = builder.construct()
            elif sym == "p":
                builder.parameterize()
                kind = "set_parameter"
            else:
                kind = "run_simulation"
            events.append((ts, learner_id, model_id, kind, None))
        models.append(builder.document())
        labels[model_id] = arch.name
    return events, models, labels


def generate(cohort: CohortSpec) -> SyntheticCohort:
    """Sample a cohort: events sorted by time, final model documents, ground truth."""
    cohort.validate()
    archetypes = cohort.resolved_archetypes()
    plan = [(label, e) for label, e in sorted(cohort.engagement.items()) for _ in range(e.n_learners)]
    truth = GroundTruth()
    events, models = [], []
    width = max(4, len(str(len(plan))))
    streams = np.random.SeedSequence(cohort.seed).spawn(len(plan))
    for idx, ((label, eng), ss) in enumerate(zip(plan, streams)):
        learner_id = f"L{idx + 1:0{width}d}"
        rng = np.random.Generator(np.random.PCG64(ss))
        ev, ms, labels = _generate_learner(cohort, archetypes, learner_id, eng, rng)
        events.extend(ev)
        models.extend(ms)
        truth.model_behavior.update(labels)
        truth.learner_engagement[learner_id] = label
    events.sort(key=lambda e: (e[0], e[1]))
    return SyntheticCohort(events, models, truth)


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-corrected pair-counting agreement between two partitions."""
    labels_a, labels_b = list(labels_a), list(labels_b)
    if len(labels_a) != len(labels_b):
        raise LengthMismatch(f"{len(labels_a)} vs {len(labels_b)} labels")
    n = len(labels_a)
    if n < 2:
        return 1.0
    table = {}
    for a, b in zip(labels_a, labels_b):
        table[(a, b)] = table.get((a, b), 0) + 1
    rows, cols = {}, {}
    for (a, b), v in table.items():
        rows[a] = rows.get(a, 0) + v
        cols[b] = cols.get(b, 0) + v
    index = sum(comb(v, 2) for v in table.values())
    sum_a = sum(comb(v, 2) for v in rows.values())
    sum_b = sum(comb(v, 2) for v in cols.values())
    expected = sum_a * sum_b / comb(n, 2)
    maximum = (sum_a + sum_b) / 2
    if maximum == expected:
        # both partitions trivial in the same way
        return 1.0 if index == maximum else 0.0
    return (index - expected) / (maximum - expected)
