"""Event-log ingestion and activity-sequence construction.

A log is a stream of timestamped records, one per learner action on a model.
Six of the eight action kinds are activities and map onto the three-symbol
alphabet ``c`` (construction), ``p`` (parameterization) and ``s``
(simulation); ``create_model`` and ``copy_model`` are lifecycle records that
only decide whether a model counts as original or copied.
"""

from __future__ import annotations

import enum
import json
import numbers
import statistics
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import EmptyCollection, EmptyLog, MalformedRecord, UnknownActionKind

ACTION_KINDS = (
    "create_model",
    "copy_model",
    "add_component",
    "remove_component",
    "add_relationship",
    "remove_relationship",
    "set_parameter",
    "run_simulation",
)
LIFECYCLE_KINDS = frozenset({"create_model", "copy_model"})
SYMBOLS = "cps"


class ActivityClass(enum.Enum):
    CONSTRUCTION = "c"
    PARAMETERIZATION = "p"
    SIMULATION = "s"

    @property
    def symbol(self) -> str:
        return self.value


_CLASS_OF = {
    "add_component": ActivityClass.CONSTRUCTION,
    "remove_component": ActivityClass.CONSTRUCTION,
    "add_relationship": ActivityClass.CONSTRUCTION,
    "remove_relationship": ActivityClass.CONSTRUCTION,
    "set_parameter": ActivityClass.PARAMETERIZATION,
    "run_simulation": ActivityClass.SIMULATION,
}


@dataclass(frozen=True)
class RawEvent:
    timestamp: int
    learner_id: str
    model_id: str
    action_kind: str
    copied_from: Optional[str] = None

    def __post_init__(self):
        if self.action_kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.action_kind!r}")
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")
        if (self.action_kind == "copy_model") != (self.copied_from is not None):
            raise ValueError("copied_from must be present exactly for copy_model")


@dataclass(frozen=True)
class ActivitySequence:
    learner_id: str
    model_id: str
    is_copied: bool
    symbols: str
    first_timestamp: int = 0

    @property
    def length(self) -> int:
        return len(self.symbols)

    @property
    def sequence_id(self) -> str:
        return f"{self.learner_id}/{self.model_id}"


@dataclass(frozen=True)
class ModelRecord:
    """One (learner, model) pair seen in the log, with or without activities."""

    learner_id: str
    model_id: str
    is_copied: bool
    first_timestamp: int
    n_activities: int


@dataclass(frozen=True)
class SequenceSummary:
    count: int
    mean_length: float
    median_length: float
    min_length: int
    max_length: int


def classify_action(kind: str) -> Optional[ActivityClass]:
    """Map an action token to its activity class; lifecycle tokens give None."""
    if kind in LIFECYCLE_KINDS:
        return None
    return _CLASS_OF[kind]


def _make_event(lineno, ts, learner, model, action, copied_from):
    if action not in ACTION_KINDS:
        raise UnknownActionKind(lineno, f"unknown action kind {action!r}")
    try:
        ts = int(ts)
    except (TypeError, ValueError):
        raise MalformedRecord(lineno, f"bad timestamp {ts!r}") from None
    if ts < 0:
        raise MalformedRecord(lineno, "negative timestamp")
    if not learner or not model:
        raise MalformedRecord(lineno, "learner_id and model_id are required")
    copied_from = copied_from or None
    if action == "copy_model" and copied_from is None:
        raise MalformedRecord(lineno, "copy_model without copied_from")
    if action != "copy_model" and copied_from is not None:
        raise MalformedRecord(lineno, f"copied_from given for {action}")
    return RawEvent(ts, str(learner), str(model), action, copied_from)


def _parse_tsv_line(lineno, line):
    fields = line.split("\t")
    if len(fields) == 4:
        fields.append("")
    if len(fields) != 5:
        raise MalformedRecord(lineno, f"expected 5 tab-separated fields, got {len(fields)}")
    return _make_event(lineno, *fields)


def _parse_jsonl_line(lineno, line):
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(lineno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise MalformedRecord(lineno, "record is not an object")
    missing = [k for k in ("ts", "learner", "model", "action") if k not in obj]
    if missing:
        raise MalformedRecord(lineno, f"missing field(s) {', '.join(missing)}")
    ts = obj["ts"]
    if isinstance(ts, bool) or (isinstance(ts, float) and not ts.is_integer()):
        raise MalformedRecord(lineno, f"bad timestamp {ts!r}")
    return _make_event(lineno, ts, obj["learner"], obj["model"], obj["action"],
                       obj.get("copied_from"))


def parse_event_log(source: Iterable[str], format: str = "tsv") -> list[RawEvent]:
    """Parse a line-delimited event log.

    ``format`` is ``"tsv"`` (timestamp, learner, model, action, copied_from)
    or ``"jsonl"`` (objects with keys ts, learner, model, action,
    copied_from).  Lines starting with ``#`` and blank lines are skipped.
    """
    if format not in ("tsv", "jsonl"):
        raise ValueError(f"unknown log format {format!r}")
    parse_line = _parse_tsv_line if format == "tsv" else _parse_jsonl_line
    events = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        events.append(parse_line(lineno, line))
    if not events:
        raise EmptyLog("event log contains no records")
    return events


def _ordered(events):
    # stable: ties keep input order
    return sorted(range(len(events)), key=lambda i: events[i].timestamp)


def model_inventory(events: list[RawEvent]) -> list[ModelRecord]:
    """Every (learner, model) pair in the log, sorted by learner then first event."""
    copied = {e.model_id for e in events if e.action_kind == "copy_model"}
    first = {}
    counts = {}
    for i in _ordered(events):
        e = events[i]
        key = (e.learner_id, e.model_id)
        first.setdefault(key, e.timestamp)
        counts[key] = counts.get(key, 0) + (e.action_kind not in LIFECYCLE_KINDS)
    records = [
        ModelRecord(l, m, m in copied, first[(l, m)], counts[(l, m)])
        for (l, m) in first
    ]
    records.sort(key=lambda r: (r.learner_id, r.first_timestamp, r.model_id))
    return records


def build_sequences(events: list[RawEvent]) -> list[ActivitySequence]:
    """One activity sequence per (learner, model) pair with at least one activity.

    Symbols follow timestamp order, ties broken by input position.  Pairs
    whose events are all lifecycle records are left out; see
    :func:`model_inventory` for the full list.
    """
    copied = {e.model_id for e in events if e.action_kind == "copy_model"}
    symbols = {}
    first = {}
    for i in _ordered(events):
        e = events[i]
        key = (e.learner_id, e.model_id)
        first.setdefault(key, e.timestamp)
        cls = classify_action(e.action_kind)
        if cls is not None:
            symbols.setdefault(key, []).append(cls.symbol)
    out = [
        ActivitySequence(l, m, m in copied, "".join(symbols[(l, m)]), first[(l, m)])
        for (l, m) in first
        if (l, m) in symbols
    ]
    out.sort(key=lambda s: (s.learner_id, s.first_timestamp, s.model_id))
    return out


def ingest_report(events: list[RawEvent]) -> dict:
    inventory = model_inventory(events)
    n_activity = sum(r.n_activities for r in inventory)
    return {
        "events": len(events),
        "activity_events": n_activity,
        "lifecycle_events": len(events) - n_activity,
        "learners": len({r.learner_id for r in inventory}),
        "models": len(inventory),
        "sequences": sum(1 for r in inventory if r.n_activities > 0),
        "omitted_zero_activity": sum(1 for r in inventory if r.n_activities == 0),
        "copied_models": sum(1 for r in inventory if r.is_copied),
    }


def sequence_stats(sequences) -> SequenceSummary:
    """Count, mean, median, min and max over sequence lengths.

    Accepts sequences or bare integer lengths.
    """
    lengths = [int(s) if isinstance(s, numbers.Integral) else len(s.symbols) for s in sequences]
    if not lengths:
        raise EmptyCollection("no sequences")
    return SequenceSummary(
        count=len(lengths),
        mean_length=statistics.fmean(lengths),
        median_length=float(statistics.median(lengths)),
        min_length=min(lengths),
        max_length=max(lengths),
    )
