"""Partition plan types for the four strategies and the plan file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from ..errors import ParseError, ValidationError
from ..model import LayerKind, NetworkModel

STRATEGIES = ("data", "horizontal", "sequential", "vertical")


def _as_matrix(rows) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(v) for v in row) for row in rows)


def _check_vectors(name: str, rows, totals: Sequence[int], partitions: int) -> None:
    if len(rows) != len(totals):
        raise ValidationError(f"plan has {len(rows)} {name} vectors for a {len(totals)}-layer model")
    for layer_id, (row, total) in enumerate(zip(rows, totals), start=1):
        if len(row) != partitions:
            raise ValidationError(f"{name} vector has {len(row)} entries, expected {partitions}", layer_id)
        if any(v < 0 for v in row):
            raise ValidationError(f"negative {name} entry in {list(row)}", layer_id)
        if sum(row) != total:
            raise ValidationError(f"{name} {list(row)} sum to {sum(row)}, layer total is {total}", layer_id)


@dataclass(frozen=True)
class DataPlan:
    """Per-layer output heights, one vector of length ``partitions`` per layer."""

    partitions: int
    heights: tuple[tuple[int, ...], ...]
    strategy = "data"

    def __post_init__(self):
        object.__setattr__(self, "heights", _as_matrix(self.heights))

    def validate(self, model: NetworkModel) -> None:
        _check_vectors("heights", self.heights, [l.out_shape.height for l in model], self.partitions)

    def layer(self, layer_id: int) -> tuple[int, ...]:
        return self.heights[layer_id - 1]


@dataclass(frozen=True)
class HorizontalPlan:
    """Per-layer neuron and output-channel groups.

    ``neuron_counts`` is all zeros for weightless layers; ``channel_counts``
    is defined for every layer since it sets each partition's work share.
    """

    partitions: int
    neuron_counts: tuple[tuple[int, ...], ...]
    channel_counts: tuple[tuple[int, ...], ...]
    strategy = "horizontal"

    def __post_init__(self):
        object.__setattr__(self, "neuron_counts", _as_matrix(self.neuron_counts))
        object.__setattr__(self, "channel_counts", _as_matrix(self.channel_counts))

    def validate(self, model: NetworkModel) -> None:
        _check_vectors("neurons", self.neuron_counts, [l.neurons for l in model], self.partitions)
        _check_vectors("channels", self.channel_counts, [l.out_shape.channels for l in model], self.partitions)
        for layer in model:
            if layer.kind.weighted and self.neuron_counts[layer.id - 1] != self.channel_counts[layer.id - 1]:
                raise ValidationError("neuron and channel groups of a weighted layer must agree", layer.id)

    def table_entry(self, model: NetworkModel, layer_id: int) -> Optional[tuple[int, ...]]:
        """The group sizes listed for a layer, or None where grouping does not apply."""
        if model.layer(layer_id).kind in (LayerKind.INPUT, LayerKind.SOFTMAX):
            return None
        return self.channel_counts[layer_id - 1]


@dataclass(frozen=True)
class SequentialPlan:
    """Contiguous inclusive layer ranges ``(first, last)`` in order."""

    partitions: int
    groups: tuple[tuple[int, int], ...]
    strategy = "sequential"

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple((int(a), int(b)) for a, b in self.groups))

    @classmethod
    def from_cuts(cls, cuts: Sequence[int], num_layers: int) -> "SequentialPlan":
        """``cuts`` are the last layer ids of every group but the final one."""
        bounds = [0, *cuts, num_layers]
        return cls(len(bounds) - 1, tuple((bounds[k] + 1, bounds[k + 1]) for k in range(len(bounds) - 1)))

    @property
    def cuts(self) -> tuple[int, ...]:
        return tuple(last for _, last in self.groups[:-1])

    def validate(self, model: NetworkModel) -> None:
        if len(self.groups) != self.partitions:
            raise ValidationError(f"{len(self.groups)} groups for {self.partitions} partitions")
        expected = 1
        for first, last in self.groups:
            if first != expected or last < first:
                raise ValidationError(f"group ({first}, {last}) breaks the contiguous cover at layer {expected}")
            expected = last + 1
        if expected != len(model) + 1:
            raise ValidationError(f"groups cover layers 1..{expected - 1}, model has {len(model)}")

    def assignment(self) -> tuple[int, ...]:
        out = []
        for j, (first, last) in enumerate(self.groups, start=1):
            out.extend([j] * (last - first + 1))
        return tuple(out)


@dataclass(frozen=True)
class VerticalPlan:
    """Free layer-to-partition assignment; entry ``i - 1`` is layer ``i``'s partition (1-based)."""

    partitions: int
    assignment: tuple[int, ...]
    strategy = "vertical"

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(p) for p in self.assignment))

    def validate(self, model: NetworkModel) -> None:
        if len(self.assignment) != len(model):
            raise ValidationError(f"assignment has {len(self.assignment)} entries for {len(model)} layers")
        for layer_id, p in enumerate(self.assignment, start=1):
            if not 1 <= p <= self.partitions:
                raise ValidationError(f"partition {p} outside 1..{self.partitions}", layer_id)
        missing = sorted(set(range(1, self.partitions + 1)) - set(self.assignment))
        if missing:
            raise ValidationError(f"partitions {missing} hold no layers")


Plan = Union[DataPlan, HorizontalPlan, SequentialPlan, VerticalPlan]


def decompose_subpartitions(plan: VerticalPlan) -> list[list[list[int]]]:
    """Split every partition into maximal runs of consecutive layer ids.

    Returns one list of runs per partition (index 0 is partition 1); each run
    is a list of layer ids.
    """
    runs: list[list[list[int]]] = [[] for _ in range(plan.partitions)]
    prev = None
    for layer_id, p in enumerate(plan.assignment, start=1):
        if p == prev:
            runs[p - 1][-1].append(layer_id)
        else:
            runs[p - 1].append([layer_id])
        prev = p
    return runs


# ---------------------------------------------------------------------------
# file format


def plan_to_dict(plan: Plan, model_name: str | None = None, meta: dict | None = None) -> dict:
    doc = {"strategy": plan.strategy, "partitions": plan.partitions}
    if model_name is not None:
        doc["model"] = model_name
    if isinstance(plan, DataPlan):
        doc["heights"] = [list(r) for r in plan.heights]
    elif isinstance(plan, HorizontalPlan):
        doc["neurons"] = [list(r) for r in plan.neuron_counts]
        doc["channels"] = [list(r) for r in plan.channel_counts]
    elif isinstance(plan, SequentialPlan):
        doc["groups"] = [list(g) for g in plan.groups]
    else:
        doc["assignment"] = list(plan.assignment)
    if meta:
        doc.update(meta)
    return doc


def serialize_plan(plan: Plan, model_name: str | None = None, meta: dict | None = None) -> str:
    doc = plan_to_dict(plan, model_name, meta)
    # one row per line keeps the files diffable without bloating them
    lines = ["{"]
    items = list(doc.items())
    for n, (key, value) in enumerate(items):
        comma = "," if n < len(items) - 1 else ""
        if isinstance(value, list) and value and isinstance(value[0], list):
            rows = ",\n".join(f"    {json.dumps(row)}" for row in value)
            lines.append(f"  {json.dumps(key)}: [\n{rows}\n  ]{comma}")
        else:
            lines.append(f"  {json.dumps(key)}: {json.dumps(value)}{comma}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _field(doc: dict, key: str):
    if key not in doc:
        raise ParseError(f"plan is missing {key!r}")
    return doc[key]


def parse_plan(text: str) -> tuple[Plan, dict]:
    """Parse a plan document; returns the plan and the full document for metadata."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("plan document must be a JSON object", 1)
    strategy = doc.get("strategy")
    partitions = _field(doc, "partitions")
    if isinstance(partitions, bool) or not isinstance(partitions, int) or partitions < 1:
        raise ParseError(f"'partitions' must be a positive integer, got {partitions!r}")
    try:
        if strategy == "data":
            plan = DataPlan(partitions, _field(doc, "heights"))
        elif strategy == "horizontal":
            plan = HorizontalPlan(partitions, _field(doc, "neurons"), _field(doc, "channels"))
        elif strategy == "sequential":
            plan = SequentialPlan(partitions, _field(doc, "groups"))
        elif strategy == "vertical":
            plan = VerticalPlan(partitions, _field(doc, "assignment"))
        else:
            raise ParseError(f"unknown strategy {strategy!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed {strategy} payload: {exc}") from None
    return plan, doc
