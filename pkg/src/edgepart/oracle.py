"""Brute-force communication-volume simulator.

Counts, row by row (data strategy) or channel by channel (horizontal
strategy), which elements each partition computes itself and which it must
fetch from another device. Nothing here uses the closed-form halo formula,
so the two can check each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import NetworkModel
from .partitioner.plans import DataPlan, HorizontalPlan


@dataclass
class PartitionVolume:
    internal_elements: int = 0
    external_in_elements: int = 0
    external_out_elements: int = 0

    def add(self, other: "PartitionVolume") -> None:
        self.internal_elements += other.internal_elements
        self.external_in_elements += other.external_in_elements
        self.external_out_elements += other.external_out_elements


@dataclass
class CommVolumes:
    """Element counts per partition, in total and per producing layer.

    ``remote_units[i][j]`` is the number of rows (data) or channels
    (horizontal) of layer ``i + 1``'s output that partition ``j + 1`` fetched.
    """

    per_partition: list[PartitionVolume]
    per_layer: list[list[PartitionVolume]] = field(default_factory=list)
    remote_units: list[list[int]] = field(default_factory=list)

    @property
    def balanced(self) -> bool:
        sent = sum(p.external_out_elements for p in self.per_partition)
        received = sum(p.external_in_elements for p in self.per_partition)
        return sent == received


def _owners(counts) -> list[int]:
    """Partition index (0-based) owning each unit, units listed in order."""
    owners = []
    for j, n in enumerate(counts):
        owners.extend([j] * n)
    return owners


def _collect(per_layer: list[list[PartitionVolume]], partitions: int) -> list[PartitionVolume]:
    totals = [PartitionVolume() for _ in range(partitions)]
    for row in per_layer:
        for j, vol in enumerate(row):
            totals[j].add(vol)
    return totals


def window_rows(out_row: int, stride: int, window: int, padding: int, in_height: int) -> range:
    """Real input rows (1-based) read by the window producing ``out_row``."""
    top = (out_row - 1) * stride + 1 - padding
    return range(max(top, 1), min(top + window, in_height + 1))


def simulate_data_volumes(model: NetworkModel, plan: DataPlan) -> CommVolumes:
    plan.validate(model)
    m = plan.partitions
    per_layer: list[list[PartitionVolume]] = []
    remote: list[list[int]] = []
    layers = model.layers
    for idx, layer in enumerate(layers):
        plane = layer.out_shape.plane
        vols = [PartitionVolume(internal_elements=h * plane) for h in plan.heights[idx]]
        fetched = [0] * m
        if idx + 1 < len(layers):
            nxt = layers[idx + 1]
            owner = _owners(plan.heights[idx])
            out_owner = _owners(plan.heights[idx + 1])
            needed: list[set[int]] = [set() for _ in range(m)]
            for out_row, j in enumerate(out_owner, start=1):
                needed[j].update(window_rows(out_row, nxt.stride, nxt.window_h, nxt.padding, layer.out_shape.height))
            for j, rows in enumerate(needed):
                for r in rows:
                    src = owner[r - 1]
                    if src != j:
                        fetched[j] += 1
                        vols[j].external_in_elements += plane
                        vols[src].external_out_elements += plane
        per_layer.append(vols)
        remote.append(fetched)
    return CommVolumes(_collect(per_layer, m), per_layer, remote)


def simulate_horizontal_volumes(model: NetworkModel, plan: HorizontalPlan) -> CommVolumes:
    plan.validate(model)
    m = plan.partitions
    per_layer: list[list[PartitionVolume]] = []
    remote: list[list[int]] = []
    layers = model.layers
    for idx, layer in enumerate(layers):
        hw = layer.out_shape.height * layer.out_shape.width
        vols = [PartitionVolume(internal_elements=c * hw) for c in plan.channel_counts[idx]]
        fetched = [0] * m
        if idx + 1 < len(layers):
            owner = _owners(plan.channel_counts[idx])
            # every consumer partition reads the whole input tensor
            for j in range(m):
                for src in owner:
                    if src != j:
                        fetched[j] += 1
                        vols[j].external_in_elements += hw
                        vols[src].external_out_elements += hw
        per_layer.append(vols)
        remote.append(fetched)
    return CommVolumes(_collect(per_layer, m), per_layer, remote)
