"""Analytical per-partition energy models for the four partitioning strategies.

Every evaluator returns a :class:`FleetSummary` whose breakdowns split each
partition's energy into computation, internal communication and external
communication. Sums use :func:`math.fsum`, so a partition's energy does not
depend on the order its layers are visited in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError
from .model import NetworkModel
from .partitioner.balanced import data_comm_heights
from .partitioner.plans import DataPlan, HorizontalPlan, Plan, SequentialPlan, VerticalPlan, decompose_subpartitions
from .profiles import DeviceProfile


@dataclass(frozen=True)
class EnergyBreakdown:
    partition: int
    comp: float
    in_comm: float
    ex_comm: float

    @property
    def total(self) -> float:
        return self.comp + self.in_comm + self.ex_comm


@dataclass(frozen=True)
class FleetSummary:
    per_partition: tuple[EnergyBreakdown, ...]
    max_energy: float
    max_partition: int
    normalized_max: float
    single_device_total: float

    @property
    def totals(self) -> list[float]:
        return [b.total for b in self.per_partition]

    @property
    def spread(self) -> float:
        totals = self.totals
        return max(totals) - min(totals)


def summarize(per_partition: Sequence[EnergyBreakdown], single_device_total: float) -> FleetSummary:
    if not per_partition:
        raise ValueError("cannot summarize an empty partition list")
    if not single_device_total > 0:
        raise ValueError(f"single-device total must be > 0, got {single_device_total!r}")
    best = per_partition[0]
    for b in per_partition[1:]:
        if b.total > best.total:
            best = b
    return FleetSummary(
        tuple(per_partition), best.total, best.partition, best.total / single_device_total, single_device_total
    )


class LayerCosts:
    """Per-layer profile values of one (model, profile) pair, as flat lists.

    Index 0 holds layer 1. Built once and shared by repeated evaluations.
    """

    def __init__(self, model: NetworkModel, profile: DeviceProfile):
        profile.check_covers(model)
        self.model = model
        self.num_layers = len(model)
        entries = [profile[i] for i in model.ids]
        self.comp = [p.comp_energy for p in entries]
        self.in_comm = [p.in_comm_energy for p in entries]
        self.ex_comm = [p.ex_comm_energy for p in entries]
        self.send = [p.send_energy for p in entries]
        self.recv = [p.recv_energy for p in entries]
        self.heights = [layer.out_shape.height for layer in model]
        self.channels = [layer.out_shape.channels for layer in model]
        self.single_device_total = math.fsum(self.comp) + math.fsum(self.in_comm) + 0.0

    def run_ex_comm(self, first: int, last: int) -> float:
        """External energy of a contiguous run of layers ``first..last`` on one device.

        The run holding the model's first layer only sends, the run holding
        the last layer only receives, a run holding both communicates nothing.
        """
        holds_first = first == 1
        holds_last = last == self.num_layers
        if holds_first and holds_last:
            return 0.0
        if holds_first:
            return self.send[last - 1]
        if holds_last:
            return self.recv[first - 1]
        return self.recv[first - 1] + self.send[last - 1]

    def run_breakdown(self, partition: int, first: int, last: int) -> EnergyBreakdown:
        return EnergyBreakdown(
            partition,
            math.fsum(self.comp[first - 1 : last]),
            math.fsum(self.in_comm[first - 1 : last]),
            self.run_ex_comm(first, last),
        )

    def runs_breakdown(self, partition: int, runs: Sequence[Sequence[int]]) -> EnergyBreakdown:
        ids = [i for run in runs for i in run]
        return EnergyBreakdown(
            partition,
            math.fsum(self.comp[i - 1] for i in ids),
            math.fsum(self.in_comm[i - 1] for i in ids),
            math.fsum(self.run_ex_comm(run[0], run[-1]) for run in runs),
        )

    # fractional strategies

    def fractional(self, shares: Sequence[Sequence[int]], totals: Sequence[int], ex_fractions) -> list[EnergyBreakdown]:
        partitions = len(shares[0])
        out = []
        for j in range(partitions):
            k = [shares[i][j] / totals[i] for i in range(self.num_layers)]
            out.append(
                EnergyBreakdown(
                    j + 1,
                    math.fsum(k[i] * self.comp[i] for i in range(self.num_layers)),
                    math.fsum(k[i] * self.in_comm[i] for i in range(self.num_layers)),
                    math.fsum(ex_fractions(i, j) * self.ex_comm[i] for i in range(self.num_layers - 1)),
                )
            )
        return out


def _costs(model: NetworkModel, profile_or_costs) -> LayerCosts:
    if isinstance(profile_or_costs, LayerCosts):
        return profile_or_costs
    return LayerCosts(model, profile_or_costs)


def data_breakdowns(model: NetworkModel, costs: LayerCosts, plan: DataPlan) -> list[EnergyBreakdown]:
    comm = data_comm_heights(model, plan)
    heights = costs.heights
    return costs.fractional(plan.heights, heights, lambda i, j: comm[i][j] / heights[i])


def energy_data(model: NetworkModel, profile: DeviceProfile, plan: DataPlan) -> FleetSummary:
    """Height-sliced execution: work scales with each partition's row share, halos cost external energy."""
    plan.validate(model)
    costs = _costs(model, profile)
    return summarize(data_breakdowns(model, costs, plan), costs.single_device_total)


def horizontal_breakdowns(costs: LayerCosts, plan: HorizontalPlan) -> list[EnergyBreakdown]:
    channels = costs.channels
    shares = plan.channel_counts
    return costs.fractional(shares, channels, lambda i, j: 1.0 - shares[i][j] / channels[i])


def energy_horizontal(model: NetworkModel, profile: DeviceProfile, plan: HorizontalPlan) -> FleetSummary:
    """Channel-grouped execution: every partition gathers the channels it did not compute."""
    plan.validate(model)
    costs = _costs(model, profile)
    return summarize(horizontal_breakdowns(costs, plan), costs.single_device_total)


def sequential_breakdowns(costs: LayerCosts, plan: SequentialPlan) -> list[EnergyBreakdown]:
    return [costs.run_breakdown(j, first, last) for j, (first, last) in enumerate(plan.groups, start=1)]


def energy_sequential(model: NetworkModel, profile: DeviceProfile, plan: SequentialPlan) -> FleetSummary:
    plan.validate(model)
    costs = _costs(model, profile)
    return summarize(sequential_breakdowns(costs, plan), costs.single_device_total)


def vertical_breakdowns(costs: LayerCosts, plan: VerticalPlan) -> list[EnergyBreakdown]:
    runs = decompose_subpartitions(plan)
    return [costs.runs_breakdown(j, r) for j, r in enumerate(runs, start=1)]


def energy_vertical(model: NetworkModel, profile: DeviceProfile, plan: VerticalPlan) -> FleetSummary:
    """Each maximal run of consecutive layers on a device pays its own boundary send/receive."""
    plan.validate(model)
    costs = _costs(model, profile)
    return summarize(vertical_breakdowns(costs, plan), costs.single_device_total)


def evaluate(model: NetworkModel, profile: DeviceProfile, plan: Plan) -> FleetSummary:
    """Dispatch to the evaluator matching the plan's strategy."""
    if isinstance(plan, DataPlan):
        return energy_data(model, profile, plan)
    if isinstance(plan, HorizontalPlan):
        return energy_horizontal(model, profile, plan)
    if isinstance(plan, SequentialPlan):
        return energy_sequential(model, profile, plan)
    if isinstance(plan, VerticalPlan):
        return energy_vertical(model, profile, plan)
    raise ValidationError(f"unsupported plan type {type(plan).__name__}")


def battery_lifetime(
    capacity_mah: float, voltage_v: float, energy_per_image_j: float, time_per_image_s: float
) -> tuple[float, int]:
    """Seconds of continuous inference a battery sustains and the images processed meanwhile."""
    for name, value in (
        ("capacity_mah", capacity_mah),
        ("voltage_v", voltage_v),
        ("energy_per_image_j", energy_per_image_j),
        ("time_per_image_s", time_per_image_s),
    ):
        if not value > 0:
            raise ValueError(f"{name} must be > 0, got {value!r}")
    battery_joules = capacity_mah * 3600.0 * voltage_v / 1000.0
    power_w = energy_per_image_j / time_per_image_s
    seconds = battery_joules / power_w
    images = math.floor(battery_joules / energy_per_image_j)
    return seconds, images
