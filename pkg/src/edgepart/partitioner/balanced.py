"""Balanced height and neuron splits, and halo (comm-height) computation.

Rows are numbered from 1 and intervals are half-open ``[start, end)``.
"""

from __future__ import annotations

from typing import Sequence

from ..model import LayerSpec, NetworkModel
from .plans import DataPlan, HorizontalPlan


def split_heights(total: int, partitions: int, layer_index: int) -> list[int]:
    """Split ``total`` units into ``partitions`` counts differing by at most one.

    The ``total % partitions`` extra units go to consecutive slots starting at
    ``(layer_index - 1) % partitions`` and wrapping, so the heavier slots rotate
    from layer to layer. When ``total < partitions`` this is the round-robin
    placement of the nonzero slots.
    """
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    if total < 0:
        raise ValueError("total must be >= 0")
    base, extra = divmod(total, partitions)
    counts = [base] * partitions
    offset = (layer_index - 1) % partitions
    for k in range(extra):
        counts[(offset + k) % partitions] += 1
    return counts


def required_input_height(out_height: int, stride: int, window_h: int) -> int:
    """Input rows needed to produce ``out_height`` contiguous output rows."""
    if out_height <= 0:
        return 0
    return (out_height - 1) * stride + window_h


def produced_interval(heights: Sequence[int], j: int) -> tuple[int, int]:
    """Rows ``[x, y)`` of a layer's output computed by partition ``j``."""
    x = 1 + sum(heights[: j - 1])
    return x, x + heights[j - 1]


def _window_start(next_layer: LayerSpec, next_heights: Sequence[int], j: int) -> int:
    """Input row under the first window of partition ``j``, before clipping to real rows."""
    return 1 + next_layer.stride * sum(next_heights[: j - 1]) - next_layer.padding


def needed_interval(next_layer: LayerSpec, next_heights: Sequence[int], j: int, source_height: int) -> tuple[int, int]:
    """Rows ``[a, b)`` of the previous output that partition ``j`` of ``next_layer`` reads.

    Window positions are shifted by the layer's padding and clipped to the real
    rows, so padding rows are never requested.
    """
    out_rows = next_heights[j - 1]
    a = _window_start(next_layer, next_heights, j)
    if out_rows == 0:
        return a, a
    b = a + required_input_height(out_rows, next_layer.stride, next_layer.window_h)
    a, b = max(a, 1), min(b, source_height + 1)
    return a, max(a, b)


def _covered(start: int, stride: int, window: int, count: int, lo: int, hi: int) -> int:
    """Rows in ``[lo, hi)`` read by ``count`` windows at ``start + k * stride``.

    With ``stride <= window`` the windows overlap and cover one solid block;
    otherwise every window is followed by ``stride - window`` unread rows.
    """

    def upto(t: int) -> int:
        d = min(max(t - start, 0), required_input_height(count, stride, window))
        if stride <= window:
            return d
        return (d // stride) * window + min(d % stride, window)

    return upto(hi) - upto(lo) if hi > lo else 0


def comm_height(
    layer: LayerSpec,
    next_layer: LayerSpec,
    heights: Sequence[int],
    next_heights: Sequence[int],
    j: int,
) -> int:
    """Rows of ``layer``'s output that partition ``j`` must fetch from other partitions.

    Piecewise on how the produced interval ``[x, y)`` sits against the needed
    interval ``[a, b)``: the rows above ``x`` and the rows from ``y`` on are
    remote. The result is clamped to ``[0, b - a]`` so disjoint intervals
    cannot over-count. When the next layer's stride exceeds its window, rows
    between windows are never read and are not counted.
    """
    source_height = sum(heights)
    x, y = produced_interval(heights, j)
    a, b = needed_interval(next_layer, next_heights, j, source_height)
    if b <= a:
        return 0
    if a < x and y >= b:
        spans = [(a, x)]
    elif a < x and y < b:
        spans = [(a, x), (y, b)]
    elif a >= x and y < b:
        spans = [(y, b)]
    else:
        spans = []
    start = _window_start(next_layer, next_heights, j)
    count = next_heights[j - 1]
    rows = sum(
        _covered(start, next_layer.stride, next_layer.window_h, count, max(lo, a), min(hi, b)) for lo, hi in spans
    )
    return max(0, min(rows, b - a))


def plan_data(model: NetworkModel, partitions: int) -> DataPlan:
    heights = [split_heights(layer.out_shape.height, partitions, layer.id) for layer in model]
    return DataPlan(partitions, heights)


def plan_horizontal(model: NetworkModel, partitions: int) -> HorizontalPlan:
    neurons, channels = [], []
    for layer in model:
        split = split_heights(layer.out_shape.channels, partitions, layer.id)
        channels.append(split)
        neurons.append(split if layer.kind.weighted else [0] * partitions)
    return HorizontalPlan(partitions, neurons, channels)


def data_comm_heights(model: NetworkModel, plan: DataPlan) -> list[list[int]]:
    """Comm heights for every consecutive layer pair; row ``i - 1`` belongs to layer ``i``.

    The last layer sends nothing, so its row is all zeros.
    """
    out = []
    for layer, next_layer in zip(model.layers, model.layers[1:]):
        h, nh = plan.layer(layer.id), plan.layer(next_layer.id)
        out.append([comm_height(layer, next_layer, h, nh, j) for j in range(1, plan.partitions + 1)])
    out.append([0] * plan.partitions)
    return out


__all__ = [
    "split_heights",
    "required_input_height",
    "produced_interval",
    "needed_interval",
    "comm_height",
    "plan_data",
    "plan_horizontal",
    "data_comm_heights",
]
