"""CNN layer chains: layer specifications, shape inference and the model file format.

A model document is JSON Lines: the first record is a header
``{"name", "input_height", "input_width", "input_channels"}`` and every
following record describes one layer
``{"id", "kind", "window_h", "window_w", "stride", "padding", "neurons"}``.
A single JSON object with the header keys plus a ``"layers"`` array is
accepted as well. Blank lines and lines starting with ``#`` are skipped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Sequence

from .errors import ParseError, ValidationError


class LayerKind(str, Enum):
    INPUT = "input"
    CONVOLUTION = "convolution"
    POOLING = "pooling"
    ACTIVATION = "activation"
    FULLY_CONNECTED = "fully_connected"
    SOFTMAX = "softmax"

    @property
    def weighted(self) -> bool:
        return self in (LayerKind.CONVOLUTION, LayerKind.FULLY_CONNECTED)


@dataclass(frozen=True)
class TensorShape:
    height: int
    width: int
    channels: int

    def __post_init__(self):
        for name in ("height", "width", "channels"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValidationError(f"tensor {name} must be a positive integer, got {value!r}")

    @property
    def element_count(self) -> int:
        return self.height * self.width * self.channels

    @property
    def plane(self) -> int:
        """Elements in one row-independent slice (width x channels)."""
        return self.width * self.channels

    def __str__(self) -> str:
        return f"{self.height}x{self.width}x{self.channels}"


@dataclass(frozen=True)
class LayerSpec:
    id: int
    kind: LayerKind
    window_h: int = 1
    window_w: int = 1
    stride: int = 1
    padding: int = 0
    neurons: int = 0
    in_shape: Optional[TensorShape] = None
    out_shape: Optional[TensorShape] = None

    @property
    def window_volume(self) -> int:
        """Multiply-accumulate count per output element."""
        if self.kind is LayerKind.INPUT:
            return 0
        if self.kind is LayerKind.CONVOLUTION:
            return self.window_h * self.window_w * self.in_shape.channels
        if self.kind is LayerKind.FULLY_CONNECTED:
            return self.in_shape.element_count
        return self.window_h * self.window_w


@dataclass(frozen=True)
class NetworkModel:
    name: str
    layers: tuple[LayerSpec, ...]
    input_shape: TensorShape

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    def __len__(self) -> int:
        return len(self.layers)

    def __iter__(self):
        return iter(self.layers)

    def layer(self, layer_id: int) -> LayerSpec:
        return self.layers[layer_id - 1]

    @property
    def ids(self) -> range:
        return range(1, len(self.layers) + 1)


def _output_extent(size: int, window: int, stride: int, pad: int, layer_id: int) -> int:
    padded = size + 2 * pad
    if window > padded:
        raise ValidationError(f"window {window} larger than padded input {padded}", layer_id)
    return (padded - window) // stride + 1


def _check_params(layer: LayerSpec) -> None:
    for name in ("window_h", "window_w", "stride"):
        value = getattr(layer, name)
        if not isinstance(value, int) or value < 1:
            raise ValidationError(f"{name} must be a positive integer, got {value!r}", layer.id)
    if not isinstance(layer.padding, int) or layer.padding < 0:
        raise ValidationError(f"padding must be a non-negative integer, got {layer.padding!r}", layer.id)
    if layer.kind.weighted:
        if not isinstance(layer.neurons, int) or layer.neurons < 1:
            raise ValidationError(f"{layer.kind.value} needs a positive neuron count", layer.id)
    elif layer.neurons != 0:
        raise ValidationError(f"{layer.kind.value} layers carry no neurons, got {layer.neurons}", layer.id)


def infer_layer(layer: LayerSpec, in_shape: TensorShape) -> LayerSpec:
    """Return ``layer`` with ``in_shape`` set and ``out_shape`` computed."""
    _check_params(layer)
    kind = layer.kind
    if kind is LayerKind.INPUT:
        if (layer.window_h, layer.window_w, layer.stride, layer.padding) != (1, 1, 1, 0):
            raise ValidationError("input layers must use a 1x1 window, stride 1, no padding", layer.id)
        return replace(layer, in_shape=in_shape, out_shape=in_shape)
    if kind is LayerKind.FULLY_CONNECTED:
        # a dense layer reads its whole input: the window spans it exactly
        if layer.padding != 0 or layer.stride != 1:
            raise ValidationError("fully_connected layers take stride 1 and no padding", layer.id)
        window = (layer.window_h, layer.window_w)
        if window != (1, 1) and window != (in_shape.height, in_shape.width):
            raise ValidationError(
                f"fully_connected window {window[0]}x{window[1]} does not span input {in_shape}", layer.id
            )
        return replace(
            layer,
            window_h=in_shape.height,
            window_w=in_shape.width,
            in_shape=in_shape,
            out_shape=TensorShape(1, 1, layer.neurons),
        )
    height = _output_extent(in_shape.height, layer.window_h, layer.stride, layer.padding, layer.id)
    width = _output_extent(in_shape.width, layer.window_w, layer.stride, layer.padding, layer.id)
    channels = layer.neurons if kind is LayerKind.CONVOLUTION else in_shape.channels
    return replace(layer, in_shape=in_shape, out_shape=TensorShape(height, width, channels))


def infer_shapes(model: NetworkModel) -> NetworkModel:
    """Populate every layer's input and output shape from ``model.input_shape``.

    Idempotent: running it on an already inferred model returns an equal model.
    """
    layers = []
    current = model.input_shape
    for expected_id, layer in enumerate(model.layers, start=1):
        if layer.id != expected_id:
            raise ValidationError(f"layer ids must be consecutive from 1, expected {expected_id}", layer.id)
        if layer.kind is LayerKind.INPUT and expected_id != 1:
            raise ValidationError("an input layer may only appear first", layer.id)
        inferred = infer_layer(layer, current)
        layers.append(inferred)
        current = inferred.out_shape
    if not layers:
        raise ValidationError("model has no layers")
    return replace(model, layers=tuple(layers))


def check_chain(model: NetworkModel) -> None:
    """Raise ValidationError unless shapes form a consistent chain."""
    if model.layers[0].in_shape != model.input_shape:
        raise ValidationError("first layer input does not match the model input", model.layers[0].id)
    for prev, nxt in zip(model.layers, model.layers[1:]):
        if nxt.in_shape != prev.out_shape:
            raise ValidationError(f"input {nxt.in_shape} does not match previous output {prev.out_shape}", nxt.id)


# ---------------------------------------------------------------------------
# file format

_HEADER_KEYS = ("name", "input_height", "input_width", "input_channels")
_LAYER_KEYS = ("id", "kind", "window_h", "window_w", "stride", "padding", "neurons")


def _require_int(record: dict, key: str, line: int | None, default=None) -> int:
    value = record.get(key, default)
    if value is None:
        raise ParseError(f"missing required key {key!r}", line)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{key!r} must be an integer, got {value!r}", line)
    return value


def _layer_from_record(record: dict, line: int | None) -> LayerSpec:
    if not isinstance(record, dict):
        raise ParseError("layer record must be an object", line)
    unknown = set(record) - set(_LAYER_KEYS)
    if unknown:
        raise ParseError(f"unknown layer keys {sorted(unknown)}", line)
    kind_name = record.get("kind")
    try:
        kind = LayerKind(kind_name)
    except ValueError:
        raise ParseError(f"unknown layer kind {kind_name!r}", line) from None
    return LayerSpec(
        id=_require_int(record, "id", line),
        kind=kind,
        window_h=_require_int(record, "window_h", line, 1),
        window_w=_require_int(record, "window_w", line, 1),
        stride=_require_int(record, "stride", line, 1),
        padding=_require_int(record, "padding", line, 0),
        neurons=_require_int(record, "neurons", line, 0),
    )


def _build(header: dict, layer_records: Iterable[tuple[dict, int | None]], line: int | None) -> NetworkModel:
    if not isinstance(header, dict):
        raise ParseError("header record must be an object", line)
    name = header.get("name")
    if not isinstance(name, str):
        raise ParseError("header needs a string 'name'", line)
    shape = TensorShape(
        _require_int(header, "input_height", line),
        _require_int(header, "input_width", line),
        _require_int(header, "input_channels", line),
    )
    layers = tuple(_layer_from_record(rec, ln) for rec, ln in layer_records)
    model = infer_shapes(NetworkModel(name=name, layers=layers, input_shape=shape))
    check_chain(model)
    return model


def parse_model(text: str) -> NetworkModel:
    """Parse a model document (JSON Lines or a single JSON object)."""
    doc = _single_object(text)
    if doc is not None:
        layers = doc.get("layers")
        if not isinstance(layers, list):
            raise ParseError("JSON model needs a 'layers' array", 1)
        return _build(doc, ((rec, None) for rec in layers), 1)

    records: list[tuple[dict, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        try:
            records.append((json.loads(raw), lineno))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, lineno) from None
    if not records:
        raise ParseError("empty model document", 1)
    (header, header_line), *layer_records = records
    return _build(header, layer_records, header_line)


def _single_object(text: str) -> dict | None:
    """Return the document as one JSON object if it has a top-level ``layers`` key."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        return None
    if isinstance(doc, dict) and "layers" in doc:
        return doc
    return None


def layer_record(layer: LayerSpec) -> dict:
    return {
        "id": layer.id,
        "kind": layer.kind.value,
        "window_h": layer.window_h,
        "window_w": layer.window_w,
        "stride": layer.stride,
        "padding": layer.padding,
        "neurons": layer.neurons,
    }


def serialize_model(model: NetworkModel, fmt: str = "jsonl") -> str:
    header = {
        "name": model.name,
        "input_height": model.input_shape.height,
        "input_width": model.input_shape.width,
        "input_channels": model.input_shape.channels,
    }
    records = [layer_record(layer) for layer in model.layers]
    if fmt == "json":
        return json.dumps({**header, "layers": records}, indent=2) + "\n"
    if fmt != "jsonl":
        raise ValueError(f"unknown model format {fmt!r}")
    return "\n".join(json.dumps(rec) for rec in [header, *records]) + "\n"


def load_model(path) -> NetworkModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def build_model(name: str, input_shape: Sequence[int], layers: Sequence[dict]) -> NetworkModel:
    """Convenience constructor from plain layer dicts; ids are assigned 1..L."""
    specs = []
    for idx, rec in enumerate(layers, start=1):
        rec = {"id": idx, **rec}
        specs.append(_layer_from_record(rec, None))
    model = infer_shapes(NetworkModel(name=name, layers=tuple(specs), input_shape=TensorShape(*input_shape)))
    check_chain(model)
    return model
