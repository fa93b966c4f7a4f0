"""Per-layer device calibration data and the affine communication cost model.

Profile documents mirror the model format. The header record is
``{"device_name", "internal": {"base", "per_element"}, "external": {...}}``
(optionally ``bytes_per_element``, informational only) and each layer record is
``{"id", "comp_energy", "comp_time", "in_comm_energy"?, "ex_comm_energy"?,
"send_energy"?, "recv_energy"?}``. Omitted communication fields are filled
from the cost models at full tensor size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ParseError, ValidationError
from .model import LayerKind, NetworkModel


@dataclass(frozen=True)
class CommCostModel:
    base_energy: float = 0.0
    per_element_energy: float = 0.0

    def __post_init__(self):
        for name in ("base_energy", "per_element_energy"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {value!r}")


def comm_energy(model: CommCostModel, elements: int) -> float:
    """Joules to move ``elements`` tensor elements; an empty transfer still pays the base cost."""
    return model.base_energy + model.per_element_energy * elements


@dataclass(frozen=True)
class LayerProfile:
    comp_energy: float
    comp_time: float
    in_comm_energy: float
    ex_comm_energy: float
    send_energy: float
    recv_energy: float

    def scaled(self, factor: float) -> "LayerProfile":
        return LayerProfile(
            self.comp_energy * factor,
            self.comp_time,
            self.in_comm_energy * factor,
            self.ex_comm_energy * factor,
            self.send_energy * factor,
            self.recv_energy * factor,
        )


_ENERGY_FIELDS = ("comp_energy", "in_comm_energy", "ex_comm_energy", "send_energy", "recv_energy")
_OPTIONAL_FIELDS = ("in_comm_energy", "ex_comm_energy", "send_energy", "recv_energy")


@dataclass(frozen=True)
class DeviceProfile:
    device_name: str
    layer_profiles: Mapping[int, LayerProfile]
    internal_model: CommCostModel = field(default_factory=CommCostModel)
    external_model: CommCostModel = field(default_factory=CommCostModel)
    bytes_per_element: int = 4

    def __getitem__(self, layer_id: int) -> LayerProfile:
        return self.layer_profiles[layer_id]

    def check_covers(self, model: NetworkModel) -> None:
        for layer_id in model.ids:
            if layer_id not in self.layer_profiles:
                raise ValidationError("profile has no entry for this layer", layer_id)
        extra = sorted(set(self.layer_profiles) - set(model.ids))
        if extra:
            raise ValidationError(f"profile entry for unknown layer in model {model.name!r}", extra[0])

    def scaled(self, factor: float) -> "DeviceProfile":
        """Every energy field multiplied by ``factor``; times are untouched."""
        return DeviceProfile(
            self.device_name,
            {k: p.scaled(factor) for k, p in self.layer_profiles.items()},
            CommCostModel(self.internal_model.base_energy * factor, self.internal_model.per_element_energy * factor),
            CommCostModel(self.external_model.base_energy * factor, self.external_model.per_element_energy * factor),
            self.bytes_per_element,
        )


def _comm_fields(model: NetworkModel, layer_id: int, internal: CommCostModel, external: CommCostModel) -> dict:
    layer = model.layer(layer_id)
    out_elements = layer.out_shape.element_count
    return {
        "in_comm_energy": comm_energy(internal, out_elements),
        "ex_comm_energy": comm_energy(external, out_elements),
        "send_energy": comm_energy(external, out_elements),
        "recv_energy": comm_energy(external, layer.in_shape.element_count),
    }


def synthesize_profile(
    model: NetworkModel,
    comp_joules_per_element: float,
    internal: CommCostModel,
    external: CommCostModel,
    seconds_per_element: float = 1e-10,
    device_name: str = "synthetic",
) -> DeviceProfile:
    """Build a profile from cost coefficients instead of measurements.

    Computation energy is ``comp_joules_per_element`` times the output element
    count times the layer's window volume (multiply-accumulates per output).
    """
    layers = {}
    for layer in model.layers:
        ops = layer.out_shape.element_count * layer.window_volume
        if layer.kind is LayerKind.INPUT:
            comp, t = 0.0, 0.0
        else:
            comp, t = comp_joules_per_element * ops, seconds_per_element * ops
        layers[layer.id] = LayerProfile(comp, t, **_comm_fields(model, layer.id, internal, external))
    return DeviceProfile(device_name, layers, internal, external)


# ---------------------------------------------------------------------------
# file format


def _number(record: dict, key: str, line: int | None, layer_id: int | None = None) -> float:
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{key!r} must be a number, got {value!r}", line)
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValidationError(f"{key} must be finite and >= 0, got {value!r}", layer_id)
    return value


def _cost_model(header: dict, key: str, line: int | None) -> CommCostModel:
    spec = header.get(key, {})
    if not isinstance(spec, dict):
        raise ParseError(f"{key!r} must be an object with base/per_element", line)
    return CommCostModel(
        _number({"base": 0, **spec}, "base", line),
        _number({"per_element": 0, **spec}, "per_element", line),
    )


def _records(text: str) -> tuple[dict, int, list[tuple[dict, int | None]]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = None
    if isinstance(doc, dict) and "layers" in doc:
        if not isinstance(doc["layers"], list):
            raise ParseError("'layers' must be an array", 1)
        return doc, 1, [(rec, None) for rec in doc["layers"]]
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        try:
            records.append((json.loads(raw), lineno))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, lineno) from None
    if not records:
        raise ParseError("empty profile document", 1)
    (header, header_line), *rest = records
    return header, header_line, rest


def load_profile(text: str, model: NetworkModel) -> DeviceProfile:
    """Parse a profile document against ``model``.

    Every layer of the model must have an entry; explicit communication
    fields take precedence over cost-model values.
    """
    header, header_line, records = _records(text)
    if not isinstance(header, dict) or not isinstance(header.get("device_name"), str):
        raise ParseError("header needs a string 'device_name'", header_line)
    internal = _cost_model(header, "internal", header_line)
    external = _cost_model(header, "external", header_line)
    bytes_per_element = header.get("bytes_per_element", 4)

    layers: dict[int, LayerProfile] = {}
    for rec, line in records:
        if not isinstance(rec, dict):
            raise ParseError("layer record must be an object", line)
        layer_id = rec.get("id")
        if isinstance(layer_id, bool) or not isinstance(layer_id, int):
            raise ParseError(f"layer record needs an integer 'id', got {layer_id!r}", line)
        if not 1 <= layer_id <= len(model):
            raise ValidationError(f"unknown layer id for model {model.name!r}", layer_id)
        if layer_id in layers:
            raise ValidationError("duplicate profile entry", layer_id)
        for key in ("comp_energy", "comp_time"):
            if key not in rec:
                raise ParseError(f"missing required key {key!r}", line)
        values = _comm_fields(model, layer_id, internal, external)
        for key in _OPTIONAL_FIELDS:
            if rec.get(key) is not None:
                values[key] = _number(rec, key, line, layer_id)
        comp_time = _number(rec, "comp_time", line, layer_id)
        if comp_time <= 0 and model.layer(layer_id).kind is not LayerKind.INPUT:
            raise ValidationError("comp_time must be > 0 for computing layers", layer_id)
        layers[layer_id] = LayerProfile(_number(rec, "comp_energy", line, layer_id), comp_time, **values)

    profile = DeviceProfile(header["device_name"], layers, internal, external, bytes_per_element)
    profile.check_covers(model)
    return profile


def serialize_profile(profile: DeviceProfile, fmt: str = "jsonl") -> str:
    header = {
        "device_name": profile.device_name,
        "bytes_per_element": profile.bytes_per_element,
        "internal": {"base": profile.internal_model.base_energy, "per_element": profile.internal_model.per_element_energy},
        "external": {"base": profile.external_model.base_energy, "per_element": profile.external_model.per_element_energy},
    }
    records = []
    for layer_id in sorted(profile.layer_profiles):
        p = profile.layer_profiles[layer_id]
        records.append({
            "id": layer_id,
            "comp_energy": p.comp_energy,
            "comp_time": p.comp_time,
            "in_comm_energy": p.in_comm_energy,
            "ex_comm_energy": p.ex_comm_energy,
            "send_energy": p.send_energy,
            "recv_energy": p.recv_energy,
        })
    # json emits the shortest repr of each float, which parses back bit-exactly
    if fmt == "json":
        return json.dumps({**header, "layers": records}, indent=2) + "\n"
    if fmt != "jsonl":
        raise ValueError(f"unknown profile format {fmt!r}")
    return "\n".join(json.dumps(rec) for rec in [header, *records]) + "\n"


def load_profile_file(path, model: NetworkModel) -> DeviceProfile:
    with open(path, encoding="utf-8") as fh:
        return load_profile(fh.read(), model)
