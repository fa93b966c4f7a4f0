"""Models and calibration profiles shipped with the package."""

from __future__ import annotations

from pathlib import Path

from ..model import NetworkModel, load_model
from ..profiles import CommCostModel, DeviceProfile, load_profile_file, synthesize_profile

FIXTURE_DIR = Path(__file__).resolve().parent
MODEL_NAMES = ("vgg16", "emotion_fer", "compute_heavy", "comm_heavy", "fc_heavy")

# coefficients the shipped profiles were generated from
COMP_JOULES_PER_MAC = 2e-11
INTERNAL = CommCostModel(0.0, 1e-10)
EXTERNAL = CommCostModel(1e-4, 2e-8)
EXTERNAL_COMM_HEAVY = CommCostModel(1e-4, 5e-8)


def model_path(name: str) -> Path:
    return FIXTURE_DIR / f"{name}.jsonl"


def profile_path(name: str, variant: str | None = None) -> Path:
    suffix = f".{variant}" if variant else ""
    return FIXTURE_DIR / f"{name}{suffix}.profile.jsonl"


def load_fixture_model(name: str) -> NetworkModel:
    return load_model(model_path(name))


def load_fixture(name: str, variant: str | None = None) -> tuple[NetworkModel, DeviceProfile]:
    model = load_fixture_model(name)
    return model, load_profile_file(profile_path(name, variant), model)


def default_profile(model: NetworkModel) -> DeviceProfile:
    external = EXTERNAL_COMM_HEAVY if model.name == "comm_heavy" else EXTERNAL
    return synthesize_profile(model, COMP_JOULES_PER_MAC, INTERNAL, external, device_name="jetson-like")


def zero_comm_profile(model: NetworkModel) -> DeviceProfile:
    return synthesize_profile(model, COMP_JOULES_PER_MAC, CommCostModel(), CommCostModel(), device_name="zero-comm")
