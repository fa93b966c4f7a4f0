import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from edgepart.errors import ParseError, ValidationError
from edgepart.fixtures import EXTERNAL, MODEL_NAMES, default_profile, load_fixture, load_fixture_model
from edgepart.model import build_model
from edgepart.profiles import CommCostModel, comm_energy, load_profile, serialize_profile, synthesize_profile


def test_comm_energy_examples():
    assert comm_energy(CommCostModel(0, 0), 10**6) == 0
    assert comm_energy(CommCostModel(0.001, 1e-8), 10**6) == pytest.approx(0.011, rel=1e-12)
    assert comm_energy(CommCostModel(0.001, 1e-8), 0) == 0.001


@given(
    base=st.floats(0, 1),
    per=st.floats(0, 1e-3),
    a=st.integers(0, 10**7),
    b=st.integers(0, 10**7),
)
def test_comm_energy_affine(base, per, a, b):
    m = CommCostModel(base, per)
    assert comm_energy(m, a + b) >= comm_energy(m, a)
    assert comm_energy(m, a + b) - comm_energy(m, a) == pytest.approx(per * b, rel=1e-9, abs=1e-12)


def test_negative_cost_rejected():
    with pytest.raises(ValidationError):
        CommCostModel(-1.0, 0.0)


def test_synthesize_zero_cost():
    model = build_model("id", (5, 5, 2), [{"kind": "pooling"}])
    profile = synthesize_profile(model, 0.0, CommCostModel(), CommCostModel())
    assert all(p.comp_energy == 0 for p in profile.layer_profiles.values())


def test_synthesize_external_fields():
    model = build_model("two", (4, 4, 3), [{"kind": "input"}, {"kind": "convolution", "neurons": 2}])
    external = CommCostModel(0.0, 1e-8)
    profile = synthesize_profile(model, 5.0, CommCostModel(), external)
    assert profile[1].ex_comm_energy == comm_energy(external, model.layer(1).out_shape.element_count)
    assert profile[1].comp_energy == 0.0
    assert profile[2].recv_energy == comm_energy(external, 4 * 4 * 3)


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_shipped_profiles_match_generator(name):
    model, profile = load_fixture(name)
    assert profile == default_profile(model)


def test_vgg_profile_coverage(vgg):
    model, profile = vgg
    assert sorted(profile.layer_profiles) == list(range(1, 24))


@pytest.mark.parametrize("fmt", ["jsonl", "json"])
@pytest.mark.parametrize("name", MODEL_NAMES)
def test_round_trip_is_exact(name, fmt):
    model = load_fixture_model(name)
    profile = synthesize_profile(model, 1.2345678901e-11, CommCostModel(3e-9, 1.1e-10), EXTERNAL)
    assert load_profile(serialize_profile(profile, fmt), model) == profile


def test_explicit_field_overrides_cost_model():
    model = load_fixture_model("compute_heavy")
    records = [json.loads(l) for l in serialize_profile(default_profile(model)).splitlines()]
    del records[3]["recv_energy"]
    records[3]["send_energy"] = 42.0
    profile = load_profile("\n".join(json.dumps(r) for r in records), model)
    assert profile[3].send_energy == 42.0
    assert profile[3].recv_energy == default_profile(model)[3].recv_energy


def test_missing_layer_is_named():
    model = load_fixture_model("vgg16")
    records = [json.loads(l) for l in serialize_profile(default_profile(model)).splitlines()]
    text = "\n".join(json.dumps(r) for r in records if r.get("id") != 7)
    with pytest.raises(ValidationError, match="layer 7"):
        load_profile(text, model)


def test_rejects_bad_entries():
    model = load_fixture_model("compute_heavy")
    records = [json.loads(l) for l in serialize_profile(default_profile(model)).splitlines()]

    def load(mutate):
        recs = json.loads(json.dumps(records))
        mutate(recs)
        return load_profile("\n".join(json.dumps(r) for r in recs), model)

    with pytest.raises(ValidationError, match="layer 2"):
        load(lambda r: r[2].update(comp_energy=-1.0))
    with pytest.raises(ValidationError, match="duplicate"):
        load(lambda r: r.append(dict(r[2])))
    with pytest.raises(ValidationError, match="unknown layer"):
        load(lambda r: r.append({**r[2], "id": 99}))
    with pytest.raises(ValidationError, match="comp_time"):
        load(lambda r: r[4].update(comp_time=0.0))
    with pytest.raises(ParseError, match="comp_energy"):
        load(lambda r: r[4].pop("comp_energy"))
    with pytest.raises(ParseError, match="device_name"):
        load(lambda r: r[0].pop("device_name"))


def test_scaled_profile():
    model, profile = load_fixture("fc_heavy")
    doubled = profile.scaled(2.0)
    for i in model.ids:
        assert doubled[i].comp_energy == 2.0 * profile[i].comp_energy
        assert doubled[i].comp_time == profile[i].comp_time
