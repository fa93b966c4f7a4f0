import csv
import io
import json
import subprocess
import sys

import pytest

from conftest import chain, manual_profile
from edgepart.cli import main
from edgepart.model import serialize_model
from edgepart.partitioner import SequentialPlan, VerticalPlan, serialize_plan
from edgepart.profiles import serialize_profile
from edgepart.report import BREAKDOWN_COLUMNS, SWEEP_COLUMNS


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def three_layer(tmp_path):
    model = chain(3)
    profile = manual_profile(model, [2.0, 3.0, 1.0], [0.1, 0.1, 0.1], send=[0.5, 0.3, 0.0], recv=[0.0, 0.4, 0.3])
    mpath, ppath = tmp_path / "m.jsonl", tmp_path / "p.jsonl"
    mpath.write_text(serialize_model(model))
    ppath.write_text(serialize_profile(profile))
    return mpath, ppath


def test_plan_data_vgg(capsys):
    code, out, _ = run(capsys, "plan", "--model", "vgg16", "--strategy", "data", "--partitions", 4)
    assert code == 0
    doc = json.loads(out)
    assert sorted(doc["heights"][18]) == [1, 2, 2, 2]


def test_plan_sequential_single(capsys):
    code, out, _ = run(capsys, "plan", "--model", "fc_heavy", "--strategy", "sequential", "--partitions", 1)
    assert code == 0 and json.loads(out)["groups"] == [[1, 12]]


def test_plan_is_reproducible(capsys, tmp_path):
    args = ["plan", "--model", "compute_heavy", "--strategy", "vertical", "--partitions", 3, "--seed", 42]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, *args, "-o", a)[0] == 0
    assert run(capsys, *args, "-o", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["ga"]["seed"] == 42


def test_plan_exact_method(capsys):
    code, out, _ = run(capsys, "plan", "--model", "comm_heavy", "--strategy", "vertical", "--partitions", 2, "--method", "exact")
    assert code == 0 and json.loads(out)["method"] == "exact"


def test_plan_errors(capsys, tmp_path):
    code, _, err = run(capsys, "plan", "--model", "fc_heavy", "--strategy", "sequential", "--partitions", 13)
    assert code == 1 and "layers" in err
    code, _, err = run(capsys, "plan", "--model", tmp_path / "missing.jsonl", "--strategy", "data", "--partitions", 2)
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["plan", "--model", "vgg16", "--strategy", "diagonal", "--partitions", "2"])
    assert exc.value.code == 2


def test_estimate_single_partition(capsys, tmp_path):
    plan = tmp_path / "plan.json"
    run(capsys, "plan", "--model", "emotion_fer", "--strategy", "horizontal", "--partitions", 1, "-o", plan)
    code, out, _ = run(capsys, "estimate", "--model", "emotion_fer", "--plan", plan)
    assert code == 0
    table = rows(out)
    assert list(table[0]) == list(BREAKDOWN_COLUMNS)
    assert table[-1]["partition_index"] == "max" and float(table[-1]["normalized_max"]) == 1.0


def test_estimate_derived_example(capsys, three_layer, tmp_path):
    mpath, ppath = three_layer
    plan = tmp_path / "plan.json"
    plan.write_text(serialize_plan(SequentialPlan(2, [(1, 1), (2, 3)])))
    code, out, _ = run(capsys, "estimate", "--model", mpath, "--profile", ppath, "--plan", plan)
    assert code == 0
    totals = [float(r["total_J"]) for r in rows(out)]
    assert totals == pytest.approx([2.6, 4.6, 4.6], rel=1e-12)


def test_estimate_json_mirrors_csv(capsys, three_layer, tmp_path):
    mpath, ppath = three_layer
    plan = tmp_path / "plan.json"
    plan.write_text(serialize_plan(SequentialPlan(2, [(1, 1), (2, 3)])))
    _, text, _ = run(capsys, "estimate", "--model", mpath, "--profile", ppath, "--plan", plan)
    _, doc, _ = run(capsys, "estimate", "--model", mpath, "--profile", ppath, "--plan", plan, "--format", "json")
    records = json.loads(doc)
    assert [list(r) for r in records] == [list(BREAKDOWN_COLUMNS)] * 3
    assert [repr(r["total_J"]) for r in records] == [r["total_J"] for r in rows(text)]


def test_contiguous_vertical_matches_sequential(capsys, three_layer, tmp_path):
    mpath, ppath = three_layer
    seq, ver = tmp_path / "s.json", tmp_path / "v.json"
    seq.write_text(serialize_plan(SequentialPlan(2, [(1, 2), (3, 3)])))
    ver.write_text(serialize_plan(VerticalPlan(2, [1, 1, 2])))
    _, a, _ = run(capsys, "estimate", "--model", mpath, "--profile", ppath, "--plan", seq)
    _, b, _ = run(capsys, "estimate", "--model", mpath, "--profile", ppath, "--plan", ver)
    numeric = BREAKDOWN_COLUMNS[2:]
    assert [[r[k] for k in numeric] for r in rows(a)] == [[r[k] for k in numeric] for r in rows(b)]


def test_estimate_mismatched_plan(capsys, tmp_path):
    plan = tmp_path / "plan.json"
    run(capsys, "plan", "--model", "vgg16", "--strategy", "data", "--partitions", 2, "-o", plan)
    code, _, err = run(capsys, "estimate", "--model", "comm_heavy", "--plan", plan)
    assert code == 1 and "error" in err


def test_sweep_shape_and_baseline(capsys):
    code, out, _ = run(capsys, "sweep", "--model", "fc_heavy", "--max-devices", 3, "--population", 16, "--generations", 10)
    assert code == 0
    table = rows(out)
    assert list(table[0]) == list(SWEEP_COLUMNS)
    pairs = [(r["strategy"], int(r["device_count"])) for r in table]
    assert len(pairs) == len(set(pairs)) == 12
    for r in table:
        assert float(r["normalized_max"]) == pytest.approx(float(r["max_energy_J"]) / float(r["baseline_single_device_J"]))
        if r["device_count"] == "1":
            assert r["max_energy_J"] == r["baseline_single_device_J"]


def test_sweep_requires_two_devices(capsys):
    code, _, _ = run(capsys, "sweep", "--model", "fc_heavy", "--max-devices", 1)
    assert code == 2


def test_validate_fixtures(capsys):
    for name in ("vgg16", "emotion_fer", "compute_heavy", "comm_heavy", "fc_heavy"):
        code, out, _ = run(capsys, "validate", "--model", name)
        assert code == 0, out
        assert "agree" in out


def test_validate_corrupted_plan(capsys, tmp_path):
    plan = tmp_path / "plan.json"
    run(capsys, "plan", "--model", "comm_heavy", "--strategy", "data", "--partitions", 2, "-o", plan)
    doc = json.loads(plan.read_text())
    doc["heights"][2][0] += 1
    plan.write_text(json.dumps(doc))
    code, _, err = run(capsys, "validate", "--model", "comm_heavy", "--plan", plan)
    assert code == 1 and "layer 3" in err


def test_lifetime(capsys):
    code, out, _ = run(
        capsys, "lifetime", "--capacity-mah", 18000, "--voltage", 19, "--energy-per-image", 0.0175,
        "--time-per-image", 0.00565, "--format", "json",
    )
    assert code == 0
    report = json.loads(out)
    assert round(report["days"], 1) == 4.6
    assert report["images"] == pytest.approx(70354286, rel=0.005)
    code, out, _ = run(capsys, "lifetime", "--capacity-mah", 18000, "--voltage", 19, "--energy-per-image", 1, "--time-per-image", 1)
    assert "1231200 s" in out
    code, _, err = run(capsys, "lifetime", "--capacity-mah", 0, "--voltage", 19, "--energy-per-image", 1, "--time-per-image", 1)
    assert code == 2 and "capacity_mah" in err


def test_profile_subcommand(capsys, tmp_path):
    out = tmp_path / "p.jsonl"
    assert run(capsys, "profile", "--model", "vgg16", "-o", out)[0] == 0
    code, text, _ = run(capsys, "sweep", "--model", "vgg16", "--profile", out, "--max-devices", 2, "--generations", 5)
    assert code == 0 and len(rows(text)) == 8


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "edgepart", "lifetime", "--capacity-mah", "18000", "--voltage", "19",
         "--energy-per-image", "0.383", "--time-per-image", "0.0852"],
        capture_output=True, text=True, check=True,
    )
    assert "3.2 days" in proc.stdout
