"""Command-line front end.

Exit codes: 0 success, 1 validation failure or formula mismatch, 2 usage or
I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import fixtures
from .energy import LayerCosts, battery_lifetime, evaluate, summarize
from .energy import data_breakdowns, horizontal_breakdowns, sequential_breakdowns, vertical_breakdowns
from .errors import EdgePartError, InfeasibleError, ValidationError
from .model import NetworkModel, load_model
from .oracle import simulate_data_volumes, simulate_horizontal_volumes
from .partitioner import STRATEGIES, DataPlan, HorizontalPlan, parse_plan, serialize_plan
from .partitioner import data_comm_heights, plan_data, plan_horizontal
from .partitioner.search import (
    OBJECTIVES,
    GAConfig,
    exhaustive_vertical,
    plan_sequential_dp,
    plan_sequential_ga,
    plan_vertical_ga,
)
from .profiles import CommCostModel, DeviceProfile, load_profile_file, serialize_profile, synthesize_profile
from .report import BREAKDOWN_COLUMNS, SWEEP_COLUMNS, SweepRow, breakdown_rows, render, sweep_rows

log = logging.getLogger("edgepart")

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2
VALIDATE_MAX_PARTITIONS = 6
SECONDS_PER_DAY = 86400.0


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# input resolution


def resolve_model(spec: str) -> NetworkModel:
    """A model file path, or the name of a shipped fixture."""
    path = Path(spec)
    if path.exists():
        return load_model(path)
    if spec in fixtures.MODEL_NAMES:
        return fixtures.load_fixture_model(spec)
    raise UsageError(f"no model file or fixture named {spec!r}")


def resolve_profile(spec: str | None, model: NetworkModel) -> DeviceProfile:
    """A profile file path, or a shipped variant of the model's fixture profile.

    With no value the model's default fixture profile is used.
    """
    if spec is not None and Path(spec).exists():
        return load_profile_file(spec, model)
    variant = None if spec in (None, "default") else spec
    path = fixtures.profile_path(model.name, variant)
    if path.exists():
        return load_profile_file(path, model)
    if spec is None:
        raise UsageError(f"--profile is required: no shipped profile for model {model.name!r}")
    raise UsageError(f"no profile file or {model.name!r} fixture variant named {spec!r}")


def ga_config(args) -> GAConfig:
    try:
        return GAConfig(
            population_size=args.population,
            generations=args.generations,
            mutation_rate=args.mutation_rate,
            seed=args.seed,
            objective=args.objective,
            workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def make_plan(model, costs, strategy: str, partitions: int, config: GAConfig, method: str = "ga"):
    if strategy == "data":
        return plan_data(model, partitions)
    if strategy == "horizontal":
        return plan_horizontal(model, partitions)
    if strategy == "sequential":
        if method == "exact":
            return plan_sequential_dp(model, costs, partitions)
        return plan_sequential_ga(model, costs, partitions, config)
    if strategy == "vertical":
        if method == "exact":
            return exhaustive_vertical(model, costs, partitions)
        return plan_vertical_ga(model, costs, partitions, config)
    raise UsageError(f"unknown strategy {strategy!r}")


def _emit(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_plan(args) -> int:
    model = resolve_model(args.model)
    profile = resolve_profile(args.profile, model)
    config = ga_config(args)
    costs = LayerCosts(model, profile)
    plan = make_plan(model, costs, args.strategy, args.partitions, config, args.method)
    meta = {}
    if args.strategy in ("sequential", "vertical"):
        meta["method"] = args.method
        if args.method == "ga":
            meta["ga"] = {
                "seed": config.seed,
                "population": config.population_size,
                "generations": config.generations,
                "mutation_rate": config.mutation_rate,
                "objective": config.objective,
            }
    _emit(serialize_plan(plan, model.name, meta), args.output)
    return EXIT_OK


def cmd_estimate(args) -> int:
    model = resolve_model(args.model)
    profile = resolve_profile(args.profile, model)
    plan, doc = parse_plan(Path(args.plan).read_text())
    if doc.get("model") not in (None, model.name):
        log.warning("plan was made for model %r, estimating on %r", doc["model"], model.name)
    summary = evaluate(model, profile, plan)
    sys.stdout.write(render(breakdown_rows(plan.strategy, summary), BREAKDOWN_COLUMNS, args.format))
    return EXIT_OK


_BREAKDOWNS = {
    "data": lambda model, costs, plan: data_breakdowns(model, costs, plan),
    "horizontal": lambda model, costs, plan: horizontal_breakdowns(costs, plan),
    "sequential": lambda model, costs, plan: sequential_breakdowns(costs, plan),
    "vertical": lambda model, costs, plan: vertical_breakdowns(costs, plan),
}


def run_sweep(model, profile, max_devices: int, config: GAConfig, strategies=STRATEGIES) -> list[SweepRow]:
    costs = LayerCosts(model, profile)
    rows = []
    for strategy in strategies:
        for m in range(1, max_devices + 1):
            try:
                plan = make_plan(model, costs, strategy, m, config)
            except InfeasibleError as exc:
                log.warning("skipping %s at M=%d: %s", strategy, m, exc)
                continue
            summary = summarize(_BREAKDOWNS[strategy](model, costs, plan), costs.single_device_total)
            rows.append(SweepRow(strategy, m, summary.max_energy, summary.normalized_max, costs.single_device_total))
    return rows


def cmd_sweep(args) -> int:
    if args.max_devices < 2:
        raise UsageError("--max-devices must be >= 2")
    model = resolve_model(args.model)
    profile = resolve_profile(args.profile, model)
    rows = run_sweep(model, profile, args.max_devices, ga_config(args))
    _emit(render(sweep_rows(rows), SWEEP_COLUMNS, args.format), args.output)
    return EXIT_OK


def _fmt(values) -> str:
    return "[" + ",".join(str(v) for v in values) + "]"


def agreement(model: NetworkModel, plan) -> list[tuple[int, str, list[int], list[int]]]:
    """Closed-form and simulated remote units per layer: (layer, strategy, closed, oracle)."""
    out = []
    if isinstance(plan, DataPlan):
        closed = data_comm_heights(model, plan)
        sim = simulate_data_volumes(model, plan).remote_units
        for layer in model:
            out.append((layer.id, "data", list(closed[layer.id - 1]), list(sim[layer.id - 1])))
    elif isinstance(plan, HorizontalPlan):
        sim = simulate_horizontal_volumes(model, plan).remote_units
        last = len(model)
        for layer in model:
            counts = plan.channel_counts[layer.id - 1]
            total = layer.out_shape.channels
            closed = [0 if layer.id == last else total - c for c in counts]
            out.append((layer.id, "horizontal", closed, list(sim[layer.id - 1])))
    else:
        raise ValidationError(f"the oracle covers data and horizontal plans, not {plan.strategy}")
    return out


def cmd_validate(args) -> int:
    model = resolve_model(args.model)
    if args.plan:
        plan, _ = parse_plan(Path(args.plan).read_text())
        plan.validate(model)
        plans = [plan]
    else:
        plans = []
        for m in range(1, VALIDATE_MAX_PARTITIONS + 1):
            plans += [plan_data(model, m), plan_horizontal(model, m)]
    mismatches = 0
    print(f"{'strategy':<10} {'M':>2} {'layer':>5}  {'closed_form':<24} {'oracle':<24} status")
    for plan in plans:
        for layer_id, strategy, closed, sim in agreement(model, plan):
            ok = closed == sim
            mismatches += not ok
            if ok and not args.verbose and not args.plan:
                continue
            print(
                f"{strategy:<10} {plan.partitions:>2} {layer_id:>5}  {_fmt(closed):<24} {_fmt(sim):<24} "
                f"{'ok' if ok else 'MISMATCH'}"
            )
    checked = sum(len(model) for _ in plans)
    print(f"{model.name}: {checked - mismatches}/{checked} layer checks agree")
    return EXIT_OK if mismatches == 0 else EXIT_INVALID


def lifetime_report(capacity_mah, voltage, energy, time_per_image) -> dict:
    try:
        seconds, images = battery_lifetime(capacity_mah, voltage, energy, time_per_image)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return {
        "battery_joules": capacity_mah * 3600.0 * voltage / 1000.0,
        "power_w": energy / time_per_image,
        "seconds": seconds,
        "days": seconds / SECONDS_PER_DAY,
        "images": images,
    }


def cmd_lifetime(args) -> int:
    report = lifetime_report(args.capacity_mah, args.voltage, args.energy_per_image, args.time_per_image)
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        print(f"battery energy : {report['battery_joules']:.1f} J")
        print(f"average power  : {report['power_w']:.4g} W")
        print(f"lifetime       : {report['days']:.1f} days ({report['seconds']:.0f} s)")
        print(f"images         : {report['images']:,}")
    return EXIT_OK


def cmd_profile(args) -> int:
    model = resolve_model(args.model)
    profile = synthesize_profile(
        model,
        args.comp_joules_per_mac,
        CommCostModel(args.internal_base, args.internal_per_element),
        CommCostModel(args.external_base, args.external_per_element),
        device_name=args.device_name,
    )
    _emit(serialize_profile(profile, args.format), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_inputs(p, profile=True):
    p.add_argument("--model", required=True, help="model file, or a shipped fixture name")
    if profile:
        p.add_argument("--profile", help="profile file, or a fixture variant (default: the model's shipped profile)")


def _add_ga(p):
    d = GAConfig()
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--population", type=int, default=d.population_size)
    p.add_argument("--generations", type=int, default=d.generations)
    p.add_argument("--mutation-rate", type=float, default=d.mutation_rate)
    p.add_argument("--objective", choices=OBJECTIVES, default=d.objective)
    p.add_argument("--workers", type=int, default=d.workers, help="threads evaluating GA fitness")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgepart", description="Partition CNN inference across edge devices.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="write a partition plan")
    _add_inputs(p)
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--partitions", type=int, required=True)
    p.add_argument("--method", choices=("ga", "exact"), default="ga", help="search for sequential/vertical")
    _add_ga(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("estimate", help="per-partition energy breakdown of a plan")
    _add_inputs(p)
    p.add_argument("--plan", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="max per-device energy for every strategy and device count")
    _add_inputs(p)
    p.add_argument("--max-devices", type=int, required=True)
    _add_ga(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check comm formulas against the brute-force oracle")
    _add_inputs(p, profile=False)
    p.add_argument("--plan", help="check this plan only")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("lifetime", help="battery lifetime under continuous inference")
    p.add_argument("--capacity-mah", type=float, required=True)
    p.add_argument("--voltage", type=float, required=True)
    p.add_argument("--energy-per-image", type=float, required=True)
    p.add_argument("--time-per-image", type=float, required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_lifetime)

    p = sub.add_parser("profile", help="synthesize a device profile from cost coefficients")
    _add_inputs(p, profile=False)
    p.add_argument("--comp-joules-per-mac", type=float, default=fixtures.COMP_JOULES_PER_MAC)
    p.add_argument("--internal-base", type=float, default=fixtures.INTERNAL.base_energy)
    p.add_argument("--internal-per-element", type=float, default=fixtures.INTERNAL.per_element_energy)
    p.add_argument("--external-base", type=float, default=fixtures.EXTERNAL.base_energy)
    p.add_argument("--external-per-element", type=float, default=fixtures.EXTERNAL.per_element_energy)
    p.add_argument("--device-name", default="synthetic")
    p.add_argument("--format", choices=("jsonl", "json"), default="jsonl")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_profile)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except EdgePartError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
