"""Command-line front end.

Subcommands map onto the package's main results: ``ghz-nogo`` (support
tables and the unsatisfiable constraint set), ``distinguish`` (door vs pair
observable on the unitary and collapsed descriptions), ``frames`` (geometry
validation, boost velocities, per-frame event orderings), ``run`` (constraint
collection plus Monte Carlo model statistics), ``erasure`` (the single-lab
record-erasure experiment), and ``sweep`` (the contradiction re-derived under
random non-ideal devices).

Configuration comes from an optional JSON file plus flag overrides; every
report echoes the fully-resolved configuration, carries a named pass/fail
check list, and is byte-identical for identical inputs (no timestamps). Exit
status is 0 iff all checks pass.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .measurement import (
    MeasurementModel,
    distinguishability_report,
    haar_random_unitary,
    ideal_von_neumann,
    per_site_model,
)
from .models import (
    InterpretationModel,
    MODES,
    erasure_experiment,
    nonideal_sweep,
    run_model,
)
from .scenario import (
    FRAME_NAMES,
    build_schedule,
    collect_constraints,
    enumerate_assignments,
    evolve_to,
    order_events,
    round_slots,
    standard_frames,
    support_constraint,
)
from .spacetime import GeometrySpec, standard_geometry, validate_geometry

SCHEMA_VERSION = "1"
ENV_SEED = "GWSIM_SEED"

DEFAULT_CONFIG = {
    "geometry": {"side": 10.0, "tau": 1.0},
    "model": {"kind": "ideal", "seed": 0},
    "run": {"mode": "round_born", "preferred_frame": "sigma", "trials": 10000, "seed": None},
    "output": {"format": "json", "path": None},
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config section {path + key!r} must be an object")
            out[key] = _merge(base[key], value, path + key + ".")
        else:
            out[key] = value
    return out


def load_config(path: str | None) -> dict:
    """Defaults, deep-merged with the JSON config file if given."""
    config = {k: dict(v) for k, v in DEFAULT_CONFIG.items()}
    if path is None:
        return config
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return _merge(config, data)


def _apply_flags(config: dict, args: argparse.Namespace) -> dict:
    if getattr(args, "side", None) is not None:
        config["geometry"]["side"] = args.side
    if getattr(args, "tau", None) is not None:
        config["geometry"]["tau"] = args.tau
    if getattr(args, "model", None) is not None:
        config["model"] = _parse_model_spec(args.model)
    if getattr(args, "trials", None) is not None:
        config["run"]["trials"] = args.trials
    if getattr(args, "mode", None) is not None:
        config["run"]["mode"] = args.mode
    if getattr(args, "preferred", None) is not None:
        config["run"]["preferred_frame"] = args.preferred
    if getattr(args, "seed", None) is not None:
        config["run"]["seed"] = args.seed
    if getattr(args, "format", None) is not None:
        config["output"]["format"] = args.format
    return config


def _parse_model_spec(text: str) -> dict:
    if text == "ideal":
        return {"kind": "ideal", "seed": 0}
    if text.startswith("random:"):
        try:
            return {"kind": "random", "seed": int(text.split(":", 1)[1])}
        except ValueError as exc:
            raise ConfigError(f"bad model spec {text!r}: expected random:<int>") from exc
    raise ConfigError(f"bad model spec {text!r}: expected 'ideal' or 'random:<seed>'")


def _validate_config(config: dict) -> dict:
    geometry = config["geometry"]
    for key in ("side", "tau"):
        value = geometry[key]
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"geometry.{key} must be a finite number, got {value!r}")
        geometry[key] = float(value)
    if config["model"]["kind"] not in ("ideal", "random"):
        raise ConfigError(f"model.kind must be 'ideal' or 'random', got {config['model']['kind']!r}")
    run = config["run"]
    if run["mode"] not in MODES:
        raise ConfigError(f"run.mode must be one of {MODES}, got {run['mode']!r}")
    if run["preferred_frame"] not in FRAME_NAMES:
        raise ConfigError(
            f"run.preferred_frame must be one of {FRAME_NAMES}, got {run['preferred_frame']!r}"
        )
    if not isinstance(run["trials"], int) or run["trials"] < 0:
        raise ConfigError(f"run.trials must be a non-negative integer, got {run['trials']!r}")
    if config["output"]["format"] not in ("json", "text"):
        raise ConfigError(f"output.format must be 'json' or 'text', got {config['output']['format']!r}")
    return config


def _resolve_seed(config: dict) -> int:
    seed = config["run"]["seed"]
    if seed is None:
        seed = int(os.environ.get(ENV_SEED, "0"))
    if not isinstance(seed, int):
        raise ConfigError(f"run.seed must be an integer, got {seed!r}")
    config["run"]["seed"] = seed
    return seed


def _build_model(config: dict) -> MeasurementModel:
    if config["model"]["kind"] == "ideal":
        return ideal_von_neumann()
    rng = np.random.default_rng(config["model"]["seed"])
    return per_site_model(*(haar_random_unitary(6, rng) for _ in range(3)))


def _check(name: str, passed: bool, detail: str) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _report(command: str, config: dict, results: dict, checks: list[dict]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "results": results,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }


def _sign_key(value: float) -> str:
    n = int(round(value))
    return f"{n:+d}" if n else "0"


def _distribution_dict(dist: dict) -> dict:
    return {_sign_key(v): float(p) for v, p in dist.items()}


def _constraint_dict(c) -> dict:
    return {"slots": list(c.slots), "required_product": c.required_product}


def _binomial_band(p: float, trials: int) -> float:
    return 4.0 * math.sqrt(p * (1.0 - p) / trials) if trials else math.inf


# ---------------------------------------------------------------------------
# Subcommands


def cmd_ghz_nogo(config: dict, drop_constraint: int | None = None) -> dict:
    model = _build_model(config)
    side, tau = config["geometry"]["side"], config["geometry"]["tau"]
    schedule = build_schedule(side, tau, model)
    frames = standard_frames(schedule.geometry)

    tables = []
    constraints = []
    support_ok = True
    for name, frame in frames.items():
        for k, rnd in enumerate(order_events(schedule, frame), start=1):
            state = evolve_to(schedule, frame, k)
            entries, constraint = support_constraint(state, rnd, schedule.model)
            if constraint is None:
                continue
            key = (constraint.slots, constraint.required_product)
            if key in {(c.slots, c.required_product) for c in constraints}:
                continue
            constraints.append(constraint)
            if any(abs(e.probability - 0.25) > 1e-10 for e in entries):
                support_ok = False
            tables.append(
                {
                    "frame": name,
                    "slots": list(round_slots(rnd)),
                    "entries": [
                        {"labels": list(e.labels), "probability": e.probability}
                        for e in entries
                    ],
                    "constraint": _constraint_dict(constraint),
                }
            )

    checks = [
        _check(
            "support_tables_quarter",
            support_ok and all(len(t["entries"]) == 4 for t in tables),
            "every constrained round has 4 outcome tuples of weight 1/4",
        ),
        _check("constraint_count", len(constraints) == 4, f"collected {len(constraints)} constraints"),
    ]

    kept = list(constraints)
    dropped = None
    if drop_constraint is not None:
        if not 1 <= drop_constraint <= len(constraints):
            raise ConfigError(
                f"--drop-constraint must be in 1..{len(constraints)}, got {drop_constraint}"
            )
        dropped = _constraint_dict(constraints[drop_constraint - 1])
        kept = [c for i, c in enumerate(constraints, start=1) if i != drop_constraint]
    satisfying = enumerate_assignments(kept)

    if drop_constraint is None:
        checks.append(
            _check(
                "unsatisfiable",
                len(satisfying) == 0,
                f"{len(satisfying)} of 64 assignments satisfy all four constraints",
            )
        )
    else:
        checks.append(
            _check(
                "dropped_constraint_leaves_eight",
                len(satisfying) == 8,
                f"{len(satisfying)} of 64 assignments satisfy the remaining three",
            )
        )

    results = {
        "support_tables": tables,
        "constraints": [_constraint_dict(c) for c in constraints],
        "dropped_constraint": dropped,
        "satisfying_assignments": len(satisfying),
    }
    return _report("ghz-nogo", config, results, checks)


def cmd_distinguish(config: dict) -> dict:
    model = _build_model(config)
    report = distinguishability_report(model)
    table = {
        obs: {
            state: _distribution_dict(dist)
            for state, dist in report["distributions"][obs].items()
        }
        for obs in report["observables"]
    }

    door = table["door"]
    pair = table["pair_x"]
    door_equal = all(
        abs(door["unitary_record"][k] - door["collapsed_record"][k]) <= 1e-10
        for k in door["unitary_record"]
    )
    checks = [
        _check("door_rows_equal", door_equal, "door statistics identical on both descriptions"),
        _check(
            "pair_x_unitary_point_mass",
            abs(pair["unitary_record"]["+1"] - 1.0) <= 1e-10,
            f"pair observable on unitary description: +1 with probability "
            f"{pair['unitary_record']['+1']:.12g}",
        ),
        _check(
            "pair_x_collapsed_even",
            abs(pair["collapsed_record"]["+1"] - 0.5) <= 1e-10
            and abs(pair["collapsed_record"]["-1"] - 0.5) <= 1e-10,
            "pair observable on collapsed description: 1/2, 1/2",
        ),
    ]
    results = {"observables": report["observables"], "states": report["states"], "distributions": table}
    return _report("distinguish", config, results, checks)


def _geometry_spec_unchecked(side: float, tau: float) -> GeometrySpec:
    try:
        return standard_geometry(side, tau)
    except ValueError:
        # Keep the same arrangement so validation can name what fails.
        h = side / math.sqrt(3.0)
        return GeometrySpec(
            (0.0, h), (-side / 2.0, -h / 2.0), (side / 2.0, -h / 2.0), 0.0, tau, 2.0 * tau
        )


def cmd_frames(config: dict) -> dict:
    side, tau = config["geometry"]["side"], config["geometry"]["tau"]
    if side <= 0:
        raise ConfigError(f"geometry.side must be positive, got {side}")
    geometry = _geometry_spec_unchecked(side, tau)
    geo_checks = validate_geometry(geometry)
    checks = [_check(f"geometry_{r.name}", r.passed, r.detail) for r in geo_checks]
    results: dict = {
        "geometry": {
            "side": side,
            "tau": tau,
            "positions": {s: list(geometry.position(s)) for s in "ABC"},
            "epochs": [geometry.t0, geometry.t1, geometry.t2],
        }
    }

    if all(r.passed for r in geo_checks):
        model = _build_model(config)
        schedule = build_schedule(side, tau, model)
        frames = standard_frames(schedule.geometry)
        speeds = [f.speed for name, f in frames.items() if name != "sigma"]
        results["frames"] = {
            name: {"velocity": list(f.velocity), "speed": f.speed, "gamma": f.gamma}
            for name, f in frames.items()
        }
        results["orderings"] = {
            name: [[ev.id for ev in rnd] for rnd in order_events(schedule, f)]
            for name, f in frames.items()
        }
        checks.append(
            _check(
                "tilted_speeds_equal",
                max(speeds) - min(speeds) <= 1e-9,
                f"tilted-frame speeds {', '.join(f'{s:.12g}' for s in speeds)}",
            )
        )
    return _report("frames", config, results, checks)


def cmd_run(config: dict) -> dict:
    seed = _resolve_seed(config)
    model = _build_model(config)
    side, tau = config["geometry"]["side"], config["geometry"]["tau"]
    schedule = build_schedule(side, tau, model)
    frames = standard_frames(schedule.geometry)
    constraints = collect_constraints(schedule, frames)
    satisfying = enumerate_assignments(constraints)

    checks = [
        _check("constraint_count", len(constraints) == 4, f"collected {len(constraints)} constraints"),
        _check(
            "unsatisfiable",
            len(satisfying) == 0,
            f"{len(satisfying)} of 64 assignments satisfy all constraints",
        ),
    ]
    results: dict = {
        "constraints": [_constraint_dict(c) for c in constraints],
        "satisfying_assignments": len(satisfying),
    }

    trials = config["run"]["trials"]
    mode = config["run"]["mode"]
    preferred_name = config["run"]["preferred_frame"]
    if trials > 0:
        interpretation = InterpretationModel(mode, frames[preferred_name])
        report = run_model(schedule, interpretation, trials, seed)
        stats = []
        for c, preferred, count in zip(
            report.constraints, report.preferred_mask, report.violation_counts
        ):
            stats.append(
                {
                    **_constraint_dict(c),
                    "preferred": preferred,
                    "violations": count,
                    "rate": count / trials,
                }
            )
        results["run"] = {
            "mode": mode,
            "preferred_frame": preferred_name,
            "trials": trials,
            "seed": seed,
            "constraint_statistics": stats,
            "trials_violating_nonpreferred": report.trials_violating_nonpreferred,
        }
        if mode == "round_born":
            band = _binomial_band(0.5, trials)
            preferred_ok = all(
                count == 0
                for count, preferred in zip(report.violation_counts, report.preferred_mask)
                if preferred
            )
            nonpreferred_rates = [
                count / trials
                for count, preferred in zip(report.violation_counts, report.preferred_mask)
                if not preferred
            ]
            checks += [
                _check(
                    "preferred_constraints_never_violated",
                    preferred_ok,
                    "preferred frame's parity holds in every trial",
                ),
                _check(
                    "nonpreferred_rates_half",
                    all(abs(r - 0.5) <= band for r in nonpreferred_rates),
                    f"rates {', '.join(f'{r:.12g}' for r in nonpreferred_rates)} "
                    f"within 4σ band ±{band:.3g} of 1/2",
                ),
                _check(
                    "every_trial_violates_nonpreferred",
                    report.trials_violating_nonpreferred == trials,
                    f"{report.trials_violating_nonpreferred} of {trials} trials "
                    "violate at least one non-preferred constraint",
                ),
            ]
        else:
            outsider_products = [
                a.value("x_A") * a.value("x_B") * a.value("x_C") for a in report.assignments
            ]
            rate = outsider_products.count(-1) / trials
            results["run"]["outsider_product_minus_one_rate"] = rate
            checks.append(
                _check(
                    "outsider_parity_rate_half",
                    abs(rate - 0.5) <= _binomial_band(0.5, trials),
                    f"collapse breaks the unitary prediction: product −1 in "
                    f"{rate:.12g} of trials (unitary account: all of them)",
                )
            )
    return _report("run", config, results, checks)


def cmd_erasure(config: dict, skip_pair_x: bool = False) -> dict:
    seed = _resolve_seed(config)
    trials = config["run"]["trials"]
    report = erasure_experiment(trials, seed, skip_pair_x=skip_pair_x)
    results = {
        "trials": trials,
        "seed": seed,
        "skip_pair_x": skip_pair_x,
        "pair_x_counts": {_sign_key(k): v for k, v in report.pair_x_counts.items()},
        "door_counts": {_sign_key(k): v for k, v in report.door_counts.items()},
        "down_frequency": report.down_frequency,
        "exact_down_probability": report.exact_down_probability,
    }
    if skip_pair_x:
        checks = [
            _check(
                "exact_down_zero",
                abs(report.exact_down_probability) <= 1e-12,
                "without the pair measurement the record stays RecordedUp",
            ),
            _check(
                "no_down_reports",
                report.door_counts[-1] == 0,
                f"{report.door_counts[-1]} RecordedDown reports in {trials} trials",
            ),
        ]
    else:
        band = _binomial_band(0.5, trials)
        checks = [
            _check(
                "exact_down_half",
                abs(report.exact_down_probability - 0.5) <= 1e-12,
                f"exact post-measurement Down probability {report.exact_down_probability:.12g}",
            ),
            _check(
                "down_rate_half",
                trials == 0 or abs(report.down_frequency - 0.5) <= band,
                f"Down frequency {report.down_frequency:.12g} within ±{band:.3g} of 1/2",
            ),
            _check(
                "pair_x_balanced",
                trials == 0
                or abs(report.pair_x_counts[+1] / trials - 0.5) <= band,
                "pair-observable outcomes evenly split",
            ),
        ]
    return _report("erasure", config, results, checks)


def cmd_sweep(config: dict, n_models: int) -> dict:
    seed = _resolve_seed(config)
    if n_models < 1:
        raise ConfigError(f"--models must be ≥ 1, got {n_models}")
    side, tau = config["geometry"]["side"], config["geometry"]["tau"]
    report = nonideal_sweep(n_models, seed, side=side, tau=tau)
    results = {
        "n_models": n_models,
        "seed": seed,
        "n_passed": report.n_passed,
        "models": [
            {
                "index": r.index,
                "kind": r.kind,
                "constraints_match": r.constraints_match,
                "satisfying_assignments": r.satisfying_count,
                "support_ok": r.support_ok,
                "passed": r.passed,
            }
            for r in report.results
        ],
    }
    checks = [
        _check(
            "all_models_reproduce_contradiction",
            report.all_passed,
            f"{report.n_passed} of {n_models} models yield the four constraints "
            "and an empty satisfying set",
        )
    ]
    return _report("sweep", config, results, checks)


# ---------------------------------------------------------------------------
# Rendering and entry point


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _render_lines(obj, indent: int, lines: list[str]) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        for key, value in obj.items():
            if isinstance(value, (dict, list)) and value:
                lines.append(f"{pad}{key}:")
                _render_lines(value, indent + 1, lines)
            else:
                lines.append(f"{pad}{key}: {_format_value(value) if not isinstance(value, (dict, list)) else '(empty)'}")
    elif isinstance(obj, list):
        if all(not isinstance(item, (dict, list)) for item in obj):
            lines.append(pad + ", ".join(_format_value(item) for item in obj))
        else:
            for item in obj:
                lines.append(f"{pad}-")
                _render_lines(item, indent + 1, lines)
    else:
        lines.append(pad + _format_value(obj))


def render_text(report: dict) -> str:
    lines = [f"command: {report['command']}"]
    lines.append("config:")
    _render_lines(report["config"], 1, lines)
    lines.append("results:")
    _render_lines(report["results"], 1, lines)
    lines.append("checks:")
    for check in report["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        lines.append(f"  [{status}] {check['name']} — {check['detail']}")
    lines.append(f"passed: {_format_value(report['passed'])}")
    return "\n".join(lines)


def emit(report: dict, config: dict) -> None:
    if config["output"]["format"] == "json":
        text = json.dumps(report, indent=2)
    else:
        text = render_text(report)
    path = config["output"]["path"]
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwsim",
        description="Three-laboratory GHZ experiment with nested observers: "
        "support tables, frame analysis, and single-outcome model statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, geometry=True, model=True, seed=True):
        p.add_argument("--config", metavar="PATH", help="JSON config file")
        p.add_argument("--format", choices=("json", "text"), help="report format")
        if geometry:
            p.add_argument("--side", type=float, help="triangle side length")
            p.add_argument("--tau", type=float, help="epoch duration (t1−t0 = t2−t1)")
        if model:
            p.add_argument(
                "--model",
                metavar="SPEC",
                help="measurement devices: 'ideal' or 'random:<seed>'",
            )
        if seed:
            p.add_argument("--seed", type=int, help=f"master seed (default ${ENV_SEED} or 0)")

    p = sub.add_parser("ghz-nogo", help="support tables and the unsatisfiable constraint set")
    common(p, seed=False)
    p.add_argument(
        "--drop-constraint",
        type=int,
        metavar="K",
        help="drop the K-th constraint (1-based) before enumerating",
    )

    p = sub.add_parser("distinguish", help="door vs pair statistics on the two descriptions")
    common(p, geometry=False, seed=False)

    p = sub.add_parser("frames", help="geometry validation, boosts, event orderings")
    common(p, seed=False)

    p = sub.add_parser("run", help="constraints plus Monte Carlo model statistics")
    common(p)
    p.add_argument("--trials", type=int, help="number of trials")
    p.add_argument("--mode", choices=MODES, help="interpretation model")
    p.add_argument("--preferred", choices=FRAME_NAMES, help="preferred frame")

    p = sub.add_parser("erasure", help="single-lab record erasure experiment")
    common(p, geometry=False, model=False)
    p.add_argument("--trials", type=int, help="number of trials")
    p.add_argument("--skip-j", action="store_true", help="skip the outsider pair measurement")

    p = sub.add_parser("sweep", help="contradiction under random non-ideal devices")
    common(p)
    p.add_argument("--models", type=int, default=101, help="number of models (first is ideal)")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        config = _apply_flags(config, args)
        config = _validate_config(config)
        if args.command == "ghz-nogo":
            report = cmd_ghz_nogo(config, drop_constraint=args.drop_constraint)
        elif args.command == "distinguish":
            report = cmd_distinguish(config)
        elif args.command == "frames":
            report = cmd_frames(config)
        elif args.command == "run":
            report = cmd_run(config)
        elif args.command == "erasure":
            report = cmd_erasure(config, skip_pair_x=args.skip_j)
        elif args.command == "sweep":
            report = cmd_sweep(config, n_models=args.models)
        else:  # pragma: no cover — argparse enforces the choices
            raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    emit(report, config)
    return 0 if report["passed"] else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
