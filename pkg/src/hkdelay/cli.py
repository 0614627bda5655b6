"""Scenario-driven command line: simulate, certify, meanfield, sweep.

Exit status 0 on success, 2 on validation problems (every violation listed on
stderr), 3 on numeric failure during a run.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .diagnostics import certify, diagnostics_series, fit_decay_rate, initial_radius
from .dynamics import simulate
from .errors import NumericFailure, ValidationError
from .io import (
    write_certificate_json,
    write_diagnostics_csv,
    write_jsonl,
    write_trajectory_csv,
)
from .kernels import DelayProfile, InfluenceKernel
from .meanfield import convergence_experiment, sample_particles
from .scenario import Scenario, initial_history_for, load_scenario, with_seed


def _num(x) -> str:
    return "%.6g" % float(x)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hkdelay",
        description=(
            "Delayed bounded-confidence consensus dynamics: integrate the "
            "N-agent system, evaluate the consensus certificate, or run "
            "mean-field and parameter-sweep experiments from a scenario file."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "integrate one scenario and write trajectory/diagnostics",
        "certify": "evaluate the consensus certificate for a scenario",
        "meanfield": "N-scaling empirical-measure convergence experiment",
        "sweep": "run the scenario once per parameter value in parallel",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--scenario", required=True, help="path to a scenario TOML file")
        p.add_argument("--out-dir", default=".", help="directory for artifacts")
        p.add_argument("--seed", type=int, default=None, help="override sampling seed")
        p.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return parser


def _require_kind(scenario: Scenario, command: str) -> None:
    if scenario.experiment.kind != command:
        raise ValidationError(
            [
                f"experiment.kind: scenario declares {scenario.experiment.kind!r} "
                f"but the {command!r} subcommand was invoked"
            ]
        )


def _beta_for(scenario: Scenario, cert) -> float:
    if scenario.experiment.beta is not None:
        return scenario.experiment.beta
    return cert.beta_chosen if cert.holds else 0.0


def _fit_text(fit) -> str:
    return "inf" if fit.degenerate else _num(fit.rate)


def run_simulate(scenario: Scenario, out_dir: str, quiet: bool) -> None:
    config = scenario.config
    initial = initial_history_for(scenario)
    trajectory = simulate(config, initial)
    cert = certify(config.kernel, config.delay, config.weight, trajectory.radius)
    series = diagnostics_series(trajectory, _beta_for(scenario, cert))
    window = scenario.experiment.fit_window or (config.t_end / 2.0, config.t_end)
    fit = fit_decay_rate(series, window)
    if scenario.outputs.trajectory:
        write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), trajectory)
    if scenario.outputs.diagnostics:
        write_diagnostics_csv(os.path.join(out_dir, "diagnostics.csv"), series)
    if scenario.outputs.certificate:
        write_certificate_json(os.path.join(out_dir, "certificate.json"), cert)
    if not quiet:
        k_txt = _num(cert.K) if cert.holds else "none"
        print(
            f"simulate {scenario.name}: holds={'true' if cert.holds else 'false'} "
            f"K={k_txt} fitted_rate={_fit_text(fit)} final_dX={_num(series.d_x[-1])}"
        )


def run_certify(scenario: Scenario, out_dir: str, quiet: bool) -> None:
    config = scenario.config
    radius = initial_radius(initial_history_for(scenario))
    cert = certify(config.kernel, config.delay, config.weight, radius)
    if scenario.outputs.certificate:
        write_certificate_json(os.path.join(out_dir, "certificate.json"), cert)
    if not quiet:
        k_txt = _num(cert.K) if cert.holds else "none"
        print(
            f"certify {scenario.name}: holds={'true' if cert.holds else 'false'} "
            f"K={k_txt} lhs={_num(cert.lhs)} rhs={_num(cert.rhs)}"
        )


def run_meanfield(scenario: Scenario, out_dir: str, quiet: bool) -> None:
    report = convergence_experiment(
        scenario.measure,
        scenario.config,
        scenario.experiment.n_list,
        scenario.experiment.checkpoints,
    )
    if scenario.outputs.report:
        write_jsonl(os.path.join(out_dir, "report.jsonl"), report.rows)
    if not quiet:
        print(
            f"meanfield {scenario.name}: runs={len(report.n_list)} "
            f"w1_nonincreasing={'true' if report.w1_nonincreasing else 'false'} "
            f"diameter_within_bound={'true' if report.diameter_within_bound else 'false'}"
        )


def _apply_sweep_value(scenario: Scenario, param: str, value):
    config = scenario.config
    if param == "tau_bar":
        config = dataclasses.replace(
            config, delay=DelayProfile(family="constant", tau_bar=float(value))
        )
    elif param == "dt":
        config = dataclasses.replace(config, dt=float(value))
    elif param == "exponent":
        config = dataclasses.replace(
            config,
            kernel=InfluenceKernel(family="power_law", exponent=float(value)),
        )
    else:
        config = dataclasses.replace(config, n_agents=int(value))
    if scenario.measure is not None:
        initial = sample_particles(scenario.measure, config.n_agents)
    else:
        initial = scenario.initial
    return config, initial


def run_sweep(scenario: Scenario, out_dir: str, quiet: bool) -> None:
    param = scenario.experiment.param
    values = scenario.experiment.values

    def one(value):
        try:
            config, initial = _apply_sweep_value(scenario, param, value)
            trajectory = simulate(config, initial)
            cert = certify(config.kernel, config.delay, config.weight, trajectory.radius)
            series = diagnostics_series(
                trajectory, cert.beta_chosen if cert.holds else 0.0
            )
            window = scenario.experiment.fit_window or (config.t_end / 2.0, config.t_end)
            fit = fit_decay_rate(series, window)
            return {
                "value": value,
                "holds": cert.holds,
                "K": cert.K if cert.holds else None,
                "fitted_rate": None if fit.degenerate else fit.rate,
                "final_d_X": float(series.d_x[-1]),
            }
        except (ValidationError, NumericFailure) as exc:
            return {"value": value, "error": str(exc)}

    env_workers = os.environ.get("HKDELAY_SWEEP_WORKERS", "").strip()
    workers = int(env_workers) if env_workers else (os.cpu_count() or 1)
    workers = max(1, min(workers, len(values)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(one, values))
    if scenario.outputs.report:
        write_jsonl(os.path.join(out_dir, "report.jsonl"), rows)
    if not quiet:
        n_hold = sum(1 for r in rows if r.get("holds"))
        n_err = sum(1 for r in rows if "error" in r)
        print(
            f"sweep {scenario.name}: param={param} values={len(values)} "
            f"holds_true={n_hold} errors={n_err}"
        )


_RUNNERS = {
    "simulate": run_simulate,
    "certify": run_certify,
    "meanfield": run_meanfield,
    "sweep": run_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        if args.seed is not None:
            scenario = with_seed(scenario, args.seed)
        # certify is a sub-computation of every experiment; others must match
        if args.command != "certify":
            _require_kind(scenario, args.command)
        os.makedirs(args.out_dir, exist_ok=True)
        _RUNNERS[args.command](scenario, args.out_dir, args.quiet)
    except ValidationError as exc:
        for line in exc.violations:
            print(f"error: {line}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"numeric failure: {exc} {exc.payload!r}", file=sys.stderr)
        return 3
    return 0


def main_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
