"""Scenario files: a versioned TOML schema describing one experiment.

Loading is fail-fast and exhaustive: every violation across every section is
collected and reported at once, before any computation starts.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .dynamics import ModelConfig
from .errors import ValidationError
from .history import InitialHistory
from .kernels import DelayProfile, InfluenceKernel, MemoryWeight
from .meanfield import InitialMeasureSpec, sample_particles

SCHEMA_VERSION = 1
EXPERIMENT_KINDS = ("simulate", "certify", "meanfield", "sweep")
SWEEP_PARAMS = ("tau_bar", "dt", "n_agents", "exponent")
INITIAL_KINDS = ("constant_per_agent", "sampled_path", "measure")

_TOP_KEYS = {
    "schema_version",
    "name",
    "model",
    "kernel",
    "delay",
    "weight",
    "initial",
    "experiment",
    "outputs",
}
_SECTION_KEYS = {
    "model": {"n_agents", "dimension", "scheme", "dt", "t_end", "quadrature_nodes"},
    "kernel": {"family", "exponent", "rate"},
    "delay": {"family", "tau_bar", "tau0", "tau_inf", "slope"},
    "weight": {"family", "value", "rate", "coefficients"},
    "initial": {
        "kind",
        "positions",
        "times",
        "states",
        "family",
        "a",
        "b",
        "mean",
        "sd",
        "radius",
        "c1",
        "c2",
        "spread",
        "points",
        "sampling",
        "seed",
        "constant_in_s",
    },
    "experiment": {
        "kind",
        "fit_window",
        "beta",
        "n_list",
        "checkpoints",
        "param",
        "values",
    },
    "outputs": {"trajectory", "diagnostics", "certificate", "report"},
}


@dataclass(frozen=True)
class Experiment:
    kind: str
    fit_window: tuple = None
    beta: float = None
    n_list: tuple = ()
    checkpoints: tuple = ()
    param: str = None
    values: tuple = ()


@dataclass(frozen=True)
class Outputs:
    trajectory: bool = True
    diagnostics: bool = True
    certificate: bool = True
    report: bool = True


@dataclass(frozen=True)
class Scenario:
    name: str
    schema_version: int
    config: ModelConfig
    initial_kind: str
    initial: InitialHistory
    measure: InitialMeasureSpec
    experiment: Experiment
    outputs: Outputs


def _check_unknown(section: str, data: dict, problems: list) -> None:
    for key in data:
        if key not in _SECTION_KEYS[section]:
            problems.append(f"{section}.{key}: unknown key")


def _get_number(section: dict, name: str, label: str, problems: list, required=True):
    if name not in section:
        if required:
            problems.append(f"{label}: required")
        return None
    value = section[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{label}: expected a number")
        return None
    return float(value)


def _get_int(section: dict, name: str, label: str, problems: list, required=True, default=None):
    if name not in section:
        if required:
            problems.append(f"{label}: required")
        return default
    value = section[name]
    if isinstance(value, bool) or not isinstance(value, int):
        problems.append(f"{label}: expected an integer")
        return default
    return int(value)


def _build_kernel(data: dict, problems: list):
    sec = data.get("kernel")
    if not isinstance(sec, dict):
        problems.append("kernel: section required")
        return None
    _check_unknown("kernel", sec, problems)
    if "family" not in sec:
        problems.append("kernel.family: required")
        return None
    kwargs = {"family": sec["family"]}
    for name in ("exponent", "rate"):
        if name in sec:
            v = _get_number(sec, name, f"kernel.{name}", problems)
            if v is None:
                return None
            kwargs[name] = v
    try:
        return InfluenceKernel(**kwargs)
    except ValidationError as exc:
        problems.extend(exc.violations)
        return None


def _build_delay(data: dict, problems: list):
    sec = data.get("delay")
    if not isinstance(sec, dict):
        problems.append("delay: section required")
        return None
    _check_unknown("delay", sec, problems)
    if "family" not in sec:
        problems.append("delay.family: required")
        return None
    kwargs = {"family": sec["family"]}
    for name in ("tau_bar", "tau0", "tau_inf", "slope"):
        if name in sec:
            v = _get_number(sec, name, f"delay.{name}", problems)
            if v is None:
                return None
            kwargs[name] = v
    try:
        return DelayProfile(**kwargs)
    except ValidationError as exc:
        problems.extend(exc.violations)
        return None


def _build_weight(data: dict, problems: list):
    sec = data.get("weight")
    if not isinstance(sec, dict):
        problems.append("weight: section required")
        return None
    _check_unknown("weight", sec, problems)
    if "family" not in sec:
        problems.append("weight.family: required")
        return None
    kwargs = {"family": sec["family"]}
    for name in ("value", "rate"):
        if name in sec:
            v = _get_number(sec, name, f"weight.{name}", problems)
            if v is None:
                return None
            kwargs[name] = v
    if "coefficients" in sec:
        coeffs = sec["coefficients"]
        if not isinstance(coeffs, list) or not all(
            isinstance(c, (int, float)) and not isinstance(c, bool) for c in coeffs
        ):
            problems.append("weight.coefficients: expected a list of numbers")
            return None
        kwargs["coefficients"] = tuple(float(c) for c in coeffs)
    try:
        return MemoryWeight(**kwargs)
    except ValidationError as exc:
        problems.extend(exc.violations)
        return None


def _build_config(data: dict, kernel, delay, weight, problems: list):
    sec = data.get("model")
    if not isinstance(sec, dict):
        problems.append("model: section required")
        return None
    _check_unknown("model", sec, problems)
    n_agents = _get_int(sec, "n_agents", "model.n_agents", problems)
    dimension = _get_int(sec, "dimension", "model.dimension", problems)
    dt = _get_number(sec, "dt", "model.dt", problems)
    t_end = _get_number(sec, "t_end", "model.t_end", problems)
    nodes = _get_int(
        sec, "quadrature_nodes", "model.quadrature_nodes", problems,
        required=False, default=32,
    )
    scheme = sec.get("scheme", "symmetric")
    if None in (n_agents, dimension, dt, t_end, nodes):
        return None
    if kernel is None or delay is None or weight is None:
        return None
    try:
        return ModelConfig(
            n_agents=n_agents,
            dimension=dimension,
            kernel=kernel,
            delay=delay,
            weight=weight,
            dt=dt,
            t_end=t_end,
            scheme=scheme,
            quadrature_nodes=nodes,
        )
    except ValidationError as exc:
        problems.extend(exc.violations)
        return None


def _build_initial(data: dict, config, delay, dimension, problems: list):
    """Returns (kind, InitialHistory or None, InitialMeasureSpec or None)."""
    sec = data.get("initial")
    if not isinstance(sec, dict):
        problems.append("initial: section required")
        return None, None, None
    _check_unknown("initial", sec, problems)
    kind = sec.get("kind")
    if kind not in INITIAL_KINDS:
        problems.append(
            f"initial.kind: unknown kind {kind!r}, expected one of {INITIAL_KINDS}"
        )
        return None, None, None

    if kind == "constant_per_agent":
        if "positions" not in sec:
            problems.append("initial.positions: required")
            return kind, None, None
        try:
            hist = InitialHistory.constant(sec["positions"])
        except (TypeError, ValueError):
            problems.append("initial.positions: expected an array of agent positions")
            return kind, None, None
    elif kind == "sampled_path":
        if "times" not in sec or "states" not in sec:
            problems.append("initial: sampled_path needs both times and states")
            return kind, None, None
        try:
            hist = InitialHistory.path(sec["times"], sec["states"])
        except (TypeError, ValueError):
            problems.append("initial: times/states must be numeric arrays")
            return kind, None, None
    else:
        kwargs = {"family": sec.get("family")}
        if kwargs["family"] is None:
            problems.append("initial.family: required for measure initial data")
            return kind, None, None
        if dimension is not None:
            kwargs["dimension"] = dimension
        for name in ("a", "b", "mean", "sd", "radius", "c1", "c2", "spread"):
            if name in sec:
                v = _get_number(sec, name, f"initial.{name}", problems)
                if v is None:
                    return kind, None, None
                kwargs[name] = v
        if "points" in sec:
            kwargs["points"] = tuple(
                tuple(p) if isinstance(p, list) else p for p in sec["points"]
            )
        if "sampling" in sec:
            kwargs["sampling"] = sec["sampling"]
        if "constant_in_s" in sec:
            kwargs["constant_in_s"] = bool(sec["constant_in_s"])
        if "seed" in sec:
            seed = _get_int(sec, "seed", "initial.seed", problems)
            if seed is None:
                return kind, None, None
            kwargs["seed"] = seed
        try:
            return kind, None, InitialMeasureSpec(**kwargs)
        except ValidationError as exc:
            problems.extend(
                v.replace("measure.", "initial.") for v in exc.violations
            )
            return kind, None, None

    if delay is not None:
        problems.extend(hist.validate(delay.tau_zero))
    if config is not None:
        if hist.n_agents != config.n_agents:
            problems.append(
                f"initial: has {hist.n_agents} agents, model expects {config.n_agents}"
            )
        if hist.dimension != config.dimension:
            problems.append(
                f"initial: dimension {hist.dimension}, model expects {config.dimension}"
            )
    return kind, hist, None


def _build_experiment(data: dict, config, kernel, delay, initial_kind, problems: list):
    sec = data.get("experiment")
    if not isinstance(sec, dict):
        problems.append("experiment: section required")
        return None
    _check_unknown("experiment", sec, problems)
    kind = sec.get("kind")
    if kind not in EXPERIMENT_KINDS:
        problems.append(
            f"experiment.kind: unknown kind {kind!r}, expected one of {EXPERIMENT_KINDS}"
        )
        return None

    fit_window = None
    if "fit_window" in sec:
        fw = sec["fit_window"]
        if (
            not isinstance(fw, list)
            or len(fw) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in fw)
            or not float(fw[0]) < float(fw[1])
        ):
            problems.append("experiment.fit_window: expected [t_lo, t_hi] with t_lo < t_hi")
        else:
            fit_window = (float(fw[0]), float(fw[1]))

    beta = None
    if "beta" in sec:
        beta = _get_number(sec, "beta", "experiment.beta", problems)
        if beta is not None and beta < 0:
            problems.append("experiment.beta: must be >= 0")

    n_list = ()
    checkpoints = ()
    if kind == "meanfield":
        if initial_kind is not None and initial_kind != "measure":
            problems.append(
                "experiment.kind: meanfield needs initial.kind = \"measure\""
            )
        raw = sec.get("n_list")
        if not isinstance(raw, list) or not raw or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in raw
        ):
            problems.append("experiment.n_list: expected a nonempty list of integers")
        else:
            n_list = tuple(int(v) for v in raw)
        raw = sec.get("checkpoints")
        if not isinstance(raw, list) or not raw or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
        ):
            problems.append("experiment.checkpoints: expected a nonempty list of times")
        else:
            checkpoints = tuple(float(v) for v in raw)

    param = None
    values = ()
    if kind == "sweep":
        param = sec.get("param")
        if param not in SWEEP_PARAMS:
            problems.append(
                f"experiment.param: unknown sweep parameter {param!r}, "
                f"expected one of {SWEEP_PARAMS}"
            )
        raw = sec.get("values")
        if not isinstance(raw, list) or not raw or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
        ):
            problems.append("experiment.values: must be a nonempty list of numbers")
        else:
            values = tuple(
                int(v) if param == "n_agents" else float(v) for v in raw
            )
        if param == "tau_bar" and delay is not None and delay.family != "constant":
            problems.append(
                "experiment.param: a tau_bar sweep needs the constant delay family"
            )
        if param == "exponent" and kernel is not None and kernel.family != "power_law":
            problems.append(
                "experiment.param: an exponent sweep needs the power_law kernel family"
            )
        if param == "n_agents" and initial_kind is not None and initial_kind != "measure":
            problems.append(
                "experiment.param: an n_agents sweep needs a measure initial so "
                "particles can be resampled per value"
            )

    return Experiment(
        kind=kind,
        fit_window=fit_window,
        beta=beta,
        n_list=n_list,
        checkpoints=checkpoints,
        param=param,
        values=values,
    )


def _build_outputs(data: dict, problems: list) -> Outputs:
    sec = data.get("outputs")
    if sec is None:
        return Outputs()
    if not isinstance(sec, dict):
        problems.append("outputs: expected a section of booleans")
        return Outputs()
    _check_unknown("outputs", sec, problems)
    kwargs = {}
    for name in ("trajectory", "diagnostics", "certificate", "report"):
        if name in sec:
            if not isinstance(sec[name], bool):
                problems.append(f"outputs.{name}: expected a boolean")
            else:
                kwargs[name] = sec[name]
    return Outputs(**kwargs)


def build_scenario(data: dict, name: str = "scenario") -> Scenario:
    """Assemble and validate a Scenario from parsed TOML data.

    Raises ValidationError carrying every violation found, not just the first.
    """
    if not isinstance(data, dict):
        raise ValidationError(["scenario: top level must be a table"])
    problems = []
    for key in data:
        if key not in _TOP_KEYS:
            problems.append(f"{key}: unknown top-level key")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        problems.append(
            f"schema_version: expected {SCHEMA_VERSION}, got {version!r}"
        )
    if "name" in data and isinstance(data["name"], str) and data["name"]:
        name = data["name"]

    kernel = _build_kernel(data, problems)
    delay = _build_delay(data, problems)
    weight = _build_weight(data, problems)
    config = _build_config(data, kernel, delay, weight, problems)
    model_sec = data.get("model") if isinstance(data.get("model"), dict) else {}
    dim_hint = model_sec.get("dimension") if isinstance(model_sec.get("dimension"), int) else None
    initial_kind, initial, measure = _build_initial(
        data, config, delay, dim_hint, problems
    )
    experiment = _build_experiment(data, config, kernel, delay, initial_kind, problems)

    outputs = _build_outputs(data, problems)
    if problems:
        raise ValidationError(problems)
    return Scenario(
        name=name,
        schema_version=SCHEMA_VERSION,
        config=config,
        initial_kind=initial_kind,
        initial=initial,
        measure=measure,
        experiment=experiment,
        outputs=outputs,
    )


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file; all violations reported at once."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError([f"scenario: TOML parse error: {exc}"]) from exc
    return build_scenario(data, name=Path(path).stem)


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    """Override the sampling seed (a no-op for explicit initial histories)."""
    if scenario.measure is None:
        return scenario
    return dataclasses.replace(
        scenario, measure=dataclasses.replace(scenario.measure, seed=int(seed))
    )


def initial_history_for(scenario: Scenario) -> InitialHistory:
    """The run's initial data, sampling the measure when one is configured."""
    if scenario.measure is not None:
        return sample_particles(scenario.measure, scenario.config.n_agents)
    return scenario.initial
