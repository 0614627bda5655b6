"""Deterministic text artifacts: CSV series, JSON objects, JSONL reports.

All floating-point output goes through one 17-significant-digit formatter so
repeated runs are byte-identical and values round-trip exactly.
"""
from __future__ import annotations

import math


def format_float(x) -> str:
    return "%.17g" % float(x)


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return '"nan"'
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return format_float(v)
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(item) for item in v) + "]"
    if isinstance(v, dict):
        return dumps_json(v)
    try:
        return format_float(float(v))
    except (TypeError, ValueError):
        raise TypeError(f"cannot serialize {type(v).__name__} to JSON")


def dumps_json(obj: dict) -> str:
    """Serialize a dict preserving insertion order, floats at 17 digits."""
    parts = [f'"{key}": {_json_value(value)}' for key, value in obj.items()]
    return "{" + ", ".join(parts) + "}"


def write_json(path, obj: dict) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(dumps_json(obj))
        fh.write("\n")


def write_jsonl(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        for row in rows:
            fh.write(dumps_json(row))
            fh.write("\n")


def write_trajectory_csv(path, trajectory) -> None:
    """Rows `t, agent, x_1..x_d, speed_max` for every recorded t >= 0 stamp."""
    d = trajectory.dimension
    cols = ",".join(f"x_{c + 1}" for c in range(d))
    with open(path, "w", newline="") as fh:
        fh.write(f"t,agent,{cols},speed_max\n")
        for k in range(trajectory.times.shape[0]):
            t_txt = format_float(trajectory.times[k])
            s_txt = format_float(trajectory.speeds[k])
            for a in range(trajectory.n_agents):
                xs = ",".join(format_float(v) for v in trajectory.states[k, a])
                fh.write(f"{t_txt},{a},{xs},{s_txt}\n")


def write_diagnostics_csv(path, series) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,d_X,gamma,lyapunov,speed_max\n")
        for k in range(series.times.shape[0]):
            fh.write(
                ",".join(
                    (
                        format_float(series.times[k]),
                        format_float(series.d_x[k]),
                        format_float(series.gamma[k]),
                        format_float(series.lyapunov[k]),
                        format_float(series.speed_max[k]),
                    )
                )
            )
            fh.write("\n")


def write_certificate_json(path, certificate) -> None:
    write_json(path, certificate.as_dict())
