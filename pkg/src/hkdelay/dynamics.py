"""Delayed-interaction dynamics and the fixed-step method-of-steps integrator.

Each agent is pulled toward the others' past positions, averaged over the
look-back window [t - tau(t), t] with memory weight alpha and communication
weights built from the influence kernel psi, under either the symmetric or
the normalized weighting scheme.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import rhs_accumulate
from .errors import (
    AccuracyError,
    CoverageError,
    InternalInconsistency,
    NumericFailure,
    ValidationError,
)
from .history import HistoryBuffer, InitialHistory
from .kernels import DelayProfile, InfluenceKernel, MemoryWeight, a_bar, h_of_t, psi_eval

SCHEMES = ("symmetric", "normalized")

# online ball-bound tolerance; violations signal a step size too large
BOUND_SLACK = 1e-8


@dataclass(frozen=True)
class ModelConfig:
    """Full parameter set of one N-agent run."""

    n_agents: int
    dimension: int
    kernel: InfluenceKernel
    delay: DelayProfile
    weight: MemoryWeight
    dt: float
    t_end: float
    scheme: str = "symmetric"
    quadrature_nodes: int = 32

    def __post_init__(self):
        problems = self.validate()
        if problems:
            raise ValidationError(problems)

    def validate(self) -> list:
        out = []
        if not isinstance(self.kernel, InfluenceKernel):
            out.append("model.kernel: expected an InfluenceKernel")
        if not isinstance(self.delay, DelayProfile):
            out.append("model.delay: expected a DelayProfile")
        if not isinstance(self.weight, MemoryWeight):
            out.append("model.weight: expected a MemoryWeight")
        if out:
            return out
        if int(self.n_agents) < 2:
            out.append("model.n_agents: must be >= 2")
        if int(self.dimension) < 1:
            out.append("model.dimension: must be >= 1")
        if self.scheme not in SCHEMES:
            out.append(
                f"model.scheme: unknown scheme {self.scheme!r}, expected one of {SCHEMES}"
            )
        if not (math.isfinite(self.dt) and self.dt > 0):
            out.append("model.dt: must be finite and > 0")
        else:
            limit = self.delay.tau_star / 20.0
            if self.dt > limit * (1.0 + 1e-12):
                out.append(
                    f"model.dt: must satisfy dt <= tau_star/20 = {limit:.6g} "
                    f"(got {self.dt:g})"
                )
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            out.append("model.t_end: must be finite and > 0")
        if int(self.quadrature_nodes) < 2:
            out.append("model.quadrature_nodes: need at least 2 trapezoid nodes")
        out.extend(self.weight.validate_on_window(self.delay.tau_zero))
        if not out and a_bar(self.weight, self.delay) <= 0.0:
            out.append(
                "weight: integral of alpha over [0, tau_star] must be positive"
            )
        return out


def comm_weight(scheme, kernel, x_j_at_s, x_i_at_t, all_x_at_s=None) -> float:
    """Communication weight a_ij(t;s) for one agent pair.

    symmetric:  psi(|x_j(s) - x_i(t)|)
    normalized: N psi(|x_j(s) - x_i(t)|) / sum_k psi(|x_k(s) - x_i(t)|),
                the denominator running over all k including k = i.
    """
    if scheme not in SCHEMES:
        raise ValidationError(
            f"scheme: unknown scheme {scheme!r}, expected one of {SCHEMES}"
        )
    xj = np.asarray(x_j_at_s, dtype=float).ravel()
    xi = np.asarray(x_i_at_t, dtype=float).ravel()
    base = psi_eval(kernel, float(np.linalg.norm(xj - xi)))
    if scheme == "symmetric":
        return float(base)
    if all_x_at_s is None:
        raise ValidationError(
            "comm_weight: the normalized scheme needs all_x_at_s (states of every "
            "agent at the delayed time)"
        )
    pts = np.asarray(all_x_at_s, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    dists = np.sqrt(((pts - xi[None, :]) ** 2).sum(axis=1))
    denom = float(np.sum(psi_eval(kernel, dists)))
    return float(pts.shape[0] * base / denom)


def _window_nodes(config: ModelConfig, t: float):
    """Uniform trapezoid nodes over [t - tau(t), t] and their alpha-weights."""
    tau_t = float(config.delay.tau(t))
    m = int(config.quadrature_nodes)
    nodes = np.linspace(t - tau_t, t, m)
    spacing = tau_t / (m - 1)
    trap = np.full(m, spacing)
    trap[0] = trap[-1] = 0.5 * spacing
    node_w = trap * config.weight.alpha(t - nodes)
    return nodes, node_w


def _check_window_coverage(times: np.ndarray, nodes: np.ndarray) -> None:
    t0, t1 = float(times[0]), float(times[-1])
    tol = 1e-9 * max(1.0, abs(t0), abs(t1))
    if nodes[0] < t0 - tol or nodes[-1] > t1 + tol:
        raise CoverageError(
            f"history covers [{t0!r}, {t1!r}] but the delay window needs "
            f"[{float(nodes[0])!r}, {float(nodes[-1])!r}]"
        )


def _rhs_eval(t: float, x: np.ndarray, times: np.ndarray, states: np.ndarray, config: ModelConfig):
    """Velocity plus (a_min, a_max, rowsum_max) accumulated over the nodes."""
    nodes, node_w = _window_nodes(config, t)
    _check_window_coverage(times, nodes)
    h_t = h_of_t(config.weight, config.delay, t)
    inv_nh = 1.0 / (config.n_agents * h_t)
    out = np.empty_like(x)
    a_min, a_max, rs_max = rhs_accumulate(
        times,
        states,
        x,
        out,
        nodes,
        node_w,
        inv_nh,
        config.kernel.family_id,
        config.kernel.family_param,
        config.scheme == "normalized",
    )
    return out, a_min, a_max, rs_max


def _extended(times: np.ndarray, states: np.ndarray, t_c: float, x_c: np.ndarray, max_gap: float):
    """Virtually append (t_c, x_c) so stage lookups past the last stamp resolve.

    Interpolation then uses the stage's own linear predictor on (last, t_c].
    Gaps wider than one step are coverage bugs, not bridgeable.
    """
    last = float(times[-1])
    gap = t_c - last
    tol = 1e-9 * max(1.0, abs(last), abs(t_c))
    if gap <= tol:
        return times, states
    if gap > max_gap * (1.0 + 1e-9):
        raise CoverageError(
            f"history ends at t={last!r}; cannot bridge to t={t_c!r} "
            f"(gap {gap:g} exceeds one step {max_gap:g})"
        )
    ext_times = np.append(times, t_c)
    ext_states = np.concatenate([states, np.asarray(x_c)[None, :, :]])
    return ext_times, ext_states


def rhs(t, x, history: HistoryBuffer, config: ModelConfig) -> np.ndarray:
    """Velocity field at (t, x) given recorded history.

    For each agent i:
        (1/(N h(t))) sum_{j != i} integral over [t - tau(t), t] of
        alpha(t - s) a_ij(t;s) (x_j(s) - x_i(t)) ds,
    the s-integral by composite trapezoid on quadrature_nodes uniform nodes.
    """
    x = np.ascontiguousarray(np.asarray(x, dtype=float))
    if x.shape != (config.n_agents, config.dimension):
        raise ValidationError(
            f"rhs: state shape {x.shape} != {(config.n_agents, config.dimension)}"
        )
    times, states = _extended(history.times, history.states, float(t), x, config.dt)
    vel, _, _, _ = _rhs_eval(float(t), x, times, states, config)
    return vel


def _speed_max(vel: np.ndarray) -> float:
    return float(np.sqrt((vel * vel).sum(axis=1)).max())


def _step_full(t: float, x: np.ndarray, history: HistoryBuffer, config: ModelConfig, dt: float, k1: np.ndarray):
    """One RK4 step of size dt from (t, x); k1 = rhs(t, x) supplied by caller.

    Returns (x_next, vel_next, (a_min, a_max, rowsum_max)). vel_next is the
    velocity at t + dt evaluated on the completed state, which doubles as the
    next step's k1: the virtual extension used here matches the buffer after
    the (t + dt) stamp is appended, so the reuse is exact.
    """
    if not dt < config.delay.tau_star:
        raise InternalInconsistency(
            f"step size {dt:g} >= tau_star {config.delay.tau_star:g}; "
            "stage lookups would leave the recorded window"
        )
    times = history.times
    states = history.states
    half = 0.5 * dt

    y2 = x + half * k1
    et, es = _extended(times, states, t + half, y2, dt)
    k2, lo2, hi2, rs2 = _rhs_eval(t + half, y2, et, es, config)

    y3 = x + half * k2
    et, es = _extended(times, states, t + half, y3, dt)
    k3, lo3, hi3, rs3 = _rhs_eval(t + half, y3, et, es, config)

    y4 = x + dt * k3
    et, es = _extended(times, states, t + dt, y4, dt)
    k4, lo4, hi4, rs4 = _rhs_eval(t + dt, y4, et, es, config)

    x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    et, es = _extended(times, states, t + dt, x_next, dt)
    vel_next, lo5, hi5, rs5 = _rhs_eval(t + dt, x_next, et, es, config)

    diag = (
        min(lo2, lo3, lo4, lo5),
        max(hi2, hi3, hi4, hi5),
        max(rs2, rs3, rs4, rs5),
    )
    return x_next, vel_next, diag


def step(t, x, history: HistoryBuffer, config: ModelConfig):
    """Single public RK4 step: returns (x_next, speed_max at t + dt)."""
    x = np.ascontiguousarray(np.asarray(x, dtype=float))
    t = float(t)
    times, states = _extended(history.times, history.states, t, x, config.dt)
    k1, _, _, _ = _rhs_eval(t, x, times, states, config)
    x_next, vel_next, _ = _step_full(t, x, history, config, float(config.dt), k1)
    return x_next, _speed_max(vel_next)


def _time_grid(dt: float, t_end: float) -> np.ndarray:
    """Step targets 0 < t_1 < ... <= t_end; last step may be partial."""
    n = int(round(t_end / dt))
    if n >= 1 and abs(n * dt - t_end) <= 1e-9 * max(1.0, abs(t_end)):
        return dt * np.arange(1, n + 1)
    n = int(math.floor(t_end / dt + 1e-12))
    ts = dt * np.arange(1, n + 1)
    ts = ts[ts < t_end * (1.0 - 1e-12)]
    return np.append(ts, t_end)


@dataclass(frozen=True)
class Trajectory:
    """Recorded run: seeded pre-history stamps plus every accepted step."""

    times: np.ndarray
    states: np.ndarray
    speeds: np.ndarray
    pre_times: np.ndarray
    pre_states: np.ndarray
    pre_speeds: np.ndarray
    config: ModelConfig
    radius: float
    comm_min: float
    comm_max: float
    rowsum_max: float

    @property
    def n_agents(self) -> int:
        return int(self.states.shape[1])

    @property
    def dimension(self) -> int:
        return int(self.states.shape[2])

    @property
    def full_times(self) -> np.ndarray:
        return np.concatenate([self.pre_times, self.times])

    @property
    def full_speeds(self) -> np.ndarray:
        return np.concatenate([self.pre_speeds, self.speeds])

    def index_at(self, t: float) -> int:
        """Index of the recorded timestamp nearest t (within half a step)."""
        t = float(t)
        k = int(np.searchsorted(self.times, t))
        best = None
        for j in (k - 1, k):
            if 0 <= j < self.times.shape[0]:
                if best is None or abs(self.times[j] - t) < abs(self.times[best] - t):
                    best = j
        if best is None or abs(self.times[best] - t) > 0.5 * self.config.dt + 1e-9:
            raise ValidationError(
                f"trajectory: no recorded timestamp within half a step of t={t!r}"
            )
        return best

    def state_at(self, t: float) -> np.ndarray:
        return self.states[self.index_at(t)]


def simulate(config: ModelConfig, initial: InitialHistory) -> Trajectory:
    """Integrate from the prescribed start-up window to t_end.

    Seeds the history buffer on a grid with spacing <= dt, then advances with
    RK4, recording every accepted step. The uniform ball bound
    max_i |x_i(t)| <= R + 1e-8 (R the radius of the initial data) is checked
    online; a violation raises AccuracyError since it signals a step size too
    large rather than model behavior.
    """
    problems = config.validate()
    tau0 = config.delay.tau_zero
    problems.extend(initial.validate(tau0))
    if not problems:
        if initial.n_agents != config.n_agents:
            problems.append(
                f"initial: has {initial.n_agents} agents, model expects {config.n_agents}"
            )
        if initial.dimension != config.dimension:
            problems.append(
                f"initial: dimension {initial.dimension}, model expects {config.dimension}"
            )
    if problems:
        raise ValidationError(problems)

    radius = initial.radius()
    buf = HistoryBuffer.seed(initial, tau0, config.dt, keep_span=tau0 + 2.0 * config.dt)
    pre_times = buf.times.copy()
    pre_states = buf.states.copy()
    pre_speeds = buf.speeds.copy()

    x = np.ascontiguousarray(initial.state_at(0.0))
    times_ext, states_ext = _extended(buf.times, buf.states, 0.0, x, config.dt)
    k1, a_min, a_max, rs_max = _rhs_eval(0.0, x, times_ext, states_ext, config)
    buf.append(0.0, x, _speed_max(k1))

    grid = _time_grid(config.dt, config.t_end)
    n_rec = grid.shape[0] + 1
    rec_times = np.empty(n_rec)
    rec_states = np.empty((n_rec, config.n_agents, config.dimension))
    rec_speeds = np.empty(n_rec)
    rec_times[0] = 0.0
    rec_states[0] = x
    rec_speeds[0] = _speed_max(k1)

    t_prev = 0.0
    for idx, t_k in enumerate(grid, start=1):
        dt_k = float(t_k - t_prev)
        x_next, vel_next, diag = _step_full(t_prev, x, buf, config, dt_k, k1)
        if not (np.isfinite(x_next).all() and np.isfinite(vel_next).all()):
            raise NumericFailure(
                "integration produced non-finite values",
                payload={"t": float(t_k), "dt": dt_k},
            )
        max_norm = float(np.sqrt((x_next * x_next).sum(axis=1)).max())
        if max_norm > radius + BOUND_SLACK:
            raise AccuracyError(
                "uniform ball bound violated; the step size is too large",
                payload={
                    "t": float(t_k),
                    "max_norm": max_norm,
                    "radius": radius,
                    "excess": max_norm - radius,
                },
            )
        a_min = min(a_min, diag[0])
        a_max = max(a_max, diag[1])
        rs_max = max(rs_max, diag[2])
        speed = _speed_max(vel_next)
        buf.append(float(t_k), x_next, speed)
        rec_times[idx] = t_k
        rec_states[idx] = x_next
        rec_speeds[idx] = speed
        x = x_next
        k1 = vel_next
        t_prev = float(t_k)

    return Trajectory(
        times=rec_times,
        states=rec_states,
        speeds=rec_speeds,
        pre_times=pre_times,
        pre_states=pre_states,
        pre_speeds=pre_speeds,
        config=config,
        radius=radius,
        comm_min=a_min,
        comm_max=a_max,
        rowsum_max=rs_max,
    )
