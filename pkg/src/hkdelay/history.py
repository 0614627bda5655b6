"""Initial data and the sliding interpolation buffer used by the integrator."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, OrderingError, ValidationError

INITIAL_KINDS = ("constant_per_agent", "sampled_path")


def _as_state_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return np.ascontiguousarray(arr)


@dataclass(frozen=True)
class InitialHistory:
    """Opinion paths prescribed on the start-up window [-tau(0), 0].

    constant_per_agent holds each agent at a fixed position for the whole
    window; sampled_path carries an explicit piecewise-linear path per agent.
    """

    kind: str
    positions: np.ndarray = None
    times: np.ndarray = None
    states: np.ndarray = None

    @classmethod
    def constant(cls, positions) -> "InitialHistory":
        return cls(kind="constant_per_agent", positions=_as_state_array(positions))

    @classmethod
    def path(cls, times, states) -> "InitialHistory":
        t = np.ascontiguousarray(np.asarray(times, dtype=float))
        x = np.asarray(states, dtype=float)
        if x.ndim == 2:
            x = x[:, :, None]
        return cls(kind="sampled_path", times=t, states=np.ascontiguousarray(x))

    @property
    def n_agents(self) -> int:
        if self.kind == "constant_per_agent":
            return int(self.positions.shape[0])
        return int(self.states.shape[1])

    @property
    def dimension(self) -> int:
        if self.kind == "constant_per_agent":
            return int(self.positions.shape[1])
        return int(self.states.shape[2])

    def validate(self, tau_zero: float) -> list:
        out = []
        if self.kind not in INITIAL_KINDS:
            out.append(
                f"initial.kind: unknown kind {self.kind!r}, expected one of {INITIAL_KINDS}"
            )
            return out
        if self.kind == "constant_per_agent":
            if self.positions is None or self.positions.ndim != 2:
                out.append("initial.positions: need an (agents, dimension) array")
            elif not np.isfinite(self.positions).all():
                out.append("initial.positions: must be finite")
            return out
        if self.times is None or self.states is None:
            out.append("initial: sampled_path needs both times and states")
            return out
        if self.times.ndim != 1 or self.times.shape[0] < 2:
            out.append("initial.times: need at least two ascending stamps")
            return out
        if not (np.diff(self.times) > 0).all():
            out.append("initial.times: must be strictly ascending")
        if self.times[0] > -tau_zero + 1e-12:
            out.append(
                f"initial.times: path must start at or before -tau(0) = {-tau_zero:g}"
            )
        if abs(self.times[-1]) > 1e-12:
            out.append("initial.times: path must end exactly at t = 0")
        if self.states.ndim != 3 or self.states.shape[0] != self.times.shape[0]:
            out.append("initial.states: need a (stamps, agents, dimension) array")
        elif not np.isfinite(self.states).all():
            out.append("initial.states: must be finite")
        return out

    def state_at(self, s: float) -> np.ndarray:
        """Positions at window time s (linear interpolation for paths)."""
        if self.kind == "constant_per_agent":
            return self.positions.copy()
        s = float(s)
        t = self.times
        tol = 1e-9 * max(1.0, abs(t[0]))
        if s < t[0] - tol or s > t[-1] + tol:
            raise CoverageError(f"initial history does not cover s={s!r}")
        k = int(np.searchsorted(t, s, side="right")) - 1
        k = min(max(k, 0), t.shape[0] - 2)
        th = (s - t[k]) / (t[k + 1] - t[k])
        th = min(max(th, 0.0), 1.0)
        return (1.0 - th) * self.states[k] + th * self.states[k + 1]

    def radius(self) -> float:
        """Sup of agent norms over the window.

        Paths are piecewise linear, so the norm is convex on each segment and
        the supremum is attained at a path node.
        """
        if self.kind == "constant_per_agent":
            pts = self.positions
        else:
            pts = self.states.reshape(-1, self.states.shape[2])
        return float(np.sqrt((pts * pts).sum(axis=1)).max())


class HistoryBuffer:
    """Sliding window of (t, state, max speed) stamps with linear interpolation.

    Appends must advance time; lookups outside the covered interval raise
    instead of extrapolating. Stamps falling more than keep_span behind the
    newest one are pruned automatically.
    """

    def __init__(self, n_agents: int, dimension: int, keep_span: float, capacity: int = 256):
        if n_agents < 1 or dimension < 1:
            raise ValidationError("history: n_agents and dimension must be >= 1")
        if not keep_span > 0:
            raise ValidationError("history: keep_span must be > 0")
        self.n_agents = int(n_agents)
        self.dimension = int(dimension)
        self.keep_span = float(keep_span)
        self._times = np.empty(capacity)
        self._states = np.empty((capacity, self.n_agents, self.dimension))
        self._speeds = np.empty(capacity)
        self._lo = 0
        self._hi = 0

    def __len__(self) -> int:
        return self._hi - self._lo

    @property
    def times(self) -> np.ndarray:
        return self._times[self._lo : self._hi]

    @property
    def states(self) -> np.ndarray:
        return self._states[self._lo : self._hi]

    @property
    def speeds(self) -> np.ndarray:
        return self._speeds[self._lo : self._hi]

    def coverage(self):
        """(oldest, newest) covered times."""
        if len(self) == 0:
            raise CoverageError("history: buffer is empty")
        return float(self._times[self._lo]), float(self._times[self._hi - 1])

    def append(self, t: float, state, speed_max: float) -> None:
        state = np.asarray(state, dtype=float)
        if state.shape != (self.n_agents, self.dimension):
            raise ValidationError(
                f"history.append: state shape {state.shape} != "
                f"{(self.n_agents, self.dimension)}"
            )
        t = float(t)
        if len(self) and t <= self._times[self._hi - 1]:
            raise OrderingError(
                f"history.append: t={t!r} does not advance past "
                f"{float(self._times[self._hi - 1])!r}"
            )
        if self._hi == self._times.shape[0]:
            self._compact_or_grow()
        self._times[self._hi] = t
        self._states[self._hi] = state
        self._speeds[self._hi] = float(speed_max)
        self._hi += 1
        cutoff = t - self.keep_span
        # keep at least one full segment alive
        while self._lo < self._hi - 2 and self._times[self._lo] < cutoff:
            self._lo += 1

    def _compact_or_grow(self) -> None:
        n = len(self)
        if self._lo > 0:
            self._times[:n] = self._times[self._lo : self._hi]
            self._states[:n] = self._states[self._lo : self._hi]
            self._speeds[:n] = self._speeds[self._lo : self._hi]
            self._lo, self._hi = 0, n
        if self._hi == self._times.shape[0]:
            cap = 2 * self._times.shape[0]
            times = np.empty(cap)
            states = np.empty((cap, self.n_agents, self.dimension))
            speeds = np.empty(cap)
            times[:n] = self._times[:n]
            states[:n] = self._states[:n]
            speeds[:n] = self._speeds[:n]
            self._times, self._states, self._speeds = times, states, speeds

    def sample(self, s: float) -> np.ndarray:
        """State at time s by linear interpolation; never extrapolates."""
        t0, t1 = self.coverage()
        s = float(s)
        tol = 1e-9 * max(1.0, abs(t0), abs(t1))
        if s < t0 - tol or s > t1 + tol:
            raise CoverageError(
                f"history.sample: s={s!r} outside covered [{t0!r}, {t1!r}]"
            )
        if len(self) == 1:
            return self._states[self._lo].copy()
        times = self.times
        k = int(np.searchsorted(times, s, side="right")) - 1
        k = min(max(k, 0), len(times) - 2)
        th = (s - times[k]) / (times[k + 1] - times[k])
        th = min(max(th, 0.0), 1.0)
        return (1.0 - th) * self._states[self._lo + k] + th * self._states[
            self._lo + k + 1
        ]

    @classmethod
    def seed(
        cls, initial: InitialHistory, tau_zero: float, dt: float, keep_span: float
    ) -> "HistoryBuffer":
        """Materialize the start-up window on a grid with spacing <= dt.

        Stamps cover [-tau(0), 0); the caller appends the t = 0 stamp once
        the model velocity there is known. Per-stamp speeds come from the
        path's segment slopes (zero for constant histories).
        """
        n = max(int(math.ceil(tau_zero / dt - 1e-12)), 2)
        grid = np.linspace(-tau_zero, 0.0, n + 1)
        states = np.stack([initial.state_at(s) for s in grid])
        slopes = np.diff(states, axis=0) / np.diff(grid)[:, None, None]
        seg_speed = np.sqrt((slopes * slopes).sum(axis=2)).max(axis=1)
        buf = cls(initial.n_agents, initial.dimension, keep_span)
        for k in range(n):
            spd = seg_speed[k] if k == 0 else max(seg_speed[k - 1], seg_speed[k])
            buf.append(grid[k], states[k], spd)
        return buf

    def dump_csv(self, path) -> None:
        """One row per agent per stored stamp: t, agent, x_1..x_d, speed_max."""
        from .io import format_float

        cols = ",".join(f"x_{c + 1}" for c in range(self.dimension))
        with open(path, "w", newline="") as fh:
            fh.write(f"t,agent,{cols},speed_max\n")
            for k in range(len(self)):
                t = format_float(self._times[self._lo + k])
                spd = format_float(self._speeds[self._lo + k])
                for a in range(self.n_agents):
                    xs = ",".join(
                        format_float(v) for v in self._states[self._lo + k, a]
                    )
                    fh.write(f"{t},{a},{xs},{spd}\n")
