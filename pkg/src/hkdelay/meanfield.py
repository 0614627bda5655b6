"""Empirical-measure view of the dynamics and N-scaling experiments.

The opinion distribution is represented by equal-weight Dirac atoms carried
along the particle flow; no transport PDE is ever discretized on a grid. The
measure at time t is the push-forward of the initial measure along the
simulated characteristics, so simulating N particles IS solving the limit
equation at resolution 1/N.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist
from scipy.stats import truncnorm

from .diagnostics import certify, diameter
from .dynamics import ModelConfig, simulate
from .errors import NumericFailure, SizeError, ValidationError
from .history import InitialHistory

MEASURE_FAMILIES = (
    "uniform_interval",
    "gaussian_truncated",
    "two_clusters",
    "explicit_points",
)
SAMPLING_MODES = ("quantile", "iid")

ASSIGNMENT_CAP = 512


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Equal-weight atoms (weight 1/M each) at the given points."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValidationError("measure: need a nonempty (atoms, dimension) array")
        if not np.isfinite(pts).all():
            raise ValidationError("measure: atom coordinates must be finite")
        object.__setattr__(self, "points", np.ascontiguousarray(pts))

    @property
    def n_atoms(self) -> int:
        return int(self.points.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1])


@dataclass(frozen=True)
class InitialMeasureSpec:
    """Compactly supported initial opinion distribution, constant over the window.

    uniform_interval:   uniform on [a, b], 1D only
    gaussian_truncated: normal(mean, sd) conditioned on |x| <= radius
    two_clusters:       half the mass near c1, half near c2, uniform spread
    explicit_points:    the given atoms verbatim
    """

    family: str
    dimension: int = 1
    a: float = -1.0
    b: float = 1.0
    mean: float = 0.0
    sd: float = 1.0
    radius: float = 1.0
    c1: float = -0.5
    c2: float = 0.5
    spread: float = 0.1
    points: tuple = ()
    sampling: str = "quantile"
    constant_in_s: bool = True
    seed: int = 0

    def __post_init__(self):
        problems = self.validate()
        if problems:
            raise ValidationError(problems)

    def validate(self) -> list:
        out = []
        if self.family not in MEASURE_FAMILIES:
            out.append(
                f"measure.family: unknown family {self.family!r}, "
                f"expected one of {MEASURE_FAMILIES}"
            )
            return out
        if not self.constant_in_s:
            out.append(
                "measure.constant_in_s: only window-constant initial measures are "
                "supported; prescribe per-atom sampled paths through the dynamics "
                "initial history for anything richer"
            )
        if self.sampling not in SAMPLING_MODES:
            out.append(
                f"measure.sampling: unknown mode {self.sampling!r}, "
                f"expected one of {SAMPLING_MODES}"
            )
        if int(self.dimension) < 1:
            out.append("measure.dimension: must be >= 1")
        if self.family == "uniform_interval":
            if int(self.dimension) != 1:
                out.append("measure.dimension: uniform_interval is 1D only")
            if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
                out.append("measure.a/b: need finite a < b")
        if self.family == "gaussian_truncated":
            if not (math.isfinite(self.sd) and self.sd > 0):
                out.append("measure.sd: must be finite and > 0")
            if not (math.isfinite(self.radius) and self.radius > 0):
                out.append("measure.radius: must be finite and > 0")
            if math.isfinite(self.radius) and abs(self.mean) > self.radius:
                out.append("measure.mean: must lie inside the truncation ball")
            if self.sampling == "quantile" and int(self.dimension) != 1:
                out.append("measure.sampling: quantile mode is 1D only")
        if self.family == "two_clusters":
            if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
                out.append("measure.c1/c2: must be finite")
            if not (math.isfinite(self.spread) and self.spread >= 0):
                out.append("measure.spread: must be finite and >= 0")
            if self.sampling == "quantile" and int(self.dimension) != 1:
                out.append("measure.sampling: quantile mode is 1D only")
        if self.family == "explicit_points":
            pts = np.asarray(self.points, dtype=float)
            if pts.size == 0:
                out.append("measure.points: must not be empty")
            elif not np.isfinite(pts).all():
                out.append("measure.points: must be finite")
        return out


def _mid_quantiles(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def sample_atoms(spec: InitialMeasureSpec, n: int) -> np.ndarray:
    """Draw n atoms: deterministic quantile stratification or seeded i.i.d."""
    if n < 1:
        raise ValidationError("sample_atoms: n must be >= 1")
    d = int(spec.dimension)
    if spec.family == "explicit_points":
        pts = np.asarray(spec.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[0] != n:
            raise ValidationError(
                f"measure.points: {pts.shape[0]} explicit atoms but n={n} requested"
            )
        return np.ascontiguousarray(pts)

    if spec.sampling == "quantile":
        q = _mid_quantiles(n)
        if spec.family == "uniform_interval":
            return (spec.a + (spec.b - spec.a) * q)[:, None]
        if spec.family == "gaussian_truncated":
            lo = (-spec.radius - spec.mean) / spec.sd
            hi = (spec.radius - spec.mean) / spec.sd
            vals = truncnorm.ppf(q, lo, hi, loc=spec.mean, scale=spec.sd)
            return np.asarray(vals, dtype=float)[:, None]
        # two_clusters: first half around c1, second half around c2
        n1 = (n + 1) // 2
        lo_c = min(spec.c1, spec.c2)
        hi_c = max(spec.c1, spec.c2)
        q1 = _mid_quantiles(n1)
        q2 = _mid_quantiles(n - n1) if n - n1 else np.empty(0)
        part1 = lo_c - spec.spread + 2.0 * spec.spread * q1
        part2 = hi_c - spec.spread + 2.0 * spec.spread * q2
        return np.concatenate([part1, part2])[:, None]

    rng = np.random.default_rng(spec.seed)
    if spec.family == "uniform_interval":
        return rng.uniform(spec.a, spec.b, size=(n, 1))
    if spec.family == "gaussian_truncated":
        out = np.empty((n, d))
        filled = 0
        for _ in range(200):
            draw = rng.normal(spec.mean, spec.sd, size=(4 * n, d))
            keep = draw[np.sqrt((draw * draw).sum(axis=1)) <= spec.radius]
            take = min(keep.shape[0], n - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
            if filled == n:
                return out
        raise ValidationError(
            "measure: truncation rejected nearly all gaussian draws; "
            "radius is too small for the given mean and sd"
        )
    centers = np.where(rng.integers(0, 2, size=n) == 0, spec.c1, spec.c2)
    offsets = rng.uniform(-spec.spread, spec.spread, size=(n, d))
    pts = np.zeros((n, d))
    pts[:, 0] = centers
    return pts + offsets


def sample_particles(spec: InitialMeasureSpec, n: int) -> InitialHistory:
    """Initial particle data: n atoms held constant over the start-up window."""
    if n < 2:
        raise ValidationError("sample_particles: n must be >= 2")
    return InitialHistory.constant(sample_atoms(spec, n))


def measure_at(trajectory, t) -> EmpiricalMeasure:
    """Empirical measure pushed forward to a recorded timestamp."""
    return EmpiricalMeasure(points=trajectory.state_at(t).copy())


def wasserstein1_1d(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """Sorted-coupling distance for equal-count 1D measures (optimal in 1D)."""
    if mu.dimension != 1 or nu.dimension != 1:
        raise ValidationError(
            "wasserstein1_1d: both measures must be 1D; use "
            "wasserstein1_assignment for higher dimensions"
        )
    if mu.n_atoms != nu.n_atoms:
        raise ValidationError(
            "wasserstein1_1d: atom counts differ; use wasserstein1_assignment "
            "or an explicit coupling for unequal sizes"
        )
    a = np.sort(mu.points[:, 0])
    b = np.sort(nu.points[:, 0])
    return float(np.abs(a - b).mean())


def wasserstein1_assignment(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """Exact minimum-cost matching distance for equal-count measures, any d."""
    if mu.n_atoms != nu.n_atoms:
        raise ValidationError(
            "wasserstein1_assignment: atom counts must match (equal-weight "
            "empirical measures couple by permutation)"
        )
    if mu.dimension != nu.dimension:
        raise ValidationError("wasserstein1_assignment: dimensions must match")
    m = mu.n_atoms
    if m > ASSIGNMENT_CAP:
        raise SizeError(
            f"wasserstein1_assignment: {m} atoms exceeds the exact-solver cap "
            f"{ASSIGNMENT_CAP}; use the 1D sorted coupling or subsample"
        )
    cost = cdist(mu.points, nu.points)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / m)


def _w1_1d_general(a_pts: np.ndarray, b_pts: np.ndarray) -> float:
    """Exact 1D distance for unequal atom counts via the quantile coupling.

    Both quantile functions are step functions with jumps at k/N; on each cell
    of the merged breakpoint grid they are constant, so the integral of their
    absolute difference is a finite sum.
    """
    xa = np.sort(np.asarray(a_pts, dtype=float).ravel())
    xb = np.sort(np.asarray(b_pts, dtype=float).ravel())
    na, nb = xa.shape[0], xb.shape[0]
    edges = np.union1d(np.arange(1, na) / na, np.arange(1, nb) / nb)
    breaks = np.concatenate([[0.0], edges, [1.0]])
    widths = np.diff(breaks)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    ia = np.minimum((mids * na).astype(int), na - 1)
    ib = np.minimum((mids * nb).astype(int), nb - 1)
    return float(np.dot(widths, np.abs(xa[ia] - xb[ib])))


def support_diameter(mu: EmpiricalMeasure) -> float:
    """Diameter of the atom set (same definition as the trajectory diameter)."""
    return diameter(mu.points)


@dataclass(frozen=True)
class ConvergenceReport:
    """N-scaling experiment output.

    rows: one dict per (N, checkpoint) with N, t, w1_to_next_N,
    support_diameter, decay_bound; failed runs contribute a single row with
    an "error" field instead.
    """

    n_list: tuple
    checkpoints: tuple
    rows: tuple
    certificates: dict
    w1_nonincreasing: bool
    diameter_within_bound: bool


def convergence_experiment(
    spec: InitialMeasureSpec,
    config: ModelConfig,
    n_list,
    checkpoints,
    diameter_slack: float = 1.05,
) -> ConvergenceReport:
    """Simulate the particle system at each N and compare across resolutions.

    In 1D quantile mode the per-N initial measures are nested refinements of
    the same distribution, so d_1 between successive N at a fixed time
    measures pure discretization error. diameter_within_bound checks
    support_diameter <= d_X(0) e^{-K t} * diameter_slack per N against that
    N's own certificate; w1_nonincreasing compares successive distances at
    the final checkpoint.
    """
    n_list = [int(v) for v in n_list]
    problems = []
    if len(n_list) < 1:
        problems.append("n_list: must not be empty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        problems.append("n_list: must be strictly increasing")
    if any(v < 2 for v in n_list):
        problems.append("n_list: every N must be >= 2")
    checkpoints = [float(t) for t in checkpoints]
    if len(checkpoints) < 1:
        problems.append("checkpoints: must not be empty")
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        problems.append("checkpoints: must be strictly increasing")
    if any(t < 0.0 or t > config.t_end for t in checkpoints):
        problems.append(f"checkpoints: must lie within [0, t_end={config.t_end:g}]")
    if int(spec.dimension) != 1 and len(n_list) > 1:
        problems.append(
            "measure.dimension: cross-size distances are only supported in 1D "
            "(quantile coupling); use a single N or 1D data"
        )
    if problems:
        raise ValidationError(problems)

    runs = {}
    failures = {}
    for n in n_list:
        initial = sample_particles(spec, n)
        try:
            cfg_n = dataclasses.replace(
                config, n_agents=n, dimension=int(spec.dimension)
            )
            runs[n] = simulate(cfg_n, initial)
        except NumericFailure as exc:
            failures[n] = str(exc)

    certificates = {}
    for n, traj in runs.items():
        certificates[n] = certify(
            config.kernel, config.delay, config.weight, traj.radius
        )

    rows = []
    d_ok = True
    last_w1 = []
    for idx, n in enumerate(n_list):
        if n in failures:
            rows.append({"N": n, "error": failures[n]})
            continue
        traj = runs[n]
        cert = certificates[n]
        d0 = diameter(traj.states[0])
        nxt = n_list[idx + 1] if idx + 1 < len(n_list) else None
        for t in checkpoints:
            atoms = traj.state_at(t)
            diam = diameter(atoms)
            bound = None
            if cert.holds:
                bound = d0 * math.exp(-cert.K * t)
                if diam > bound * diameter_slack:
                    d_ok = False
            w1 = None
            if nxt is not None and nxt in runs:
                w1 = _w1_1d_general(atoms, runs[nxt].state_at(t))
                if t == checkpoints[-1]:
                    last_w1.append(w1)
            rows.append(
                {
                    "N": n,
                    "t": t,
                    "w1_to_next_N": w1,
                    "support_diameter": diam,
                    "decay_bound": bound,
                }
            )

    w1_ok = all(b <= a + 1e-12 for a, b in zip(last_w1, last_w1[1:]))
    return ConvergenceReport(
        n_list=tuple(n_list),
        checkpoints=tuple(checkpoints),
        rows=tuple(rows),
        certificates=certificates,
        w1_nonincreasing=w1_ok,
        diameter_within_bound=d_ok,
    )
