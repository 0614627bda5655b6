"""Trajectory diagnostics: diameter, gamma, Lyapunov functional, certificate.

Everything here is a pure post-process over an immutable Trajectory; the
dynamics are never re-integrated. Integrals reuse the trajectory's native
grid, with the innermost speed integral precomputed as a cumulative sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, InternalInconsistency, ValidationError
from .history import InitialHistory
from .kernels import DelayProfile, InfluenceKernel, MemoryWeight, a_bar, h_of_t, psi_eval


def diameter(x) -> float:
    """Largest pairwise Euclidean distance in an (agents, dimension) array."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValidationError("diameter: need a nonempty (agents, dimension) array")
    if x.shape[0] == 1:
        return 0.0
    if x.shape[1] == 1:
        col = x[:, 0]
        return float(col.max() - col.min())
    diff = x[:, None, :] - x[None, :, :]
    return float(np.sqrt((diff * diff).sum(axis=2)).max())


def initial_radius(initial: InitialHistory) -> float:
    """Radius R of the prescribed start-up data: sup over the window of max_i |x_i|."""
    if initial.kind == "constant_per_agent":
        if initial.positions is None or initial.positions.size == 0:
            raise ValidationError("initial_radius: empty initial history")
    else:
        if initial.states is None or initial.states.size == 0:
            raise ValidationError("initial_radius: empty initial history")
    return initial.radius()


def _cumulative_speed(trajectory):
    """Grid and cumulative trapezoid C of the recorded speed_max series.

    C(t) - C(s) approximates the integral of max_k |dx_k/dz| over [s, t];
    values between stamps come from linear interpolation of C.
    """
    ft = trajectory.full_times
    fs = trajectory.full_speeds
    c = np.empty_like(ft)
    c[0] = 0.0
    np.cumsum(0.5 * (fs[1:] + fs[:-1]) * np.diff(ft), out=c[1:])
    return ft, c


def _trapz(vals: np.ndarray, dx) -> np.ndarray:
    """Uniform-spacing trapezoid along the last axis; dx may broadcast."""
    return ((vals[..., 0] + vals[..., -1]) * 0.5 + vals[..., 1:-1].sum(axis=-1)) * dx


def _gamma_value(t: float, config, ft: np.ndarray, c: np.ndarray) -> float:
    tau_t = float(config.delay.tau(t))
    m = int(config.quadrature_nodes)
    nodes = np.linspace(t - tau_t, t, m)
    tol = 1e-9 * max(1.0, abs(float(ft[0])), abs(float(ft[-1])))
    if nodes[0] < ft[0] - tol or t > ft[-1] + tol:
        raise CoverageError(
            f"gamma: window [{float(nodes[0])!r}, {t!r}] outside recorded "
            f"[{float(ft[0])!r}, {float(ft[-1])!r}]"
        )
    c_t = float(np.interp(t, ft, c))
    vals = config.weight.alpha(t - nodes) * (c_t - np.interp(nodes, ft, c))
    spacing = tau_t / (m - 1)
    w = np.full(m, spacing)
    w[0] = w[-1] = 0.5 * spacing
    return float(np.dot(w, vals)) / h_of_t(config.weight, config.delay, t)


def gamma(t, trajectory, config=None) -> float:
    """Windowed accumulated-motion average at a recorded timestamp.

    (1/h(t)) * integral over [t - tau(t), t] of alpha(t-s) * [C(t) - C(s)] ds,
    with C the cumulative max-speed integral. t snaps to the nearest recorded
    stamp (within half a step).
    """
    config = config or trajectory.config
    k = trajectory.index_at(float(t))
    ft, c = _cumulative_speed(trajectory)
    return _gamma_value(float(trajectory.times[k]), config, ft, c)


def _lyapunov_addend(t: float, config, ft: np.ndarray, c: np.ndarray) -> float:
    """Double integral of alpha(s) e^{-(t-sigma)} [C(t)-C(sigma)] over the wedge."""
    tau_t = float(config.delay.tau(t))
    m = int(config.quadrature_nodes)
    s_nodes = np.linspace(0.0, tau_t, m)
    u = np.linspace(0.0, 1.0, m)
    # sigma[i, l] spans [t - s_i, t] uniformly for each outer node s_i
    sigma = t - s_nodes[:, None] * (1.0 - u[None, :])
    tol = 1e-9 * max(1.0, abs(float(ft[0])), abs(float(ft[-1])))
    if sigma.min() < ft[0] - tol or t > ft[-1] + tol:
        raise CoverageError(
            f"lyapunov: window [{float(sigma.min())!r}, {t!r}] outside recorded "
            f"[{float(ft[0])!r}, {float(ft[-1])!r}]"
        )
    c_t = float(np.interp(t, ft, c))
    inner_vals = np.exp(sigma - t) * (c_t - np.interp(sigma, ft, c))
    inner = _trapz(inner_vals, s_nodes / (m - 1))
    outer_vals = config.weight.alpha(s_nodes) * inner
    return float(_trapz(outer_vals, tau_t / (m - 1)))


def lyapunov(t, trajectory, config=None, beta: float = 1.0) -> float:
    """Diameter plus the beta-weighted memory of recent motion.

    d_X(t) + beta * integral_0^{tau(t)} alpha(s) integral_{t-s}^t e^{-(t-sigma)}
    [C(t) - C(sigma)] d sigma ds. beta = 0 degenerates to the diameter and is
    meant for tests; negative beta is rejected.
    """
    if not (math.isfinite(beta) and beta >= 0.0):
        raise ValidationError("lyapunov: beta must be finite and >= 0")
    config = config or trajectory.config
    k = trajectory.index_at(float(t))
    t_k = float(trajectory.times[k])
    d_x = diameter(trajectory.states[k])
    if beta == 0.0:
        return d_x
    ft, c = _cumulative_speed(trajectory)
    return d_x + beta * _lyapunov_addend(t_k, config, ft, c)


@dataclass(frozen=True)
class DiagnosticsSeries:
    """Per-timestamp diagnostics along a trajectory."""

    times: np.ndarray
    d_x: np.ndarray
    gamma: np.ndarray
    lyapunov: np.ndarray
    speed_max: np.ndarray
    beta: float


def diagnostics_series(trajectory, beta: float, config=None) -> DiagnosticsSeries:
    """Evaluate d_X, gamma, the Lyapunov functional and speed at every stamp."""
    if not (math.isfinite(beta) and beta >= 0.0):
        raise ValidationError("diagnostics_series: beta must be finite and >= 0")
    config = config or trajectory.config
    ft, c = _cumulative_speed(trajectory)
    times = trajectory.times
    n = times.shape[0]
    d_x = np.empty(n)
    gam = np.empty(n)
    lya = np.empty(n)
    for k in range(n):
        t_k = float(times[k])
        d_x[k] = diameter(trajectory.states[k])
        gam[k] = _gamma_value(t_k, config, ft, c)
        lya[k] = d_x[k]
        if beta > 0.0:
            lya[k] += beta * _lyapunov_addend(t_k, config, ft, c)
    return DiagnosticsSeries(
        times=times.copy(),
        d_x=d_x,
        gamma=gam,
        lyapunov=lya,
        speed_max=trajectory.speeds.copy(),
        beta=float(beta),
    )


@dataclass(frozen=True)
class ConsensusCertificate:
    """Evaluated sufficient consensus condition with its constructive rate.

    holds is the comparison lhs <= rhs with lhs = (e^{tau(0)} - 1) h(0) and
    rhs = A_bar psi(2R)^3 / (2 + psi(2R)^2). When it holds, beta_chosen
    maximizes the certified rate K over the feasibility interval
    [beta_min, beta_max) and K > 0 is guaranteed.
    """

    R: float
    psi_2R: float
    lhs: float
    rhs: float
    holds: bool
    beta_min: float = None
    beta_max: float = None
    beta_chosen: float = None
    K: float = None

    def as_dict(self) -> dict:
        out = {
            "R": self.R,
            "psi_2R": self.psi_2R,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": self.holds,
        }
        if self.holds:
            out.update(
                beta_min=self.beta_min,
                beta_max=self.beta_max,
                beta_chosen=self.beta_chosen,
                K=self.K,
            )
        return out


def certify(
    kernel: InfluenceKernel,
    delay: DelayProfile,
    weight: MemoryWeight,
    R: float,
) -> ConsensusCertificate:
    """Evaluate the sufficient consensus condition at radius R.

    When the condition holds, beta is feasible on [beta_min, beta_max) with
        beta_min = 2 / (e^{-tau(0)} A_bar psi - h(0)(1 - e^{-tau(0)})),
        beta_max = psi^2 / (h(0)(1 - e^{-tau(0)})),
    and the reported K = min{beta, psi - beta h(0)(1 - e^{-tau(0)})/psi} is
    maximized by the intersection of the two linear pieces, clamped into the
    interval.
    """
    if not (math.isfinite(R) and R >= 0.0):
        raise ValidationError("certify: R must be finite and >= 0")
    problems = weight.validate_on_window(delay.tau_zero)
    if problems:
        raise ValidationError(problems)
    abar = a_bar(weight, delay)
    if abar <= 0.0:
        raise ValidationError(
            "certify: integral of alpha over [0, tau_star] must be positive"
        )
    tau0 = delay.tau_zero
    h0 = h_of_t(weight, delay, 0.0)
    psi = float(psi_eval(kernel, 2.0 * R))
    lhs = math.expm1(tau0) * h0
    rhs = abar * psi ** 3 / (2.0 + psi * psi)
    if lhs > rhs:
        return ConsensusCertificate(R=R, psi_2R=psi, lhs=lhs, rhs=rhs, holds=False)

    damp = h0 * (-math.expm1(-tau0))  # h(0)(1 - e^{-tau0}), the leakage term
    gain = math.exp(-tau0) * abar * psi
    if not gain > damp:
        raise InternalInconsistency(
            "certify: condition holds but the beta denominator is not positive"
        )
    beta_min = 2.0 / (gain - damp)
    beta_max = psi * psi / damp
    if not beta_min < beta_max:
        raise InternalInconsistency(
            "certify: condition holds but the beta interval is empty"
        )
    beta_star = psi * psi / (psi + damp)
    beta_chosen = max(beta_min, beta_star)
    if not beta_chosen < beta_max:
        raise InternalInconsistency(
            "certify: chosen beta escaped the feasibility interval"
        )
    k_rate = min(beta_chosen, psi - beta_chosen * damp / psi)
    if not k_rate > 0.0:
        raise InternalInconsistency("certify: certified rate is not positive")
    return ConsensusCertificate(
        R=R,
        psi_2R=psi,
        lhs=lhs,
        rhs=rhs,
        holds=True,
        beta_min=beta_min,
        beta_max=beta_max,
        beta_chosen=beta_chosen,
        K=k_rate,
    )


@dataclass(frozen=True)
class DecayFit:
    """Log-linear fit of a positive series: value ~ e^{intercept - rate t}."""

    rate: float
    intercept: float
    residual: float
    degenerate: bool = False


def fit_decay_rate(series: DiagnosticsSeries, window) -> DecayFit:
    """Least-squares exponential rate of d_X over window = (t_lo, t_hi).

    The rate is the negated slope of the log-diameter line. If the diameter
    hits numerical zero inside the window the fit is degenerate and the rate
    is reported as +inf.
    """
    t_lo, t_hi = float(window[0]), float(window[1])
    if not t_hi > t_lo:
        raise ValidationError("fit_decay_rate: window must satisfy t_hi > t_lo")
    mask = (series.times >= t_lo - 1e-12) & (series.times <= t_hi + 1e-12)
    if int(mask.sum()) < 2:
        raise ValidationError(
            "fit_decay_rate: window contains fewer than two samples"
        )
    t = series.times[mask]
    d = series.d_x[mask]
    if float(d.min()) < 1e-280:
        return DecayFit(rate=math.inf, intercept=-math.inf, residual=0.0, degenerate=True)
    y = np.log(d)
    t_mean = float(t.mean())
    y_mean = float(y.mean())
    var = float(((t - t_mean) ** 2).sum())
    slope = float(((t - t_mean) * (y - y_mean)).sum()) / var
    intercept = y_mean - slope * t_mean
    resid = y - (slope * t + intercept)
    return DecayFit(
        rate=-slope,
        intercept=intercept,
        residual=float(np.sqrt((resid * resid).mean())),
        degenerate=False,
    )


def ball_check(trajectory, tol: float = 1e-6):
    """Uniform bound max_i |x_i(t)| <= R + tol; returns (ok, worst_excess)."""
    norms = np.sqrt((trajectory.states ** 2).sum(axis=2)).max(axis=1)
    worst = float(norms.max() - trajectory.radius)
    return worst <= tol, worst


def dini_check(series: DiagnosticsSeries, psi_2r: float, eps: float = 1e-3):
    """Forward-difference contraction inequality along the series.

    Checks (d_X(t+dt) - d_X(t))/dt <= (2/psi) gamma - psi d_X at every step,
    violations measured relative to max(d_X, gamma). Returns (ok, worst).
    """
    t, d, g = series.times, series.d_x, series.gamma
    fd = np.diff(d) / np.diff(t)
    bound = (2.0 / psi_2r) * g[:-1] - psi_2r * d[:-1]
    scale = np.maximum(d[:-1], g[:-1]) + 1e-15
    rel = (fd - bound) / scale
    worst = float(rel.max())
    return worst <= eps, worst


def speed_check(series: DiagnosticsSeries, psi_2r: float, eps: float = 1e-3):
    """Pointwise bound speed_max <= (gamma + d_X)/psi; returns (ok, worst)."""
    bound = (series.gamma + series.d_x) / psi_2r
    scale = np.maximum(np.maximum(series.d_x, series.gamma), series.speed_max) + 1e-15
    rel = (series.speed_max - bound) / scale
    worst = float(rel.max())
    return worst <= eps, worst


def lyapunov_decay_check(series: DiagnosticsSeries, k_rate: float, eps: float = 1e-3):
    """e^{K t} L(t) non-increasing within eps relative per step."""
    v = np.exp(k_rate * series.times) * series.lyapunov
    rel = (v[1:] - v[:-1]) / (v[:-1] + 1e-300)
    worst = float(rel.max())
    return worst <= eps, worst
