"""Model ingredients: influence kernel psi, delay profile tau, memory weight alpha.

psi sets how strongly two opinions a distance r apart pull on each other, tau
sets how far into the past agents look, and alpha weighs that look-back
window. All three are small closed families, so window integrals have closed
forms and certificates stay exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureError, ValidationError

PSI_FAMILIES = ("constant", "power_law", "exponential")
DELAY_FAMILIES = ("constant", "linear_decreasing")
WEIGHT_FAMILIES = ("constant", "exponential", "polynomial")

# ids understood by the accumulation kernels
PSI_IDS = {"constant": 0, "power_law": 1, "exponential": 2}


@dataclass(frozen=True)
class InfluenceKernel:
    """Non-increasing influence profile with psi(0) = 1 and psi > 0.

    constant:    psi(r) = 1
    power_law:   psi(r) = (1 + r^2) ** -exponent
    exponential: psi(r) = exp(-rate * r)
    """

    family: str = "constant"
    exponent: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        problems = self.validate()
        if problems:
            raise ValidationError(problems)

    def validate(self) -> list:
        out = []
        if self.family not in PSI_FAMILIES:
            out.append(
                f"kernel.family: unknown family {self.family!r}, expected one of {PSI_FAMILIES}"
            )
            return out
        if self.family == "power_law" and not (
            math.isfinite(self.exponent) and self.exponent > 0
        ):
            out.append("kernel.exponent: power_law exponent must be finite and > 0")
        if self.family == "exponential" and not (
            math.isfinite(self.rate) and self.rate > 0
        ):
            out.append("kernel.rate: exponential rate must be finite and > 0")
        return out

    @property
    def family_id(self) -> int:
        return PSI_IDS[self.family]

    @property
    def family_param(self) -> float:
        if self.family == "power_law":
            return float(self.exponent)
        if self.family == "exponential":
            return float(self.rate)
        return 0.0

    @property
    def lipschitz_bound(self) -> float:
        """Global Lipschitz constant of psi, supplied analytically per family."""
        if self.family == "constant":
            return 0.0
        if self.family == "power_law":
            p = self.exponent
            # |psi'| peaks at r^2 = 1 / (2p + 1)
            return (
                2.0
                * p
                / math.sqrt(2.0 * p + 1.0)
                * ((2.0 * p + 1.0) / (2.0 * p + 2.0)) ** (p + 1.0)
            )
        return self.rate


def psi_eval(kernel: InfluenceKernel, r):
    """Evaluate psi at distance r >= 0 (scalar or array)."""
    arr = np.asarray(r, dtype=float)
    if arr.size and float(arr.min()) < 0.0:
        raise DomainError("psi_eval: distances must be nonnegative")
    if kernel.family == "constant":
        out = np.ones_like(arr)
    elif kernel.family == "power_law":
        out = (1.0 + arr * arr) ** (-kernel.exponent)
    else:
        out = np.exp(-kernel.rate * arr)
    if np.ndim(r) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class DelayProfile:
    """Delay horizon tau(t): positive, non-increasing, bounded below by tau_star.

    constant:          tau(t) = tau_bar
    linear_decreasing: tau(t) = max(tau_inf, tau0 - slope * t)
    """

    family: str = "constant"
    tau_bar: float = 0.25
    tau0: float = 1.0
    tau_inf: float = 0.5
    slope: float = 0.0

    def __post_init__(self):
        problems = self.validate()
        if problems:
            raise ValidationError(problems)

    def validate(self) -> list:
        out = []
        if self.family not in DELAY_FAMILIES:
            out.append(
                f"delay.family: unknown family {self.family!r}, expected one of {DELAY_FAMILIES}"
            )
            return out
        if self.family == "constant":
            if not (math.isfinite(self.tau_bar) and self.tau_bar > 0):
                out.append("delay.tau_bar: must be finite and > 0")
        else:
            if not (math.isfinite(self.tau_inf) and self.tau_inf > 0):
                out.append("delay.tau_inf: must be finite and > 0")
            if not (math.isfinite(self.tau0) and self.tau0 >= self.tau_inf):
                out.append("delay.tau0: must be finite and >= tau_inf")
            if not (math.isfinite(self.slope) and self.slope >= 0):
                out.append("delay.slope: must be finite and >= 0")
        return out

    @property
    def tau_zero(self) -> float:
        """tau(0), the widest window ever needed."""
        return float(self.tau_bar if self.family == "constant" else self.tau0)

    @property
    def tau_star(self) -> float:
        """Greatest lower bound of tau over t >= 0."""
        if self.family == "constant":
            return float(self.tau_bar)
        return float(self.tau_inf if self.slope > 0 else self.tau0)

    def tau(self, t):
        """Window length at time t (scalar or array)."""
        arr = np.asarray(t, dtype=float)
        if self.family == "constant":
            out = np.full_like(arr, self.tau_bar)
        else:
            out = np.maximum(self.tau_inf, self.tau0 - self.slope * arr)
        if np.ndim(t) == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class MemoryWeight:
    """Nonnegative weight alpha over the look-back window [0, tau(0)].

    constant:    alpha(s) = value
    exponential: alpha(s) = exp(-rate * s)
    polynomial:  alpha(s) = sum_k coefficients[k] * s^k
    """

    family: str = "constant"
    value: float = 1.0
    rate: float = 1.0
    coefficients: tuple = (1.0,)

    def __post_init__(self):
        if self.family == "dirac":
            raise ValidationError(
                "weight.family: 'dirac' concentrates all memory at one past instant, "
                "which is a pointwise-delay model outside the integrable-memory "
                "framework implemented here; use constant, exponential or polynomial"
            )
        object.__setattr__(
            self, "coefficients", tuple(float(c) for c in self.coefficients)
        )
        problems = self.validate()
        if problems:
            raise ValidationError(problems)

    def validate(self) -> list:
        out = []
        if self.family not in WEIGHT_FAMILIES:
            out.append(
                f"weight.family: unknown family {self.family!r}, expected one of {WEIGHT_FAMILIES}"
            )
            return out
        if self.family == "constant" and not (
            math.isfinite(self.value) and self.value > 0
        ):
            out.append("weight.value: must be finite and > 0")
        if self.family == "exponential" and not math.isfinite(self.rate):
            out.append("weight.rate: must be finite")
        if self.family == "polynomial":
            if len(self.coefficients) == 0:
                out.append("weight.coefficients: must not be empty")
            elif not all(math.isfinite(c) for c in self.coefficients):
                out.append("weight.coefficients: must all be finite")
        return out

    def validate_on_window(self, tau_zero: float) -> list:
        """Check alpha >= 0 on the window; polynomials can dip negative."""
        grid = np.linspace(0.0, tau_zero, 2049)
        vals = self.alpha(grid)
        low = float(vals.min())
        if low < -1e-12:
            at = float(grid[int(np.argmin(vals))])
            return [
                f"weight: alpha must be nonnegative on [0, {tau_zero:g}] "
                f"(minimum {low:.3e} at s={at:.6g})"
            ]
        return []

    def alpha(self, s):
        """Evaluate alpha at s >= 0 (scalar or array)."""
        arr = np.asarray(s, dtype=float)
        if arr.size and float(arr.min()) < -1e-12:
            raise DomainError("alpha: the memory weight is defined for s >= 0")
        if self.family == "constant":
            out = np.full_like(arr, self.value)
        elif self.family == "exponential":
            out = np.exp(-self.rate * arr)
        else:
            out = np.polynomial.polynomial.polyval(arr, np.asarray(self.coefficients))
        if np.ndim(s) == 0:
            return float(out)
        return out

    def integral(self, x: float) -> float:
        """Closed form of the window mass: integral of alpha over [0, x]."""
        x = float(x)
        if x < 0:
            raise DomainError("integral: upper limit must be nonnegative")
        if self.family == "constant":
            return self.value * x
        if self.family == "exponential":
            if self.rate == 0.0:
                return x
            return -math.expm1(-self.rate * x) / self.rate
        return float(
            sum(c * x ** (k + 1) / (k + 1) for k, c in enumerate(self.coefficients))
        )


def h_of_t(weight: MemoryWeight, delay: DelayProfile, t) -> float:
    """Window mass h(t) = integral of alpha over [0, tau(t)]."""
    return weight.integral(float(delay.tau(t)))


def a_bar(weight: MemoryWeight, delay: DelayProfile) -> float:
    """Minimal window mass: integral of alpha over [0, tau_star]."""
    return weight.integral(delay.tau_star)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def adaptive_quadrature(f, a: float, b: float, rtol: float = 1e-10, max_depth: int = 40) -> float:
    """Composite 10-point Gauss-Legendre quadrature with interval halving.

    Reference integrator for weight families without a closed form and the
    independent oracle used by the tests. f must accept numpy arrays.
    """
    a = float(a)
    b = float(b)
    if not b >= a:
        raise DomainError("adaptive_quadrature: requires b >= a")
    if a == b:
        return 0.0

    def panel(lo, hi):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        vals = np.asarray(f(mid + half * _GL_NODES), dtype=float)
        return half * float(np.dot(_GL_WEIGHTS, vals))

    def recurse(lo, hi, whole, depth):
        mid = 0.5 * (lo + hi)
        left = panel(lo, mid)
        right = panel(mid, hi)
        if abs(left + right - whole) <= rtol * (abs(left + right) + 1e-300):
            return left + right
        if depth >= max_depth:
            raise QuadratureError(
                "adaptive quadrature did not converge",
                payload={"interval": (lo, hi), "residual": abs(left + right - whole)},
            )
        return recurse(lo, mid, left, depth + 1) + recurse(mid, hi, right, depth + 1)

    return recurse(a, b, panel(a, b), 0)
