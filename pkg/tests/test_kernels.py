"""Influence kernel, delay profile and memory weight behavior."""
import math

import numpy as np
import pytest

from hkdelay import (
    DelayProfile,
    DomainError,
    InfluenceKernel,
    MemoryWeight,
    QuadratureError,
    ValidationError,
    a_bar,
    adaptive_quadrature,
    h_of_t,
    psi_eval,
)
from hkdelay.kernels import PSI_IDS

import oracles


class TestInfluenceKernel:
    def test_family_values(self):
        assert psi_eval(InfluenceKernel("constant"), 3.7) == 1.0
        k = InfluenceKernel("power_law", exponent=1.0)
        assert psi_eval(k, 1.0) == pytest.approx(0.5, rel=1e-15)
        assert psi_eval(k, 2.0) == pytest.approx(0.2, rel=1e-15)
        k = InfluenceKernel("exponential", rate=0.5)
        assert psi_eval(k, 2.0) == pytest.approx(math.exp(-1.0), rel=1e-15)

    def test_psi_at_zero_is_one(self):
        for kernel in (
            InfluenceKernel("constant"),
            InfluenceKernel("power_law", exponent=2.3),
            InfluenceKernel("exponential", rate=1.7),
        ):
            assert psi_eval(kernel, 0.0) == 1.0

    def test_vectorized_and_scalar_agree(self):
        k = InfluenceKernel("power_law", exponent=1.4)
        r = np.linspace(0.0, 5.0, 11)
        vec = psi_eval(k, r)
        assert vec.shape == (11,)
        for i, ri in enumerate(r):
            assert vec[i] == psi_eval(k, float(ri))

    def test_negative_distance_rejected(self):
        with pytest.raises(DomainError):
            psi_eval(InfluenceKernel("constant"), -0.1)

    def test_nonincreasing(self):
        rng = np.random.default_rng(3)
        r = np.linspace(0.0, 10.0, 4001)
        for _ in range(10):
            kernel = (
                InfluenceKernel("power_law", exponent=float(rng.uniform(0.3, 3.0)))
                if rng.integers(2)
                else InfluenceKernel("exponential", rate=float(rng.uniform(0.2, 3.0)))
            )
            vals = psi_eval(kernel, r)
            assert (np.diff(vals) <= 1e-15).all()

    def test_family_ids(self):
        assert PSI_IDS == {"constant": 0, "power_law": 1, "exponential": 2}
        assert InfluenceKernel("power_law", exponent=2.0).family_id == 1
        assert InfluenceKernel("power_law", exponent=2.0).family_param == 2.0
        assert InfluenceKernel("exponential", rate=0.7).family_param == 0.7
        assert InfluenceKernel("constant").family_param == 0.0

    def test_lipschitz_power_law_closed_form(self):
        # independent derivative-maximum formula, frozen at p = 1
        k = InfluenceKernel("power_law", exponent=1.0)
        assert k.lipschitz_bound == pytest.approx(0.6495190528383290, rel=1e-15)
        for p in (0.5, 1.0, 2.0, 3.5):
            got = InfluenceKernel("power_law", exponent=p).lipschitz_bound
            assert got == pytest.approx(oracles.lipschitz_power_law(p), rel=1e-13)

    def test_lipschitz_bound_is_valid_and_tight(self):
        rng = np.random.default_rng(11)
        for kernel in (
            InfluenceKernel("power_law", exponent=0.8),
            InfluenceKernel("power_law", exponent=1.0),
            InfluenceKernel("power_law", exponent=2.5),
            InfluenceKernel("exponential", rate=1.3),
            InfluenceKernel("constant"),
        ):
            bound = kernel.lipschitz_bound
            r = np.sort(rng.uniform(0.0, 6.0, 2000))
            vals = psi_eval(kernel, r)
            slopes = np.abs(np.diff(vals)) / np.diff(r)
            assert slopes.max() <= bound * (1.0 + 1e-8) + 1e-12
            if kernel.family == "power_law":
                # steepest point of the profile
                peak = 1.0 / math.sqrt(2.0 * kernel.exponent + 1.0)
                h = 1e-7
                slope = abs(
                    psi_eval(kernel, peak + h) - psi_eval(kernel, peak - h)
                ) / (2.0 * h)
                assert slope >= 0.999 * bound
            if kernel.family == "exponential":
                h = 1e-9
                slope = (psi_eval(kernel, 0.0) - psi_eval(kernel, h)) / h
                assert slope >= 0.999 * bound

    def test_validation(self):
        with pytest.raises(ValidationError):
            InfluenceKernel("gaussian")
        with pytest.raises(ValidationError):
            InfluenceKernel("power_law", exponent=0.0)
        with pytest.raises(ValidationError):
            InfluenceKernel("exponential", rate=-1.0)
        with pytest.raises(ValidationError):
            InfluenceKernel("power_law", exponent=float("nan"))


class TestDelayProfile:
    def test_constant(self):
        d = DelayProfile("constant", tau_bar=0.4)
        assert d.tau(0.0) == 0.4
        assert d.tau(100.0) == 0.4
        assert d.tau_zero == 0.4
        assert d.tau_star == 0.4

    def test_linear_decreasing(self):
        d = DelayProfile("linear_decreasing", tau0=0.6, tau_inf=0.2, slope=0.1)
        assert d.tau(0.0) == pytest.approx(0.6)
        assert d.tau(2.0) == pytest.approx(0.4)
        assert d.tau(100.0) == pytest.approx(0.2)
        assert d.tau_zero == 0.6
        assert d.tau_star == 0.2
        vals = d.tau(np.linspace(0.0, 10.0, 101))
        assert (np.diff(vals) <= 1e-15).all()

    def test_zero_slope_floor_is_tau0(self):
        d = DelayProfile("linear_decreasing", tau0=0.6, tau_inf=0.2, slope=0.0)
        assert d.tau_star == 0.6

    def test_validation(self):
        with pytest.raises(ValidationError):
            DelayProfile("constant", tau_bar=0.0)
        with pytest.raises(ValidationError):
            DelayProfile("linear_decreasing", tau0=0.1, tau_inf=0.2, slope=0.1)
        with pytest.raises(ValidationError):
            DelayProfile("linear_decreasing", tau0=0.5, tau_inf=0.2, slope=-0.1)
        with pytest.raises(ValidationError):
            DelayProfile("sinusoidal")


class TestMemoryWeight:
    def test_alpha_families(self):
        assert MemoryWeight("constant", value=2.0).alpha(0.7) == 2.0
        w = MemoryWeight("exponential", rate=1.5)
        assert w.alpha(0.4) == pytest.approx(math.exp(-0.6), rel=1e-15)
        w = MemoryWeight("polynomial", coefficients=(1.0, 2.0, 3.0))
        assert w.alpha(0.5) == pytest.approx(1.0 + 1.0 + 0.75, rel=1e-15)

    def test_dirac_is_rejected_with_guidance(self):
        with pytest.raises(ValidationError) as err:
            MemoryWeight("dirac")
        msg = str(err.value)
        assert "pointwise-delay" in msg
        assert "constant, exponential or polynomial" in msg

    def test_negative_s_rejected(self):
        with pytest.raises(DomainError):
            MemoryWeight("constant").alpha(-0.2)

    def test_integral_closed_forms(self):
        assert MemoryWeight("constant", value=2.0).integral(0.3) == pytest.approx(0.6)
        w = MemoryWeight("exponential", rate=1.5)
        assert w.integral(0.4) == pytest.approx(
            (1.0 - math.exp(-0.6)) / 1.5, rel=1e-15
        )
        assert MemoryWeight("exponential", rate=0.0).integral(0.4) == pytest.approx(0.4)
        w = MemoryWeight("polynomial", coefficients=(1.0, 2.0))
        assert w.integral(0.5) == pytest.approx(0.5 + 0.25, rel=1e-15)

    def test_integral_matches_quadrature(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            pick = rng.integers(3)
            if pick == 0:
                w = MemoryWeight("constant", value=float(rng.uniform(0.1, 3.0)))
            elif pick == 1:
                w = MemoryWeight("exponential", rate=float(rng.uniform(-1.0, 2.0)))
            else:
                w = MemoryWeight(
                    "polynomial",
                    coefficients=tuple(float(c) for c in rng.uniform(0.05, 1.0, 4)),
                )
            x = float(rng.uniform(0.05, 1.5))
            ref = adaptive_quadrature(w.alpha, 0.0, x, rtol=1e-12)
            assert w.integral(x) == pytest.approx(ref, rel=1e-9)

    def test_growing_exponential_weight_is_legal(self):
        w = MemoryWeight("exponential", rate=-0.5)
        assert w.alpha(1.0) == pytest.approx(math.exp(0.5))
        assert w.validate_on_window(1.0) == []

    def test_window_negativity_detected(self):
        w = MemoryWeight("polynomial", coefficients=(1.0, -3.0))
        problems = w.validate_on_window(1.0)
        assert len(problems) == 1
        assert "nonnegative" in problems[0]

    def test_validation(self):
        with pytest.raises(ValidationError):
            MemoryWeight("constant", value=0.0)
        with pytest.raises(ValidationError):
            MemoryWeight("exponential", rate=float("inf"))
        with pytest.raises(ValidationError):
            MemoryWeight("polynomial", coefficients=())
        with pytest.raises(ValidationError):
            MemoryWeight("uniform")


class TestWindowMass:
    def test_h_and_abar_constant(self):
        w = MemoryWeight("constant", value=1.0)
        d = DelayProfile("constant", tau_bar=0.25)
        assert h_of_t(w, d, 0.0) == pytest.approx(0.25)
        assert a_bar(w, d) == pytest.approx(0.25)

    def test_h_tracks_shrinking_window(self):
        w = MemoryWeight("constant", value=2.0)
        d = DelayProfile("linear_decreasing", tau0=0.5, tau_inf=0.2, slope=0.1)
        assert h_of_t(w, d, 0.0) == pytest.approx(1.0)
        assert h_of_t(w, d, 1.0) == pytest.approx(0.8)
        assert h_of_t(w, d, 2.0) == pytest.approx(0.6)
        assert h_of_t(w, d, 10.0) == pytest.approx(0.4)  # floor tau_inf = 0.2
        assert a_bar(w, d) == pytest.approx(0.4)


class TestAdaptiveQuadrature:
    def test_known_integrals(self):
        got = adaptive_quadrature(np.exp, 0.0, 1.0)
        assert got == pytest.approx(math.e - 1.0, rel=1e-12)
        got = adaptive_quadrature(np.sin, 0.0, math.pi)
        assert got == pytest.approx(2.0, rel=1e-12)

    def test_empty_and_invalid_intervals(self):
        assert adaptive_quadrature(np.exp, 0.5, 0.5) == 0.0
        with pytest.raises(DomainError):
            adaptive_quadrature(np.exp, 1.0, 0.0)

    def test_depth_exhaustion_raises(self):
        f = lambda x: np.sin(200.0 * x)  # noqa: E731
        with pytest.raises(QuadratureError):
            adaptive_quadrature(f, 0.0, 3.0, rtol=1e-14, max_depth=1)
