"""Initial history containers and the sliding interpolation buffer."""
import numpy as np
import pytest

from hkdelay import CoverageError, HistoryBuffer, InitialHistory, OrderingError, ValidationError


class TestInitialHistory:
    def test_constant_reshapes_1d(self):
        h = InitialHistory.constant([0.0, 1.0, 2.0])
        assert h.n_agents == 3
        assert h.dimension == 1
        assert h.state_at(-0.3).shape == (3, 1)

    def test_constant_is_windowwide(self):
        h = InitialHistory.constant([[0.5, -0.5], [1.0, 0.0]])
        for s in (-1.0, -0.25, 0.0):
            np.testing.assert_array_equal(h.state_at(s), [[0.5, -0.5], [1.0, 0.0]])

    def test_path_interpolates(self):
        h = InitialHistory.path([-1.0, -0.5, 0.0], [[0.0, 2.0], [1.0, 2.0], [1.0, 0.0]])
        assert h.n_agents == 2
        assert h.dimension == 1
        got = h.state_at(-0.75)
        np.testing.assert_allclose(got, [[0.5], [2.0]], rtol=0, atol=1e-15)
        got = h.state_at(-0.25)
        np.testing.assert_allclose(got, [[1.0], [1.0]], rtol=0, atol=1e-15)

    def test_path_nodes_exact(self):
        times = np.array([-0.6, -0.2, 0.0])
        states = np.arange(3 * 2 * 2, dtype=float).reshape(3, 2, 2)
        h = InitialHistory.path(times, states)
        for k, t in enumerate(times):
            np.testing.assert_array_equal(h.state_at(float(t)), states[k])

    def test_path_outside_window_raises(self):
        h = InitialHistory.path([-1.0, 0.0], [[0.0], [1.0]])
        with pytest.raises(CoverageError):
            h.state_at(-1.5)
        with pytest.raises(CoverageError):
            h.state_at(0.5)

    def test_radius(self):
        h = InitialHistory.constant([[3.0, 4.0], [0.0, 0.0]])
        assert h.radius() == pytest.approx(5.0)
        # piecewise-linear norm is convex per segment, so nodes suffice
        h = InitialHistory.path([-1.0, 0.0], [[[2.0]], [[-0.5]]])
        assert h.radius() == pytest.approx(2.0)

    def test_validate_constant(self):
        h = InitialHistory.constant([[0.0], [1.0]])
        assert h.validate(0.25) == []
        bad = InitialHistory.constant([[np.nan], [1.0]])
        assert any("finite" in p for p in bad.validate(0.25))

    def test_validate_path_window_contract(self):
        # must start at or before -tau(0) and end at 0
        h = InitialHistory.path([-0.1, 0.0], [[0.0], [1.0]])
        problems = h.validate(0.25)
        assert any("-tau(0)" in p for p in problems)
        h = InitialHistory.path([-0.5, -0.1], [[0.0], [1.0]])
        assert any("end exactly at t = 0" in p for p in h.validate(0.25))
        h = InitialHistory.path([-0.5, -0.5, 0.0], [[0.0], [0.5], [1.0]])
        assert any("ascending" in p for p in h.validate(0.25))

    def test_validate_path_shapes(self):
        h = InitialHistory.path([-0.5, 0.0], np.zeros((3, 2, 1)))
        assert any("(stamps, agents, dimension)" in p for p in h.validate(0.25))


class TestHistoryBuffer:
    def test_seed_grid_covers_window(self):
        init = InitialHistory.constant([[0.0], [1.0]])
        buf = HistoryBuffer.seed(init, tau_zero=0.25, dt=0.0125, keep_span=0.275)
        assert len(buf) == 20
        lo, hi = buf.coverage()
        assert lo == pytest.approx(-0.25)
        assert hi == pytest.approx(-0.0125)
        assert (np.diff(buf.times) > 0).all()
        assert np.abs(np.diff(buf.times) - 0.0125).max() < 1e-12

    def test_seed_spacing_never_exceeds_dt(self):
        init = InitialHistory.constant([[0.0], [1.0]])
        for tau0, dt in ((0.25, 0.0125), (0.3, 0.0125), (0.17, 0.008), (0.01, 0.1)):
            buf = HistoryBuffer.seed(init, tau0, dt, keep_span=tau0 + 2 * dt)
            assert len(buf) >= 2
            assert buf.times[0] == pytest.approx(-tau0)
            gaps = np.diff(np.append(buf.times, 0.0))
            assert gaps.max() <= dt * (1.0 + 1e-12) or tau0 < dt

    def test_seed_speeds_from_segment_slopes(self):
        init = InitialHistory.path([-1.0, -0.5, 0.0], [[0.0], [0.5], [2.0]])
        buf = HistoryBuffer.seed(init, tau_zero=1.0, dt=0.5, keep_span=2.0)
        assert len(buf) == 2
        np.testing.assert_allclose(buf.speeds, [1.0, 3.0], rtol=1e-12)

    def test_seed_constant_has_zero_speeds(self):
        init = InitialHistory.constant([[0.0], [1.0]])
        buf = HistoryBuffer.seed(init, 0.25, 0.0125, keep_span=0.3)
        assert np.abs(buf.speeds).max() == 0.0

    def test_append_requires_advancing_time(self):
        buf = HistoryBuffer(2, 1, keep_span=1.0)
        buf.append(0.0, [[0.0], [1.0]], 0.0)
        buf.append(0.1, [[0.0], [1.0]], 0.0)
        with pytest.raises(OrderingError):
            buf.append(0.1, [[0.0], [1.0]], 0.0)
        with pytest.raises(OrderingError):
            buf.append(0.05, [[0.0], [1.0]], 0.0)

    def test_append_shape_checked(self):
        buf = HistoryBuffer(2, 1, keep_span=1.0)
        with pytest.raises(ValidationError):
            buf.append(0.0, [[0.0, 1.0]], 0.0)

    def test_sample_matches_linear_interpolation(self):
        buf = HistoryBuffer(2, 2, keep_span=10.0)
        ts = np.linspace(0.0, 1.0, 11)
        rng = np.random.default_rng(0)
        xs = rng.normal(size=(11, 2, 2))
        for t, x in zip(ts, xs):
            buf.append(float(t), x, 0.0)
        for s in rng.uniform(0.0, 1.0, 50):
            got = buf.sample(float(s))
            want = np.empty((2, 2))
            for a in range(2):
                for c in range(2):
                    want[a, c] = np.interp(s, ts, xs[:, a, c])
            np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-15)

    def test_sample_at_exact_stamp(self):
        buf = HistoryBuffer(1, 1, keep_span=10.0)
        buf.append(0.0, [[2.0]], 0.0)
        buf.append(1.0, [[4.0]], 0.0)
        np.testing.assert_array_equal(buf.sample(1.0), [[4.0]])
        np.testing.assert_array_equal(buf.sample(0.0), [[2.0]])

    def test_sample_never_extrapolates(self):
        buf = HistoryBuffer(1, 1, keep_span=10.0)
        buf.append(0.0, [[0.0]], 0.0)
        buf.append(1.0, [[1.0]], 0.0)
        with pytest.raises(CoverageError):
            buf.sample(-0.1)
        with pytest.raises(CoverageError):
            buf.sample(1.1)
        with pytest.raises(CoverageError):
            HistoryBuffer(1, 1, keep_span=1.0).coverage()

    def test_pruning_keeps_window_but_bounds_memory(self):
        init = InitialHistory.constant([[0.0], [1.0]])
        dt = 0.0125
        buf = HistoryBuffer.seed(init, 0.25, dt, keep_span=0.25 + 2 * dt)
        buf.append(0.0, [[0.0], [1.0]], 0.0)
        for k in range(1, 2001):
            t = k * dt
            buf.append(t, [[0.0], [1.0]], 0.0)
            # the whole look-back window must stay samplable
            buf.sample(t - 0.25)
        assert len(buf) <= 2 * (int(0.25 / dt) + 4)
        with pytest.raises(CoverageError):
            buf.sample(0.0)

    def test_growth_preserves_content(self):
        buf = HistoryBuffer(1, 1, keep_span=1e9, capacity=4)
        ts = np.arange(100, dtype=float)
        for t in ts:
            buf.append(float(t), [[t * 2.0]], t * 3.0)
        assert len(buf) == 100
        np.testing.assert_array_equal(buf.times, ts)
        np.testing.assert_array_equal(buf.states[:, 0, 0], ts * 2.0)
        np.testing.assert_array_equal(buf.speeds, ts * 3.0)

    def test_dump_csv(self, tmp_path):
        buf = HistoryBuffer(2, 2, keep_span=10.0)
        buf.append(0.0, [[0.0, 1.0], [2.0, 3.0]], 0.5)
        buf.append(1.0, [[4.0, 5.0], [6.0, 7.0]], 0.25)
        path = tmp_path / "hist.csv"
        buf.dump_csv(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "t,agent,x_1,x_2,speed_max"
        assert len(lines) == 1 + 2 * 2
        assert lines[1] == "0,0,0,1,0.5"
