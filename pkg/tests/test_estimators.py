"""LS, projection, delay-domain denoising, and full-grid interpolation."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chest import (build_pilot_pattern, denoise_estimate, desk_config,
                   interpolate_full, ls_estimate, project_estimate,
                   retained_tap_count, simulate_uplink)
from chest.config import PilotPattern
from chest.estimators import ChannelEstimate
from chest.subspaces import ProjectorPair
from chest.channel import RxBlock


def _vec(h):
    return h.T.reshape(-1)


def _random_projectors(rng, n_rx, n_p, r_s, r_t):
    qs, _ = np.linalg.qr(rng.normal(size=(n_rx, r_s)) + 1j * rng.normal(size=(n_rx, r_s)))
    qt, _ = np.linalg.qr(rng.normal(size=(n_p, r_t)) + 1j * rng.normal(size=(n_p, r_t)))
    return ProjectorPair(spatial=qs @ qs.conj().T, temporal=qt @ qt.conj().T)


class TestLsEstimate:
    def test_noiseless_exact(self, rng):
        pat = build_pilot_pattern(16, 8, 1.0, rng)
        h = rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))
        rx = simulate_uplink(h, pat, 0.0, rng)
        est = ls_estimate(rx)
        np.testing.assert_allclose(est.h, h, atol=1e-13)
        assert est.grid == "pilot" and est.method == "ls"

    def test_identity_pilots_pass_through(self, rng):
        pat = PilotPattern(indices=np.arange(8), symbols=np.ones(8, dtype=complex))
        y = rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))
        est = ls_estimate(RxBlock(y=y, pilots=pat))
        np.testing.assert_array_equal(est.h, y)

    def test_white_error_law(self, rng):
        """LS error is diag(x)^-1 W: per-entry variance noise/power."""
        pat = build_pilot_pattern(64, 32, 2.0, rng)
        h = np.zeros((16, 32), dtype=complex)
        errs = []
        for _ in range(200):
            rx = simulate_uplink(h, pat, 0.5, rng)
            errs.append(np.mean(np.abs(ls_estimate(rx).h) ** 2))
        assert np.mean(errs) == pytest.approx(0.25, rel=0.05)


class TestProjectEstimate:
    def test_idempotent(self, rng):
        proj = _random_projectors(rng, 8, 16, 3, 4)
        est = ChannelEstimate(h=rng.normal(size=(8, 16)) + 1j * rng.normal(size=(8, 16)),
                              grid="pilot", method="ls")
        once = project_estimate(est, proj)
        twice = project_estimate(once, proj)
        np.testing.assert_allclose(twice.h, once.h, atol=1e-10)

    def test_identity_projectors_no_op(self, rng):
        proj = ProjectorPair(spatial=np.eye(8, dtype=complex),
                             temporal=np.eye(16, dtype=complex))
        h = rng.normal(size=(8, 16)) + 1j * rng.normal(size=(8, 16))
        est = ChannelEstimate(h=h, grid="pilot", method="ls")
        np.testing.assert_allclose(project_estimate(est, proj).h, h, atol=1e-13)

    def test_method_tag(self, rng):
        proj = _random_projectors(rng, 4, 8, 2, 2)
        est = ChannelEstimate(h=np.zeros((4, 8), dtype=complex), grid="pilot", method="ls")
        assert project_estimate(est, proj, method_tag="bml").method == "bml"

    def test_pure_noise_energy_ratio(self, rng):
        n_rx, n_p, r = 64, 32, 5
        proj = _random_projectors(rng, n_rx, n_p, r, r)
        total_in = total_out = 0.0
        for _ in range(50):
            h = rng.normal(size=(n_rx, n_p)) + 1j * rng.normal(size=(n_rx, n_p))
            est = ChannelEstimate(h=h, grid="pilot", method="ls")
            total_in += np.sum(np.abs(h) ** 2)
            total_out += np.sum(np.abs(project_estimate(est, proj).h) ** 2)
        assert total_out / total_in == pytest.approx(r * r / (n_rx * n_p), rel=0.1)

    def test_error_vector_identity(self, rng):
        """The estimation error splits as Qperp h - Q vec(scaled noise)."""
        n_rx, n_p = 6, 8
        proj = _random_projectors(rng, n_rx, n_p, 2, 3)
        pat = build_pilot_pattern(16, n_p, 1.0, rng)
        h = rng.normal(size=(n_rx, n_p)) + 1j * rng.normal(size=(n_rx, n_p))
        w = rng.normal(size=(n_rx, n_p)) + 1j * rng.normal(size=(n_rx, n_p))
        y = h @ np.diag(pat.symbols) + w
        ls = ls_estimate(RxBlock(y=y, pilots=pat))
        out = project_estimate(ls, proj)
        q = np.kron(proj.temporal.T, proj.spatial)
        scaled_noise = w @ np.diag(1 / pat.symbols)
        expected = (np.eye(q.shape[0]) - q) @ _vec(h) - q @ _vec(scaled_noise)
        np.testing.assert_allclose(_vec(h - out.h), expected, atol=1e-10)


class TestDenoise:
    def _estimate(self, rng, n_rx=4, n_p=32):
        h = rng.normal(size=(n_rx, n_p)) + 1j * rng.normal(size=(n_rx, n_p))
        return ChannelEstimate(h=h, grid="pilot", method="ls")

    def test_retained_tap_count_defaults(self, desk):
        k = retained_tap_count(desk.estimator.tau_max, desk.sample_interval,
                               desk.system.n_subcarriers, desk.system.n_pilots)
        assert k == 8

    def test_retained_tap_count_saturates(self, desk):
        k = retained_tap_count(1.0, desk.sample_interval, 64, 32)
        assert k == 32

    def test_full_window_is_identity(self, rng, desk):
        est = self._estimate(rng)
        out = denoise_estimate(est, 2.1e-6, desk.system)
        np.testing.assert_allclose(out.h, est.h, atol=1e-10)

    def test_in_window_taps_preserved(self, rng, desk):
        """A channel whose pilot-grid CIR lives on early integer taps passes through."""
        taps = np.zeros((4, 32), dtype=complex)
        taps[:, :6] = rng.normal(size=(4, 6)) + 1j * rng.normal(size=(4, 6))
        h = np.fft.fft(taps, axis=1)
        est = ChannelEstimate(h=h, grid="pilot", method="ls")
        out = denoise_estimate(est, desk.estimator.tau_max, desk.system)
        np.testing.assert_allclose(out.h, h, atol=1e-8)

    def test_out_of_window_taps_removed(self, rng, desk):
        taps = np.zeros((4, 32), dtype=complex)
        taps[:, 20] = 1.0
        h = np.fft.fft(taps, axis=1)
        est = ChannelEstimate(h=h, grid="pilot", method="ls")
        out = denoise_estimate(est, desk.estimator.tau_max, desk.system)
        np.testing.assert_allclose(out.h, 0.0, atol=1e-10)

    def test_idempotent(self, rng, desk):
        est = self._estimate(rng)
        once = denoise_estimate(est, 0.5e-6, desk.system)
        twice = denoise_estimate(once, 0.5e-6, desk.system)
        np.testing.assert_allclose(twice.h, once.h, atol=1e-10)

    @given(seed=st.integers(0, 2 ** 16))
    @settings(max_examples=25, deadline=None)
    def test_energy_non_increasing(self, seed):
        desk = desk_config()
        r = np.random.default_rng(seed)
        h = r.normal(size=(4, 32)) + 1j * r.normal(size=(4, 32))
        est = ChannelEstimate(h=h, grid="pilot", method="ls")
        out = denoise_estimate(est, desk.estimator.tau_max, desk.system)
        assert np.sum(np.abs(out.h) ** 2) <= np.sum(np.abs(h) ** 2) + 1e-9

    def test_pure_noise_energy_fraction(self, desk):
        r = np.random.default_rng(42)
        total_in = total_out = 0.0
        for _ in range(300):
            h = r.normal(size=(4, 32)) + 1j * r.normal(size=(4, 32))
            est = ChannelEstimate(h=h, grid="pilot", method="ls")
            total_in += np.sum(np.abs(h) ** 2)
            total_out += np.sum(np.abs(denoise_estimate(est, desk.estimator.tau_max,
                                                        desk.system).h) ** 2)
        assert total_out / total_in == pytest.approx(8 / 32, rel=0.05)

    def test_rejects_nonpositive_tau(self, rng, desk):
        with pytest.raises(ValueError):
            denoise_estimate(self._estimate(rng), 0.0, desk.system)


class TestInterpolateFull:
    def test_constant_channel_exact(self, rng):
        pat = build_pilot_pattern(64, 16, 1.0, rng)
        est = ChannelEstimate(h=np.full((4, 16), 2.0 - 1.0j), grid="pilot", method="ls")
        out = interpolate_full(est, pat, 64)
        assert out.grid == "full" and out.h.shape == (4, 64)
        np.testing.assert_allclose(out.h, 2.0 - 1.0j, atol=1e-12)

    def test_affine_exact_between_pilots(self, rng):
        pat = build_pilot_pattern(64, 16, 1.0, rng)
        slope = 0.3 - 0.1j
        full = slope * np.arange(64)[None, :] + (1 + 1j)
        est = ChannelEstimate(h=full[:, pat.indices].copy(), grid="pilot", method="ls")
        out = interpolate_full(ChannelEstimate(h=est.h, grid="pilot", method="ls"), pat, 64)
        np.testing.assert_allclose(out.h[:, :pat.indices[-1] + 1],
                                   full[:1, :pat.indices[-1] + 1], atol=1e-12)

    def test_exact_at_pilot_positions(self, rng):
        pat = build_pilot_pattern(64, 8, 1.0, rng)
        h = rng.normal(size=(3, 8)) + 1j * rng.normal(size=(3, 8))
        out = interpolate_full(ChannelEstimate(h=h, grid="pilot", method="ls"), pat, 64)
        np.testing.assert_allclose(out.h[:, pat.indices], h, atol=1e-13)

    def test_hold_beyond_last_pilot(self, rng):
        pat = build_pilot_pattern(64, 8, 1.0, rng)
        h = rng.normal(size=(2, 8)) + 1j * rng.normal(size=(2, 8))
        out = interpolate_full(ChannelEstimate(h=h, grid="pilot", method="ls"), pat, 64)
        for col in range(pat.indices[-1], 64):
            np.testing.assert_allclose(out.h[:, col], h[:, -1], atol=1e-13)

    def test_full_piloting_identity(self, rng):
        pat = build_pilot_pattern(32, 32, 1.0, rng)
        h = rng.normal(size=(2, 32)) + 1j * rng.normal(size=(2, 32))
        out = interpolate_full(ChannelEstimate(h=h, grid="pilot", method="ls"), pat, 32)
        np.testing.assert_allclose(out.h, h, atol=1e-14)


class TestLinearity:
    @given(seed=st.integers(0, 2 ** 16))
    @settings(max_examples=20, deadline=None)
    def test_estimators_linear_in_observation(self, seed):
        """All pilot-grid estimators commute with linear combinations of Y."""
        r = np.random.default_rng(seed)
        desk = desk_config()
        pat = build_pilot_pattern(64, 32, 1.0, r)
        proj = _random_projectors(r, 4, 32, 2, 3)
        y1 = r.normal(size=(4, 32)) + 1j * r.normal(size=(4, 32))
        y2 = r.normal(size=(4, 32)) + 1j * r.normal(size=(4, 32))
        alpha = complex(r.normal(), r.normal())

        def run(y):
            ls = ls_estimate(RxBlock(y=y, pilots=pat))
            return (ls.h,
                    project_estimate(ls, proj).h,
                    denoise_estimate(ls, desk.estimator.tau_max, desk.system).h)

        outs1, outs2 = run(y1), run(y2)
        combo = run(y1 + alpha * y2)
        for a, b, c in zip(outs1, outs2, combo):
            np.testing.assert_allclose(c, a + alpha * b, atol=1e-10)
