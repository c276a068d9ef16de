"""Unit tests for the multispan link model."""

import dataclasses

import numpy as np
import pytest

from cvqkd_multispan.gaussian import I2, apply_cp, thermal_cm, tmsv_cm, vacuum_cm
from cvqkd_multispan.link import (
    AmplifierKind,
    LinkConfig,
    ProtocolCase,
    amplifier_map,
    check_power_constraint,
    continuous_limit_channel,
    effective_channel,
    gain_constraint_max,
    propagate_link,
    shared_cm,
    span_params,
    thermal_loss_map,
)
from cvqkd_multispan.selfcheck import (
    check_continuous_limit,
    check_power_constraint_reduction,
    check_shared_vs_propagate,
)


def _config(length, spans, eps=0.0, kind=AmplifierKind.NONE, gain=1.0):
    return LinkConfig(length_km=length, spans=spans, excess_noise=eps,
                      amplifier=kind, gain=gain)


class TestLinkConfig:
    def test_rejects_zero_spans(self):
        with pytest.raises(ValueError, match="span count"):
            _config(10.0, 0)

    def test_rejects_gain_below_one(self):
        with pytest.raises(ValueError, match="below 1"):
            _config(10.0, 2, kind=AmplifierKind.PIA, gain=0.5)

    def test_rejects_gain_without_amplifier(self):
        with pytest.raises(ValueError, match="no amplifier"):
            _config(10.0, 2, gain=1.5)

    def test_for_case_sets_amplifier(self):
        cfg = _config(10.0, 2).for_case(ProtocolCase.CASE_IIB, gain=1.3)
        assert cfg.amplifier is AmplifierKind.PSA
        assert cfg.gain == 1.3

    def test_for_case_benchmark_requires_unit_gain(self):
        cfg = _config(10.0, 2, kind=AmplifierKind.PSA, gain=1.2)
        with pytest.raises(ValueError, match="gain 1"):
            cfg.for_case(ProtocolCase.NO_AMPLIFIER)


class TestSpanParams:
    def test_lossless_link(self):
        assert span_params(_config(0.0, 3, eps=0.1)) == (1.0, 0.0)

    def test_single_span_fifty_km(self):
        t, n_bar = span_params(_config(50.0, 1))
        assert t == pytest.approx(0.1, abs=1e-15)
        assert n_bar == 0.0

    def test_five_spans_with_noise(self):
        t, n_bar = span_params(_config(50.0, 5, eps=0.05))
        assert t == pytest.approx(10.0 ** -0.2, rel=1e-12)
        assert n_bar == pytest.approx(0.1 * 0.05 / (2.0 * 0.9), rel=1e-12)

    def test_noiseless_has_zero_occupation(self):
        assert span_params(_config(80.0, 4))[1] == 0.0


class TestMaps:
    def test_pia_unit_gain_is_identity(self):
        amp = amplifier_map(AmplifierKind.PIA, 1.0)
        assert np.allclose(amp.x, I2)
        assert np.allclose(amp.y, np.zeros((2, 2)))

    def test_psa_scales_quadrature_variances(self):
        out = apply_cp(vacuum_cm(1), amplifier_map(AmplifierKind.PSA, 4.0))
        assert np.allclose(out.data, np.diag([4.0, 0.25]))

    def test_pia_adds_noise(self):
        out = apply_cp(vacuum_cm(1), amplifier_map(AmplifierKind.PIA, 2.0))
        assert np.allclose(out.data, 3.0 * I2)

    def test_amplifier_rejects_gain_below_one(self):
        with pytest.raises(ValueError, match="below 1"):
            amplifier_map(AmplifierKind.PSA, 0.9)

    def test_thermal_loss_identity_at_full_transmission(self):
        chan = thermal_loss_map(1.0, 0.0)
        assert np.allclose(chan.x, I2)
        assert np.allclose(chan.y, np.zeros((2, 2)))

    def test_thermal_loss_on_thermal_state(self):
        out = apply_cp(thermal_cm(1.0), thermal_loss_map(0.5, 0.0))
        assert np.allclose(out.data, 2.0 * I2)

    def test_thermal_loss_derived_value(self):
        # Per-span channel of the 50 km / 5 span / eps = 0.05 link.
        t, n_bar = span_params(_config(50.0, 5, eps=0.05))
        out = apply_cp(vacuum_cm(1), thermal_loss_map(t, n_bar))
        assert out.data[0, 0] == pytest.approx(1.00205, abs=5e-6)

    def test_thermal_loss_rejects_bad_params(self):
        with pytest.raises(ValueError):
            thermal_loss_map(0.0, 0.1)
        with pytest.raises(ValueError):
            thermal_loss_map(0.5, -0.1)


class TestPropagation:
    def test_trivial_link_is_identity(self):
        cfg = _config(0.0, 4, kind=AmplifierKind.PSA, gain=1.0)
        out = propagate_link(tmsv_cm(3.0), cfg, on_mode=1)
        assert np.allclose(out.data, tmsv_cm(3.0).data)

    def test_matches_closed_form_randomized(self):
        result = check_shared_vs_propagate(trials=200)
        assert result.passed, result.detail

    def test_span_subrange(self):
        # Propagating through two of three spans equals applying the span
        # channel (with the full link's thermal occupation) twice by hand.
        from cvqkd_multispan.gaussian import embed_on_modes
        from cvqkd_multispan.link import amplifier_map, thermal_loss_map

        cfg = _config(60.0, 3, eps=0.02, kind=AmplifierKind.PIA, gain=1.1)
        partial = propagate_link(tmsv_cm(2.0), cfg, on_mode=1, spans=range(1, 3))
        t, n_bar = span_params(cfg)
        loss = embed_on_modes(thermal_loss_map(t, n_bar), (1,), 2)
        amp = embed_on_modes(amplifier_map(AmplifierKind.PIA, 1.1), (1,), 2)
        manual = tmsv_cm(2.0)
        for _ in range(2):
            manual = apply_cp(apply_cp(manual, loss), amp)
        assert np.abs(partial.data - manual.data).max() <= 1e-13

    def test_rejects_bad_span_index(self):
        cfg = _config(60.0, 3)
        with pytest.raises(ValueError, match="span index"):
            propagate_link(tmsv_cm(2.0), cfg, on_mode=1, spans=range(1, 5))


class TestEffectiveChannel:
    def test_no_amplifier_identity(self):
        # Two spans of T = 0.5 each: t = 0.25 and n = (1 - t)/t + eps = 3.05.
        length = 20.0 * np.log10(2.0) / 0.2
        eff = effective_channel(_config(length, 2, eps=0.05))
        assert eff.t_q == pytest.approx(0.25, rel=1e-12)
        assert eff.n_q == pytest.approx(3.05, rel=1e-10)
        assert eff.t_p == eff.t_q and eff.n_p == eff.n_q

    def test_compensating_gain_singularity(self):
        # G = 1/T makes GT = 1 exactly: t = 1 and n = M (N + N_G).
        length = 20.0 * np.log10(2.0) / 0.2   # T = 0.5 per span at M = 2
        cfg = _config(length, 2, eps=0.05, kind=AmplifierKind.PIA, gain=2.0)
        t, n_bar = span_params(cfg)
        assert t * cfg.gain == pytest.approx(1.0, abs=1e-15)
        eff = effective_channel(cfg)
        noise_single = (1.0 - t) * (1.0 + 2.0 * n_bar) / t
        expected = 2.0 * (noise_single + (cfg.gain - 1.0) / (cfg.gain * t))
        assert eff.t_q == pytest.approx(1.0, abs=1e-12)
        assert eff.n_q == pytest.approx(expected, rel=1e-12)

    def test_psa_unit_gain_matches_benchmark(self):
        psa = effective_channel(_config(70.0, 5, eps=0.03, kind=AmplifierKind.PSA))
        none = effective_channel(_config(70.0, 5, eps=0.03))
        assert psa.t_q == pytest.approx(none.t_q, rel=1e-14)
        assert psa.n_q == pytest.approx(none.n_q, rel=1e-12)
        assert psa.t_p == pytest.approx(psa.t_q, rel=1e-14)

    def test_pia_noise_exceeds_benchmark_on_short_spans(self):
        # The input-referred PIA noise exceeds the unamplified value in the
        # low-loss-per-span regime; on strongly lossy spans the shrinking
        # geometric factor can outweigh the amplifier noise and reverse the
        # ordering, so this is not a universal inequality.
        base = effective_channel(_config(8.0, 4, eps=0.05))
        amped = effective_channel(_config(8.0, 4, eps=0.05,
                                          kind=AmplifierKind.PIA, gain=1.05))
        assert amped.n_q > base.n_q
        assert amped.t_q > base.t_q

    def test_pia_transmissivity_always_increases(self):
        for length in (8.0, 80.0, 160.0):
            base = effective_channel(_config(length, 4, eps=0.05))
            amped = effective_channel(_config(length, 4, eps=0.05,
                                              kind=AmplifierKind.PIA, gain=1.2))
            assert amped.t_q > base.t_q

    def test_psa_quadrature_ordering(self):
        base = effective_channel(_config(80.0, 4, eps=0.05))
        amped = effective_channel(_config(80.0, 4, eps=0.05,
                                          kind=AmplifierKind.PSA, gain=1.2))
        assert amped.t_p <= base.t_q <= amped.t_q
        assert amped.n_q <= base.n_q <= amped.n_p


class TestContinuousLimit:
    def test_unit_gain_reduces_to_total_channel(self):
        cfg = _config(50.0, 8, eps=0.05)
        limit = continuous_limit_channel(cfg, 1.0)
        t_n = 0.1
        n_bar = t_n * 0.05 / (2.0 * (1.0 - t_n))
        assert limit.t_q == pytest.approx(t_n, rel=1e-12)
        assert limit.n_q == pytest.approx((1.0 - t_n) / t_n * (1.0 + 2.0 * n_bar),
                                          rel=1e-12)
        assert limit.n_q == pytest.approx(limit.n_p, rel=1e-12)

    def test_finite_m_converges(self):
        result = check_continuous_limit()
        assert result.passed, result.detail

    def test_convergence_is_monotone_in_span_count(self):
        cfg = _config(50.0, 1, eps=0.05)
        limit = continuous_limit_channel(cfg, 1.5)
        gaps = []
        for m in (2, 5, 10, 64):
            finite = effective_channel(
                dataclasses.replace(cfg, spans=m, amplifier=AmplifierKind.PSA,
                                    gain=1.5 ** (1.0 / m)))
            gaps.append(abs(finite.n_q - limit.n_q) / limit.n_q)
        assert all(a > b for a, b in zip(gaps, gaps[1:]))

    def test_compensating_total_gain_singularity(self):
        # G_inf * T_n = 1: the noise factor degenerates to -ln(T_n) (1 + 2 n_bar).
        cfg = _config(10.0 * np.log10(1.25) / 0.2, 1, eps=0.05)   # T_n = 0.8
        limit = continuous_limit_channel(cfg, 1.25)
        n_bar = 0.8 * 0.05 / (2.0 * 0.2)
        assert limit.n_q == pytest.approx(-np.log(0.8) * (1.0 + 2.0 * n_bar), rel=1e-12)
        # Series check: approach the singular gain from nearby values.
        near = continuous_limit_channel(cfg, 1.25 * (1.0 + 1e-7))
        assert near.n_q == pytest.approx(limit.n_q, rel=1e-6)

    def test_rejects_lossless_link(self):
        with pytest.raises(ValueError, match="lossy"):
            continuous_limit_channel(_config(0.0, 1), 1.2)


class TestGainConstraint:
    def test_case_ii_value(self):
        assert gain_constraint_max(10.0, 0.9, 0.0, ProtocolCase.CASE_IIA) == \
            pytest.approx(10.0 / 9.1, rel=1e-12)

    def test_case_i_value(self):
        assert gain_constraint_max(10.0, 0.9, 0.0, ProtocolCase.CASE_I) == \
            pytest.approx(11.0 / 10.1, rel=1e-12)

    def test_lossless_span_leaves_no_headroom(self):
        assert gain_constraint_max(7.0, 1.0, 0.0, ProtocolCase.CASE_IIB) == \
            pytest.approx(1.0, abs=1e-15)

    def test_benchmark_gain_is_unity(self):
        assert gain_constraint_max(10.0, 0.9, 0.1, ProtocolCase.NO_AMPLIFIER) == 1.0

    def test_power_constraint_holds_below_budget(self):
        result = check_power_constraint_reduction(trials=100)
        assert result.passed, result.detail

    def test_power_constraint_detects_violation(self):
        cfg = _config(10.0 * np.log10(1.0 / 0.9) / 0.2, 3,
                      kind=AmplifierKind.PSA, gain=1.2)
        # G_max = 10/(1 + 0.9*9) ~ 1.099 < 1.2: the first span already violates.
        assert not check_power_constraint(cfg, 10.0)

    def test_power_constraint_trivial_without_amplifier(self):
        assert check_power_constraint(_config(100.0, 5, eps=0.3), 1.5)


class TestSharedCm:
    def test_lossless_link_returns_tmsv(self):
        cfg = _config(0.0, 3, kind=AmplifierKind.PIA, gain=1.0)
        assert np.allclose(shared_cm(cfg, 4.0, ProtocolCase.CASE_I).data,
                           tmsv_cm(4.0).data)

    def test_matches_generic_engine(self):
        cfg = _config(75.0, 4, eps=0.04, kind=AmplifierKind.PSA, gain=1.08)
        closed = shared_cm(cfg, 6.0, ProtocolCase.CASE_IIA)
        generic = propagate_link(tmsv_cm(6.0), cfg, on_mode=1)
        assert np.abs(closed.data - generic.data).max() <= 1e-12

    def test_psa_monotonicity_in_gain(self):
        cfg = _config(60.0, 5, eps=0.05, kind=AmplifierKind.PSA, gain=1.15)
        cm = shared_cm(cfg, 5.0, ProtocolCase.CASE_IIB)
        b_q, b_p = cm.data[2, 2], cm.data[3, 3]
        z_q, z_p = cm.data[0, 2], -cm.data[1, 3]
        assert b_q >= b_p
        assert z_q >= z_p

    def test_rejects_sub_vacuum_modulation(self):
        with pytest.raises(ValueError, match="sub-vacuum"):
            shared_cm(_config(10.0, 2), 0.5, ProtocolCase.NO_AMPLIFIER)
