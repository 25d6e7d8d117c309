import math

import numpy as np
import pytest

from tls_scope.ensemble import Ensemble, ControlChain
from tls_scope.spectro import (
    SegmentSpec,
    coupled_pair_t1_map,
    default_sweep_plan,
    t1_map,
)
from tls_scope.coupled import CoupledPair
from tls_scope.stm import Location, SensorDesign, TlsParams

DESIGN = SensorDesign(
    d=50e-9, area=0.25e-6 * 0.30e-6, eps_r=10.0, c_tot=100e-15,
    omega10=2 * math.pi * 6.2e9, t1_qubit=4.3,
)
FREQ = np.arange(5.8, 6.7, 0.002)


def empty_ensemble():
    return Ensemble(tls_list=(), seed=0, p0_target=0.0, volume_um3=1.0, band=(5.8, 6.7))


def one_tls_ensemble(tls):
    return Ensemble(tls_list=(tls,), seed=0, p0_target=0.0, volume_um3=1.0, band=(5.8, 6.7))


def sample_segment(n=60):
    return [
        SegmentSpec(
            control="sample",
            bias=np.linspace(-2.4e-3, 2.4e-3, n),
            held={"v_p": 0.0, "v_g": 0.0},
            direction="up",
        )
    ]


class TestSweepPlan:
    def test_default_structure(self):
        plan = default_sweep_plan()
        assert len(plan) == 8
        assert [s.control for s in plan] == [
            "global", "sample", "piezo", "sample",
            "global", "sample", "piezo", "sample",
        ]

    def test_sample_alternates_direction(self):
        plan = default_sweep_plan()
        sample = [s for s in plan if s.control == "sample"]
        assert [s.direction for s in sample] == ["up", "down", "up", "down"]
        amp = 0.5 / 205.0
        assert sample[0].bias[-1] == pytest.approx(amp)
        assert sample[1].bias[-1] == pytest.approx(-amp)

    def test_monotone_ramps_cover_ranges(self):
        plan = default_sweep_plan(v_g_range=(90.0, -30.0))
        glob = [s for s in plan if s.control == "global"]
        assert glob[0].bias[0] == 90.0
        assert glob[-1].bias[-1] == -30.0
        for s in glob:
            assert np.all(np.diff(s.bias) < 0)

    def test_held_values_continuous(self):
        plan = default_sweep_plan()
        state = {"v_p": 90.0, "v_g": 90.0, "v_s": 0.0}
        attr = {"piezo": "v_p", "global": "v_g", "sample": "v_s"}
        for seg in plan:
            a = attr[seg.control]
            for k, v in seg.held.items():
                assert v == pytest.approx(state[k])
            assert seg.bias[0] == pytest.approx(state[a])
            state[a] = seg.bias[-1]

    def test_cold_end_amplitude_from_chain(self):
        plan = default_sweep_plan(v_s_source_amplitude=0.41)
        sample = [s for s in plan if s.control == "sample"][0]
        assert sample.bias.max() == pytest.approx(0.41 / 205.0)


class TestT1Map:
    def test_flat_reference_qubit(self):
        ds = t1_map(empty_ensemble(), DESIGN, sample_segment(), FREQ,
                    gamma1_background=1 / 4.3, noise_sigma=0.0, seed=0)
        assert np.allclose(ds.t1_us[0], 4.3, rtol=1e-12)

    def test_on_resonance_increment_closed_form(self):
        # g = 1 MHz, Gamma2 = 2*(2pi) 1/us: on-resonance extra rate is
        # 2*(2pi*1)^2/(2*2pi) = 2pi 1/us, computed by hand.
        tls = TlsParams(delta0=6.25, gamma2_tls=2 * (2 * math.pi))
        ens = one_tls_ensemble(tls)
        freq = np.array([6.25 + k * 0.002 for k in range(-200, 201)])
        seg = [SegmentSpec(control="sample", bias=np.array([0.0, 1e-6, 2e-6]),
                           held={"v_p": 0.0, "v_g": 0.0}, direction="up")]
        # field chosen so that g is exactly 1 MHz at the symmetry point
        from tls_scope.constants import CM_PER_EA, H_PLANCK
        field = 1e6 * H_PLANCK / (0.3 * CM_PER_EA)
        ens = one_tls_ensemble(
            TlsParams(delta0=6.25, p_parallel=0.3, gamma2_tls=2 * (2 * math.pi))
        )
        g10 = 0.1
        ds = t1_map(ens, DESIGN, seg, freq, gamma1_background=g10,
                    noise_sigma=0.0, seed=0, field_rms=field)
        idx = np.argmin(np.abs(freq - 6.25))
        on_res = ds.t1_us[0][0, idx]
        expected = 1.0 / (g10 + 2 * math.pi)
        assert on_res == pytest.approx(expected, rel=1e-9)

    def test_far_detuned_lorentzian_tail(self):
        tls = TlsParams(delta0=60.0, p_parallel=0.4)  # 50+ GHz away
        ds = t1_map(one_tls_ensemble(tls), DESIGN, sample_segment(), FREQ,
                    gamma1_background=1 / 4.3, noise_sigma=0.0, seed=0)
        assert np.allclose(ds.t1_us[0], 4.3, rtol=1e-6)

    def test_superposition_far_detuned_tls(self):
        # Adding a defect > 100 linewidths away changes no cell by > 0.1%.
        near = TlsParams(delta0=6.2, p_parallel=0.4)
        base = t1_map(one_tls_ensemble(near), DESIGN, sample_segment(), FREQ,
                      gamma1_background=1 / 4.3, noise_sigma=0.0, seed=0)
        # linewidth Gamma2/(2pi) = 1 MHz; 150 linewidths above the band top
        far = TlsParams(delta0=FREQ[-1] + 0.150, p_parallel=0.15)
        both = t1_map(Ensemble(tls_list=(near, far), seed=0, p0_target=0.0,
                               volume_um3=1.0, band=(5.8, 6.7)),
                      DESIGN, sample_segment(), FREQ,
                      gamma1_background=1 / 4.3, noise_sigma=0.0, seed=0)
        rel = np.abs(both.t1_us[0] - base.t1_us[0]) / base.t1_us[0]
        assert rel.max() < 1e-3

    def test_matrix_element_weakens_dips_off_symmetry(self):
        tls = TlsParams(delta0=5.9, gamma_s=400.0, p_parallel=0.4,
                        location=Location.SAMPLE_DIELECTRIC)
        ds = t1_map(one_tls_ensemble(tls), DESIGN, sample_segment(120), FREQ,
                    gamma1_background=1 / 4.3, noise_sigma=0.0, seed=0)
        t1 = ds.t1_us[0]
        dips = t1.min(axis=1)
        mid = np.argmin(np.abs(ds.segments[0].bias))
        assert dips[mid] < dips[0] < 4.3  # deepest dip at the symmetry point

    def test_determinism_and_noise_reproducibility(self):
        tls = TlsParams(delta0=6.0, gamma_s=300.0, p_parallel=0.4,
                        location=Location.SAMPLE_DIELECTRIC)
        kwargs = dict(gamma1_background=1 / 4.3, noise_sigma=0.1, seed=9)
        a = t1_map(one_tls_ensemble(tls), DESIGN, sample_segment(), FREQ, **kwargs)
        b = t1_map(one_tls_ensemble(tls), DESIGN, sample_segment(), FREQ, **kwargs)
        assert all(np.array_equal(x, y) for x, y in zip(a.t1_us, b.t1_us))
        c = t1_map(one_tls_ensemble(tls), DESIGN, sample_segment(), FREQ,
                   gamma1_background=1 / 4.3, noise_sigma=0.1, seed=10)
        assert not np.array_equal(a.t1_us[0], c.t1_us[0])

    def test_bias_limit_enforced(self):
        seg = [SegmentSpec(control="sample", bias=np.linspace(-4e-3, 4e-3, 10),
                           held={"v_p": 0.0, "v_g": 0.0}, direction="up")]
        with pytest.raises(ValueError):
            t1_map(empty_ensemble(), DESIGN, seg, FREQ,
                   gamma1_background=0.2, noise_sigma=0.0, seed=0)

    def test_freq_axis_validation(self):
        with pytest.raises(ValueError):
            t1_map(empty_ensemble(), DESIGN, sample_segment(),
                   np.array([6.0, 5.9, 6.1]), gamma1_background=0.2,
                   noise_sigma=0.0, seed=0)


class TestCoupledPanel:
    def test_two_branches_visible(self):
        t1p = TlsParams(delta0=5.957, gamma_s=161.95, gamma_p=0.022, p_parallel=0.335,
                        location=Location.SAMPLE_DIELECTRIC)
        t2p = TlsParams(delta0=5.440, eps_i=2.55, gamma_s=92.25, p_parallel=0.191,
                        location=Location.SAMPLE_DIELECTRIC)
        pair = CoupledPair(t1p, t2p, g_z=25.0, g_x=-19.0)
        freq = np.arange(5.90, 6.05, 0.001)
        ds = coupled_pair_t1_map(pair, np.linspace(-2.4e-3, 2.4e-3, 80), 0.0,
                                 freq, field_rms=90.0, gamma1_background=1 / 4.3)
        # at the crossing bias, two dips separated by ~|g_x|
        from tls_scope.coupled import transitions_truncated
        t1 = ds.t1_us[0]
        assert (t1 < 2.0).any()
