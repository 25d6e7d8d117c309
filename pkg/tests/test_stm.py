import math

import numpy as np
import pytest

from tls_scope.errors import SchemaError
from tls_scope.stm import (
    BiasPoint,
    Location,
    SensorDesign,
    TlsParams,
    asymmetry,
    coupling_strength,
    design_thickness,
    dipole_to_gamma_s,
    gamma_s_to_dipole,
    matrix_element,
    sample_capacitance,
    transition_energy,
    vacuum_voltage,
)

ZERO = BiasPoint()


def design(d=50e-9, area=0.25e-6 * 0.30e-6, eps_r=10.0, c_tot=100e-15,
           f10=6.2e9, t1=4.3):
    return SensorDesign(d=d, area=area, eps_r=eps_r, c_tot=c_tot,
                        omega10=2 * math.pi * f10, t1_qubit=t1)


class TestAsymmetry:
    def test_zero_case(self):
        tls = TlsParams(delta0=5.0)
        assert asymmetry(tls, BiasPoint(v_p=40.0, v_g=-12.0, v_s=1e-3)) == 0.0

    def test_sample_bias_term(self):
        tls = TlsParams(delta0=5.0, eps_i=1.0, gamma_s=161.95)
        assert asymmetry(tls, BiasPoint(v_s=0.001)) == pytest.approx(1.16195, abs=1e-12)

    def test_piezo_cancels_intrinsic(self):
        tls = TlsParams(delta0=5.0, eps_i=1.0, gamma_p=0.022)
        assert asymmetry(tls, BiasPoint(v_p=-45.45)) == pytest.approx(0.0, abs=1e-4)

    def test_linear_in_each_control(self):
        tls = TlsParams(delta0=5.0, eps_i=0.3, gamma_p=0.02, gamma_g=0.01, gamma_s=90.0)
        b1 = BiasPoint(v_p=10.0, v_g=5.0, v_s=1e-3)
        expected = 0.3 + 0.02 * 10 + 0.01 * 5 + 90 * 1e-3
        assert asymmetry(tls, b1) == pytest.approx(expected, rel=1e-15)


class TestTransitionEnergy:
    def test_symmetry_point(self):
        assert transition_energy(TlsParams(delta0=5.957), ZERO) == 5.957

    def test_pythagorean(self):
        tls = TlsParams(delta0=3.0, eps_i=4.0)
        assert transition_energy(tls, ZERO) == pytest.approx(5.0, rel=1e-15)

    def test_direct_evaluation(self):
        tls = TlsParams(delta0=5.440, eps_i=1.0)
        assert transition_energy(tls, ZERO) == pytest.approx(5.531148162904335, rel=1e-12)

    def test_even_in_eps_and_monotone(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            d0 = rng.uniform(0.5, 8)
            e = rng.uniform(0, 6)
            up = transition_energy(TlsParams(delta0=d0, eps_i=e), ZERO)
            dn = transition_energy(TlsParams(delta0=d0, eps_i=-e), ZERO)
            assert up == pytest.approx(dn, rel=1e-15)
            bigger = transition_energy(TlsParams(delta0=d0, eps_i=e + 0.1), ZERO)
            assert bigger > up
            assert up >= d0

    def test_hyperbola_vertex_is_delta0(self):
        tls = TlsParams(delta0=5.2, eps_i=0.4, gamma_s=200.0)
        v = np.linspace(-2.5e-3, 2.5e-3, 2001)
        es = [transition_energy(tls, BiasPoint(v_s=x)) for x in v]
        assert min(es) == pytest.approx(5.2, rel=1e-7)


class TestMatrixElement:
    def test_unity_at_symmetry(self):
        assert matrix_element(TlsParams(delta0=4.0), ZERO) == 1.0

    def test_three_four_five(self):
        assert matrix_element(TlsParams(delta0=3.0, eps_i=4.0), ZERO) == pytest.approx(0.6)

    def test_equal_split(self):
        tls = TlsParams(delta0=5.957, eps_i=5.957)
        assert matrix_element(tls, ZERO) == pytest.approx(1 / math.sqrt(2), rel=1e-15)

    def test_pythagorean_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            tls = TlsParams(delta0=rng.uniform(0.1, 9), eps_i=rng.uniform(-9, 9))
            me = matrix_element(tls, ZERO)
            ratio = asymmetry(tls, ZERO) / transition_energy(tls, ZERO)
            assert me**2 + ratio**2 == pytest.approx(1.0, rel=1e-12)


class TestCouplingStrength:
    def test_zero_dipole(self):
        assert coupling_strength(TlsParams(delta0=5.0), 90.0, ZERO) == 0.0

    def test_sample_capacitor_field(self):
        # 0.1 eA at the 90 V/m capacitor field: g = p*F/h ~ 0.218 MHz
        tls = TlsParams(delta0=5.0, p_parallel=0.1)
        g = coupling_strength(tls, 90.0, ZERO)
        assert g == pytest.approx(0.2176, rel=1e-3)

    def test_junction_field_six_times_weaker(self):
        tls = TlsParams(delta0=5.0, p_parallel=0.1)
        g_sample = coupling_strength(tls, 90.0, ZERO)
        g_junction = coupling_strength(tls, 15.0, ZERO)
        assert g_sample == pytest.approx(6.0 * g_junction, rel=1e-15)

    def test_linear_in_dipole_and_field(self):
        b = ZERO
        g1 = coupling_strength(TlsParams(delta0=5.0, p_parallel=0.2), 30.0, b)
        g2 = coupling_strength(TlsParams(delta0=5.0, p_parallel=0.4), 30.0, b)
        g3 = coupling_strength(TlsParams(delta0=5.0, p_parallel=0.2), 60.0, b)
        assert g2 == pytest.approx(2 * g1, rel=1e-15)
        assert g3 == pytest.approx(2 * g1, rel=1e-15)


class TestDesignRules:
    def test_vacuum_voltage_paper_value(self):
        assert vacuum_voltage(design()) * 1e6 == pytest.approx(4.5, rel=0.02)

    def test_vacuum_voltage_quarter_capacitance(self):
        v100 = vacuum_voltage(design(c_tot=100e-15))
        v25 = vacuum_voltage(design(c_tot=25e-15))
        assert v25 == pytest.approx(2 * v100, rel=1e-12)
        assert v25 * 1e6 == pytest.approx(9.06, rel=5e-3)

    def test_thickness_rule_paper_value(self):
        d = design_thickness(0.1, 1e-6, 4.5e-6)
        assert d * 1e9 == pytest.approx(68.4, rel=5e-3)
        assert d * 1e9 == pytest.approx(70.0, rel=0.05)

    def test_thickness_linear_in_t1(self):
        assert design_thickness(0.1, 2e-6, 4.5e-6) == pytest.approx(
            2 * design_thickness(0.1, 1e-6, 4.5e-6), rel=1e-15
        )

    def test_thickness_big_dipole(self):
        assert design_thickness(0.335, 1e-6, 4.5e-6) * 1e9 == pytest.approx(229.0, rel=5e-3)

    def test_sample_capacitance_second_generation(self):
        c = sample_capacitance(design())
        assert c * 1e15 == pytest.approx(0.1328, rel=1e-3)
        assert c * 1e15 == pytest.approx(0.15, rel=0.2)

    def test_sample_capacitance_linear_in_area(self):
        c1 = sample_capacitance(design())
        c2 = sample_capacitance(design(area=2 * 0.25e-6 * 0.30e-6))
        assert c2 == pytest.approx(2 * c1, rel=1e-15)

    def test_sample_capacitance_first_generation(self):
        big = design(area=0.3e-6 * 2.1e-6)
        assert sample_capacitance(big) * 1e15 == pytest.approx(1.1156, rel=1e-3)

    def test_loading_warning_when_capacitor_dominates(self):
        with pytest.warns(UserWarning):
            design(area=40 * 0.3e-6 * 2.1e-6)  # C_s > 5% of C_tot


class TestDipoleConversion:
    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            p = rng.uniform(0.01, 2.0)
            d = rng.uniform(10e-9, 200e-9)
            gamma = dipole_to_gamma_s(p, d)
            assert gamma_s_to_dipole(gamma, d) == pytest.approx(p, rel=1e-12)

    def test_supp_table_rates(self):
        assert gamma_s_to_dipole(161.95, 50e-9) == pytest.approx(0.1674, rel=1e-3)
        assert gamma_s_to_dipole(92.25, 50e-9) == pytest.approx(0.0954, rel=2e-3)


class TestValidation:
    def test_delta0_positive(self):
        with pytest.raises(ValueError):
            TlsParams(delta0=0.0)

    def test_gamma2_vs_gamma1(self):
        with pytest.raises(ValueError):
            TlsParams(delta0=1.0, gamma1_tls=4.0, gamma2_tls=1.0)

    def test_dipole_magnitude(self):
        with pytest.raises(ValueError):
            TlsParams(delta0=1.0, p_parallel=-0.1)

    def test_location_consistency(self):
        with pytest.raises(ValueError):
            TlsParams(delta0=1.0, location=Location.SAMPLE_DIELECTRIC)
        with pytest.raises(ValueError):
            TlsParams(delta0=1.0, gamma_s=10.0, location=Location.JUNCTION)

    def test_bias_safety_limit(self):
        with pytest.raises(ValueError):
            BiasPoint(v_s=3e-3)
        BiasPoint(v_s=3e-3, v_s_limit=5e-3)

    def test_design_positive(self):
        with pytest.raises(ValueError):
            design(d=-1e-9)


class TestSerialization:
    def test_tls_round_trip(self):
        tls = TlsParams(delta0=5.957, eps_i=-0.2, gamma_s=161.95, gamma_p=0.022,
                        p_parallel=0.335, location=Location.SAMPLE_DIELECTRIC)
        clone = TlsParams.from_dict(tls.to_dict())
        assert clone == tls

    def test_design_round_trip(self):
        d = design()
        assert SensorDesign.from_dict(d.to_dict()) == d

    def test_unknown_version_rejected(self):
        payload = TlsParams(delta0=1.0).to_dict()
        payload["schema_version"] = 99
        with pytest.raises(SchemaError):
            TlsParams.from_dict(payload)
