import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import donordot as dd
from donordot.constants import E_AF_MEV

from conftest import DONOR_CAPS, DOT_CAPS, donor_spec, dot_spec, make_device

DONOR = dd.CapacitanceSet(**DONOR_CAPS)
DOT = dd.CapacitanceSet(**DOT_CAPS)

caps_strategy = st.builds(
    dd.CapacitanceSet,
    *(st.floats(0.05, 50.0) for _ in range(4)),
)


class TestClosedForms:
    def test_total_capacitance(self):
        assert dd.total_capacitance(DONOR) == pytest.approx(5.87, abs=1e-12)
        assert dd.total_capacitance(DOT) == pytest.approx(29.21, abs=1e-12)
        assert dd.total_capacitance(dd.CapacitanceSet(1, 1, 1, 1)) == 4.0

    def test_charging_energy(self):
        assert dd.charging_energy(DONOR) == pytest.approx(27.3, abs=0.1)
        assert dd.charging_energy(DOT) == pytest.approx(5.5, abs=0.1)
        doubled = dd.CapacitanceSet(*(2 * v for v in DONOR_CAPS.values()))
        assert dd.charging_energy(doubled) == pytest.approx(
            dd.charging_energy(DONOR) / 2, rel=1e-12
        )

    def test_lever_arm(self):
        assert dd.lever_arm(DONOR) == pytest.approx(0.245, abs=1e-3)
        assert dd.lever_arm(DOT) == pytest.approx(0.220, abs=1e-3)
        half = dd.CapacitanceSet(c_source=1.0, c_drain=1.0, c_gate=2.5, c_back=0.5)
        assert dd.lever_arm(half) == pytest.approx(0.5, rel=1e-12)

    def test_diamond_slopes(self):
        pos, neg = dd.diamond_slopes(DONOR)
        assert pos == pytest.approx(0.3564, abs=5e-4)
        assert neg == pytest.approx(-0.7869, abs=5e-4)
        pos, neg = dd.diamond_slopes(DOT)
        assert pos == pytest.approx(0.3149, abs=5e-4)
        assert neg == pytest.approx(-0.7351, abs=5e-4)

    def test_diamond_slopes_degenerate(self):
        # zero capacitances never construct
        with pytest.raises(ValueError):
            dd.CapacitanceSet(0.0, 1.0, 0.0, 0.0)

        # the guard itself, via a duck-typed stand-in for c_drain >= total
        @dataclass
        class Degenerate:
            c_source: float
            c_drain: float
            c_gate: float
            c_back: float

            @property
            def total(self):
                return self.c_drain

        with pytest.raises(ValueError, match="degenerate"):
            dd.diamond_slopes(Degenerate(0.0, 1.0, 0.0, 0.0))

    def test_backgate_slope(self):
        assert dd.backgate_slope(DONOR) == pytest.approx(-0.597, abs=1e-3)
        assert dd.backgate_slope(DOT) == pytest.approx(-0.399, abs=1e-3)
        sym = dd.CapacitanceSet(1.0, 1.0, 0.7, 0.7)
        assert dd.backgate_slope(sym) == pytest.approx(-1.0, rel=1e-12)

    def test_peak_spacing(self):
        assert dd.peak_spacing(DOT) == pytest.approx(24.9, abs=0.05)
        assert dd.peak_spacing(DONOR) == pytest.approx(111.2, abs=0.1)
        doubled = dd.CapacitanceSet(
            DONOR.c_source, DONOR.c_drain, 2 * DONOR.c_gate, DONOR.c_back
        )
        assert dd.peak_spacing(doubled) == pytest.approx(
            dd.peak_spacing(DONOR) / 2, rel=1e-12
        )

    @settings(max_examples=200)
    @given(caps_strategy)
    def test_charging_energy_times_total_is_e2(self, caps):
        assert dd.charging_energy(caps) * dd.total_capacitance(caps) == pytest.approx(
            E_AF_MEV, rel=1e-12
        )

    @settings(max_examples=200)
    @given(caps_strategy)
    def test_lever_arm_bounded(self, caps):
        assert 0.0 < dd.lever_arm(caps) < 1.0

    @settings(max_examples=200)
    @given(caps_strategy)
    def test_diamond_closure(self, caps):
        # gate extent reconstructed from the two slopes at the apex height
        # equals the peak spacing e/c_gate
        pos, neg = dd.diamond_slopes(caps)
        height = dd.charging_energy(caps)
        extent = height / pos + height / abs(neg)
        assert extent == pytest.approx(dd.peak_spacing(caps), rel=1e-12)

    @settings(max_examples=200)
    @given(caps_strategy)
    def test_diamond_slopes_signs(self, caps):
        pos, neg = dd.diamond_slopes(caps)
        assert pos > 0 > neg


class TestSpectrum:
    def test_donor_filling(self):
        spectrum = dd.DotSpectrum.discrete([(0.0, 2), (15.4, 2)])
        assert [spectrum.filling_energy(n) for n in range(5)] == [
            0.0, 0.0, 0.0, 15.4, 30.8,
        ]
        assert spectrum.capacity == 4

    def test_donor_entry_multiplicities(self):
        spectrum = dd.DotSpectrum.discrete([(0.0, 2), (15.4, 2)])
        assert [spectrum.entry_level(n) for n in (1, 2, 3, 4)] == [
            (0.0, 2, 1), (0.0, 1, 2), (15.4, 2, 1), (15.4, 1, 2),
        ]
        with pytest.raises(ValueError):
            spectrum.entry_level(5)

    def test_metallic(self):
        spectrum = dd.DotSpectrum.metallic()
        assert spectrum.capacity is None
        assert spectrum.filling_energy(100) == 0.0
        assert spectrum.entry_level(37) == (0.0, 1, 1)

    def test_validation(self):
        with pytest.raises(ValueError):
            dd.DotSpectrum.discrete([(1.0, 2)])  # first offset nonzero
        with pytest.raises(ValueError):
            dd.DotSpectrum.discrete([(0.0, 2), (-1.0, 2)])  # decreasing
        with pytest.raises(ValueError):
            dd.DotSpectrum.discrete([(0.0, 0)])  # degeneracy < 1
        with pytest.raises(ValueError):
            dd.DotSpectrum(levels=((0.0, 2),), kind="metallic")

    def test_window_exceeds_capacity(self):
        with pytest.raises(ValueError, match="slots"):
            donor_spec(window=(0, 5))


class TestDeviceValidation:
    def test_temperature_and_mutual(self):
        with pytest.raises(ValueError):
            make_device(temperature=0.0)
        with pytest.raises(ValueError):
            make_device(c_mutual=-1.0)

    def test_gamma_positive(self):
        with pytest.raises(ValueError):
            donor_spec(gamma_source=0.0)

    def test_window_validation(self):
        with pytest.raises(ValueError):
            donor_spec(window=(3, 2))
        with pytest.raises(ValueError):
            donor_spec(window=(-1, 2))

    def test_bias_point_finite(self):
        with pytest.raises(ValueError):
            dd.BiasPoint(v_gate=math.nan)


class TestEnergies:
    def test_empty_state_zero(self):
        device = make_device()
        assert dd.electrostatic_energy(device, (0, 0), dd.BiasPoint()) == 0.0

    def test_donor_addition_energy(self):
        device = make_device()
        bias = dd.BiasPoint()
        u = [dd.electrostatic_energy(device, (n, 0), bias) for n in (0, 1, 2)]
        addition = (u[2] - u[1]) - (u[1] - u[0])
        assert addition == pytest.approx(27.3, abs=0.1)

    def test_cross_addition_with_mutual(self):
        device = make_device(c_mutual=5.0)
        bias = dd.BiasPoint(v_gate=100.0, v_back=-30.0)
        u = {
            state: dd.electrostatic_energy(device, state, bias)
            for state in [(0, 0), (1, 0), (0, 1), (1, 1)]
        }
        cross = u[(1, 1)] - u[(1, 0)] - u[(0, 1)] + u[(0, 0)]
        # oracle: direct 2x2 inversion of the capacitance matrix
        matrix = np.array([[5.87 + 5.0, -5.0], [-5.0, 29.21 + 5.0]])
        expected = E_AF_MEV * np.linalg.inv(matrix)[0, 1]
        assert cross > 0.0
        assert cross == pytest.approx(expected, rel=1e-12)

    def test_out_of_window(self):
        device = make_device()
        with pytest.raises(ValueError):
            dd.electrostatic_energy(device, (5, 0), dd.BiasPoint())

    @settings(max_examples=100)
    @given(
        st.integers(0, 4),
        st.integers(0, 18),
        st.floats(-200, 200),
        st.floats(-200, 200),
        st.floats(-50, 50),
    )
    def test_mutual_zero_separates(self, n, m, vg, vb, vd):
        device = make_device(c_mutual=0.0)
        bias = dd.BiasPoint(v_drain=vd, v_gate=vg, v_back=vb)
        combined = dd.electrostatic_energy(device, (n, m), bias)

        def single_energy(spec, k):
            caps = spec.caps
            drive = (
                caps.c_drain * vd + caps.c_gate * vg + caps.c_back * vb
            ) / E_AF_MEV
            charge = drive - k
            return (
                0.5 * E_AF_MEV * charge**2 / caps.total
                + spec.spectrum.filling_energy(k)
                + k * spec.level_offset
            )

        expected = single_energy(device.donor, n) + single_energy(device.dot, m)
        assert combined == pytest.approx(expected, rel=1e-12, abs=1e-12)

    @settings(max_examples=100)
    @given(
        st.integers(1, 17),
        st.floats(-100, 100),
        st.floats(-100, 100),
        st.floats(-40, 40),
        st.floats(-40, 40),
    )
    def test_metallic_addition_energy_bias_independent(self, m, vg, vb, vd, vs):
        device = make_device()
        bias = dd.BiasPoint(v_source=vs, v_drain=vd, v_gate=vg, v_back=vb)
        u = [dd.electrostatic_energy(device, (0, k), bias) for k in (m - 1, m, m + 1)]
        addition = u[2] - 2 * u[1] + u[0]
        assert addition == pytest.approx(dd.charging_energy(device.dot.caps), rel=1e-9)


class TestElectrochemicalPotential:
    def test_donor_ladder(self):
        device = make_device()
        bias = dd.BiasPoint()
        mu = [
            dd.electrochemical_potential(device, 0, (n, 0), bias) for n in (1, 2, 3, 4)
        ]
        e_ch = dd.charging_energy(device.donor.caps)
        # pairing in the ground doublet first: the valley offset enters at
        # the third electron
        assert mu[1] - mu[0] == pytest.approx(e_ch, rel=1e-9)
        assert mu[2] - mu[1] == pytest.approx(e_ch + 15.4, rel=1e-9)
        assert mu[3] - mu[2] == pytest.approx(e_ch, rel=1e-9)

    def test_metallic_ladder(self):
        device = make_device()
        bias = dd.BiasPoint()
        e_ch = dd.charging_energy(device.dot.caps)
        for m in range(1, 18):
            step = dd.electrochemical_potential(
                device, 1, (0, m + 1), bias
            ) - dd.electrochemical_potential(device, 1, (0, m), bias)
            assert step == pytest.approx(e_ch, rel=1e-9)

    def test_gate_shift_matches_lever_arm(self):
        device = make_device()
        delta = 7.0
        mu0 = dd.electrochemical_potential(device, 0, (1, 0), dd.BiasPoint())
        mu1 = dd.electrochemical_potential(
            device, 0, (1, 0), dd.BiasPoint(v_gate=delta)
        )
        alpha = dd.lever_arm(device.donor.caps)
        assert mu0 - mu1 == pytest.approx(alpha * delta, rel=1e-9)

    def test_preconditions(self):
        device = make_device()
        with pytest.raises(ValueError):
            dd.electrochemical_potential(device, 0, (0, 0), dd.BiasPoint())
        with pytest.raises(ValueError):
            dd.electrochemical_potential(device, 0, (5, 0), dd.BiasPoint())
        with pytest.raises(ValueError):
            dd.electrochemical_potential(device, 2, (1, 0), dd.BiasPoint())


class TestAnticrossingShift:
    def test_reference_values(self):
        device = make_device(c_mutual=5.0)
        assert dd.anticrossing_shift(device) == pytest.approx(19.7, abs=0.05)
        assert dd.anticrossing_shift(device, include_mutual=True) == pytest.approx(
            16.7, abs=0.05
        )

    def test_no_mutual_no_shift(self):
        assert dd.anticrossing_shift(make_device(c_mutual=0.0)) == 0.0

    def test_monotone_in_mutual(self):
        upper = 0.5 * min(5.87, 29.21)
        values = [
            dd.anticrossing_shift(make_device(c_mutual=cm))
            for cm in np.linspace(0.05, upper * 0.999, 25)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))
