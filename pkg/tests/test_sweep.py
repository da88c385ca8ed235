import io
import time

import numpy as np
import pytest

import donordot as dd
from donordot.errors import ConfigError, MapFormatError, SolverError, StateSpaceError
from donordot.sweep import LOG_FLOOR, map_csv_text

from conftest import donor_only, dot_only, make_device


def small_plan(observable="current", **kwargs):
    defaults = dict(
        axis1=dd.SweepAxis("v_gate", 2340.0, 2360.0, 3),
        axis2=dd.SweepAxis("v_drain", -5.0, 5.0, 2),
        fixed={"v_back": 2.0},
        observable=observable,
    )
    defaults.update(kwargs)
    return dd.SweepPlan(**defaults)


class TestPlanValidation:
    def test_bad_steps(self):
        with pytest.raises(ValueError):
            dd.SweepAxis("v_gate", 0.0, 1.0, 1)

    def test_bad_name(self):
        with pytest.raises(ValueError):
            dd.SweepAxis("v_top", 0.0, 1.0, 5)

    def test_duplicate_axes(self):
        axis = dd.SweepAxis("v_gate", 0.0, 1.0, 2)
        with pytest.raises(ValueError):
            dd.SweepPlan(axis1=axis, axis2=axis)

    def test_fixed_fills_missing_terminals(self):
        plan = small_plan()
        assert plan.fixed == {"v_back": 2.0, "v_source": 0.0}

    def test_bias_arrays_row_major(self):
        plan = small_plan()
        arrays = plan.bias_arrays()
        np.testing.assert_array_equal(
            arrays["v_gate"], [2340.0, 2340.0, 2350.0, 2350.0, 2360.0, 2360.0]
        )
        np.testing.assert_array_equal(arrays["v_drain"], [-5.0, 5.0] * 3)
        np.testing.assert_array_equal(arrays["v_back"], [2.0] * 6)


class TestRunSweep:
    def test_matches_scalar_solver(self):
        device = donor_only()
        plan = small_plan()
        result = dd.run_sweep(device, plan)
        for i, vg in enumerate(plan.axis1.values()):
            for j, vdr in enumerate(plan.axis2.values()):
                reference = dd.solve_steady_state(
                    device, dd.BiasPoint(v_drain=vdr, v_gate=vg, v_back=2.0)
                ).i_drain
                assert result.values[i, j] == pytest.approx(reference, rel=1e-8)

    def test_conductance_matches_scalar(self):
        device = donor_only()
        plan = small_plan(observable="conductance")
        result = dd.run_sweep(device, plan)
        reference = dd.conductance(
            device, dd.BiasPoint(v_drain=-5.0, v_gate=2350.0, v_back=2.0)
        )
        assert result.values[1, 0] == pytest.approx(reference, rel=1e-8)

    def test_log_floor(self):
        device = donor_only()
        plan = small_plan(
            observable="log10_conductance",
            axis1=dd.SweepAxis("v_gate", 2400.0, 2410.0, 2),
            axis2=dd.SweepAxis("v_drain", -1.0, 1.0, 2),
        )
        result = dd.run_sweep(device, plan)
        assert (result.values == np.log10(LOG_FLOOR)).all()

    def test_rerun_is_bit_identical(self):
        device = make_device()
        plan = small_plan(observable="conductance")
        first = dd.run_sweep(device, plan, jobs=1)
        second = dd.run_sweep(device, plan, jobs=3)
        assert map_csv_text(first) == map_csv_text(second)

    def test_backends_agree_on_map(self):
        device = make_device()
        plan = small_plan()
        a = dd.run_sweep(device, plan, backend="numpy").values
        b = dd.run_sweep(device, plan, backend="numba").values
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12 * np.abs(a).max())

    def test_state_cap(self):
        with pytest.raises(StateSpaceError):
            dd.run_sweep(make_device(), small_plan(), max_states=10)

    def test_solver_error_carries_coordinates(self, monkeypatch):
        import donordot.sweep as sweep_module

        def boom(pk, vs, vd, vg, vb, jobs=None, backend=None):
            raise SolverError("synthetic failure", grid_index=3)

        monkeypatch.setattr(sweep_module, "currents_batch", boom)
        with pytest.raises(SolverError) as err:
            dd.run_sweep(make_device(), small_plan())
        assert err.value.grid_index == (1, 1)
        assert err.value.axis_values == (2350.0, 5.0)


class TestGroundStateMap:
    def test_single_cell_is_global_minimum(self):
        device = make_device()
        plan = dd.SweepPlan(
            axis1=dd.SweepAxis("v_gate", 2400.0, 2400.1, 2),
            axis2=dd.SweepAxis("v_back", 5.0, 5.1, 2),
            observable="current",
        )
        result = dd.ground_state_map(device, plan)
        states = dd.enumerate_states(
            device, dd.BiasPoint(v_gate=2400.0, v_back=5.0)
        )
        best = min(states, key=lambda s: s.energy)
        assert result.n_donor[0, 0] == best.n_donor
        assert result.m_dot[0, 0] == best.m_dot

    def test_transition_happens_at_peak_voltage(self):
        device = donor_only()
        plan = dd.SweepPlan(
            axis1=dd.SweepAxis("v_gate", 2300.0, 2400.0, 201),
            axis2=dd.SweepAxis("v_back", 0.0, 0.1, 2),
            observable="current",
        )
        result = dd.ground_state_map(device, plan)
        column = result.n_donor[:, 0]
        flips = np.nonzero(np.diff(column))[0]
        assert flips.size == 1
        crossing = plan.axis1.values()[flips[0]]
        assert crossing == pytest.approx(2350.64, abs=0.5)

    def test_requires_gate_axes(self):
        with pytest.raises(ConfigError):
            dd.ground_state_map(make_device(), small_plan())

    def test_requires_zero_drain(self):
        plan = dd.SweepPlan(
            axis1=dd.SweepAxis("v_gate", 0.0, 1.0, 2),
            axis2=dd.SweepAxis("v_back", 0.0, 1.0, 2),
            fixed={"v_drain": 5.0},
            observable="current",
        )
        with pytest.raises(ConfigError):
            dd.ground_state_map(make_device(), plan)


class TestCsvRoundTrip:
    def test_header_format(self):
        device = donor_only()
        plan = small_plan()
        text = map_csv_text(dd.run_sweep(device, plan))
        header = text.splitlines()[0]
        assert header.startswith("# observable=current axis1=v_gate,2340.0,2360.0,3 ")
        assert "axis2=v_drain,-5.0,5.0,2" in header
        assert "fixed=v_back:2.0,v_source:0.0" in header

    def test_conductance_map_round_trip(self):
        device = donor_only()
        result = dd.run_sweep(device, small_plan(observable="conductance"))
        text = map_csv_text(result)
        parsed = dd.read_map_csv(io.StringIO(text))
        assert isinstance(parsed, dd.ConductanceMap)
        np.testing.assert_array_equal(parsed.values, result.values)
        assert parsed.plan == result.plan
        # a second serialization is byte-identical
        assert map_csv_text(parsed) == text

    def test_ground_state_round_trip(self):
        device = make_device()
        plan = dd.SweepPlan(
            axis1=dd.SweepAxis("v_gate", 2340.0, 2360.0, 4),
            axis2=dd.SweepAxis("v_back", 0.0, 4.0, 3),
            observable="current",
        )
        result = dd.ground_state_map(device, plan)
        text = map_csv_text(result)
        parsed = dd.read_map_csv(io.StringIO(text))
        assert isinstance(parsed, dd.GroundStateMap)
        np.testing.assert_array_equal(parsed.n_donor, result.n_donor)
        np.testing.assert_array_equal(parsed.m_dot, result.m_dot)
        assert map_csv_text(parsed) == text

    def test_malformed_inputs(self):
        with pytest.raises(MapFormatError):
            dd.read_map_csv(io.StringIO(""))
        with pytest.raises(MapFormatError):
            dd.read_map_csv(io.StringIO("no header\n1,2,3\n"))
        with pytest.raises(MapFormatError):
            dd.read_map_csv(
                io.StringIO(
                    "# observable=current axis1=v_gate,0.0,1.0,2 axis2=v_drain,0.0,1.0,2\n"
                    "0.0,0.0,1e-12\n"
                )
            )
        with pytest.raises(MapFormatError):
            dd.read_map_csv(
                io.StringIO(
                    "# observable=current axis1=v_gate,0.0,1.0,span axis2=v_drain,0.0,1.0,2\n"
                )
            )


class TestPeakSpacing:
    def test_metallic_dot_peaks_evenly_spaced(self):
        device = dot_only()
        plan = dd.SweepPlan(
            axis1=dd.SweepAxis("v_gate", 2895.0, 2995.0, 501),
            axis2=dd.SweepAxis("v_drain", 0.2, 0.3, 2),
            observable="conductance",
        )
        result = dd.run_sweep(device, plan)
        step = plan.axis1.step
        loci = dd.detect_peaks(result)
        positions = sorted(locus.points[0].position for locus in loci)
        spacings = np.diff(positions)
        assert spacings.size >= 2
        expected = dd.peak_spacing(device.dot.caps)
        assert np.all(np.abs(spacings - expected) <= step)


class TestPerformance:
    def test_65_state_map_under_budget(self):
        import dataclasses

        device = make_device()
        device = dataclasses.replace(
            device, dot=dataclasses.replace(device.dot, window=(0, 12))
        )
        assert len(dd.enumerate_states(device, dd.BiasPoint())) == 65
        plan = dd.SweepPlan(
            axis1=dd.SweepAxis("v_gate", 2300.0, 2800.0, 200),
            axis2=dd.SweepAxis("v_back", -400.0, 0.0, 200),
            fixed={"v_drain": 1.0},
            observable="current",
        )
        dd.run_sweep(device, small_plan())  # warm the JIT cache
        start = time.perf_counter()
        dd.run_sweep(device, plan)
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"200x200 65-state map took {elapsed:.1f} s"
