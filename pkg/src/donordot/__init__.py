"""donordot: transport simulation and parameter extraction for a donor+dot device.

A single donor and an electrostatic quantum dot conduct in parallel
between source and drain, each described by four terminal capacitances,
a level spectrum and bare lead tunnel rates, optionally coupled by a
mutual capacitance.  The package computes the closed-form observables of
that capacitance network, solves the sequential-tunneling master equation
for currents, sweeps voltage grids into stability maps, and fits the
model parameters back out of the maps.
"""

__version__ = "0.1.0"

from .device import (
    BiasPoint,
    CapacitanceSet,
    DeviceSpec,
    DotSpec,
    DotSpectrum,
    anticrossing_shift,
    backgate_slope,
    charging_energy,
    diamond_slopes,
    electrochemical_potential,
    electrostatic_energy,
    lever_arm,
    peak_spacing,
    total_capacitance,
)
from .transport import (
    ChargeState,
    RateMatrix,
    SteadyState,
    conductance,
    drain_current,
    enumerate_states,
    lead_currents,
    solve_steady_state,
    stationary_distribution,
    transition_rates,
)
from .sweep import (
    ConductanceMap,
    GroundStateMap,
    SweepAxis,
    SweepPlan,
    ground_state_map,
    read_map_csv,
    run_sweep,
    write_map_csv,
)
from .analysis import (
    ExtractionReport,
    PeakLocus,
    detect_peaks,
    extract_backgate,
    extract_diamond,
    extract_honeycomb,
    fit_diamond,
    fit_family_slopes,
    find_triple_junctions,
    gate_to_energy,
    vertex_splitting,
)
from .config import load_device, load_plan, parse_device, parse_plan
from .errors import (
    ConfigError,
    DonordotError,
    ExtractionError,
    MapFormatError,
    SolverError,
    StateSpaceError,
)

__all__ = [name for name in dir() if not name.startswith("_")]
