"""Voltage-grid sweeps: stability maps, ground-state maps and their CSV form.

A sweep evaluates one observable (current, conductance or its log10) on a
rectangular grid over two swept terminals; every cell is an independent
steady-state solve, so cells are computed as one batch through the active
kernel backend and assembled in fixed row-major order.  Ground-state maps
skip transport entirely: they record the (n, m) configuration minimizing
the total energy at zero drain bias, which serves as the brute-force
geometric reference for the conductance features.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constants import E_AF_MEV, G_QUANTUM
from .device import BiasPoint, DeviceSpec
from .errors import ConfigError, MapFormatError, SolverError, StateSpaceError
from .transport import DEFAULT_STATE_CAP
from .backend import currents_batch, pack_device

AXIS_NAMES = ("v_gate", "v_back", "v_drain", "v_source")
OBSERVABLES = ("current", "conductance", "log10_conductance")
GROUND_STATE = "ground_state"

# conductance below this (in e^2/h) is clamped before taking log10
LOG_FLOOR = 1e-12
# default half-step (mV) of the conductance central difference
DELTA_VD = 0.1

_UNITS = {
    "current": "A",
    "conductance": "e^2/h",
    "log10_conductance": "log10(e^2/h)",
    GROUND_STATE: "electrons",
}


@dataclass(frozen=True)
class SweepAxis:
    """One swept terminal: `steps` evenly spaced values from start to stop."""

    name: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"axis name must be one of {AXIS_NAMES}, got {self.name!r}")
        if self.steps < 2:
            raise ValueError("an axis needs at least 2 steps")
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise ValueError("axis endpoints must be finite")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.steps - 1)


@dataclass(frozen=True)
class SweepPlan:
    """Two swept axes, the remaining fixed voltages, and the observable."""

    axis1: SweepAxis
    axis2: SweepAxis
    fixed: dict = field(default_factory=dict)
    observable: str = "log10_conductance"

    def __post_init__(self):
        if self.axis1.name == self.axis2.name:
            raise ValueError("the two sweep axes must be distinct terminals")
        if self.observable not in OBSERVABLES:
            raise ValueError(f"observable must be one of {OBSERVABLES}")
        fixed = dict(self.fixed)
        for key in fixed:
            if key not in AXIS_NAMES:
                raise ValueError(f"unknown fixed terminal {key!r}")
            if key in (self.axis1.name, self.axis2.name):
                raise ValueError(f"terminal {key!r} is already a sweep axis")
        for name in AXIS_NAMES:
            if name not in fixed and name not in (self.axis1.name, self.axis2.name):
                fixed[name] = 0.0
        object.__setattr__(self, "fixed", fixed)

    def bias_arrays(self) -> dict[str, np.ndarray]:
        """Row-major flattened voltage arrays for every terminal."""
        v1, v2 = np.meshgrid(self.axis1.values(), self.axis2.values(), indexing="ij")
        flat = {self.axis1.name: v1.ravel(), self.axis2.name: v2.ravel()}
        size = v1.size
        for name, value in self.fixed.items():
            flat[name] = np.full(size, value)
        return flat

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axis1.steps, self.axis2.steps)


@dataclass(frozen=True)
class ConductanceMap:
    """Observable values on the sweep grid; values[i, j] at (axis1[i], axis2[j])."""

    plan: SweepPlan
    values: np.ndarray
    units: str

    def __post_init__(self):
        if self.values.shape != self.plan.shape:
            raise ValueError("grid shape does not match the plan")
        if not np.isfinite(self.values).all():
            raise ValueError("map contains non-finite values")

    def axis1_values(self) -> np.ndarray:
        return self.plan.axis1.values()

    def axis2_values(self) -> np.ndarray:
        return self.plan.axis2.values()


@dataclass(frozen=True)
class GroundStateMap:
    """Energy-minimizing (n, m) per grid cell at zero drain bias."""

    plan: SweepPlan
    n_donor: np.ndarray
    m_dot: np.ndarray

    def axis1_values(self) -> np.ndarray:
        return self.plan.axis1.values()

    def axis2_values(self) -> np.ndarray:
        return self.plan.axis2.values()


def _solve_currents(device, plan, biases, jobs, backend):
    pk = pack_device(device)
    try:
        return currents_batch(
            pk,
            biases["v_source"],
            biases["v_drain"],
            biases["v_gate"],
            biases["v_back"],
            jobs=jobs,
            backend=backend,
        )
    except SolverError as exc:
        if exc.grid_index is None:
            raise
        i, j = divmod(int(exc.grid_index), plan.shape[1])
        raise SolverError(
            str(exc.args[0]).split(" [cell")[0],
            grid_index=(i, j),
            axis_values=(plan.axis1.values()[i], plan.axis2.values()[j]),
        ) from exc


def run_sweep(
    device: DeviceSpec,
    plan: SweepPlan,
    jobs: int | None = None,
    backend: str | None = None,
    delta_vd: float = DELTA_VD,
    max_states: int = DEFAULT_STATE_CAP,
) -> ConductanceMap:
    """Evaluate the plan's observable at every grid cell.

    Cells are independent; output ordering is deterministic (row-major in
    (axis1, axis2)) regardless of kernel scheduling.  Conductance is the
    central difference of the drain current over +-delta_vd around each
    cell's drain voltage, in units of e^2/h.
    """
    n_states = pack_device(device).n_states
    if n_states > max_states:
        raise StateSpaceError(f"{n_states} charge states exceed the cap of {max_states}")
    biases = plan.bias_arrays()
    if plan.observable == "current":
        _, i_drain = _solve_currents(device, plan, biases, jobs, backend)
        values = i_drain
    else:
        upper = dict(biases)
        lower = dict(biases)
        upper["v_drain"] = biases["v_drain"] + delta_vd
        lower["v_drain"] = biases["v_drain"] - delta_vd
        _, i_up = _solve_currents(device, plan, upper, jobs, backend)
        _, i_dn = _solve_currents(device, plan, lower, jobs, backend)
        values = (i_up - i_dn) / (2.0 * delta_vd * 1e-3) / G_QUANTUM
        if plan.observable == "log10_conductance":
            values = np.log10(np.maximum(values, LOG_FLOOR))
    return ConductanceMap(
        plan=plan,
        values=values.reshape(plan.shape),
        units=_UNITS[plan.observable],
    )


def ground_state_map(
    device: DeviceSpec,
    plan: SweepPlan,
    max_states: int = DEFAULT_STATE_CAP,
    chunk: int = 4096,
) -> GroundStateMap:
    """Brute-force minimum-energy configuration over a gate-voltage grid.

    Both axes must be gate terminals (v_gate / v_back); source and drain
    are held at zero so the map reflects pure electrostatics.
    """
    for axis in (plan.axis1, plan.axis2):
        if axis.name not in ("v_gate", "v_back"):
            raise ConfigError(
                f"ground-state maps sweep gate terminals only, not {axis.name!r}"
            )
    if plan.fixed.get("v_drain", 0.0) != 0.0 or plan.fixed.get("v_source", 0.0) != 0.0:
        raise ConfigError("ground-state maps are defined at zero source/drain bias")

    pk = pack_device(device)
    if pk.n_states > max_states:
        raise StateSpaceError(f"{pk.n_states} charge states exceed the cap of {max_states}")
    biases = plan.bias_arrays()
    vg = biases["v_gate"]
    vb = biases["v_back"]
    size = vg.size
    best = np.empty(size, dtype=np.int64)
    orb = pk.orb1[pk.states_n] + pk.orb2[pk.states_m]
    for start in range(0, size, chunk):
        sl = slice(start, min(start + chunk, size))
        a1 = vg[sl] * pk.drive1[2] + vb[sl] * pk.drive1[3]
        a2 = vg[sl] * pk.drive2[2] + vb[sl] * pk.drive2[3]
        q1 = a1[:, None] - pk.states_n[None, :]
        q2 = a2[:, None] - pk.states_m[None, :]
        energy = 0.5 * E_AF_MEV * (
            pk.inv11 * q1 * q1 + 2.0 * pk.inv12 * q1 * q2 + pk.inv22 * q2 * q2
        ) + orb[None, :]
        best[sl] = np.argmin(energy, axis=1)
    return GroundStateMap(
        plan=plan,
        n_donor=pk.states_n[best].reshape(plan.shape),
        m_dot=pk.states_m[best].reshape(plan.shape),
    )


def _format_axis(axis: SweepAxis) -> str:
    return f"{axis.name},{axis.start!r},{axis.stop!r},{axis.steps}"


def _header(plan: SweepPlan, observable: str) -> str:
    fixed = ",".join(f"{k}:{plan.fixed[k]!r}" for k in sorted(plan.fixed))
    return (
        f"# observable={observable}"
        f" axis1={_format_axis(plan.axis1)}"
        f" axis2={_format_axis(plan.axis2)}"
        f" units={_UNITS[observable]}"
        f" fixed={fixed}"
    )


def write_map_csv(result, target) -> None:
    """Serialize a ConductanceMap or GroundStateMap as deterministic CSV.

    One header line, then `axis1_value,axis2_value,value` rows in
    row-major order (ground-state maps carry two value columns n,m).
    Floats are written in shortest round-trip form.
    """
    own = isinstance(target, (str, Path))
    handle = open(target, "w") if own else target
    try:
        ax1 = result.axis1_values()
        ax2 = result.axis2_values()
        if isinstance(result, GroundStateMap):
            handle.write(_header(result.plan, GROUND_STATE) + "\n")
            for i in range(ax1.size):
                for j in range(ax2.size):
                    handle.write(
                        f"{float(ax1[i])!r},{float(ax2[j])!r},"
                        f"{int(result.n_donor[i, j])},{int(result.m_dot[i, j])}\n"
                    )
        else:
            handle.write(_header(result.plan, result.plan.observable) + "\n")
            values = result.values
            for i in range(ax1.size):
                for j in range(ax2.size):
                    handle.write(
                        f"{float(ax1[i])!r},{float(ax2[j])!r},{float(values[i, j])!r}\n"
                    )
    finally:
        if own:
            handle.close()


def map_csv_text(result) -> str:
    buffer = io.StringIO()
    write_map_csv(result, buffer)
    return buffer.getvalue()


def _parse_header(line: str):
    if not line.startswith("# "):
        raise MapFormatError("missing header line")
    tokens = {}
    for token in line[2:].strip().split(" "):
        if "=" not in token:
            raise MapFormatError(f"malformed header token {token!r}")
        key, value = token.split("=", 1)
        tokens[key] = value
    for required in ("observable", "axis1", "axis2"):
        if required not in tokens:
            raise MapFormatError(f"header lacks {required}")

    def parse_axis(text):
        parts = text.split(",")
        if len(parts) != 4:
            raise MapFormatError(f"malformed axis spec {text!r}")
        try:
            return SweepAxis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))
        except ValueError as exc:
            raise MapFormatError(f"malformed axis spec {text!r}: {exc}") from exc

    fixed = {}
    if tokens.get("fixed"):
        for item in tokens["fixed"].split(","):
            if ":" not in item:
                raise MapFormatError(f"malformed fixed entry {item!r}")
            key, value = item.split(":", 1)
            try:
                fixed[key] = float(value)
            except ValueError as exc:
                raise MapFormatError(f"malformed fixed entry {item!r}") from exc
    return tokens["observable"], parse_axis(tokens["axis1"]), parse_axis(tokens["axis2"]), fixed


def read_map_csv(source):
    """Parse a CSV written by write_map_csv back into its map object."""
    own = isinstance(source, (str, Path))
    handle = open(source) if own else source
    try:
        lines = [line.rstrip("\n") for line in handle if line.strip()]
    finally:
        if own:
            handle.close()
    if not lines:
        raise MapFormatError("empty map file")
    observable, axis1, axis2, fixed = _parse_header(lines[0])
    expected = axis1.steps * axis2.steps
    rows = lines[1:]
    if len(rows) != expected:
        raise MapFormatError(f"expected {expected} data rows, found {len(rows)}")
    ground = observable == GROUND_STATE
    ncols = 4 if ground else 3
    data = np.empty((expected, ncols))
    for r, row in enumerate(rows):
        parts = row.split(",")
        if len(parts) != ncols:
            raise MapFormatError(f"row {r + 2}: expected {ncols} columns")
        try:
            data[r] = [float(p) for p in parts]
        except ValueError as exc:
            raise MapFormatError(f"row {r + 2}: {exc}") from exc
    try:
        plan = SweepPlan(
            axis1=axis1,
            axis2=axis2,
            fixed=fixed,
            observable=observable if not ground else "current",
        )
    except ValueError as exc:
        raise MapFormatError(str(exc)) from exc
    shape = plan.shape
    if ground:
        return GroundStateMap(
            plan=plan,
            n_donor=data[:, 2].astype(np.int64).reshape(shape),
            m_dot=data[:, 3].astype(np.int64).reshape(shape),
        )
    return ConductanceMap(
        plan=plan, values=data[:, 2].reshape(shape), units=_UNITS[observable]
    )
