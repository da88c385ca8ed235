"""Capacitance network and constant-interaction energetics.

Two islands (a donor level system and an electrostatic dot) sit in parallel
between source and drain, each coupled capacitively to the four terminals
and optionally to each other through a mutual capacitance.  This module
holds the immutable value objects describing such a device plus every
closed-form observable of the capacitance model: charging energy, lever
arm, stability-diamond slopes, back-gate peak slope, peak spacing and the
gate-voltage shift produced by the interdot coupling.

All functions are pure; all types are frozen dataclasses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .constants import E_AF_MEV

TERMINALS = ("v_source", "v_drain", "v_gate", "v_back")

METALLIC = "metallic"
DISCRETE = "discrete"


def _require_finite(name, value):
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class CapacitanceSet:
    """Couplings of one island to source, drain, front gate and back gate (aF)."""

    c_source: float
    c_drain: float
    c_gate: float
    c_back: float

    def __post_init__(self):
        for name in ("c_source", "c_drain", "c_gate", "c_back"):
            value = getattr(self, name)
            _require_finite(name, value)
            if value <= 0.0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    @property
    def total(self) -> float:
        """Island total capacitance: plain sum of the four terminal couplings."""
        return self.c_source + self.c_drain + self.c_gate + self.c_back


def total_capacitance(caps: CapacitanceSet) -> float:
    """Sum of the four terminal capacitances (aF)."""
    return caps.total


def charging_energy(caps: CapacitanceSet) -> float:
    """Single-electron charging energy e^2/C_total in meV."""
    return E_AF_MEV / caps.total


def lever_arm(caps: CapacitanceSet) -> float:
    """Gate lever arm c_gate/C_total (meV of island energy per mV of gate)."""
    return caps.c_gate / caps.total


def diamond_slopes(caps: CapacitanceSet) -> tuple[float, float]:
    """Edge slopes dV_drain/dV_gate of a blockade diamond.

    Returns the (positive, negative) pair
    ``(c_gate/(C_total - c_drain), -c_gate/c_drain)``.  Raises ValueError
    when the denominators degenerate (c_drain = 0 or c_drain >= C_total);
    the constructor already excludes both for physical capacitance sets,
    so this guards direct calls with hand-built numbers only.
    """
    total = caps.total
    if caps.c_drain <= 0.0 or total <= caps.c_drain:
        raise ValueError(
            "degenerate capacitances: need 0 < c_drain < total for diamond slopes"
        )
    return caps.c_gate / (total - caps.c_drain), -caps.c_gate / caps.c_drain


def backgate_slope(caps: CapacitanceSet) -> float:
    """Slope dV_gate/dV_back of a constant-charge line: -c_back/c_gate."""
    if caps.c_gate <= 0.0:
        raise ValueError("c_gate must be positive for a back-gate slope")
    return -caps.c_back / caps.c_gate


def peak_spacing(caps: CapacitanceSet) -> float:
    """Front-gate voltage e/c_gate (mV) between consecutive single-electron peaks."""
    if caps.c_gate <= 0.0:
        raise ValueError("c_gate must be positive for a peak spacing")
    return E_AF_MEV / caps.c_gate


@dataclass(frozen=True)
class DotSpectrum:
    """Single-particle spectrum of an island.

    ``levels`` is an ordered tuple of (energy offset in meV, degeneracy).
    A metallic island carries exactly one level at offset 0 whose
    degeneracy is unbounded (stored as 0); its filling never costs orbital
    energy and transitions carry no multiplicity factors.  A discrete
    island fills its level slots bottom-up, pairing within a level before
    the next one opens.
    """

    levels: tuple[tuple[float, int], ...]
    kind: str = DISCRETE

    def __post_init__(self):
        if self.kind not in (METALLIC, DISCRETE):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        levels = tuple((float(off), int(deg)) for off, deg in self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise ValueError("spectrum needs at least one level")
        if levels[0][0] != 0.0:
            raise ValueError("first level offset must be 0 by convention")
        if self.kind == METALLIC:
            if len(levels) != 1 or levels[0] != (0.0, 0):
                raise ValueError("metallic spectrum is the single level (0.0, 0)")
            return
        prev = -math.inf
        for off, deg in levels:
            _require_finite("level offset", off)
            if off < prev:
                raise ValueError("level offsets must be nondecreasing")
            prev = off
            if deg < 1:
                raise ValueError("level degeneracy must be a positive integer")

    @classmethod
    def metallic(cls) -> "DotSpectrum":
        return cls(levels=((0.0, 0),), kind=METALLIC)

    @classmethod
    def discrete(cls, levels) -> "DotSpectrum":
        return cls(levels=tuple((float(o), int(d)) for o, d in levels), kind=DISCRETE)

    @property
    def capacity(self) -> int | None:
        """Total number of slots, or None when unbounded (metallic)."""
        if self.kind == METALLIC:
            return None
        return sum(deg for _, deg in self.levels)

    def filling_energy(self, n: int) -> float:
        """Orbital energy of the n-electron ground configuration (meV)."""
        if n < 0:
            raise ValueError("occupancy must be >= 0")
        if self.kind == METALLIC:
            return 0.0
        if self.capacity is not None and n > self.capacity:
            raise ValueError(f"occupancy {n} exceeds the {self.capacity} spectrum slots")
        energy = 0.0
        remaining = n
        for off, deg in self.levels:
            take = min(remaining, deg)
            energy += off * take
            remaining -= take
            if remaining == 0:
                break
        return energy

    def entry_level(self, n: int) -> tuple[float, int, int]:
        """Level data for the n-th electron (1-based) under bottom-up filling.

        Returns (level offset, slots empty before it enters, electrons in
        the level after it enters).  The last two are the multiplicity
        factors of the add and remove transitions between occupancies
        n-1 and n.  Metallic islands return (0.0, 1, 1).
        """
        if n < 1:
            raise ValueError("entry_level is defined for occupancy >= 1")
        if self.kind == METALLIC:
            return 0.0, 1, 1
        cumulative = 0
        for off, deg in self.levels:
            if n <= cumulative + deg:
                occupied_before = n - 1 - cumulative
                return off, deg - occupied_before, occupied_before + 1
            cumulative += deg
        raise ValueError(f"occupancy {n} exceeds the {cumulative} spectrum slots")


@dataclass(frozen=True)
class DotSpec:
    """One island: capacitances, spectrum, bare lead rates and occupancy window."""

    caps: CapacitanceSet
    spectrum: DotSpectrum
    gamma_source: float = 1.0e9
    gamma_drain: float = 1.0e9
    window: tuple[int, int] = (0, 4)
    level_offset: float = 0.0

    def __post_init__(self):
        for name in ("gamma_source", "gamma_drain"):
            value = getattr(self, name)
            _require_finite(name, value)
            if value <= 0.0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        lo, hi = (int(self.window[0]), int(self.window[1]))
        object.__setattr__(self, "window", (lo, hi))
        if lo < 0 or hi < lo:
            raise ValueError(f"occupancy window must satisfy 0 <= min <= max, got {self.window}")
        capacity = self.spectrum.capacity
        if capacity is not None and hi > capacity:
            raise ValueError(
                f"occupancy window max {hi} exceeds the {capacity} spectrum slots"
            )
        _require_finite("level_offset", self.level_offset)

    def orbital_energy(self, n: int) -> float:
        """Orbital + alignment energy of n electrons on this island (meV)."""
        return self.spectrum.filling_energy(n) + n * self.level_offset


@dataclass(frozen=True)
class BiasPoint:
    """Voltages applied to the four terminals (mV); source conventionally 0."""

    v_source: float = 0.0
    v_drain: float = 0.0
    v_gate: float = 0.0
    v_back: float = 0.0

    def __post_init__(self):
        for name in TERMINALS:
            _require_finite(name, getattr(self, name))

    def replace(self, **changes) -> "BiasPoint":
        values = {name: getattr(self, name) for name in TERMINALS}
        values.update(changes)
        return BiasPoint(**values)


@dataclass(frozen=True)
class DeviceSpec:
    """Donor and dot in parallel, with mutual capacitance and temperature.

    There is deliberately no interdot tunnel rate: electrons exchange
    between the islands only through the leads.
    """

    donor: DotSpec
    dot: DotSpec
    c_mutual: float = 0.0
    temperature: float = 4.2

    def __post_init__(self):
        _require_finite("c_mutual", self.c_mutual)
        if self.c_mutual < 0.0:
            raise ValueError(f"c_mutual must be >= 0, got {self.c_mutual!r}")
        _require_finite("temperature", self.temperature)
        if self.temperature <= 0.0:
            raise ValueError(f"temperature must be > 0, got {self.temperature!r}")
        # reject a singular two-island capacitance matrix up front
        self.capacitance_inverse()

    @property
    def dots(self) -> tuple[DotSpec, DotSpec]:
        return (self.donor, self.dot)

    def capacitance_inverse(self) -> tuple[float, float, float]:
        """(inv11, inv12, inv22) of the 2x2 island capacitance matrix, in 1/aF.

        The matrix has C_total,i + c_mutual on the diagonal and -c_mutual
        off it; its inverse is symmetric with a positive off-diagonal.
        """
        d1 = self.donor.caps.total + self.c_mutual
        d2 = self.dot.caps.total + self.c_mutual
        det = d1 * d2 - self.c_mutual * self.c_mutual
        if det <= 0.0:
            raise ValueError(
                "singular capacitance matrix: c_mutual^2 >= product of island totals"
            )
        return d2 / det, self.c_mutual / det, d1 / det

    def charge_drives(self, bias: BiasPoint) -> tuple[float, float]:
        """Terminal-induced charge on each island, in units of e."""
        drives = []
        for spec in self.dots:
            c = spec.caps
            q = (
                c.c_source * bias.v_source
                + c.c_drain * bias.v_drain
                + c.c_gate * bias.v_gate
                + c.c_back * bias.v_back
            )
            drives.append(q / E_AF_MEV)
        return drives[0], drives[1]

    def in_window(self, state: tuple[int, int]) -> bool:
        n, m = state
        return (
            self.donor.window[0] <= n <= self.donor.window[1]
            and self.dot.window[0] <= m <= self.dot.window[1]
        )


def _energy_unchecked(device: DeviceSpec, n: int, m: int, bias: BiasPoint) -> float:
    inv11, inv12, inv22 = device.capacitance_inverse()
    a1, a2 = device.charge_drives(bias)
    q1 = a1 - n
    q2 = a2 - m
    electrostatic = 0.5 * E_AF_MEV * (inv11 * q1 * q1 + 2.0 * inv12 * q1 * q2 + inv22 * q2 * q2)
    return electrostatic + device.donor.orbital_energy(n) + device.dot.orbital_energy(m)


def electrostatic_energy(device: DeviceSpec, state: tuple[int, int], bias: BiasPoint) -> float:
    """Total energy (meV) of the charge configuration (n_donor, m_dot).

    Quadratic form of the island charges through the inverse capacitance
    matrix, plus the bottom-up orbital filling energy of each island.
    With c_mutual = 0 this separates exactly into two independent
    single-island energies.
    """
    if not device.in_window(state):
        raise ValueError(f"state {state} outside occupancy windows")
    return _energy_unchecked(device, int(state[0]), int(state[1]), bias)


def electrochemical_potential(
    device: DeviceSpec, dot_index: int, state: tuple[int, int], bias: BiasPoint
) -> float:
    """Energy (meV) to add the last electron of `state` on island `dot_index`.

    dot_index 0 is the donor, 1 the dot.  Defined as the energy difference
    to the configuration with one electron fewer on that island, including
    the orbital level that electron occupies.
    """
    if dot_index not in (0, 1):
        raise ValueError("dot_index must be 0 (donor) or 1 (dot)")
    if not device.in_window(state):
        raise ValueError(f"state {state} outside occupancy windows")
    n, m = int(state[0]), int(state[1])
    occupancy = n if dot_index == 0 else m
    if occupancy < 1:
        raise ValueError(f"island {dot_index} holds no electron in state {state}")
    lower = (n - 1, m) if dot_index == 0 else (n, m - 1)
    return _energy_unchecked(device, n, m, bias) - _energy_unchecked(device, *lower, bias)


def anticrossing_shift(device: DeviceSpec, include_mutual: bool = False) -> float:
    """Closed-form gate-voltage shift (mV) of the donor pattern per dot electron.

    e * c_mutual / (c_mutual*c_gate_dot + c_gate_donor*C_total_donor); with
    ``include_mutual`` the donor total also counts c_mutual.  This is an
    advisory estimate: the binding number is the vertex splitting measured
    on a brute-force ground-state map, against which both conventions
    should be compared.
    """
    cm = device.c_mutual
    if cm == 0.0:
        return 0.0
    donor_total = device.donor.caps.total + (cm if include_mutual else 0.0)
    denominator = cm * device.dot.caps.c_gate + device.donor.caps.c_gate * donor_total
    return E_AF_MEV * cm / denominator
