"""Flat-array device representation consumed by the sweep kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import E_AF_MEV, K_B_MEV
from .device import DeviceSpec


@dataclass(frozen=True)
class PackedDevice:
    """Plain float/int arrays describing one device's state space.

    States are lexicographic in (n, m).  Transitions are stored in the
    add-one-electron direction, src -> dst on island 0 (donor) or 1 (dot),
    with the multiplicity factors of the add (gin) and remove (gout)
    moves.  Orbital arrays are indexed by absolute occupancy.
    """

    states_n: np.ndarray
    states_m: np.ndarray
    inv11: float
    inv12: float
    inv22: float
    drive1: np.ndarray
    drive2: np.ndarray
    orb1: np.ndarray
    orb2: np.ndarray
    t_src: np.ndarray
    t_dst: np.ndarray
    t_isl: np.ndarray
    t_gin: np.ndarray
    t_gout: np.ndarray
    gamma_source: np.ndarray
    gamma_drain: np.ndarray
    kt: float

    @property
    def n_states(self) -> int:
        return self.states_n.size


def pack_device(device: DeviceSpec) -> PackedDevice:
    """Flatten a DeviceSpec into kernel-ready arrays."""
    n_lo, n_hi = device.donor.window
    m_lo, m_hi = device.dot.window
    span_m = m_hi - m_lo + 1

    grid_n, grid_m = np.meshgrid(
        np.arange(n_lo, n_hi + 1), np.arange(m_lo, m_hi + 1), indexing="ij"
    )
    states_n = grid_n.ravel().astype(np.int64)
    states_m = grid_m.ravel().astype(np.int64)

    inv11, inv12, inv22 = device.capacitance_inverse()

    def drive(caps):
        return (
            np.array([caps.c_source, caps.c_drain, caps.c_gate, caps.c_back])
            / E_AF_MEV
        )

    # indexed by absolute occupancy, so cover 0..hi even when lo > 0
    orb1 = np.array([device.donor.orbital_energy(n) for n in range(n_hi + 1)])
    orb2 = np.array([device.dot.orbital_energy(m) for m in range(m_hi + 1)])

    t_src, t_dst, t_isl, t_gin, t_gout = [], [], [], [], []
    for s in range(states_n.size):
        n = int(states_n[s])
        m = int(states_m[s])
        if n < n_hi:
            _, g_in, g_out = device.donor.spectrum.entry_level(n + 1)
            t_src.append(s)
            t_dst.append(s + span_m)
            t_isl.append(0)
            t_gin.append(float(g_in))
            t_gout.append(float(g_out))
        if m < m_hi:
            _, g_in, g_out = device.dot.spectrum.entry_level(m + 1)
            t_src.append(s)
            t_dst.append(s + 1)
            t_isl.append(1)
            t_gin.append(float(g_in))
            t_gout.append(float(g_out))

    return PackedDevice(
        states_n=states_n,
        states_m=states_m,
        inv11=inv11,
        inv12=inv12,
        inv22=inv22,
        drive1=drive(device.donor.caps),
        drive2=drive(device.dot.caps),
        orb1=orb1,
        orb2=orb2,
        t_src=np.asarray(t_src, dtype=np.int64),
        t_dst=np.asarray(t_dst, dtype=np.int64),
        t_isl=np.asarray(t_isl, dtype=np.int64),
        t_gin=np.asarray(t_gin, dtype=float),
        t_gout=np.asarray(t_gout, dtype=float),
        gamma_source=np.array([device.donor.gamma_source, device.dot.gamma_source]),
        gamma_drain=np.array([device.donor.gamma_drain, device.dot.gamma_drain]),
        kt=K_B_MEV * device.temperature,
    )
