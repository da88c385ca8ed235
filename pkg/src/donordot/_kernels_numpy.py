"""Vectorized pure-numpy evaluation of lead currents over many bias points.

Bias points are processed in chunks; per chunk the generator matrices of
all cells are assembled as one (cells, ns, ns) array and handed to the
batched LAPACK solve.  This is the fallback path when the numba kernels
are unavailable or disabled.
"""

from __future__ import annotations

import numpy as np

from .constants import E_AF_MEV, E_CHARGE
from .errors import SolverError
from ._pack import PackedDevice

_CHUNK = 512
_NEG_RTOL = 1e-9


def _fermi_pair(x):
    t = np.exp(-np.abs(x))
    pos = x >= 0.0
    f = np.where(pos, t / (1.0 + t), 1.0 / (1.0 + t))
    fc = np.where(pos, 1.0 / (1.0 + t), t / (1.0 + t))
    return f, fc


def _chunk_currents(pk: PackedDevice, vs, vd, vg, vb, offset):
    nc = vs.size
    ns = pk.n_states

    a1 = vs * pk.drive1[0] + vd * pk.drive1[1] + vg * pk.drive1[2] + vb * pk.drive1[3]
    a2 = vs * pk.drive2[0] + vd * pk.drive2[1] + vg * pk.drive2[2] + vb * pk.drive2[3]
    q1 = a1[:, None] - pk.states_n[None, :]
    q2 = a2[:, None] - pk.states_m[None, :]
    energy = 0.5 * E_AF_MEV * (
        pk.inv11 * q1 * q1 + 2.0 * pk.inv12 * q1 * q2 + pk.inv22 * q2 * q2
    )
    energy += pk.orb1[pk.states_n][None, :] + pk.orb2[pk.states_m][None, :]

    if pk.t_src.size == 0:
        return np.zeros(nc), np.zeros(nc)

    mu = energy[:, pk.t_dst] - energy[:, pk.t_src]
    f_s, fc_s = _fermi_pair((mu + vs[:, None]) / pk.kt)
    f_d, fc_d = _fermi_pair((mu + vd[:, None]) / pk.kt)

    g_s = pk.gamma_source[pk.t_isl]
    g_d = pk.gamma_drain[pk.t_isl]
    in_s = g_s * pk.t_gin * f_s
    out_s = g_s * pk.t_gout * fc_s
    in_d = g_d * pk.t_gin * f_d
    out_d = g_d * pk.t_gout * fc_d

    w = np.zeros((nc, ns * ns))
    w[:, pk.t_dst * ns + pk.t_src] = in_s + in_d
    w[:, pk.t_src * ns + pk.t_dst] = out_s + out_d
    w = w.reshape(nc, ns, ns)
    colsum = w.sum(axis=1)
    idx = np.arange(ns)
    w[:, idx, idx] = -colsum

    scale = np.max(np.abs(w), axis=(1, 2))
    if np.any(scale <= 0.0):
        bad = int(np.argmax(scale <= 0.0))
        raise SolverError("all transition rates vanish", grid_index=offset + bad)
    a = w / scale[:, None, None]
    rows = np.argmax(colsum, axis=1)
    cells = np.arange(nc)
    a[cells, rows, :] = 1.0
    b = np.zeros((nc, ns, 1))
    b[cells, rows, 0] = 1.0

    try:
        p = np.linalg.solve(a, b)[..., 0]
    except np.linalg.LinAlgError:
        # find the offending cell for a precise report
        for c in range(nc):
            try:
                np.linalg.solve(a[c], b[c])
            except np.linalg.LinAlgError:
                raise SolverError(
                    "singular rate matrix beyond normalization",
                    grid_index=offset + c,
                ) from None
        raise

    top = p.max(axis=1)
    good = np.isfinite(p).all(axis=1) & (top > 0.0) & (p.min(axis=1) >= -_NEG_RTOL * top)
    if not good.all():
        raise SolverError(
            "stationary solve produced an invalid distribution",
            grid_index=offset + int(np.argmin(good)),
        )
    p = np.where(p < 0.0, 0.0, p)
    p /= p.sum(axis=1, keepdims=True)

    p_src = p[:, pk.t_src]
    p_dst = p[:, pk.t_dst]
    i_source = E_CHARGE * np.sum(p_dst * out_s - p_src * in_s, axis=1)
    i_drain = E_CHARGE * np.sum(p_dst * out_d - p_src * in_d, axis=1)
    return i_source, i_drain


def currents_batch(pk: PackedDevice, vs, vd, vg, vb, jobs=None):
    """(i_source, i_drain) arrays in A for bias-point arrays (mV).

    `jobs` is accepted for interface parity with the numba kernel; the
    numpy path always runs chunk-sequentially (results are identical for
    any chunking).
    """
    vs, vd, vg, vb = (np.ascontiguousarray(v, dtype=float) for v in (vs, vd, vg, vb))
    nc = vs.size
    if pk.n_states == 1:
        return np.zeros(nc), np.zeros(nc)
    i_source = np.empty(nc)
    i_drain = np.empty(nc)
    for start in range(0, nc, _CHUNK):
        sl = slice(start, min(start + _CHUNK, nc))
        i_source[sl], i_drain[sl] = _chunk_currents(
            pk, vs[sl], vd[sl], vg[sl], vb[sl], start
        )
    return i_source, i_drain
