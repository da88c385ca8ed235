"""JIT-compiled per-cell evaluation of lead currents (default hot path).

One compiled loop builds the generator, solves the stationary system by
Gaussian elimination with partial pivoting (flag-based, so failures
propagate cleanly out of parallel sections) and accumulates the lead
fluxes.  Cells are independent, so the prange scheduling cannot change
any cell's arithmetic and results are bit-identical for any thread count.
"""

from __future__ import annotations

import math
import os

# the portable threading layer keeps thread-count control predictable and
# avoids probing optional TBB/OpenMP runtimes
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

import numpy as np
from numba import njit, prange

from .constants import E_AF_MEV, E_CHARGE
from .errors import SolverError
from ._pack import PackedDevice


@njit(cache=True)
def _fermi_pair(x):
    if x >= 0.0:
        t = math.exp(-x)
        return t / (1.0 + t), 1.0 / (1.0 + t)
    t = math.exp(x)
    return 1.0 / (1.0 + t), t / (1.0 + t)


@njit(cache=True)
def _solve_inplace(a, b):
    """Gaussian elimination with partial pivoting; returns False if singular.

    On success the solution overwrites b.
    """
    n = a.shape[0]
    for col in range(n):
        piv = col
        big = abs(a[col, col])
        for r in range(col + 1, n):
            v = abs(a[r, col])
            if v > big:
                big = v
                piv = r
        if big == 0.0:
            return False
        if piv != col:
            for c in range(col, n):
                tmp = a[col, c]
                a[col, c] = a[piv, c]
                a[piv, c] = tmp
            tmp = b[col]
            b[col] = b[piv]
            b[piv] = tmp
        inv = 1.0 / a[col, col]
        for r in range(col + 1, n):
            f = a[r, col] * inv
            if f != 0.0:
                a[r, col] = 0.0
                for c in range(col + 1, n):
                    a[r, c] -= f * a[col, c]
                b[r] -= f * b[col]
    for col in range(n - 1, -1, -1):
        s = b[col]
        for c in range(col + 1, n):
            s -= a[col, c] * b[c]
        b[col] = s / a[col, col]
    return True


@njit(cache=True, parallel=True)
def _currents_kernel(
    vs, vd, vg, vb,
    states_n, states_m,
    inv11, inv12, inv22,
    drive1, drive2,
    orb1, orb2,
    t_src, t_dst, t_isl, t_gin, t_gout,
    gamma_source, gamma_drain,
    kt,
    i_source, i_drain, ok,
):
    nc = vs.size
    ns = states_n.size
    nt = t_src.size
    for cell in prange(nc):
        a1 = (
            drive1[0] * vs[cell] + drive1[1] * vd[cell]
            + drive1[2] * vg[cell] + drive1[3] * vb[cell]
        )
        a2 = (
            drive2[0] * vs[cell] + drive2[1] * vd[cell]
            + drive2[2] * vg[cell] + drive2[3] * vb[cell]
        )
        energy = np.empty(ns)
        for s in range(ns):
            q1 = a1 - states_n[s]
            q2 = a2 - states_m[s]
            energy[s] = 0.5 * E_AF_MEV * (
                inv11 * q1 * q1 + 2.0 * inv12 * q1 * q2 + inv22 * q2 * q2
            ) + orb1[states_n[s]] + orb2[states_m[s]]

        w = np.zeros((ns, ns))
        in_s = np.empty(nt)
        out_s = np.empty(nt)
        in_d = np.empty(nt)
        out_d = np.empty(nt)
        for t in range(nt):
            mu = energy[t_dst[t]] - energy[t_src[t]]
            isl = t_isl[t]
            f_s, fc_s = _fermi_pair((mu + vs[cell]) / kt)
            f_d, fc_d = _fermi_pair((mu + vd[cell]) / kt)
            in_s[t] = gamma_source[isl] * t_gin[t] * f_s
            out_s[t] = gamma_source[isl] * t_gout[t] * fc_s
            in_d[t] = gamma_drain[isl] * t_gin[t] * f_d
            out_d[t] = gamma_drain[isl] * t_gout[t] * fc_d
            w[t_dst[t], t_src[t]] += in_s[t] + in_d[t]
            w[t_src[t], t_dst[t]] += out_s[t] + out_d[t]

        scale = 0.0
        row = 0
        biggest = -1.0
        for s in range(ns):
            colsum = 0.0
            for r in range(ns):
                colsum += w[r, s]
                if w[r, s] > scale:
                    scale = w[r, s]
            w[s, s] = -colsum
            if colsum > biggest:
                biggest = colsum
                row = s
        if scale <= 0.0:
            ok[cell] = 0
            i_source[cell] = 0.0
            i_drain[cell] = 0.0
            continue

        a = w / scale
        b = np.zeros(ns)
        for c in range(ns):
            a[row, c] = 1.0
        b[row] = 1.0
        if not _solve_inplace(a, b):
            ok[cell] = 0
            i_source[cell] = 0.0
            i_drain[cell] = 0.0
            continue

        top = 0.0
        low = 0.0
        finite = True
        for s in range(ns):
            if not math.isfinite(b[s]):
                finite = False
                break
            if b[s] > top:
                top = b[s]
            if b[s] < low:
                low = b[s]
        if not finite or top <= 0.0 or low < -1e-9 * top:
            ok[cell] = 0
            i_source[cell] = 0.0
            i_drain[cell] = 0.0
            continue
        total = 0.0
        for s in range(ns):
            if b[s] < 0.0:
                b[s] = 0.0
            total += b[s]
        for s in range(ns):
            b[s] /= total

        flux_s = 0.0
        flux_d = 0.0
        for t in range(nt):
            flux_s += b[t_dst[t]] * out_s[t] - b[t_src[t]] * in_s[t]
            flux_d += b[t_dst[t]] * out_d[t] - b[t_src[t]] * in_d[t]
        i_source[cell] = E_CHARGE * flux_s
        i_drain[cell] = E_CHARGE * flux_d
        ok[cell] = 1


def currents_batch(pk: PackedDevice, vs, vd, vg, vb, jobs=None):
    """(i_source, i_drain) arrays in A for bias-point arrays (mV)."""
    import numba

    vs, vd, vg, vb = (np.ascontiguousarray(v, dtype=float) for v in (vs, vd, vg, vb))
    nc = vs.size
    if pk.n_states == 1:
        return np.zeros(nc), np.zeros(nc)
    if jobs is not None:
        numba.set_num_threads(max(1, min(int(jobs), numba.config.NUMBA_NUM_THREADS)))
    i_source = np.empty(nc)
    i_drain = np.empty(nc)
    ok = np.empty(nc, dtype=np.uint8)
    _currents_kernel(
        vs, vd, vg, vb,
        pk.states_n, pk.states_m,
        pk.inv11, pk.inv12, pk.inv22,
        pk.drive1, pk.drive2,
        pk.orb1, pk.orb2,
        pk.t_src, pk.t_dst, pk.t_isl, pk.t_gin, pk.t_gout,
        pk.gamma_source, pk.gamma_drain,
        pk.kt,
        i_source, i_drain, ok,
    )
    if not ok.all():
        raise SolverError(
            "stationary solve failed", grid_index=int(np.argmin(ok))
        )
    return i_source, i_drain
