"""Sequential-tunneling master equation for the two-island device.

Charge states (n_donor, m_dot) are enumerated over the occupancy windows;
electrons hop one at a time between an island and a lead, with rates given
by the bare barrier rate times the multiplicity of the entered/vacated
orbital times a Fermi factor of the transition energy measured from the
lead potential (mu_lead = -e*V_lead).  The stationary occupation vector
solves W p = 0 with one balance row traded for normalization, and lead
currents follow from the per-transition fluxes.

This module is the plain, single-bias-point implementation.  The sweep
engine evaluates the same model through the array kernels in
``_kernels_numpy``/``_kernels_numba``; equality of the two paths is pinned
by tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import E_CHARGE, K_B_MEV
from .device import BiasPoint, DeviceSpec, electrostatic_energy
from .errors import SolverError, StateSpaceError

DEFAULT_STATE_CAP = 10_000

# relative tolerance on residuals/negative probabilities before a solve
# is declared failed
_SOLVE_RTOL = 1e-9


@dataclass(frozen=True)
class ChargeState:
    """One charge configuration with its total energy at the build bias."""

    n_donor: int
    m_dot: int
    energy: float


@dataclass(frozen=True)
class RateMatrix:
    """Generator matrix plus the per-transition rate bookkeeping.

    ``matrix[s_to, s_from]`` is the rate of s_from -> s_to; each column
    sums to zero.  Transitions are stored once in the "add one electron"
    direction: ``src[t] -> dst[t]`` adds an electron to island
    ``island[t]`` (0 donor, 1 dot).  ``in_*``/``out_*`` are the lead-
    resolved rates of that transition and its reverse.
    """

    matrix: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    island: np.ndarray
    in_source: np.ndarray
    in_drain: np.ndarray
    out_source: np.ndarray
    out_drain: np.ndarray


@dataclass(frozen=True)
class SteadyState:
    """Stationary occupation probabilities and the two lead currents (A)."""

    probabilities: np.ndarray
    i_source: float
    i_drain: float


def enumerate_states(
    device: DeviceSpec, bias: BiasPoint, max_states: int = DEFAULT_STATE_CAP
) -> list[ChargeState]:
    """All (n, m) in the window product, lexicographic, energies cached."""
    n_lo, n_hi = device.donor.window
    m_lo, m_hi = device.dot.window
    count = (n_hi - n_lo + 1) * (m_hi - m_lo + 1)
    if count > max_states:
        raise StateSpaceError(
            f"{count} charge states exceed the cap of {max_states}"
        )
    return [
        ChargeState(n, m, electrostatic_energy(device, (n, m), bias))
        for n in range(n_lo, n_hi + 1)
        for m in range(m_lo, m_hi + 1)
    ]


def fermi(x):
    """Occupation 1/(1+exp(x)), overflow-safe for any argument."""
    x = np.asarray(x, dtype=float)
    t = np.exp(-np.abs(x))
    return np.where(x >= 0.0, t / (1.0 + t), 1.0 / (1.0 + t))


def fermi_complement(x):
    """1 - fermi(x) computed without cancellation in the tails."""
    x = np.asarray(x, dtype=float)
    t = np.exp(-np.abs(x))
    return np.where(x >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))


def transition_rates(
    device: DeviceSpec, bias: BiasPoint, states: list[ChargeState]
) -> RateMatrix:
    """Build the generator over `states` for sequential lead tunneling.

    Rates in: gamma * (empty slots in the entered orbital) * f(x); rates
    out: gamma * (electrons in the vacated orbital) * (1 - f(x)); with
    x = (mu + e*V_lead)/kT for the transition energy mu.  Metallic islands
    use unit multiplicities.
    """
    if device.temperature <= 0.0:
        raise ValueError("temperature must be positive")
    kt = K_B_MEV * device.temperature
    index = {(s.n_donor, s.m_dot): i for i, s in enumerate(states)}
    ns = len(states)

    src, dst, island = [], [], []
    gin, gout, mu = [], [], []
    for i, state in enumerate(states):
        for which, spec in enumerate((device.donor, device.dot)):
            occ = state.n_donor if which == 0 else state.m_dot
            if occ >= spec.window[1]:
                continue
            upper = (
                (state.n_donor + 1, state.m_dot)
                if which == 0
                else (state.n_donor, state.m_dot + 1)
            )
            j = index[upper]
            _, g_in, g_out = spec.spectrum.entry_level(occ + 1)
            src.append(i)
            dst.append(j)
            island.append(which)
            gin.append(g_in)
            gout.append(g_out)
            mu.append(states[j].energy - state.energy)

    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    island = np.asarray(island, dtype=np.int64)
    gin = np.asarray(gin, dtype=float)
    gout = np.asarray(gout, dtype=float)
    mu = np.asarray(mu, dtype=float)

    gamma_source = np.array([device.donor.gamma_source, device.dot.gamma_source])
    gamma_drain = np.array([device.donor.gamma_drain, device.dot.gamma_drain])

    x_source = (mu + bias.v_source) / kt
    x_drain = (mu + bias.v_drain) / kt
    in_source = gamma_source[island] * gin * fermi(x_source)
    out_source = gamma_source[island] * gout * fermi_complement(x_source)
    in_drain = gamma_drain[island] * gin * fermi(x_drain)
    out_drain = gamma_drain[island] * gout * fermi_complement(x_drain)

    matrix = np.zeros((ns, ns))
    np.add.at(matrix, (dst, src), in_source + in_drain)
    np.add.at(matrix, (src, dst), out_source + out_drain)
    matrix[np.diag_indices(ns)] -= matrix.sum(axis=0)

    return RateMatrix(
        matrix=matrix,
        src=src,
        dst=dst,
        island=island,
        in_source=in_source,
        in_drain=in_drain,
        out_source=out_source,
        out_drain=out_drain,
    )


def _connected_components(matrix: np.ndarray) -> list[list[int]]:
    """Components of the undirected support graph of the off-diagonal rates."""
    ns = matrix.shape[0]
    support = (matrix != 0.0) | (matrix.T != 0.0)
    np.fill_diagonal(support, False)
    seen = np.zeros(ns, dtype=bool)
    components = []
    for start in range(ns):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        component = []
        while stack:
            node = stack.pop()
            component.append(node)
            for nb in np.nonzero(support[node])[0]:
                if not seen[nb]:
                    seen[nb] = True
                    stack.append(nb)
        components.append(sorted(component))
    return components


def stationary_distribution(rates: RateMatrix) -> np.ndarray:
    """Probability vector solving W p = 0, sum(p) = 1.

    One balance row (the state with the largest escape rate) is replaced
    by the normalization condition; the solution is unique whenever the
    transition graph is connected, otherwise a SolverError reports the
    disconnected components.
    """
    w = rates.matrix
    ns = w.shape[0]
    if ns == 1:
        return np.ones(1)
    scale = np.max(np.abs(w))
    if scale == 0.0:
        raise SolverError(
            "all transition rates vanish; "
            f"disconnected components: {_connected_components(w)}"
        )
    a = w / scale
    row = int(np.argmax(np.abs(np.diag(a))))
    a[row, :] = 1.0
    b = np.zeros(ns)
    b[row] = 1.0
    try:
        p = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        components = _connected_components(w)
        if len(components) > 1:
            raise SolverError(
                f"state graph splits into {len(components)} disconnected "
                f"components: {components}"
            ) from exc
        raise SolverError("singular rate matrix beyond normalization") from exc
    top = float(np.max(p))
    if not np.isfinite(p).all() or top <= 0.0 or float(np.min(p)) < -_SOLVE_RTOL * top:
        components = _connected_components(w)
        if len(components) > 1:
            raise SolverError(
                f"state graph splits into {len(components)} disconnected "
                f"components: {components}"
            )
        raise SolverError("stationary solve produced an invalid distribution")
    p = np.where(p < 0.0, 0.0, p)
    return p / p.sum()


def lead_currents(rates: RateMatrix, probabilities: np.ndarray) -> tuple[float, float]:
    """(i_source, i_drain) in A; positive when electrons flow into that lead."""
    p_src = probabilities[rates.src]
    p_dst = probabilities[rates.dst]
    flux_source = float(np.sum(p_dst * rates.out_source - p_src * rates.in_source))
    flux_drain = float(np.sum(p_dst * rates.out_drain - p_src * rates.in_drain))
    return E_CHARGE * flux_source, E_CHARGE * flux_drain


def drain_current(
    device: DeviceSpec,
    bias: BiasPoint,
    states: list[ChargeState],
    rates: RateMatrix,
    probabilities: np.ndarray,
) -> float:
    """Drain current (A); positive for electron flow source -> device -> drain."""
    if len(states) != probabilities.shape[0]:
        raise ValueError("states and probabilities disagree in length")
    return lead_currents(rates, probabilities)[1]


def solve_steady_state(
    device: DeviceSpec, bias: BiasPoint, max_states: int = DEFAULT_STATE_CAP
) -> SteadyState:
    """Enumerate, build rates, solve, and read out both lead currents."""
    states = enumerate_states(device, bias, max_states=max_states)
    rates = transition_rates(device, bias, states)
    p = stationary_distribution(rates)
    i_source, i_drain = lead_currents(rates, p)
    return SteadyState(probabilities=p, i_source=i_source, i_drain=i_drain)


def conductance(device: DeviceSpec, bias: BiasPoint, delta_vd: float = 0.1) -> float:
    """Differential conductance dI/dV_drain in units of e^2/h.

    Central difference with half-step `delta_vd` (mV) around the bias
    point's drain voltage.
    """
    from .constants import G_QUANTUM

    if delta_vd <= 0.0:
        raise ValueError("delta_vd must be positive")
    upper = solve_steady_state(device, bias.replace(v_drain=bias.v_drain + delta_vd))
    lower = solve_steady_state(device, bias.replace(v_drain=bias.v_drain - delta_vd))
    didv = (upper.i_drain - lower.i_drain) / (2.0 * delta_vd * 1e-3)
    return didv / G_QUANTUM
