import math

import numpy as np
import pytest

import donordot as dd
from donordot.cli import bundled_data_path

# Reference capacitances (aF) of the two islands
DONOR_CAPS = dict(c_source=1.74, c_drain=1.83, c_gate=1.44, c_back=0.86)
DOT_CAPS = dict(c_source=11.44, c_drain=8.76, c_gate=6.44, c_back=2.57)


@pytest.fixture(scope="session")
def table1() -> dd.DeviceSpec:
    return dd.load_device(bundled_data_path("table1.device"))


def donor_spec(**overrides) -> dd.DotSpec:
    kwargs = dict(
        caps=dd.CapacitanceSet(**DONOR_CAPS),
        spectrum=dd.DotSpectrum.discrete([(0.0, 2), (15.4, 2)]),
        gamma_source=1.0e9,
        gamma_drain=1.0e9,
        window=(0, 4),
        level_offset=563.0,
    )
    kwargs.update(overrides)
    return dd.DotSpec(**kwargs)


def dot_spec(**overrides) -> dd.DotSpec:
    kwargs = dict(
        caps=dd.CapacitanceSet(**DOT_CAPS),
        spectrum=dd.DotSpectrum.metallic(),
        gamma_source=2.0e8,
        gamma_drain=2.0e8,
        window=(0, 18),
        level_offset=637.904647,
    )
    kwargs.update(overrides)
    return dd.DotSpec(**kwargs)


def make_device(c_mutual=0.0, temperature=4.2, donor=None, dot=None) -> dd.DeviceSpec:
    return dd.DeviceSpec(
        donor=donor or donor_spec(),
        dot=dot or dot_spec(),
        c_mutual=c_mutual,
        temperature=temperature,
    )


def freeze_island(spec: dd.DotSpec) -> dd.DotSpec:
    """Pin an island at zero electrons so it no longer takes part in transport."""
    import dataclasses

    return dataclasses.replace(spec, window=(0, 0))


def donor_only(temperature=4.2, **donor_overrides) -> dd.DeviceSpec:
    return make_device(
        temperature=temperature,
        donor=donor_spec(**donor_overrides),
        dot=freeze_island(dot_spec()),
    )


def dot_only(temperature=4.2, **dot_overrides) -> dd.DeviceSpec:
    return make_device(
        temperature=temperature,
        donor=freeze_island(donor_spec()),
        dot=dot_spec(**dot_overrides),
    )


def random_device(rng: np.random.Generator) -> dd.DeviceSpec:
    """A physically sensible random device for property tests."""

    def random_caps():
        return dd.CapacitanceSet(*rng.uniform(0.3, 30.0, size=4))

    def random_spectrum_window():
        if rng.random() < 0.4:
            return dd.DotSpectrum.metallic(), (0, int(rng.integers(1, 6)))
        n_levels = int(rng.integers(1, 4))
        offsets = np.concatenate([[0.0], np.sort(rng.uniform(0.5, 20.0, n_levels - 1))])
        degeneracies = rng.integers(1, 4, n_levels)
        spectrum = dd.DotSpectrum.discrete(list(zip(offsets, degeneracies)))
        capacity = int(degeneracies.sum())
        return spectrum, (0, int(rng.integers(1, capacity + 1)))

    dots = []
    for _ in range(2):
        spectrum, window = random_spectrum_window()
        dots.append(
            dd.DotSpec(
                caps=random_caps(),
                spectrum=spectrum,
                gamma_source=float(10.0 ** rng.uniform(8, 10)),
                gamma_drain=float(10.0 ** rng.uniform(8, 10)),
                window=window,
                level_offset=float(rng.uniform(-20.0, 20.0)),
            )
        )
    totals = [d.caps.total for d in dots]
    c_mutual = float(rng.uniform(0.0, 0.4 * min(totals)))
    return dd.DeviceSpec(
        donor=dots[0],
        dot=dots[1],
        c_mutual=c_mutual,
        temperature=float(rng.uniform(0.5, 10.0)),
    )


def gibbs_distribution(device: dd.DeviceSpec, bias: dd.BiasPoint, states):
    """Independent equilibrium oracle: p ~ multiplicity * exp(-E/kT).

    The multiplicity of a charge state is the number of ways its ground
    configuration places the electrons in the level slots, counted here
    by plain combinatorics.
    """

    def multiplicity(spectrum: dd.DotSpectrum, n: int) -> float:
        if spectrum.kind == "metallic":
            return 1.0
        ways = 1.0
        remaining = n
        for _, deg in spectrum.levels:
            take = min(remaining, deg)
            ways *= math.comb(deg, take)
            remaining -= take
            if remaining == 0:
                break
        return ways

    kt = 8.617333262145177e-2 * device.temperature
    log_w = np.array(
        [
            math.log(multiplicity(device.donor.spectrum, s.n_donor))
            + math.log(multiplicity(device.dot.spectrum, s.m_dot))
            - s.energy / kt
            for s in states
        ]
    )
    log_w -= log_w.max()
    w = np.exp(log_w)
    return w / w.sum()
