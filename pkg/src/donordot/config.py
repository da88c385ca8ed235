"""Device and sweep-plan ingestion from YAML documents.

The device schema is strict: unknown keys raise ConfigError naming the
offender.  Per-island blocks ``donor`` and ``dot`` accept

    c_source, c_drain, c_gate, c_back   terminal capacitances (aF), required
    levels                              list of [offset_meV, degeneracy],
                                        or the string "metallic"
    gamma_source, gamma_drain           bare lead rates (Hz), default 1e9
    window                              [min, max] occupancy, defaults
                                        [0, 4] for the donor, [0, 12] for the dot
    level_offset                        per-electron alignment energy (meV),
                                        default 0

and the top level additionally takes ``c_mutual`` (aF, default 0) and
``temperature_K`` (default 4.2).

Plan files carry ``axis1``/``axis2`` blocks (name/start/stop/steps), a
``fixed`` block for the remaining terminals, an ``observable`` and the
optional overrides ``temperature_K`` and ``c_mutual``.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import yaml

from .device import CapacitanceSet, DeviceSpec, DotSpec, DotSpectrum
from .errors import ConfigError
from .sweep import AXIS_NAMES, OBSERVABLES, SweepAxis, SweepPlan

_DOT_KEYS = {
    "c_source", "c_drain", "c_gate", "c_back",
    "levels", "gamma_source", "gamma_drain", "window", "level_offset",
}
_DEVICE_KEYS = {"donor", "dot", "c_mutual", "temperature_K"}
_PLAN_KEYS = {"axis1", "axis2", "fixed", "observable", "temperature_K", "c_mutual"}
_AXIS_KEYS = {"name", "start", "stop", "steps"}

_DEFAULT_WINDOWS = {"donor": (0, 4), "dot": (0, 12)}


def _as_mapping(obj, key):
    if not isinstance(obj, dict):
        raise ConfigError(f"expected a mapping, got {type(obj).__name__}", key=key)
    return obj


def _as_number(obj, key):
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ConfigError(f"expected a number, got {obj!r}", key=key)
    return float(obj)


def _reject_unknown(mapping, allowed, context):
    for key in mapping:
        if key not in allowed:
            raise ConfigError("unknown key", key=f"{context}{key}")


def _parse_spectrum(raw, context):
    if raw == "metallic":
        return DotSpectrum.metallic()
    if not isinstance(raw, list) or not raw:
        raise ConfigError(
            'expected "metallic" or a list of [offset_meV, degeneracy] pairs',
            key=context,
        )
    levels = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, list) or len(entry) != 2:
            raise ConfigError(
                f"level {i} must be a [offset_meV, degeneracy] pair", key=context
            )
        offset = _as_number(entry[0], f"{context}[{i}][0]")
        degeneracy = entry[1]
        if isinstance(degeneracy, bool) or not isinstance(degeneracy, int):
            raise ConfigError(f"level {i} degeneracy must be an integer", key=context)
        levels.append((offset, degeneracy))
    try:
        return DotSpectrum.discrete(levels)
    except ValueError as exc:
        raise ConfigError(str(exc), key=context) from exc


def _parse_dot(raw, name):
    block = _as_mapping(raw, name)
    context = f"{name}."
    _reject_unknown(block, _DOT_KEYS, context)
    for required in ("c_source", "c_drain", "c_gate", "c_back", "levels"):
        if required not in block:
            raise ConfigError("required key missing", key=f"{context}{required}")
    caps_kwargs = {
        key: _as_number(block[key], context + key)
        for key in ("c_source", "c_drain", "c_gate", "c_back")
    }
    spectrum = _parse_spectrum(block["levels"], context + "levels")
    window = block.get("window", list(_DEFAULT_WINDOWS[name]))
    if (
        not isinstance(window, list)
        or len(window) != 2
        or any(isinstance(v, bool) or not isinstance(v, int) for v in window)
    ):
        raise ConfigError("expected [min, max] integers", key=f"{context}window")
    try:
        return DotSpec(
            caps=CapacitanceSet(**caps_kwargs),
            spectrum=spectrum,
            gamma_source=_as_number(block.get("gamma_source", 1.0e9), context + "gamma_source"),
            gamma_drain=_as_number(block.get("gamma_drain", 1.0e9), context + "gamma_drain"),
            window=(window[0], window[1]),
            level_offset=_as_number(block.get("level_offset", 0.0), context + "level_offset"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), key=name) from exc


def parse_device(document) -> DeviceSpec:
    """Build a DeviceSpec from a parsed YAML mapping (strict schema)."""
    top = _as_mapping(document, "<device>")
    _reject_unknown(top, _DEVICE_KEYS, "")
    for required in ("donor", "dot"):
        if required not in top:
            raise ConfigError("required block missing", key=required)
    try:
        return DeviceSpec(
            donor=_parse_dot(top["donor"], "donor"),
            dot=_parse_dot(top["dot"], "dot"),
            c_mutual=_as_number(top.get("c_mutual", 0.0), "c_mutual"),
            temperature=_as_number(top.get("temperature_K", 4.2), "temperature_K"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_device(path) -> DeviceSpec:
    """Read and validate a device configuration file."""
    return parse_device(_load_yaml(path))


def _load_yaml(path):
    text = Path(path).read_text()
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc


def _parse_axis(raw, key):
    block = _as_mapping(raw, key)
    _reject_unknown(block, _AXIS_KEYS, f"{key}.")
    for required in _AXIS_KEYS:
        if required not in block:
            raise ConfigError("required key missing", key=f"{key}.{required}")
    steps = block["steps"]
    if isinstance(steps, bool) or not isinstance(steps, int):
        raise ConfigError("steps must be an integer", key=f"{key}.steps")
    try:
        return SweepAxis(
            name=str(block["name"]),
            start=_as_number(block["start"], f"{key}.start"),
            stop=_as_number(block["stop"], f"{key}.stop"),
            steps=steps,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), key=key) from exc


def parse_plan(document) -> tuple[SweepPlan, dict]:
    """Build a SweepPlan plus device overrides from a parsed plan mapping.

    Returns (plan, overrides) where overrides may carry ``temperature``
    and/or ``c_mutual`` values the plan pins on the device.
    """
    top = _as_mapping(document, "<plan>")
    _reject_unknown(top, _PLAN_KEYS, "")
    for required in ("axis1", "axis2"):
        if required not in top:
            raise ConfigError("required block missing", key=required)
    fixed_raw = top.get("fixed", {})
    fixed = {}
    for key, value in _as_mapping(fixed_raw, "fixed").items():
        if key not in AXIS_NAMES:
            raise ConfigError("unknown terminal", key=f"fixed.{key}")
        fixed[key] = _as_number(value, f"fixed.{key}")
    observable = top.get("observable", "log10_conductance")
    if observable not in OBSERVABLES:
        raise ConfigError(
            f"observable must be one of {sorted(OBSERVABLES)}", key="observable"
        )
    try:
        plan = SweepPlan(
            axis1=_parse_axis(top["axis1"], "axis1"),
            axis2=_parse_axis(top["axis2"], "axis2"),
            fixed=fixed,
            observable=observable,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    overrides = {}
    if "temperature_K" in top:
        overrides["temperature"] = _as_number(top["temperature_K"], "temperature_K")
    if "c_mutual" in top:
        overrides["c_mutual"] = _as_number(top["c_mutual"], "c_mutual")
    return plan, overrides


def load_plan(path) -> tuple[SweepPlan, dict]:
    """Read and validate a sweep-plan file."""
    return parse_plan(_load_yaml(path))


def device_to_document(device: DeviceSpec) -> dict:
    """Canonical plain-dict form of a device, suitable for hashing/manifests."""

    def dot_doc(spec: DotSpec) -> dict:
        if spec.spectrum.kind == "metallic":
            levels = "metallic"
        else:
            levels = [[off, deg] for off, deg in spec.spectrum.levels]
        return {
            "c_source": spec.caps.c_source,
            "c_drain": spec.caps.c_drain,
            "c_gate": spec.caps.c_gate,
            "c_back": spec.caps.c_back,
            "levels": levels,
            "gamma_source": spec.gamma_source,
            "gamma_drain": spec.gamma_drain,
            "window": list(spec.window),
            "level_offset": spec.level_offset,
        }

    return {
        "donor": dot_doc(device.donor),
        "dot": dot_doc(device.dot),
        "c_mutual": device.c_mutual,
        "temperature_K": device.temperature,
    }


def config_digest(device: DeviceSpec) -> str:
    """Stable sha256 digest of the canonicalized device document."""
    canonical = json.dumps(device_to_document(device), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
