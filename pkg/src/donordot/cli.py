"""Command-line front end: simulate | ground-state | extract.

Each simulation writes a deterministic CSV map plus a JSON manifest
sidecar recording the resolved device, plan, tool version and a digest of
the canonical configuration; re-running with the same inputs reproduces
the CSV byte for byte at any --jobs setting.  Exit codes: 0 success,
1 I/O, 2 configuration/schema, 3 solver, 4 unparseable map, 5 extraction.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from . import __version__
from .analysis import extract_backgate, extract_diamond, extract_honeycomb
from .config import (
    config_digest,
    device_to_document,
    load_device,
    load_plan,
    parse_device,
)
from .device import DeviceSpec
from .errors import ConfigError, ExtractionError, MapFormatError, SolverError
from .sweep import (
    AXIS_NAMES,
    OBSERVABLES,
    ConductanceMap,
    GroundStateMap,
    SweepAxis,
    SweepPlan,
    ground_state_map,
    read_map_csv,
    run_sweep,
    write_map_csv,
)

_EXIT_IO = 1
_EXIT_CONFIG = 2
_EXIT_SOLVER = 3
_EXIT_MAP = 4
_EXIT_EXTRACT = 5


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written beside every generated map."""

    device: DeviceSpec
    plan: SweepPlan
    command: str
    version: str
    digest: str
    timestamp: str

    def to_document(self) -> dict:
        plan_doc = {
            "axis1": vars(self.plan.axis1).copy(),
            "axis2": vars(self.plan.axis2).copy(),
            "fixed": dict(sorted(self.plan.fixed.items())),
            "observable": self.plan.observable,
        }
        return {
            "tool": "donordot",
            "version": self.version,
            "command": self.command,
            "config_digest": self.digest,
            "device": device_to_document(self.device),
            "plan": plan_doc,
            "timestamp": self.timestamp,
        }


def bundled_data_path(name: str) -> Path | None:
    """Path of a bundled config/plan, or None if no such resource exists."""
    candidate = resources.files("donordot").joinpath("data", name)
    try:
        if candidate.is_file():
            return Path(str(candidate))
    except (OSError, TypeError):
        return None
    return None


def _resolve_input(raw: str, kind: str) -> Path:
    path = Path(raw)
    if path.is_file():
        return path
    if "/" not in raw and "\\" not in raw:
        bundled = bundled_data_path(raw)
        if bundled is not None:
            return bundled
    raise FileNotFoundError(f"{kind} file not found: {raw}")


def _parse_axis_flag(text: str, key: str) -> SweepAxis:
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError("expected name:start:stop:steps", key=key)
    name, start, stop, steps = parts
    if name not in AXIS_NAMES:
        raise ConfigError(f"axis name must be one of {AXIS_NAMES}", key=key)
    try:
        return SweepAxis(name, float(start), float(stop), int(steps))
    except ValueError as exc:
        raise ConfigError(str(exc), key=key) from exc


def _compose_plan(args) -> tuple[SweepPlan, dict]:
    plan, overrides = None, {}
    if args.plan:
        plan, overrides = load_plan(_resolve_input(args.plan, "plan"))
    axis1 = _parse_axis_flag(args.axis1, "--axis1") if args.axis1 else None
    axis2 = _parse_axis_flag(args.axis2, "--axis2") if args.axis2 else None
    if plan is None:
        if axis1 is None or axis2 is None:
            raise ConfigError("provide --plan or both --axis1 and --axis2")
        plan = SweepPlan(
            axis1=axis1,
            axis2=axis2,
            fixed={},
            observable=args.observable or "log10_conductance",
        )
    else:
        changes = {}
        if axis1 is not None:
            changes["axis1"] = axis1
        if axis2 is not None:
            changes["axis2"] = axis2
        if args.observable:
            changes["observable"] = args.observable
        if changes:
            fixed = {
                k: v
                for k, v in plan.fixed.items()
                if k
                not in (
                    (axis1 or plan.axis1).name,
                    (axis2 or plan.axis2).name,
                )
            }
            try:
                plan = replace(plan, fixed=fixed, **changes)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
    return plan, overrides


def _resolve_device(args, overrides: dict) -> DeviceSpec:
    device = load_device(_resolve_input(args.config, "config"))
    if overrides:
        device = replace(device, **overrides)
    if args.temperature is not None:
        device = replace(device, temperature=args.temperature)
    if args.cmutual is not None:
        device = replace(device, c_mutual=args.cmutual)
    return device


def _write_outputs(result, device, plan, command, out_path):
    out = Path(out_path)
    write_map_csv(result, out)
    manifest = RunManifest(
        device=device,
        plan=plan,
        command=command,
        version=__version__,
        digest=config_digest(device),
        timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )
    manifest_path = out.with_name(out.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest.to_document(), indent=2) + "\n")
    return manifest_path


def _cmd_simulate(args) -> int:
    plan, overrides = _compose_plan(args)
    device = _resolve_device(args, overrides)
    result = run_sweep(device, plan, jobs=args.jobs)
    manifest = _write_outputs(result, device, plan, "simulate", args.out)
    print(f"wrote {args.out} ({plan.shape[0]}x{plan.shape[1]} {plan.observable}) + {manifest.name}")
    return 0


def _cmd_ground_state(args) -> int:
    plan, overrides = _compose_plan(args)
    device = _resolve_device(args, overrides)
    result = ground_state_map(device, plan)
    manifest = _write_outputs(result, device, plan, "ground-state", args.out)
    print(f"wrote {args.out} ({plan.shape[0]}x{plan.shape[1]} ground state) + {manifest.name}")
    return 0


def _load_reference_device(args) -> DeviceSpec | None:
    if args.config:
        return load_device(_resolve_input(args.config, "config"))
    sidecar = Path(args.map).with_name(Path(args.map).name + ".manifest.json")
    if sidecar.is_file():
        try:
            return parse_device(json.loads(sidecar.read_text())["device"])
        except (KeyError, json.JSONDecodeError) as exc:
            raise MapFormatError(f"unreadable manifest sidecar: {exc}") from exc
    return None


def _cmd_extract(args) -> int:
    result = read_map_csv(Path(args.map))
    device = _load_reference_device(args)
    if args.mode == "honeycomb":
        if not isinstance(result, GroundStateMap):
            raise ExtractionError("honeycomb mode expects a ground-state map")
        report = extract_honeycomb(result, device)
    elif args.mode == "diamond":
        if not isinstance(result, ConductanceMap):
            raise ExtractionError("diamond mode expects a conductance map")
        report = extract_diamond(result, device, transition=args.transition)
    else:
        if not isinstance(result, ConductanceMap):
            raise ExtractionError("backgate mode expects a conductance map")
        report = extract_backgate(result, device)
    sys.stdout.write(report.to_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="donordot",
        description="Transport maps and parameter extraction for a donor+dot device",
    )
    parser.add_argument("--version", action="version", version=f"donordot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_sim_args(p):
        p.add_argument("--config", required=True, help="device YAML (path or bundled name)")
        p.add_argument("--plan", help="sweep plan YAML (path or bundled name)")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--jobs", type=int, default=None, help="worker thread cap")
        p.add_argument("--temperature", type=float, default=None, help="override (K)")
        p.add_argument("--cmutual", type=float, default=None, help="override (aF)")
        p.add_argument("--axis1", help="name:start:stop:steps (mV)")
        p.add_argument("--axis2", help="name:start:stop:steps (mV)")
        p.add_argument("--observable", choices=OBSERVABLES, default=None)

    sim = sub.add_parser("simulate", help="conductance/current map over a voltage grid")
    add_sim_args(sim)
    sim.set_defaults(func=_cmd_simulate)

    ground = sub.add_parser("ground-state", help="minimum-energy (n,m) map over gate voltages")
    add_sim_args(ground)
    ground.set_defaults(func=_cmd_ground_state)

    extract = sub.add_parser("extract", help="fit parameters out of a generated map")
    extract.add_argument("--map", required=True, help="CSV produced by this tool")
    extract.add_argument(
        "--mode", required=True, choices=("diamond", "backgate", "honeycomb")
    )
    extract.add_argument("--transition", type=int, default=0, help="diamond index")
    extract.add_argument("--config", help="device YAML for closed-form reference values")
    extract.set_defaults(func=_cmd_extract)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except SolverError as exc:
        print(f"error: solver: {exc}", file=sys.stderr)
        return _EXIT_SOLVER
    except MapFormatError as exc:
        print(f"error: map: {exc}", file=sys.stderr)
        return _EXIT_MAP
    except ExtractionError as exc:
        print(f"error: extraction: {exc}", file=sys.stderr)
        return _EXIT_EXTRACT
    except FileNotFoundError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return _EXIT_IO
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return _EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
