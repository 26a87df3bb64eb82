"""Command line interface: ``fsrs simulate|resolve|sweep|validate``.

Exit codes: 0 success, 1 computation error or failed check, 2 usage error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import SCENARIOS, ConfigError, build_config, load_config
from .io import write_json
from .resolver import compare_with_master
from .runner import resolve_threads, run_scenario
from .validation import run_suite

log = logging.getLogger("polariton_fsrs")


class UsageError(Exception):
    pass


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file")
    common.add_argument("--scenario", choices=SCENARIOS, help="canned parameter set (overrides the file)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="worker threads (default: FSRS_THREADS or config)")
    common.add_argument("--format", choices=("csv", "json"), help="spectrum file format")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="fsrs", description="Polariton stimulated Raman spectra and population dynamics")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run a scenario and write spectra")

    r = sub.add_parser("resolve", parents=[common], help="resolve populations from peaks and compare with propagation")
    r.add_argument("--tolerance", type=float, default=0.05, help="max absolute deviation (default 0.05)")

    s = sub.add_parser("sweep", parents=[common], help="cartesian sweep over detuning and bath parameters")
    s.add_argument("--detuning", type=float, nargs="+", help="detunings in units of g")
    s.add_argument("--temperature", type=float, nargs="+", help="bath temperatures (K)")
    s.add_argument("--lambda0", type=float, nargs="+", help="reorganisation energies (eV)")
    s.add_argument("--gamma0", type=float, nargs="+", help="bath cutoffs (rad/ps)")
    s.add_argument("--dephasing", type=float, nargs="+", help="extra dephasing rates (rad/ps)")

    sub.add_parser("validate", parents=[common], help="run the invariant suite")
    return ap


def _config(args):
    if args.config:
        return load_config(args.config, args.scenario)
    return build_config({}, args.scenario)


def cmd_simulate(args):
    cfg = _config(args)
    path, _ = run_scenario(cfg, args.out, args.format, args.threads)
    print(path)
    return 0


def cmd_resolve(args):
    cfg = _config(args)
    times = cfg.trajectory_axis()
    reports = {}
    for variant, pump in (("1d", "up"), ("2d", "up"), ("2d", "lp")):
        rep = compare_with_master(cfg.system, cfg.bath, cfg.pulses, times, variant, pump)
        reports["1d" if variant == "1d" else f"2d_{pump}"] = rep
    ok = all(r.within(args.tolerance) for r in reports.values())
    doc = {
        "scenario": cfg.scenario,
        "tolerance": args.tolerance,
        "within_tolerance": ok,
        "reports": {k: r.to_dict() for k, r in reports.items()},
    }
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        print(write_json(doc, Path(args.out) / "resolve_report.json"))
    for k, r in reports.items():
        worst = max(r.max_abs.values())
        print(f"{k:6s} max|dev| {worst:.3e}  cond {r.condition_number:.1f}  {'ok' if r.within(args.tolerance) else 'EXCEEDS'}")
    return 0 if ok else 1


def cmd_sweep(args):
    base = {}
    if args.config:
        import yaml

        base = yaml.safe_load(Path(args.config).read_text()) or {}
        if not isinstance(base, dict):
            raise ConfigError("<root>: expected a mapping")
    axes = {
        ("system", "detuning_g"): args.detuning,
        ("bath", "temperature_k"): args.temperature,
        ("bath", "lambda0_ev"): args.lambda0,
        ("bath", "gamma0"): args.gamma0,
        ("bath", "extra_dephasing"): args.dephasing,
    }
    axes = {k: v for k, v in axes.items() if v}
    if not axes:
        raise UsageError("sweep needs at least one of --detuning, --temperature, --lambda0, --gamma0, --dephasing")
    out = Path(args.out or "fsrs_sweep")
    index = []
    for point in itertools.product(*axes.values()):
        data = json.loads(json.dumps(base))
        name = []
        for (sec, key), val in zip(axes, point):
            data.setdefault(sec, {})[key] = val
            name.append(f"{key}={val:g}")
        cfg = build_config(data, args.scenario)
        path, _ = run_scenario(cfg, out / "_".join(name), args.format, args.threads)
        index.append({"point": dict(zip([f"{s}.{k}" for s, k in axes], point)), "manifest": str(path)})
        print(path)
    write_json({"points": index}, out / "sweep.json")
    return 0


def cmd_validate(args):
    cfg = _config(args)
    checks = run_suite(cfg.system, cfg.bath, cfg.pulses)
    for c in checks:
        print(c.line())
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_json({c.name: {"value": c.value, "limit": c.limit, "passed": c.passed} for c in checks},
                   Path(args.out) / "validation.json")
    return 0 if all(c.passed for c in checks) else 1


COMMANDS = {"simulate": cmd_simulate, "resolve": cmd_resolve, "sweep": cmd_sweep, "validate": cmd_validate}


def main(argv=None):
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        try:
            resolve_threads(args.threads)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"fsrs: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"fsrs: computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
