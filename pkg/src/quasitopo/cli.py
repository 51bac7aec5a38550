"""Command-line entry point: ``quasitopo {bands,ldos,evolve,sweep-phi,hbt}``.

Exit codes: 0 success, 2 config/usage error, 3 numerical failure,
4 undefined estimate.
"""

from __future__ import annotations

import argparse
import copy
import datetime as _dt
import json
import logging
import sys
from pathlib import Path

from . import __version__
from . import config as cfg
from .errors import ConfigError, ConvergenceError, ParameterError, UndefinedEstimateError
from .runs import MANIFEST, run

log = logging.getLogger("quasitopo")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_UNDEFINED = 4

SUBCOMMANDS = ("bands", "ldos", "evolve", "sweep-phi", "hbt")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasitopo",
        description="Off-diagonal Harper quasi-crystal: spectra, boundary modes, "
        "single-photon propagation and heralded HBT statistics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML experiment config")
    common.add_argument("--n-sites", type=int)
    common.add_argument("--t", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--b", type=float)
    phase = common.add_mutually_exclusive_group()
    phase.add_argument("--phi", type=float, help="modulation phase in radians")
    phase.add_argument("--phi-pi", type=float, help="modulation phase in units of pi")
    common.add_argument("--input-site", type=int)
    common.add_argument("--z", type=float, help="propagation length (dimensionless)")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir")
    common.add_argument("--no-timestamp", action="store_true",
                        help="fixed run directory and no time fields, for byte-exact reruns")
    common.add_argument("--print-config", action="store_true",
                        help="print the resolved config as TOML and exit")
    common.add_argument("-v", "--verbose", action="store_true")

    helps = {
        "bands": "spectrum versus modulation phase",
        "ldos": "local density of states",
        "evolve": "propagate a photon from one input site",
        "sweep-phi": "run a list of (N, phi, input) cases",
        "hbt": "heralded HBT Monte Carlo and alpha",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _apply_overrides(raw: dict, kind: str, args) -> dict:
    raw = copy.deepcopy(raw)
    lattice_flags = {"n_sites": args.n_sites, "t": args.t, "lambda": args.lam, "b": args.b}
    if any(v is not None for v in lattice_flags.values()) or args.phi is not None \
            or args.phi_pi is not None:
        lattice = raw.setdefault("lattice", dict(cfg.DEFAULT_LATTICE))
        lattice.update({k: v for k, v in lattice_flags.items() if v is not None})
        if args.phi is not None:
            lattice.pop("phi_pi", None)
            lattice["phi"] = args.phi
        if args.phi_pi is not None:
            lattice.pop("phi", None)
            lattice["phi_pi"] = args.phi_pi
    block = raw.setdefault(kind, {})

    def need(flag, allowed):
        if kind not in allowed:
            raise ConfigError(flag, f"not applicable to '{kind.replace('_', '-')}'")

    if args.input_site is not None:
        need("--input-site", ("evolve",))
        block["input_site"] = args.input_site
    if args.z is not None:
        need("--z", ("evolve", "sweep_phi"))
        block["z"] = args.z
        block.pop("z_samples", None)
    if args.seed is not None:
        need("--seed", ("hbt",))
        block["seed"] = args.seed
    if args.out_dir is not None:
        raw["out_dir"] = args.out_dir
    return raw


def _report(manifest, kind: str):
    s = manifest.summary
    print(f"run directory: {manifest.run_dir}")
    if kind == "evolve":
        print(f"xi_{s['input_site']} (d=7) = {s['xi_input']:.4f}")
    elif kind == "sweep_phi":
        print("n_sites  phi/pi  input  xi_input  left  right")
        for c in s["cases"]:
            print(f"{c['n_sites']:7d}  {c['phi_pi']:6.3f}  {c['input_site']:5d}  "
                  f"{c['xi_input']:8.4f}  {c['left_modes']:4d}  {c['right_modes']:5d}")
    elif kind == "hbt":
        print(f"alpha = {s['formatted']}")
    elif kind == "ldos":
        print(f"boundary modes: left={s['left']} right={s['right']} (sigma={s['sigma']:.4g})")
    elif kind == "bands":
        print(f"phi points: {s['phi_points']}; edge-mode points: "
              f"left={s['left_mode_points']} right={s['right_mode_points']}")


def _failure_manifest(out_dir: str, kind: str, exc: Exception, timestamp: bool):
    # config errors happen before a run directory exists; still leave a manifest
    name = f"{kind}-failed" if not timestamp else \
        f"{kind}-failed-{_dt.datetime.now(_dt.timezone.utc):%Y%m%dT%H%M%S_%f}"
    try:
        run_dir = Path(out_dir) / name
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / MANIFEST).write_text(json.dumps({
            "schema_version": "1",
            "status": "failed",
            "tool_version": __version__,
            "config": None,
            "files": [],
            "error": f"{type(exc).__name__}: {exc}",
        }, indent=2) + "\n", encoding="utf-8")
    except OSError:
        pass


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    kind = args.command.replace("-", "_")
    timestamp = not args.no_timestamp
    out_dir = args.out_dir or "runs"
    try:
        raw = cfg.load_raw(args.config) if args.config else {}
        out_dir = args.out_dir or str(raw.get("out_dir", "runs"))
        config = cfg.ExperimentConfig.from_dict(_apply_overrides(raw, kind, args), kind)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        _failure_manifest(out_dir, kind, exc, timestamp)
        return EXIT_USAGE

    if args.print_config:
        sys.stdout.write(config.dumps())
        return EXIT_OK

    log.debug("resolved config: %s", config.to_dict())
    try:
        manifest = run(config, timestamp=timestamp)
    except UndefinedEstimateError as exc:
        print(f"undefined estimate: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except (ConvergenceError, ArithmeticError, ParameterError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _report(manifest, kind)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
