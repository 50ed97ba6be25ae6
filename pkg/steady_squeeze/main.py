#!/usr/bin/env python3
"""
Steady-state spin squeezing sweeps
Entry point for the exact and perturbative scan commands.

Usage:
    python -m steady_squeeze.main xyz-scan --n 8 --backend both --out output/xyz.csv
    python -m steady_squeeze.main dicke-scan --n 50 100 200 300 --omega-max 1.0
"""

import argparse
import logging
import sys
import traceback

from dotenv import load_dotenv

from steady_squeeze.config import constants
from steady_squeeze.config.scan_config import COMMANDS, load_scan_config
from steady_squeeze.errors import ConfigError
from steady_squeeze.scans.dicke import cmd_dicke_scan
from steady_squeeze.scans.perturb_check import cmd_perturb_check
from steady_squeeze.scans.two_emitter import cmd_angle_map, cmd_tfi_scan, cmd_xyz_scan

# Load environment variables
load_dotenv()

SCANS = {
    "xyz-scan": cmd_xyz_scan,
    "angle-map": cmd_angle_map,
    "tfi-scan": cmd_tfi_scan,
    "dicke-scan": cmd_dicke_scan,
}

TITLES = {
    "xyz-scan": "XYZ MODEL: SQUEEZING AGAINST THE ANISOTROPY",
    "angle-map": "OPTIMAL SQUEEZING ANGLE MAP",
    "tfi-scan": "TRANSVERSE-FIELD ISING: SQUEEZING AGAINST THE COUPLING",
    "dicke-scan": "DRIVEN DICKE MODEL: SQUEEZING AGAINST THE DRIVE",
    "perturb-check": "PERTURBATIVE ENGINE INVARIANT SUITES",
}


def _print_config(cfg):
    print("🔍 Configuration validated:")
    print(f"   - Model: {cfg.model}")
    print(f"   - Emitters: {', '.join(str(n) for n in cfg.n)}")
    print(f"   - Backend: {cfg.backend}")
    print(f"   - Steps: {cfg.steps}")
    print(f"   - Solver tolerance: {cfg.tol:g}")
    print(f"   - Output: {cfg.output_path}")


def run_command(cfg) -> int:
    """Run one configured command; returns the process exit code."""
    print("=" * 80)
    print(f"⚛️  {TITLES[cfg.command]}")
    print("=" * 80)
    _print_config(cfg)
    print("=" * 80)

    if cfg.command == "perturb-check":
        print("\n🔄 Running invariant suites...")
        print("-" * 50)
        report = cmd_perturb_check(cfg)
        for name, suite in report["suites"].items():
            mark = "✅" if suite["passed"] else "❌"
            print(f"{mark} {name}: {suite['message']}")
            for check in suite["checks"].values():
                if not check["passed"]:
                    print(f"     • {check['name']}: measured {check['measured']:.3e} vs {check['threshold']:.3e}")
        print("\n" + "=" * 80)
        print(f"📊 Report written to: {report['path']}")
        print("=" * 80)
        return 0

    print(f"\n🔄 Scanning {cfg.steps} points per emitter count...")
    print("-" * 50)
    result = SCANS[cfg.command](cfg)

    print("\n" + "=" * 80)
    print("🎉 SCAN COMPLETE!")
    print("=" * 80)
    print("📋 SUMMARY:")
    print(f"   - Rows written: {result.rows}")
    print(f"   - Flagged rows: {result.flagged}")
    print(f"   - CSV: {result.path}")
    print("=" * 80)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file with scan settings (flags override it)")
    common.add_argument("--model", help="Model id: xyz, tfi, dicke (or all for perturb-check)")
    common.add_argument("--n", nargs="+", type=int, help="Emitter count(s)")
    common.add_argument("--jx", type=float, help="Jx coupling in units of the decay rate")
    common.add_argument("--jy", type=float, help="Jy coupling in units of the decay rate")
    common.add_argument("--jz", type=float, help="Jz coupling in units of the decay rate")
    common.add_argument("--j-mean", type=float, help="Fixed J = (Jx + Jy)/2 for xyz-scan")
    common.add_argument("--delta", type=float, help="Transverse field Delta for the TFI model")
    common.add_argument("--gamma", type=float, help="Decay rate (Gamma for the Dicke model)")
    common.add_argument("--omega-max", type=float, help="Largest 2 Omega / Gamma of dicke-scan")
    common.add_argument("--start", type=float, help="First value of the scanned axis")
    common.add_argument("--stop", type=float, help="Last value of the scanned axis")
    common.add_argument("--steps", type=int, help="Points on the scanned axis (>= 2)")
    common.add_argument("--backend", choices=("exact", "pert", "both"), help="Backends to run")
    common.add_argument("--out", help="Output file (CSV, or JSON for perturb-check)")
    common.add_argument("--tol", type=float, help=f"Solver tolerance (default: {constants.SOLVER_TOL:g})")
    common.add_argument("--n-jobs", type=int, help=f"Parallel scan workers (default: {constants.N_JOBS})")
    common.add_argument("--fault", choices=("ladder",), help="perturb-check: add a fault-injection suite")

    parser = argparse.ArgumentParser(
        description="Steady-state spin squeezing of driven-dissipative emitter arrays",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m steady_squeeze.main xyz-scan --n 8 --j-mean -0.8 --jz 1 --start -0.1 --stop 0.1
  python -m steady_squeeze.main angle-map --model tfi --start -2 --stop 2 --steps 5
  python -m steady_squeeze.main tfi-scan --n 8 20 --backend pert --delta -6
  python -m steady_squeeze.main dicke-scan --n 50 100 200 300 --omega-max 1.0 --steps 41
  python -m steady_squeeze.main perturb-check --fault ladder
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub.add_parser(command, parents=[common], help=TITLES[command].capitalize())
    return parser


def main(argv=None) -> int:
    """Parse arguments, validate the configuration and run the command."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(constants.LOG_LEVEL).upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    flags = {
        name: getattr(args, name)
        for name in (
            "model", "n", "jx", "jy", "jz", "j_mean", "delta", "gamma", "omega_max",
            "start", "stop", "steps", "backend", "out", "tol", "n_jobs", "fault",
        )
    }
    try:
        cfg = load_scan_config(args.command, args.config, **flags)
    except ConfigError as e:
        print(f"❌ Error: {e}")
        return 2

    try:
        return run_command(cfg)
    except KeyboardInterrupt:
        print("\n⚠️ Scan interrupted by user")
        return 130
    except ConfigError as e:
        print(f"❌ Error: {e}")
        return 2
    except Exception as e:
        print(f"❌ Fatal error: {e}")
        print(f"Full traceback: {traceback.format_exc()}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
