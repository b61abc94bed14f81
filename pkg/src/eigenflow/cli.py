"""Command line front end: one subcommand per experiment type.

Exit status is 0 exactly when the experiment report's summary passes,
2 on configuration errors, 1 on runtime failures.
"""

import argparse
import sys

from .backend import set_num_threads
from .errors import ConfigError, EigenflowError
from .harness import load_config, run_experiment

_SUBCOMMANDS = {
    "simulate": "Simulate",
    "moments": "Moments",
    "clt": "CLT",
    "compare": "Compare",
    "stationarity": "Stationarity",
    "identity": "Identity",
    "oracle-match": "OracleMatch",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="eigenflow",
        description="Simulation laboratory for eigenvalue particle systems "
                    "and their high-dimensional fluctuation limits.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, exp in sorted(_SUBCOMMANDS.items()):
        p = sub.add_parser(name, help="run a %s experiment" % exp)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for replica execution")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    expected = _SUBCOMMANDS[args.command]
    try:
        cfg = load_config(args.config)
        if cfg.experiment != expected:
            raise ConfigError("experiment",
                              "config declares %r but subcommand expects %r"
                              % (cfg.experiment, expected))
        if args.out is not None:
            cfg.output_dir = args.out
        if args.threads > 1:
            set_num_threads(args.threads)
        report = run_experiment(cfg, threads=max(1, args.threads))
    except (ConfigError, OSError) as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    except EigenflowError as e:
        print("error: %s" % e, file=sys.stderr)
        return 1
    for check in report.get("checks", []):
        status = "PASS" if check.get("passed", True) else "FAIL"
        print("%-30s %s" % (check.get("name", "?"), status))
    print("summary: %s" % ("PASS" if report["summary_pass"] else "FAIL"))
    return 0 if report["summary_pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
