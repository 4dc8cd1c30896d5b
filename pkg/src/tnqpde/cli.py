"""Command-line entry point.

Exit codes: 0 ok, 2 invalid config or input file, 3 missing artifact from an
earlier stage, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import pipeline
from .fcidump import FcidumpError, exchange_matrix, parse_fcidump
from .ordering import GAConfig, ga_reorder, ordering_cost

EXIT_OK, EXIT_CONFIG, EXIT_MISSING, EXIT_NUMERICAL = 0, 2, 3, 4

log = logging.getLogger("tnqpde")


def load_config(path: str | None) -> pipeline.RunConfig:
    if path is None:
        return pipeline.RunConfig().validate()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise pipeline.ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise pipeline.ConfigError("config", f"not valid TOML: {exc}") from None
    return pipeline.RunConfig.from_dict(data)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return repr(v)


def dump_config(cfg: pipeline.RunConfig) -> str:
    """Effective configuration as TOML; keys whose value is unset are commented out."""
    d = asdict(cfg)
    lines = [f"output = {_toml_value(d.pop('output'))}"]
    for section, body in d.items():
        lines.append(f"\n[{section}]")
        for k, v in body.items():
            lines.append(f"# {k} = (unset)" if v is None else f"{k} = {_toml_value(v)}")
    return "\n".join(lines) + "\n"


def cmd_reorder(fcidump_path: str, ga: GAConfig, seed: int, out: str | None) -> dict:
    ints = parse_fcidump(fcidump_path)
    k = exchange_matrix(ints)
    res = ga_reorder(k, ga, seed)
    report = {"permutation": res.perm, "cost_before": ordering_cost(k, range(ints.n_orb)), "cost_after": res.cost}
    text = json.dumps(report, indent=1) + "\n"
    if out:
        Path(out).write_text(text)
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tnqpde", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("prepare", "build the Hamiltonian, DMRG states and reference MPO"),
                       ("compress", "compress preparation and evolution circuits; write metrics"),
                       ("estimate", "run the Bayesian estimation loop"),
                       ("run", "prepare, compress and estimate in one go")):
        s = sub.add_parser(name, help=text)
        s.add_argument("config", nargs="?", help="TOML run configuration (defaults if omitted)")
        s.add_argument("--force", action="store_true", help="ignore cached artifacts")
    s = sub.add_parser("reorder", help="GA orbital ordering of an FCIDUMP file")
    s.add_argument("fcidump")
    s.add_argument("--config", help="TOML file whose [ga] table sets GA parameters")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="write the permutation JSON here")
    s = sub.add_parser("config", help="print the effective configuration")
    s.add_argument("config", nargs="?")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "reorder":
            ga = load_config(args.config).ga if args.config else GAConfig()
            report = cmd_reorder(args.fcidump, ga, args.seed, args.out)
            print(json.dumps(report))
            return EXIT_OK
        cfg = load_config(args.config)
        if args.command == "config":
            sys.stdout.write(dump_config(cfg))
            return EXIT_OK
        if args.command == "prepare":
            print(pipeline.prepare(cfg, args.force))
        elif args.command == "compress":
            out = pipeline.compress(cfg, args.force)
            print(out)
            print((out / "metrics.json").read_text(), end="")
        elif args.command == "estimate":
            out = pipeline.estimate(cfg, args.force)
            trace = json.loads((out / "trace.json").read_text())
            print(out)
            print(json.dumps({k: trace[k] for k in ("estimate", "sigma", "termination")}))
        else:
            print(json.dumps(pipeline.run_all(cfg, args.force), indent=1))
        return EXIT_OK
    except (pipeline.ConfigError, FcidumpError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except pipeline.MissingArtifact as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (pipeline.NumericalFailure, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
