"""Command-line front end.

    coa <solve|converge|validate|maxp> --config PATH [--out PATH] [--seed-check]

Exit codes: 0 success, 1 usage or configuration error, 2 model-validation
failure, 3 solver failure.
"""

import argparse
import json
import sys

from .config import parse_config
from .convergence import refinement_study
from .discretize import assemble
from .eigensolver import SolverConfig, solve
from .exceptions import ConfigError, InvalidModelError, SolverError
from .maxprinciple import locality_experiment
from .model import loss_function, validate_model

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MODEL = 2
EXIT_SOLVER = 3

COMMANDS = ("solve", "converge", "validate", "maxp")
DEFAULT_FORMAT = {"solve": "json", "converge": "csv", "validate": "json", "maxp": "csv"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _json(payload):
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _csv_from_rows(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(row[name]) for name in header))
    return "\n".join(lines) + "\n"


def _cell(value):
    if isinstance(value, (bool, str)):
        return str(value)
    if isinstance(value, int):
        return str(value)
    return f"{float(value):.17g}"


def _solver_cfg(config):
    return SolverConfig(tol=config.solver["tol"], max_iterations=config.solver["max_iterations"])


def run(config, command):
    """Execute ``command``; returns ``(exit_code, artifact_text)``."""
    fmt = config.output["format"] or DEFAULT_FORMAT[command]
    model = config.build_model()
    cfg = _solver_cfg(config)
    base = config.levels["base"]

    if command == "solve":
        partition = model.partition(base)
        loss = loss_function(model, 4 * partition.n_cells, base)
        op = assemble(model, loss, partition, config.method, config.solver["subquad"])
        result = solve(op, cfg, config.solver["path"])
        payload = result.to_dict()
        payload["level"] = base
        payload["discretization"] = config.method
        if fmt == "json":
            return EXIT_OK, _json(payload)
        header = ["level", "N", "lambda_shifted", "lambda_raw", "shift", "residual_A", "residual_K", "iterations"]
        return EXIT_OK, _csv_from_rows(header, [payload])

    if command == "converge":
        if config.levels["count"] < 2:
            raise UsageError("converge needs levels.count >= 2")
        report = refinement_study(
            model, config.method, base, config.levels["count"], cfg,
            path=config.solver["path"], subquad=config.solver["subquad"],
        )
        for flag in report.flags:
            print(f"warning: {flag}", file=sys.stderr)
        return EXIT_OK, report.to_csv() if fmt == "csv" else _json(report.to_dict())

    if command == "validate":
        report = validate_model(model, base)
        code = EXIT_OK if report.ok else EXIT_MODEL
        if fmt == "json":
            return code, _json(report.to_dict())
        rows = [{"name": c.name, "status": c.status, "witness": c.witness, "note": c.note} for c in report.checks]
        return code, _csv_from_rows(["name", "status", "witness", "note"], rows)

    if command == "maxp":
        if model.kernel.form != "exponential-tilted":
            raise UsageError("maxp needs an exponential-tilted kernel")
        table = locality_experiment(model, config.maxp["nu"], base, cfg, path=config.solver["path"])
        for flag in table.flags:
            print(f"warning: {flag}", file=sys.stderr)
        return EXIT_OK, table.to_csv() if fmt == "csv" else _json(table.to_dict())

    raise UsageError(f"unknown command {command!r}")


def _execute(config, command):
    try:
        return run(config, command)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    except ValueError as exc:
        if isinstance(exc, InvalidModelError):
            print(f"model error: {exc}", file=sys.stderr)
            return EXIT_MODEL, None
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER, None


def main(argv=None):
    parser = _Parser(prog="coa", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a JSON run configuration")
    parser.add_argument("--out", help="write the artifact here instead of the configured path")
    parser.add_argument(
        "--seed-check", action="store_true",
        help="run twice and fail unless both artifacts are byte-identical",
    )
    args = parser.parse_args(argv)

    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = parse_config(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    code, artifact = _execute(config, args.command)
    if artifact is None:
        return code
    if args.seed_check:
        _, again = _execute(config, args.command)
        if again != artifact:
            print("error: repeated run produced a different artifact", file=sys.stderr)
            return EXIT_SOLVER

    out = args.out or config.output["path"]
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(artifact)
    else:
        sys.stdout.write(artifact)
    return code


if __name__ == "__main__":
    sys.exit(main())
