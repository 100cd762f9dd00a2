# ABOUTME: Command-line entry for experiment runs: argparse flags layered over an optional YAML config file.
# ABOUTME: parse_config builds the ExperimentConfig and echoes it to <out>/config.resolved; main maps failures onto exit codes.
"""
proxnewton experiment CLI

Usage:
    proxnewton --alpha 40,80 --mode both --out results/
    proxnewton --config experiments/alpha_sweep.yaml --gamma 0.25 --out results/
"""

import argparse
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Sequence

import yaml

from proxnewton import config
from proxnewton.errors.exceptions import UsageError
from proxnewton.utils.config_loading import load_config_file
from proxnewton.utils.logger import log_error
from proxnewton.utils.output_control import set_verbose, vprint

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_USAGE = 2
EXIT_IO = 3

MODES = ("exact", "inexact", "both")
PROBLEMS = ("field", "quadratic-l1")


@dataclass
class ExperimentConfig:
    """Effective settings of one experiment (defaults < config file < flags)."""

    out: Path
    alpha: List[float] = field(default_factory=lambda: [config.DEFAULT_PROBLEM["alpha"]])
    dim: int = config.DEFAULT_PROBLEM["dim"]
    levels: int = config.DEFAULT_PROBLEM["levels"]
    beta: float = config.DEFAULT_PROBLEM["beta"]
    c: float = config.DEFAULT_PROBLEM["c"]
    rho: float = config.DEFAULT_PROBLEM["rho"]
    norm: str = config.DEFAULT_PROBLEM["norm"]
    quadrature: str = config.DEFAULT_PROBLEM["quadrature"]
    problem: str = "field"
    size: int = 20
    seed: int = 0
    gamma: float = config.DEFAULT_OUTER["gamma"]
    omega0: float = config.DEFAULT_OUTER["omega0"]
    eta0: float = config.DEFAULT_OUTER["eta0"]
    eps: float = config.DEFAULT_OUTER["eps"]
    omega_tilde_max: float = config.DEFAULT_OUTER["omega_tilde_max"]
    mode: str = "both"
    diagnostics: bool = False
    warm_start: bool = False
    verbose: bool = False
    debug: bool = False

    @property
    def modes(self) -> List[str]:
        return ["inexact", "exact"] if self.mode == "both" else [self.mode]

    def to_yaml(self) -> str:
        data = asdict(self)
        data["out"] = str(self.out)
        return yaml.safe_dump(data, sort_keys=True)


CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)}


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def _alpha_list(value) -> List[float]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)]
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
    elif isinstance(value, list):
        parts = value
    else:
        raise UsageError(f"alpha must be a number, a list, or a comma-separated string, got {value!r}")
    try:
        return [float(p) for p in parts]
    except (TypeError, ValueError):
        raise UsageError(f"malformed alpha list: {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="proxnewton",
        description="Inexact proximal Newton experiments (exact vs. inexact inner solves).",
        argument_default=None,
    )
    parser.add_argument("--config", help="YAML file with default settings (keys = long flag names)")
    parser.add_argument("--out", help="Output directory (required)")

    problem = parser.add_argument_group("problem")
    problem.add_argument("--problem", choices=PROBLEMS)
    problem.add_argument("--dim", type=int)
    problem.add_argument("--levels", type=int)
    problem.add_argument("--alpha", help="Comma-separated list, e.g. 40,80")
    problem.add_argument("--beta", type=float)
    problem.add_argument("--c", type=float)
    problem.add_argument("--rho", type=float)
    problem.add_argument("--norm", choices=("h1", "h1-semi"))
    problem.add_argument("--quadrature", choices=("gauss", "nodal"))
    problem.add_argument("--size", type=int, help="Unknowns of the quadratic-l1 instance")
    problem.add_argument("--seed", type=int, help="Seed of the quadratic-l1 instance")

    outer = parser.add_argument_group("outer loop")
    outer.add_argument("--gamma", type=float)
    outer.add_argument("--omega0", type=float)
    outer.add_argument("--eta0", type=float)
    outer.add_argument("--eps", type=float)
    outer.add_argument("--omega-tilde-max", dest="omega_tilde_max", type=float)
    outer.add_argument("--mode", choices=MODES)
    outer.add_argument("--warm-start", dest="warm_start", action="store_true", default=None)

    output = parser.add_argument_group("output")
    output.add_argument("--diagnostics", action="store_true", default=None,
                        help="Record true relative errors and stationarity (doubles the cost)")
    output.add_argument("--verbose", action="store_true", default=None)
    output.add_argument("--debug", action="store_true", default=None,
                        help="Add hints to error messages")
    return parser


def _validate(settings: dict) -> ExperimentConfig:
    if not settings.get("out"):
        raise UsageError("--out is required")
    settings["out"] = Path(settings["out"])
    settings["alpha"] = _alpha_list(settings.get("alpha", [config.DEFAULT_PROBLEM["alpha"]]))
    if not settings["alpha"]:
        raise UsageError("alpha list is empty")
    if settings.get("mode", "both") not in MODES:
        raise UsageError(f"mode must be one of {', '.join(MODES)}")
    if settings.get("problem", "field") not in PROBLEMS:
        raise UsageError(f"problem must be one of {', '.join(PROBLEMS)}")
    if settings.get("norm", "h1") not in ("h1", "h1-semi"):
        raise UsageError("norm must be h1 or h1-semi")
    if settings.get("quadrature", "gauss") not in ("gauss", "nodal"):
        raise UsageError("quadrature must be gauss or nodal")

    for key in ("dim", "levels", "size", "seed"):
        if key in settings:
            settings[key] = _cast(key, settings[key], int)
    for key in ("beta", "c", "rho", "gamma", "omega0", "eta0", "eps", "omega_tilde_max"):
        if key in settings:
            settings[key] = _cast(key, settings[key], float)
    for key in ("diagnostics", "warm_start", "verbose", "debug"):
        if key in settings and not isinstance(settings[key], bool):
            raise UsageError(f"{key} must be true or false, got {settings[key]!r}")
    unknown = set(settings) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return ExperimentConfig(**settings)


def _cast(key: str, value, kind):
    if isinstance(value, bool):
        raise UsageError(f"{key} must be a number, got {value!r}")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise UsageError(f"malformed value for {key}: {value!r}")


def parse_config(argv: Optional[Sequence[str]] = None, config_file: Optional[str] = None) -> ExperimentConfig:
    """
    Build the effective experiment config.

    Flags override values from the config file (``--config`` or ``config_file``).
    The result is written to ``<out>/config.resolved``.

    Raises:
        UsageError: malformed flags or values, unknown keys, missing --out, empty alpha list
        OSError: the output directory cannot be created or written
    """
    args = vars(build_parser().parse_args(argv))
    config_path = args.pop("config") or config_file

    settings: dict = {}
    if config_path:
        ok, data, error_msg = load_config_file(config_path)
        if not ok:
            raise UsageError(error_msg)
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys in {config_path}: {', '.join(sorted(unknown))}")
        settings.update(data)

    settings.update({key: value for key, value in args.items() if value is not None})
    experiment = _validate(settings)

    experiment.out.mkdir(parents=True, exist_ok=True)
    (experiment.out / config.RESOLVED_CONFIG_NAME).write_text(experiment.to_yaml())
    return experiment


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse, run, and return the process exit code."""
    from proxnewton.cli.runner import run_experiment

    try:
        experiment = parse_config(argv)
    except UsageError as e:
        print(f"proxnewton: usage error: {e}", file=sys.stderr)
        log_error(f"Usage error: {e}")
        return EXIT_USAGE
    except OSError as e:
        print(f"proxnewton: cannot write output directory: {e}", file=sys.stderr)
        log_error(f"I/O error while writing config: {e}")
        return EXIT_IO

    set_verbose(experiment.verbose)
    vprint(f"[CONFIG] {experiment.out / config.RESOLVED_CONFIG_NAME}")
    return run_experiment(experiment)


if __name__ == "__main__":
    sys.exit(main())
