"""Second-life battery capacity estimation: simulator, features, mRMR, elastic net, adaptive estimator."""

import json as _json

from ._slsoh import (
    DataError,
    EnrModel,
    Error,
    InputError,
    InvalidArgument,
    MissingInput,
    ParseError,
    SchemaError,
    adaptive_run,
    enr_fit,
    grouped_kfold,
    metrics,
    mrmr_rank,
    mutual_information,
    pcepe,
    run_command,
)

COMMANDS = ("simulate", "extract", "rank", "train", "evaluate", "adaptive", "validate")


def run(command, config=None, seed=None, out=None):
    """Run one pipeline command. `config` is a dict, a JSON string, or None."""
    if isinstance(config, dict):
        config = _json.dumps(config)
    return run_command(command, config, seed, out)


def run_all(config=None, seed=None, out=None):
    """simulate through adaptive, in order."""
    return {c: run(c, config, seed, out) for c in COMMANDS[:-1]}


__all__ = [
    "COMMANDS",
    "DataError",
    "EnrModel",
    "Error",
    "InputError",
    "InvalidArgument",
    "MissingInput",
    "ParseError",
    "SchemaError",
    "adaptive_run",
    "enr_fit",
    "grouped_kfold",
    "metrics",
    "mrmr_rank",
    "mutual_information",
    "pcepe",
    "run",
    "run_all",
    "run_command",
]
