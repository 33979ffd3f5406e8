"""Command-line front end.

Usage::

    killing-transport <command> --config file.json [--output dir] [--seed n]

Exit status is 0 on success, 1 for configuration or expression errors, 2
for domain and geometry errors and 3 when a numerical tolerance check
fails after the artifacts were written.  Failures print a one-line JSON
diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from .. import __version__
from .._kernels import BACKEND
from ..errors import ConfigError, KillingTransportError
from .commands import COMMAND_TABLE, build_chart, build_curve
from .config import COMMANDS, RunConfig, config_schema
from .output import dumps, emit_csv, emit_json, file_digest

__all__ = ["COMMANDS", "RunConfig", "build_chart", "build_curve", "config_schema", "emit_csv", "emit_json", "load_config", "main", "run"]

MANIFEST = "manifest.json"


def load_config(path, command: str | None = None, seed: int | None = None) -> RunConfig:
    """Read and validate a JSON run configuration.

    ``command`` and ``seed`` override the file; a command that disagrees
    with the file's ``command`` key is an error.
    """
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}").with_context(path=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg}").with_context(path=str(path), offset=exc.pos) from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if command is not None:
        if data.get("command") not in (None, command):
            raise ConfigError(f"command {command!r} conflicts with config command {data['command']!r}").with_context(
                field="command"
            )
        data["command"] = command
    if seed is not None:
        data["seed"] = seed
    return RunConfig.model_validate(data)


def manifest(cfg: RunConfig, files) -> dict:
    """Run record: everything needed to reproduce the artifacts, nothing time-dependent."""
    resolved = cfg.resolved()
    # the output location does not affect results and is left out so that
    # runs into different directories produce identical manifests
    resolved.pop("output", None)
    return {
        "command": cfg.command,
        "version": __version__,
        "backend": BACKEND,
        "seed": cfg.seed,
        "config": resolved,
        "config_sha256": _digest(resolved),
        "tolerances": cfg.tolerances.model_dump(),
        "outputs": {Path(f).name: file_digest(f) for f in files},
    }


def _digest(obj) -> str:
    import hashlib

    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def run(cfg: RunConfig, output: str | Path | None = None) -> dict:
    """Execute one command and write its artifacts plus ``manifest.json``.

    Returns the command summary.  A failed tolerance check raises
    :class:`ToleranceExceeded` after everything is on disk.
    """
    if cfg.command is None:
        raise ConfigError("no command given").with_context(field="command")
    out = Path(output if output is not None else cfg.output.dir)
    summary, files, failure = COMMAND_TABLE[cfg.command](cfg, out)
    emit_json(out / MANIFEST, manifest(cfg, files))
    if failure is not None:
        raise failure
    return summary


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="killing-transport",
        description="Killing transport, holonomy, Gauss-Bonnet and symmetry classification on surfaces.",
        epilog="Expressions: '^' is right-associative and binds tighter than unary minus (-u^2 = -(u^2)).",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--output", help="output directory (overrides output.dir)")
    p.add_argument("--seed", type=int, help="seed for randomised probes (overrides seed)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _fail(diag: dict, code: int) -> int:
    sys.stderr.write(json.dumps(diag, sort_keys=True, default=str) + "\n")
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command, args.seed)
        summary = run(cfg, args.output)
    except ValidationError as exc:
        errors = [{"loc": ".".join(str(x) for x in e["loc"]), "msg": e["msg"], "type": e["type"]} for e in exc.errors()]
        return _fail({"error": "ValidationError", "message": "config does not match the schema", "errors": errors}, 1)
    except KillingTransportError as exc:
        return _fail(exc.diagnostic(), exc.exit_code)
    sys.stdout.write(dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
