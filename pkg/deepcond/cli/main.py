"""
Command-line entry point.

Exit codes: 0 when every verdict holds, 1 on a failed verdict or a
numerical/domain failure, 2 on usage, parse or configuration errors.
Failures print {"ok": false, "classification", "message", "details"} on stderr.

Public API:
- build_parser() -> argparse.ArgumentParser
- main(argv=None) -> int
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from deepcond import __version__
from deepcond.cli.commands import COMMANDS, CommandResult
from deepcond.errors import ConfigurationError, DeepCondError, ParseError, UsageError, classify
from deepcond.runtime.config import FORMATS, RunConfig, resolve_config
from deepcond.runtime.logging import configure_logging, timed
from deepcond.runtime.state import atomic_write, dumps_csv, dumps_json, provenance

log = logging.getLogger("deepcond.cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# output location does not change the results, so it stays out of the provenance
_NOT_ECHOED = ("out",)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message, {"usage": self.format_usage().strip()})

    def _check_value(self, action, value):  # type: ignore[override]
        # Python < 3.12 checks an omitted nargs="?" positional's SUPPRESS default against choices
        if value is argparse.SUPPRESS:
            return
        super()._check_value(action, value)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with parameters (flags win)")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="output path; stdout when omitted")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--log-level", dest="log_level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deepcond", description="Conditioning of deep random network kernels",
                     argument_default=argparse.SUPPRESS)
    parser.add_argument("--version", action="version", version=f"deepcond {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dual-table", help="dual activations, mu and mu_tilde", argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("--activations", help="comma-separated registry names")
    p.add_argument("--rho-points", dest="rho_points", type=int)

    p = sub.add_parser("profile", help="kernel spectra against depth bounds", argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("kind", nargs="?", choices=["toplayer", "ntk"])
    p.add_argument("--activation")
    p.add_argument("--L-max", dest="L_max", type=int)
    p.add_argument("--gram", help="CSV or JSON Gram matrix")
    p.add_argument("--inputs", help="CSV or JSON rows of unit-norm inputs")
    p.add_argument("--synthetic", nargs=3, metavar=("N", "DELTA", "SEED"))

    p = sub.add_parser("simulate", help="finite-width Monte Carlo experiments", argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("experiment", nargs="?", choices=["kernel", "ntk", "decay", "sigma-min", "bn-invariance"])
    p.add_argument("--activation")
    p.add_argument("--m", help="width or comma-separated widths")
    p.add_argument("--L", type=int)
    p.add_argument("--n", help="number of inputs")
    p.add_argument("--delta", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--draws", type=int)

    p = sub.add_parser("train", help="top-layer training and interpolation", argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("mode", nargs="?", choices=["gd", "sgd", "interpolate", "risk"])
    p.add_argument("--activation")
    p.add_argument("--n", help="training size or comma-separated sizes")
    p.add_argument("--delta", type=float)
    p.add_argument("--depth", help="integer depth or L1")
    p.add_argument("--width", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--labels", choices=["linear", "zeros", "noise"])
    p.add_argument("--n-test", dest="n_test", type=int)
    p.add_argument("--dim", type=int)

    p = sub.add_parser("normrelu", help="NormReLU closed-form constants", argument_default=argparse.SUPPRESS)
    _common(p)
    p.add_argument("--c", type=float)
    p.add_argument("--eps", type=float)
    return parser


def _render(cfg: RunConfig, result: CommandResult) -> str:
    echoed = {k: v for k, v in cfg.as_dict().items() if k not in _NOT_ECHOED}
    prov = provenance(echoed, cfg.seed)
    if cfg["format"] == "json":
        return dumps_json({"ok": result.ok, "provenance": prov, "summary": result.summary,
                           "columns": result.columns, "rows": result.rows})
    header: Dict[str, Any] = {"provenance": prov, "summary": result.summary, "verdict": result.ok}
    return dumps_csv(result.columns, result.rows, header)


def _fail(payload: Dict[str, Any]) -> None:
    sys.stderr.write(json.dumps(payload, sort_keys=True, default=str) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = vars(build_parser().parse_args(argv))
        command = args.pop("command")
        config_path = args.pop("config", None)
        cfg = resolve_config(command, args, config_path)
        configure_logging(cfg["log_level"])
        with timed(log, command):
            result = COMMANDS[command](cfg)
        text = _render(cfg, result)
        if cfg["out"]:
            atomic_write(cfg["out"], text)
        else:
            sys.stdout.write(text)
    except (UsageError, ParseError, ConfigurationError) as exc:
        _fail(classify(exc))
        return EXIT_USAGE
    except DeepCondError as exc:
        _fail(classify(exc))
        return EXIT_FAILED
    if not result.ok:
        _fail({"ok": False, "classification": "bound_violation", "message": f"{command} verdict failed",
               "details": result.summary})
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
