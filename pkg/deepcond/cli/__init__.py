from .main import build_parser, main
from .commands import CommandResult, COMMANDS

__all__ = ["build_parser", "main", "CommandResult", "COMMANDS"]
