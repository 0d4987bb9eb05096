# run_analysis.py
"""
Root launcher for the deepcond command line.

    python run_analysis.py profile toplayer --synthetic 8 0.1 0 --L-max 60
    python run_analysis.py train gd --depth L1

Same subcommands and exit codes as `python -m deepcond`.
"""
from __future__ import annotations

import sys

from deepcond.cli.main import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
