"""Case-study analysis under all three weighting schemes.

Runs the worked example on the counts given as the first argument
(default 0,11,10,12,12) and prints the fit, contrasts, tests and comparators.
"""

import sys
from pathlib import Path

from binmcp.cli import main

if __name__ == "__main__":
    counts = sys.argv[1] if len(sys.argv) > 1 else "0,11,10,12,12"
    sys.exit(main(["analyze", "--config", str(Path(__file__).resolve().parents[1] / "configs" / "case_study.yaml"), "--counts", counts]
                  + sys.argv[2:]))
