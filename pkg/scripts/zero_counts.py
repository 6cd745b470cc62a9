"""Chance of a zero-responder arm, per arm size and response rate."""

import sys

from binmcp.cli import main

if __name__ == "__main__":
    sys.exit(main(["zeroprob", "--p", "0.10,0.05", "--n", "10,15,20,30"] + sys.argv[1:]))
