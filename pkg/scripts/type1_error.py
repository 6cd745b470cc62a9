"""Type I error of every method under flat dose-response curves."""

from _common import run_rows, sim_parser

from binmcp.scenarios import NULL_ANCHOR, null_rows

if __name__ == "__main__":
    args = sim_parser(__doc__).parse_args()
    run_rows(null_rows(), NULL_ANCHOR, args)
