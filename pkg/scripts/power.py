"""Power of every method for one placebo-rate family (0.1, 0.3 or 0.01)."""

from _common import run_rows, sim_parser

from binmcp.scenarios import PLACEBO_RATES, power_rows

if __name__ == "__main__":
    ap = sim_parser(__doc__)
    ap.add_argument("--placebo", type=float, default=0.1, choices=PLACEBO_RATES)
    ap.add_argument("--rows", default=None, help="comma-separated row numbers, default all")
    args = ap.parse_args()
    rows = power_rows(args.placebo)
    if args.rows:
        keep = {int(v) for v in args.rows.split(",")}
        rows = [r for r in rows if r.number in keep]
    run_rows(rows, args.placebo, args)
