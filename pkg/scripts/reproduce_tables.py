"""Rerun every reference table and print computed values beside the published ones.

    python scripts/reproduce_tables.py            # all four tables
    python scripts/reproduce_tables.py 2 3 --json results/
"""
import argparse
import sys
from pathlib import Path

from hofid.cli import EXIT_OK, repro


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("tables", nargs="*", type=int, default=[1, 2, 3, 4], choices=[1, 2, 3, 4])
    ap.add_argument("--json", metavar="DIR", help="also write table<N>.json into DIR")
    args = ap.parse_args(argv)
    status = EXIT_OK
    for number in args.tables:
        status = max(status, repro(number))
        if args.json:
            out = Path(args.json)
            out.mkdir(parents=True, exist_ok=True)
            repro(number, out / f"table{number}.json", "json")
        print()
    return status


if __name__ == "__main__":
    sys.exit(main())
