#!/usr/bin/env python3
"""Print and save the multi-tone coefficient table with scaling factors."""

import argparse
import os

from robustms.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=5, help="largest tone count")
    ap.add_argument("--out", default="out", help="output directory")
    args = ap.parse_args()
    rc = cli_main(["mtms", "--n", str(args.n), "--out", args.out])
    if rc == 0:
        with open(os.path.join(args.out, "mtms.csv")) as fh:
            print(fh.read(), end="")
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
