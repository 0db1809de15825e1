#!/usr/bin/env python3
"""Run the full inequality harness and write the report bundle.

Equivalent to `qcvx report` with the given seed/trials; prints the summary
table and exits nonzero if any inequality came back violated.
"""

import argparse
import sys

from qcvx.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--dim", type=int, default=2, choices=(1, 2, 3))
    parser.add_argument("--out", default="qcvx-report")
    args = parser.parse_args()
    return cli_main(["report", "--seed", str(args.seed), "--trials", str(args.trials),
                     "--dim", str(args.dim), "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
