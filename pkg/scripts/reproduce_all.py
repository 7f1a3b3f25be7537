#!/usr/bin/env python3
"""Run every reproduction suite and summarise pass/fail.

Usage: python scripts/reproduce_all.py [--seed N]
"""

import argparse
import sys

from qgcl.reproduce import SUITES


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    failures = []
    for name in sorted(SUITES):
        ok, lines = SUITES[name](seed=args.seed)
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
        for line in lines:
            print(line)
        if not ok:
            failures.append(name)
    print()
    if failures:
        print(f"{len(failures)} suite(s) failed: {', '.join(failures)}")
        return 1
    print(f"all {len(SUITES)} suites passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
