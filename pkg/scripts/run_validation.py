"""Run the numerical oracle suite and print the measured errors."""

import argparse
import sys

from irsfd.validation import format_report, run_validation_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    results = run_validation_suite(seed=args.seed)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 2


if __name__ == "__main__":
    sys.exit(main())
