"""Randomized check that both parity routes agree on twisted jump systems.

Prints a histogram of sign-change counts and any disagreements.
Usage: python3 scripts/parity_trials.py [--trials N] [--seed S] [--samples K]
"""

import argparse
import collections

import numpy as np

from hombif.errors import HombifError
from hombif.fredholm import parity_of_loop
from hombif.randomized import random_jump_system


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=64)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    changes = collections.Counter()
    refined = 0
    failures = []
    for t in range(args.trials):
        n = (2, 3, 4)[t % 3]
        jump, plus, minus = random_jump_system(rng, n, args.samples)
        try:
            res = parity_of_loop(jump)
        except HombifError as exc:
            failures.append((t, n, repr(exc)))
            continue
        expected = plus.expected_w1 * minus.expected_w1
        if not res.by_crossings == res.by_index_bundle == expected:
            failures.append((t, n, f"routes {res.by_crossings}/{res.by_index_bundle}, constructed {expected}"))
        changes[res.crossings] += 1
        refined += res.K > args.samples

    print(f"{args.trials} trials, {len(failures)} failures, {refined} needed grid refinement")
    for k in sorted(changes):
        print(f"  {k} sign changes: {changes[k]}")
    for f in failures:
        print("  FAIL", *f)
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()
