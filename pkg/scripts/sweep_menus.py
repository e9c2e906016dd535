#!/usr/bin/env python3
"""Run the diagnostic suite on random finite menus mixed over uniform lambda.

Every such rule should pass; the script reports verdicts and worst residuals.

    python scripts/sweep_menus.py [--menus 20] [--outcomes 5] [--d 2] [--seed 0]
"""
import argparse

import numpy as np

from johncheck.checker import CheckConfig, run_diagnostic_suite
from johncheck.core import FiniteMenuMixture, Menu


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--menus", type=int, default=20)
    parser.add_argument("--outcomes", type=int, default=5)
    parser.add_argument("--d", type=int, default=2)
    parser.add_argument("--samples", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    counts = {}
    for k in range(args.menus):
        menu = Menu.from_arrays(rng.normal(size=(args.outcomes, args.d)), rng.uniform(-0.5, 0.5, args.outcomes))
        spec = FiniteMenuMixture(menu)
        report = run_diagnostic_suite(spec, CheckConfig.for_rule(spec, n_samples=args.samples, seed=k))
        counts[report.verdict] = counts.get(report.verdict, 0) + 1
        print(
            f"menu {k:3d}: {report.verdict:14s} worst sym {report.worst_rel_sym:.2e} "
            f"p95 sym {report.p95_rel_sym:.2e} worst min eig {report.worst_rel_min_eig:.2e}"
        )
    print("verdicts:", counts)


if __name__ == "__main__":
    main()
