#!/usr/bin/env python3
"""One-in-1024 search demo.

A single marked item out of 1024 candidates; with |alpha| = 2 the non-solution
mass shrinks by exp(-4 alpha^2) ~ 1.1e-7 per oracle round, so two rounds leave
less than 1e-10 outside the marked item.
"""

import sys

from hoamp import BlackBox, SearchConfig, required_iterations, run_search

DOMAIN = 1024
MARKED = 123


def main() -> int:
    box = BlackBox.from_solution_indices(DOMAIN, [MARKED])
    want = required_iterations(DOMAIN, 2.0, 1e-10)
    print(f"predicted rounds for residual < 1e-10: {want}")

    config = SearchConfig(alpha_schedule=(2.0,), L_max=4, stop_mass=1.0 - 1e-12)
    report = run_search(config, box)
    for r in report.records:
        print(f"  round {r.l}: Pr(E)={r.pr_E:.9f}  "
              f"non-solution mass {1.0 - r.solution_mass:.3e}")
    found = [n for n, _ in report.solutions]
    print(f"marked item(s) recovered: {found}  "
          f"({report.oracle_calls} oracle calls per round)")
    return 0 if found == [MARKED] else 1


if __name__ == "__main__":
    sys.exit(main())
