"""The fixed-parameter method is one point of the tunable family.

hpm_recursion implements the reduced method from its own order-matching
derivation, sharing no recursion code with the engine. Running both on
the same problems and differencing order by order turns "special case"
from a claim into a measurement. A deliberately mutated engine parameter
shows the comparison would catch a real discrepancy.
"""

import numpy as np

from hamsolve import case_ids, check_equivalence, get_case, hpm_recursion

RICCATI = get_case("riccati-tanh-short").spec


def main() -> None:
    print("oracle sanity: first orders on u' + u^2 = 1, u(0) = 0")
    series = hpm_recursion(RICCATI, order=3)
    grid = RICCATI.make_grid()
    r = grid.nodes
    labels = ("0", "r", "0", "-r^3/3")
    hand = (np.zeros(grid.n), r, np.zeros(grid.n), -(r**3) / 3.0)
    for m, (label, values) in enumerate(zip(labels, hand)):
        gap = float(np.max(np.abs(series.orders[m] - values)))
        print(f"  order {m}: expected {label:7s} max gap {gap:.2e}")
    print()

    print("engine vs oracle, 11 orders each")
    for case_id in case_ids():
        report = check_equivalence(get_case(case_id).spec, order=10)
        verdict = "pass" if report.passed else "FAIL"
        print(
            f"  {case_id:22s} max per-order rel diff"
            f" {report.max_rel_diff:9.3e}  {verdict}"
        )
    print()

    print("mutation control: engine nudged to hbar = -1.01")
    report = check_equivalence(RICCATI, order=10, hbar=-1.01)
    print(
        f"  max per-order rel diff {report.max_rel_diff:.3e}"
        f" (tolerance {report.tolerance:g})"
        f" -> {'pass' if report.passed else 'FAIL, as it should'}"
    )


if __name__ == "__main__":
    main()
