"""Regularization paths and cross-validation on the demo data.

Each variable is regressed on all the others with an L1 penalty. Walking
the penalty down from lambda_max, regressors enter one by one; the entry
points are what the structure-selection stage later turns into the
entry-penalty matrix. Cross-validation picks a working penalty per
regression, either at the error minimum or by the one-standard-error
rule.
"""

from pathlib import Path

import numpy as np

from sparsevine import (LassoProblem, cross_validate, load_csv, path,
                        to_pseudo_observations, to_z_scale)

CSV = Path(__file__).parent / "data" / "indices6.csv"


def main():
    z = to_z_scale(to_pseudo_observations(load_csv(CSV)))
    names = z.column_names
    x = z.values

    target = 0
    others = [j for j in range(z.d) if j != target]
    problem = LassoProblem(x[:, others], x[:, target])

    reg = path(problem)
    print(f"path for {names[target]} on the remaining {len(others)} columns")
    print(f"grid: {reg.lambda_grid.size} penalties, "
          f"{reg.lambda_grid[0]:.4f} down to {reg.lambda_grid[-1]:.4f}")

    print("\nactive set along the path (first grid index where each enters):")
    entered = {}
    for g, coefs in enumerate(reg.coefs):
        for k in np.flatnonzero(coefs):
            entered.setdefault(k, g)
    for k, g in sorted(entered.items(), key=lambda item: item[1]):
        print(f"   {names[others[k]]:>5s}  enters at lambda = "
              f"{reg.lambda_grid[g]:.4f}")

    cv = cross_validate(problem, k=10, seed=0)
    print(f"\n10-fold CV: lambda_min = {cv.lambda_min:.4f}, "
          f"lambda_1se = {cv.lambda_1se:.4f}")
    for rule in ("min", "1se"):
        lam = cv.select(rule)
        g = int(np.argmin(np.abs(reg.lambda_grid - lam)))
        active = [names[others[k]] for k in np.flatnonzero(reg.coefs[g])]
        print(f"   rule {rule!r}: {len(active)} active -> {', '.join(active)}")


if __name__ == "__main__":
    main()
