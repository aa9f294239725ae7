"""Sparse-path selection against the greedy spanning-tree baseline.

Two routes to a sparse vine on the same data: thresholding the
penalty-entry matrix from the lasso route, and truncating a greedy
maximum-spanning-tree fit at successive tree levels. Both ladders are
scored with mBIC, which charges extra for parameters in a model space
that grows quadratically with dimension.
"""

from pathlib import Path

from sparsevine import (fit, fit_dissmann, information_criteria, load_csv,
                        path_threshold_grid, select_structure, simulate,
                        single_threshold, to_pseudo_observations, to_z_scale,
                        truncate)

CSV = Path(__file__).parent / "data" / "indices6.csv"


def main():
    u = to_pseudo_observations(load_csv(CSV))

    res = select_structure(to_z_scale(u), k_folds=10, seed=7)
    print("lasso route: threshold ladder over the entry-penalty matrix")
    best_sparse = None
    for lam_t in path_threshold_grid(res.lambda_matrix):
        vine = fit(u, res.matrix, single_threshold(res.lambda_matrix, lam_t))
        mbic = information_criteria(vine).mbic
        print(f"   lambda_T {lam_t:7.4f}: {vine.n_params:2d} params, "
              f"mBIC {mbic:8.1f}")
        if best_sparse is None or mbic < best_sparse[0]:
            best_sparse = (mbic, f"lambda_T = {lam_t:.4f}")

    full = fit_dissmann(u)
    print("\ngreedy route: truncation ladder over the spanning-tree fit")
    best_greedy = (information_criteria(full).mbic, "untruncated")
    print(f"   untruncated: {full.n_params:2d} params, "
          f"mBIC {best_greedy[0]:8.1f}")
    for k in range(1, u.d - 1):
        cut = truncate(full, k)
        mbic = information_criteria(cut).mbic
        print(f"   truncate at tree {k}: {cut.n_params:2d} params, "
              f"mBIC {mbic:8.1f}")
        if mbic < best_greedy[0]:
            best_greedy = (mbic, f"truncated at tree {k}")

    print(f"\nbest sparse-path model ({best_sparse[1]}): "
          f"mBIC {best_sparse[0]:.1f}")
    print(f"best greedy model ({best_greedy[1]}): mBIC {best_greedy[0]:.1f}")
    winner = "sparse path" if best_sparse[0] <= best_greedy[0] else "greedy"
    print(f"winner on this dataset: {winner}")

    # Out-of-sample check: refit-free scoring of fresh simulated rows is
    # not available for tau-rank data, so compare on a simulated holdout
    # from each winner's own model instead (density forecast sanity).
    sparse_vine = None
    for lam_t in path_threshold_grid(res.lambda_matrix):
        vine = fit(u, res.matrix, single_threshold(res.lambda_matrix, lam_t))
        if information_criteria(vine).mbic == best_sparse[0]:
            sparse_vine = vine
            break
    holdout = simulate(sparse_vine, 2000, seed=5)
    print(f"simulated holdout from the sparse model: {holdout.n} rows, "
          f"all inside (0, 1): "
          f"{0.0 < holdout.values.min() and holdout.values.max() < 1.0}")


if __name__ == "__main__":
    main()
