"""Structure matrices: encoding, validation and the proximity condition.

A regular vine on d variables is stored as a lower-triangular matrix.
Column c's diagonal entry names a variable; reading up the column gives
the partners it is coupled with in trees 1, 2, ... together with the
conditioning sets. This script builds a matrix from an explicit first
tree, decodes its edges, and shows which entries the proximity condition
rules out while a matrix is being filled.
"""

import numpy as np

from sparsevine import (RVineMatrix, allowed_entries, blacklist,
                        edges_of_tree, matrix_from_first_tree, validate)


def show_edges(matrix):
    for t in range(1, matrix.d):
        parts = []
        for e in edges_of_tree(matrix, t):
            pair = ",".join(map(str, e.conditioned))
            cond = ",".join(map(str, sorted(e.conditioning)))
            parts.append(f"{pair}|{cond}" if cond else pair)
        print(f"   tree {t}: " + "  ".join(parts))


def main():
    # A star around variable 2 plus a pendant chain.
    tree = [(1, 2), (2, 3), (2, 4), (4, 5)]
    matrix = matrix_from_first_tree(5, tree)
    print("matrix from first tree", tree)
    print(np.array2string(matrix.values))
    report = validate(matrix)
    print("valid:", report.ok)
    show_edges(matrix)

    # Corrupting one cell breaks the proximity condition.
    broken = matrix.values.copy()
    broken[2, 0] = broken[3, 0]
    report = validate(RVineMatrix(broken))
    print("\nafter corrupting cell (2, 0):", report.first.message)

    # While filling a column the proximity condition restricts candidates:
    partial = matrix.values.copy()
    partial[1, 0] = 0        # reopen the cell two trees up in column 0
    partial[2, 0] = 0
    cell = (2, 0)
    pm = RVineMatrix(partial)
    print(f"\nrefilling cell {cell}: allowed {sorted(allowed_entries(pm, *cell))},"
          f" ruled out {sorted(blacklist(pm, *cell))}")


if __name__ == "__main__":
    main()
