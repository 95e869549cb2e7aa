"""Walk through the total-spin sector tables of small qubit registers.

Every register of r spin-1/2 sites splits into blocks of definite total spin
j, and each j occurs with a multiplicity given by a ballot-counting formula.
This script prints the tables, confirms the dimension sum 2^r, and
cross-checks one register against brute-force diagonalization of J^2.
"""

import numpy as np

from rotinv import decompose, largest_multiplicity_sector
from rotinv.spin_core import casimir_operator


def main():
    print("sector tables (j : dimension x multiplicity)")
    for r in range(1, 9):
        dec = decompose(r)
        cells = ", ".join(f"{j}: {dim}x{mult}" for j, dim, mult in dec.sectors)
        total = dec.total_dimension()
        print(f"  r={r}:  {cells}   (sum {total} = 2^{r})")
        assert total == 2 ** r

    print()
    print("largest-multiplicity sector per register:")
    for r in range(2, 9):
        j, mult = largest_multiplicity_sector(r)
        print(f"  r={r}: j={j} with {mult} copies")

    # the multiplicities are exactly the eigenvalue counts of J^2
    r = 6
    w = np.linalg.eigvalsh(casimir_operator(r))
    print()
    print(f"cross-check against the J^2 spectrum at r={r}:")
    for j, dim, mult in decompose(r).sectors:
        counted = int(np.count_nonzero(np.abs(w - j.casimir_eigenvalue()) < 0.5))
        tag = "ok" if counted == dim * mult else "MISMATCH"
        print(f"  j={j}: counted {counted}, table {dim * mult}  {tag}")
        assert counted == dim * mult


if __name__ == "__main__":
    main()
