"""Show when sector projectors on nested supports annihilate each other.

A fully symmetric block of m qubits carries total spin m/2.  If that block
sits inside a register of r qubits projected onto total spin j, the two
projectors are orthogonal exactly when m > r/2 + j: the r - m remaining
qubits cannot couple a spin-m/2 block down to j.  The same counting argument
drives the flag constructions, so it pays to see it numerically first.
"""

import numpy as np

from rotinv import admissible_spins, embed_on_support, symmetric_projector, total_spin_projector


def product_norm(r, j, m):
    p_sector = total_spin_projector(r, j)
    p_sym = embed_on_support(symmetric_projector(m), range(m), r)
    return float(np.max(np.abs(p_sector @ p_sym)))


def main():
    print("max |P^(r,j) P^(m,m/2)| over nested supports")
    print(" r  j     m   bound m>r/2+j   product")
    for r in (4, 5, 6):
        for j in admissible_spins(r):
            for m in range(2, r + 1):
                val = product_norm(r, j, m)
                beyond = 2 * m > r + j.twice_value
                marker = "vanishes" if beyond else "survives"
                print(f" {r}  {str(j):>3}  {m:>2}   {str(beyond):>5}          "
                      f"{val:.3e}  {marker}")
                if beyond:
                    assert val < 1e-10
    print()
    print("two named instances:")
    print(f"  ||P^(4,0) P^(3,3/2)|| = {product_norm(4, 0, 3):.3e}")
    p42 = total_spin_projector(4, 2)
    singlet = embed_on_support(total_spin_projector(2, 0), range(2), 4)
    print(f"  ||P^(4,2) P^(2,0)||   = {float(np.max(np.abs(p42 @ singlet))):.3e}")


if __name__ == "__main__":
    main()
