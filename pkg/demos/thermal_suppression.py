"""Why the invariant encodings stop working at finite temperature.

Ground states and dynamics survive the encoding, but Gibbs states do not:
every encoded site drags 2^r - 2d extra levels at the penalty energy J, and
their Boltzmann weight e^{-beta J} enters the partition function once per
site.  Observables confined to the code space are suppressed by the Z-ratio
below, which decays exponentially in the chain length at any fixed beta.

The first table uses the literal 8-level picture (logical levels plus six
penalized levels) and lands on the closed form to machine precision.  The
second repeats the exercise with the true encoded Hamiltonian, whose
out-of-code spectrum is not flat; the ratio is smaller still.
"""

import numpy as np

from rotinv import (
    build_global,
    encode_hamiltonian,
    field_chain,
    suppression_ratio_field_model,
)
from rotinv.ri_encode import direct_sum_site


def chain_spectrum(site, n):
    dim = site.shape[0]
    total = np.zeros((dim ** n, dim ** n))
    for i in range(n):
        left = np.eye(dim ** i)
        right = np.eye(dim ** (n - i - 1))
        total += np.kron(np.kron(left, site), right)
    return np.linalg.eigvalsh(total)


def main():
    b, j_pen = 1.0, 2.0
    site1 = b * np.diag([1.0, -1.0])
    site2 = direct_sum_site(site1, j_pen, 8)

    print(f"literal penalized-site model, B={b}, J={j_pen}")
    print("beta   N   Z1/Z2 (exact)      closed form")
    for beta in (0.0, 0.5, 1.0, 2.0):
        for n in (1, 2, 3):
            w1 = chain_spectrum(site1, n)
            w2 = chain_spectrum(site2, n)
            ratio = np.exp(-beta * w1).sum() / np.exp(-beta * w2).sum()
            closed = suppression_ratio_field_model(b, beta, j_pen, n)
            print(f"{beta:4.1f}  {n:2d}   {ratio:.15f}  {closed:.15f}")
        print()

    print("true encoded chain (r=3 blocks), beta = 1.0")
    print(" N   literal model      true encoding")
    for n in (1, 2, 3):
        h2, _ = encode_hamiltonian(field_chain(n, b=b), 3, 0.5)
        w1 = chain_spectrum(site1, n)
        w2 = np.linalg.eigvalsh(build_global(h2).toarray())
        true_ratio = np.exp(-w1).sum() / np.exp(-w2).sum()
        closed = suppression_ratio_field_model(b, 1.0, j_pen, n)
        print(f" {n}   {closed:.15f}  {true_ratio:.15f}")
    print()
    print("both columns shrink with N: thermal states leak out of the code")


if __name__ == "__main__":
    main()
