"""Shared helpers for the test suite."""

import numpy as np
import pytest
import scipy.sparse as sp

PAULI_I = np.eye(2)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def random_hermitian(dim, rng, norm=None):
    """Dense Hermitian matrix with Gaussian entries, optionally rescaled."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = 0.5 * (a + a.conj().T)
    if norm is not None:
        h *= norm / np.linalg.norm(h, 2)
    return h


def dense(op):
    """Dense ndarray from anything build_global or the encoders return."""
    return op.toarray() if sp.issparse(op) else np.asarray(op)


def reference_casimir(r):
    """J^2 on r qubits from explicit kron products, independent of the library."""
    total = np.zeros((2 ** r, 2 ** r), dtype=complex)
    for pauli in (PAULI_X, PAULI_Y, PAULI_Z):
        j_a = np.zeros_like(total)
        for i in range(r):
            factors = [PAULI_I] * r
            factors[i] = 0.5 * pauli
            op = factors[0]
            for f in factors[1:]:
                op = np.kron(op, f)
            j_a += op
        total += j_a @ j_a
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(0)
