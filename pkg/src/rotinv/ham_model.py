"""Spin-chain Hamiltonians as explicit lists of local terms.

A Hamiltonian is a chain of n_sites d-level sites with k-local Hermitian
terms attached to ordered site lists.  Nothing here knows about encodings;
this module owns the global sparse builder, the lattice-translation operator,
symmetry residual checks, and the JSON file format.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import jsonio
from .errors import CapacityError, SchemaError
from .spin_core import SPARSE_NNZ_CAP, apply_on_sites, collective_spin_ops, embed_on_support

HERMITICITY_TOL = 1e-12
BOUNDARIES = ("open", "periodic")


def operator_norm(mat) -> float:
    """Spectral norm of a Hermitian operator (max |eigenvalue|)."""
    if sp.issparse(mat):
        if mat.shape[0] <= 4096:
            mat = mat.toarray()
        else:
            val = spla.eigsh(mat.tocsc().astype(complex), k=1, which="LM",
                             return_eigenvectors=False)
            return float(abs(val[0]))
    if mat.shape == (1, 1):
        return float(abs(mat[0, 0]))
    return float(np.max(np.abs(np.linalg.eigvalsh(mat))))


def hermiticity_residual(mat) -> float:
    if sp.issparse(mat):
        diff = (mat - mat.getH()).tocoo()
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
    return float(np.max(np.abs(mat - mat.conj().T)))


def support_is_wrapped(support, n_sites: int) -> bool:
    """True for contiguous-mod-n windows that cross the n-1 -> 0 seam."""
    k = len(support)
    if k <= 1:
        return False
    mod_contiguous = all(
        support[i + 1] == (support[i] + 1) % n_sites for i in range(k - 1)
    )
    linearly_contiguous = all(support[i + 1] == support[i] + 1 for i in range(k - 1))
    return mod_contiguous and not linearly_contiguous


@dataclass(frozen=True)
class LocalTerm:
    """A Hermitian operator attached to an ordered list of distinct sites."""

    support: tuple
    matrix: object  # ndarray or scipy sparse, shape (q^k, q^k)

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(s) for s in self.support))
        if len(set(self.support)) != len(self.support):
            raise ValueError(f"support has repeated sites: {self.support}")
        mat = self.matrix
        if not sp.issparse(mat):
            mat = np.asarray(mat)
            object.__setattr__(self, "matrix", mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"term matrix must be square, got shape {mat.shape}")
        res = hermiticity_residual(mat)
        if res > HERMITICITY_TOL:
            raise ValueError(f"term matrix is not Hermitian (residual {res:.3e})")

    @property
    def k(self) -> int:
        return len(self.support)

    def norm(self) -> float:
        return operator_norm(self.matrix)


@dataclass
class SpinChainHamiltonian:
    n_sites: int
    local_dim: int
    boundary: str
    terms: list
    label: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be positive, got {self.n_sites}")
        if self.local_dim < 2:
            raise ValueError(f"local_dim must be >= 2, got {self.local_dim}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        for term in self.terms:
            if any(s < 0 or s >= self.n_sites for s in term.support):
                raise ValueError(f"support {term.support} out of range (n={self.n_sites})")
            expected = self.local_dim ** term.k
            if term.matrix.shape[0] != expected:
                raise ValueError(
                    f"term on {term.support} has dimension {term.matrix.shape[0]}, "
                    f"expected {expected}"
                )
            if self.boundary == "open" and support_is_wrapped(term.support, self.n_sites):
                raise ValueError(
                    f"wrapped support {term.support} requires periodic boundary"
                )

    @property
    def k(self) -> int:
        """Locality: largest term support size."""
        return max((t.k for t in self.terms), default=0)

    @property
    def dim(self) -> int:
        return self.local_dim ** self.n_sites

    def max_term_norm(self) -> float:
        return max((t.norm() for t in self.terms), default=0.0)


def build_global(ham: SpinChainHamiltonian) -> sp.csr_matrix:
    """Sum of embedded terms as sparse CSR (zero operator for no terms)."""
    dim = ham.local_dim ** ham.n_sites
    if dim > SPARSE_NNZ_CAP:
        raise CapacityError(f"global dimension {dim} exceeds cap {SPARSE_NNZ_CAP}")
    total = sp.csr_matrix((dim, dim))
    for term in ham.terms:
        total = total + embed_on_support(term.matrix, term.support, ham.n_sites, ham.local_dim)
    return total.tocsr()


def apply_hamiltonian(ham: SpinChainHamiltonian, vec: np.ndarray) -> np.ndarray:
    """Matrix-vector product without building the global matrix."""
    out = np.zeros(len(vec), dtype=complex if np.iscomplexobj(vec) else float)
    for term in ham.terms:
        piece = apply_on_sites(vec, term.matrix, term.support, ham.n_sites, ham.local_dim)
        if np.iscomplexobj(piece) and not np.iscomplexobj(out):
            out = out.astype(complex)
        out += piece
    return out


# ---------------------------------------------------------------------------
# lattice translation


def _translation_permutation(n_sites: int, local_dim: int) -> np.ndarray:
    """tau with T e_x = e_tau(x): site s takes the digit previously at s+1."""
    dim = local_dim ** n_sites
    x = np.arange(dim, dtype=np.int64)
    msd = x // local_dim ** (n_sites - 1)
    return (x % local_dim ** (n_sites - 1)) * local_dim + msd


def translation_operator(n_sites: int, local_dim: int = 2) -> sp.csr_matrix:
    """One-site cyclic shift: T |i1 i2 ... in> = |i2 ... in i1>."""
    dim = local_dim ** n_sites
    if dim > SPARSE_NNZ_CAP:
        raise CapacityError(f"translation on dimension {dim} exceeds cap")
    tau = _translation_permutation(n_sites, local_dim)
    x = np.arange(dim, dtype=np.int64)
    return sp.coo_matrix((np.ones(dim), (tau, x)), shape=(dim, dim)).tocsr()


def translate_vector(vec: np.ndarray, n_sites: int, local_dim: int = 2,
                     steps: int = 1) -> np.ndarray:
    """Apply T^steps to a state vector via index gathers (no matrix)."""
    dim = local_dim ** n_sites
    tau = _translation_permutation(n_sites, local_dim)
    out = vec
    steps = steps % n_sites
    inv = np.empty_like(tau)
    inv[tau] = np.arange(dim, dtype=np.int64)
    for _ in range(steps):
        out = out[inv]  # (T v)[tau(x)] = v[x]  <=>  (T v)[y] = v[inv(y)]
    return out


def collective_generators(n_qubits: int):
    """(Jx, Jy, Jz) for a qubit chain; see spin_core.collective_spin_ops."""
    return collective_spin_ops(n_qubits)


# ---------------------------------------------------------------------------
# invariance checks


@dataclass(frozen=True)
class InvarianceReport:
    check: str
    residual: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def as_json(self) -> dict:
        return {
            "check": self.check,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "details": self.details,
        }


def _sparse_max_abs(mat) -> float:
    coo = sp.coo_matrix(mat)
    return float(np.max(np.abs(coo.data))) if coo.nnz else 0.0


def is_translation_invariant(ham: SpinChainHamiltonian, period: int = 1,
                             tol: float = 1e-10, samples: int = 64,
                             seed: int = 0) -> InvarianceReport:
    """Residual of T^period H T^-period - H.

    Exact sparse computation when the global matrix fits; otherwise a seeded
    random-vector estimate (max infinity-norm of the difference applied to
    unit vectors), with the sample count recorded in the details.
    """
    if ham.boundary != "periodic":
        raise ValueError("translation invariance requires periodic boundary")
    details = {"period": period}
    if ham.dim <= 2 ** 13:
        g = build_global(ham)
        t = translation_operator(ham.n_sites, ham.local_dim)
        tp = t ** period
        residual = _sparse_max_abs(tp @ g @ tp.T - g)
        details["method"] = "sparse"
    else:
        rng = np.random.default_rng(seed)
        residual = 0.0
        for _ in range(samples):
            v = rng.standard_normal(ham.dim)
            v /= np.linalg.norm(v)
            hv = apply_hamiltonian(ham, v)
            tv = translate_vector(v, ham.n_sites, ham.local_dim, steps=-period)
            thv = translate_vector(apply_hamiltonian(ham, tv), ham.n_sites,
                                   ham.local_dim, steps=period)
            residual = max(residual, float(np.max(np.abs(thv - hv))))
        details["method"] = "matvec"
        details["samples"] = samples
        details["seed"] = seed
    return InvarianceReport("translation_invariance", residual, tol,
                            residual <= tol, details)


def haar_random_unitary(dim: int, rng) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    q, r = np.linalg.qr(z)
    phase = np.diag(r).copy()
    phase /= np.abs(phase)
    return q * phase


def is_rotation_invariant(ham: SpinChainHamiltonian, tol: float = 1e-10,
                          samples: int = 3, seed: int = 0) -> InvarianceReport:
    """Residual of [H, Ja] for the three collective generators.

    Vanishing commutators with Jx, Jy, Jz are equivalent to invariance under
    every global single-qubit rotation U^(tensor n); a few seeded Haar samples
    of that conjugation are recorded as corroboration on small instances.
    """
    if ham.local_dim != 2:
        raise ValueError("rotation invariance is defined for qubit chains")
    g = build_global(ham)
    residual = 0.0
    for ja in collective_spin_ops(ham.n_sites):
        residual = max(residual, _sparse_max_abs(g @ ja - ja @ g))
    details = {}
    if samples > 0 and ham.dim <= 2 ** 8:
        rng = np.random.default_rng(seed)
        gd = g.toarray()
        worst = 0.0
        for _ in range(samples):
            u1 = haar_random_unitary(2, rng)
            un = u1
            for _ in range(ham.n_sites - 1):
                un = np.kron(un, u1)
            worst = max(worst, float(np.max(np.abs(un @ gd @ un.conj().T - gd))))
        details["sampled_conjugation_residual"] = worst
        details["samples"] = samples
        details["seed"] = seed
    return InvarianceReport("rotation_invariance", float(residual), tol,
                            residual <= tol, details)


# ---------------------------------------------------------------------------
# JSON schema
#
# {"n": int, "local_dim": int, "boundary": "open"|"periodic",
#  "terms": [{"support": [int...], "matrix": [[[re,im],...],...]}],
#  "label": str}
#
# Extensions (documented in the README): a "schema_version" marker; an
# optional "metadata" object; large terms may store "matrix" in COO triplet
# form or reference an earlier term's matrix via "matrix_ref" to keep
# translation-covers of 13-qubit cells at a sane file size.

_DENSE_JSON_DIM_CAP = 256


def hamiltonian_to_json(ham: SpinChainHamiltonian) -> dict:
    terms_json = []
    seen = {}  # id(matrix) -> first term index
    for term in ham.terms:
        entry = {"support": [int(s) for s in term.support]}
        key = id(term.matrix)
        if key in seen:
            entry["matrix_ref"] = seen[key]
        else:
            seen[key] = len(terms_json)
            if sp.issparse(term.matrix) or term.matrix.shape[0] > _DENSE_JSON_DIM_CAP:
                entry["matrix"] = jsonio.sparse_matrix_to_json(term.matrix)
            else:
                entry["matrix"] = jsonio.matrix_to_json(term.matrix)
        terms_json.append(entry)
    doc = {
        "schema_version": jsonio.SCHEMA_VERSION,
        "n": ham.n_sites,
        "local_dim": ham.local_dim,
        "boundary": ham.boundary,
        "terms": terms_json,
        "label": ham.label,
    }
    if ham.metadata:
        doc["metadata"] = ham.metadata
    return doc


def hamiltonian_from_json(doc) -> SpinChainHamiltonian:
    jsonio.require_keys(doc, ("n", "local_dim", "boundary", "terms", "label"),
                        "hamiltonian")
    if not isinstance(doc["terms"], list):
        raise SchemaError("hamiltonian: 'terms' must be a list")
    matrices = []
    terms = []
    for idx, entry in enumerate(doc["terms"]):
        where = f"terms[{idx}]"
        jsonio.require_keys(entry, ("support",), where)
        if "matrix_ref" in entry:
            ref = entry["matrix_ref"]
            if not isinstance(ref, int) or not 0 <= ref < len(matrices):
                raise SchemaError(f"{where}: bad matrix_ref {ref!r}")
            mat = matrices[ref]
        elif "matrix" in entry:
            raw = entry["matrix"]
            if isinstance(raw, dict):
                mat = jsonio.sparse_matrix_from_json(raw, where)
            else:
                mat = jsonio.matrix_from_json(raw, where)
        else:
            raise SchemaError(f"{where}: needs 'matrix' or 'matrix_ref'")
        matrices.append(mat)
        try:
            terms.append(LocalTerm(tuple(entry["support"]), mat))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: {exc}") from exc
    try:
        return SpinChainHamiltonian(
            n_sites=int(doc["n"]),
            local_dim=int(doc["local_dim"]),
            boundary=doc["boundary"],
            terms=terms,
            label=str(doc["label"]),
            metadata=dict(doc.get("metadata", {})),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"hamiltonian: {exc}") from exc


def save_hamiltonian(ham: SpinChainHamiltonian, path):
    jsonio.dump_json(hamiltonian_to_json(ham), path)


def load_hamiltonian(path) -> SpinChainHamiltonian:
    return hamiltonian_from_json(jsonio.load_json(path))


# ---------------------------------------------------------------------------
# stock models used throughout the tests and demos


def heisenberg_pair_term() -> np.ndarray:
    """(sx sx + sy sy + sz sz)/4 on two qubits; eigenvalues -3/4 and +1/4."""
    from .spin_core import PAULI_X, PAULI_Y, PAULI_Z

    total = np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y) + np.kron(PAULI_Z, PAULI_Z)
    return total.real / 4.0


def heisenberg_chain(n_sites: int, boundary: str = "open") -> SpinChainHamiltonian:
    pair = heisenberg_pair_term()
    bonds = n_sites if boundary == "periodic" and n_sites > 2 else n_sites - 1
    terms = [LocalTerm(((i, (i + 1) % n_sites)), pair) for i in range(bonds)]
    return SpinChainHamiltonian(n_sites, 2, boundary, terms, label="heisenberg")


def field_chain(n_sites: int, b: float = 1.0, boundary: str = "open") -> SpinChainHamiltonian:
    sz = np.diag([1.0, -1.0])
    terms = [LocalTerm((i,), b * sz) for i in range(n_sites)]
    return SpinChainHamiltonian(n_sites, 2, boundary, terms, label="z_field")
