"""SU(2) structure of qubit registers.

A register of r qubits splits into charge sectors labelled by the total spin
j.  Everything downstream (invariant encodings, flag projectors) is built
from three primitives implemented here:

* exact sector multiplicities (ballot-number combinatorics),
* spectral projectors onto total-spin sectors of the collective Casimir
  operator J^2 = Jx^2 + Jy^2 + Jz^2 with Ja = (1/2) sum_i sigma_a^(i),
* isometries into a chosen sector, with multiplicity labels ordered by the
  sequence of intermediate spins in left-to-right pairwise coupling.

Site 0 is the leftmost tensor factor (most significant digit of the basis
index).  |0> is spin-up (m = +1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError
from .halfint import HalfInteger, halfint

# Caps keeping dense/sparse objects inside a small machine's memory.
DENSE_QUBIT_CAP = 12          # casimir_operator / total_spin_projector
DECOMPOSE_CAP = 64            # pure integer combinatorics
SPARSE_NNZ_CAP = 2 ** 26      # embed_on_support output entries

ID2 = np.eye(2)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
PAULI_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]])   # lowers m: |0> -> |1>
PAULI_PLUS = PAULI_MINUS.T.copy()

_UP = np.array([1.0, 0.0])
_DOWN = np.array([0.0, 1.0])


# ---------------------------------------------------------------------------
# sector bookkeeping


def admissible_spins(r: int) -> list[HalfInteger]:
    """All total spins j occurring on r qubits: 2j in {r mod 2, ..., r}."""
    if r < 1:
        raise ValueError(f"need at least one qubit, got r={r}")
    return [HalfInteger(tj) for tj in range(r % 2, r + 1, 2)]


def validate_spin(r: int, j) -> HalfInteger:
    """Check 0 <= 2j <= r and 2j == r (mod 2); return the normalized label."""
    j = halfint(j)
    if r < 1:
        raise ValueError(f"need at least one qubit, got r={r}")
    if j.twice_value < 0 or j.twice_value > r:
        raise ValueError(f"spin j={j} out of range for r={r} qubits")
    if (j.twice_value - r) % 2 != 0:
        raise ValueError(f"spin j={j} has wrong parity for r={r} qubits")
    return j


def catalan_multiplicity(r: int, j) -> int:
    """Number of spin-j irreps on r qubits, as an exact integer.

    For even r this is the ballot count C(r, r/2 - j) * (2j+1) / (r/2 + j + 1);
    odd r reduces to the two even-(r-1) counts one coupling step back.
    """
    j = validate_spin(r, j)
    tj = j.twice_value
    if r == 1:
        return 1
    if r % 2 == 0:
        k = (r - tj) // 2
        num = math.comb(r, k) * (tj + 1) * 2
        den = r + tj + 2
        quot, rem = divmod(num, den)
        if rem:  # the ballot formula is always an integer; guard the arithmetic
            raise AssertionError(f"non-integer multiplicity for r={r}, 2j={tj}")
        return quot
    total = 0
    for tj_prev in (tj - 1, tj + 1):
        if 0 <= tj_prev <= r - 1:
            total += catalan_multiplicity(r - 1, HalfInteger(tj_prev))
    return total


@dataclass(frozen=True)
class DfsDecomposition:
    """Sector table of r qubits: rows (j, 2j+1, multiplicity)."""

    r: int
    sectors: tuple  # of (HalfInteger, int, int)

    def total_dimension(self) -> int:
        return sum(dim * mult for _, dim, mult in self.sectors)

    def multiplicity(self, j) -> int:
        j = halfint(j)
        for jj, _, mult in self.sectors:
            if jj == j:
                return mult
        return 0


def decompose(r: int) -> DfsDecomposition:
    """Full sector table for r qubits, ascending in j."""
    if not 1 <= r <= DECOMPOSE_CAP:
        raise ValueError(f"r must be in [1, {DECOMPOSE_CAP}], got {r}")
    sectors = tuple(
        (j, j.twice_value + 1, catalan_multiplicity(r, j)) for j in admissible_spins(r)
    )
    return DfsDecomposition(r=r, sectors=sectors)


def largest_multiplicity_sector(r: int) -> tuple[HalfInteger, int]:
    """The j with the most irrep copies (ties broken toward smaller j)."""
    best = None
    for j, _, mult in decompose(r).sectors:
        if best is None or mult > best[1]:
            best = (j, mult)
    return best


# ---------------------------------------------------------------------------
# collective operators


@lru_cache(maxsize=32)
def collective_spin_ops(n: int):
    """(Jx, Jy, Jz) on n qubits as sparse CSR, Ja = (1/2) sum_i sigma_a^(i)."""
    ops = []
    for pauli in (PAULI_X, PAULI_Y, PAULI_Z):
        total = sp.csr_matrix((2 ** n, 2 ** n), dtype=pauli.dtype)
        for i in range(n):
            total = total + embed_on_support(0.5 * pauli, [i], n)
        ops.append(total.tocsr())
    return tuple(ops)


@lru_cache(maxsize=32)
def collective_lowering(n: int) -> sp.csr_matrix:
    """J- = sum_i sigma^-_i on n qubits."""
    total = sp.csr_matrix((2 ** n, 2 ** n))
    for i in range(n):
        total = total + embed_on_support(PAULI_MINUS, [i], n)
    return total.tocsr()


def casimir_operator(r: int) -> np.ndarray:
    """Dense J^2 on r qubits.  Real symmetric (the Jy^2 part is real)."""
    if not 1 <= r <= DENSE_QUBIT_CAP:
        raise CapacityError(f"casimir_operator supports 1 <= r <= {DENSE_QUBIT_CAP}")
    jx, jy, jz = collective_spin_ops(r)
    c = (jx @ jx + jy @ jy + jz @ jz).toarray()
    return np.ascontiguousarray(c.real)


@lru_cache(maxsize=8)
def _casimir_eigh(r: int):
    w, v = np.linalg.eigh(casimir_operator(r))
    w.flags.writeable = False
    v.flags.writeable = False
    return w, v


def casimir_eigenspace_dimension(r: int, j) -> int:
    """Dimension of the j(j+1) eigenspace of J^2, counted from the spectrum.

    Serves as the diagonalization-side cross-check of catalan_multiplicity:
    the count equals (2j+1) times the multiplicity.
    """
    j = validate_spin(r, j)
    w, _ = _casimir_eigh(r)
    # neighbouring Casimir eigenvalues differ by at least 2, so 1.0 is safe
    return int(np.count_nonzero(np.abs(w - j.casimir_eigenvalue()) < 1.0))


@lru_cache(maxsize=48)
def _projector_cached(r: int, tj: int) -> np.ndarray:
    w, v = _casimir_eigh(r)
    mask = np.abs(w - HalfInteger(tj).casimir_eigenvalue()) < 1.0
    block = v[:, mask]
    p = block @ block.T
    p = 0.5 * (p + p.T)
    p.flags.writeable = False
    return p

def total_spin_projector(r: int, j) -> np.ndarray:
    """Orthogonal projector onto the total-spin-j sector of r qubits (dense)."""
    if r > DENSE_QUBIT_CAP:
        raise CapacityError(f"total_spin_projector supports r <= {DENSE_QUBIT_CAP}")
    j = validate_spin(r, j)
    return _projector_cached(r, j.twice_value)


def symmetric_projector(m: int) -> np.ndarray:
    """Projector onto the fully symmetric (j = m/2) sector of m qubits."""
    return total_spin_projector(m, HalfInteger(m))


def dicke_states(m: int) -> sp.csr_matrix:
    """Orthonormal basis of the symmetric sector as a sparse (2^m, m+1) matrix.

    Column k is the uniform superposition of the C(m, k) basis states with k
    ones, built directly from bit counts; the symmetric projector is then
    the product with its own transpose, which is how runs too long for a
    dense projector are applied.
    """
    if m > 26:
        raise CapacityError(f"dicke_states supports m <= 26, got {m}")
    idx = np.arange(2 ** m, dtype=np.int64)
    counts = np.zeros(idx.shape, dtype=np.int64)
    tmp = idx.copy()
    for _ in range(m):
        counts += tmp & 1
        tmp >>= 1
    vals = 1.0 / np.sqrt([math.comb(m, int(k)) for k in counts])
    return sp.coo_matrix((vals, (idx, counts)), shape=(2 ** m, m + 1)).tocsr()


# ---------------------------------------------------------------------------
# embedding local operators


def embed_on_support(op, support, n_sites: int, local_dim: int = 2) -> sp.csr_matrix:
    """Tensor a k-site operator with identity onto the listed sites.

    ``support`` is an ordered list of distinct site indices; the first listed
    site corresponds to the most significant digit of ``op``'s row index, so
    non-contiguous and wrapped supports are just permutations of labels.
    """
    support = [int(s) for s in support]
    q = int(local_dim)
    s = len(support)
    if len(set(support)) != s:
        raise ValueError(f"support has repeated sites: {support}")
    if any(site < 0 or site >= n_sites for site in support):
        raise ValueError(f"support {support} out of range for n_sites={n_sites}")
    a = sp.coo_matrix(op)
    if a.shape != (q ** s, q ** s):
        raise ValueError(
            f"operator shape {a.shape} does not match {s} sites of dimension {q}"
        )
    rest = [site for site in range(n_sites) if site not in set(support)]
    n_rest = q ** len(rest)
    if a.nnz * n_rest > SPARSE_NNZ_CAP:
        raise CapacityError(
            f"embedding would need {a.nnz * n_rest} entries (cap {SPARSE_NNZ_CAP})"
        )

    def scatter(indices, sites):
        out = np.zeros(len(indices), dtype=np.int64)
        width = len(sites)
        for pos, site in enumerate(sites):
            digits = (indices // q ** (width - 1 - pos)) % q
            out += digits * q ** (n_sites - 1 - site)
        return out

    row_op = scatter(a.row.astype(np.int64), support)
    col_op = scatter(a.col.astype(np.int64), support)
    idx_rest = scatter(np.arange(n_rest, dtype=np.int64), rest)
    rows = (row_op[:, None] + idx_rest[None, :]).ravel()
    cols = (col_op[:, None] + idx_rest[None, :]).ravel()
    vals = np.repeat(a.data, n_rest)
    dim = q ** n_sites
    return sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()


def apply_on_sites(vec: np.ndarray, mat, sites, n_sites: int, local_dim: int = 2):
    """Apply a k-site operator to a state vector without embedding it.

    Reshapes the vector into a rank-n tensor, moves the target axes to the
    front, and hits them with ``mat`` (dense or sparse).  Memory stays at a
    couple of copies of the vector, which is what makes 20+ qubit windows
    tractable.
    """
    q = local_dim
    sites = list(sites)
    s = len(sites)
    t = np.moveaxis(vec.reshape([q] * n_sites), sites, range(s))
    t = np.ascontiguousarray(t).reshape(q ** s, -1)
    out = mat @ t
    out = np.asarray(out).reshape([q] * n_sites)
    out = np.moveaxis(out, range(s), sites)
    return np.ascontiguousarray(out).reshape(-1)


# ---------------------------------------------------------------------------
# sector isometries


def coupling_paths(r: int, j) -> list[tuple[int, ...]]:
    """All intermediate-spin sequences reaching j, in ascending lex order.

    A path lists 2*j_i after coupling qubits 1..i, so it starts at 1 and ends
    at 2j, changing by +-1 each step.  Path count equals the multiplicity.
    """
    j = validate_spin(r, j)
    target = j.twice_value
    paths = []

    def walk(prefix):
        i = len(prefix)
        tj = prefix[-1]
        if i == r:
            if tj == target:
                paths.append(tuple(prefix))
            return
        remaining = r - i
        for step in (-1, +1):  # -1 first gives ascending lex order directly
            nxt = tj + step
            if nxt < 0 or abs(nxt - target) > remaining:
                continue
            prefix.append(nxt)
            walk(prefix)
            prefix.pop()

    walk([1])
    return paths


def _highest_weight_state(path: tuple[int, ...]) -> np.ndarray:
    """|j, m=j> for one coupling path, built by explicit pairwise coupling.

    Stepping up is the product of highest weights.  Stepping down uses
       |j-1/2, j-1/2> = sqrt(2j/(2j+1)) |j,j>|down>
                        - sqrt(1/(2j+1)) |j,j-1>|up>,
    with |j, j-1> obtained from one collective lowering.
    """
    v = _UP.copy()
    tj = 1
    for n_qubits, tj_next in enumerate(path[1:], start=2):
        if tj_next == tj + 1:
            v = np.kron(v, _UP)
        elif tj_next == tj - 1:
            w = collective_lowering(n_qubits - 1) @ v
            w = w / np.sqrt(tj)  # J-|j,j> has norm sqrt(2j)
            v = np.sqrt(tj / (tj + 1.0)) * np.kron(v, _DOWN) - np.sqrt(
                1.0 / (tj + 1.0)
            ) * np.kron(w, _UP)
        else:
            raise ValueError(f"invalid coupling path step {tj} -> {tj_next}")
        tj = tj_next
    return v


@dataclass(frozen=True)
class EncodingMap:
    """Isometry from a d-level site into the highest-weight slice of a sector.

    Column l is |j, m=j, alpha_l> on r qubits, with multiplicity labels
    alpha_l ordered by coupling path.  V^dagger V = 1_d exactly (up to float
    rounding); the image lies inside the spin-j sector.
    """

    r: int
    j: HalfInteger
    d: int
    isometry: np.ndarray  # shape (2^r, d)


def subsystem_isometry(r: int, j, d: int) -> EncodingMap:
    """First d multiplicity copies of the spin-j sector at highest weight."""
    j = validate_spin(r, j)
    if r > DENSE_QUBIT_CAP:
        raise CapacityError(f"subsystem_isometry supports r <= {DENSE_QUBIT_CAP}")
    mult = catalan_multiplicity(r, j)
    if not 1 <= d <= mult:
        raise ValueError(f"d={d} exceeds multiplicity {mult} of sector j={j} on r={r}")
    paths = coupling_paths(r, j)[:d]
    cols = [_highest_weight_state(p) for p in paths]
    v = np.column_stack(cols)
    v.flags.writeable = False
    return EncodingMap(r=r, j=j, d=d, isometry=v)


def multiplicity_basis(r: int, j, d: int) -> np.ndarray:
    """All |j, m, alpha_l> states: array of shape (2j+1, d, 2^r).

    Index 0 runs over m = j, j-1, ..., -j.  Built by repeated collective
    lowering of the highest-weight isometry columns, which keeps the
    multiplicity label exactly fixed.
    """
    enc = subsystem_isometry(r, j, d)
    tj = enc.j.twice_value
    jm = collective_lowering(r)
    levels = np.empty((tj + 1, d, 2 ** r), dtype=float)
    levels[0] = enc.isometry.T
    tm = tj
    for row in range(1, tj + 1):
        # J-|j,m> = sqrt(j(j+1) - m(m-1)) |j,m-1>; exact integer under the root
        norm2 = (tj * (tj + 2) - tm * (tm - 2)) / 4.0
        levels[row] = (jm @ levels[row - 1].T).T / np.sqrt(norm2)
        tm -= 2
    levels.flags.writeable = False
    return levels


# ---------------------------------------------------------------------------
# sector orthogonality checks


def check_sector_orthogonality(r: int, j, m: int) -> float:
    """Max-entry norm of P^{r,j} times the symmetric projector on m sites.

    The m sites are taken as the first m of the r.  The product vanishes
    exactly when m > r/2 + j: a fully symmetric block of m qubits carries
    spin m/2, and the remaining r-m qubits cannot couple it down to j.
    """
    j = validate_spin(r, j)
    if not 1 <= m <= r:
        raise ValueError(f"need 1 <= m <= r, got m={m}, r={r}")
    p_sector = total_spin_projector(r, j)
    p_sym = embed_on_support(symmetric_projector(m), range(m), r)
    prod = p_sector @ p_sym  # dense @ sparse -> dense
    return float(np.max(np.abs(prod)))
