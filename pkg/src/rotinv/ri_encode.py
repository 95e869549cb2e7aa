"""Rotationally invariant encodings of spin-chain Hamiltonians.

Each d-level site is replaced by r qubits, with the logical space carried by
d multiplicity copies of one total-spin-j sector.  A lifted term acts as the
original operator on the multiplicity labels and as identity on the magnetic
quantum number, which is what makes the result commute with global rotations;
a per-block penalty field J pushes everything outside the encoded sector up
by at least J.  The penalty strength defaults to 2 k max_i ||h_i||, which is
enough to keep the low spectrum (ground energy, and the gap whenever
k max||h|| >= gap) identical to the source model.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp

from . import jsonio
from .errors import DecodeError, SchemaError
from .halfint import HalfInteger
from .ham_model import LocalTerm, SpinChainHamiltonian
from .spin_core import (
    EncodingMap,
    catalan_multiplicity,
    multiplicity_basis,
    subsystem_isometry,
    validate_spin,
)

_DENSE_TERM_DIM_CAP = 256  # lifted terms at or below this stay dense ndarrays


@dataclass(frozen=True)
class RiEncoding:
    """Bookkeeping of one Lemma-style encoding run."""

    r: int
    j: HalfInteger
    d: int
    penalty_strength: float
    map: EncodingMap
    source_label: str = ""
    target_label: str = ""


def _sector_isometries(r: int, j, d: int):
    """List of U_m (2^r x d), one per magnetic level m = j, j-1, ..., -j."""
    levels = multiplicity_basis(r, j, d)
    return [sp.csr_matrix(levels[m_idx].T) for m_idx in range(levels.shape[0])]


def lift_term(matrix, r: int, j, d: int, k: int) -> sp.csr_matrix:
    """Lift a k-site logical operator to k blocks of r qubits.

    Returns sum over magnetic labels (m_1 ... m_k) of W h W^dagger with
    W = U_{m_1} x ... x U_{m_k}: identity on each block's magnetic level,
    the original matrix on the multiplicity labels.
    """
    j = validate_spin(r, j)
    us = _sector_isometries(r, j, d)
    h = sp.csr_matrix(matrix)
    if h.shape[0] != d ** k:
        raise ValueError(f"matrix dimension {h.shape[0]} != d^k = {d ** k}")
    dim = 2 ** (r * k)
    total = sp.csr_matrix((dim, dim))
    for flat in range(len(us) ** k):
        labels = []
        x = flat
        for _ in range(k):
            labels.append(x % len(us))
            x //= len(us)
        w = reduce(sp.kron, [us[m] for m in labels]).tocsr()
        total = total + w @ h @ w.getH()
    total = total.tocsr()
    total.eliminate_zeros()
    return total


def code_block_projector(r: int, j, d: int) -> sp.csr_matrix:
    """Projector onto the encoded (2j+1) x d dimensional slice of one block."""
    total = sp.csr_matrix((2 ** r, 2 ** r))
    for u in _sector_isometries(r, j, d):
        total = total + u @ u.getH()
    return total.tocsr()


def penalty_field(r: int, j, d: int, strength: float) -> LocalTerm:
    """J (1 - P_code) on one r-qubit block (support 0..r-1).

    Annihilates the encoded slice and costs exactly J on its complement;
    being 1 x A + 0 on each rotation sector, it is rotation invariant.
    """
    j = validate_spin(r, j)
    pen = strength * (sp.identity(2 ** r, format="csr") - code_block_projector(r, j, d))
    mat = pen.toarray().real if 2 ** r <= _DENSE_TERM_DIM_CAP else pen
    return LocalTerm(tuple(range(r)), mat)


def _densify_if_small(mat):
    if sp.issparse(mat) and mat.shape[0] <= _DENSE_TERM_DIM_CAP:
        arr = mat.toarray()
        if np.max(np.abs(arr.imag)) == 0.0:
            arr = arr.real
        return arr
    return mat


def encode_hamiltonian(h1: SpinChainHamiltonian, r: int, j,
                       penalty_strength: float | None = None):
    """Rebuild a chain Hamiltonian on r qubits per site; returns (h2, encoding).

    The sector must hold at least local_dim multiplicity copies.  When no
    penalty strength is given it is set to 2 k max_i ||h_i|| (falling back to
    1.0 for a termless model so the penalty still separates the sectors).
    """
    j = validate_spin(r, j)
    d = h1.local_dim
    mult = catalan_multiplicity(r, j)
    if mult < d:
        raise ValueError(
            f"sector j={j} on r={r} qubits has multiplicity {mult} < local_dim {d}"
        )
    if penalty_strength is None:
        penalty_strength = 2.0 * h1.k * h1.max_term_norm()
        if penalty_strength == 0.0:
            penalty_strength = 1.0
    terms = []
    for term in h1.terms:
        lifted = _densify_if_small(lift_term(term.matrix, r, j, d, term.k))
        qubits = tuple(q for s in term.support for q in range(s * r, (s + 1) * r))
        terms.append(LocalTerm(qubits, lifted))
    pen = penalty_field(r, j, d, penalty_strength)
    for site in range(h1.n_sites):
        qubits = tuple(range(site * r, (site + 1) * r))
        terms.append(LocalTerm(qubits, pen.matrix))
    target_label = f"{h1.label}_ri" if h1.label else "ri"
    h2 = SpinChainHamiltonian(
        n_sites=r * h1.n_sites,
        local_dim=2,
        boundary=h1.boundary,
        terms=terms,
        label=target_label,
        metadata={
            "encoding": {
                "r": r,
                "twice_j": j.twice_value,
                "d": d,
                "J": penalty_strength,
                "source_label": h1.label,
            }
        },
    )
    enc = RiEncoding(
        r=r,
        j=j,
        d=d,
        penalty_strength=float(penalty_strength),
        map=subsystem_isometry(r, j, d),
        source_label=h1.label,
        target_label=target_label,
    )
    return h2, enc


# ---------------------------------------------------------------------------
# states and observables


def _site_isometry_power(enc: RiEncoding, n_sites: int) -> np.ndarray:
    return reduce(np.kron, [enc.map.isometry] * n_sites)


def encode_state(psi: np.ndarray, enc: RiEncoding) -> np.ndarray:
    """V^(x N) |psi>: every block enters at the highest magnetic level m = j."""
    n_sites = round(np.log(len(psi)) / np.log(enc.d))
    if enc.d ** n_sites != len(psi):
        raise ValueError(f"state length {len(psi)} is not a power of d={enc.d}")
    return _site_isometry_power(enc, n_sites) @ psi


def decode_state(big_psi: np.ndarray, enc: RiEncoding):
    """Pull back through the encoding; returns (normalized state, leakage).

    Leakage is the weight outside the fixed-m code slice.  A state entirely
    outside it cannot be decoded and raises DecodeError.
    """
    n_sites = round(np.log(len(big_psi)) / np.log(2 ** enc.r))
    if 2 ** (enc.r * n_sites) != len(big_psi):
        raise ValueError(f"state length {len(big_psi)} is not a power of 2^r")
    nrm = np.linalg.norm(big_psi)
    if nrm == 0:
        raise DecodeError("cannot decode the zero vector")
    psi = _site_isometry_power(enc, n_sites).conj().T @ (big_psi / nrm)
    weight = float(np.linalg.norm(psi) ** 2)
    leakage = 1.0 - weight
    if weight <= 1e-12:
        raise DecodeError(f"state has no support on the code slice (leakage {leakage})")
    return psi / np.sqrt(weight), leakage


def encode_observable(obs, enc: RiEncoding, n_sites: int) -> sp.csr_matrix:
    """V^(x N) O (V^(x N))^dagger as a sparse operator on r N qubits."""
    v = sp.csr_matrix(_site_isometry_power(enc, n_sites))
    o = sp.csr_matrix(obs)
    if o.shape[0] != enc.d ** n_sites:
        raise ValueError(f"observable dimension {o.shape[0]} != d^N")
    return (v @ o @ v.getH()).tocsr()


def code_space_projector(enc: RiEncoding, n_sites: int) -> sp.csr_matrix:
    """Projector onto the full encoded sector (all magnetic levels) of N blocks."""
    site = code_block_projector(enc.r, enc.j, enc.d)
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), [site] * n_sites)


# ---------------------------------------------------------------------------
# literal direct-sum site model (penalized levels listed explicitly)


def direct_sum_site(h_site: np.ndarray, penalty: float, total_dim: int) -> np.ndarray:
    """block_diag(h_site, penalty * identity) on a total_dim-level site.

    The thermal-suppression closed form treats an encoded site as its d
    logical levels plus (total_dim - d) flat levels at the penalty energy;
    this literal matrix is that model, kept separate from the true encoding
    so the two can be compared.
    """
    h_site = np.asarray(h_site)
    d = h_site.shape[0]
    if total_dim < d:
        raise ValueError(f"total_dim {total_dim} smaller than logical dimension {d}")
    out = np.zeros((total_dim, total_dim), dtype=h_site.dtype)
    out[:d, :d] = h_site
    out[d:, d:] = penalty * np.eye(total_dim - d)
    return out


# ---------------------------------------------------------------------------
# JSON


def encoding_to_json(enc: RiEncoding) -> dict:
    return {
        "schema_version": jsonio.SCHEMA_VERSION,
        "r": enc.r,
        "twice_j": enc.j.twice_value,
        "d": enc.d,
        "J": enc.penalty_strength,
        "isometry": jsonio.matrix_to_json(np.asarray(enc.map.isometry)),
    }


def encoding_from_json(doc) -> RiEncoding:
    jsonio.require_keys(doc, ("r", "twice_j", "d", "J", "isometry"), "encoding")
    r = int(doc["r"])
    j = HalfInteger(int(doc["twice_j"]))
    d = int(doc["d"])
    iso = np.empty((2 ** r, d), dtype=complex)
    raw = doc["isometry"]
    if not isinstance(raw, list) or len(raw) != 2 ** r:
        raise SchemaError(f"encoding: isometry must have 2^r = {2 ** r} rows")
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != d:
            raise SchemaError(f"encoding: isometry row {i} must have d = {d} entries")
        for k, pair in enumerate(row):
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(f"encoding: isometry entry ({i},{k}) is not [re, im]")
            iso[i, k] = complex(pair[0], pair[1])
    gram = iso.conj().T @ iso
    if np.max(np.abs(gram - np.eye(d))) > 1e-8:
        raise SchemaError("encoding: isometry columns are not orthonormal")
    if np.max(np.abs(iso.imag)) == 0.0:
        iso = iso.real
    validate_spin(r, j)
    return RiEncoding(
        r=r,
        j=j,
        d=d,
        penalty_strength=float(doc["J"]),
        map=EncodingMap(r=r, j=j, d=d, isometry=iso),
    )


def save_encoding(enc: RiEncoding, path):
    jsonio.dump_json(encoding_to_json(enc), path)


def load_encoding(path) -> RiEncoding:
    return encoding_from_json(jsonio.load_json(path))
