"""Translationally and rotationally invariant lifts via flag blocks.

A chain of N logical sites becomes a ring of N cells, each holding F flag
qubits followed by r data qubits.  The flag block is a product of fixed-spin
projectors (two pair factors, one more pair, and one fully symmetric run)
whose spin pattern cannot survive being read at a shifted position: any
misaligned copy of the flag projector annihilates correctly formatted
states.  Summing one cell operator over every qubit translation therefore
yields a translation-invariant Hamiltonian in which exactly the N aligned
copies apply the (rotation-invariantly lifted) interaction and the remaining
N(F + r - 1) copies contribute a constant penalty J' on the formatted
sector.  Every factor is a total-spin projector, so the construction is also
rotation invariant.

The annihilation argument is spin counting.  Take one factor of the shifted
flag projector, enforcing total spin J on its support S.  The formatted
state restricted to S decomposes into factors of the periodic pattern:
a pattern factor entirely inside S pins its full spin; the overlap of the
symmetric run is permutation symmetric and pins (overlap size)/2; a single
qubit cut from a pair factor is a free spin-1/2.  The general and small_r
layouts treat data qubits as free halves too, while the improved layout
gets away with a shorter symmetric run by also using that each data block
carries total spin j.  Coupling those contributions gives the attainable
total spins on S, and the layouts are chosen so that for every shift some
factor's spin (on one side or the other) falls outside its attainable set.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import jsonio
from .errors import SchemaError
from .halfint import HalfInteger
from .ham_model import InvarianceReport, LocalTerm, SpinChainHamiltonian, operator_norm
from .ri_encode import lift_term
from .spin_core import (
    DENSE_QUBIT_CAP,
    apply_on_sites,
    catalan_multiplicity,
    dicke_states,
    embed_on_support,
    multiplicity_basis,
    symmetric_projector,
    total_spin_projector,
    validate_spin,
)


@dataclass(frozen=True)
class FlagFactor:
    """One fixed-total-spin factor of a formatted state or flag projector."""

    kind: str          # "singlet" | "triplet" | "symmetric" | "encoded"
    sites: tuple       # positions inside the flag block
    twice: int = -1    # explicit 2j for "encoded" data blocks

    @property
    def twice_spin(self) -> int:
        if self.kind == "singlet":
            return 0
        if self.kind == "triplet":
            return 2
        if self.kind == "encoded":
            return self.twice
        return len(self.sites)  # symmetric run of q qubits carries spin q/2

    @property
    def rank(self) -> int:
        if self.kind == "singlet":
            return 1
        if self.kind == "triplet":
            return 3
        return len(self.sites) + 1

    def matrix(self) -> np.ndarray:
        if self.kind == "singlet":
            return total_spin_projector(2, HalfInteger(0))
        if self.kind == "triplet":
            return total_spin_projector(2, HalfInteger(2))
        return symmetric_projector(len(self.sites))


@dataclass(frozen=True)
class FlagSpec:
    """Flag-block layout for one (r, j) encoding."""

    r: int
    j: HalfInteger
    m: int             # length of the symmetric run
    variant: str       # "general" | "improved" | "small_r"

    @property
    def F(self) -> int:
        return 6 + self.m

    @property
    def cell(self) -> int:
        return self.F + self.r


_VARIANTS = ("general", "improved", "small_r")


def make_flag_spec(r: int, j, variant: str = "general") -> FlagSpec:
    """Choose the symmetric-run length m for the requested layout.

    general:  m = max(r - 1, 5) rounded up to even; no extra premise.
    improved: m = r/2 + j + 1, valid when r/2 >= j + 6 (shorter block for
              large r and small j).
    small_r:  m = r + 1, only for r in {3, 4}; gives the shortest cells.
    """
    j = validate_spin(r, j)
    if variant == "general":
        m = max(r - 1, 5)
        m += m % 2
    elif variant == "improved":
        if r < j.twice_value + 12:
            raise ValueError(
                f"improved layout needs r/2 >= j + 6; got r={r}, j={j}"
            )
        twice_m = r + j.twice_value + 2
        assert twice_m % 2 == 0  # admissibility makes r and 2j equal parity
        m = twice_m // 2
    elif variant == "small_r":
        if r not in (3, 4):
            raise ValueError(f"small_r layout is only defined for r in (3, 4), got r={r}")
        m = r + 1
    else:
        raise ValueError(f"unknown variant {variant!r}; pick one of {_VARIANTS}")
    return FlagSpec(r=r, j=j, m=m, variant=variant)


def flag_factors(spec: FlagSpec) -> tuple:
    """The four factors, with 0-indexed positions inside the flag block.

    The two interleaved pairs at the front read differently under every
    small shift; small_r swaps which of them is the singlet so that the
    shorter symmetric run still conflicts with every offset.
    """
    sym = tuple(range(6, 6 + spec.m))
    if spec.variant == "small_r":
        front = (FlagFactor("triplet", (0, 2)), FlagFactor("singlet", (1, 3)))
    else:
        front = (FlagFactor("singlet", (0, 2)), FlagFactor("triplet", (1, 3)))
    return front + (FlagFactor("singlet", (4, 5)), FlagFactor("symmetric", sym))


def flag_rank(spec: FlagSpec) -> int:
    """Rank of the flag projector: 1 * 3 * 1 * (m + 1)."""
    rank = 1
    for f in flag_factors(spec):
        rank *= f.rank
    return rank


def flag_projector(spec: FlagSpec) -> sp.csr_matrix:
    """Product of the embedded factors on the 2^F flag space."""
    total = sp.identity(2 ** spec.F, format="csr")
    for f in flag_factors(spec):
        total = total @ embed_on_support(sp.csr_matrix(f.matrix()), f.sites, spec.F)
    return total.tocsr()


def flag_basis(spec: FlagSpec) -> np.ndarray:
    """Orthonormal columns spanning the flag projector's image.

    Built as tensor products of each factor's image basis, then permuted
    from factor order to site order.
    """
    factors = flag_factors(spec)
    bases = []
    for f in factors:
        w, v = np.linalg.eigh(f.matrix())
        bases.append(v[:, w > 0.5])
    perm = [s for f in factors for s in f.sites]
    cols = []
    idx = [0] * len(factors)
    total = flag_rank(spec)
    for _ in range(total):
        vec = bases[0][:, idx[0]]
        for b, i in zip(bases[1:], idx[1:]):
            vec = np.kron(vec, b[:, i])
        tensor = vec.reshape((2,) * spec.F)
        # axis a of the tensor currently addresses site perm[a]
        cols.append(np.moveaxis(tensor, range(spec.F), perm).reshape(-1))
        for pos in reversed(range(len(idx))):
            idx[pos] += 1
            if idx[pos] < bases[pos].shape[1]:
                break
            idx[pos] = 0
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# misalignment analysis


def _couple(twice_values: set, twice_new: int) -> set:
    out = set()
    for a in twice_values:
        out.update(range(abs(a - twice_new), a + twice_new + 1, 2))
    return out


def attainable_total_spins(contributions) -> set:
    """Twice-values of total spin reachable by coupling the given pieces.

    Each contribution is a set of candidate twice-spins for one constituent;
    the result is every total the whole collection can form.
    """
    reach = {0}
    for options in contributions:
        reach = set().union(*(_couple(reach, t) for t in options)) if options else reach
    return reach


def _free_halves(q: int) -> set:
    return set(range(q % 2, q + 1, 2))


def _window_contributions(window: set, factors) -> list:
    """Spin options each factor (or leftover free qubit) offers inside a window.

    A factor entirely inside pins its full spin.  A cut symmetric run stays
    permutation symmetric, pinning (overlap)/2.  A cut encoded block of r
    qubits with total spin j can show any sub-spin within (r - overlap)/2 of
    j.  Cut pairs and unconstrained qubits are free halves.  Every rule is
    exact, so a target spin outside the coupled set proves annihilation.
    """
    contribs = []
    covered = set()
    for pf, sites in factors:
        inside = window.intersection(sites)
        if not inside:
            continue
        covered.update(inside)
        q = len(inside)
        if q == len(sites):
            contribs.append({pf.twice_spin})
        elif pf.kind == "symmetric":
            contribs.append({q})
        elif pf.kind == "encoded":
            outside = len(sites) - q
            lo = max(q % 2, pf.twice_spin - outside)
            hi = min(q, pf.twice_spin + outside)
            contribs.append(set(range(lo, hi + 1, 2)))
        else:
            contribs.append(_free_halves(q))
    contribs.append(_free_halves(len(window - covered)))
    return contribs


def _pattern_factors(spec: FlagSpec, n_cells: int, include_data: bool):
    """Factors of a formatted ring, with absolute qubit positions.

    With include_data the r data qubits of each cell enter as a block of
    known total spin j (they hold an encoded state), which is what the
    shortened improved layout relies on.
    """
    out = []
    n = n_cells * spec.cell
    cell_factors = flag_factors(spec)
    if include_data:
        data = FlagFactor("encoded", tuple(range(spec.F, spec.cell)),
                          twice=spec.j.twice_value)
        cell_factors = cell_factors + (data,)
    for c in range(n_cells):
        base = c * spec.cell
        for f in cell_factors:
            out.append((f, tuple((base + s) % n for s in f.sites)))
    return out


def _shifted_factors(spec: FlagSpec, offset: int, n: int):
    return [(f, tuple((offset + s) % n for s in f.sites)) for f in flag_factors(spec)]


def _misalignment_witness(spec: FlagSpec, offset: int, n_cells: int,
                          include_data: bool):
    """Find one factor whose pinned spin the other side cannot supply.

    Tries each shifted flag factor against the formatted pattern, then each
    pattern factor against the shifted flag projector (the two directions
    are exchanged by reflecting the offset).  Returns (direction, factor,
    sites, attainable twice-spins) or None; absence of a witness is merely
    inconclusive, while any hit proves the operator product vanishes.
    """
    n = n_cells * spec.cell
    shifted = _shifted_factors(spec, offset, n)
    pattern = _pattern_factors(spec, n_cells, include_data)
    for f, sites in shifted:
        reach = attainable_total_spins(_window_contributions(set(sites), pattern))
        if f.twice_spin not in reach:
            return "shifted_vs_pattern", f, sites, reach
    for pf, sites in pattern:
        reach = attainable_total_spins(_window_contributions(set(sites), shifted))
        if pf.twice_spin not in reach:
            return "pattern_vs_shifted", pf, sites, reach
    return None


_PROBE_QUBIT_CAP = 22


@lru_cache(maxsize=8)
def _sector_basis(r: int, twice_j: int) -> sp.csr_matrix:
    """Orthonormal basis (2^r, (2j+1) mult) of one full total-spin sector."""
    j = HalfInteger(twice_j)
    mult = catalan_multiplicity(r, j)
    levels = multiplicity_basis(r, j, mult)  # (2j+1, mult, 2^r)
    return sp.csr_matrix(levels.reshape(-1, 2 ** r).T)


def _apply_factor(vec: np.ndarray, factor: FlagFactor, positions, n_sites: int):
    """Apply one factor projector at the given positions of a state vector.

    Symmetric runs too long for a dense projector, and encoded data blocks,
    go through an isometry factorization V V^T of the projector, touching
    only a tall sparse matrix instead of a 2^q square one.
    """
    q = len(factor.sites)
    if factor.kind == "encoded":
        v = _sector_basis(q, factor.twice_spin)
    elif factor.kind == "symmetric" and q > DENSE_QUBIT_CAP:
        v = dicke_states(q)
    else:
        return apply_on_sites(vec, factor.matrix(), positions, n_sites)
    t = np.moveaxis(vec.reshape([2] * n_sites), list(positions), range(q))
    t = np.ascontiguousarray(t).reshape(2 ** q, -1)
    t = v @ (v.T @ t)
    t = np.asarray(t).reshape([2] * n_sites)
    t = np.moveaxis(t, range(q), list(positions))
    return np.ascontiguousarray(t).reshape(-1)


_PROBE_ENCODED_CAP = 12  # largest data block the probe can project exactly


def _misalignment_probe(spec: FlagSpec, offset: int, n_cells: int,
                        rng, include_data: bool, n_probe: int = 3,
                        probe_cap: int = _PROBE_QUBIT_CAP):
    """Numerical residual ||P_flag(shifted) psi_formatted|| on random states.

    Works on the union of the shifted flag block and every pattern factor
    touching it; returns None when that region is too large to probe.
    """
    n = n_cells * spec.cell
    det = _shifted_factors(spec, offset, n)
    det_support = set().union(*(sites for _, sites in det))
    relevant = [(pf, sites)
                for pf, sites in _pattern_factors(spec, n_cells, include_data)
                if det_support.intersection(sites)]
    if include_data and spec.r > _PROBE_ENCODED_CAP:
        return None
    region = sorted(det_support.union(*(sites for _, sites in relevant)))
    if len(region) > probe_cap:
        return None
    pos = {site: i for i, site in enumerate(region)}
    worst = 0.0
    for _ in range(n_probe):
        v = rng.standard_normal(2 ** len(region))
        v = v + 1j * rng.standard_normal(v.shape[0])
        for pf, sites in relevant:
            v = _apply_factor(v, pf, [pos[s] for s in sites], len(region))
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            continue
        v /= nrm
        for f, sites in det:
            v = _apply_factor(v, f, [pos[s] for s in sites], len(region))
        worst = max(worst, float(np.linalg.norm(v)))
    return worst


def verify_flag_overlaps(spec: FlagSpec, n_cells: int = 2, seed: int = 0,
                         tol: float = 1e-10, n_probe: int = 3,
                         probe_cap: int = _PROBE_QUBIT_CAP) -> list:
    """Check every misaligned offset annihilates formatted states.

    For each offset 1..cell-1 this looks for a spin-counting witness and,
    when the overlap region is small enough, corroborates it by applying
    the shifted flag projector to seeded random formatted states.  Returns
    one InvarianceReport per offset.
    """
    rng = np.random.default_rng(seed)
    reports = []
    for offset in range(1, spec.cell):
        include_data = False
        witness = _misalignment_witness(spec, offset, n_cells, False)
        if witness is None:
            include_data = True
            witness = _misalignment_witness(spec, offset, n_cells, True)
        residual = _misalignment_probe(spec, offset, n_cells, rng,
                                       include_data, n_probe, probe_cap)
        details = {"offset": offset, "n_cells": n_cells,
                   "uses_encoded_block": include_data}
        if witness is not None:
            direction, f, sites, reach = witness
            details["witness"] = {
                "direction": direction,
                "kind": f.kind,
                "twice_spin": f.twice_spin,
                "sites": list(sites),
                "attainable_twice_spins": sorted(reach),
            }
        if residual is not None:
            details["probe_residual"] = residual
        ok = witness is not None and (residual is None or residual <= tol)
        reports.append(InvarianceReport(
            check=f"flag_misalignment_offset_{offset}",
            residual=residual if residual is not None else (0.0 if ok else 1.0),
            tolerance=tol,
            passed=ok,
            details=details,
        ))
    return reports


# ---------------------------------------------------------------------------
# the invariant Hamiltonian


def body_size(spec: FlagSpec, k: int) -> int:
    """Qubits touched by one cell operator lifted from a k-site term."""
    return k * spec.cell


def degeneracy_count(spec: FlagSpec, n_sites: int) -> int:
    """Formatted-sector multiplicity (3(m+1))^N (F + r).

    Flag-rank choices per cell times the F + r distinct alignments of the
    pattern (whole-cell shifts map the formatted sector to itself).  The
    measured spectral degeneracy additionally carries the source level's own
    multiplicity and a (2j + 1)^N magnetic factor; verification runs report
    both numbers.
    """
    if n_sites < 0:
        raise ValueError(f"n_sites must be non-negative, got {n_sites}")
    return flag_rank(spec) ** n_sites * spec.cell


def penalty_offset(spec: FlagSpec, n_sites: int, penalty_strength: float) -> float:
    """Constant energy J' N(F + r - 1) added by the misaligned translates."""
    return penalty_strength * n_sites * (spec.cell - 1)


def cell_operator(h_gen, k: int, spec: FlagSpec, penalty_strength: float,
                  local_dim: int = 2) -> sp.csr_matrix:
    """One window of k cells: lifted term gated on flags, plus penalty.

    c = L D + J' (1 - D P_sector) with D the product of the k flag
    projectors, L the rotation-invariant lift of the k-site term on the data
    qubits and P_sector the full total-spin-j projector of each data block.
    Flags and data are disjoint, so every product here is Hermitian.  (When
    the sector holds more multiplicity copies than the site dimension, the
    unused copies sit at zero energy inside the formatted sector; the
    spectral guarantees assume local_dim equals the full multiplicity.)
    """
    w = body_size(spec, k)
    dim = 2 ** w
    det = sp.identity(dim, format="csr")
    code = sp.identity(dim, format="csr")
    basis = _sector_basis(spec.r, spec.j.twice_value)
    sector = (basis @ basis.T).tocsr()
    data_sites = []
    for c in range(k):
        base = c * spec.cell
        for f in flag_factors(spec):
            det = det @ embed_on_support(
                sp.csr_matrix(f.matrix()), tuple(base + s for s in f.sites), w)
        block = tuple(range(base + spec.F, base + spec.cell))
        data_sites.extend(block)
        code = code @ embed_on_support(sector, block, w)
    lifted = lift_term(h_gen, spec.r, spec.j, local_dim, k)
    gated = embed_on_support(lifted, tuple(data_sites), w) @ det
    cell = gated + penalty_strength * (sp.identity(dim, format="csr") - det @ code)
    cell = cell.tocsr()
    cell.eliminate_zeros()
    return cell


def build_tri_hamiltonian(h_gen, k: int, n_sites: int, spec: FlagSpec,
                          penalty_strength: float | None = None,
                          local_dim: int = 2,
                          source_label: str = "") -> SpinChainHamiltonian:
    """Sum the cell operator over every translation of the qubit ring.

    The source model is the translation-invariant chain sum_i T^i h T^-i on
    n_sites sites of dimension local_dim; h_gen is the k-site generator.
    On formatted states the result reproduces that chain's spectrum shifted
    by J' N(F + r - 1), with J' defaulting to 2 k (F + r) max-norm of the
    generator (1.0 for a zero generator, to keep the sectors separated).
    """
    j = validate_spin(spec.r, spec.j)
    if catalan_multiplicity(spec.r, j) < local_dim:
        raise ValueError(
            f"sector j={j} on r={spec.r} qubits cannot hold a {local_dim}-level site"
        )
    if k < 1 or k > n_sites:
        raise ValueError(f"need 1 <= k <= n_sites, got k={k}, n_sites={n_sites}")
    h_gen = h_gen if sp.issparse(h_gen) else np.asarray(h_gen)
    if h_gen.shape[0] != local_dim ** k:
        raise ValueError(f"generator dimension {h_gen.shape[0]} != local_dim^k")
    if penalty_strength is None:
        penalty_strength = 2.0 * k * spec.cell * operator_norm(h_gen)
        if penalty_strength == 0.0:
            penalty_strength = 1.0
    cell = cell_operator(h_gen, k, spec, penalty_strength, local_dim)
    n = n_sites * spec.cell
    w = body_size(spec, k)
    terms = [
        LocalTerm(tuple((x + q) % n for q in range(w)), cell)
        for x in range(n)
    ]
    label = f"{source_label}_tri" if source_label else "tri"
    return SpinChainHamiltonian(
        n_sites=n,
        local_dim=2,
        boundary="periodic",
        terms=terms,
        label=label,
        metadata={
            "tri": {
                "variant": spec.variant,
                "r": spec.r,
                "twice_j": j.twice_value,
                "m": spec.m,
                "F": spec.F,
                "k": k,
                "logical_sites": n_sites,
                "J_prime": penalty_strength,
                "penalty_offset": penalty_offset(spec, n_sites, penalty_strength),
                "body_size": w,
                "source_label": source_label,
            }
        },
    )


# ---------------------------------------------------------------------------
# JSON


def flag_spec_to_json(spec: FlagSpec) -> dict:
    return {
        "schema_version": jsonio.SCHEMA_VERSION,
        "r": spec.r,
        "twice_j": spec.j.twice_value,
        "m": spec.m,
        "F": spec.F,
        "variant": spec.variant,
    }


def flag_spec_from_json(doc) -> FlagSpec:
    jsonio.require_keys(doc, ("r", "twice_j", "m", "variant"), "flag_spec")
    spec = FlagSpec(
        r=int(doc["r"]),
        j=HalfInteger(int(doc["twice_j"])),
        m=int(doc["m"]),
        variant=str(doc["variant"]),
    )
    validate_spin(spec.r, spec.j)
    if spec.variant not in _VARIANTS:
        raise SchemaError(f"flag_spec: unknown variant {spec.variant!r}")
    if "F" in doc and int(doc["F"]) != spec.F:
        raise SchemaError(f"flag_spec: F={doc['F']} inconsistent with m={spec.m}")
    return spec


def save_flag_spec(spec: FlagSpec, path):
    jsonio.dump_json(flag_spec_to_json(spec), path)


def load_flag_spec(path) -> FlagSpec:
    return flag_spec_from_json(jsonio.load_json(path))
