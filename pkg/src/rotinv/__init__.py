"""Rotation- and translation-invariant encodings of spin-chain Hamiltonians.

The package turns a k-local chain Hamiltonian into one that commutes with
global SU(2) rotations (and optionally with single-qubit translations)
while preserving its ground energy, gap, and dynamics on an encoded
subspace.  Layout:

- spin_core: total-spin sector combinatorics, projectors, isometries
- ham_model: local terms, chain Hamiltonians, invariance checks, JSON
- spectral_engine: dense/iterative eigensolvers, time evolution, thermal sums
- ri_encode: the rotation-invariant (per-site block) encoding
- tri_flags: flag blocks and the translation-invariant construction
- cli: command-line access to all of the above
"""

from .errors import CapacityError, ConvergenceError, DecodeError, SchemaError
from .halfint import HalfInteger, halfint
from .ham_model import (
    InvarianceReport,
    LocalTerm,
    SpinChainHamiltonian,
    build_global,
    field_chain,
    heisenberg_chain,
    heisenberg_pair_term,
    is_rotation_invariant,
    is_translation_invariant,
    load_hamiltonian,
    operator_norm,
    save_hamiltonian,
    translation_operator,
)
from .ri_encode import (
    RiEncoding,
    decode_state,
    encode_hamiltonian,
    encode_observable,
    encode_state,
    lift_term,
    load_encoding,
    penalty_field,
    save_encoding,
)
from .spectral_engine import (
    SpectralResult,
    ThermalResult,
    eigensolve,
    evolve,
    partition_function,
    suppression_ratio_field_model,
    suppression_sweep,
    thermal_expectation,
)
from .spin_core import (
    EncodingMap,
    admissible_spins,
    catalan_multiplicity,
    decompose,
    dicke_states,
    embed_on_support,
    largest_multiplicity_sector,
    multiplicity_basis,
    subsystem_isometry,
    symmetric_projector,
    total_spin_projector,
)
from .tri_flags import (
    FlagSpec,
    body_size,
    build_tri_hamiltonian,
    degeneracy_count,
    flag_projector,
    flag_rank,
    load_flag_spec,
    make_flag_spec,
    save_flag_spec,
    verify_flag_overlaps,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "ConvergenceError", "DecodeError", "SchemaError",
    "HalfInteger", "halfint",
    "InvarianceReport", "LocalTerm", "SpinChainHamiltonian", "build_global",
    "field_chain", "heisenberg_chain", "heisenberg_pair_term",
    "is_rotation_invariant", "is_translation_invariant", "load_hamiltonian",
    "operator_norm", "save_hamiltonian", "translation_operator",
    "RiEncoding", "decode_state", "encode_hamiltonian", "encode_observable",
    "encode_state", "lift_term", "load_encoding", "penalty_field",
    "save_encoding",
    "SpectralResult", "ThermalResult", "eigensolve", "evolve",
    "partition_function", "suppression_ratio_field_model", "suppression_sweep",
    "thermal_expectation",
    "EncodingMap", "admissible_spins", "catalan_multiplicity", "decompose",
    "dicke_states", "embed_on_support", "largest_multiplicity_sector",
    "multiplicity_basis", "subsystem_isometry", "symmetric_projector",
    "total_spin_projector",
    "FlagSpec", "body_size", "build_tri_hamiltonian", "degeneracy_count",
    "flag_projector", "flag_rank", "load_flag_spec", "make_flag_spec",
    "save_flag_spec", "verify_flag_overlaps",
    "__version__",
]
