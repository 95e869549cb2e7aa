"""Local-term Hamiltonians: global builder, translation, checks, JSON format."""

import numpy as np
import pytest
import scipy.sparse as sp

from rotinv import (
    LocalTerm,
    SchemaError,
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
from rotinv.ham_model import (
    apply_hamiltonian,
    hamiltonian_from_json,
    hamiltonian_to_json,
    translate_vector,
)

from conftest import PAULI_I, PAULI_X, PAULI_Z, dense, random_hermitian


def test_local_term_validation():
    with pytest.raises(ValueError):
        LocalTerm((0, 0), np.eye(4))  # repeated site
    with pytest.raises(ValueError):
        LocalTerm((0,), np.array([[0.0, 1.0], [0.0, 0.0]]))  # not Hermitian
    with pytest.raises(ValueError):
        SpinChainHamiltonian(2, 2, "open", [LocalTerm((0, 3), np.eye(4))])
    with pytest.raises(ValueError):
        # wrapped support needs a periodic chain
        SpinChainHamiltonian(3, 2, "open", [LocalTerm((2, 0), np.eye(4))])


def test_build_global_matches_kron(rng):
    h = rng.standard_normal((2, 2))
    h = h + h.T
    ham = SpinChainHamiltonian(2, 2, "open", [LocalTerm((0,), h), LocalTerm((1,), h)])
    expected = np.kron(h, PAULI_I) + np.kron(PAULI_I, h)
    assert np.allclose(dense(build_global(ham)), expected)


def test_heisenberg_pair_spectrum():
    w = np.linalg.eigvalsh(heisenberg_pair_term())
    assert np.allclose(w, [-0.75, 0.25, 0.25, 0.25])


def test_heisenberg_chain_frozen_values():
    h = heisenberg_chain(2)
    assert h.label == "heisenberg"
    assert h.k == 2
    w = np.linalg.eigvalsh(dense(build_global(h)))
    assert w[0] == pytest.approx(-0.75, abs=1e-12)
    # periodic 3-site ring has 3 bonds, open has 2
    assert len(heisenberg_chain(3, boundary="periodic").terms) == 3
    assert len(heisenberg_chain(3).terms) == 2


def test_field_chain_spectrum():
    h = field_chain(2, b=0.5)
    assert h.label == "z_field"
    w = np.linalg.eigvalsh(dense(build_global(h)))
    assert np.allclose(w, [-1.0, 0.0, 0.0, 1.0])


def test_apply_hamiltonian_matches_global(rng):
    n = 6
    terms = [LocalTerm((i, i + 1), random_hermitian(4, rng)) for i in range(n - 1)]
    ham = SpinChainHamiltonian(n, 2, "open", terms)
    vec = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
    direct = build_global(ham) @ vec
    assert np.max(np.abs(apply_hamiltonian(ham, vec) - direct)) < 1e-12


def test_translation_moves_first_site_to_back():
    # T|i1 i2 i3> = |i2 i3 i1>, site 0 most significant
    t = translation_operator(3).toarray()
    for bits in ((1, 0, 0), (1, 1, 0), (0, 1, 1)):
        src = bits[0] * 4 + bits[1] * 2 + bits[2]
        dst = bits[1] * 4 + bits[2] * 2 + bits[0]
        e = np.zeros(8)
        e[src] = 1.0
        out = t @ e
        assert out[dst] == 1.0 and np.sum(np.abs(out)) == 1.0


def test_translation_operator_is_unitary_permutation():
    t = translation_operator(4)
    prod = (t @ t.T).toarray()
    assert np.allclose(prod, np.eye(16))
    # n applications come back to the identity
    acc = sp.identity(16, format="csr")
    for _ in range(4):
        acc = t @ acc
    assert np.allclose(acc.toarray(), np.eye(16))


def test_translate_vector_matches_operator(rng):
    n = 5
    vec = rng.standard_normal(2 ** n)
    t = translation_operator(n)
    assert np.allclose(translate_vector(vec, n, steps=1), t @ vec)
    assert np.allclose(translate_vector(vec, n, steps=-1), t.T @ vec)
    assert np.allclose(translate_vector(vec, n, steps=n), vec)


def test_translation_invariance_periodic_chain():
    ham = heisenberg_chain(4, boundary="periodic")
    report = is_translation_invariant(ham)
    assert report.passed and report.residual < 1e-14
    assert report.details["method"] == "sparse"


def test_translation_invariance_requires_periodic():
    with pytest.raises(ValueError):
        is_translation_invariant(heisenberg_chain(4))


def test_translation_invariance_detects_defect():
    # strengthen one bond: residual jumps to the coupling difference
    pair = heisenberg_pair_term()
    terms = [LocalTerm((i, (i + 1) % 4), (2.0 if i == 0 else 1.0) * pair)
             for i in range(4)]
    ham = SpinChainHamiltonian(4, 2, "periodic", terms)
    report = is_translation_invariant(ham)
    assert not report.passed
    assert report.residual > 0.2


def test_translation_invariance_matvec_estimator():
    # above 2^13 the check switches to seeded random vectors
    ham = field_chain(14, boundary="periodic")
    report = is_translation_invariant(ham, samples=4, seed=7)
    assert report.details["method"] == "matvec"
    assert report.details["samples"] == 4
    assert report.passed and report.residual < 1e-12


def test_rotation_invariance_heisenberg_yes_field_no():
    good = is_rotation_invariant(heisenberg_chain(3))
    assert good.passed and good.residual < 1e-14
    bad = is_rotation_invariant(field_chain(3))
    assert not bad.passed
    assert bad.residual == pytest.approx(1.0, abs=1e-12)


def test_rotation_invariance_haar_corroboration():
    report = is_rotation_invariant(heisenberg_chain(3), samples=2, seed=3)
    assert report.details["sampled_conjugation_residual"] < 1e-13


def test_operator_norm():
    assert operator_norm(np.diag([1.0, -3.0, 2.0])) == pytest.approx(3.0)
    assert operator_norm(sp.csr_matrix(np.diag([0.5, -0.25]))) == pytest.approx(0.5)


def test_json_roundtrip_dense(tmp_path, rng):
    terms = [LocalTerm((i, i + 1), random_hermitian(4, rng)) for i in range(3)]
    ham = SpinChainHamiltonian(4, 2, "open", terms, label="pair-chain",
                               metadata={"note": "roundtrip"})
    path = tmp_path / "chain.json"
    save_hamiltonian(ham, path)
    back = load_hamiltonian(path)
    assert back.n_sites == 4 and back.boundary == "open"
    assert back.label == "pair-chain"
    assert back.metadata == {"note": "roundtrip"}
    # exact float preservation through the file
    assert np.array_equal(dense(build_global(back)), dense(build_global(ham)))


def test_json_shared_matrix_uses_reference(tmp_path):
    pair = heisenberg_pair_term()
    ham = SpinChainHamiltonian(
        4, 2, "periodic", [LocalTerm((i, (i + 1) % 4), pair) for i in range(4)])
    doc = hamiltonian_to_json(ham)
    assert "matrix" in doc["terms"][0]
    assert all(t.get("matrix_ref") == 0 for t in doc["terms"][1:])
    back = hamiltonian_from_json(doc)
    assert np.array_equal(dense(build_global(back)), dense(build_global(ham)))


def test_json_large_term_stored_sparse(tmp_path):
    # terms above the dense cap are written in COO triplet form
    diag = sp.diags(np.arange(512, dtype=float)).tocsr()
    ham = SpinChainHamiltonian(9, 2, "open", [LocalTerm(tuple(range(9)), diag)])
    doc = hamiltonian_to_json(ham)
    assert isinstance(doc["terms"][0]["matrix"], dict)
    path = tmp_path / "big.json"
    save_hamiltonian(ham, path)
    back = load_hamiltonian(path)
    assert sp.issparse(back.terms[0].matrix)
    delta = (back.terms[0].matrix - diag).tocoo()
    assert delta.nnz == 0


def test_loader_reports_field_paths():
    doc = hamiltonian_to_json(field_chain(2))
    del doc["terms"][0]["matrix"]
    with pytest.raises(SchemaError, match=r"terms\[0\]"):
        hamiltonian_from_json(doc)
    with pytest.raises(SchemaError, match="boundary"):
        hamiltonian_from_json({"n": 1, "local_dim": 2, "terms": [], "label": ""})


def test_loader_rejects_bad_matrix_ref():
    doc = hamiltonian_to_json(field_chain(2))
    doc["terms"][1] = {"support": [1], "matrix_ref": 5}
    with pytest.raises(SchemaError, match="matrix_ref"):
        hamiltonian_from_json(doc)
