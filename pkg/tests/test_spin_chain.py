from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from chainboson.spin_chain import (AlignmentError, ChainSpec, build_hamiltonian,
                                   collective_operator, diagonalize,
                                   eigensystem, frequency_components,
                                   interaction_operator,
                                   interaction_operators_eigen,
                                   reference_vectors, transition_network)

GHZ = 2 * np.pi

# Pauli matrices in the sigma^z eigenbasis; the logical basis is reached by
# the Hadamard rotation, which maps sigma^x to diag(1, -1).
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]])
PZ = np.diag([1.0, -1.0]).astype(complex)
HAD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def oracle_hamiltonian(n, j, b):
    def site(op, s):
        f = [np.eye(2)] * n
        f[s] = op
        return reduce(np.kron, f)
    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for s in range(n):
        t = (s + 1) % n
        if n > 1:
            h += j * sum(site(p, s) @ site(p, t) for p in (PX, PY, PZ))
        h -= b * site(PX, s)
    u = reduce(np.kron, [HAD] * n)
    return u @ h @ u


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_hamiltonian_matches_rotated_pauli_oracle(n):
    spec = ChainSpec(n, 0.37, 1.13)
    # sigma^y picks up a sign under the Hadamard; sigma.sigma is invariant
    assert_allclose(np.asarray(build_hamiltonian(spec)),
                    oracle_hamiltonian(n, 0.37, 1.13), atol=1e-13)


def test_zero_couplings_give_zero_matrix():
    h = np.asarray(build_hamiltonian(ChainSpec(2, 0.0, 0.0)))
    assert not np.any(h)


def test_two_site_spectrum_and_transitions(es2):
    j, b = GHZ / 8, GHZ * 0.75
    assert_allclose(es2.energies, [2 * j - 2 * b, -6 * j, 2 * j, 2 * j + 2 * b],
                    rtol=1e-13)
    w = es2.transition_frequencies()
    x = np.abs(interaction_operators_eigen(es2)).sum(axis=0)
    allowed = np.unique(np.round(np.abs(w[x > 1e-12]) / GHZ, 12))
    assert_allclose(allowed, [0.5, 1.5, 2.5], rtol=1e-12)


def test_two_site_basis_and_m_numbers(es2):
    refs = reference_vectors(2)
    assert_allclose(np.abs(np.sum(es2.basis.conj() * refs, axis=0)), 1.0,
                    atol=1e-13)
    assert list(es2.m_numbers) == [2, 0, 0, -2]


def test_three_site_spectrum_against_dense_oracle(es3):
    h = oracle_hamiltonian(3, GHZ / 6, GHZ * 0.75)
    assert_allclose(np.sort(es3.energies), np.linalg.eigvalsh(h), atol=1e-12)
    # psi_3 ~ |001> + |100> - 2|010>
    psi3 = es3.basis[:, 2]
    expected = np.zeros(8)
    expected[[0b001, 0b100, 0b010]] = [1, 1, -2]
    assert_allclose(psi3, expected / np.sqrt(6), atol=1e-13)
    # degenerate pairs (2,3) and (5,6)
    e = es3.energies
    assert e[1] == pytest.approx(e[2], abs=1e-12)
    assert e[4] == pytest.approx(e[5], abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_eigensystem_invariants(n):
    es = eigensystem(ChainSpec.from_ghz(n, 1.0, 0.8))
    v = es.basis
    assert_allclose(v.conj().T @ v, np.eye(es.dim), atol=1e-12)
    h = es.hamiltonian
    resid = np.linalg.norm(h @ v - v * es.energies, axis=0).max()
    assert resid < 1e-10 * np.linalg.norm(h, 2)
    # energies are l J - m B
    spec = es.spec
    assert_allclose(es.energies,
                    es.l_numbers * spec.heisenberg_j
                    - es.m_numbers * spec.splitting_b, atol=1e-12)


def test_alignment_failure_is_reported():
    spec = ChainSpec.from_ghz(2, 1.0, 1.5)
    h = np.asarray(build_hamiltonian(spec)).copy()
    h[0, 1] = h[1, 0] = 0.3      # breaks the m symmetry
    with pytest.raises(AlignmentError):
        diagonalize(type(build_hamiltonian(spec))(h), spec)


def test_printed_interaction_matrices(es2):
    x = interaction_operators_eigen(es2)
    r = 1 / np.sqrt(2)
    x1 = r * np.array([[0, -1, 1, 0], [-1, 0, 0, 1], [1, 0, 0, 1],
                       [0, 1, 1, 0]])
    x2 = r * np.array([[0, 1, 1, 0], [1, 0, 0, -1], [1, 0, 0, 1],
                       [0, -1, 1, 0]])
    assert_allclose(x[0], x1, atol=1e-12)
    assert_allclose(x[1], x2, atol=1e-12)


def test_single_site_operator_is_off_diagonal():
    x = np.asarray(interaction_operator(ChainSpec(1, 0.0, 1.0), 1))
    assert_allclose(x, [[0, 1], [1, 0]])


def test_interaction_operator_index_range():
    spec = ChainSpec.from_ghz(2, 1.0, 1.5)
    with pytest.raises(IndexError):
        interaction_operator(spec, 3)
    with pytest.raises(IndexError):
        interaction_operator(spec, 0)


def test_collective_operator_protects_singlet(es2):
    jz = np.asarray(es2.to_eigen(collective_operator(es2.spec)))
    assert jz[1, 0] == 0 and jz[1, 3] == 0
    assert jz[2, 0] == pytest.approx(np.sqrt(2), abs=1e-13)


def test_collective_operator_basis_free():
    spec = ChainSpec(2, 0.0, 0.0)
    a = np.asarray(collective_operator(spec))
    b = sum(np.asarray(interaction_operator(spec, j)) for j in (1, 2))
    assert_allclose(a, b)


@settings(max_examples=60, deadline=None)
@given(n=st.sampled_from([2, 3]),
       heis=st.floats(0.05, 3.0), split=st.floats(0.0, 3.0))
def test_selection_rule_property(n, heis, split):
    es = eigensystem(ChainSpec.from_ghz(n, heis, split))
    m = es.m_numbers
    for x in interaction_operators_eigen(es):
        a, b = np.nonzero(np.abs(x) > 1e-12)
        assert np.all(np.abs(m[a] - m[b]) == 2)


def test_frequency_components_split_and_reconstruct(es2):
    x1 = es2.to_eigen(interaction_operator(es2.spec, 1))
    comps = frequency_components(x1, es2)
    nonzero = [c for c in comps if np.any(np.asarray(c.x_part))]
    assert_allclose(sorted(c.omega / GHZ for c in nonzero), [0.5, 1.5, 2.5],
                    rtol=1e-12)
    total = sum(np.asarray(c.x_part) for c in comps)
    assert_allclose(total, np.asarray(x1), atol=1e-13)
    zero = [c for c in comps if c.omega == 0.0][0]
    assert not np.any(np.asarray(zero.x_part))
    e = es2.energies
    for c in comps:
        xp, pp = np.asarray(c.x_part), np.asarray(c.p_part)
        for a, b in zip(*np.nonzero(xp)):
            expected = -1j * xp[a, b] if e[b] > e[a] else 1j * xp[a, b]
            assert pp[a, b] == pytest.approx(expected)


def test_critical_point_zero_frequency_component():
    es = eigensystem(ChainSpec.from_ghz(2, 1.0, 1.0))
    x1 = es.to_eigen(interaction_operator(es.spec, 1))
    zero = [c for c in frequency_components(x1, es) if c.omega == 0.0][0]
    xz = np.asarray(zero.x_part)
    assert abs(xz[0, 1]) == pytest.approx(1 / np.sqrt(2))
    assert not np.any(np.asarray(zero.p_part))


def test_frequency_components_reject_bad_tolerance(es2):
    x1 = es2.to_eigen(interaction_operator(es2.spec, 1))
    with pytest.raises(ValueError):
        frequency_components(x1, es2, freq_tol=0.0)


def test_networks(es2):
    x = list(interaction_operators_eigen(es2))
    ind = transition_network(es2, x)
    assert ind.labels() == [(1, 2, 3, 4)]
    assert ind.edge_labels() == {(1, 2), (1, 3), (2, 4), (3, 4)}
    col = transition_network(es2, [sum(x)])
    assert sorted(col.labels()) == [(1, 3, 4), (2,)]


def test_three_site_collective_network(es3):
    jz = sum(interaction_operators_eigen(es3))
    net = transition_network(es3, [jz])
    assert sorted(net.labels()) == [(1, 4, 7, 8), (2, 5), (3, 6)]


def test_chain_spec_validation():
    with pytest.raises(ValueError):
        ChainSpec(5, 1.0, 1.0)
    with pytest.raises(ValueError):
        ChainSpec(2, -1.0, 1.0)
    with pytest.raises(ValueError):
        ChainSpec(2, 1.0, 1.0, periodic=False)
