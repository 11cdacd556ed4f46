import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from chainboson import dynamics as dyn
from chainboson import entanglement as ent
from chainboson import redfield as rf
from chainboson.spin_chain import ChainSpec, eigensystem
from conftest import large_bath, random_density

SY = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SY, SY)


def ket(*amps):
    v = np.asarray(amps, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def concurrence_oracle(rho):
    """Non-Hermitian route: square roots of eig(rho rho~)."""
    lam = np.linalg.eigvals(rho @ YY @ rho.conj() @ YY)
    lam = np.sort(np.sqrt(np.clip(lam.real, 0, None)))[::-1]
    return max(0.0, lam[0] - lam[1:].sum())


def test_anchor_states():
    assert ent.concurrence(ket(0, 1, -1, 0)) == pytest.approx(1.0, abs=1e-12)
    assert ent.entanglement_of_formation(ket(0, 1, -1, 0)) == \
        pytest.approx(1.0, abs=1e-12)
    assert ent.concurrence(ket(1, 0, 0, 0)) == 0.0
    assert ent.entanglement_of_formation(ket(1, 0, 0, 0)) == 0.0
    mix = np.diag([0.5, 0, 0, 0.5]).astype(complex)
    assert ent.entanglement_of_formation(mix) == pytest.approx(0.0, abs=1e-12)
    assert ent.entanglement_of_formation(ket(1, 0, 0, 1)) == \
        pytest.approx(1.0, abs=1e-12)


def test_eof_formula_value():
    with mpmath.workdps(30):
        p = (1 + mpmath.sqrt(mpmath.mpf("0.75"))) / 2
        ref = float(-p * mpmath.log(p, 2) - (1 - p) * mpmath.log(1 - p, 2))
    assert ent.eof_from_concurrence(0.5) == pytest.approx(ref, rel=1e-14)
    assert ref == pytest.approx(0.3546, abs=1e-4)
    assert ent.eof_from_concurrence(0.0) == 0.0
    assert ent.eof_from_concurrence(1.0) == 1.0
    assert_allclose(ent.eof_from_concurrence(np.array([0.0, 0.5, 1.0])),
                    [0.0, ref, 1.0], rtol=1e-14)


def test_binary_entropy():
    assert ent.binary_entropy(0.5) == 1.0
    assert ent.binary_entropy(0.0) == 0.0
    assert ent.binary_entropy(1.0) == 0.0


def test_random_states_against_oracle_and_ranges(rng):
    rhos = np.array([random_density(rng, 4) for _ in range(10_000)])
    # skew a third of them toward purity so the entangled branch is exercised
    for i in range(0, len(rhos), 3):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        rhos[i] = 0.9 * np.outer(v, v.conj()) / np.vdot(v, v).real + 0.1 * rhos[i]
    c = ent.concurrences(rhos)
    e = ent.eof_from_concurrence(c)
    assert c.min() >= 0 and c.max() <= 1 and e.min() >= 0 and e.max() <= 1
    order = np.argsort(c)
    assert np.all(np.diff(e[order]) >= -1e-15)
    for rho, ci in zip(rhos[:500], c[:500]):
        assert ci == pytest.approx(concurrence_oracle(rho), abs=1e-9)


def test_local_unitary_invariance(rng):
    for seed in range(50):
        rho = random_density(rng, 4)
        if seed % 2:
            v = rng.normal(size=4) + 1j * rng.normal(size=4)
            rho = np.outer(v, v.conj()) / np.vdot(v, v).real
        u = np.kron(unitary_group.rvs(2, random_state=seed),
                    unitary_group.rvs(2, random_state=seed + 1000))
        assert ent.concurrence(u @ rho @ u.conj().T) == pytest.approx(
            ent.concurrence(rho), abs=1e-10)


def test_dimension_check():
    with pytest.raises(ValueError):
        ent.concurrence(np.eye(2) / 2)
    with pytest.raises(ValueError):
        ent.concurrences(np.eye(8) / 8)


@pytest.fixture
def fig4():
    es = eigensystem(ChainSpec.from_ghz(2, 1.0, 0.5))
    gen, _ = rf.chain_generator(es, large_bath(0.1))
    rho0 = dyn.DensityMatrix.from_amplitudes([0, 1, 0, 0], es, "computational")
    return es, gen, rho0.data


def test_eof_bounds_fig4_initial(fig4):
    es, _, rho0 = fig4
    s = ent.eof_bounds(rho0, es, (1, 2))
    assert s.upper == pytest.approx(1.0, abs=1e-9)
    assert s.lower == pytest.approx(0.0, abs=1e-9)
    assert s.eof == pytest.approx(0.0, abs=1e-12)


def test_eof_bounds_zero_coherence(es2):
    rho = np.diag([0.2, 0.5, 0.2, 0.1]).astype(complex)
    s = ent.eof_bounds(rho, es2, (1, 2))
    assert s.upper == s.lower == s.eof == s.moving_avg


def test_eof_bounds_along_fig4_trajectory(fig4):
    es, gen, rho0 = fig4
    traj = dyn.evolve(gen, rho0, 1.5e6, samples=60)
    for t, rho_t in zip(traj.times, traj.states):
        rho = dyn.to_schrodinger(rho_t, es, t)
        s = ent.eof_bounds(rho, es, (1, 2), time=t)
        assert s.lower - 1e-12 <= s.eof <= s.upper + 1e-12
        assert 0 <= s.lower <= s.moving_avg <= s.upper <= 1
        dephased = rho.copy()
        dephased[1, 2] = dephased[2, 1] = 0
        assert s.lower == pytest.approx(
            ent.entanglement_of_formation(es.basis @ dephased
                                          @ es.basis.conj().T), abs=1e-9)


def test_batch_bounds_agree_with_single(fig4, rng):
    es, gen, rho0 = fig4
    traj = dyn.evolve(gen, rho0, 5e5, samples=20)
    states = np.array([dyn.to_schrodinger(s, es, t)
                       for t, s in zip(traj.times, traj.states)])
    eof, up, lo, avg = ent.eof_bounds_batch(states, es, (1, 2))
    for i, rho in enumerate(states):
        s = ent.eof_bounds(rho, es, (1, 2))
        assert eof[i] == pytest.approx(s.eof, abs=1e-12)
        assert up[i] == pytest.approx(s.upper, abs=1e-8)
        assert lo[i] == pytest.approx(s.lower, abs=1e-8)
        assert avg[i] == pytest.approx(s.moving_avg, abs=1e-12)


def test_fit_decay_synthetic():
    t = np.linspace(0, 10, 50)
    assert ent.fit_decay(t, 0.3 * np.exp(-0.7 * t)) == pytest.approx(
        0.7, rel=1e-9)
    assert ent.fit_decay(t, np.exp(-0.7 * t) * np.exp(1j * t),
                         window=(2, 5)) == pytest.approx(0.7, rel=1e-9)
    with pytest.raises(ValueError):
        ent.fit_decay(t[:5], np.exp(-t[:5]))
    with pytest.raises(ValueError):
        ent.fit_decay(t, np.full(50, 1e-12))


def test_fit_decay_fig3_matches_closed_form(es2):
    gen, _ = rf.chain_generator(es2, large_bath())
    rho0 = dyn.DensityMatrix.from_amplitudes([1, 0, 0, 1], es2,
                                             "computational").data
    g14 = rf.decoherence_rate(gen, 0, 3)
    traj = dyn.evolve(gen, rho0, 3.0 / g14, samples=200)
    fitted = ent.fit_decay(traj.times, traj.element(0, 3))
    assert fitted == pytest.approx(g14, rel=0.01)


def test_moving_average():
    v = np.arange(10.0)
    assert_allclose(ent.moving_average(v, 1), v)
    out = ent.moving_average(v, 4)
    assert out[5] == pytest.approx(np.mean(v[3:7]))
    assert len(out) == len(v)
