"""
Transition rates and the interaction-picture matrix-element generator.

Vectorisation is row-major: ``rho[a, d]`` sits at index ``a * D + d`` and
``Generator.matrix[(a, d), (b, c)]`` is the coefficient of ``rho[b, c]`` in
``d rho[a, d] / dt``.  Renormalization and anomalous diffusion are zero.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from . import phonon_bath as pb
from .phonon_bath import BathSpec, IntermediateRegime
from .spin_chain import (EigenSystem, TransitionNetwork, cluster_values,
                         clustered_frequencies,
                         interaction_operators_eigen, network_from_weights)

COUPLING_MODES = ("auto", "independent", "collective")
FREQ_TOL = 1e-6  # rad/ns


class DegenerateNullSpace(RuntimeError):
    def __init__(self, dimension):
        self.dimension = dimension
        super().__init__(
            f"stationary subspace has dimension {dimension}; supply an "
            f"initial state to select the stationary state")


@dataclass(frozen=True)
class RateTable:
    """``rates[j, k, a, b]`` is Gamma_jk^{ab} in 1/ns (0-based indices).

    ``omega[a, b] = E_b - E_a`` after clustering.  ``regimes`` maps
    ``(j, k, |w|)`` (1-based sites) to the coupling regime used.
    """

    rates: np.ndarray
    omega: np.ndarray
    regimes: dict = field(default_factory=dict)
    coupling_mode: str = "auto"


def _pair_rate(g: float, omega: float, temperature: float) -> float:
    # pi g (N + 1) downhill, pi g N uphill; equals (pi/2) g (1 + coth)
    # with g continued as an odd function of omega.
    if omega == 0.0 or g == 0.0:
        return 0.0
    n = pb.thermal_occupation(temperature, abs(omega))
    return np.pi * g * (n + 1.0 if omega > 0 else n)


def transition_rates(es: EigenSystem, bath: BathSpec,
                     coupling_mode: str = "auto",
                     freq_tol: float = FREQ_TOL,
                     ops: Optional[np.ndarray] = None) -> RateTable:
    """Gamma_jk^{ab} = (pi/2) g_jk(w_ab) (1 + coth(hbar w_ab / 2 k_B T)).

    Only frequencies reached by some nonzero ``X_j`` element are classified,
    so an intermediate-regime frequency that no transition uses is harmless.

    Raises
    ------
    IntermediateRegime
        In ``auto`` mode, for a used frequency with w * tau_jk ~ 1.
    """
    if coupling_mode not in COUPLING_MODES:
        raise ValueError(f"coupling_mode must be one of {COUPLING_MODES}")
    x = interaction_operators_eigen(es) if ops is None else np.asarray(ops)
    n_sites, dim = x.shape[0], x.shape[1]
    w = clustered_frequencies(es, freq_tol)
    used = np.any(np.abs(x) > 1e-12, axis=0)
    rates = np.zeros((n_sites, n_sites, dim, dim))
    regimes = {}
    for j in range(n_sites):
        for k in range(j, n_sites):
            cache = {}
            for a in range(dim):
                for b in range(dim):
                    if not used[a, b]:
                        continue
                    omega = float(w[a, b])
                    key = abs(omega)
                    if key not in cache:
                        try:
                            g = pb.pair_density(bath, key, j + 1, k + 1,
                                                coupling_mode)
                        except IntermediateRegime as exc:
                            raise IntermediateRegime(exc.omega_tau, key,
                                                     (j + 1, k + 1)) from None
                        cache[key] = g
                        if j == k:
                            regimes[(j + 1, k + 1, key)] = "self"
                        elif coupling_mode == "auto":
                            regimes[(j + 1, k + 1, key)] = pb.coupling_regime(
                                bath, key, j + 1, k + 1)
                        else:
                            regimes[(j + 1, k + 1, key)] = coupling_mode
                    rates[j, k, a, b] = _pair_rate(cache[key], omega,
                                                   bath.temperature)
            rates[k, j] = rates[j, k]
    return RateTable(rates, w, regimes, coupling_mode)


@dataclass(frozen=True)
class ResonanceClasses:
    """Secular bookkeeping.

    ``mask[(a, d), (b, c)]`` is True when the coupling from rho[b, c] to
    rho[a, d] is non-oscillating in the interaction picture, i.e.
    ``|(E_a - E_d) - (E_b - E_c)| < freq_tol``.  ``classes`` groups ordered
    pairs (a, d) by their Bohr frequency ``E_a - E_d``.
    """

    mask: np.ndarray
    classes: dict
    freq_tol: float

    def resonant(self, pair1, pair2) -> bool:
        d = int(round(np.sqrt(self.mask.shape[0])))
        (a, dd), (b, c) = pair1, pair2
        return bool(self.mask[a * d + dd, b * d + c])


def secular_filter(es: EigenSystem, freq_tol: float = FREQ_TOL
                   ) -> ResonanceClasses:
    if freq_tol <= 0:
        raise ValueError("freq_tol must be positive")
    e = es.energies
    bohr = cluster_values(e[:, None] - e[None, :], freq_tol)
    flat = bohr.ravel()
    mask = np.abs(flat[:, None] - flat[None, :]) < freq_tol
    classes = {}
    d = es.dim
    for idx, f in enumerate(flat):
        classes.setdefault(float(f), []).append((idx // d, idx % d))
    return ResonanceClasses(mask, classes, freq_tol)


@dataclass(frozen=True)
class Generator:
    """Linear map on row-major vectorised eigenbasis density matrices."""

    matrix: np.ndarray
    mask: Optional[np.ndarray]
    energies: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.energies)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        return (self.matrix @ np.asarray(rho).reshape(d * d)).reshape(d, d)

    def population_block(self) -> np.ndarray:
        d = self.dim
        idx = np.arange(d) * (d + 1)
        return self.matrix[np.ix_(idx, idx)]

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


def _four_sums(x: np.ndarray, rates: np.ndarray) -> np.ndarray:
    """Full (unfiltered) matrix of the four-sum matrix-element equation."""
    n, d = x.shape[0], x.shape[1]
    eye = np.eye(d)
    total = np.zeros((d * d, d * d), dtype=complex)
    for j in range(n):
        for k in range(n):
            g = rates[j, k]
            y = g * x[k]            # Y[a, b] = Gamma^{ab} X_k[a, b]
            z = g.T * x[k]          # Z[a, b] = Gamma^{ba} X_k[a, b]
            decay_left = x[j] @ y   # sum_b X_j[a,b] X_k[b,a'] Gamma^{b a'}
            decay_right = z @ x[j]  # sum_b X_k[d',b] Gamma^{b d'} X_j[b,d]
            total -= np.kron(decay_left, eye)
            total -= np.kron(eye, decay_right.T)
            total += np.kron(x[j], z.T)
            total += np.kron(y, x[j].T)
    return total


def build_generator(es: EigenSystem, rates: RateTable,
                    resonance: Optional[ResonanceClasses] = None,
                    ops: Optional[np.ndarray] = None) -> Generator:
    """Assemble the damping + diffusion generator.

    With ``resonance=None`` no secular filtering is applied; the result is
    then the (time-independent) Schrodinger-picture dissipator.
    """
    x = interaction_operators_eigen(es) if ops is None else np.asarray(ops)
    if x.shape[1:] != (es.dim, es.dim) or rates.rates.shape[2:] != x.shape[1:]:
        raise ValueError("dimension mismatch between operators and rates")
    full = _four_sums(x, rates.rates)
    if resonance is None:
        return Generator(full, None, es.energies)
    if resonance.mask.shape != full.shape:
        raise ValueError("resonance mask has the wrong dimension")
    return Generator(np.where(resonance.mask, full, 0.0), resonance.mask,
                     es.energies)


def chain_generator(es: EigenSystem, bath: BathSpec,
                    coupling_mode: str = "auto",
                    freq_tol: float = FREQ_TOL) -> tuple[Generator, RateTable]:
    rates = transition_rates(es, bath, coupling_mode, freq_tol)
    gen = build_generator(es, rates, secular_filter(es, freq_tol))
    return gen, rates


def decoherence_rate(gen: Generator, a: int, d: int) -> float:
    """Self-decay rate of rho[a, d] (0-based), read off the diagonal."""
    if a == d:
        raise ValueError("decoherence rate needs a != d")
    dim = gen.dim
    return float(-np.real(gen.matrix[a * dim + d, a * dim + d]))


def closed_form_decoherence_rate(x: np.ndarray, rates: np.ndarray,
                                 a: int, d: int) -> float:
    """sum_jk (sum_b X_j[a,b] X_k[b,a] G^{ba} + sum_b X_k[d,b] X_j[b,d] G^{bd})."""
    out = 0.0
    n = x.shape[0]
    for j in range(n):
        for k in range(n):
            out += np.sum(x[j][a, :] * x[k][:, a] * rates[j, k][:, a])
            out += np.sum(x[k][d, :] * x[j][:, d] * rates[j, k][:, d])
    return float(np.real(out))


def relaxation_rates(gen: Generator) -> np.ndarray:
    """Classical rate matrix M with dp/dt = M p over populations."""
    return np.real(gen.population_block())


def transfer_rate(x: np.ndarray, rates: np.ndarray, to: int, frm: int) -> float:
    """Population transfer rate ``2 sum_jk X_j[to,frm] X_k[frm,to] G^{to,frm}``."""
    n = x.shape[0]
    total = sum(x[j][to, frm] * x[k][frm, to] * rates[j, k][to, frm]
                for j in range(n) for k in range(n))
    return float(2.0 * np.real(total))


def rate_network(gen: Generator, threshold: float = 0.0) -> TransitionNetwork:
    """Network of nonzero population transfer rates."""
    m = relaxation_rates(gen).copy()
    np.fill_diagonal(m, 0.0)
    return network_from_weights(m, threshold)


def _null_space(a: np.ndarray, rtol: float) -> np.ndarray:
    u, s, vh = linalg.svd(a)
    scale = max(s[0], 1e-300)
    rank = int(np.sum(s > rtol * scale))
    return vh[rank:].conj().T


def stationary_state(gen: Generator, rho0: Optional[np.ndarray] = None,
                     rtol: float = 1e-10) -> np.ndarray:
    """Long-time limit of the generator dynamics.

    With a unique stationary state that state is returned.  Otherwise an
    initial state is required; it is projected onto the stationary subspace
    with the biorthogonal (right/left null-vector) projector, which keeps
    each isolated network's total probability.

    Raises
    ------
    DegenerateNullSpace
        If the stationary subspace is degenerate and ``rho0`` is None.
    """
    d = gen.dim
    lm = gen.matrix
    if not np.any(lm):
        if rho0 is None:
            raise DegenerateNullSpace(d * d)
        return np.array(rho0, dtype=complex)
    right = _null_space(lm, rtol)
    k = right.shape[1]
    if k == 0:
        raise RuntimeError("generator has no stationary state")
    if k == 1 and rho0 is None:
        rho = right[:, 0].reshape(d, d)
        rho = rho / np.trace(rho)
        return 0.5 * (rho + rho.conj().T)
    if rho0 is None:
        raise DegenerateNullSpace(k)
    left = _null_space(lm.conj().T, rtol)
    if left.shape[1] != k:
        raise RuntimeError("left and right stationary spaces differ in size")
    proj = right @ np.linalg.solve(left.conj().T @ right, left.conj().T)
    rho = (proj @ np.asarray(rho0, dtype=complex).reshape(d * d)).reshape(d, d)
    return 0.5 * (rho + rho.conj().T)


def single_squid_decoherence_rate(bath: BathSpec, splitting_ghz: float) -> float:
    """Decoherence rate (1/ns) of one isolated SQUID with 2B/h given in GHz.

    Its only coherence decays at the sum of the down and up rates since
    ``|<0|sigma^z|1>| = 1``.
    """
    omega = pb.TWO_PI * splitting_ghz
    g = pb.effective_spectral_density(bath, omega).value
    return _pair_rate(g, omega, bath.temperature) \
        + _pair_rate(g, -omega, bath.temperature)
