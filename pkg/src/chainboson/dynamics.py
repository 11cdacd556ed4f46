"""
Time integration of the matrix-element equation and state bookkeeping.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .redfield import Generator
from .spin_chain import EigenSystem

log = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-7
TRACE_TOL = 1e-9
HERMITICITY_TOL = 1e-11
MAX_SAMPLES = 10_000


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix with a basis tag ('eigen' or 'computational')."""

    data: np.ndarray
    basis: str = "eigen"

    def __post_init__(self):
        if self.basis not in ("eigen", "computational"):
            raise ValueError(f"unknown basis tag {self.basis!r}")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def check(self, tol: float = 1e-12) -> None:
        m = self.data
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise ValueError("density matrix trace differs from 1")

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex], es: EigenSystem,
                        basis: str = "eigen") -> "DensityMatrix":
        """Pure state from amplitudes given in either basis; stored in the
        eigenbasis."""
        psi = np.asarray(amps, dtype=complex)
        if psi.shape != (es.dim,):
            raise ValueError(f"need {es.dim} amplitudes, got {psi.shape}")
        psi = psi / np.linalg.norm(psi)
        if basis == "computational":
            psi = es.basis.conj().T @ psi
        elif basis != "eigen":
            raise ValueError(f"unknown basis tag {basis!r}")
        return cls(np.outer(psi, psi.conj()), "eigen")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    dt: float = 0.0
    n_steps: int = 0

    @property
    def flagged(self) -> bool:
        return bool(self.flags)

    def element(self, a: int, d: int) -> np.ndarray:
        return self.states[:, a, d]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def rk4_propagator(lm: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step for the linear system ``y' = L y``.

    For a constant matrix the four stages collapse to the degree-4 Taylor
    polynomial of ``exp(dt L)``.
    """
    n = lm.shape[0]
    hl = dt * lm
    step = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for order in range(1, 5):
        term = term @ hl / order
        step = step + term
    return step


def rk4_step(lm: np.ndarray, y: np.ndarray, dt: float) -> np.ndarray:
    """Explicit-stage RK4 step (reference form of :func:`rk4_propagator`)."""
    k1 = lm @ y
    k2 = lm @ (y + 0.5 * dt * k1)
    k3 = lm @ (y + 0.5 * dt * k2)
    k4 = lm @ (y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _state_diagnostics(rho: np.ndarray) -> tuple[float, float, float]:
    trace_drift = abs(np.trace(rho) - 1.0)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    return trace_drift, herm, min_eig


def evolve(gen: Generator, rho0, t_max: float, dt: Optional[float] = None,
           stride: Optional[int] = None,
           positivity_tol: float = POSITIVITY_TOL,
           samples: int = 4000) -> Trajectory:
    """Integrate ``d vec(rho) / dt = L vec(rho)`` with fixed-step RK4.

    Parameters
    ----------
    gen : Generator
    rho0 : array_like or DensityMatrix
        Initial state in the eigenbasis.
    t_max : float
        Final time in ns.  The step is shrunk, if needed, so that an integer
        number of steps lands exactly on ``t_max``.
    dt : float, optional
        Step in ns; defaults to ``1e-3 / ||L||``.
    stride : int, optional
        Store every ``stride``-th step; by default about ``samples`` states
        are kept.

    Raises
    ------
    StabilityError
        If ``dt * ||L|| >= 0.1``.
    """
    rho0 = np.array(rho0, dtype=complex)
    d = gen.dim
    if rho0.shape != (d, d):
        raise ValueError(f"initial state must be {d}x{d}")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    norm = gen.norm()
    if dt is None:
        dt = 1e-3 / norm if norm > 0 else t_max
    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt * norm >= 0.1:
        raise StabilityError(
            f"dt * ||L|| = {dt * norm:.3g} >= 0.1; use dt < {0.1 / norm:.3g} ns")
    n_steps = max(1, math.ceil(t_max / dt - 1e-9))
    dt = t_max / n_steps
    if stride is None:
        stride = max(1, math.ceil(n_steps / samples))
    stride = min(stride, n_steps)
    if n_steps / stride > MAX_SAMPLES:
        log.warning("trajectory will hold %d samples", n_steps // stride + 2)

    step = rk4_propagator(gen.matrix, dt)
    block = np.linalg.matrix_power(step, stride)
    times = [0.0]
    states = [rho0.reshape(-1)]
    done = 0
    y = states[0]
    while done + stride <= n_steps:
        y = block @ y
        done += stride
        times.append(done * dt)
        states.append(y)
    if done < n_steps:
        y = np.linalg.matrix_power(step, n_steps - done) @ y
        times.append(t_max)
        states.append(y)
    times = np.array(times)
    times[-1] = t_max
    states = np.array(states).reshape(-1, d, d)

    diag = np.array([_state_diagnostics(s) for s in states])
    diagnostics = {
        "trace_drift": diag[:, 0],
        "hermiticity_drift": diag[:, 1],
        "min_eigenvalue": diag[:, 2],
        "max_trace_drift": float(diag[:, 0].max()),
        "max_hermiticity_drift": float(diag[:, 1].max()),
        "min_min_eigenvalue": float(diag[:, 2].min()),
    }
    flags = []
    if diagnostics["max_trace_drift"] > TRACE_TOL:
        flags.append("trace drift")
    if diagnostics["max_hermiticity_drift"] > HERMITICITY_TOL:
        flags.append("hermiticity drift")
    if diagnostics["min_min_eigenvalue"] < -positivity_tol:
        flags.append("positivity excursion")
    for f in flags:
        log.warning("trajectory flagged: %s", f)
    return Trajectory(times, states, diagnostics, flags, dt, n_steps)


def exact_state(gen: Generator, rho0, t: float) -> np.ndarray:
    """``exp(L t) vec(rho0)`` by dense matrix exponential."""
    d = gen.dim
    v = np.asarray(rho0, dtype=complex).reshape(d * d)
    return (linalg.expm(gen.matrix * t) @ v).reshape(d, d)


def gibbs_state(es: EigenSystem, temperature: float) -> DensityMatrix:
    """Thermal state ``exp(-H / k_B T) / Z`` in the eigenbasis.

    ``temperature`` is k_B T / h in GHz; ``inf`` gives the maximally mixed
    state.
    """
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    if np.isinf(temperature):
        p = np.full(es.dim, 1.0 / es.dim)
    else:
        beta_e = es.energies / (2.0 * np.pi * temperature)
        w = np.exp(-(beta_e - beta_e.min()))
        p = w / w.sum()
    return DensityMatrix(np.diag(p).astype(complex), "eigen")


def _require_eigen(rho):
    if isinstance(rho, DensityMatrix) and rho.basis != "eigen":
        raise ValueError("expected an eigenbasis state")
    return np.asarray(rho)


def populations(rho) -> np.ndarray:
    return np.real(np.diag(_require_eigen(rho))).copy()


def coherences(rho, tol: float = 1e-12) -> list[tuple[int, int, complex]]:
    """Strict upper-triangle elements ``(a, d, rho[a, d])``, 0-based."""
    m = _require_eigen(rho)
    p = np.real(np.diag(m))
    out = []
    for a in range(m.shape[0]):
        for d in range(a + 1, m.shape[0]):
            c = complex(m[a, d])
            if abs(c) ** 2 > p[a] * p[d] + tol:
                log.warning("coherence (%d,%d) exceeds Cauchy-Schwarz bound",
                            a, d)
            out.append((a, d, c))
    return out


def to_schrodinger(rho_tilde: np.ndarray, es: EigenSystem,
                   t: float) -> np.ndarray:
    """Restore the free phases ``exp(-i (E_a - E_d) t)``."""
    e = es.energies
    return np.asarray(rho_tilde) * np.exp(-1j * (e[:, None] - e[None, :]) * t)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = np.asarray(a) - np.asarray(b)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
