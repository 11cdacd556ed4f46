"""
Two-qubit entanglement: Wootters concurrence, entanglement of formation,
phase-scan bounds on oscillating entanglement, and decay-rate fits.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .spin_chain import EigenSystem

_YY = np.array([[0, 0, 0, -1],
                [0, 0, 1, 0],
                [0, 1, 0, 0],
                [-1, 0, 0, 0]], dtype=complex)
N_PHASES = 256
MOVING_WINDOW = 64


def _dagger(m):
    return np.swapaxes(m, -1, -2).conj()


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (rho + _dagger(rho)))
    # eigenvalues at the rounding level are zero; their square roots
    # (~1e-8) would otherwise leak into the concurrence
    floor = 16 * np.finfo(float).eps * np.abs(w).max(axis=-1, keepdims=True)
    w = np.where(w > floor, w, 0.0)
    return (v * np.sqrt(w)[..., None, :]) @ _dagger(v)


def concurrences(rhos) -> np.ndarray:
    """Concurrence of a stack of 4x4 states, shape (..., 4, 4)."""
    rho = np.asarray(rhos, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise ValueError("concurrence needs 4x4 density matrices")
    s = _psd_sqrt(rho)
    # (s YY s*)(s YY s*)^dagger = s rho~ s, so its singular values are the
    # lambdas without a second square root
    lam = np.linalg.svd(s @ _YY @ s.conj(), compute_uv=False)
    c = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    return np.clip(c, 0.0, 1.0)


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state (computational basis).

    The lambdas are the eigenvalues of ``sqrt(sqrt(rho) rho~ sqrt(rho))``,
    with ``rho~ = (Y x Y) rho* (Y x Y)``, obtained as singular values.
    Small negative eigenvalues of ``rho`` (possible for Redfield dynamics)
    are clipped.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("concurrence needs a 4x4 density matrix")
    return float(concurrences(rho))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def eof_from_concurrence(c):
    """``h((1 + sqrt(1 - C^2)) / 2)``; accepts scalars or arrays."""
    c = np.clip(np.asarray(c, dtype=float), 0.0, 1.0)
    p = 0.5 * (1.0 + np.sqrt(1.0 - c * c))   # p >= 1/2
    q = 1.0 - p
    q_safe = np.where(q > 0, q, 1.0)
    h = -p * np.log2(p) - np.where(q > 0, q * np.log2(q_safe), 0.0) + 0.0
    return float(h) if h.ndim == 0 else h


def entanglement_of_formation(rho) -> float:
    return eof_from_concurrence(concurrence(rho))


@dataclass(frozen=True)
class EofSample:
    time: float
    eof: float
    upper: float
    lower: float
    moving_avg: float


def _rephase(rho: np.ndarray, a: int, d: int, theta: float) -> np.ndarray:
    out = rho.copy()
    out[a, d] = rho[a, d] * np.exp(1j * theta)
    out[d, a] = np.conj(out[a, d])
    return out


def eof_bounds(rho_eigen, es: EigenSystem, pair: tuple[int, int],
               time: float = 0.0, n_phases: int = N_PHASES) -> EofSample:
    """Bounds of the entanglement over the phase of one coherence.

    The coherence ``rho[a, d]`` (0-based pair, eigenbasis) is multiplied by
    ``exp(i theta)`` on a uniform grid of ``n_phases`` angles that starts at
    theta = 0, so the unmodified state is always part of the scan.  The
    extremes are polished with a bounded scalar search around the best grid
    points.  ``moving_avg`` is the grid mean.
    """
    rho = np.asarray(rho_eigen, dtype=complex)
    if es.dim != 4:
        raise ValueError("eof bounds need a two-qubit chain")
    a, d = pair
    basis = es.basis

    def eof_at(theta):
        r = _rephase(rho, a, d, theta)
        return entanglement_of_formation(basis @ r @ basis.conj().T)

    thetas = 2.0 * np.pi * np.arange(n_phases) / n_phases
    stack = np.repeat(rho[None], n_phases, axis=0)
    stack[:, a, d] = rho[a, d] * np.exp(1j * thetas)
    stack[:, d, a] = np.conj(stack[:, a, d])
    values = eof_from_concurrence(
        concurrences(basis @ stack @ basis.conj().T))
    eof0 = values[0]
    if abs(rho[a, d]) == 0.0:
        return EofSample(time, eof0, eof0, eof0, eof0)
    step = thetas[1] - thetas[0]

    def polish(idx, sign):
        res = minimize_scalar(lambda t: sign * eof_at(t),
                              bounds=(thetas[idx] - step, thetas[idx] + step),
                              method="bounded",
                              options={"xatol": 1e-12})
        return sign * res.fun

    upper = max(values.max(), polish(int(np.argmax(values)), -1.0))
    lower = min(values.min(), polish(int(np.argmin(values)), 1.0))
    return EofSample(time, eof0, upper, lower, float(values.mean()))


def _phase_eof(rho, basis, a, d, thetas):
    # rho (M, 4, 4), thetas (M, K) -> EoF (M, K)
    m, k = thetas.shape
    stack = np.repeat(rho[:, None], k, axis=1)
    stack[:, :, a, d] = rho[:, None, a, d] * np.exp(1j * thetas)
    stack[:, :, d, a] = np.conj(stack[:, :, a, d])
    return eof_from_concurrence(concurrences(basis @ stack @ basis.conj().T))


def eof_bounds_batch(rhos_eigen, es: EigenSystem, pair: tuple[int, int],
                     n_phases: int = N_PHASES, xtol: float = 1e-8
                     ) -> tuple[np.ndarray, ...]:
    """Vectorised :func:`eof_bounds` over a stack of eigenbasis states.

    The grid is refined by a batched golden-section search down to a phase
    bracket of ``xtol``.  Returns ``(eof, upper, lower, grid_mean)``.
    """
    rho = np.asarray(rhos_eigen, dtype=complex)
    if rho.ndim == 2:
        rho = rho[None]
    if es.dim != 4:
        raise ValueError("eof bounds need a two-qubit chain")
    a, d = pair
    basis = es.basis
    m = rho.shape[0]
    grid = 2.0 * np.pi * np.arange(n_phases) / n_phases
    values = _phase_eof(rho, basis, a, d, np.broadcast_to(grid, (m, n_phases)))
    eof = values[:, 0].copy()
    upper = values.max(axis=1)
    lower = values.min(axis=1)
    live = np.abs(rho[:, a, d]) > 0.0
    step = grid[1] - grid[0]
    gr = 0.5 * (np.sqrt(5.0) - 1.0)
    rows = np.flatnonzero(live)
    for sign, pick, best in ((-1.0, np.argmax, upper), (1.0, np.argmin, lower)):
        if rows.size == 0:
            break
        sub = rho[rows]
        centre = grid[pick(values[rows], axis=1)]
        lo, hi = centre - step, centre + step
        x1, x2 = hi - gr * (hi - lo), lo + gr * (hi - lo)

        def f(x):
            return sign * _phase_eof(sub, basis, a, d, x[:, None])[:, 0]

        f1, f2 = f(x1), f(x2)
        while np.max(hi - lo) > xtol:
            left = f1 < f2
            hi = np.where(left, x2, hi)
            lo = np.where(left, lo, x1)
            xn = np.where(left, hi - gr * (hi - lo), lo + gr * (hi - lo))
            fn = f(xn)
            x1, x2 = np.where(left, xn, x2), np.where(left, x1, xn)
            f1, f2 = np.where(left, fn, f2), np.where(left, f1, fn)
        polished = sign * np.minimum(f1, f2)
        if sign < 0:
            best[rows] = np.maximum(best[rows], polished)
        else:
            best[rows] = np.minimum(best[rows], polished)
    return eof, upper, lower, values.mean(axis=1)


def moving_average(values, window: int = MOVING_WINDOW) -> np.ndarray:
    """Centered running mean with shrinking windows at the ends."""
    v = np.asarray(values, dtype=float)
    if window <= 1 or len(v) == 0:
        return v.copy()
    c = np.concatenate([[0.0], np.cumsum(v)])
    half = window // 2
    idx = np.arange(len(v))
    lo = np.clip(idx - half, 0, len(v))
    hi = np.clip(idx - half + window, 0, len(v))
    return (c[hi] - c[lo]) / (hi - lo)


def fit_decay(times, values, window: Optional[tuple[float, float]] = None,
              floor: float = 1e-9) -> float:
    """Exponential decay rate (1/ns) from a least-squares fit of
    ``log|values|`` against time.

    ``window`` restricts the fit to ``t0 <= t <= t1``; by default the whole
    series is used.  Samples with magnitude at or below ``floor`` are
    dropped.

    Raises
    ------
    ValueError
        Fewer than 10 usable samples.
    """
    t = np.asarray(times, dtype=float)
    y = np.abs(np.asarray(values))
    keep = y > floor
    if window is not None:
        keep &= (t >= window[0]) & (t <= window[1])
    if keep.sum() < 10:
        raise ValueError(f"only {int(keep.sum())} usable samples; need 10")
    slope, _ = np.polyfit(t[keep], np.log(y[keep]), 1)
    return float(-slope)
