"""
Phonon-bath spectral densities and Markov coefficients.

All densities here are *effective rate densities*
``g_jk(w) = (lambda^2 / hbar^2) J_jk(w)`` in 1/ns, with ``w`` in rad/ns.
The crystal volume cancels between ``lambda^2`` and ``J_jk`` so it never
appears.  Only the transverse in-plane phonon branch couples to the rings.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import constants, integrate, special

from .hypergeometric import hyp1f2

HBAR = constants.hbar
ELECTRON_MASS = constants.m_e
ELECTRON_CHARGE = constants.e
TWO_PI = 2.0 * np.pi

# w * tau_jk below COLLECTIVE_CUT counts as collective, above
# INDEPENDENT_CUT as independent; anything between is rejected.
COLLECTIVE_CUT = 0.5
INDEPENDENT_CUT = 10.0

# beyond this w * tau_R the series is abandoned for the angular quadrature
SERIES_LIMIT = 30.0


class IntermediateRegime(ValueError):
    """Cross-term spectral density requested where w * tau_jk ~ 1."""

    def __init__(self, omega_tau, omega=None, sites=None):
        self.omega_tau = omega_tau
        self.omega = omega
        self.sites = sites
        msg = (f"w*tau_jk = {omega_tau:.4g} lies between the collective and "
               f"independent regimes")
        if omega is not None:
            msg += f" (w = {omega:.6g} rad/ns"
            msg += f", sites {sites})" if sites else ")"
        msg += "; retune J and B closer to or farther from a level crossing"
        super().__init__(msg)


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class BathSpec:
    """Crystal, ring and temperature parameters (SI except temperature).

    ``temperature`` is k_B T / h in GHz.  ``spacing`` defaults to 4R.
    ``cutoff`` (rad/ns) and ``longitudinal_speed`` are carried for
    completeness; the damping and diffusion constants do not use them.
    """

    temperature: float
    ring_radius: float
    current: float
    mass_density: float = 5.0e3
    sound_speed: float = 5.0e3
    spacing: Optional[float] = None
    electron_mass: float = ELECTRON_MASS
    electron_charge: float = ELECTRON_CHARGE
    cutoff: Optional[float] = None
    longitudinal_speed: Optional[float] = None
    collective_cut: float = COLLECTIVE_CUT
    independent_cut: float = INDEPENDENT_CUT

    def __post_init__(self):
        for name in ("temperature", "ring_radius", "mass_density",
                     "sound_speed", "electron_mass", "electron_charge"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.current < 0:
            raise ValueError("current must be non-negative")
        if self.spacing is not None and not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if self.cutoff is not None and not self.cutoff > 0:
            raise ValueError("cutoff must be positive")
        if not 0 < self.collective_cut < self.independent_cut:
            raise ValueError("need 0 < collective_cut < independent_cut")

    @property
    def site_spacing(self) -> float:
        return 4.0 * self.ring_radius if self.spacing is None else self.spacing

    @property
    def tau_r(self) -> float:
        """Ring radius over sound speed, in ns."""
        return self.ring_radius / self.sound_speed * 1e9

    def tau(self, j: int, k: int) -> float:
        """Phonon transit time between sites j and k, in ns."""
        return self.site_spacing * abs(j - k) / self.sound_speed * 1e9

    @property
    def kt(self) -> float:
        """k_B T / hbar in rad/ns."""
        return TWO_PI * self.temperature

    @property
    def rate_prefactor(self) -> float:
        """Coefficient of w^5 in the small-ring density, 1/ns per (rad/ns)^5.

        ``m_e^2 I^2 R^4 / (6 hbar e^2 rho c^5)`` in SI, rescaled so that
        ``g = prefactor * w^5`` has w in rad/ns and g in 1/ns.
        """
        si = (self.electron_mass ** 2 * self.current ** 2
              * self.ring_radius ** 4
              / (6.0 * HBAR * self.electron_charge ** 2 * self.mass_density
                 * self.sound_speed ** 5))
        return si * 1e9 ** 5 / 1e9


@dataclass(frozen=True)
class SpectralValue:
    omega: float
    value: float
    method: str = "series"
    regime: str = "self"


def theta_oracle(omega_tau_r: float, omega_tau_jk: float = 0.0,
                 atol: float = 1e-10) -> float:
    """Angular integral over the polar angle of
    ``sin(t) J1(x sin t)^2 * 2 pi J0(y sin t)`` with x = w tau_R and
    y = w tau_jk.
    """
    x, y = float(omega_tau_r), float(omega_tau_jk)
    if x < 0 or y < 0:
        raise ValueError("arguments must be non-negative")
    if x == 0.0:
        return 0.0

    def integrand(t):
        s = np.sin(t)
        return s * special.j1(x * s) ** 2 * TWO_PI * special.j0(y * s)

    # integrand is symmetric about pi/2
    limit = 200 + int(4 * (x + y))
    val, err = integrate.quad(integrand, 0.0, np.pi / 2, epsabs=0.0,
                              epsrel=1e-12, limit=limit)
    val, err = 2.0 * val, 2.0 * err
    if err > atol and err > 1e-9 * abs(val):
        raise QuadratureError(f"theta quadrature reached only {err:.3e}")
    return val


def cross_theta_small_ring(omega_tau_r: float, omega_tau_jk: float) -> float:
    """Closed form of the angular integral when ``J1(u) ~ u / 2``."""
    x, y = float(omega_tau_r), float(omega_tau_jk)
    base = x * x / 4.0
    if y < 1e-3:
        # series of 4 pi (y cos y - (1 - y^2) sin y) / y^3
        return base * 4.0 * np.pi * (2.0 / 3.0 - y ** 2 / 15.0
                                     + y ** 4 / 420.0)
    num = y * np.cos(y) - (1.0 - y * y) * np.sin(y)
    return base * 4.0 * np.pi * num / y ** 3


def _density_by_quadrature(bath: BathSpec, omega: float) -> float:
    # g = prefactor * w^5 * 1F2(...) and theta = (2 pi / 3) x^2 1F2(...)
    x = omega * bath.tau_r
    f = theta_oracle(x) / ((2.0 * np.pi / 3.0) * x * x)
    return bath.rate_prefactor * omega ** 5 * f


@lru_cache(maxsize=4096)
def _density_cached(bath: BathSpec, omega: float) -> SpectralValue:
    if omega == 0.0:
        return SpectralValue(0.0, 0.0, "exact")
    x = omega * bath.tau_r
    if x > SERIES_LIMIT:
        return SpectralValue(omega, _density_by_quadrature(bath, omega),
                             "quadrature")
    f = hyp1f2(1.5, 2.5, 3.0, -x * x)
    return SpectralValue(omega, bath.rate_prefactor * omega ** 5 * f, "series")


def effective_spectral_density(bath: BathSpec, omega: float) -> SpectralValue:
    """Single-ring density ``g(w) = K w^5 1F2(3/2; 5/2, 3; -(w tau_R)^2)``.

    Falls back to the angular quadrature (``method='quadrature'``) when
    ``w tau_R`` exceeds :data:`SERIES_LIMIT`.
    """
    omega = float(omega)
    if omega < 0:
        raise ValueError("omega must be non-negative")
    return _density_cached(bath, omega)


def oracle_spectral_density(bath: BathSpec, omega: float) -> float:
    """Same density from ``w^3 * Theta(w tau_R)`` (no series involved)."""
    x = omega * bath.tau_r
    scale = bath.rate_prefactor * 3.0 / (2.0 * np.pi * bath.tau_r ** 2)
    return scale * omega ** 3 * theta_oracle(x)


def small_ring_density(bath: BathSpec, omega: float) -> SpectralValue:
    """``w tau_R << 1`` limit, proportional to w^5."""
    if omega < 0:
        raise ValueError("omega must be non-negative")
    return SpectralValue(omega, bath.rate_prefactor * omega ** 5, "small-ring")


def large_ring_density(bath: BathSpec, omega: float) -> SpectralValue:
    """``w tau_R >> 1`` limit: ``m_e^2 I^2 R w^2 / (2 hbar e^2 rho c^2)``."""
    if omega < 0:
        raise ValueError("omega must be non-negative")
    si = (bath.electron_mass ** 2 * bath.current ** 2 * bath.ring_radius
          / (2.0 * HBAR * bath.electron_charge ** 2 * bath.mass_density
             * bath.sound_speed ** 2))
    # (rad/s)^2 -> (rad/ns)^2 and 1/s -> 1/ns
    return SpectralValue(omega, si * 1e18 / 1e9 * omega ** 2, "large-ring")


def coupling_regime(bath: BathSpec, omega: float, j: int, k: int) -> str:
    """'self', 'collective' or 'independent'; raises in between."""
    if j == k:
        return "self"
    wt = abs(omega) * bath.tau(j, k)
    if wt < bath.collective_cut:
        return "collective"
    if wt > bath.independent_cut:
        return "independent"
    raise IntermediateRegime(wt, omega, (j, k))


def cross_spectral_density(bath: BathSpec, omega: float, j: int,
                           k: int) -> SpectralValue:
    """Pair density ``g_jk``: the single-ring value when the pair is
    collective at this frequency, zero when independent."""
    regime = coupling_regime(bath, omega, j, k)
    if regime == "independent":
        return SpectralValue(omega, 0.0, "exact", regime)
    g = effective_spectral_density(bath, abs(omega))
    return SpectralValue(omega, g.value, g.method, regime)


def thermal_occupation(temperature: float, omega):
    """Bose occupation ``1 / (exp(hbar w / k_B T) - 1)``.

    ``temperature`` is k_B T / h in GHz, ``omega`` in rad/ns.
    """
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    x = np.asarray(omega, dtype=float) / (TWO_PI * temperature)
    with np.errstate(divide="ignore", over="ignore"):
        out = 1.0 / np.expm1(x)
    return out if out.ndim else float(out)


def coth_factor(temperature: float, omega):
    """``coth(hbar w / 2 k_B T) = 2 N + 1``."""
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    x = np.asarray(omega, dtype=float) / (2.0 * TWO_PI * temperature)
    with np.errstate(divide="ignore"):
        out = 1.0 / np.tanh(x)
    return out if out.ndim else float(out)


def omega_coth(temperature: float, omega):
    """``w coth(hbar w / 2 k_B T)`` with the w -> 0 limit ``2 k_B T / hbar``."""
    w = np.asarray(omega, dtype=float)
    kt = TWO_PI * temperature
    x = w / (2.0 * kt)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    out = np.where(small, 2.0 * kt * (1.0 + x * x / 3.0),
                   w / np.tanh(safe))
    return out if out.ndim else float(out)


def pair_density(bath: BathSpec, omega: float, j: int, k: int,
                 mode: str = "auto") -> float:
    """g_jk(|w|) under a coupling mode: auto, independent or collective."""
    w = abs(float(omega))
    if j == k or mode == "collective":
        return effective_spectral_density(bath, w).value
    if mode == "independent":
        return 0.0
    if mode != "auto":
        raise ValueError(f"unknown coupling mode {mode!r}")
    return cross_spectral_density(bath, w, j, k).value


def damping_coefficient(bath: BathSpec, omega: float, j: int = 1, k: int = 1,
                        mode: str = "auto") -> float:
    """Markov damping ``(pi/2) g_jk(w)``, odd in w."""
    return float(np.sign(omega)) * 0.5 * np.pi * pair_density(bath, omega, j,
                                                              k, mode)


def diffusion_coefficient(bath: BathSpec, omega: float, j: int = 1,
                          k: int = 1, mode: str = "auto") -> float:
    """Markov diffusion ``(pi/2) g_jk(w) coth(hbar w / 2 k_B T)``, even in w.

    Vanishes at w = 0 since g ~ w^5 beats the 1/w of the coth.
    """
    w = abs(float(omega))
    if w == 0.0:
        return 0.0
    return 0.5 * np.pi * pair_density(bath, w, j, k, mode) \
        * coth_factor(bath.temperature, w)


def markov_timescales(bath: BathSpec, n_sites: int) -> dict:
    """Bath memory times (ns) that the evolution time must exceed."""
    scales = {
        "tau_R": bath.tau_r,
        "tau_jk_max": bath.tau(1, n_sites) if n_sites > 1 else 0.0,
        "thermal": 1.0 / bath.kt,
    }
    if bath.cutoff is not None:
        scales["inverse_cutoff"] = 1.0 / bath.cutoff
    return scales


def markov_validity(bath: BathSpec, n_sites: int, t: float) -> dict:
    """Ratio of ``t`` to each bath memory time; valid when all are >> 1."""
    scales = markov_timescales(bath, n_sites)
    ratios = {name: (t / s if s > 0 else np.inf) for name, s in scales.items()}
    return {"timescales_ns": scales, "ratios": ratios,
            "min_ratio": min(ratios.values()),
            "valid": min(ratios.values()) > 100.0}


def renormalization_coefficient(*args, **kwargs):
    """Renormalization constant r_jk^w.

    Defined by a principal-value integral over ``J_jk(w') e^{-w'/Lambda}``;
    the model absorbs it into a counter-term in the chain Hamiltonian, so it
    is set to zero and intentionally not evaluated.
    """
    raise NotImplementedError("renormalization is absorbed by a counter-term")


def anomalous_diffusion_coefficient(*args, **kwargs):
    """Anomalous-diffusion constant A_jk^w; treated like the renormalization
    and therefore not evaluated."""
    raise NotImplementedError("anomalous diffusion is absorbed by a counter-term")
