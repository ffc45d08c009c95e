"""Spin-spin coupling matrices and what they imply for a single excitation.

The drive couples every pair of spins through the transverse phonons:

    J_ij = hbar dk^2 Omega^2 / (2 M) * sum_m V_im V_jm / (mu^2 - omega_m^2).

The full matrix J includes a site-dependent diagonal J_ii; the
zero-diagonal copy (written j_script here) is what actually moves
excitations around.  -J_ii acts as an emergent single-particle
potential over the chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import hbar
from scipy.special import zeta

from .errors import ResonanceError
from .lattice import (PhononModes, TrapConfig, RESONANCE_RTOL, attach_frequencies,
                      exact_modes)


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric coupling matrix in rad/s.

    j          full matrix including the diagonal
    j_script   copy with the diagonal zeroed (the hopping part)
    j_max      largest off-diagonal magnitude
    alpha_fit  fitted power-law exponent, when one has been attached
    """

    j: np.ndarray
    j_script: np.ndarray
    j_max: float
    alpha_fit: float | None = None

    def __post_init__(self):
        self.j.setflags(write=False)
        self.j_script.setflags(write=False)

    @property
    def n_ions(self) -> int:
        return self.j.shape[0]

    @classmethod
    def from_full(cls, j: np.ndarray, alpha_fit: float | None = None
                  ) -> "CouplingMatrix":
        j = np.array(j, dtype=float)
        if j.ndim != 2 or j.shape[0] != j.shape[1]:
            raise ValueError("coupling matrix must be square")
        if not np.allclose(j, j.T, rtol=1e-12, atol=1e-12 * np.abs(j).max()):
            raise ValueError("coupling matrix must be symmetric")
        script = j.copy()
        np.fill_diagonal(script, 0.0)
        j_max = float(np.abs(script).max())
        if j_max == 0.0:
            raise ValueError("all off-diagonal couplings vanish")
        return cls(j=j, j_script=script, j_max=j_max, alpha_fit=alpha_fit)

    def scaled(self, factor: float) -> "CouplingMatrix":
        """Global rescale J -> factor * J (noise realizations use this)."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return CouplingMatrix(j=self.j * factor, j_script=self.j_script * factor,
                              j_max=self.j_max * factor, alpha_fit=self.alpha_fit)


def power_law_couplings(n: int, j_max: float, alpha: float) -> CouplingMatrix:
    """Idealized J_ij = j_max / |i-j|^alpha with an exactly zero diagonal."""
    if n < 2:
        raise ValueError("need at least 2 ions")
    if j_max <= 0:
        raise ValueError("j_max must be positive")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :]).astype(float)
    np.fill_diagonal(dist, np.inf)
    j = j_max * dist**-alpha
    np.fill_diagonal(j, 0.0)
    return CouplingMatrix.from_full(j, alpha_fit=alpha)


def ion_couplings(cfg: TrapConfig, modes: PhononModes | None = None
                  ) -> CouplingMatrix:
    """Phonon-mediated couplings for a trapped chain, diagonal included."""
    if modes is None:
        modes = exact_modes(cfg)
    if modes.frequencies is None:
        modes = attach_frequencies(modes, cfg)
    freqs = modes.frequencies
    if np.any(np.abs(cfg.mu - freqs) <= RESONANCE_RTOL * freqs):
        raise ResonanceError("mu lies on a transverse mode; detune the drive")
    v = modes.mode_matrix
    weights = 1.0 / (cfg.mu**2 - freqs**2)
    prefactor = hbar * cfg.delta_k**2 * cfg.rabi**2 / (2.0 * cfg.mass)
    j = prefactor * (v * weights) @ v.T
    j = 0.5 * (j + j.T)  # exact symmetry despite rounding
    return CouplingMatrix.from_full(j)


def eigen_spectrum_lambda(cfg: TrapConfig, modes: PhononModes) -> np.ndarray:
    """Eigenvalues of the full J matrix, one per phonon mode.

    lambda_m = hbar dk^2 Omega^2 / (2 M (mu^2 - omega_x^2 + omega_z^2 kappa_m));
    the matching eigenvectors are the mode profiles themselves.
    """
    denom = cfg.mu**2 - cfg.omega_x**2 + cfg.omega_z**2 * modes.kappas
    if np.any(np.abs(denom) <= RESONANCE_RTOL * cfg.mu**2):
        raise ResonanceError("mu lies on a transverse mode; detune the drive")
    return hbar * cfg.delta_k**2 * cfg.rabi**2 / (2.0 * cfg.mass * denom)


def fit_alpha(jm: CouplingMatrix) -> float:
    """Least-squares power-law exponent of the off-diagonal decay.

    Fits log J_ij against log |i-j| over all pairs; every off-diagonal
    coupling must be positive for the log to make sense.
    """
    n = jm.n_ions
    if n < 3:
        raise ValueError("power-law fit needs at least 3 ions")
    iu, ju = np.triu_indices(n, k=1)
    vals = jm.j_script[iu, ju]
    if np.any(vals <= 0):
        raise ValueError("off-diagonal couplings must be positive to fit alpha")
    slope = np.polyfit(np.log(ju - iu), np.log(vals), 1)[0]
    return float(-slope)


def with_fitted_alpha(jm: CouplingMatrix) -> CouplingMatrix:
    return replace(jm, alpha_fit=fit_alpha(jm))


@dataclass(frozen=True)
class EffectivePotential:
    """Emergent single-excitation potential U_i = -J_ii, shifted to min 0."""

    u: np.ndarray
    barrier_height: float
    well_minima_sites: tuple[int, int]

    def __post_init__(self):
        self.u.setflags(write=False)


def effective_potential(jm: CouplingMatrix) -> EffectivePotential:
    """Potential landscape carried by the coupling diagonal.

    The diagonal of an idealized power-law matrix is identically zero
    and carries no landscape, so that input is rejected.
    """
    diag = np.diag(jm.j)
    if np.all(diag == 0.0):
        raise ValueError(
            "degenerate potential: coupling diagonal is identically zero "
            "(idealized power-law input); derive couplings with ion_couplings"
        )
    u = -diag
    u = u - u.min()
    n = len(u)
    half = n // 2
    left = int(np.argmin(u[:half]))
    right = half + int(np.argmin(u[half:]))
    barrier = float(u[left:right + 1].max() - min(u[left], u[right]))
    # well sites are reported 1-based like everything ion-indexed
    return EffectivePotential(u=u, barrier_height=barrier,
                              well_minima_sites=(left + 1, right + 1))


@dataclass(frozen=True)
class ContinuumDispersion:
    """Quadratic expansion of the coupling band edge near wavenumber pi.

    m_eff (kg) and the band curvature quadratic_coeff (rad/s per unit
    dimensionless wavenumber squared, = hbar dk^2 / 2 m_eff).  The
    printed closed form adds the dimensionless constant 4 zeta(3)
    directly to mu^2 - omega_x^2; with scaled_zeta_term=True that
    constant is multiplied by omega_z^2, which keeps the expression
    dimensionally consistent.  The two disagree whenever omega_z^2 is
    not negligible against mu^2 - omega_x^2; both are exposed on
    purpose rather than silently picking one.
    """

    m_eff: float
    quadratic_coeff: float
    scaled_zeta_term: bool


def continuum_dispersion(cfg: TrapConfig,
                         scaled_zeta_term: bool = False) -> ContinuumDispersion:
    z3 = 4.0 * zeta(3.0)
    if scaled_zeta_term:
        z3 = z3 * cfg.omega_z**2
    band = cfg.mu**2 - cfg.omega_x**2 + z3
    m_eff = cfg.mass * band**2 / (cfg.omega_z**2 * cfg.rabi**2 * math.log(2.0))
    coeff = hbar * cfg.delta_k**2 / (2.0 * m_eff)
    return ContinuumDispersion(m_eff=float(m_eff), quadratic_coeff=float(coeff),
                               scaled_zeta_term=scaled_zeta_term)


def tune_mu_for_alpha(cfg: TrapConfig, target_alpha: float,
                      n_grid: int = 120,
                      detuning_range: tuple[float, float] = (1e-4, 1.0)
                      ) -> TrapConfig:
    """Grid-scan the drive detuning until the fitted exponent matches.

    Scans mu = omega_x * sqrt(1 + d) with d log-spaced over
    detuning_range; driving above the center-of-mass mode keeps every
    coupling positive so the fit is defined.  Returns the config tuned
    to the closest grid point.
    """
    if not 0.0 < target_alpha < 3.0:
        raise ValueError("target_alpha must lie in (0, 3)")
    modes = exact_modes(cfg)
    best, best_err = None, np.inf
    for d in np.geomspace(detuning_range[0], detuning_range[1], n_grid):
        mu = cfg.omega_x * math.sqrt(1.0 + d)
        trial = cfg.with_mu(mu)
        try:
            alpha = fit_alpha(ion_couplings(trial, modes))
        except (ValueError, ResonanceError):
            continue
        err = abs(alpha - target_alpha)
        if err < best_err:
            best, best_err = trial, err
    if best is None:
        raise ValueError("no detuning in range produced a valid power-law fit")
    return best


def scale_rabi_for_jmax(cfg: TrapConfig, target_jmax: float,
                        modes: PhononModes | None = None) -> TrapConfig:
    """Rescale the Rabi frequency so the strongest coupling hits a target."""
    if target_jmax <= 0:
        raise ValueError("target_jmax must be positive")
    current = ion_couplings(cfg, modes).j_max
    return cfg.with_rabi(cfg.rabi * math.sqrt(target_jmax / current))
