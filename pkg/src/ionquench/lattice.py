"""Ion chain geometry and transverse phonon modes.

All frequencies are angular (rad/s).  The transverse normal modes of a
linear chain diagonalize the quadratic form

    M/2 * sum_ij (omega_x^2 delta_ij - omega_z^2 K_ij) x_i x_j,

where K is the dimensionless dipolar interaction matrix and omega_z is
the effective axial frequency sqrt(Q^2 / (4 pi eps0 M a0^3)) set by the
nearest-neighbor spacing a0 (for a harmonic trap, omega_z is the actual
axial confinement frequency and the spacing is nonuniform).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import atomic_mass, elementary_charge, epsilon_0

from .errors import ConvergenceError, ResonanceError, StabilityError

# 171Yb+ mass and counter-propagating 355 nm Raman beams, the usual
# hardware for this kind of chain.
YB171_MASS = 170.936 * atomic_mass
RAMAN_DELTA_K = math.sqrt(2.0) * 2.0 * math.pi / 355e-9

RESONANCE_RTOL = 1e-6


class Geometry(enum.Enum):
    UNIFORM = "uniform"
    HARMONIC = "harmonic"


def axial_scale_from_spacing(mass: float, charge: float, spacing: float) -> float:
    """Effective axial angular frequency for a uniformly spaced chain."""
    return math.sqrt(charge**2 / (4.0 * math.pi * epsilon_0 * mass * spacing**3))


@dataclass(frozen=True)
class TrapConfig:
    """Static trap and drive parameters for one chain.

    omega_x   transverse confinement (rad/s)
    omega_z   effective axial frequency (rad/s); for HARMONIC geometry
              this is the real axial trap frequency
    mu        beatnote detuning of the spin-dependent drive (rad/s)
    rabi      carrier Rabi frequency (rad/s)
    delta_k   wavevector difference of the drive beams (1/m)
    spacing   nearest-neighbor distance (m); sets positions for UNIFORM
              geometry and is ignored for HARMONIC
    """

    n_ions: int
    omega_x: float
    omega_z: float
    mu: float
    rabi: float
    delta_k: float = RAMAN_DELTA_K
    mass: float = YB171_MASS
    charge: float = elementary_charge
    spacing: float = 5e-6
    geometry: Geometry = Geometry.UNIFORM

    def __post_init__(self):
        if self.n_ions < 2:
            raise ValueError("need at least 2 ions")
        for name in ("omega_x", "omega_z", "mu", "rabi", "delta_k",
                     "mass", "charge", "spacing"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def uniform(cls, n_ions: int, omega_x: float, mu: float, rabi: float,
                spacing: float = 5e-6, **kw) -> "TrapConfig":
        """Uniformly spaced chain; omega_z derived from the spacing."""
        mass = kw.pop("mass", YB171_MASS)
        charge = kw.pop("charge", elementary_charge)
        wz = axial_scale_from_spacing(mass, charge, spacing)
        return cls(n_ions=n_ions, omega_x=omega_x, omega_z=wz, mu=mu,
                   rabi=rabi, mass=mass, charge=charge, spacing=spacing,
                   geometry=Geometry.UNIFORM, **kw)

    def with_mu(self, mu: float) -> "TrapConfig":
        return replace(self, mu=mu)

    def with_rabi(self, rabi: float) -> "TrapConfig":
        return replace(self, rabi=rabi)

    def coulomb_length(self) -> float:
        """Length l with Q^2/(4 pi eps0 l^3) = M omega_z^2."""
        return (self.charge**2
                / (4.0 * math.pi * epsilon_0 * self.mass * self.omega_z**2)
                ) ** (1.0 / 3.0)


@dataclass(frozen=True)
class PhononModes:
    """Transverse mode set: columns of mode_matrix are eigenvectors of K.

    kappas are the matching eigenvalues; frequencies (rad/s) are present
    once a trap has been attached and obey omega_m^2 = omega_x^2 -
    omega_z^2 kappa_m.
    """

    mode_matrix: np.ndarray
    kappas: np.ndarray
    frequencies: np.ndarray | None = None

    def __post_init__(self):
        self.mode_matrix.setflags(write=False)
        self.kappas.setflags(write=False)
        if self.frequencies is not None:
            self.frequencies.setflags(write=False)

    @property
    def n_ions(self) -> int:
        return self.mode_matrix.shape[0]


def k_matrix(n: int) -> np.ndarray:
    """Dimensionless dipolar matrix for a uniformly spaced chain.

    Off-diagonal entries are -|i-j|^-3; the diagonal carries minus the
    row sum, so every row sums to zero (Laplacian structure).
    """
    if n < 2:
        raise ValueError("need at least 2 ions")
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :]).astype(float)
    np.fill_diagonal(dist, np.inf)
    k = -dist**-3.0
    np.fill_diagonal(k, 0.0)
    np.fill_diagonal(k, -k.sum(axis=1))
    return k


def perturbative_modes(n: int) -> PhononModes:
    """Closed-form cosine-wave modes of the uniform chain.

    Valid to leading order in the dipolar coupling: mode m has profile
    V_{i,m} = sqrt(2/N) cos[(m pi / N)(i - 1/2)] (sqrt(1/N) for m = 0)
    and eigenvalue kappa_m = sum_{r=1}^{floor(N/2)} (2 - 2 cos(m r pi / N)) / r^3.
    """
    if n < 2:
        raise ValueError("need at least 2 ions")
    i = np.arange(1, n + 1)[:, None]
    m = np.arange(n)[None, :]
    v = np.sqrt(2.0 / n) * np.cos(m * np.pi / n * (i - 0.5))
    v[:, 0] = np.sqrt(1.0 / n)
    r = np.arange(1, n // 2 + 1)[:, None]
    kappas = ((2.0 - 2.0 * np.cos(m * r * np.pi / n)) / r**3.0).sum(axis=0)
    return PhononModes(mode_matrix=v, kappas=kappas)


def _dimensionless_equilibrium(n: int, max_iter: int = 200,
                               tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Damped Newton solve of the harmonic-trap force balance.

    Positions are in units of the Coulomb length; the residual is the
    net force per ion in units of the trap force at that length.
    """
    # uniform initial guess with the known ~N^-0.56 density scaling
    step = 2.0 / n**0.56
    u = step * (np.arange(n) - (n - 1) / 2.0)

    def f_and_jac(u):
        sep = u[:, None] - u[None, :]
        np.fill_diagonal(sep, np.inf)
        f = u - (np.sign(sep) / sep**2).sum(axis=1)
        off = -2.0 / np.abs(sep) ** 3
        jac = off.copy()
        np.fill_diagonal(jac, 1.0 - off.sum(axis=1))
        return f, jac

    f, jac = f_and_jac(u)
    norm = np.abs(f).max()
    for _ in range(max_iter):
        if norm < tol:
            return u, norm
        du = np.linalg.solve(jac, -f)
        lam = 1.0
        while lam > 1e-6:
            trial = u + lam * du
            if np.all(np.diff(trial) > 0):
                ft, jt = f_and_jac(trial)
                nt = np.abs(ft).max()
                if nt < norm:
                    u, f, jac, norm = trial, ft, jt, nt
                    break
            lam *= 0.5
        else:
            break
    if norm >= tol:
        raise ConvergenceError(
            f"equilibrium solve stalled at residual {norm:.3e} (tol {tol:.0e})"
        )
    return u, norm


def equilibrium_positions(cfg: TrapConfig) -> np.ndarray:
    """Axial equilibrium positions in meters, sorted ascending."""
    if cfg.geometry is Geometry.UNIFORM:
        return cfg.spacing * (np.arange(cfg.n_ions) - (cfg.n_ions - 1) / 2.0)
    u, _ = _dimensionless_equilibrium(cfg.n_ions)
    return cfg.coulomb_length() * u


def exact_modes(cfg: TrapConfig) -> PhononModes:
    """Numerically exact transverse modes from the chain positions.

    Eigenvalues come back ascending in kappa, i.e. descending in mode
    frequency with the center-of-mass mode first.  Raises
    StabilityError when the lowest mode softens to zero and
    ResonanceError when mu falls on a mode within a relative 1e-6.
    """
    z = equilibrium_positions(cfg)
    if cfg.geometry is Geometry.UNIFORM:
        k = k_matrix(cfg.n_ions)
    else:
        # general positions: same Laplacian with distances in units of
        # the Coulomb length so that omega_z^2 stays the prefactor
        d = np.abs(z[:, None] - z[None, :]) / cfg.coulomb_length()
        np.fill_diagonal(d, np.inf)
        k = -d**-3.0
        np.fill_diagonal(k, 0.0)
        np.fill_diagonal(k, -k.sum(axis=1))
    kappas, vecs = np.linalg.eigh(k)
    omega_sq = cfg.omega_x**2 - cfg.omega_z**2 * kappas
    if np.any(omega_sq <= 0):
        raise StabilityError(
            "transverse mode frequency squared is not positive; "
            "reduce omega_z or stiffen omega_x"
        )
    freqs = np.sqrt(omega_sq)
    if np.any(np.abs(cfg.mu - freqs) <= RESONANCE_RTOL * freqs):
        raise ResonanceError("mu lies on a transverse mode; detune the drive")
    return PhononModes(mode_matrix=vecs, kappas=kappas, frequencies=freqs)


def attach_frequencies(modes: PhononModes, cfg: TrapConfig) -> PhononModes:
    """Pair closed-form modes with a trap to get physical frequencies."""
    omega_sq = cfg.omega_x**2 - cfg.omega_z**2 * modes.kappas
    if np.any(omega_sq <= 0):
        raise StabilityError("mode frequency squared is not positive")
    return PhononModes(mode_matrix=np.array(modes.mode_matrix),
                       kappas=np.array(modes.kappas),
                       frequencies=np.sqrt(omega_sq))
