"""Quench dynamics of long-range Ising chains of trapped ions.

The package splits along the physics: lattice (chain geometry and
transverse phonons), coupling (spin-spin matrices and the emergent
potential), spinwave (quadratic boson model and its GGE), exact
(full and sector-resolved diagonalization), stochastic (noise and
measurement emulation) and cli (reproducible runs to CSV/JSON).
"""

__version__ = "0.1.0"

from .coupling import (ContinuumDispersion, CouplingMatrix, EffectivePotential,
                       continuum_dispersion, effective_potential,
                       eigen_spectrum_lambda, fit_alpha, ion_couplings,
                       power_law_couplings, scale_rabi_for_jmax,
                       tune_mu_for_alpha, with_fitted_alpha)
from .errors import (ConfigError, ConvergenceError, EmptySelectionError,
                     ResonanceError, SectorError, SimulationError, SizeError,
                     StabilityError)
from .exact import (HamiltonianRep, build_full_ising, build_xy_sector,
                    default_time_grid, diagonal_ensemble, evolve,
                    excitation_drift)
from .lattice import (Geometry, PhononModes, TrapConfig, attach_frequencies,
                      equilibrium_positions, exact_modes, k_matrix,
                      perturbative_modes)
from .observables import ExcitationPattern, QuenchTrace, assemble_trace, observable_c
from .spinwave import (GgeState, HeisenbergPropagator, SpinWaveSystem,
                       build_spinwave, evolve_spinwave, gge_lambdas,
                       gge_magnetization, gge_occupations, gge_state,
                       pair_gap_spectrum, propagator)
from .stochastic import (NoiseModel, PostselectionResult, ShotRecord,
                         corrupt_pattern, noise_average, postselect,
                         sample_shots, shot_pipeline)
