import math

import pytest

from ionquench.coupling import (ion_couplings, scale_rabi_for_jmax,
                                tune_mu_for_alpha, with_fitted_alpha)
from ionquench.lattice import TrapConfig

TWO_PI = 2.0 * math.pi


def make_trap_config(n_ions: int = 7) -> TrapConfig:
    """Reference chain: 4.8 MHz transverse modes, 5 um spacing."""
    return TrapConfig.uniform(n_ions=n_ions, omega_x=TWO_PI * 4.8e6,
                              mu=TWO_PI * 4.9e6, rabi=TWO_PI * 200e3,
                              spacing=5e-6)


def make_trap_couplings(target_alpha: float, n_ions: int = 7,
                        j_max: float = TWO_PI * 600.0):
    cfg = tune_mu_for_alpha(make_trap_config(n_ions), target_alpha)
    cfg = scale_rabi_for_jmax(cfg, j_max)
    return with_fitted_alpha(ion_couplings(cfg)), cfg


@pytest.fixture(scope="session")
def trap55():
    """7-ion trap-derived couplings tuned to a long-range exponent."""
    jm, _ = make_trap_couplings(0.55)
    return jm


@pytest.fixture(scope="session")
def trap133():
    """7-ion trap-derived couplings tuned to a short-range exponent."""
    jm, _ = make_trap_couplings(1.33)
    return jm
