"""Flat key-value run configuration.

Files hold one ``key = value`` pair per line; blank lines and lines
starting with ``#`` are ignored.  Frequencies are given as ordinary
frequencies in kHz and converted to angular rad/s internally, matching
how the hardware is usually quoted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from scipy.constants import atomic_mass, elementary_charge

from .coupling import (CouplingMatrix, ion_couplings, power_law_couplings,
                       scale_rabi_for_jmax, tune_mu_for_alpha, with_fitted_alpha)
from .errors import ConfigError
from .lattice import (Geometry, PhononModes, RAMAN_DELTA_K, TrapConfig,
                      axial_scale_from_spacing, exact_modes)
from .observables import ExcitationPattern
from .stochastic import NoiseModel

TWO_PI = 2.0 * math.pi

MODELS = ("exact", "xy", "spinwave")
SOURCES = ("power_law", "trap")
GEOMETRIES = ("uniform", "harmonic")

# key -> (type tag, default); None default means required
_SCHEMA: dict[str, tuple[str, object]] = {
    "n_ions": ("int", None),
    "b_khz": ("float", 10.0),
    "model": ("str", "exact"),
    "patterns": ("str", "1"),
    "t_max_over_jmax": ("float", 25.0),
    "n_times": ("int", 60),
    "seed": ("int", 0),
    "threads": ("int", 1),
    "out_dir": ("str", "runs"),
    "coupling_source": ("str", "power_law"),
    "j_max_khz": ("float", 0.6),
    "alpha": ("float", 0.55),
    "target_alpha": ("float", 0.0),
    "omega_x_khz": ("float", 4800.0),
    "omega_z_khz": ("float", 0.0),
    "mu_khz": ("float", 0.0),
    "rabi_khz": ("float", 200.0),
    "delta_k_per_m": ("float", RAMAN_DELTA_K),
    "mass_amu": ("float", 170.936),
    "charge_e": ("float", 1.0),
    "spacing_um": ("float", 5.0),
    "geometry": ("str", "uniform"),
    "noise_samples": ("int", 0),
    "j_noise_sigma": ("float", 0.12),
    "b_offset_hz": ("float", 30.0),
    "prep_fidelity": ("float", 0.97),
    "detection_error": ("float", 0.05),
    "n_shots": ("int", 3000),
    "shot_time_over_jmax": ("float", -1.0),
    "alpha_grid": ("str", "0.55,1.33"),
    "scan_detuning_min": ("float", 1e-4),
    "scan_detuning_max": ("float", 1.0),
    "scan_points": ("int", 60),
}


def _parse_value(key: str, raw: str):
    kind = _SCHEMA[key][0]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None
    return raw


def _parse_patterns(spec: str, n_ions: int) -> list[ExcitationPattern]:
    patterns = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            sites = tuple(int(tok) for tok in chunk.split(",") if tok.strip())
            patterns.append(ExcitationPattern(n_ions, sites))
        except ValueError as exc:
            raise ConfigError(f"patterns: {exc}") from None
    if not patterns:
        raise ConfigError("patterns: no pattern given")
    return patterns


@dataclass
class RunConfig:
    """Validated run parameters with everything in angular units."""

    raw: dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for key, (_, default) in _SCHEMA.items():
            if key not in self.raw:
                if default is None:
                    raise ConfigError(f"{key}: required key missing")
                self.raw[key] = default
        self._validate()

    def _validate(self):
        r = self.raw
        if r["n_ions"] < 2:
            raise ConfigError("n_ions: need at least 2")
        if r["b_khz"] <= 0:
            raise ConfigError("b_khz: must be positive")
        if r["model"] not in MODELS:
            raise ConfigError(f"model: {r['model']!r} not one of {MODELS}")
        if r["coupling_source"] not in SOURCES:
            raise ConfigError(
                f"coupling_source: {r['coupling_source']!r} not one of {SOURCES}"
            )
        if r["geometry"] not in GEOMETRIES:
            raise ConfigError(
                f"geometry: {r['geometry']!r} not one of {GEOMETRIES}"
            )
        if r["coupling_source"] == "power_law":
            if r["j_max_khz"] <= 0:
                raise ConfigError("j_max_khz: must be positive for power_law")
            if r["alpha"] < 0:
                raise ConfigError("alpha: must be non-negative")
        else:
            for key in ("omega_x_khz", "rabi_khz", "spacing_um",
                        "mass_amu", "charge_e", "delta_k_per_m"):
                if r[key] <= 0:
                    raise ConfigError(f"{key}: must be positive for trap source")
            if r["mu_khz"] <= 0 and r["target_alpha"] <= 0:
                raise ConfigError(
                    "mu_khz: give a positive detuning or set target_alpha"
                )
            if r["target_alpha"] and not 0 < r["target_alpha"] < 3:
                raise ConfigError("target_alpha: must lie in (0, 3)")
        if r["t_max_over_jmax"] <= 0:
            raise ConfigError("t_max_over_jmax: must be positive")
        if r["n_times"] < 2:
            raise ConfigError("n_times: need at least 2 points")
        if not 0 <= r["seed"] < 2**64:
            raise ConfigError("seed: must fit in an unsigned 64-bit integer")
        if r["threads"] < 1:
            raise ConfigError("threads: must be >= 1")
        if r["noise_samples"] < 0:
            raise ConfigError("noise_samples: must be non-negative")
        if r["j_noise_sigma"] < 0:
            raise ConfigError("j_noise_sigma: must be non-negative")
        if r["b_offset_hz"] < 0:
            raise ConfigError("b_offset_hz: must be non-negative")
        if not 0 <= r["prep_fidelity"] <= 1:
            raise ConfigError("prep_fidelity: must be a probability")
        if not 0 <= r["detection_error"] <= 1:
            raise ConfigError("detection_error: must be a probability")
        if r["n_shots"] < 1:
            raise ConfigError("n_shots: must be >= 1")
        if r["scan_points"] < 2:
            raise ConfigError("scan_points: need at least 2 points")
        if not 0 < r["scan_detuning_min"] < r["scan_detuning_max"]:
            raise ConfigError(
                "scan_detuning_min: need 0 < min < scan_detuning_max"
            )
        self.patterns = _parse_patterns(r["patterns"], r["n_ions"])
        try:
            self.alpha_grid = [
                float(tok) for tok in str(r["alpha_grid"]).split(",") if tok.strip()
            ]
        except ValueError:
            raise ConfigError("alpha_grid: cannot parse float list") from None
        if not self.alpha_grid or any(a < 0 for a in self.alpha_grid):
            raise ConfigError("alpha_grid: needs non-negative values")

    # -- derived quantities -------------------------------------------------

    @property
    def n_ions(self) -> int:
        return self.raw["n_ions"]

    @property
    def b_field(self) -> float:
        return TWO_PI * 1e3 * self.raw["b_khz"]

    @property
    def model(self) -> str:
        return self.raw["model"]

    def trap_config(self) -> TrapConfig:
        r = self.raw
        if r["coupling_source"] != "trap":
            raise ConfigError("coupling_source: trap parameters requested "
                              "but source is power_law")
        mass = r["mass_amu"] * atomic_mass
        charge = r["charge_e"] * elementary_charge
        spacing = r["spacing_um"] * 1e-6
        omega_z = (TWO_PI * 1e3 * r["omega_z_khz"] if r["omega_z_khz"] > 0
                   else axial_scale_from_spacing(mass, charge, spacing))
        mu = TWO_PI * 1e3 * r["mu_khz"] if r["mu_khz"] > 0 else None
        if mu is None and r["target_alpha"] <= 0:
            raise ConfigError("mu_khz: trap source needs mu_khz > 0 or "
                              "target_alpha > 0")
        cfg = TrapConfig(
            n_ions=r["n_ions"],
            omega_x=TWO_PI * 1e3 * r["omega_x_khz"],
            omega_z=omega_z,
            mu=mu if mu is not None else 1.0001 * TWO_PI * 1e3 * r["omega_x_khz"],
            rabi=TWO_PI * 1e3 * r["rabi_khz"],
            delta_k=r["delta_k_per_m"],
            mass=mass,
            charge=charge,
            spacing=spacing,
            geometry=Geometry(r["geometry"]),
        )
        if mu is None:
            cfg = tune_mu_for_alpha(
                cfg, r["target_alpha"],
                n_grid=r["scan_points"],
                detuning_range=(r["scan_detuning_min"], r["scan_detuning_max"]),
            )
        if r["j_max_khz"] > 0:
            cfg = scale_rabi_for_jmax(cfg, TWO_PI * 1e3 * r["j_max_khz"])
        return cfg

    def couplings(self) -> tuple[CouplingMatrix, TrapConfig | None,
                                 PhononModes | None]:
        """Coupling matrix plus the trap objects when they exist."""
        r = self.raw
        if r["coupling_source"] == "power_law":
            jm = power_law_couplings(
                r["n_ions"], TWO_PI * 1e3 * r["j_max_khz"], r["alpha"]
            )
            return jm, None, None
        cfg = self.trap_config()
        modes = exact_modes(cfg)
        jm = ion_couplings(cfg, modes)
        try:
            jm = with_fitted_alpha(jm)
        except ValueError:
            pass  # negative couplings: no power-law fit exists
        return jm, cfg, modes

    def noise_model(self, seed: int | None = None) -> NoiseModel:
        r = self.raw
        return NoiseModel(
            j_relative_sigma=r["j_noise_sigma"],
            b_offset_sigma=TWO_PI * r["b_offset_hz"],
            prep_flip_fidelity=r["prep_fidelity"],
            detection_error=r["detection_error"],
            seed=r["seed"] if seed is None else seed,
        )


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a config file; unknown keys are an error."""
    raw: dict[str, object] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"{key}: unknown key (line {lineno})")
        if key in raw:
            raise ConfigError(f"{key}: duplicate key (line {lineno})")
        raw[key] = _parse_value(key, value)
    return RunConfig(raw)
