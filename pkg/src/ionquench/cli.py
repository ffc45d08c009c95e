"""Command-line front end.

Subcommands map onto the library layers: couplings, evolve, gge, gaps,
shots and sweep-alpha.  Every run reads one flat key-value config file,
writes CSV/JSON artifacts into the output directory and is bytewise
reproducible for a fixed config and seed.

Exit codes: 0 success, 2 configuration error, 3 numerical or stability
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import MODELS, RunConfig, load_config
from .coupling import effective_potential
from .errors import ConfigError, SimulationError
from .exact import (DENSE_CAP, build_full_ising, build_xy_sector,
                    default_time_grid, diagonal_ensemble, evolve)
from .iocsv import (write_c_summary_csv, write_csv, write_gge_csv,
                    write_indexed_csv, write_manifest, write_matrix_csv,
                    write_shot_lines, write_trace_csv)
from .lattice import equilibrium_positions
from .observables import ExcitationPattern, QuenchTrace
from .spinwave import (build_spinwave, evolve_spinwave, gge_state,
                       pair_gap_spectrum)
from .stochastic import noise_average, postselect, shot_pipeline


def _pattern_tag(pattern: ExcitationPattern) -> str:
    return "p" + ("-".join(str(i) for i in pattern.flipped) or "none")


def _manifest_base(cfg: RunConfig, command: str) -> dict:
    return {
        "command": command,
        "version": __version__,
        "config": dict(cfg.raw),
    }


def _run_model(cfg: RunConfig, jm, pattern: ExcitationPattern,
               times: np.ndarray) -> QuenchTrace:
    b = cfg.b_field
    if cfg.model == "exact":
        return evolve(build_full_ising(jm, b), pattern, times)
    if cfg.model == "xy":
        h = build_xy_sector(jm, b, pattern.n_excitations)
        return evolve(h, pattern, times)
    return evolve_spinwave(build_spinwave(jm, b), pattern, times)


def cmd_couplings(cfg: RunConfig, outdir: Path) -> dict:
    jm, trap, modes = cfg.couplings()
    write_matrix_csv(outdir / "j_matrix.csv", jm.j)
    manifest = _manifest_base(cfg, "couplings")
    manifest["derived"] = {
        "j_max_rad_per_s": jm.j_max,
        "alpha_fit": jm.alpha_fit,
        "n_ions": jm.n_ions,
    }
    outputs = ["j_matrix.csv"]
    if trap is not None:
        write_indexed_csv(outdir / "positions.csv", equilibrium_positions(trap))
        write_indexed_csv(outdir / "mode_kappas.csv", modes.kappas)
        write_indexed_csv(outdir / "mode_frequencies.csv", modes.frequencies)
        pot = effective_potential(jm)
        write_csv(outdir / "potential.csv", ("site", "U_rad_per_s"),
                  ((s + 1, u) for s, u in enumerate(pot.u)))
        outputs += ["positions.csv", "mode_kappas.csv",
                    "mode_frequencies.csv", "potential.csv"]
        manifest["derived"].update(
            mu_rad_per_s=trap.mu,
            rabi_rad_per_s=trap.rabi,
            omega_z_rad_per_s=trap.omega_z,
            barrier_height_rad_per_s=pot.barrier_height,
            well_minima_sites=list(pot.well_minima_sites),
        )
    manifest["outputs"] = outputs
    write_manifest(outdir / "manifest.json", manifest)
    return manifest


def cmd_evolve(cfg: RunConfig, outdir: Path) -> dict:
    jm, _, _ = cfg.couplings()
    r = cfg.raw
    times = default_time_grid(jm.j_max, r["t_max_over_jmax"], r["n_times"])
    n_noise = r["noise_samples"]
    model = cfg.noise_model()
    sw = build_spinwave(jm, cfg.b_field)
    manifest = _manifest_base(cfg, "evolve")
    manifest["derived"] = {
        "j_max_rad_per_s": jm.j_max,
        "alpha_fit": jm.alpha_fit,
        "t_max_seconds": float(times[-1]),
    }
    outputs = []
    for pattern in cfg.patterns:
        tag = _pattern_tag(pattern)
        if n_noise > 0:
            trace = noise_average(
                lambda s: _run_model(cfg, jm.scaled(s), pattern, times),
                model, n_noise, threads=r["threads"],
            )
        else:
            trace = _run_model(cfg, jm, pattern, times)
        ns = n_noise if n_noise > 0 else None
        write_trace_csv(outdir / f"trace_{cfg.model}_{tag}.csv", trace, ns)
        write_c_summary_csv(outdir / f"c_{cfg.model}_{tag}.csv", trace, ns)
        write_gge_csv(outdir / f"gge_{tag}.csv",
                      gge_state(sw, pattern).sz_gge)
        outputs += [f"trace_{cfg.model}_{tag}.csv", f"c_{cfg.model}_{tag}.csv",
                    f"gge_{tag}.csv"]
        if cfg.model in ("exact", "xy"):
            h = (build_full_ising(jm, cfg.b_field) if cfg.model == "exact"
                 else build_xy_sector(jm, cfg.b_field, pattern.n_excitations))
            if h.dimension <= DENSE_CAP:
                sz_de = diagonal_ensemble(h, pattern)
                write_csv(outdir / f"diag_ensemble_{tag}.csv",
                          ("site", "sz_diag"),
                          ((s + 1, v) for s, v in enumerate(sz_de)))
                outputs.append(f"diag_ensemble_{tag}.csv")
    manifest["outputs"] = outputs
    write_manifest(outdir / "manifest.json", manifest)
    return manifest


def cmd_gge(cfg: RunConfig, outdir: Path) -> dict:
    jm, _, _ = cfg.couplings()
    sw = build_spinwave(jm, cfg.b_field)
    manifest = _manifest_base(cfg, "gge")
    outputs = []
    for pattern in cfg.patterns:
        tag = _pattern_tag(pattern)
        state = gge_state(sw, pattern)
        write_gge_csv(outdir / f"gge_{tag}.csv", state.sz_gge)
        write_csv(outdir / f"gge_modes_{tag}.csv",
                  ("mode", "occupation", "lambda"),
                  ((k, state.d_occupations[k], state.lambdas[k])
                   for k in range(len(state.d_occupations))))
        outputs += [f"gge_{tag}.csv", f"gge_modes_{tag}.csv"]
    manifest["outputs"] = outputs
    write_manifest(outdir / "manifest.json", manifest)
    return manifest


def cmd_gaps(cfg: RunConfig, outdir: Path) -> dict:
    r = cfg.raw
    pattern = cfg.patterns[0]
    manifest = _manifest_base(cfg, "gaps")
    rows = []
    summary = {}
    fits = {}
    grid = []
    if r["coupling_source"] == "trap":
        from .coupling import (ion_couplings, scale_rabi_for_jmax,
                               tune_mu_for_alpha, with_fitted_alpha)
        base = cfg.trap_config()
        for alpha in cfg.alpha_grid:
            tuned = tune_mu_for_alpha(base, alpha)
            if r["j_max_khz"] > 0:
                tuned = scale_rabi_for_jmax(tuned,
                                            2e3 * np.pi * r["j_max_khz"])
            jm = with_fitted_alpha(ion_couplings(tuned))
            grid.append((alpha, jm))
            fits[str(alpha)] = jm.alpha_fit
    else:
        from .coupling import power_law_couplings
        for alpha in cfg.alpha_grid:
            jm = power_law_couplings(cfg.n_ions,
                                     2e3 * np.pi * r["j_max_khz"], alpha)
            grid.append((alpha, jm))
            fits[str(alpha)] = alpha
    for alpha, jm in grid:
        if cfg.model == "exact":
            pairs = _full_spectrum_gaps(jm, cfg.b_field, pattern)
        else:
            sw = build_spinwave(jm, cfg.b_field)
            pairs = pair_gap_spectrum(sw, pattern)
        resolved = [(g / jm.j_max, w) for g, w in pairs]
        rows += [(alpha, g, w) for g, w in resolved]
        heavy = [g for g, w in resolved if w > 1e-3]
        summary[str(alpha)] = min(heavy) if heavy else None
    write_csv(outdir / "gaps.csv", ("alpha", "gap_over_jmax", "weight"), rows)
    manifest["derived"] = {"min_weighted_gap_over_jmax": summary,
                           "alpha_fit": fits}
    manifest["outputs"] = ["gaps.csv"]
    write_manifest(outdir / "manifest.json", manifest)
    return manifest


def _full_spectrum_gaps(jm, b_field: float, pattern: ExcitationPattern,
                        weight_floor: float = 1e-12):
    """Pair gaps over the full Ising spectrum, weighted by overlap."""
    h = build_full_ising(jm, b_field)
    if h.dimension > DENSE_CAP:
        raise SimulationError("full-spectrum gaps need dimension <= "
                              f"{DENSE_CAP}")
    idx0 = h.state_index(pattern)
    evals, evecs = np.linalg.eigh(h.matrix.toarray())
    p = evecs[idx0, :] ** 2
    m, n = np.triu_indices(len(evals), k=1)
    w = p[m] * p[n]
    keep = w > weight_floor
    gaps = np.abs(evals[m] - evals[n])[keep]
    return list(zip(gaps.tolist(), w[keep].tolist()))


def cmd_shots(cfg: RunConfig, outdir: Path) -> dict:
    jm, _, _ = cfg.couplings()
    r = cfg.raw
    t_over = (r["shot_time_over_jmax"] if r["shot_time_over_jmax"] > 0
              else r["t_max_over_jmax"])
    t_shot = t_over / jm.j_max
    pattern = cfg.patterns[0]
    model = cfg.noise_model()

    def run_to_sz(pat: ExcitationPattern) -> np.ndarray:
        return _run_model(cfg, jm, pat, np.array([t_shot])).sz[0]

    shots = shot_pipeline(pattern, run_to_sz, model, r["n_shots"])
    result = postselect(shots, pattern.n_excitations)
    write_shot_lines(outdir / "shots.txt", shots)
    write_csv(outdir / "shot_estimates.csv",
              ("site", "p_up", "p_err", "sz", "sz_err"),
              ((s + 1, result.p_up[s], result.p_err[s], result.sz[s],
                result.sz_err[s]) for s in range(cfg.n_ions)))
    manifest = _manifest_base(cfg, "shots")
    manifest["derived"] = {
        "t_shot_seconds": t_shot,
        "acceptance_fraction": result.acceptance_fraction,
        "n_accepted": result.n_accepted,
        "target_excitations": pattern.n_excitations,
    }
    manifest["outputs"] = ["shots.txt", "shot_estimates.csv"]
    write_manifest(outdir / "manifest.json", manifest)
    return manifest


def cmd_sweep_alpha(cfg: RunConfig, outdir: Path) -> dict:
    from .coupling import fit_alpha, ion_couplings
    from .lattice import exact_modes
    r = cfg.raw
    base = cfg.trap_config()
    modes = exact_modes(base)
    rows = []
    for d in np.geomspace(r["scan_detuning_min"], r["scan_detuning_max"],
                          r["scan_points"]):
        mu = base.omega_x * float(np.sqrt(1.0 + d))
        trial = base.with_mu(mu)
        try:
            jm = ion_couplings(trial, modes)
            alpha = fit_alpha(jm)
        except (ValueError, SimulationError):
            continue
        rows.append((mu, d, alpha, jm.j_max))
    write_csv(outdir / "alpha_scan.csv",
              ("mu_rad_per_s", "detuning_fraction", "alpha_fit",
               "j_max_rad_per_s"), rows)
    manifest = _manifest_base(cfg, "sweep-alpha")
    manifest["outputs"] = ["alpha_scan.csv"]
    write_manifest(outdir / "manifest.json", manifest)
    return manifest


_COMMANDS = {
    "couplings": cmd_couplings,
    "evolve": cmd_evolve,
    "gge": cmd_gge,
    "gaps": cmd_gaps,
    "shots": cmd_shots,
    "sweep-alpha": cmd_sweep_alpha,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionquench",
        description="Quench dynamics of long-range Ising chains of trapped ions",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key-value config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="unsigned 64-bit seed override")
        p.add_argument("--model", choices=MODELS, default=None,
                       help="dynamics model override")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for sweeps and noise averages")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed: must fit in an unsigned 64-bit integer")
            cfg.raw["seed"] = args.seed
        if args.model is not None:
            cfg.raw["model"] = args.model
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("threads: must be >= 1")
            cfg.raw["threads"] = args.threads
        outdir = Path(args.out) if args.out else Path(str(cfg.raw["out_dir"]))
        outdir.mkdir(parents=True, exist_ok=True)
        _COMMANDS[args.command](cfg, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
