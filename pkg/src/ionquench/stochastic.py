"""Experimental imperfections: coupling noise, preparation and detection errors.

Every random draw comes from a counter-based child generator keyed on
(seed, stream, index), so results are reproducible no matter how the
work is scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import EmptySelectionError
from .observables import ExcitationPattern, QuenchTrace, assemble_trace

# stream ids for independent random substreams under one seed
_STREAM_NOISE = 0
_STREAM_PREP = 1
_STREAM_SHOTS = 2
_STREAM_DETECT = 3

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class NoiseModel:
    """Noise magnitudes, defaulting to the measured hardware values.

    j_relative_sigma    std dev of the global multiplicative coupling
                        noise (fraction of J)
    b_offset_sigma      std dev of a static field offset (rad/s)
    prep_flip_fidelity  probability that one intended spin flip succeeds
    detection_error     probability a readout bit is reported wrong
    """

    j_relative_sigma: float = 0.12
    b_offset_sigma: float = TWO_PI * 30.0
    prep_flip_fidelity: float = 0.97
    detection_error: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.j_relative_sigma < 0 or self.b_offset_sigma < 0:
            raise ValueError("noise magnitudes must be non-negative")
        if not 0.0 <= self.prep_flip_fidelity <= 1.0:
            raise ValueError("prep_flip_fidelity must be a probability")
        if not 0.0 <= self.detection_error <= 1.0:
            raise ValueError("detection_error must be a probability")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def rng(self, stream: int, index: int = 0) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(stream, index))
        )


def _draw_scale(rng: np.random.Generator, sigma: float) -> float:
    """Positive global coupling scale ~ Normal(1, sigma), redrawn if <= 0."""
    while True:
        s = 1.0 + sigma * rng.standard_normal()
        if s > 0.0:
            return float(s)


def noise_average(base_run: Callable[[float], QuenchTrace], model: NoiseModel,
                  n_samples: int, threads: int = 1) -> QuenchTrace:
    """Trajectory average over global coupling-strength noise.

    base_run(s) must rerun the dynamics with J -> s J.  Magnetizations
    are averaged pointwise; the location observable and its running
    mean are rebuilt from the averaged magnetizations (both are linear,
    so this equals averaging them directly).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    scales = [
        _draw_scale(model.rng(_STREAM_NOISE, i), model.j_relative_sigma)
        for i in range(n_samples)
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            traces = list(pool.map(base_run, scales))
    else:
        traces = [base_run(s) for s in scales]
    times = traces[0].times
    for tr in traces[1:]:
        if tr.sz.shape != traces[0].sz.shape:
            raise ValueError("noise samples returned mismatched traces")
    mean_sz = np.mean([tr.sz for tr in traces], axis=0)
    meta = dict(traces[0].meta)
    meta.update(n_samples=n_samples, j_relative_sigma=model.j_relative_sigma)
    return assemble_trace(times, mean_sz, **meta)


@dataclass
class ShotRecord:
    """One simulated measurement: detected bits and their excitation count."""

    bits: np.ndarray
    n_excitations: int
    accepted: bool | None = None


def corrupt_pattern(pattern: ExcitationPattern, model: NoiseModel,
                    rng: np.random.Generator) -> ExcitationPattern:
    """Apply preparation errors: each intended flip fails independently.

    A failed flip leaves that spin in the down state; nothing else is
    disturbed.
    """
    kept = tuple(
        site for site in pattern.flipped
        if rng.random() < model.prep_flip_fidelity
    )
    return ExcitationPattern(pattern.n_ions, kept)


def sample_shots(sz_probabilities: np.ndarray, model: NoiseModel,
                 n_shots: int, _shot_offset: int = 0) -> list[ShotRecord]:
    """Simulated projective readout of a product of site marginals.

    Draws each site as an independent Bernoulli with p_i = (sz_i + 1)/2,
    then flips every bit with the detection error probability.
    """
    p = (np.asarray(sz_probabilities, dtype=float) + 1.0) / 2.0
    if np.any(p < -1e-9) or np.any(p > 1.0 + 1e-9):
        raise ValueError("sz probabilities must lie in [-1, 1]")
    p = np.clip(p, 0.0, 1.0)
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    n = p.size
    rng_shot = model.rng(_STREAM_SHOTS, _shot_offset)
    rng_det = model.rng(_STREAM_DETECT, _shot_offset)
    bits = (rng_shot.random((n_shots, n)) < p[None, :]).astype(np.uint8)
    if model.detection_error > 0:
        flips = rng_det.random((n_shots, n)) < model.detection_error
        bits ^= flips.astype(np.uint8)
    return [ShotRecord(bits=row, n_excitations=int(row.sum())) for row in bits]


@dataclass(frozen=True)
class PostselectionResult:
    """Sector-filtered estimates with binomial error bars."""

    acceptance_fraction: float
    n_accepted: int
    p_up: np.ndarray
    p_err: np.ndarray
    sz: np.ndarray
    sz_err: np.ndarray


def postselect(shots: Sequence[ShotRecord], k: int) -> PostselectionResult:
    """Keep only shots whose detected excitation count equals k."""
    if not shots:
        raise ValueError("no shots given")
    for rec in shots:
        rec.accepted = rec.n_excitations == k
    kept = np.array([rec.bits for rec in shots if rec.accepted], dtype=float)
    fraction = len(kept) / len(shots)
    if len(kept) == 0:
        raise EmptySelectionError(
            f"post-selection on {k} excitations rejected all "
            f"{len(shots)} shots", acceptance_fraction=0.0
        )
    p = kept.mean(axis=0)
    perr = np.sqrt(p * (1.0 - p) / len(kept))
    return PostselectionResult(
        acceptance_fraction=fraction, n_accepted=len(kept), p_up=p,
        p_err=perr, sz=2.0 * p - 1.0, sz_err=2.0 * perr,
    )


def shot_pipeline(pattern: ExcitationPattern,
                  run_to_sz: Callable[[ExcitationPattern], np.ndarray],
                  model: NoiseModel, n_shots: int) -> list[ShotRecord]:
    """Full measurement emulation for one nominal preparation.

    Each shot first suffers preparation errors, then the dynamics of
    its (possibly corrupted) pattern fixes the site marginals that the
    detector samples.  Dynamics are cached per distinct corrupted
    pattern; the empty pattern short-circuits to all spins down.
    """
    rng_prep = model.rng(_STREAM_PREP)
    corrupted = [corrupt_pattern(pattern, model, rng_prep)
                 for _ in range(n_shots)]
    cache: dict[tuple[int, ...], np.ndarray] = {}
    p_rows = np.empty((n_shots, pattern.n_ions))
    for row, pat in enumerate(corrupted):
        key = pat.flipped
        if key not in cache:
            cache[key] = (np.full(pattern.n_ions, -1.0) if not key
                          else np.asarray(run_to_sz(pat), dtype=float))
        p_rows[row] = (cache[key] + 1.0) / 2.0
    p_rows = np.clip(p_rows, 0.0, 1.0)
    rng_shot = model.rng(_STREAM_SHOTS)
    rng_det = model.rng(_STREAM_DETECT)
    bits = (rng_shot.random(p_rows.shape) < p_rows).astype(np.uint8)
    if model.detection_error > 0:
        flips = rng_det.random(p_rows.shape) < model.detection_error
        bits ^= flips.astype(np.uint8)
    return [ShotRecord(bits=row, n_excitations=int(row.sum())) for row in bits]
