"""Deterministic random instances.

Every instance draws from its own PCG64 stream seeded by
``SeedSequence(entropy=seed, spawn_key=(crc32(stream_name), index))``, so
instance k is the same whatever the instance count (see ``docs/rng.md``).
"""

from __future__ import annotations

import logging
import zlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..grid import SampledFunction, TorusGrid, lp_norm, random_trig_poly
from ..kernels import sample_kernel
from .config import ConfigError, ExperimentConfig

log = logging.getLogger(__name__)

__all__ = [
    "Instance",
    "instance_rng",
    "instance_seed",
    "bandlimit_budget",
    "gaussian_bumps",
    "localized_function",
    "generate_instance",
    "generate_young_instance",
]

MAX_REROLLS = 8


def _stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def _seed_sequence(seed: int, stream: str, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=(_stream_key(stream), index))


def instance_rng(seed: int, stream: str, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(_seed_sequence(seed, stream, index)))


def instance_seed(seed: int, stream: str, index: int) -> int:
    """A u64 fingerprint of the derived stream, recorded in reports."""
    lo, hi = _seed_sequence(seed, stream, index).generate_state(2, dtype=np.uint32)
    return int(hi) << 32 | int(lo)


def bandlimit_budget(grid: TorusGrid, thetas) -> int:
    """Largest B keeping every θ-weighted product spectrum below Nyquist."""
    spread = max(sum(abs(int(t)) for t in thetas), len(thetas))
    return (grid.N // 2 - 1) // spread


@dataclass
class Instance:
    fs: list
    g: Optional[SampledFunction]
    K: Optional[SampledFunction]
    seed: int
    rerolls: int = 0


def gaussian_bumps(grid: TorusGrid, centers, widths, weights, phases=None, freqs=None) -> SampledFunction:
    """Σ_b w_b exp(-|x - c_b|^2 / 2 s_b^2) e^{i(φ_b + 2π k_b.x/L)}, periodized over ±1 image."""
    coords = grid.coords()
    vals = np.zeros(grid.shape, dtype=complex)
    shifts = np.array(np.meshgrid(*([[-1, 0, 1]] * grid.d), indexing="ij")).reshape(grid.d, -1).T
    for b, (c, s, w) in enumerate(zip(centers, widths, weights)):
        c = np.atleast_1d(c)
        env = np.zeros(grid.shape)
        for sh in shifts:
            r2 = sum((x - ca - k * grid.L) ** 2 for x, ca, k in zip(coords, c, sh))
            env = env + np.exp(-0.5 * r2 / s ** 2)
        phase = 0.0 if phases is None else phases[b]
        if freqs is not None:
            kv = np.atleast_1d(freqs[b])
            phase = phase + 2 * np.pi * sum(k * x for k, x in zip(kv, coords)) / grid.L
        vals = vals + w * env * np.exp(1j * phase)
    return SampledFunction(grid, vals)


def localized_function(grid: TorusGrid, rng: np.random.Generator, bumps: int = 3) -> SampledFunction:
    """Positive sum of narrow Gaussian bumps near the origin.

    Centers in [-0.15, 0.15]^d, widths in [0.08, 0.12], weights in [0.2, 1].
    With θ of size at most 3 and L = 4 all products stay clear of the torus
    seam, so torus sums reproduce the integrals over R^d.
    """
    centers = rng.uniform(-0.15, 0.15, size=(bumps, grid.d))
    widths = rng.uniform(0.08, 0.12, size=bumps)
    weights = rng.uniform(0.2, 1.0, size=bumps)
    f = gaussian_bumps(grid, centers, widths, weights)
    return f.with_values(f.values.real)


def _draw(make, rng) -> tuple:
    for attempt in range(MAX_REROLLS):
        f = make(rng)
        if lp_norm(f, 2) > 0:
            return f, attempt
        log.warning("zero function drawn; re-rolling (attempt %d)", attempt + 1)
    raise RuntimeError("could not draw a nonzero function")


def generate_instance(config: ExperimentConfig, index: int, stream: str = "sqfn") -> Instance:
    """Band-limited random trig polynomials f_1..f_m plus the sampled kernel K."""
    grid = config.grid
    budget = bandlimit_budget(grid, config.theta.integer())
    if config.bandlimit > budget:
        raise ConfigError(
            f"bandlimit {config.bandlimit} exceeds the Nyquist budget {budget} for "
            f"N = {grid.N} and θ = {config.theta.as_list()}"
        )
    rng = instance_rng(config.seed, stream, index)
    fs, rerolls = [], 0
    for _ in range(config.theta.m):
        f, k = _draw(lambda r: random_trig_poly(grid, config.bandlimit, r, decay=1.0), rng)
        fs.append(f)
        rerolls += k
    K = sample_kernel(config.kernel, grid)
    return Instance(fs, None, K, instance_seed(config.seed, stream, index), rerolls)


def generate_young_instance(config: ExperimentConfig, index: int, stream: str = "young") -> Instance:
    """Inputs for the Young checks, from ``run.family``.

    ``localized`` gives positive Gaussian-bump data that does not feel the
    torus seam; ``trig`` gives band-limited trig polynomials (periodic data,
    for which the dilation gains |θ|^(-d/...) of the R^d constants vanish).
    """
    grid = config.grid
    m = config.young_theta.m
    rng = instance_rng(config.seed, stream, index)
    if config.family == "localized":
        make = lambda r: localized_function(grid, r)
    else:
        budget = bandlimit_budget(grid, config.young_theta.integer())
        band = min(config.bandlimit, budget)
        make = lambda r: random_trig_poly(grid, band, r, decay=1.0)
    fs, rerolls = [], 0
    for _ in range(m):
        f, k = _draw(make, rng)
        fs.append(f)
        rerolls += k
    g, k = _draw(make, rng)
    return Instance(fs, g, None, instance_seed(config.seed, stream, index), rerolls + k)
