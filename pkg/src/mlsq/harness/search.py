"""Derivative-free search for large ratios (empirical probe of the unknown constants).

The schedule does not depend on the budget: restarts happen every
``restart_every`` evaluations and all randomness comes from one stream, so the
evaluations made under budget B are a prefix of those made under any larger
budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..convolve import young_check
from ..sqfn import theorem1_ratio
from .config import ExperimentConfig
from .instances import gaussian_bumps, instance_rng, instance_seed

__all__ = ["SearchTrace", "ratio_search", "OBJECTIVES"]

OBJECTIVES = ("theorem1", "young")
BUMPS = 2
RESTART_EVERY = 25


@dataclass
class SearchTrace:
    objective: str
    best_ratio: float
    best_params: list
    curve: list
    best_freqs: list
    evaluations: int
    seed: int
    restarts: int = 0
    history: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "objective": self.objective,
            "best_ratio": self.best_ratio,
            "best_params": self.best_params,
            "best_freqs": self.best_freqs,
            "curve": self.curve,
            "evaluations": self.evaluations,
            "restarts": self.restarts,
            "instance_seed": self.seed,
        }


class _Family:
    """Maps a flat parameter vector to test functions.

    Per function and bump: center (d coords), log width, phase.  Integer
    modulation frequencies are fixed per restart (the sparse spectrum).
    """

    def __init__(self, config, n_funcs, modulated, center=1.0, widths=(0.05, 0.5)):
        self.grid = config.grid
        self.n_funcs = n_funcs
        self.modulated = modulated
        self.center = center
        self.log_widths = (math.log(widths[0]), math.log(widths[1]))
        self.per_bump = self.grid.d + 2
        self.size = n_funcs * BUMPS * self.per_bump

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        d = self.grid.d
        out = []
        for _ in range(self.n_funcs * BUMPS):
            out.extend(rng.uniform(-self.center, self.center, size=d))
            out.append(rng.uniform(*self.log_widths))
            out.append(rng.uniform(0, 2 * math.pi) if self.modulated else 0.0)
        return np.array(out)

    def clip(self, x: np.ndarray) -> np.ndarray:
        x = x.copy()
        d = self.grid.d
        for b in range(self.n_funcs * BUMPS):
            base = b * self.per_bump
            x[base:base + d] = np.clip(x[base: base + d], -self.center, self.center)
            x[base + d] = np.clip(x[base + d], *self.log_widths)
        return x

    def build(self, x: np.ndarray, freqs: np.ndarray) -> list:
        d = self.grid.d
        funcs = []
        for j in range(self.n_funcs):
            cs, ws, phs, ks = [], [], [], []
            for b in range(BUMPS):
                base = (j * BUMPS + b) * self.per_bump
                cs.append(x[base: base + d])
                ws.append(math.exp(x[base + d]))
                phs.append(x[base + d + 1])
                ks.append(freqs[j * BUMPS + b])
            f = gaussian_bumps(self.grid, cs, ws, np.ones(BUMPS), phs, ks if self.modulated else None)
            funcs.append(f if self.modulated else f.with_values(f.values.real))
        return funcs


def _objective(config: ExperimentConfig, objective: str):
    if objective == "theorem1":
        family = _Family(config, config.theta.m, modulated=True)

        def evaluate(x, freqs):
            fs = family.build(x, freqs)
            return theorem1_ratio(fs, config.kernel, config.theta, config.ps)["ratio"]

    elif objective == "young":
        # kept seam-free like the localized instances, so ratios mean R^d ratios
        family = _Family(config, config.young_theta.m + 1, False, center=0.15, widths=(0.08, 0.12))

        def evaluate(x, freqs):
            *fs, g = family.build(x, freqs)
            return young_check(fs, g, config.young_theta, config.young_ps, config.r).ratio

    else:
        raise ValueError(f"unknown objective {objective!r}; choose from {OBJECTIVES}")
    return family, evaluate


def ratio_search(
    config: ExperimentConfig,
    objective: str,
    budget: int,
    restart_every: int = RESTART_EVERY,
    step: float = 0.1,
) -> SearchTrace:
    """Maximize the ratio by random restarts plus coordinate moves.

    Each restart draws a start point and runs greedy coordinate search: try
    ``x_i ± step``, keep an improvement, halve the step after a full sweep
    without one.  ``curve[k]`` is the best ratio after k + 1 evaluations.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    family, evaluate = _objective(config, objective)
    rng = instance_rng(config.seed, f"search/{objective}", 0)
    best, best_x = -math.inf, None
    curve, history = [], []
    restarts = 0
    used = 0
    while used < budget:
        restarts += 1
        x = family.sample(rng)
        freqs = rng.integers(-2, 3, size=(family.n_funcs * BUMPS, config.grid.d))
        cur = evaluate(x, freqs)
        used += 1
        local_used = 1
        history.append(cur)
        if cur > best:
            best, best_x = cur, (x.copy(), freqs.copy())
        curve.append(best)
        h = step
        coord, sign, stale = 0, 1.0, 0
        while used < budget and local_used < restart_every:
            trial = x.copy()
            trial[coord] += sign * h
            trial = family.clip(trial)
            val = evaluate(trial, freqs)
            used += 1
            local_used += 1
            history.append(val)
            if val > cur:
                x, cur, stale = trial, val, 0
            else:
                stale += 1
                if sign > 0:
                    sign = -1.0
                else:
                    sign = 1.0
                    coord = (coord + 1) % family.size
                if stale >= 2 * family.size:
                    h *= 0.5
                    stale = 0
            if cur > best:
                best, best_x = cur, (x.copy(), freqs.copy())
            curve.append(best)
    params = [float(v) for v in best_x[0]]
    freqs = best_x[1].tolist()
    return SearchTrace(
        objective,
        float(best),
        params,
        [float(c) for c in curve],
        freqs,
        used,
        instance_seed(config.seed, f"search/{objective}", 0),
        restarts,
        [float(v) for v in history],
    )
