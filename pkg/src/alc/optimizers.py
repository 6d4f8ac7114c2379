"""Gradient-free optimizers over a box-initialized flat parameter vector.

``optimize_ifox`` is the improved fox-hunting search: a single incumbent, an
annealed step-size alpha that decays from 1 to 1/(2*epochs), and per agent
either an additive perturbation around the incumbent (probability alpha) or a
multiplicative contraction of the incumbent scaled by the epoch jump term.

``optimize_fox`` is the original algorithm kept as a baseline: a static 50/50
split between an exploitation move built from distance and jump terms and an
exploration move scaled by the running minimum mean time. ``optimize_random``
is plain random search with the same evaluation budget, kept as a control.

Agents are deliberately not clamped back into the init box after moves; the
box only shapes the initial population. All draws come from one stream per
run in a fixed serial order (epoch-major, agent-minor), so results are fully
determined by the config.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ParameterError
from .numkit import RngStream

GRAVITY_HALF = 4.905  # half of 9.81


@dataclass(frozen=True)
class OptimizerConfig:
    epochs: int
    agents: int
    dim: int
    lower: float
    upper: float
    seed: int

    def __post_init__(self):
        if self.epochs < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if self.agents < 2:
            raise ParameterError(f"agents must be >= 2, got {self.agents}")
        if self.dim < 1:
            raise ParameterError(f"dim must be >= 1, got {self.dim}")
        if not self.lower < self.upper:
            raise ParameterError(f"need lower < upper, got [{self.lower}, {self.upper}]")


@dataclass
class OptimizerRun:
    """Result of one run: incumbent, per-epoch best-fitness history, counters."""

    best_x: np.ndarray
    best_f: float
    history: np.ndarray
    evals: int
    wall_time: float


def alpha_schedule(it, epochs):
    """Annealed step size for epoch ``it`` (0-based): alpha decays to alpha_min."""
    if not 0 <= it < epochs:
        raise ParameterError(f"epoch index {it} outside [0, {epochs})")
    alpha_min = 1.0 / (2.0 * epochs)
    alpha = alpha_min + (1.0 - alpha_min) * (1.0 - it / epochs)
    return alpha_min, alpha


def jump(t):
    """Jump magnitude for mean time t."""
    if t < 0:
        raise ParameterError(f"time must be non-negative, got {t}")
    return GRAVITY_HALF * t * t


def _check_finite(value, optimizer, epoch, agent):
    if not math.isfinite(value):
        raise NumericError(
            f"{optimizer}: objective returned {value!r} at epoch {epoch}, agent {agent}"
        )


def _evaluate_population(objective, positions, best_x, best_f, epoch, name):
    for a in range(positions.shape[0]):
        value = float(objective(positions[a]))
        _check_finite(value, name, epoch, a)
        if value < best_f:
            best_f = value
            best_x = positions[a].copy()
    return best_x, best_f


def optimize_ifox(objective, cfg):
    start = time.perf_counter()
    rng = RngStream(cfg.seed)
    positions = rng.uniform(cfg.lower, cfg.upper, size=(cfg.agents, cfg.dim))
    best_x = None
    best_f = math.inf
    history = np.empty(cfg.epochs)
    for it in range(cfg.epochs):
        best_x, best_f = _evaluate_population(objective, positions, best_x, best_f, it, "ifox")
        _, alpha = alpha_schedule(it, cfg.epochs)
        t = 0.5 * rng.uniform(0.0, 1.0, cfg.dim).mean()
        jump_term = jump(t)
        for a in range(cfg.agents):
            beta = rng.uniform(-alpha, alpha, cfg.dim)
            if rng.uniform(0.0, 1.0) < alpha:
                positions[a] = best_x + beta * alpha
            else:
                positions[a] = 0.5 * best_x * (beta * alpha) / jump_term
        history[it] = best_f
    return OptimizerRun(
        best_x=best_x,
        best_f=best_f,
        history=history,
        evals=cfg.epochs * cfg.agents,
        wall_time=time.perf_counter() - start,
    )


def optimize_fox(objective, cfg):
    start = time.perf_counter()
    rng = RngStream(cfg.seed)
    positions = rng.uniform(cfg.lower, cfg.upper, size=(cfg.agents, cfg.dim))
    best_x = None
    best_f = math.inf
    min_time = 1.0
    history = np.empty(cfg.epochs)
    for it in range(cfg.epochs):
        best_x, best_f = _evaluate_population(objective, positions, best_x, best_f, it, "fox")
        # 1-based iteration in the exploration adjustment term
        adjustment = 2.0 * ((it + 1) - 1.0 / cfg.epochs)
        epoch_mean_times = np.empty(cfg.agents)
        for a in range(cfg.agents):
            # Fixed draw block per agent keeps the stream layout independent
            # of which branch fires.
            times = rng.uniform(0.0, 1.0, cfg.dim)
            mean_time = times.mean()
            epoch_mean_times[a] = mean_time
            branch = rng.uniform(0.0, 1.0)
            direction_p = rng.uniform(0.0, 1.0)
            walk = rng.uniform(0.0, 1.0, cfg.dim)
            if branch < 0.5:
                # Exploitation: sound-travel distance reduces to the incumbent
                # itself (time cancels), then scale by jump and direction.
                distance_fox = 0.5 * best_x
                jump_term = 0.5 * 9.81 * 0.5 * mean_time * mean_time
                direction = 0.18 if direction_p > 0.18 else 0.82
                positions[a] = distance_fox * jump_term * direction
            else:
                positions[a] = best_x * walk * min_time * adjustment
        min_time = min(min_time, float(epoch_mean_times.mean()))
        history[it] = best_f
    return OptimizerRun(
        best_x=best_x,
        best_f=best_f,
        history=history,
        evals=cfg.epochs * cfg.agents,
        wall_time=time.perf_counter() - start,
    )


def optimize_random(objective, cfg):
    """Uniform random search in the box; control with the same budget."""
    start = time.perf_counter()
    rng = RngStream(cfg.seed)
    best_x = None
    best_f = math.inf
    history = np.empty(cfg.epochs)
    for it in range(cfg.epochs):
        positions = rng.uniform(cfg.lower, cfg.upper, size=(cfg.agents, cfg.dim))
        best_x, best_f = _evaluate_population(objective, positions, best_x, best_f, it, "random")
        history[it] = best_f
    return OptimizerRun(
        best_x=best_x,
        best_f=best_f,
        history=history,
        evals=cfg.epochs * cfg.agents,
        wall_time=time.perf_counter() - start,
    )


OPTIMIZERS = {
    "ifox": optimize_ifox,
    "fox": optimize_fox,
    "random": optimize_random,
}


@dataclass
class MultiRunStats:
    """Aggregate of repeated independent runs with derived seeds."""

    optimizer: str
    best_values: np.ndarray
    mean: float
    std: float
    min: float
    runs: list = field(default_factory=list)


def multi_run(optimizer_id, objective, cfg, runs):
    """Execute ``runs`` independent runs with seeds cfg.seed + i."""
    if optimizer_id not in OPTIMIZERS:
        raise ParameterError(
            f"unknown optimizer {optimizer_id!r}; expected one of {sorted(OPTIMIZERS)}"
        )
    if runs < 1:
        raise ParameterError(f"runs must be >= 1, got {runs}")
    optimize = OPTIMIZERS[optimizer_id]
    results = []
    for i in range(runs):
        run_cfg = OptimizerConfig(
            epochs=cfg.epochs,
            agents=cfg.agents,
            dim=cfg.dim,
            lower=cfg.lower,
            upper=cfg.upper,
            seed=cfg.seed + i,
        )
        results.append(optimize(objective, run_cfg))
    best_values = np.array([r.best_f for r in results])
    return MultiRunStats(
        optimizer=optimizer_id,
        best_values=best_values,
        mean=float(best_values.mean()),
        std=float(best_values.std()),
        min=float(best_values.min()),
        runs=results,
    )
