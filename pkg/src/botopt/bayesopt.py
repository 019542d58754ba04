"""Sequential model-based search over a bounded hyperparameter space.

The loop is standard: a seeded Latin-hypercube design seeds the surrogate,
then each iteration fits a GP to all observations (targets standardized to
zero mean and unit variance), maximizes Expected Improvement over a cloud
of uniform random candidates in the unit cube, and evaluates the winner.
Integer dimensions are optimized continuously and rounded at evaluation
time; rounded configurations are cached so a duplicate proposal never
re-runs the objective.

Everything is deterministic given (space, budget, n_init, seed, objective):
per-stage generators are derived from the seed, and candidate scoring ties
resolve to the earliest candidate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .gp import GPModel, default_kernel_grid, gp_fit, gp_predict_batch, tune_kernel

__all__ = [
    "Dim",
    "SearchSpace",
    "Trial",
    "Trace",
    "expected_improvement",
    "propose_next",
    "optimize",
    "write_trace",
    "default_dt_space",
]

DEFAULT_XI = 0.01
DEFAULT_CANDIDATES = 1000
DEFAULT_NOISE = 1e-6
RETUNE_EVERY = 5


@dataclass(frozen=True)
class Dim:
    name: str
    kind: str  # "integer" | "continuous"
    lower: float
    upper: float

    def __post_init__(self):
        if self.kind not in ("integer", "continuous"):
            raise ValueError(f"unknown dimension kind {self.kind!r}")
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower bound {self.lower} must be < upper {self.upper}")
        if self.kind == "integer" and (self.lower != int(self.lower) or self.upper != int(self.upper)):
            raise ValueError(f"{self.name}: integer dimension needs integer bounds")


@dataclass(frozen=True)
class SearchSpace:
    dims: tuple[Dim, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        if not self.dims:
            raise ValueError("search space has no dimensions")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)


@dataclass(frozen=True)
class Trial:
    config: dict
    objective: float
    index: int
    failed: bool = False


@dataclass(frozen=True)
class Trace:
    trials: tuple[Trial, ...]
    best: Trial = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "trials", tuple(self.trials))
        if not self.trials:
            raise ValueError("trace has no trials")
        best = self.trials[0]
        for t in self.trials[1:]:
            if t.objective > best.objective:
                best = t
        object.__setattr__(self, "best", best)


def expected_improvement(mean: float, std: float, best_so_far: float, xi: float = 0.0) -> float:
    """E[max(Y - best_so_far - xi, 0)] for Y ~ N(mean, std^2); 0 when std = 0."""
    if std < 0:
        raise ValueError(f"std must be non-negative, got {std}")
    if std == 0.0:
        return 0.0
    improve = mean - best_so_far - xi
    z = min(max(improve / std, -1e8), 1e8)  # cdf/pdf are exactly 0/1 out here
    return float(max(improve * norm.cdf(z) + std * norm.pdf(z), 0.0))


def _ei_vector(mean: np.ndarray, std: np.ndarray, best_so_far: float, xi: float) -> np.ndarray:
    improve = mean - best_so_far - xi
    out = np.zeros_like(mean)
    pos = std > 0.0
    z = np.clip(improve[pos] / std[pos], -1e8, 1e8)
    out[pos] = improve[pos] * norm.cdf(z) + std[pos] * norm.pdf(z)
    return np.maximum(out, 0.0)


def _to_native(space: SearchSpace, u: np.ndarray) -> dict:
    """Map a unit-cube point to native bounds; integer dims round half-up."""
    config = {}
    for dim, ui in zip(space.dims, u):
        raw = dim.lower + float(ui) * (dim.upper - dim.lower)
        if dim.kind == "integer":
            val = int(np.floor(raw + 0.5))
            config[dim.name] = int(min(max(val, dim.lower), dim.upper))
        else:
            config[dim.name] = float(min(max(raw, dim.lower), dim.upper))
    return config


def _to_unit(space: SearchSpace, config: dict) -> np.ndarray:
    return np.array(
        [(config[d.name] - d.lower) / (d.upper - d.lower) for d in space.dims],
        dtype=np.float64,
    )


def _key(space: SearchSpace, config: dict) -> tuple:
    return tuple(config[d.name] for d in space.dims)


def latin_hypercube(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n stratified points in the unit cube, one per stratum per dimension."""
    u = np.empty((n, d))
    for j in range(d):
        u[:, j] = (rng.permutation(n) + rng.random(n)) / n
    return u


def propose_next(
    m: GPModel,
    space: SearchSpace,
    best_so_far: float,
    seed: int,
    n_candidates: int = DEFAULT_CANDIDATES,
    xi: float = DEFAULT_XI,
) -> dict:
    """EI-argmax over seeded uniform candidates, mapped back to native bounds.

    best_so_far must live in the same target space as the model (here: the
    standardized objective). Ties go to the earliest candidate drawn.
    """
    rng = np.random.default_rng(seed)
    cands = rng.random((n_candidates, len(space.dims)))
    mean, var = gp_predict_batch(m, cands)
    ei = _ei_vector(mean, np.sqrt(var), best_so_far, xi)
    return _to_native(space, cands[int(np.argmax(ei))])


def optimize(
    objective,
    space: SearchSpace,
    budget: int,
    n_init: int | None = None,
    seed: int = 0,
    n_candidates: int = DEFAULT_CANDIDATES,
    xi: float = DEFAULT_XI,
    noise: float = DEFAULT_NOISE,
) -> Trace:
    """Maximize objective(config) over the space within an evaluation budget.

    The first n_init trials (default max(5, 2 * dims)) come from a Latin
    hypercube; the rest from propose_next. A proposal whose rounded config
    was already evaluated is replaced by one fresh uniform candidate; if
    that also repeats, the trial is recorded with the cached objective and
    the objective is not called again. A raising objective records a failed
    trial at one unit below the worst value seen so far and the loop keeps
    going.
    """
    d = len(space.dims)
    if n_init is None:
        n_init = max(5, 2 * d)
    if not budget >= n_init >= 1:
        raise ValueError(f"need budget >= n_init >= 1, got budget={budget}, n_init={n_init}")

    init_rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    sub_rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))

    trials: list[Trial] = []
    units: list[np.ndarray] = []
    cache: dict[tuple, tuple[float, bool]] = {}

    def record(config: dict, index: int) -> None:
        key = _key(space, config)
        if key in cache:
            value, failed = cache[key]
        else:
            try:
                value, failed = float(objective(config)), False
            except Exception:
                worst = min((t.objective for t in trials), default=0.0)
                value, failed = worst - 1.0, True
            cache[key] = (value, failed)
        trials.append(Trial(config=config, objective=value, index=index, failed=failed))
        units.append(_to_unit(space, config))

    for i, u in enumerate(latin_hypercube(n_init, d, init_rng)):
        record(_to_native(space, u), i)

    kp = None
    for i in range(n_init, budget):
        U = np.vstack(units)
        y = np.array([t.objective for t in trials])
        sigma = float(np.std(y))
        y_std = (y - float(np.mean(y))) / (sigma if sigma > 0 else 1.0)
        if kp is None or (len(trials) - n_init) % RETUNE_EVERY == 0:
            kp = tune_kernel(U, y_std, default_kernel_grid(), noise)
        model = gp_fit(U, y_std, kp, noise)

        prop_seed = int(np.random.SeedSequence([seed, 1, i]).generate_state(1)[0])
        config = propose_next(model, space, float(y_std.max()), prop_seed, n_candidates, xi)
        if _key(space, config) in cache:
            config = _to_native(space, sub_rng.random(d))
        record(config, i)

    return Trace(trials=tuple(trials))


def write_trace(trace: Trace, path, space: SearchSpace | None = None) -> None:
    """Trial-per-row delimited export: index, config, objective, running best."""
    names = list(space.names) if space is not None else sorted(trace.trials[0].config)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", *names, "objective", "running_best", "failed"])
        running = -np.inf
        for t in trace.trials:
            running = max(running, t.objective)
            writer.writerow(
                [t.index, *[repr(t.config[n]) for n in names], repr(t.objective), repr(running), int(t.failed)]
            )


def default_dt_space() -> SearchSpace:
    """Decision-tree hyperparameter box used by the detection pipeline."""
    return SearchSpace(
        dims=(
            Dim("max_depth", "integer", 1, 50),
            Dim("min_samples_split", "integer", 2, 100),
            Dim("min_samples_leaf", "integer", 1, 50),
            Dim("max_features_fraction", "continuous", 0.05, 1.0),
        )
    )
