"""Bayesian estimation of the defect angle from repeated defect-site clicks.

An experiment at step count t repeats the walk M times and records how often
the walker is detected at the defect; the count is binomial in the true
arrival probability P0(t).  The posterior over a uniform grid of candidate
theta02 values multiplies the binomial likelihood (computed from the clean
defect-only walk model) by the flat prior and normalizes in log space.
The mean squared relative error (posterior variance plus squared bias,
normalized by theta02^2) is the figure of merit and should fall as t^-2 at
the Heisenberg limit.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels, metrology
from .walk import WalkParams, WalkerState, default_initial_state, per_step_fields

RNG_NAME = "numpy-pcg64"  # np.random.default_rng's generator

DEFAULT_GRID_POINTS = 201
DEFAULT_TRIALS = 1000


@dataclass
class PosteriorGrid:
    candidates: np.ndarray
    log_weights: np.ndarray
    normalized: bool

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    @property
    def mean(self) -> float:
        return float((self.weights * self.candidates).sum())

    @property
    def variance(self) -> float:
        return float((self.weights * (self.candidates - self.mean) ** 2).sum())

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def mode(self) -> float:
        return float(self.candidates[int(np.argmax(self.log_weights))])


@dataclass
class EstimationRecord:
    step: int
    trials: int
    successes: int
    msre: float
    posterior_mean: float
    posterior_std: float


@dataclass(frozen=True)
class EstimationConfig:
    params: WalkParams  # true walk, including the theta02 to be estimated
    prior_interval: tuple[float, float]
    schedule: tuple[int, ...]
    grid_points: int = DEFAULT_GRID_POINTS
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    repetitions: int = 1  # experiments averaged per scheduled step

    def __post_init__(self):
        lo, hi = self.prior_interval
        if not lo < hi:
            raise ValueError(f"prior interval must satisfy lo < hi, got ({lo}, {hi})")
        if self.grid_points < 11:
            raise ValueError(f"grid_points must be >= 11, got {self.grid_points}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if not self.schedule or any(t < 1 for t in self.schedule):
            raise ValueError("schedule must be a non-empty sequence of steps >= 1")
        object.__setattr__(self, "schedule", tuple(int(t) for t in self.schedule))

    def candidates(self) -> np.ndarray:
        lo, hi = self.prior_interval
        return np.linspace(lo, hi, self.grid_points)


@dataclass
class EstimationCurve:
    records: list[EstimationRecord]
    fit: metrology.ScalingFit | None  # slope of log msre vs log t; None below 5 records
    posteriors: list[PosteriorGrid] | None = None


def defect_probability_series(
    params: WalkParams, initial: WalkerState, steps: int, coin_fields=None
) -> np.ndarray:
    """P0(t) for t = 0..steps (state-only propagation, no derivative)."""
    fields = per_step_fields(params, steps, coin_fields)
    defect = params.defect_index
    current = initial.grid().copy()  # ping-pong buffers must not alias the caller's state
    scratch = np.empty_like(current)
    probs = np.empty(steps + 1)
    probs[0] = (np.abs(current[defect]) ** 2).sum()
    prev_field = None
    tables = None
    for t in range(steps):
        field = fields[t]
        if field is not prev_field:
            tables = field.half_angle_tables()
            prev_field = field
        kernels.split_step(current, *tables, scratch)
        current, scratch = scratch, current
        probs[t + 1] = (np.abs(current[defect]) ** 2).sum()
    return probs


def _with_defect_angle(field, defect_index, angle):
    angles2 = field.angles2.copy()
    angles2[defect_index] = angle
    return type(field)(field.angles1, angles2)


def candidate_probability_table(
    params_template: WalkParams, candidates: np.ndarray, schedule, coin_fields=None
) -> np.ndarray:
    """P0(t; candidate) for every scheduled t, shape (len(schedule), n_candidates).

    One walk per candidate covers all scheduled steps; this table is the
    expensive part of estimation and is reused across trials and experiments.
    With ``coin_fields`` the candidate walks run on those (possibly
    disordered) bulk angles, each candidate replacing only the defect entry.
    """
    schedule = [int(t) for t in schedule]
    t_max = max(schedule)
    initial = default_initial_state(params_template.lattice_size)
    defect = params_template.defect_index
    base_fields = per_step_fields(params_template, t_max, coin_fields)
    table = np.empty((len(schedule), len(candidates)))
    for j, theta02 in enumerate(candidates):
        params_j = replace(params_template, theta02=float(theta02))
        rewritten = {}
        fields_j = [
            rewritten.setdefault(id(f), _with_defect_angle(f, defect, params_j.theta02))
            for f in base_fields
        ]
        series = defect_probability_series(params_j, initial, t_max, fields_j)
        table[:, j] = series[schedule]
    return table


def informative_schedule(
    params_template: WalkParams,
    prior_interval,
    t_min: int,
    t_max: int,
    n_points: int = 8,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> tuple[int, ...]:
    """Measurement times at which a single-shot experiment identifies theta02.

    The defect-site probability responds to theta02 through a phase that
    winds with t, so at many step counts the response over the prior window
    is flat or folds back on itself and the posterior degenerates (flat or
    multimodal).  This selector splits [t_min, t_max] into n_points blocks
    and picks, per block, the step with the least fold ambiguity (monotone
    responses win outright), widest response span breaking ties.  It uses
    only the walk model over the prior, never measurement data, so it is
    ordinary Bayesian experiment design.
    """
    lo, hi = prior_interval
    if not lo < hi:
        raise ValueError(f"prior interval must satisfy lo < hi, got ({lo}, {hi})")
    if not 1 <= t_min < t_max:
        raise ValueError(f"need 1 <= t_min < t_max, got ({t_min}, {t_max})")
    candidates = np.linspace(lo, hi, grid_points)
    steps = list(range(t_min, t_max + 1))
    table = candidate_probability_table(params_template, candidates, steps)
    span = table.max(axis=1) - table.min(axis=1)
    penalty = np.array([_fold_ambiguity(col) for col in table])
    edges = np.linspace(t_min, t_max + 1, n_points + 1)
    schedule = []
    for b in range(n_points):
        block = [i for i, t in enumerate(steps) if edges[b] <= t < edges[b + 1]]
        if not block:
            continue
        best = min(block, key=lambda i: (penalty[i], -span[i]))
        schedule.append(steps[best])
    return tuple(dict.fromkeys(schedule))


def _fold_ambiguity(col):
    """Fraction of the response range shared by both flanks of a fold.

    0 for a monotone response (injective over the window); for a single fold
    it is the overlap of the two branches' value ranges, i.e. how much of the
    observable data is ambiguous between two candidate regions; multiple
    folds are treated as fully ambiguous.
    """
    diffs = np.diff(col)
    turns = np.where(diffs[1:] * diffs[:-1] < 0)[0]
    if turns.size == 0:
        return 0.0
    if turns.size > 1:
        return 1.0
    split = int(turns[0]) + 1
    left, right = col[: split + 1], col[split:]
    shared = min(left.max(), right.max()) - max(left.min(), right.min())
    full = col.max() - col.min()
    if full <= 0:
        return 1.0
    return max(0.0, float(shared / full))


def simulate_trials(
    params: WalkParams, t: int, trials: int, rng_seed, coin_fields=None
) -> int:
    """Draw the defect-site click count: Binomial(trials, P0(t)), seeded."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    initial = default_initial_state(params.lattice_size)
    p0 = defect_probability_series(params, initial, t, coin_fields)[t]
    rng = np.random.default_rng(rng_seed)
    return int(rng.binomial(trials, min(max(p0, 0.0), 1.0)))


def _log_likelihood(probs: np.ndarray, successes: int, trials: int) -> np.ndarray:
    """Binomial log-likelihood per candidate; impossible candidates get -inf.

    The binomial coefficient is constant across candidates and omitted.
    """
    probs = np.clip(probs, 0.0, 1.0)
    fails = trials - successes
    with np.errstate(divide="ignore", invalid="ignore"):
        log_p = np.where(probs > 0.0, np.log(np.where(probs > 0.0, probs, 1.0)), -np.inf)
        log_q = np.where(probs < 1.0, np.log1p(-np.where(probs < 1.0, probs, 0.0)), -np.inf)
    out = np.zeros_like(probs)
    if successes > 0:
        out = out + successes * log_p
    if fails > 0:
        out = out + fails * log_q
    return out


def posterior(
    prior_interval,
    grid_points: int,
    t: int,
    trials: int,
    successes: int,
    params_template: WalkParams,
    probabilities: np.ndarray | None = None,
) -> PosteriorGrid:
    """Grid posterior over candidate theta02 values after one experiment.

    ``probabilities`` may carry precomputed P0(t; candidate) values (from
    candidate_probability_table) to skip the walks.  ``trials`` = 0 is
    allowed and returns the flat prior.
    """
    lo, hi = prior_interval
    if not lo < hi:
        raise ValueError(f"prior interval must satisfy lo < hi, got ({lo}, {hi})")
    if grid_points < 11:
        raise ValueError(f"grid_points must be >= 11, got {grid_points}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside 0..{trials}")
    candidates = np.linspace(lo, hi, grid_points)
    if probabilities is None:
        probabilities = candidate_probability_table(params_template, candidates, [t])[0]
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if probabilities.shape != candidates.shape:
        raise ValueError("probabilities length must match grid_points")
    log_w = _log_likelihood(probabilities, successes, trials)  # + constant log-prior
    peak = log_w.max()
    if not np.isfinite(peak):
        raise ValueError("data impossible under every candidate; posterior undefined")
    log_norm = peak + np.log(np.exp(log_w - peak).sum())
    return PosteriorGrid(candidates, log_w - log_norm, True)


def msre(grid: PosteriorGrid, true_theta02: float) -> float:
    """(variance + squared bias) / theta02^2 under the posterior."""
    if true_theta02 == 0:
        raise ZeroDivisionError("relative error undefined for true_theta02 = 0")
    if not grid.normalized:
        raise ValueError("posterior grid must be normalized")
    return (grid.variance + (grid.mean - true_theta02) ** 2) / true_theta02**2


def record_seed(
    config: EstimationConfig, prefix: tuple, repetition: int, index: int
) -> np.random.SeedSequence:
    """Splitting rule: SeedSequence(master, spawn_key=prefix + (repetition, index))."""
    return np.random.SeedSequence(
        config.master_seed, spawn_key=tuple(prefix) + (repetition, index)
    )


def estimation_curve(
    config: EstimationConfig,
    data_coin_fields=None,
    seed_prefix: tuple = (),
    candidate_table: np.ndarray | None = None,
    keep_posteriors: bool = False,
) -> EstimationCurve:
    """Fresh M-trial experiments at each scheduled step; msre per record.

    With ``repetitions`` > 1 the msre and the posterior summaries at each
    step are means over that many independent experiments (the reported
    successes come from the first).  Data are drawn from the true walk
    (optionally disordered via ``data_coin_fields``); the likelihood uses
    the clean defect-only model unless a precomputed ``candidate_table``
    says otherwise.
    """
    t_max = max(config.schedule)
    initial = default_initial_state(config.params.lattice_size)
    p_true = defect_probability_series(config.params, initial, t_max, data_coin_fields)
    candidates = config.candidates()
    if candidate_table is None:
        candidate_table = candidate_probability_table(
            config.params, candidates, config.schedule
        )
    records = []
    grids = [] if keep_posteriors else None
    for i, t in enumerate(config.schedule):
        p_t = min(max(p_true[t], 0.0), 1.0)
        errors, means, stds = [], [], []
        first_m = None
        for rep in range(config.repetitions):
            rng = np.random.default_rng(record_seed(config, seed_prefix, rep, i))
            m = int(rng.binomial(config.trials, p_t))
            grid = posterior(
                config.prior_interval, config.grid_points, t, config.trials, m,
                config.params, probabilities=candidate_table[i],
            )
            if rep == 0:
                first_m = m
                if grids is not None:
                    grids.append(grid)
            errors.append(msre(grid, config.params.theta02))
            means.append(grid.mean)
            stds.append(grid.std)
        records.append(
            EstimationRecord(
                step=t, trials=config.trials, successes=first_m,
                msre=float(np.mean(errors)),
                posterior_mean=float(np.mean(means)),
                posterior_std=float(np.mean(stds)),
            )
        )
    try:
        fit = metrology.power_law_fit(
            [r.step for r in records], [r.msre for r in records],
            window=(min(config.schedule), max(config.schedule)),
        )
    except ValueError:
        fit = None  # fewer than 5 usable records
    return EstimationCurve(records, fit, grids)
