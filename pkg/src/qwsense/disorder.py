"""Coin-angle disorder: static (per-site) and dynamic (per-step) ensembles.

Static disorder draws every site's two coin angles independently and
uniformly from [theta_i - w, theta_i + w], fixed for the whole run; dynamic
disorder redraws one (theta1, theta2) pair per step, shared by all sites.
The defect entry theta02 is never disordered: it is the estimand.  All draws
are deterministic functions of (master_seed, realization_index) through
numpy's SeedSequence spawn keys, so realizations are order-independent.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import bayes, metrology
from .walk import CoinField, WalkParams, WalkerState

STATIC = "static"
DYNAMIC = "dynamic"

OBSERVABLE_FI = "fi"
OBSERVABLE_MSRE = "msre"

DEFAULT_HALF_WIDTH = math.pi / 20.0
DEFAULT_REALIZATIONS = 10


@dataclass(frozen=True)
class DisorderSpec:
    kind: str
    half_width: float = DEFAULT_HALF_WIDTH
    n_realizations: int = DEFAULT_REALIZATIONS
    master_seed: int = 0

    def __post_init__(self):
        if self.kind not in (STATIC, DYNAMIC):
            raise ValueError(f"kind must be '{STATIC}' or '{DYNAMIC}', got {self.kind!r}")
        if self.half_width < 0:
            raise ValueError(f"half_width must be >= 0, got {self.half_width}")
        if self.n_realizations < 1:
            raise ValueError(f"n_realizations must be >= 1, got {self.n_realizations}")


@dataclass
class EnsembleResult:
    steps: np.ndarray
    mean: np.ndarray
    std: np.ndarray  # population standard deviation over realizations
    realizations: int
    observable_kind: str


def _realization_rng(spec: DisorderSpec, realization_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(spec.master_seed, spawn_key=(realization_index,))
    return np.random.default_rng(seq)


def sample_disorder(spec: DisorderSpec, base: WalkParams, realization_index: int, steps=None):
    """Disordered coin field(s) for one realization.

    Static returns a single CoinField; dynamic returns a list of per-step
    CoinFields and requires ``steps``.
    """
    if not 0 <= realization_index < spec.n_realizations:
        raise ValueError(
            f"realization_index {realization_index} outside 0..{spec.n_realizations - 1}"
        )
    rng = _realization_rng(spec, realization_index)
    n = base.lattice_size
    w = spec.half_width
    if spec.kind == STATIC:
        a1 = rng.uniform(base.theta1 - w, base.theta1 + w, size=n)
        a2 = rng.uniform(base.theta2 - w, base.theta2 + w, size=n)
        a2[base.defect_index] = base.theta02
        return CoinField(a1, a2)
    if steps is None or steps < 1:
        raise ValueError("dynamic disorder requires a positive step count")
    fields = []
    for _ in range(steps):
        t1 = rng.uniform(base.theta1 - w, base.theta1 + w)
        t2 = rng.uniform(base.theta2 - w, base.theta2 + w)
        a2 = np.full(n, t2)
        a2[base.defect_index] = base.theta02
        fields.append(CoinField(np.full(n, t1), a2))
    return fields


def _realization_fields(spec, base, index, steps):
    if spec.half_width == 0.0:
        # exact zero-width collapse: byte-identical to the clean run
        return CoinField.from_params(base)
    return sample_disorder(spec, base, index, steps)


def ensemble_fisher(
    spec: DisorderSpec,
    base: WalkParams,
    initial: WalkerState,
    steps: int,
    threads: int = 1,
) -> EnsembleResult:
    """Per-step mean and std of the defect-site FI over disorder realizations."""

    def one(index):
        fields = _realization_fields(spec, base, index, steps)
        return metrology.fisher_at_defect(base, initial, steps, coin_fields=fields).values

    values = np.stack(_map(one, range(spec.n_realizations), threads))
    return EnsembleResult(
        np.arange(steps + 1), values.mean(axis=0), values.std(axis=0),
        spec.n_realizations, OBSERVABLE_FI,
    )


def ensemble_msre(
    spec: DisorderSpec,
    config: "bayes.EstimationConfig",
    threads: int = 1,
    likelihood: str = "matched",
) -> EnsembleResult:
    """Per-step mean and std of the estimation error over disorder realizations.

    Measured data always come from the disordered walk.  With the default
    ``matched`` likelihood the candidate grid runs on the same realized bulk
    angles (the estimator models its own device, varying only the defect
    angle), so the error tracks the disordered Fisher information.  The
    ``clean`` alternative keeps the defect-only likelihood model; disorder
    then enters as model mismatch whose bias floors the error at large t.
    """
    if likelihood not in ("matched", "clean"):
        raise ValueError(f"likelihood must be 'matched' or 'clean', got {likelihood!r}")
    steps = max(config.schedule)
    clean_table = None
    if likelihood == "clean":
        # realization-independent; compute once
        clean_table = bayes.candidate_probability_table(
            config.params, config.candidates(), config.schedule
        )

    def one(index):
        fields = _realization_fields(spec, config.params, index, steps)
        if clean_table is not None:
            table = clean_table
        else:
            table = bayes.candidate_probability_table(
                config.params, config.candidates(), config.schedule, coin_fields=fields
            )
        curve = bayes.estimation_curve(
            config, data_coin_fields=fields, seed_prefix=(index,), candidate_table=table
        )
        return np.array([record.msre for record in curve.records])

    values = np.stack(_map(one, range(spec.n_realizations), threads))
    return EnsembleResult(
        np.asarray(config.schedule), values.mean(axis=0), values.std(axis=0),
        spec.n_realizations, OBSERVABLE_MSRE,
    )


def _map(fn, items, threads):
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def relative_std(result: EnsembleResult, t_min: float, t_max: float) -> float:
    """Mean of std/mean over the window, a disorder-fluctuation summary."""
    sel = (result.steps >= t_min) & (result.steps <= t_max) & (result.mean > 0)
    if not sel.any():
        raise ValueError("no usable points in window for relative std")
    return float((result.std[sel] / result.mean[sel]).mean())
