"""Fisher information of the defect measurement and its scaling in time.

Three information measures are computed from one exactly propagated
(state, derivative) trajectory:

* defect-site FI:  (dP0/dtheta02)^2 / [P0 (1 - P0)] from the binary
  "walker at the defect?" measurement,
* global FI:       sum_i (dPi/dtheta02)^2 / Pi over the position
  distribution,
* quantum FI:      4 (<dpsi|dpsi> - |<dpsi|psi>|^2), the measurement
  optimum for the pure state.

They obey FI <= GFI <= QFI pointwise.  Power-law growth FI ~ t^b is
extracted by least squares in log-log coordinates; b = 2 is the Heisenberg
limit, b = 1 the shot-noise limit.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .walk import WalkParams, WalkerState, per_step_fields

P_FLOOR = 1e-12

DEFECT_SITE_FI = "defect_site_fi"
GLOBAL_FI = "global_fi"
QUANTUM_FI = "quantum_fi"
AVERAGED_FI = "averaged_fi"

ALL_POINTS = "all_points"
PEAKS_ONLY = "peaks_only"

DEFAULT_FIT_T_MIN = 10


@dataclass
class FisherSeries:
    steps: np.ndarray
    values: np.ndarray
    kind: str
    params: WalkParams
    flagged: np.ndarray  # True where P0 was degenerate and FI pinned to 0

    def __post_init__(self):
        self.steps = np.asarray(self.steps)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.flagged is None:
            self.flagged = np.zeros(self.values.shape, dtype=bool)
        self.flagged = np.asarray(self.flagged, dtype=bool)
        if not (self.steps.shape == self.values.shape == self.flagged.shape):
            raise ValueError("steps, values and flagged must have matching shapes")


@dataclass
class ScalingFit:
    exponent: float
    prefactor: float
    r_squared: float
    fit_window: tuple[float, float]
    mode: str
    n_points: int

    def value_at(self, t) -> float:
        return self.prefactor * np.asarray(t, dtype=np.float64) ** self.exponent


def pair_trajectory(
    params: WalkParams,
    initial: WalkerState,
    steps: int,
    coin_fields=None,
):
    """States and theta02-derivatives for t = 0..steps as (T+1, N, 2) arrays."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    n = params.lattice_size
    if initial.lattice_size != n:
        raise ValueError("initial state lattice size does not match params")
    fields = per_step_fields(params, steps, coin_fields)
    defect = params.defect_index
    states = np.zeros((steps + 1, n, 2), dtype=np.complex128)
    dstates = np.zeros_like(states)
    states[0] = initial.grid()
    prev_field = None
    tables = None
    for t in range(steps):
        field = fields[t]
        if field.lattice_size != n:
            raise ValueError("coin field length does not match lattice size")
        if field is not prev_field:
            tables = field.half_angle_tables()
            prev_field = field
        kernels.split_step_pair(
            states[t], dstates[t], *tables, defect, states[t + 1], dstates[t + 1]
        )
    return states, dstates


def _defect_probabilities(states, dstates, defect):
    p0 = (np.abs(states[:, defect, :]) ** 2).sum(axis=1)
    dp0 = 2.0 * np.real(
        np.conj(states[:, defect, :]) * dstates[:, defect, :]
    ).sum(axis=1)
    return p0, dp0


def binary_fisher(p0, dp0):
    """FI of the binary "walker at the defect?" outcome: dp0^2 / [p0 (1-p0)].

    Returns (values, degenerate_flags); probabilities within P_FLOOR of 0 or
    1 carry no information and the quotient is singular there, so those
    entries are 0 and flagged.
    """
    p0 = np.asarray(p0, dtype=np.float64)
    dp0 = np.asarray(dp0, dtype=np.float64)
    degenerate = (p0 < P_FLOOR) | (p0 > 1.0 - P_FLOOR)
    safe = np.where(degenerate, 0.5, p0)
    values = np.where(degenerate, 0.0, dp0**2 / (safe * (1.0 - safe)))
    return values, degenerate


def fisher_at_defect(
    params: WalkParams, initial: WalkerState, steps: int, coin_fields=None
) -> FisherSeries:
    """FI(t) of the defect-site measurement for t = 0..steps.

    Degenerate points (P0 within P_FLOOR of 0 or 1, where the binary
    measurement carries no information and the quotient is singular) are
    emitted as 0 and flagged.
    """
    states, dstates = pair_trajectory(params, initial, steps, coin_fields)
    p0, dp0 = _defect_probabilities(states, dstates, params.defect_index)
    values, degenerate = binary_fisher(p0, dp0)
    return FisherSeries(np.arange(steps + 1), values, DEFECT_SITE_FI, params, degenerate)


def global_fisher(
    params: WalkParams, initial: WalkerState, steps: int, coin_fields=None
) -> FisherSeries:
    """GFI(t) over the full position distribution, skipping P_i below floor."""
    states, dstates = pair_trajectory(params, initial, steps, coin_fields)
    probs = (np.abs(states) ** 2).sum(axis=2)
    dprobs = 2.0 * np.real(np.conj(states) * dstates).sum(axis=2)
    contrib = np.where(probs >= P_FLOOR, dprobs**2 / np.where(probs >= P_FLOOR, probs, 1.0), 0.0)
    values = contrib.sum(axis=1)
    return FisherSeries(np.arange(steps + 1), values, GLOBAL_FI, params, None)


def quantum_fisher(
    params: WalkParams, initial: WalkerState, steps: int, coin_fields=None
) -> FisherSeries:
    """QFI(t) = 4(<dpsi|dpsi> - |<dpsi|psi>|^2) from the exact derivative."""
    states, dstates = pair_trajectory(params, initial, steps, coin_fields)
    flat = states.reshape(states.shape[0], -1)
    dflat = dstates.reshape(dstates.shape[0], -1)
    dd = (np.abs(dflat) ** 2).sum(axis=1)
    overlap = (np.conj(dflat) * flat).sum(axis=1)
    values = 4.0 * (dd - np.abs(overlap) ** 2)
    return FisherSeries(np.arange(steps + 1), np.maximum(values, 0.0), QUANTUM_FI, params, None)


def averaged_fisher(series: FisherSeries, window: int = 5, spacing: int = 5) -> FisherSeries:
    """Multi-time average: mean of FI at `window` times spaced by `spacing`.

    Each output point sits at the mean of its constituent times; every start
    step whose full window lies inside the series contributes.
    """
    if window < 1 or spacing < 1:
        raise ValueError("window and spacing must be >= 1")
    index_of = {int(t): i for i, t in enumerate(series.steps)}
    span = (window - 1) * spacing
    centers, means, flags = [], [], []
    for t in series.steps:
        t = int(t)
        idx = [index_of.get(t + j * spacing) for j in range(window)]
        if any(i is None for i in idx):
            continue
        centers.append(t + span / 2.0)
        means.append(series.values[idx].mean())
        flags.append(bool(series.flagged[idx].all()))
    if not centers:
        raise ValueError(
            f"series too short for window={window}, spacing={spacing} averaging"
        )
    return FisherSeries(
        np.asarray(centers), np.asarray(means), AVERAGED_FI, series.params, np.asarray(flags)
    )


def power_law_fit(steps, values, window=None, mode: str = ALL_POINTS) -> ScalingFit:
    """Least-squares line on (log t, log v); returns exponent/prefactor/r^2."""
    steps = np.asarray(steps, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if mode == PEAKS_ONLY:
        interior = np.zeros(values.shape, dtype=bool)
        if values.size > 2:
            interior[1:-1] = (values[1:-1] > values[:-2]) & (values[1:-1] > values[2:])
        steps, values = steps[interior], values[interior]
    elif mode != ALL_POINTS:
        raise ValueError(f"unknown fit mode {mode!r}")
    if window is None:
        window = (DEFAULT_FIT_T_MIN, float(steps.max()) if steps.size else DEFAULT_FIT_T_MIN)
    usable = (steps >= window[0]) & (steps <= window[1]) & (steps > 0) & (values > 0)
    steps, values = steps[usable], values[usable]
    if steps.size < 5:
        raise ValueError(f"need at least 5 usable points in window, got {steps.size}")
    log_t = np.log(steps)
    log_v = np.log(values)
    slope, intercept = np.polyfit(log_t, log_v, 1)
    fitted = slope * log_t + intercept
    ss_res = float(((log_v - fitted) ** 2).sum())
    ss_tot = float(((log_v - log_v.mean()) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ScalingFit(
        float(slope), float(np.exp(intercept)), r_squared,
        (float(window[0]), float(window[1])), mode, int(steps.size),
    )


def fit_scaling(series: FisherSeries, mode: str = ALL_POINTS, window=None) -> ScalingFit:
    """Power-law fit of a Fisher series; flagged/zero points are excluded."""
    keep = ~series.flagged
    return power_law_fit(series.steps[keep], series.values[keep], window, mode)
