"""Split-step quantum walk core: state, parameters, coin fields, one-step unitary.

One step is U = T_down R2 T_up R1 on a periodic 1D lattice of N sites (N odd)
with a two-level coin.  The second coin layer carries a defect angle theta02
at physical position x = 0; everything downstream (Fisher information,
spectra, Bayesian estimation) is a function of this walk and of the exact
derivative of the evolved state with respect to theta02, which is propagated
jointly with the state by the product rule (no finite differences on the
production path).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

NORM_TOL = 1e-12

UP = 0
DOWN = 1
_COIN_LABELS = {"up": UP, "down": DOWN, UP: UP, DOWN: DOWN}


def _finite_scalar(theta) -> float:
    try:
        value = float(theta)
    except (TypeError, ValueError):
        raise ValueError(f"angle must be a finite scalar, got {theta!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"angle must be finite, got {theta!r}")
    return value


def wrap_angle(theta: float) -> float:
    """Canonicalize an angle into [-pi, pi].

    Angles already in [-pi, pi] are returned unchanged (both endpoints are
    kept: the coin rotation is 2*pi-antiperiodic, so at a defect site -pi and
    +pi are physically distinct).  Angles strictly outside are reduced by
    multiples of 2*pi into (-pi, pi].
    """
    theta = _finite_scalar(theta)
    if -math.pi <= theta <= math.pi:
        return float(theta)
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def _check_lattice_size(n) -> int:
    n = int(n)
    if n < 3 or n % 2 == 0:
        raise ValueError(f"lattice_size must be odd and >= 3, got {n}")
    return n


@dataclass(frozen=True)
class WalkParams:
    """Coin angles and lattice geometry defining the step unitary."""

    theta1: float
    theta2: float
    theta02: float
    lattice_size: int
    boundary: str = "periodic"

    def __post_init__(self):
        object.__setattr__(self, "theta1", wrap_angle(self.theta1))
        object.__setattr__(self, "theta2", wrap_angle(self.theta2))
        object.__setattr__(self, "theta02", wrap_angle(self.theta02))
        object.__setattr__(self, "lattice_size", _check_lattice_size(self.lattice_size))
        if self.boundary != "periodic":
            raise ValueError(f"only periodic boundaries are supported, got {self.boundary!r}")

    @property
    def defect_index(self) -> int:
        return (self.lattice_size - 1) // 2


@dataclass(frozen=True)
class WalkerState:
    """Complex amplitudes over the (position, coin) basis.

    ``amplitudes`` has length 2N with the coin pair (up, down) contiguous per
    site; site index i corresponds to physical position i - origin_offset.
    """

    amplitudes: np.ndarray
    lattice_size: int
    origin_offset: int

    def __post_init__(self):
        n = _check_lattice_size(self.lattice_size)
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2 * n,):
            raise ValueError(f"amplitudes must have shape ({2 * n},), got {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_position(cls, x: int, coin, lattice_size: int) -> "WalkerState":
        """Basis state |x, coin> with the defect-centered index convention."""
        n = _check_lattice_size(lattice_size)
        offset = (n - 1) // 2
        idx = x + offset
        if not 0 <= idx < n:
            raise ValueError(f"position {x} outside lattice of size {n}")
        amps = np.zeros(2 * n, dtype=np.complex128)
        amps[2 * idx + _COIN_LABELS[coin]] = 1.0
        return cls(amps, n, offset)

    def grid(self) -> np.ndarray:
        """Amplitudes viewed as (N, 2)."""
        return self.amplitudes.reshape(self.lattice_size, 2)

    def index_of(self, x: int) -> int:
        idx = x + self.origin_offset
        if not 0 <= idx < self.lattice_size:
            raise ValueError(f"position {x} outside lattice of size {self.lattice_size}")
        return idx

    def position_distribution(self) -> np.ndarray:
        return (np.abs(self.grid()) ** 2).sum(axis=1)


def default_initial_state(lattice_size: int) -> WalkerState:
    """|-1, down>, the initial state used throughout."""
    return WalkerState.from_position(-1, DOWN, lattice_size)


@dataclass(frozen=True)
class CoinField:
    """Per-site angles of the two coin layers (layer 2 carries the defect)."""

    angles1: np.ndarray
    angles2: np.ndarray

    def __post_init__(self):
        a1 = np.ascontiguousarray(self.angles1, dtype=np.float64)
        a2 = np.ascontiguousarray(self.angles2, dtype=np.float64)
        if a1.ndim != 1 or a1.shape != a2.shape:
            raise ValueError("coin layers must be 1D arrays of equal length")
        if not (np.isfinite(a1).all() and np.isfinite(a2).all()):
            raise ValueError("coin angles must be finite")
        object.__setattr__(self, "angles1", a1)
        object.__setattr__(self, "angles2", a2)

    @classmethod
    def from_params(cls, params: WalkParams) -> "CoinField":
        n = params.lattice_size
        a1 = np.full(n, params.theta1)
        a2 = np.full(n, params.theta2)
        a2[params.defect_index] = params.theta02
        return cls(a1, a2)

    @property
    def lattice_size(self) -> int:
        return self.angles1.shape[0]

    def half_angle_tables(self):
        """cos/sin tables consumed by the step kernels."""
        h1 = 0.5 * self.angles1
        h2 = 0.5 * self.angles2
        return np.cos(h1), np.sin(h1), np.cos(h2), np.sin(h2)


@dataclass(frozen=True)
class DerivativePair:
    """State and its exact derivative with respect to theta02 (unnormalized)."""

    state: WalkerState
    derivative: np.ndarray = field(default=None)

    def __post_init__(self):
        n = self.state.lattice_size
        der = self.derivative
        if der is None:
            der = np.zeros(2 * n, dtype=np.complex128)
        der = np.ascontiguousarray(der, dtype=np.complex128)
        if der.shape != (2 * n,):
            raise ValueError(f"derivative must have shape ({2 * n},), got {der.shape}")
        object.__setattr__(self, "derivative", der)

    @classmethod
    def initial(cls, state: WalkerState) -> "DerivativePair":
        return cls(state, None)


def coin_matrix(theta: float) -> np.ndarray:
    """R(theta) = exp(-i theta sigma_y / 2), a real 2x2 rotation.

    [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]].
    """
    theta = _finite_scalar(theta)
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]])


def coin_matrix_derivative(theta: float) -> np.ndarray:
    """dR/dtheta = (-i sigma_y / 2) R(theta); real like R itself."""
    theta = _finite_scalar(theta)
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return 0.5 * np.array([[-s, -c], [c, -s]])


def apply_step(state: WalkerState, coins: CoinField) -> WalkerState:
    """Apply U = T_down R2 T_up R1 once; norm preserved, periodic wrap."""
    n = state.lattice_size
    if coins.lattice_size != n:
        raise ValueError(
            f"coin field length {coins.lattice_size} does not match lattice size {n}"
        )
    out = np.empty((n, 2), dtype=np.complex128)
    c1, s1, c2, s2 = coins.half_angle_tables()
    kernels.split_step(state.grid(), c1, s1, c2, s2, out)
    return WalkerState(out.reshape(-1), n, state.origin_offset)


def apply_step_with_derivative(
    pair: DerivativePair, coins: CoinField, defect_site: int
) -> DerivativePair:
    """Propagate (psi, dpsi) one step: (U psi, U dpsi + (dU) psi).

    dU differentiates the layer-2 coin at ``defect_site`` (physical position)
    only; the result is exact to machine precision.
    """
    state = pair.state
    n = state.lattice_size
    if coins.lattice_size != n:
        raise ValueError(
            f"coin field length {coins.lattice_size} does not match lattice size {n}"
        )
    defect = state.index_of(defect_site)
    out = np.empty((n, 2), dtype=np.complex128)
    dout = np.empty((n, 2), dtype=np.complex128)
    c1, s1, c2, s2 = coins.half_angle_tables()
    kernels.split_step_pair(
        state.grid(), pair.derivative.reshape(n, 2), c1, s1, c2, s2, defect, out, dout
    )
    new_state = WalkerState(out.reshape(-1), n, state.origin_offset)
    return DerivativePair(new_state, dout.reshape(-1))


def evolve(params: WalkParams, initial: WalkerState, steps: int) -> list[WalkerState]:
    """States after 0..steps applications of the params-defined step."""
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if initial.lattice_size != params.lattice_size:
        raise ValueError("initial state lattice size does not match params")
    coins = CoinField.from_params(params)
    series = [initial]
    state = initial
    for _ in range(steps):
        state = apply_step(state, coins)
        series.append(state)
    return series


def position_probability(state: WalkerState, x: int) -> float:
    """|<x,up|psi>|^2 + |<x,down|psi>|^2."""
    idx = state.index_of(x)
    pair = state.grid()[idx]
    return float(np.abs(pair[0]) ** 2 + np.abs(pair[1]) ** 2)


def dynamics_lattice_size(steps: int) -> int:
    """Default wrap-free lattice for a steps-long run: 2*steps + 3 (odd)."""
    return 2 * max(int(steps), 0) + 3


def per_step_fields(params: WalkParams, steps: int, coin_fields=None) -> list[CoinField]:
    """Normalize a clean/static/per-step coin-field argument to a per-step list."""
    if coin_fields is None:
        return [CoinField.from_params(params)] * steps
    if isinstance(coin_fields, CoinField):
        return [coin_fields] * steps
    fields = list(coin_fields)
    if len(fields) < steps:
        raise ValueError(f"need {steps} per-step coin fields, got {len(fields)}")
    return fields[:steps]
