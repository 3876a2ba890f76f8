"""Monte Carlo model of the transmitter as a detector alarm process.

Photon-level interference is not simulated. The detector D sees a
Poisson click process with a dark ("vacuum level") rate while BS2 is
lowered and both down-converted paths interfere. When BS2 is raised,
the idler paths become distinguishable and the signal photons stop
interfering, so D clicks at up to ``bright_rate``. Induced clicks reach D
after a propagation delay ``r / signal_speed`` plus the detector reaction
time ``k r^2 / I``.

Time inside a cycle runs from 0 (B pressed, actuation starts) to
``action + standby``. Alarm timestamps are quantised to whole nanoseconds,
the resolution of the on-disk log format.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channel import ProbabilityMatrix
from .errors import ConfigurationError, EstimationError, ValidationError
from .geometry import ApparatusGeometry, v_max

NS = 1_000_000_000

NULL_MODEL = "null_model"
SIGNALING_MODEL = "signaling_model"

LOWERED, RAISING, RAISED, LOWERING = "lowered", "raising", "raised", "lowering"
_PHASE_ORDER = (LOWERED, RAISING, RAISED, LOWERING)


@dataclass(frozen=True)
class BeamSplitterState:
    phase: str
    fraction: float

    def __post_init__(self):
        if self.phase not in _PHASE_ORDER:
            raise ValidationError(f"unknown beam splitter phase {self.phase!r}")
        if not 0.0 <= self.fraction <= 1.0:
            raise ValidationError(f"raise fraction must lie in [0, 1], got {self.fraction!r}")

    def can_follow(self, previous: BeamSplitterState) -> bool:
        """Transitions run lowered -> raising -> raised -> lowering -> lowered."""
        i, j = _PHASE_ORDER.index(previous.phase), _PHASE_ORDER.index(self.phase)
        return j == i or j == (i + 1) % 4


def raise_fraction(tau, action: float, raise_time: float) -> np.ndarray:
    """Piecewise-linear BS2 profile: up over T/2, hold, down over T/2.

    Zero outside [0, action). With raise_time 0 the splitter is fully
    raised for the whole action period.
    """
    tau = np.asarray(tau, dtype=np.float64)
    half = 0.5 * raise_time
    inside = (tau >= 0.0) & (tau < action)
    if half == 0.0:
        return inside.astype(np.float64)
    up = tau / half
    down = (action - tau) / half
    return np.where(inside, np.clip(np.minimum(up, down), 0.0, 1.0), 0.0)


def actuation_state(tau: float, action: float, raise_time: float) -> BeamSplitterState:
    half = 0.5 * raise_time
    frac = float(raise_fraction(tau, action, raise_time))
    if tau < 0.0 or tau >= action:
        return BeamSplitterState(LOWERED, 0.0)
    if tau < half:
        return BeamSplitterState(RAISING, frac)
    if tau < action - half:
        return BeamSplitterState(RAISED, 1.0)
    return BeamSplitterState(LOWERING, frac)


DISTINGUISHABILITY_MAPS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "linear": lambda f: f,
    "quadratic": lambda f: f * f,
    "sqrt": np.sqrt,
    "step": lambda f: (f > 0).astype(np.float64),
}


@dataclass(frozen=True)
class PhysicsHypothesis:
    """What the detector sees, as a function of what BS2 does.

    ``null_model`` encodes "the device does not depend on sending any
    signal": the click rate is ``dark_rate`` regardless of BS2.
    """

    kind: str
    dark_rate: float = 0.0
    bright_rate: float = 0.0
    signal_speed: float | None = None
    distinguishability: str = "linear"

    def __post_init__(self):
        if self.kind not in (NULL_MODEL, SIGNALING_MODEL):
            raise ValidationError(f"unknown hypothesis kind {self.kind!r}")
        if not (math.isfinite(self.dark_rate) and self.dark_rate >= 0):
            raise ValidationError(f"dark_rate must be >= 0, got {self.dark_rate!r}")
        if self.distinguishability not in DISTINGUISHABILITY_MAPS:
            raise ValidationError(f"unknown distinguishability map {self.distinguishability!r}")
        if self.kind == SIGNALING_MODEL:
            if not (math.isfinite(self.bright_rate) and self.bright_rate > self.dark_rate):
                raise ValidationError("signaling_model needs bright_rate > dark_rate")
            if self.signal_speed is None or not self.signal_speed > 0:
                raise ValidationError("signaling_model needs a positive signal_speed")

    @classmethod
    def null(cls, dark_rate: float) -> PhysicsHypothesis:
        return cls(NULL_MODEL, dark_rate=dark_rate)

    @classmethod
    def signaling(cls, signal_speed: float, dark_rate: float = 0.0,
                  bright_rate: float | None = None, pair_rate: float | None = None,
                  distinguishability: str = "linear") -> PhysicsHypothesis:
        """``bright_rate`` defaults to half of ``pair_rate``: about 50% of the
        no-longer-interfering signal photons reach D."""
        if bright_rate is None:
            if pair_rate is None:
                raise ValidationError("give bright_rate or pair_rate")
            bright_rate = 0.5 * pair_rate
        return cls(SIGNALING_MODEL, dark_rate, bright_rate, signal_speed, distinguishability)

    def distinguish(self, fraction) -> np.ndarray:
        return DISTINGUISHABILITY_MAPS[self.distinguishability](np.asarray(fraction, dtype=np.float64))

    def induced_delay(self, g: ApparatusGeometry) -> float:
        """Earliest arrival of an induced alarm after actuation starts."""
        if self.kind != SIGNALING_MODEL:
            return math.inf
        return g.pump_arm_r / self.signal_speed + g.detector_delay

    def rate(self, tau, g: ApparatusGeometry, action: float, actuated: bool = True) -> np.ndarray:
        """Instantaneous click rate at detection time ``tau``."""
        tau = np.asarray(tau, dtype=np.float64)
        if self.kind == NULL_MODEL or not actuated:
            return np.full(tau.shape, self.dark_rate)
        frac = raise_fraction(tau - self.induced_delay(g), action, g.raise_time_T)
        return self.dark_rate + (self.bright_rate - self.dark_rate) * self.distinguish(frac)

    def check_against(self, g: ApparatusGeometry) -> None:
        if self.kind != SIGNALING_MODEL:
            return
        c = g.light_speed_c
        top = v_max(g)
        if not c < self.signal_speed <= top * (1 + 1e-12):
            raise ConfigurationError(
                f"signal_speed {self.signal_speed!r} outside (c, v_max] = ({c!r}, {top!r}]"
            )


@dataclass(frozen=True)
class Cycle:
    """One action + standby cycle; ``actuated=False`` leaves BS2 lowered throughout."""

    action: float
    standby: float
    actuated: bool = True

    def __post_init__(self):
        if not self.action > 0:
            raise ValidationError(f"action period must be positive, got {self.action!r}")
        if not self.standby >= 0:
            raise ValidationError(f"standby must be non-negative, got {self.standby!r}")

    @property
    def length(self) -> float:
        return self.action + self.standby


@dataclass(frozen=True)
class AlarmLog:
    """Alarm times (seconds from cycle start) of one cycle, strictly increasing."""

    cycle_index: int
    alarm_times: np.ndarray
    seed: int
    duration: float | None = None

    def __post_init__(self):
        times = np.array(self.alarm_times, dtype=np.float64)
        if times.ndim != 1:
            raise ValidationError("alarm_times must be one-dimensional")
        if len(times) and (not np.all(np.diff(times) > 0) or times[0] <= 0):
            raise ValidationError("alarm_times must be positive and strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "alarm_times", times)

    def __len__(self):
        return len(self.alarm_times)

    def __eq__(self, other):
        if not isinstance(other, AlarmLog):
            return NotImplemented
        return (self.cycle_index, self.seed, self.duration) == (
            other.cycle_index, other.seed, other.duration
        ) and np.array_equal(self.alarm_times, other.alarm_times)

    __hash__ = None

    @property
    def alarm_ns(self) -> np.ndarray:
        return np.rint(self.alarm_times * NS).astype(np.int64)


def cycle_seed(master_seed: int, cycle_index: int) -> int:
    """Per-cycle seed, a pure function of (master_seed, cycle_index)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(cycle_index),))
    return int(ss.generate_state(1, np.uint64)[0])


def _check_setup(g: ApparatusGeometry, h: PhysicsHypothesis, cycle: Cycle) -> None:
    h.check_against(g)
    if h.kind == SIGNALING_MODEL and g.raise_time_T > cycle.action:
        raise ConfigurationError(
            f"raise time {g.raise_time_T!r} does not fit in the action period {cycle.action!r}"
        )


def simulate_cycle(
    g: ApparatusGeometry,
    h: PhysicsHypothesis,
    cycle: Cycle,
    seed: int,
    cycle_index: int = 0,
) -> AlarmLog:
    _check_setup(g, h, cycle)
    return _simulate(g, h, cycle, seed, cycle_index)


def _simulate(g, h, cycle, seed, cycle_index):
    rng = np.random.default_rng(seed)
    length = cycle.length
    n_dark = rng.poisson(h.dark_rate * length)
    times = length * (1.0 - rng.random(n_dark))  # (0, length]
    if h.kind == SIGNALING_MODEL and cycle.actuated:
        # thinning of a homogeneous candidate stream over the action period
        m = rng.poisson((h.bright_rate - h.dark_rate) * cycle.action)
        emit = cycle.action * rng.random(m)
        keep = rng.random(m) < h.distinguish(raise_fraction(emit, cycle.action, g.raise_time_T))
        induced = emit[keep] + h.induced_delay(g)
        times = np.concatenate([times, induced])
    ns = np.unique(np.ceil(times * NS).astype(np.int64))
    ns = ns[ns <= length * NS]
    return AlarmLog(cycle_index, ns / NS, seed, length)


def simulate_cycles(
    g: ApparatusGeometry,
    h: PhysicsHypothesis,
    cycle: Cycle,
    n_cycles: int,
    master_seed: int,
    workers: int = 1,
    start_index: int = 0,
) -> list[AlarmLog]:
    """Simulate independent cycles; the result does not depend on ``workers``."""
    _check_setup(g, h, cycle)
    indices = range(start_index, start_index + n_cycles)

    def run(chunk):
        return [_simulate(g, h, cycle, cycle_seed(master_seed, i), i) for i in chunk]

    if workers <= 1 or n_cycles < 2 * workers:
        return run(indices)
    step = math.ceil(n_cycles / workers)
    chunks = [indices[k:k + step] for k in range(0, n_cycles, step)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, chunks))
    return [log for part in parts for log in part]


@dataclass(frozen=True)
class ChannelEstimate:
    """Monte Carlo estimate of p01/p11 with binomial standard errors."""

    matrix: ProbabilityMatrix
    se01: float
    se11: float
    n_cycles: int
    window: float
    threshold: int
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def p01(self) -> float:
        return self.matrix.p01

    @property
    def p11(self) -> float:
        return self.matrix.p11


def channel_from_logs(
    logs: Sequence[AlarmLog],
    window: float,
    threshold: int = 1,
    cycle_length: float | None = None,
    listen_start: float = 0.0,
) -> ChannelEstimate:
    """Estimate p11 from (listen_start, listen_start + window] and p01 from the
    last ``window`` of the cycle, where BS2 has long been lowered."""
    if not window > 0:
        raise ValidationError(f"window must be positive, got {window!r}")
    if threshold < 1:
        raise ValidationError(f"threshold must be >= 1, got {threshold!r}")
    n = len(logs)
    if n == 0:
        raise EstimationError("no cycles to estimate the channel from")
    if cycle_length is None:
        cycle_length = logs[0].duration
    if cycle_length is None:
        raise ValidationError("cycle_length is required for logs without a duration")
    standby_start = cycle_length - window
    if standby_start < listen_start + window:
        raise ConfigurationError("listening and standby windows overlap")
    hits_sent = hits_idle = 0
    for log in logs:
        t = log.alarm_times
        sent = np.count_nonzero((t > listen_start) & (t <= listen_start + window))
        idle = np.count_nonzero((t > standby_start) & (t <= cycle_length))
        hits_sent += sent >= threshold
        hits_idle += idle >= threshold
    p11, p01 = hits_sent / n, hits_idle / n
    return ChannelEstimate(
        ProbabilityMatrix(p01, p11),
        math.sqrt(p01 * (1 - p01) / n),
        math.sqrt(p11 * (1 - p11) / n),
        n, window, threshold,
    )


def channel_of(
    h: PhysicsHypothesis,
    g: ApparatusGeometry,
    window: float,
    threshold: int = 1,
    *,
    cycle: Cycle,
    n_cycles: int = 10_000,
    seed: int = 0,
    listen_start: float = 0.0,
    workers: int = 1,
) -> ChannelEstimate:
    """Effective p01/p11 of the simulated device for a receive window.

    p11 counts cycles with at least ``threshold`` alarms in the window that
    opens ``listen_start`` after actuation; p01 uses an equally long window
    at the end of the standby period.
    """
    if n_cycles <= 0:
        raise EstimationError("zero simulated cycles")
    if h.kind == SIGNALING_MODEL:
        last_induced = cycle.action + h.induced_delay(g)
        if cycle.length - window < last_induced:
            raise ConfigurationError(
                "standby window overlaps induced alarms; lengthen the standby period"
            )
    logs = simulate_cycles(g, h, cycle, n_cycles, seed, workers)
    return channel_from_logs(logs, window, threshold, cycle.length, listen_start)
