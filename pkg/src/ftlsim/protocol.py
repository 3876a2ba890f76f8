"""Cycle/alarm accounting, reliability R(V) and the effective-speed search.

For a cycle starting at t and a probe speed V:

* Q  = alarms in (t, t+a+s] minus those in (t+r/V, t+r/V+w]
* Q0 = alarms in (t, t+r/V]

With Q and Q0 averaged over cycles,

    R(V) = 1 - Q r / (Q0 V (a + s - w))

evaluated at the largest configured standby ``s`` (the limit s -> inf is
replaced by a ceiling). R is 0 for a device that clicks at random, 1 for
a perfect one and negative when V is probed too high.

The reliability formula is only defined for Q0 > 0 (the textual
condition on Q vanishing refers to the numerator; the denominator is
what can actually be zero), so estimation requires a positive mean Q0.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._backend import core
from .channel import ProbabilityMatrix
from .errors import (
    EstimationError,
    UndefinedReliabilityError,
    ValidationError,
    WindowError,
)
from .geometry import ApparatusGeometry
from .optics_sim import (
    AlarmLog,
    ChannelEstimate,
    Cycle,
    PhysicsHypothesis,
    simulate_cycles,
)


@dataclass(frozen=True)
class CycleSchedule:
    """Cycle timing for a session.

    ``waiting`` is either a fixed w >= 0, or, when ``waiting_edge`` is set,
    the rule r/V + w = waiting_edge for every probed V.
    """

    action_a: float
    standby_schedule: tuple[float, ...]
    waiting: float = 0.0
    waiting_edge: float | None = None
    probe_speeds: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "standby_schedule", tuple(float(s) for s in self.standby_schedule))
        object.__setattr__(self, "probe_speeds", tuple(float(v) for v in self.probe_speeds))
        if not self.action_a > 0:
            raise ValidationError(f"action_a must be positive, got {self.action_a!r}")
        levels = self.standby_schedule
        if not levels:
            raise ValidationError("standby_schedule must not be empty")
        if levels[0] < 0 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValidationError("standby_schedule must be non-negative and strictly increasing")
        if not self.waiting >= 0:
            raise ValidationError(f"waiting must be >= 0, got {self.waiting!r}")
        if any(not v > 0 for v in self.probe_speeds):
            raise ValidationError("probe speeds must be positive")

    @property
    def ceiling(self) -> float:
        return self.standby_schedule[-1]

    @property
    def cycle_length(self) -> float:
        return self.action_a + self.ceiling

    def cycle(self) -> Cycle:
        """Simulated cycles run to the ceiling; shorter standby levels are
        read off the same logs by truncation."""
        return Cycle(self.action_a, self.ceiling)

    def waiting_for(self, V: float, r: float) -> float:
        if self.waiting_edge is None:
            return self.waiting
        w = self.waiting_edge - r / V
        if w < 0:
            raise WindowError(f"r/V = {r / V!r} lies beyond the waiting edge {self.waiting_edge!r}")
        return w


def count_alarms(
    log: AlarmLog,
    sched: CycleSchedule,
    V: float,
    r: float,
    standby: float | None = None,
) -> tuple[int, int]:
    """(Q, Q0) for one cycle; intervals are left-open, right-closed."""
    if not V > 0:
        raise ValidationError(f"V must be positive, got {V!r}")
    s = sched.ceiling if standby is None else standby
    end = sched.action_a + s
    probe = r / V
    if probe > end:
        raise WindowError(f"r/V = {probe!r} exceeds the cycle length {end!r}")
    w = sched.waiting_for(V, r)
    t = log.alarm_times
    n_end = np.count_nonzero((t > 0) & (t <= end))
    q0 = np.count_nonzero((t > 0) & (t <= probe))
    excluded = np.count_nonzero((t > probe) & (t <= probe + w) & (t <= end))
    return int(n_end - excluded), int(q0)


@dataclass(frozen=True)
class LevelEstimate:
    standby: float
    Q_avg: float
    Q0_avg: float
    R: float
    R_ci_low: float
    R_ci_high: float
    R_se: float


@dataclass(frozen=True)
class ReliabilityEstimate:
    """R(V) at the standby ceiling plus the per-level trend."""

    V: float
    standby: float
    Q_avg: float
    Q0_avg: float
    R: float
    R_ci_low: float
    R_ci_high: float
    R_se: float
    cycles_used: int
    trend: tuple[LevelEstimate, ...] = ()
    significance: float = 0.01

    @property
    def significantly_positive(self) -> bool:
        return self.R_ci_low > 0.0


def reliability_value(q_avg: float, q0_avg: float, r: float, V: float, a: float, s: float, w: float) -> float:
    return 1.0 - (q_avg * r) / (q0_avg * V * (a + s - w))


class _Flat:
    """Alarm times of many cycles as one array with per-cycle offsets."""

    def __init__(self, logs: Sequence[AlarmLog]):
        lengths = np.fromiter((len(log) for log in logs), dtype=np.int64, count=len(logs))
        self.offsets = np.zeros(len(logs) + 1, dtype=np.int64)
        np.cumsum(lengths, out=self.offsets[1:])
        self.times = (
            np.concatenate([log.alarm_times for log in logs])
            if logs else np.zeros(0)
        ).astype(np.float64, copy=False)
        self.n = len(logs)

    def counts(self, edges) -> np.ndarray:
        return core.window_counts(
            np.ascontiguousarray(self.times),
            self.offsets,
            np.ascontiguousarray(edges, dtype=np.float64),
        )


def _flat(logs) -> _Flat:
    return logs if isinstance(logs, _Flat) else _Flat(logs)


def estimate_reliability(
    logs: Sequence[AlarmLog],
    sched: CycleSchedule,
    V: float,
    r: float,
    significance: float = 0.01,
    n_boot: int = 1000,
    seed: int = 0,
) -> ReliabilityEstimate:
    """Ratio-of-means R(V) at every standby level with bootstrap intervals.

    The interval is the equal-tailed percentile interval
    [q(significance), q(1 - significance)] over cycle resamples, so its
    lower end is the one-sided bound used to decide "R(V) > 0".
    """
    if not V > 0:
        raise ValidationError(f"V must be positive, got {V!r}")
    if not 0 < significance < 0.5:
        raise ValidationError(f"significance must lie in (0, 0.5), got {significance!r}")
    flat = _flat(logs)
    if flat.n == 0:
        raise EstimationError("no cycles to estimate from")
    a = sched.action_a
    probe = r / V
    w = sched.waiting_for(V, r)
    if probe > a + sched.ceiling:
        raise WindowError(f"r/V = {probe!r} exceeds the cycle length {a + sched.ceiling!r}")
    levels = [s for s in sched.standby_schedule if probe <= a + s]

    edges = [probe, probe + w] + [a + s for s in levels]
    c = flat.counts(edges)
    q0 = c[:, 0]
    columns = [q0]
    for k, s in enumerate(levels):
        end_count = c[:, 2 + k]
        excl = np.minimum(c[:, 1], end_count) - np.minimum(c[:, 0], end_count)
        columns.append(end_count - excl)
    counts = np.ascontiguousarray(np.stack(columns, axis=1), dtype=np.int64)

    n = flat.n
    sums = counts.sum(axis=0)
    if sums[0] == 0:
        raise UndefinedReliabilityError(
            f"no alarms in (0, r/V] over {n} cycles at V = {V!r}; R(V) is undefined"
        )
    boot = _bootstrap(counts, n_boot, seed)
    q0_avg = float(sums[0] / n)
    trend = []
    for k, s in enumerate(levels):
        q_avg = float(sums[k + 1] / n)
        R = reliability_value(q_avg, q0_avg, r, V, a, s, w)
        with np.errstate(divide="ignore", invalid="ignore"):
            Rb = 1.0 - (boot[:, k + 1] / n * r) / (boot[:, 0] / n * V * (a + s - w))
        Rb = np.where(np.isfinite(Rb), Rb, -np.inf)  # resample without Q0: no evidence
        lo = np.quantile(Rb, significance, method="lower")
        hi = np.quantile(Rb, 1.0 - significance, method="higher")
        finite = Rb[np.isfinite(Rb)]
        se = float(finite.std(ddof=1)) if len(finite) > 1 else 0.0
        trend.append(LevelEstimate(s, q_avg, q0_avg, R, float(lo), float(hi), se))
    top = trend[-1]
    return ReliabilityEstimate(
        V, top.standby, top.Q_avg, top.Q0_avg, top.R, top.R_ci_low, top.R_ci_high,
        top.R_se, n, tuple(trend), significance,
    )


def _bootstrap(counts: np.ndarray, n_boot: int, seed: int, chunk: int = 100) -> np.ndarray:
    n = counts.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(0xB007,)))
    out = np.empty((n_boot, counts.shape[1]), dtype=np.int64)
    for start in range(0, n_boot, chunk):
        stop = min(start + chunk, n_boot)
        idx = rng.integers(0, n, size=(stop - start, n), dtype=np.int64)
        out[start:stop] = core.bootstrap_sums(counts, idx)
    return out


class RecordedDevice:
    """Device handle over a fixed set of logs; every probe reuses them."""

    def __init__(self, logs: Sequence[AlarmLog]):
        self._flat = _Flat(logs)

    def logs(self, sched: CycleSchedule, V: float):
        return self._flat


class SimulatedDevice:
    """Device handle that simulates cycles on demand.

    By default one batch is shared by all probes (common random numbers,
    which keeps the R(V) predicate nearly monotone in V). With
    ``fresh_per_probe`` each V gets its own batch, seeded from V's bits.
    """

    def __init__(self, geometry: ApparatusGeometry, hypothesis: PhysicsHypothesis,
                 n_cycles: int = 10_000, seed: int = 0, workers: int = 1,
                 fresh_per_probe: bool = False):
        self.geometry = geometry
        self.hypothesis = hypothesis
        self.n_cycles = n_cycles
        self.seed = seed
        self.workers = workers
        self.fresh_per_probe = fresh_per_probe
        self._cache: dict = {}

    def logs(self, sched: CycleSchedule, V: float):
        key = (sched.cycle(), struct.unpack("<Q", struct.pack("<d", V))[0] if self.fresh_per_probe else 0)
        if key not in self._cache:
            seed = self.seed if not self.fresh_per_probe else int(
                np.random.SeedSequence([self.seed, key[1]]).generate_state(1, np.uint64)[0]
            )
            logs = simulate_cycles(self.geometry, self.hypothesis, sched.cycle(),
                                   self.n_cycles, seed, self.workers)
            self._cache[key] = _Flat(logs)
        return self._cache[key]


@dataclass(frozen=True)
class EffectiveSpeed:
    """Bracket [low, high] around sup{V : R(V) > 0}.

    ``low`` is None when no probed V gives significantly positive R
    (undetectable); ``high`` is None when every probed V does
    (unbracketed above).
    """

    low: float | None
    high: float | None
    estimates: tuple[ReliabilityEstimate, ...] = field(default=(), repr=False)

    @property
    def detectable(self) -> bool:
        return self.low is not None

    @property
    def bracketed(self) -> bool:
        return self.low is not None and self.high is not None

    @property
    def relative_width(self) -> float:
        if not self.bracketed:
            return math.inf
        return (self.high - self.low) / self.low

    @property
    def value(self) -> float | None:
        if not self.bracketed:
            return self.low
        return 0.5 * (self.low + self.high)


def effective_speed(
    device,
    sched: CycleSchedule,
    r: float,
    significance: float = 0.01,
    rel_width: float = 0.02,
    n_boot: int = 1000,
    seed: int = 0,
    max_iter: int = 60,
) -> EffectiveSpeed:
    """Bisection on the predicate "lower confidence bound of R(V) > 0".

    The initial bracket comes from ``sched.probe_speeds``: the fastest
    probe with significantly positive R and the slowest faster probe
    without. Probes whose window r/V does not fit in the cycle are skipped.
    """
    if not sched.probe_speeds:
        raise ValidationError("schedule has no probe speeds")
    seen: dict[float, ReliabilityEstimate] = {}

    def positive(V: float) -> bool | None:
        try:
            est = estimate_reliability(device.logs(sched, V), sched, V, r,
                                       significance, n_boot, seed)
        except WindowError:
            return None
        except UndefinedReliabilityError:
            return False
        seen[V] = est
        return est.significantly_positive

    verdicts = {V: positive(V) for V in sorted(set(sched.probe_speeds))}
    good = [V for V, ok in verdicts.items() if ok]
    if not good:
        return EffectiveSpeed(None, None, tuple(seen.values()))
    low = max(good)
    above = [V for V, ok in verdicts.items() if V > low and ok is False]
    if not above:
        return EffectiveSpeed(low, None, tuple(seen.values()))
    high = min(above)
    for _ in range(max_iter):
        if (high - low) / low <= rel_width:
            break
        mid = 0.5 * (low + high)
        if positive(mid):
            low = mid
        else:
            high = mid
    return EffectiveSpeed(low, high, tuple(seen[V] for V in sorted(seen)))


@dataclass(frozen=True)
class BoundCheck:
    holds: bool
    ratio: float
    one_minus_R: float
    margin: float
    sigma: float


def verify_bound(channel, est: ReliabilityEstimate, n_sigma: float = 3.0) -> BoundCheck:
    """Check p01/p11 <= 1 - R(V) within ``n_sigma`` combined standard errors.

    ``channel`` is a ChannelEstimate (standard errors propagated by the
    delta method) or an exact ProbabilityMatrix. ``margin`` is
    (1 - R) - p01/p11; negative means the point estimates violate the bound.
    """
    if isinstance(channel, ChannelEstimate):
        p01, p11, se01, se11 = channel.p01, channel.p11, channel.se01, channel.se11
    elif isinstance(channel, ProbabilityMatrix):
        p01, p11, se01, se11 = channel.p01, channel.p11, 0.0, 0.0
    else:
        raise ValidationError(f"unsupported channel type {type(channel).__name__}")
    if p11 <= 0:
        raise EstimationError("p11 estimate is zero; the bound cannot be evaluated")
    ratio = p01 / p11
    var_ratio = (se01 / p11) ** 2 + (p01 * se11 / p11 ** 2) ** 2
    sigma = math.sqrt(var_ratio + est.R_se ** 2)
    margin = (1.0 - est.R) - ratio
    return BoundCheck(margin + n_sigma * sigma >= 0, ratio, 1.0 - est.R, margin, sigma)

