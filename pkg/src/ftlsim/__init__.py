"""Simulator and estimator for an interferometric superluminal-signalling protocol."""
from ._backend import BACKEND
from .channel import (
    PosteriorChain,
    ProbabilityMatrix,
    bayes_update,
    iterate_chain,
    posterior,
    reliability_bound,
)
from .geometry import ApparatusGeometry, feasible, v_max, v_min
from .optics_sim import (
    AlarmLog,
    BeamSplitterState,
    ChannelEstimate,
    Cycle,
    PhysicsHypothesis,
    channel_of,
    simulate_cycle,
    simulate_cycles,
)
from .protocol import (
    CycleSchedule,
    ReliabilityEstimate,
    SimulatedDevice,
    count_alarms,
    effective_speed,
    estimate_reliability,
    verify_bound,
)
from .relativity import Boost, SpacetimeEvent, antinomy_boost, antinomy_scenario, boost, reachable

__version__ = "0.1.0"
