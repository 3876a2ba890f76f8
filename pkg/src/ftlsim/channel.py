"""Binary asymmetric channel and the iterated round-trip posterior.

A device that sends (i=1) or does not send (i=0) and whose receiver
reports a signal (j=1) or not (j=0) is described by the two numbers
``p01 = P(receive | not sent)`` and ``p11 = P(receive | sent)``.

The round trip works as follows. An experimenter obtains outcome X with
prior probability ``p1`` and sends S only if X occurred. The remote party
relays S' back only if it received S. Observing S' then raises the
probability of X to

    p2 = p1 (p11^2 + p10 p01) / (p1 (p11^2 + p10 p01) + p0 p01 (p00 + p11))

and iterating that update drives the probability to 1 whenever p01 < p11.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._backend import core
from .errors import UndefinedRatioError, ValidationError


def check_probability(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise ValidationError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class ProbabilityMatrix:
    """The 2x2 send/receive matrix; only p01 and p11 are stored."""

    p01: float
    p11: float

    def __post_init__(self):
        object.__setattr__(self, "p01", check_probability(self.p01, "p01"))
        object.__setattr__(self, "p11", check_probability(self.p11, "p11"))

    @property
    def p00(self) -> float:
        return 1.0 - self.p01

    @property
    def p10(self) -> float:
        return 1.0 - self.p11

    @property
    def informative(self) -> bool:
        """True when the device works at least somewhat (p01 < p11)."""
        return self.p01 < self.p11

    def as_array(self) -> np.ndarray:
        """Rows indexed by sent (0/1), columns by received (0/1)."""
        return np.array([[self.p00, self.p01], [self.p10, self.p11]])


class Update(NamedTuple):
    value: float
    vacuous: bool


def bayes_update(prior: float, channel: ProbabilityMatrix) -> Update:
    """One round-trip update of P(X) after observing the relayed signal.

    ``vacuous`` is set when the conditioning event has probability zero
    (e.g. prior 0 with p01 0); the prior is then returned unchanged.
    """
    prior = check_probability(prior, "prior")
    value, vacuous = core.posterior_step(prior, channel.p01, channel.p11)
    return Update(value, vacuous)


def posterior(prior: float, channel: ProbabilityMatrix) -> float:
    return bayes_update(prior, channel).value


@dataclass(frozen=True)
class PosteriorChain:
    """The iterates p1, p2, ... of repeated round-trip updates."""

    p1: float
    iterates: np.ndarray
    converged: bool
    vacuous: bool = False

    @property
    def steps(self) -> int:
        """Number of updates applied."""
        return len(self.iterates) - 1

    @property
    def final(self) -> float:
        return float(self.iterates[-1])

    def __len__(self):
        return len(self.iterates)


def iterate_chain(
    prior: float,
    channel: ProbabilityMatrix,
    epsilon: float = 1e-9,
    max_steps: int = 1_000_000,
) -> PosteriorChain:
    """Apply :func:`posterior` until ``1 - p_n < epsilon`` or ``max_steps`` updates.

    Every iterate is recorded so the empirical convergence rate can be read
    off the chain.
    """
    prior = check_probability(prior, "prior")
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon!r}")
    if max_steps < 0:
        raise ValidationError(f"max_steps must be non-negative, got {max_steps!r}")
    iterates, vacuous, converged = core.posterior_chain(
        prior, channel.p01, channel.p11, float(epsilon), int(max_steps)
    )
    iterates.setflags(write=False)
    return PosteriorChain(prior, iterates, converged, vacuous)


def likelihood_ratio(channel: ProbabilityMatrix) -> float:
    """Factor by which one round trip multiplies the odds of X.

    Equals 1 + (p11 - p01)^2 / (p01 (p00 + p11)); infinite when p01 == 0.
    """
    den = channel.p01 * (channel.p00 + channel.p11)
    num = channel.p11 ** 2 + channel.p10 * channel.p01
    if den == 0.0:
        return math.inf if num > 0 else 1.0
    return num / den


def reliability_bound(channel: ProbabilityMatrix) -> float:
    """p01 / p11, the quantity a device's reliability must keep below 1 - R(V)."""
    if channel.p11 == 0.0:
        raise UndefinedRatioError("p11 == 0: the device never delivers a sent signal")
    return channel.p01 / channel.p11
