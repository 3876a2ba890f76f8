"""1+1 dimensional Lorentz kinematics and the round-trip antinomy scenario."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import PosteriorChain, ProbabilityMatrix, iterate_chain
from .errors import InvalidBoost, NoParadoxError, ValidationError


@dataclass(frozen=True)
class SpacetimeEvent:
    position: float
    time: float

    def __post_init__(self):
        if not (math.isfinite(self.position) and math.isfinite(self.time)):
            raise ValidationError(f"event coordinates must be finite: {self!r}")

    def interval(self, c: float = 1.0) -> float:
        """x^2 - c^2 t^2 relative to the origin."""
        return self.position ** 2 - (c * self.time) ** 2


@dataclass(frozen=True)
class Boost:
    beta: float

    def __post_init__(self):
        if not abs(self.beta) < 1.0:
            raise InvalidBoost(f"|beta| must be < 1, got {self.beta!r}")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt((1.0 - self.beta) * (1.0 + self.beta))

    def compose(self, other: Boost) -> Boost:
        """Relativistic velocity addition: self applied first, then other."""
        return Boost((self.beta + other.beta) / (1.0 + self.beta * other.beta))


def boost(e: SpacetimeEvent, b: Boost, c: float = 1.0) -> SpacetimeEvent:
    g = b.gamma
    return SpacetimeEvent(
        g * (e.position - b.beta * c * e.time),
        g * (e.time - b.beta * e.position / c),
    )


def reachable(src: SpacetimeEvent, dst: SpacetimeEvent, max_speed: float) -> bool:
    """Whether a signal no faster than ``max_speed`` can go from src to dst.

    The boundary is included, matching |x' - r'| <= (s' - t')(c + eps).
    """
    if not max_speed > 0:
        raise ValidationError(f"max_speed must be positive, got {max_speed!r}")
    dt = dst.time - src.time
    return dt >= 0 and abs(dst.position - src.position) <= dt * max_speed


def spacelike(a: SpacetimeEvent, b: SpacetimeEvent, c: float = 1.0) -> bool:
    return abs(b.position - a.position) > c * abs(b.time - a.time)


def _reversal_interval(send, receive, c):
    dx = receive.position - send.position
    dt = receive.time - send.time
    edge = c * dt / dx
    return (edge, 1.0) if dx > 0 else (-1.0, edge)


def antinomy_boost(send: SpacetimeEvent, receive: SpacetimeEvent, c: float = 1.0) -> Boost | None:
    """Boost in which ``receive`` happens before ``send``, or None.

    For spacelike separation every beta strictly between c dt/dx and
    sign(dx) works; the midpoint of that interval is returned. Timelike
    and lightlike pairs keep their order in every frame.
    """
    if send == receive:
        raise ValidationError("send and receive must be distinct events")
    if not spacelike(send, receive, c):
        return None
    lo, hi = _reversal_interval(send, receive, c)
    mid = 0.5 * (lo + hi)
    if not lo < mid < hi:
        # within a few ulps of the light cone the midpoint rounds onto an edge
        mid = math.nextafter(lo, hi)
        if not lo < mid < hi:
            raise InvalidBoost("separation is too close to lightlike to reverse in double precision")
    return Boost(mid)


def closing_beta_interval(signal_speed: float, c: float = 1.0) -> tuple[float, float]:
    """Frames in which a return signal at ``signal_speed`` beats the departure.

    A signal sent forward at speed u can be answered at the same speed (in
    the boosted frame) so that the answer lands on the sender's worldline
    no later than the departure iff beta >= 2 u c / (u^2 + c^2). This is a
    sub-interval of the order-reversal interval (c/u, 1).
    """
    u = signal_speed / c
    return 2.0 * u / (u * u + 1.0), 1.0


@dataclass(frozen=True)
class AntinomyScenario:
    """The paradox narrative as data; primed fields are in the boosted frame."""

    signal_speed: float
    c: float
    start: SpacetimeEvent  # (x, s): E receives S' here
    send: SpacetimeEvent  # (y, w): E sends S
    receive: SpacetimeEvent  # (r, t): E' gets S and relays S'
    reversal_boost: Boost
    frame: Boost
    start_p: SpacetimeEvent
    send_p: SpacetimeEvent
    receive_p: SpacetimeEvent
    chain: PosteriorChain

    @property
    def closes(self) -> bool:
        return self.start.time <= self.send.time


def antinomy_scenario(
    channel: ProbabilityMatrix,
    prior: float,
    signal_speed: float,
    c: float = 1.0,
    distance: float = 1.0,
    epsilon: float = 1e-9,
    max_steps: int = 1_000_000,
) -> AntinomyScenario:
    """Lay out the round trip at ``signal_speed`` and iterate the posterior.

    E sits at x = 0 and sends S at t = 0 to E' at ``distance``. E' moves
    with the frame returned by :func:`closing_beta_interval` (midpoint) and
    relays S' at the same speed in its own frame; S' reaches E's worldline
    at the start event, before the send.
    """
    if not signal_speed > c:
        raise NoParadoxError(f"signal speed {signal_speed!r} does not exceed c = {c!r}")
    if not distance > 0:
        raise ValidationError(f"distance must be positive, got {distance!r}")
    send = SpacetimeEvent(0.0, 0.0)
    receive = SpacetimeEvent(distance, distance / signal_speed)
    reversal = antinomy_boost(send, receive, c)
    assert reversal is not None  # spacelike by construction

    lo, hi = closing_beta_interval(signal_speed, c)
    frame = Boost(0.5 * (lo + hi))
    send_p = boost(send, frame, c)
    receive_p = boost(receive, frame, c)
    # S' travels toward -x' at signal_speed in the primed frame; find where it
    # crosses E's worldline x = 0, i.e. x' = -beta c t'.
    # x' = x_r' - u (t' - t_r')  and  x' = -beta c t'
    u = signal_speed
    t_hit = (receive_p.position + u * receive_p.time) / (u - frame.beta * c)
    start_p = SpacetimeEvent(-frame.beta * c * t_hit, t_hit)
    start = boost(start_p, Boost(-frame.beta), c)

    chain = iterate_chain(prior, channel, epsilon, max_steps)
    return AntinomyScenario(
        signal_speed, c, start, send, receive, reversal, frame,
        start_p, send_p, receive_p, chain,
    )
