"""FIFO delay pipeline standing in for the communication network.

Messages are stamped on push and become visible to poll once their delay has
elapsed. Delivery order is send order; a varying profile must keep
t_send + tau(t_send) non-decreasing so the FIFO never reorders.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Generic, TypeVar

from .errors import NonMonotonicTime

M = TypeVar("M")


@dataclass(frozen=True)
class Stamped(Generic[M]):
    payload: M
    t_send: float
    seq: int


class DelayProfile:
    """Delay as a function of send time."""

    def delay_at(self, t_send: float) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(DelayProfile):
    tau: float

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("delay must be non-negative")

    def delay_at(self, t_send: float) -> float:
        return self.tau


@dataclass(frozen=True)
class Varying(DelayProfile):
    """Sinusoidal jitter around a base delay.

    tau(t) = base + jitter_amp * sin(2*pi*t/period). Requires
    jitter_amp * 2*pi / period <= 1 so delivery times never decrease.
    """

    base: float
    jitter_amp: float
    period: float

    def __post_init__(self):
        if self.base < 0 or self.jitter_amp < 0 or self.period <= 0:
            raise ValueError("invalid varying-delay parameters")
        if self.base - self.jitter_amp < 0:
            raise ValueError("instantaneous delay would go negative")
        if self.jitter_amp * 2.0 * math.pi / self.period > 1.0 + 1e-12:
            raise ValueError("jitter slope would reorder deliveries")

    def delay_at(self, t_send: float) -> float:
        return self.base + self.jitter_amp * math.sin(2.0 * math.pi * t_send / self.period)


@dataclass
class DelayChannel(Generic[M]):
    """Single-producer single-consumer FIFO with a delay profile."""

    profile: DelayProfile = field(default_factory=lambda: Constant(0.0))
    _queue: deque = field(default_factory=deque)
    _seq: int = 0
    _last_send: float = -math.inf
    _last_poll: float = -math.inf

    def push(self, payload: M, t_send: float) -> None:
        if t_send < self._last_send:
            raise NonMonotonicTime(
                f"push at t={t_send} after t={self._last_send}")
        self._last_send = t_send
        self._seq += 1
        deliver_at = t_send + self.profile.delay_at(t_send)
        self._queue.append((deliver_at, Stamped(payload, t_send, self._seq)))

    def poll(self, t_now: float) -> list:
        """All payloads due by t_now, in send order, each delivered once."""
        if t_now < self._last_poll:
            raise NonMonotonicTime(
                f"poll at t={t_now} after t={self._last_poll}")
        self._last_poll = t_now
        out = []
        while self._queue and self._queue[0][0] <= t_now:
            out.append(self._queue[0][1].payload)
            self._queue.popleft()
        return out

    def poll_stamped(self, t_now: float) -> list:
        if t_now < self._last_poll:
            raise NonMonotonicTime(
                f"poll at t={t_now} after t={self._last_poll}")
        self._last_poll = t_now
        out = []
        while self._queue and self._queue[0][0] <= t_now:
            out.append(self._queue[0][1])
            self._queue.popleft()
        return out

    def __len__(self) -> int:
        return len(self._queue)


def queue_length_for(tau: float, tick_rate: float) -> int:
    """Queue length equivalent to a delay at a fixed tick rate."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if tick_rate <= 0:
        raise ValueError("tick_rate must be > 0")
    return int(round(tau * tick_rate))
