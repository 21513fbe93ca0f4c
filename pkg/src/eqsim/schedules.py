"""Damping-exponent (alpha) schedules for the EP iterations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("constant", "geometric_ramp", "two_phase")


@dataclass(frozen=True)
class AlphaSchedule:
    """``alpha`` per iteration, capped at 1.

    ``constant``: ``a0`` forever. ``geometric_ramp``: ``a0 * growth**i``.
    ``two_phase``: ``a0`` for the first ``hold`` iterations, then the
    geometric ramp restarted at ``a0``.
    """

    kind: str = "geometric_ramp"
    a0: float = 0.05
    growth: float = 1.2
    hold: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not 0.0 <= self.a0 <= 1.0:
            raise ValueError(f"a0 must lie in [0, 1], got {self.a0!r}")
        if self.growth < 1.0:
            raise ValueError(f"growth factor must be >= 1, got {self.growth!r}")
        if self.hold < 0:
            raise ValueError("hold must be non-negative")

    @classmethod
    def constant(cls, a0: float) -> AlphaSchedule:
        return cls("constant", a0, 1.0, 0)

    @classmethod
    def geometric(cls, a0: float, growth: float) -> AlphaSchedule:
        return cls("geometric_ramp", a0, growth, 0)

    @classmethod
    def two_phase(cls, a0: float, growth: float, hold: int) -> AlphaSchedule:
        return cls("two_phase", a0, growth, hold)

    def __call__(self, iteration: int) -> float:
        return alpha_at(self, iteration)

    def values(self, n: int) -> np.ndarray:
        return np.array([alpha_at(self, i) for i in range(n)])

    def __str__(self) -> str:
        if self.kind == "constant":
            return f"const:{self.a0:g}"
        if self.kind == "geometric_ramp":
            return f"geo:{self.a0:g},{self.growth:g}"
        return f"two:{self.a0:g},{self.growth:g},{self.hold}"


def alpha_at(schedule: AlphaSchedule, iteration: int) -> float:
    if iteration < 0:
        raise ValueError("iteration must be non-negative")
    if schedule.kind == "constant" or schedule.a0 == 0.0:
        return schedule.a0
    if schedule.kind == "two_phase":
        if iteration < schedule.hold:
            return schedule.a0
        iteration -= schedule.hold
    # a0 * growth**i overflows for long runs; the cap makes exactness moot there
    try:
        value = schedule.a0 * schedule.growth**iteration
    except OverflowError:
        value = 1.0
    return min(1.0, value)


def parse_alpha(text: str) -> AlphaSchedule:
    """Parse ``const:a0``, ``geo:a0,r`` or ``two:a0,r,N``."""
    kind, _, rest = text.partition(":")
    try:
        args = [float(v) for v in rest.split(",")] if rest else []
        if kind == "const" and len(args) == 1:
            return AlphaSchedule.constant(args[0])
        if kind == "geo" and len(args) == 2:
            return AlphaSchedule.geometric(args[0], args[1])
        if kind == "two" and len(args) == 3 and args[2] == int(args[2]):
            return AlphaSchedule.two_phase(args[0], args[1], int(args[2]))
    except ValueError as exc:
        raise ValueError(f"bad alpha schedule {text!r}: {exc}") from exc
    raise ValueError(f"bad alpha schedule {text!r}")
