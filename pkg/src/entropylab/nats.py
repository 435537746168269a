"""Value type for entropy-like quantities measured in nats.

A :class:`Nats` carries the computed value together with a cheap running
bound on the absolute numerical error accumulated while computing it.
The bound is an estimate (machine epsilon times the mass of summed
terms), not a rigorous interval: it exists so that callers comparing two
entropies can tell whether a difference is resolvable at all.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Nats:
    """An entropy value in nats with an estimated absolute error bound."""

    value: float
    err: float = 0.0

    def __post_init__(self):
        if not self.err >= 0.0:
            raise ValueError(f"error bound must be >= 0, got {self.err}")

    def __float__(self) -> float:
        return self.value

    def __neg__(self) -> "Nats":
        return Nats(-self.value, self.err)

    def __add__(self, other: "Nats | float") -> "Nats":
        if isinstance(other, Nats):
            return Nats(self.value + other.value, self.err + other.err)
        return Nats(self.value + float(other), self.err)

    def __sub__(self, other: "Nats | float") -> "Nats":
        if isinstance(other, Nats):
            return Nats(self.value - other.value, self.err + other.err)
        return Nats(self.value - float(other), self.err)

    def scaled(self, factor: float) -> "Nats":
        return Nats(self.value * factor, self.err * abs(factor))
