"""Open real intervals stored as (midpoint, half-length).

The scaled neighborhood tau*I (same midpoint, half-length multiplied by tau)
shows up in every geometric predicate, so the representation makes that
operation exact: scale(scale(I, t), 1/t) round-trips bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True, order=False)
class RealInterval:
    mid: float
    half: float

    def __post_init__(self):
        if not (self.half > 0.0):
            raise ConfigError(f"interval half-length must be positive, got {self.half}")

    @classmethod
    def from_endpoints(cls, a: float, b: float) -> "RealInterval":
        if not (b > a):
            raise ConfigError(f"need a < b, got ({a}, {b})")
        return cls(0.5 * (a + b), 0.5 * (b - a))

    @property
    def a(self) -> float:
        return self.mid - self.half

    @property
    def b(self) -> float:
        return self.mid + self.half

    @property
    def length(self) -> float:
        return 2.0 * self.half

    @property
    def endpoints(self) -> tuple[float, float]:
        return (self.a, self.b)

    def scaled(self, tau: float) -> "RealInterval":
        return RealInterval(self.mid, self.half * tau)

    def contains(self, x: float, closed: bool = False) -> bool:
        if closed:
            return self.a <= x <= self.b
        return self.a < x < self.b

    __contains__ = contains

    def contains_interval(self, other: "RealInterval", margin: float = 0.0) -> bool:
        """Closure containment with optional slack: other inside [a-m, b+m]."""
        return other.a >= self.a - margin and other.b <= self.b + margin

    def strictly_contains_interval(self, other: "RealInterval") -> bool:
        return other.a > self.a and other.b < self.b

    def intersects(self, other: "RealInterval") -> bool:
        return self.a < other.b and other.a < self.b

    def intersection(self, other: "RealInterval") -> "RealInterval | None":
        a = max(self.a, other.a)
        b = min(self.b, other.b)
        if b <= a:
            return None
        return RealInterval.from_endpoints(a, b)

    def hull(self, other: "RealInterval") -> "RealInterval":
        return RealInterval.from_endpoints(min(self.a, other.a), max(self.b, other.b))

    def distance_to(self, x: float) -> float:
        """Distance from x to the closure (0 inside)."""
        if x < self.a:
            return self.a - x
        if x > self.b:
            return x - self.b
        return 0.0

    def gap_to_boundary(self, x: float) -> float:
        """Distance from an interior point to the nearer endpoint."""
        return min(x - self.a, self.b - x)

    def relative_scale(self, x: float) -> float:
        """|x - mid| / half: <1 inside, 1 on the boundary, >1 outside."""
        return abs(x - self.mid) / self.half

    def same(self, other: "RealInterval", tol: float) -> bool:
        return abs(self.a - other.a) <= tol and abs(self.b - other.b) <= tol

    def __repr__(self) -> str:
        return f"({self.a:.17g}, {self.b:.17g})"


def scale(interval: RealInterval, tau: float) -> RealInterval:
    """tau * I: same midpoint, half-length scaled by tau."""
    if not (tau > 0.0):
        raise ConfigError(f"scale factor must be positive, got {tau}")
    return interval.scaled(tau)


def inner_gap_ratio(outer: RealInterval, inner: RealInterval) -> float:
    """Largest rho >= 0 with (1+2*rho) * inner contained in outer.

    Negative when inner is not contained in outer at all.
    """
    room = min(outer.b - inner.mid, inner.mid - outer.a)
    return 0.5 * (room / inner.half - 1.0)
