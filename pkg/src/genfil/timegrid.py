"""Dyadic time grid: exact (n, N) time points and the unique backward arrows.

Times are stored as integer pairs t = n * 2**-N and never as floats, so
interval enumeration and equality are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ResolutionError, TimeOrderError

INTERVAL_KINDS = ("closed", "left-open", "right-open", "open")


@dataclass(frozen=True, eq=False)
class GridTime:
    """A grid time n * 2**-N with step index n >= 0 at resolution N >= 0.

    Equality and ordering compare the represented rational value, so e.g.
    GridTime(1, 1) == GridTime(2, 2) (both are 1/2).
    """

    n: int
    N: int

    def __post_init__(self):
        if self.n < 0 or self.N < 0:
            raise ValueError(f"grid time needs n >= 0 and N >= 0, got ({self.n}, {self.N})")

    @property
    def value(self) -> Fraction:
        return Fraction(self.n, 1 << self.N)

    def step(self, k: int = 1) -> "GridTime":
        """The grid time k steps away at the same resolution."""
        return GridTime(self.n + k, self.N)

    def label(self) -> str:
        """Exact decimal rendering, e.g. '0.375'; dyadics always terminate."""
        if self.N == 0:
            return str(self.n)
        digits = str(self.n * 5**self.N).rjust(self.N + 1, "0")
        head, tail = digits[: -self.N], digits[-self.N :]
        tail = tail.rstrip("0")
        return head if not tail else f"{head}.{tail}"

    def __eq__(self, other):
        if not isinstance(other, GridTime):
            return NotImplemented
        return self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __lt__(self, other):
        return self.value < other.value

    def __le__(self, other):
        return self.value <= other.value

    def __gt__(self, other):
        return self.value > other.value

    def __ge__(self, other):
        return self.value >= other.value

    def __repr__(self):
        return f"GridTime({self.n}, {self.N})"

    def __str__(self):
        return self.label()


@dataclass(frozen=True)
class TimeArrow:
    """The unique arrow from a later time to an earlier one on the same grid."""

    source: GridTime
    target: GridTime

    def __post_init__(self):
        if self.source.N != self.target.N:
            raise ResolutionError(
                f"arrow endpoints must share a resolution, got N={self.source.N} and N={self.target.N}"
            )
        if self.target > self.source:
            raise TimeOrderError(f"arrow must point backward: target {self.target} > source {self.source}")

    @property
    def is_identity(self) -> bool:
        return self.source == self.target

    def then(self, other: "TimeArrow") -> "TimeArrow":
        """Compose with an arrow continuing backward: (u -> t) then (t -> s) = u -> s."""
        if self.target != other.source:
            raise TimeOrderError(f"arrows do not compose: {self.target} != {other.source}")
        return TimeArrow(self.source, other.target)


def same_resolution(s: GridTime, t: GridTime) -> int:
    if s.N != t.N:
        raise ResolutionError(f"mixed resolutions N={s.N} and N={t.N}")
    return s.N


def grid_points(kind: str, s: GridTime, t: GridTime) -> list[GridTime]:
    """All grid times of resolution N inside the requested interval, ascending.

    kind is one of 'closed', 'left-open', 'right-open', 'open'; e.g.
    ('left-open', 0, 1) at N=2 gives [1/4, 2/4, 3/4, 1].
    """
    if kind not in INTERVAL_KINDS:
        raise ValueError(f"unknown interval kind {kind!r}; expected one of {INTERVAL_KINDS}")
    N = same_resolution(s, t)
    lo = s.n + 1 if kind in ("left-open", "open") else s.n
    hi = t.n - 1 if kind in ("right-open", "open") else t.n
    return [GridTime(n, N) for n in range(lo, hi + 1)]


def arrow(s: GridTime, t: GridTime) -> TimeArrow:
    """The unique arrow t -> s; requires s <= t on one grid."""
    same_resolution(s, t)
    if s > t:
        raise TimeOrderError(f"no arrow exists: {s} > {t}")
    return TimeArrow(source=t, target=s)
