"""Binomial path spaces, the restrict/forget maps, and filtration functors.

A path at time t is the bit sequence of up/down moves over the grid times in
(0, t].  The two map families shipped here are

* ``full``: restrict a path to an earlier interval (classical information),
* ``drop``: restrict, then zero the bit at the landing time (forget what
  happened right then).

A filtration assigns a weighted path space to each grid time and a map to
each backward arrow, composing functorially; ``check_functor_laws``
verifies that exhaustively at desk scale.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import EnumerationCapError, TimeOrderError
from .probability import EPS_MASS, FinProbSpace, ProbMorphism, RandomVariable, is_null_preserving
from .timegrid import GridTime, TimeArrow, grid_points, same_resolution

DEFAULT_MAX_BITS = 20
_MAX_BITS_ENV = "GENFIL_MAX_BITS"


def max_bits() -> int:
    """Enumeration cap in path bits; override with the GENFIL_MAX_BITS env var."""
    raw = os.environ.get(_MAX_BITS_ENV)
    return int(raw) if raw else DEFAULT_MAX_BITS


@dataclass(frozen=True)
class Path:
    """An up/down bit sequence indexed by the grid times in (0, t]."""

    bits: tuple[int, ...]
    time: GridTime

    def __post_init__(self):
        if len(self.bits) != self.time.n:
            raise ValueError(f"path has {len(self.bits)} bits but time {self.time} needs {self.time.n}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("path bits must be 0 or 1")

    def bit_at(self, s: GridTime) -> int:
        """The move recorded at grid time s in (0, t]."""
        same_resolution(s, self.time)
        if not 0 < s.n <= self.time.n:
            raise ValueError(f"time {s} outside (0, {self.time}]")
        return self.bits[s.n - 1]

    def extend(self, d: int) -> "Path":
        """The path one step longer, with d at the new final time."""
        return Path(self.bits + (d,), self.time.step(1))

    def restrict(self, s: GridTime) -> "Path":
        """The path cut down to (0, s]."""
        same_resolution(s, self.time)
        if s > self.time:
            raise TimeOrderError(f"cannot restrict a path at {self.time} to later time {s}")
        return Path(self.bits[: s.n], s)

    def zero_at(self, s: GridTime) -> "Path":
        """The same path with the bit at s forced to 0."""
        same_resolution(s, self.time)
        if not 0 < s.n <= self.time.n:
            raise ValueError(f"time {s} outside (0, {self.time}]")
        bits = list(self.bits)
        bits[s.n - 1] = 0
        return Path(tuple(bits), self.time)

    def label(self) -> str:
        return "".join(str(b) for b in self.bits) if self.bits else "*"

    def __str__(self):
        return self.label()

    def __lt__(self, other):
        return self.bits < other.bits


@dataclass(frozen=True)
class BernoulliParams:
    """Per-step up probabilities on an N-grid: a scalar default plus overrides."""

    N: int
    p: float = 0.5
    per_time: Mapping[GridTime, float] = field(default_factory=dict)

    def __post_init__(self):
        for value in (self.p, *self.per_time.values()):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"up probability {value} outside [0, 1]")

    def p_at(self, t: GridTime) -> float:
        return self.per_time.get(t, self.p)

    def is_trivial(self, horizon: GridTime) -> bool:
        """True when every step probability over (0, horizon] is 0 or 1."""
        return all(self.p_at(t) in (0.0, 1.0) for t in steps_through(horizon))


def steps_through(horizon: GridTime) -> list[GridTime]:
    """The grid times in (0, horizon], i.e. every step's landing-side index."""
    return grid_points("left-open", GridTime(0, horizon.N), horizon)


def enumerate_paths(N: int, t: GridTime, cap: int | None = None) -> list[Path]:
    """All paths at time t in lexicographic bit order (earliest move first)."""
    if t.N != N:
        raise ValueError(f"time {t} not at resolution {N}")
    cap = max_bits() if cap is None else cap
    if t.n > cap:
        raise EnumerationCapError(f"{t.n} bits at time {t} exceeds the cap of {cap} (set {_MAX_BITS_ENV})")
    return [Path(bits, t) for bits in itertools.product((0, 1), repeat=t.n)]


def path_weight(params: BernoulliParams, path: Path) -> float:
    """Product weight: p at each up move, 1-p at each down move."""
    w = 1.0
    for k, b in enumerate(path.bits, start=1):
        p = params.p_at(GridTime(k, path.time.N))
        w *= p if b else 1.0 - p
    return w


def build_space(params: BernoulliParams, t: GridTime, cap: int | None = None) -> FinProbSpace:
    """The weighted path space at time t under the given step probabilities."""
    paths = enumerate_paths(params.N, t, cap)
    return FinProbSpace(paths, {w: path_weight(params, w) for w in paths})


def full_map(s: GridTime, t: GridTime) -> Callable[[Path], Path]:
    """Path action of the restriction map onto (0, s]."""
    same_resolution(s, t)
    if s > t:
        raise TimeOrderError(f"no map exists for s={s} > t={t}")
    return lambda path: path.restrict(s)


def drop_map(s: GridTime, t: GridTime) -> Callable[[Path], Path]:
    """Path action of restrict-then-forget: cut to (0, s] and zero the bit at s."""
    same_resolution(s, t)
    if s > t:
        raise TimeOrderError(f"no map exists for s={s} > t={t}")
    if s.n == 0:
        raise ValueError("the forget map is undefined at the root: no coordinate to zero")
    return lambda path: path.restrict(s).zero_at(s)


def full_morphism(params: BernoulliParams, s: GridTime, t: GridTime) -> ProbMorphism:
    """Restriction map as a morphism between the weighted path spaces."""
    source, target = build_space(params, t), build_space(params, s)
    fn = full_map(s, t)
    return ProbMorphism(source, target, {w: fn(w) for w in source.outcomes})


def drop_morphism(params: BernoulliParams, s: GridTime, t: GridTime) -> ProbMorphism:
    """Restrict-then-forget map as a morphism between the weighted path spaces."""
    source, target = build_space(params, t), build_space(params, s)
    fn = drop_map(s, t)
    return ProbMorphism(source, target, {w: fn(w) for w in source.outcomes})


class Filtration:
    """A time-indexed family of weighted path spaces plus a map per arrow.

    ``space_at`` and ``path_map`` are supplied as callables so the same class
    covers the classical construction, the memory-drop variant, re-weighted
    (risk-neutral) copies, image (subjective) filtrations, and adversarial
    functors built in tests.  Results are cached per time / time pair.
    """

    def __init__(
        self,
        N: int,
        space_fn: Callable[[GridTime], FinProbSpace],
        map_fn: Callable[[GridTime, GridTime], Callable[[Path], Path]],
        kind_fn: Callable[[GridTime, GridTime], str] | None = None,
        name: str = "",
    ):
        self.N = N
        self.name = name
        self._space_fn = space_fn
        self._map_fn = map_fn
        self._kind_fn = kind_fn or (lambda s, t: "custom")
        self._spaces: dict[GridTime, FinProbSpace] = {}
        self._morphisms: dict[tuple[GridTime, GridTime], ProbMorphism] = {}

    def space_at(self, t: GridTime) -> FinProbSpace:
        if t not in self._spaces:
            self._spaces[t] = self._space_fn(t)
        return self._spaces[t]

    def arrow_kind(self, s: GridTime, t: GridTime) -> str:
        """'identity', 'full', 'drop', or 'custom' for the arrow t -> s."""
        if s == t:
            return "identity"
        return self._kind_fn(s, t)

    def morphism_at(self, s: GridTime, t: GridTime) -> ProbMorphism:
        """The morphism assigned to the unique arrow t -> s (s <= t)."""
        same_resolution(s, t)
        if s > t:
            raise TimeOrderError(f"no arrow exists: {s} > {t}")
        key = (s, t)
        if key not in self._morphisms:
            source, target = self.space_at(t), self.space_at(s)
            fn = self._map_fn(s, t)
            self._morphisms[key] = ProbMorphism(source, target, {w: fn(w) for w in source.outcomes})
        return self._morphisms[key]

    def morphism_for(self, a: TimeArrow) -> ProbMorphism:
        return self.morphism_at(a.target, a.source)

    def one_step(self, t: GridTime) -> ProbMorphism:
        """The morphism for the single-step arrow t + delta -> t."""
        return self.morphism_at(t, t.step(1))


def make_full_filtration(params: BernoulliParams) -> Filtration:
    """The classical filtration: every arrow acts by restriction."""
    return Filtration(
        params.N,
        space_fn=lambda t: build_space(params, t),
        map_fn=lambda s, t: (lambda w: w) if s == t else full_map(s, t),
        kind_fn=lambda s, t: "full",
        name="full",
    )


def make_drop_filtration(params: BernoulliParams, alpha: GridTime, beta: GridTime) -> Filtration:
    """The memory-drop filtration: arrows landing inside [alpha, beta] from
    strictly later times forget the bit at the landing time; all others
    restrict.

    The window is an interval of real time: alpha and beta may sit at any
    resolution (only grid times of the filtration's own resolution can land
    in it).  Arrows landing at time 0 are plain restriction regardless
    (there is no coordinate at the root to forget).
    """
    if alpha > beta:
        raise TimeOrderError(f"alpha {alpha} > beta {beta}")

    def kind(s: GridTime, t: GridTime) -> str:
        if s == t:
            return "identity"
        if s.n > 0 and alpha <= s <= beta:
            return "drop"
        return "full"

    def map_fn(s: GridTime, t: GridTime) -> Callable[[Path], Path]:
        if s == t:
            return lambda w: w
        return drop_map(s, t) if kind(s, t) == "drop" else full_map(s, t)

    return Filtration(
        params.N,
        space_fn=lambda t: build_space(params, t),
        map_fn=map_fn,
        kind_fn=kind,
        name=f"drop[{alpha.label()},{beta.label()}]",
    )


def xi(params: BernoulliParams, t: GridTime) -> RandomVariable:
    """The +-1 driving variable at t: twice the bit at t, minus one."""
    if t.n == 0:
        raise ValueError("no move is recorded at time 0")
    space = build_space(params, t)
    return RandomVariable(space, {w: float(2 * w.bit_at(t) - 1) for w in space.outcomes})


def next_bit_fiber(m: ProbMorphism, omega: Path, bit: int) -> tuple[Path, ...]:
    """The part of a one-step fiber over omega whose new final move equals bit."""
    return tuple(w for w in m.fiber(omega) if w.bits[-1] == bit)


@dataclass(frozen=True)
class LawViolation:
    law: str  # 'unit' | 'composition' | 'null-preservation'
    times: tuple[GridTime, ...]
    detail: str


@dataclass
class FunctorLawReport:
    horizon: GridTime
    arrows_checked: int
    triples_checked: int
    violations: list[LawViolation]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_functor_laws(F: Filtration, horizon: GridTime, eps: float = EPS_MASS) -> FunctorLawReport:
    """Exhaustively verify unit, composition, and null-preservation up to horizon.

    Violations are reported as data, not raised: the checker is meant to
    accept adversarial functors.
    """
    times = grid_points("closed", GridTime(0, horizon.N), horizon)
    violations: list[LawViolation] = []

    for t in times:
        m = F.morphism_at(t, t)
        if not m.is_identity():
            bad = next(w for w in m.source.outcomes if m.mapping[w] != w)
            violations.append(LawViolation("unit", (t,), f"identity arrow at {t} moves path {bad}"))

    arrows = [(s, t) for s in times for t in times if s <= t]
    for s, t in arrows:
        check = is_null_preserving(F.morphism_at(s, t), eps)
        if not check.ok:
            violations.append(
                LawViolation(
                    "null-preservation",
                    (s, t),
                    f"arrow {t}->{s} pushes mass onto null path {check.witness}",
                )
            )

    triples = 0
    for s in times:
        for t in times:
            if t < s:
                continue
            for u in times:
                if u < t:
                    continue
                triples += 1
                inner = F.morphism_at(t, u)
                outer = F.morphism_at(s, t)
                direct = F.morphism_at(s, u)
                for w in inner.source.outcomes:
                    if outer.mapping[inner.mapping[w]] != direct.mapping[w]:
                        violations.append(
                            LawViolation(
                                "composition",
                                (s, t, u),
                                f"({t}->{s}) o ({u}->{t}) differs from {u}->{s} at path {w}",
                            )
                        )
                        break

    return FunctorLawReport(horizon, len(arrows), triples, violations)
