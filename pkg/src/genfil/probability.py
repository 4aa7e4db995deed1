"""Finite probability spaces, maps between them, and expectation along a map.

Outcomes are opaque hashable keys; the sigma-field is always the full
powerset, so every total map between outcome sets is measurable.  The one
non-trivial condition a map must satisfy is null-preservation (its
pushforward puts no mass on null outcomes of the target), which is exactly
what makes conditional expectation along the map well defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, NamedTuple

from .errors import NullPreservationError

# Measure sums are accepted within EPS_MASS of 1; pointwise identities are
# checked to EPS_EQ.  Desk-scale lattices keep accumulated error far below
# both.
EPS_MASS = 1e-9
EPS_EQ = 1e-10

Outcome = Hashable


class FinProbSpace:
    """A finite outcome set with one weight per outcome, summing to 1."""

    def __init__(self, outcomes, weights: Mapping[Outcome, float], check: bool = True):
        self.outcomes = tuple(outcomes)
        self.weights = {o: float(weights[o]) for o in self.outcomes}
        if check:
            if len(set(self.outcomes)) != len(self.outcomes):
                raise ValueError("duplicate outcomes")
            bad = [o for o, w in self.weights.items() if w < 0.0]
            if bad:
                raise ValueError(f"negative weight at {bad[0]!r}")
            total = sum(self.weights.values())
            if abs(total - 1.0) > EPS_MASS:
                raise ValueError(f"weights sum to {total!r}, not 1")

    def weight(self, outcome: Outcome) -> float:
        return self.weights[outcome]

    def mass(self, outcomes) -> float:
        return sum(self.weights[o] for o in outcomes)

    def support(self, eps: float = EPS_MASS) -> tuple:
        return tuple(o for o in self.outcomes if self.weights[o] > eps)

    def __contains__(self, outcome) -> bool:
        return outcome in self.weights

    def __len__(self) -> int:
        return len(self.outcomes)

    def __repr__(self):
        return f"FinProbSpace({len(self.outcomes)} outcomes)"


@dataclass(frozen=True)
class ProbMorphism:
    """A total map between two finite probability spaces."""

    source: FinProbSpace
    target: FinProbSpace
    mapping: Mapping[Outcome, Outcome]

    def __post_init__(self):
        missing = [o for o in self.source.outcomes if o not in self.mapping]
        if missing:
            raise ValueError(f"map not total: no image for {missing[0]!r}")
        stray = [o for o in self.source.outcomes if self.mapping[o] not in self.target]
        if stray:
            raise ValueError(f"map leaves the target space at {stray[0]!r}")

    def __call__(self, outcome: Outcome) -> Outcome:
        return self.mapping[outcome]

    def fiber(self, outcome: Outcome) -> tuple:
        """All source outcomes mapping onto the given target outcome."""
        return tuple(o for o in self.source.outcomes if self.mapping[o] == outcome)

    def then(self, other: "ProbMorphism") -> "ProbMorphism":
        """Composite map: apply self first, then other."""
        if other.source is not self.target and other.source.outcomes != self.target.outcomes:
            raise ValueError("morphisms do not compose: target/source outcome sets differ")
        return ProbMorphism(self.source, other.target, {o: other.mapping[self.mapping[o]] for o in self.source.outcomes})

    def is_identity(self) -> bool:
        return self.source.outcomes == self.target.outcomes and all(
            self.mapping[o] == o for o in self.source.outcomes
        )


@dataclass(frozen=True)
class RandomVariable:
    """A real-valued function on the outcomes of a finite probability space."""

    space: FinProbSpace
    values: Mapping[Outcome, float]

    def __post_init__(self):
        missing = [o for o in self.space.outcomes if o not in self.values]
        if missing:
            raise ValueError(f"random variable undefined at {missing[0]!r}")

    def __call__(self, outcome: Outcome) -> float:
        return self.values[outcome]

    @classmethod
    def from_function(cls, space: FinProbSpace, fn: Callable[[Outcome], float]) -> "RandomVariable":
        return cls(space, {o: float(fn(o)) for o in space.outcomes})

    @classmethod
    def constant(cls, space: FinProbSpace, c: float) -> "RandomVariable":
        return cls(space, {o: float(c) for o in space.outcomes})


class NullPreservationCheck(NamedTuple):
    ok: bool
    witness: Outcome | None


def pushforward(m: ProbMorphism) -> dict:
    """Image measure on the target: each outcome gets its fiber's source mass."""
    out = {o: 0.0 for o in m.target.outcomes}
    for o in m.source.outcomes:
        out[m.mapping[o]] += m.source.weight(o)
    return out


def is_null_preserving(m: ProbMorphism, eps: float = EPS_MASS) -> NullPreservationCheck:
    """Whether the pushforward puts (at most eps) mass on eps-null target outcomes.

    On powerset sigma-fields checking singletons suffices.  On failure the
    witness is a target outcome that is null yet receives positive mass.
    """
    pushed = pushforward(m)
    for o in m.target.outcomes:
        if m.target.weight(o) <= eps and pushed[o] > eps:
            return NullPreservationCheck(False, o)
    return NullPreservationCheck(True, None)


def conditional_expectation(X: RandomVariable, m: ProbMorphism, eps: float = EPS_MASS) -> RandomVariable:
    """Expectation of X along the map m, as a random variable on the target.

    At each target outcome with positive weight the value is the weighted
    fiber average  sum_{m(o') = o} X(o') w_src(o') / w_tgt(o).  On weight-0
    outcomes, where any value satisfies the defining identity, the value is
    fixed to 0 for determinism.
    """
    if X.space.outcomes != m.source.outcomes:
        raise ValueError("random variable does not live on the map's source space")
    check = is_null_preserving(m, eps)
    if not check.ok:
        raise NullPreservationError(
            f"map is not null-preserving: target outcome {check.witness!r} is null but receives mass",
            witness=check.witness,
        )
    sums = {o: 0.0 for o in m.target.outcomes}
    for o in m.source.outcomes:
        sums[m.mapping[o]] += X.values[o] * m.source.weight(o)
    values = {}
    for o in m.target.outcomes:
        w = m.target.weight(o)
        values[o] = sums[o] / w if w > 0.0 else 0.0
    return RandomVariable(m.target, values)


def expectation(X: RandomVariable) -> float:
    """Plain mean of X under its space's weights."""
    return sum(X.values[o] * X.space.weight(o) for o in X.space.outcomes)
