"""Subjectively recorded paths and the image filtration they generate.

The experienced path of w at time t evaluates each arrow of the filtration
at its own landing time: bit s of the record is what the map into time s
says happened at s.  Collecting the records gives image spaces with
pushforward weights and restriction maps between them; the recording maps
commute with the filtration's arrows (a naturality square per time pair),
which is verified exhaustively here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .binomial import Filtration, Path
from .probability import EPS_EQ, FinProbSpace
from .timegrid import GridTime, grid_points


def experienced_path(F: Filtration, t: GridTime, w: Path) -> Path:
    """The record an agent carrying F keeps of w at time t."""
    bits = []
    for s in grid_points("left-open", GridTime(0, t.N), t):
        bits.append(F.morphism_at(s, t)(w).bit_at(s))
    return Path(tuple(bits), t)


def recording_map(F: Filtration, t: GridTime) -> dict[Path, Path]:
    return {w: experienced_path(F, t, w) for w in F.space_at(t).outcomes}


def tilde_filtration(F: Filtration, horizon: GridTime) -> Filtration:
    """The image filtration: recorded paths with pushforward weights, related
    by plain restriction."""
    spaces: dict[GridTime, FinProbSpace] = {}
    for t in grid_points("closed", GridTime(0, horizon.N), horizon):
        physical = F.space_at(t)
        record = recording_map(F, t)
        weights: dict[Path, float] = {}
        for w in physical.outcomes:
            weights[record[w]] = weights.get(record[w], 0.0) + physical.weight(w)
        spaces[t] = FinProbSpace(tuple(sorted(weights)), weights)

    return Filtration(
        F.N,
        space_fn=lambda t: spaces[t],
        map_fn=lambda s, t: (lambda w: w) if s == t else (lambda w: w.restrict(s)),
        kind_fn=lambda s, t: "full",
        name=f"tilde({F.name})" if F.name else "tilde",
    )


@dataclass(frozen=True)
class SquareFailure:
    s: GridTime
    t: GridTime
    path: Path
    via_record: Path  # restrict(record at t)
    via_arrow: Path  # record at s of the arrow image


@dataclass
class NaturalityReport:
    squares_checked: int
    failures: list[SquareFailure]
    mass_errors: list[tuple[GridTime, float]]  # image-weight totals off 1

    @property
    def ok(self) -> bool:
        return not self.failures and not self.mass_errors


def naturality_check(F: Filtration, horizon: GridTime, eps: float = EPS_EQ) -> NaturalityReport:
    """For every s <= t <= horizon and every path, recording then restricting
    must equal mapping then recording; image weights must also be measures."""
    times = grid_points("closed", GridTime(0, horizon.N), horizon)
    records = {t: recording_map(F, t) for t in times}
    failures = []
    squares = 0
    for s in times:
        for t in times:
            if s > t:
                continue
            squares += 1
            m = F.morphism_at(s, t)
            for w in F.space_at(t).outcomes:
                via_record = records[t][w].restrict(s)
                via_arrow = records[s][m(w)]
                if via_record != via_arrow:
                    failures.append(SquareFailure(s, t, w, via_record, via_arrow))

    mass_errors = []
    for t in times:
        physical = F.space_at(t)
        image_mass: dict[Path, float] = {}
        for w in physical.outcomes:
            rec = records[t][w]
            image_mass[rec] = image_mass.get(rec, 0.0) + physical.weight(w)
        total = sum(image_mass.values())
        if abs(total - 1.0) > eps:
            mass_errors.append((t, total))
    return NaturalityReport(squares, failures, mass_errors)


def filtrations_equal(A: Filtration, B: Filtration, horizon: GridTime, eps: float = EPS_EQ) -> bool:
    """Same outcome sets, same weights to eps, same arrow actions, up to horizon."""
    times = grid_points("closed", GridTime(0, horizon.N), horizon)
    for t in times:
        sa, sb = A.space_at(t), B.space_at(t)
        if sa.outcomes != sb.outcomes:
            return False
        if any(abs(sa.weight(w) - sb.weight(w)) > eps for w in sa.outcomes):
            return False
    for s in times:
        for t in times:
            if s > t:
                continue
            ma, mb = A.morphism_at(s, t), B.morphism_at(s, t)
            if ma.mapping != mb.mapping:
                return False
    return True
