"""Risk-neutral re-weightings of a filtration.

The construction keeps the measurable data (path spaces and arrows) of a
base filtration and replaces the measures with product measures built from
per-step sibling weights q, chosen so the discounted stock satisfies the
one-step pricing identity

    Q_t({w}) = c1 * Q_{t+d}(up fiber part) + c0 * Q_{t+d}(down fiber part).

For plain restriction steps the sibling weights are the unique solution of
c1*q1 + c0*q0 = 1.  A forget-arrow landing at time t has an empty fiber over
every path whose bit at t is 1, which forces that layer's weights to (0, 1)
and kills the upper subtree: the new measures are *not* equivalent to the
physical ones, and the weights on the orphaned subtree are free parameters.

One consequence is reported rather than enforced by ``martingale_check``:
the (0, 1) layer pinned at a forget landing is incompatible with the pricing
identity of the step that *enters* that layer (the identity would need a
sibling weight of 1/c0 > 1).  Those entering steps have no admissible
weights at all, so their residuals are returned as informational boundary
rows and every other node must pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .binomial import Filtration, Path, next_bit_fiber
from .errors import MartingaleBoundError
from .market import MarketParams, discounted_stock
from .probability import EPS_EQ, EPS_MASS, FinProbSpace, is_null_preserving
from .timegrid import GridTime, grid_points


@dataclass(frozen=True)
class MartingaleConstants:
    """Per-step growth ratios of the discounted stock: up factor / growth and
    down factor / growth."""

    c1: float
    c0: float


def martingale_constants(params: MarketParams) -> MartingaleConstants:
    return MartingaleConstants(
        c1=params.up_factor / params.growth,
        c0=params.down_factor / params.growth,
    )


def q_star(params: MarketParams) -> tuple[float, float]:
    """The unique sibling weights with c1*q1 + c0*(1 - q1) = 1.

    Solving directly gives q1 = 1/2 - (mu - r) / (2**(N/2 + 1) * sigma),
    which lies in (0, 1) exactly when |mu - r| < 2**(N/2) * sigma.
    """
    bound = 2.0 ** (params.N / 2.0) * params.sigma
    if abs(params.mu - params.r) >= bound:
        raise MartingaleBoundError(
            f"|mu - r| = {abs(params.mu - params.r)} >= 2**(N/2)*sigma = {bound}: "
            "no sibling weights in (0, 1) exist"
        )
    q1 = 0.5 - (params.mu - params.r) / (2.0 ** (params.N / 2.0 + 1.0) * params.sigma)
    return q1, 1.0 - q1


@dataclass
class QFunction:
    """Sibling weights per path: at each time t in (0, horizon], a weight for
    every path at t, with each sibling pair summing to 1."""

    weights: dict[GridTime, dict[Path, float]]

    def at(self, t: GridTime) -> dict[Path, float]:
        return self.weights[t]

    def validate(self, eps: float = EPS_EQ) -> None:
        for t, layer in self.weights.items():
            for w, q in layer.items():
                if not -eps <= q <= 1.0 + eps:
                    raise ValueError(f"sibling weight {q} at ({t}, {w}) outside [0, 1]")
            pairs = {w.bits[:-1] for w in layer}
            for stem in pairs:
                total = layer[Path(stem + (0,), t)] + layer[Path(stem + (1,), t)]
                if abs(total - 1.0) > eps:
                    raise ValueError(f"sibling weights at ({t}, {''.join(map(str, stem))}*) sum to {total}")


class RiskNeutralFiltration:
    """A base filtration's measurable data with product measures from a QFunction.

    Measures are materialized lazily per time from the running q products;
    the arrows are shared with the base unchanged.
    """

    def __init__(self, base: Filtration, q: QFunction, params: MarketParams, horizon: GridTime):
        self.base = base
        self.q = q
        self.params = params
        self.horizon = horizon
        self._measures: dict[GridTime, dict[Path, float]] = {}
        self._filtration: Filtration | None = None

    def measure_at(self, t: GridTime) -> dict[Path, float]:
        if t not in self._measures:
            base_space = self.base.space_at(t)
            out = {}
            for w in base_space.outcomes:
                mass = 1.0
                for k in range(1, t.n + 1):
                    u = GridTime(k, t.N)
                    mass *= self.q.at(u)[w.restrict(u)]
                out[w] = mass
            self._measures[t] = out
        return self._measures[t]

    def space_at(self, t: GridTime) -> FinProbSpace:
        return self.filtration().space_at(t)

    def filtration(self) -> Filtration:
        """The re-weighted filtration: same outcome sets and maps, new measures."""
        if self._filtration is None:
            base = self.base
            self._filtration = Filtration(
                base.N,
                space_fn=lambda t: FinProbSpace(base.space_at(t).outcomes, self.measure_at(t)),
                map_fn=base._map_fn,
                kind_fn=base.arrow_kind,
                name=f"risk-neutral({base.name})",
            )
        return self._filtration


def _steps(horizon: GridTime) -> list[GridTime]:
    return grid_points("left-open", GridTime(0, horizon.N), horizon)


def _drop_landings(base: Filtration, horizon: GridTime) -> set[GridTime]:
    """Times t whose one-step arrow t+delta -> t (within horizon) is a forget arrow."""
    out = set()
    for t in grid_points("right-open", GridTime(0, horizon.N), horizon):
        if base.arrow_kind(t, t.step(1)) == "drop":
            out.add(t)
    return out


def build_risk_neutral(
    base: Filtration,
    params: MarketParams,
    horizon: GridTime,
    free: Mapping[Path, float] | None = None,
) -> RiskNeutralFiltration:
    """Construct the product-measure re-weighting for a full/drop base.

    Every layer starts from the solved sibling weights.  For each forget
    arrow t+delta -> t within the horizon:

    * on the layer below the forgotten bit (time t+delta), paths continuing
      the orphaned bit-1 subtree take their weight from ``free`` (default:
      the solved up weight), siblings complementing to 1;
    * the landing layer itself (time t) is pinned to weight 0 on bit-1 paths
      and 1 on bit-0 paths, which is what empties the upper subtree.
    """
    free = dict(free or {})
    q1, q0 = q_star(params)
    for node, value in free.items():
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"free weight {value} at {node} outside [0, 1]")

    weights: dict[GridTime, dict[Path, float]] = {}
    for u in _steps(horizon):
        space_paths = build_space_paths(base, u)
        weights[u] = {w: (q1 if w.bit_at(u) else q0) for w in space_paths}

    landings = sorted(_drop_landings(base, horizon))
    for t in landings:
        child = t.step(1)
        if child <= horizon:
            for w in weights[child]:
                if w.bit_at(t) == 1:  # orphaned subtree below the forgotten bit
                    if w.bit_at(child) == 1:
                        weights[child][w] = free.get(w, q1)
                    else:
                        sibling = Path(w.bits[:-1] + (1,), child)
                        weights[child][w] = 1.0 - free.get(sibling, q1)
    for t in landings:
        for w in weights[t]:
            weights[t][w] = 0.0 if w.bit_at(t) == 1 else 1.0

    q = QFunction(weights)
    q.validate()
    return RiskNeutralFiltration(base, q, params, horizon)


def build_space_paths(base: Filtration, t: GridTime) -> tuple[Path, ...]:
    return base.space_at(t).outcomes


def build_rn_full(base: Filtration, params: MarketParams, horizon: GridTime) -> RiskNeutralFiltration:
    """Re-weighting of a pure-restriction base: the solved weights everywhere."""
    for t in grid_points("right-open", GridTime(0, horizon.N), horizon):
        if base.arrow_kind(t, t.step(1)) != "full":
            raise ValueError(f"base is not a pure-restriction filtration at step {t}")
    return build_risk_neutral(base, params, horizon)


def build_rn_drop(
    base: Filtration,
    params: MarketParams,
    horizon: GridTime,
    free: Mapping[Path, float] | None = None,
) -> RiskNeutralFiltration:
    """Re-weighting of a memory-drop base; ``free`` sets the orphaned-subtree
    weights (any value in [0, 1] yields the same measures, since the landing
    layer zeroes the whole subtree)."""
    return build_risk_neutral(base, params, horizon, free)


@dataclass(frozen=True)
class MartingaleRow:
    t: GridTime
    path: Path
    lhs: float  # Q_t({w})
    rhs: float  # c1 * Q_{t+d}(up part) + c0 * Q_{t+d}(down part)
    direct_error: float | None  # |E(S'_{t+d}) - S'_t| where Q_t(w) > 0, else None
    enforced: bool

    @property
    def error(self) -> float:
        return abs(self.lhs - self.rhs)


@dataclass
class MartingaleReport:
    rows: list[MartingaleRow]
    eps: float

    @property
    def violations(self) -> list[MartingaleRow]:
        return [
            r
            for r in self.rows
            if r.enforced and (r.error > self.eps or (r.direct_error or 0.0) > self.eps)
        ]

    @property
    def boundary_rows(self) -> list[MartingaleRow]:
        return [r for r in self.rows if not r.enforced]

    @property
    def ok(self) -> bool:
        return not self.violations


def martingale_check(
    rn: RiskNeutralFiltration, horizon: GridTime | None = None, eps: float = EPS_EQ
) -> MartingaleReport:
    """Verify the one-step pricing identity at every node, both in weight form
    and as a direct conditional expectation of the discounted stock.

    Steps whose target layer is pinned by a forget landing (the next arrow is
    a drop) admit no weights at all; their rows are computed and returned
    with ``enforced=False`` so the measured residual is visible, and the
    verdict is taken over all other rows.
    """
    horizon = horizon or rn.horizon
    params = rn.params
    consts = martingale_constants(params)
    disc = discounted_stock(rn.base, params, horizon)
    landings = _drop_landings(rn.base, horizon)
    rows: list[MartingaleRow] = []
    for t in grid_points("right-open", GridTime(0, horizon.N), horizon):
        child = t.step(1)
        enforced = child not in landings
        m = rn.base.morphism_at(t, child)
        q_t = rn.measure_at(t)
        q_child = rn.measure_at(child)
        s_now, s_next = disc.at(t), disc.at(child)
        for w in rn.base.space_at(t).outcomes:
            up = sum(q_child[v] for v in next_bit_fiber(m, w, 1))
            down = sum(q_child[v] for v in next_bit_fiber(m, w, 0))
            rhs = consts.c1 * up + consts.c0 * down
            direct = None
            if q_t[w] > 0.0:
                fiber_mean = sum(s_next(v) * q_child[v] for v in m.fiber(w)) / q_t[w]
                direct = abs(fiber_mean - s_now(w))
            rows.append(MartingaleRow(t, w, q_t[w], rhs, direct, enforced))
    return MartingaleReport(rows, eps)


@dataclass
class QcondReport:
    """Joint verdicts of the three equivalent product-measure conditions."""

    mass_conserved: bool  # sibling masses add up to the parent mass
    restriction_preserving: bool  # pushforward under plain restriction returns the parent measure
    product_form: bool  # sibling weights exist: in [0,1], summing to 1, reproducing the measure
    witnesses: list[tuple[str, GridTime, Path]]

    @property
    def consistent(self) -> bool:
        return self.mass_conserved == self.restriction_preserving == self.product_form

    @property
    def ok(self) -> bool:
        return self.mass_conserved and self.restriction_preserving and self.product_form


def qcond_equivalences(
    measures: "RiskNeutralFiltration | Mapping[GridTime, Mapping[Path, float]]",
    horizon: GridTime,
    eps: float = EPS_EQ,
) -> QcondReport:
    """Evaluate the three equivalent characterizations of a product measure
    family on the full binomial tree (they must pass or fail together)."""
    if isinstance(measures, RiskNeutralFiltration):
        family = {t: measures.measure_at(t) for t in grid_points("closed", GridTime(0, horizon.N), horizon)}
    else:
        family = {t: dict(layer) for t, layer in measures.items()}

    witnesses: list[tuple[str, GridTime, Path]] = []
    mass_ok = True
    push_ok = True
    product_ok = True
    for t in grid_points("right-open", GridTime(0, horizon.N), horizon):
        child = t.step(1)
        parent_layer, child_layer = family[t], family[child]
        pushed = {w: 0.0 for w in parent_layer}
        for v, mass in child_layer.items():
            pushed[v.restrict(t)] += mass
        for w in sorted(parent_layer):
            up, down = child_layer[w.extend(1)], child_layer[w.extend(0)]
            total = up + down
            if abs(total - parent_layer[w]) > eps:
                mass_ok = False
                witnesses.append(("mass", child, w))
            if abs(pushed[w] - parent_layer[w]) > eps:
                push_ok = False
                witnesses.append(("restriction", child, w))
            if parent_layer[w] > eps:
                qa, qb = up / parent_layer[w], down / parent_layer[w]
                if abs(qa + qb - 1.0) > eps or not -eps <= qa <= 1.0 + eps:
                    product_ok = False
                    witnesses.append(("product", child, w))
            elif total > eps:  # zero-mass parent with surviving children: no product form
                product_ok = False
                witnesses.append(("product", child, w))
    return QcondReport(mass_ok, push_ok, product_ok, witnesses)


@dataclass
class NullPreservationReport:
    violations: list[tuple[GridTime, GridTime, Path]]  # (s, t, witness target path)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_null_preserving_under_q(rn: RiskNeutralFiltration, horizon: GridTime | None = None) -> NullPreservationReport:
    """Check every arrow of the re-weighted filtration for null-preservation."""
    horizon = horizon or rn.horizon
    F = rn.filtration()
    times = grid_points("closed", GridTime(0, horizon.N), horizon)
    violations = []
    for s in times:
        for t in times:
            if s > t:
                continue
            check = is_null_preserving(F.morphism_at(s, t))
            if not check.ok:
                violations.append((s, t, check.witness))
    return NullPreservationReport(violations)


def equivalence_witnesses(
    rn: RiskNeutralFiltration, horizon: GridTime | None = None, eps: float = EPS_MASS
) -> list[tuple[GridTime, Path]]:
    """Paths with zero re-weighted mass but positive physical mass, in time
    then path order; empty exactly when the two measure families share support."""
    horizon = horizon or rn.horizon
    out = []
    for t in grid_points("closed", GridTime(0, horizon.N), horizon):
        physical = rn.base.space_at(t)
        q_t = rn.measure_at(t)
        for w in physical.outcomes:
            if q_t[w] <= eps < physical.weight(w):
                out.append((t, w))
    return out
