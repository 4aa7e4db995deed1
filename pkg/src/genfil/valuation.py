"""Claim pricing along a risk-neutral filtration and replication extraction.

Prices are conditional expectations of the maturity-discounted payoff along
the filtration's own arrows, so a forget arrow prices by discarding the
orphaned branch.  Replication runs the one-step hedge backward wherever each
arrow factors through plain restriction; on nodes outside the factor image
the strategy holds nothing and its value target is zero (the position is
wound down when the market's map forgets the node).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from .binomial import Filtration, Path
from .errors import FactorizationError, TimeOrderError
from .market import MarketParams, Strategy, bond_value, is_self_financing, portfolio_value, stock_process
from .probability import EPS_EQ, ProbMorphism, RandomVariable, conditional_expectation
from .risk_neutral import RiskNeutralFiltration
from .timegrid import GridTime, grid_points


@dataclass(frozen=True)
class Claim:
    """A payoff at maturity: one real value per path at T."""

    maturity: GridTime
    payoff: Mapping[Path, float]

    @classmethod
    def from_function(cls, rn_or_f, maturity: GridTime, fn: Callable[[Path], float]) -> "Claim":
        base = rn_or_f.base if isinstance(rn_or_f, RiskNeutralFiltration) else rn_or_f
        paths = base.space_at(maturity).outcomes
        return cls(maturity, {w: float(fn(w)) for w in paths})


@dataclass
class PriceLattice:
    """Time-0-discounted prices per node for every grid time up to maturity."""

    prices: dict[GridTime, RandomVariable]

    def at(self, t: GridTime) -> RandomVariable:
        return self.prices[t]

    def root(self) -> float:
        t0 = min(self.prices)
        rv = self.prices[t0]
        return rv(rv.space.outcomes[0])


def price(claim: Claim, rn: RiskNeutralFiltration, t: GridTime) -> RandomVariable:
    """Price at t: expectation of the bond-discounted payoff along the arrow
    from maturity back to t, under the re-weighted measures.

    The result is a time-0-discounted price (no bond factor at t); multiply
    by the bond value at t for the nodal account value.
    """
    if t > claim.maturity:
        raise TimeOrderError(f"cannot price at {t} after maturity {claim.maturity}")
    F = rn.filtration()
    b_T = bond_value(rn.params, claim.maturity)
    space_T = F.space_at(claim.maturity)
    target = RandomVariable(space_T, {w: claim.payoff[w] / b_T for w in space_T.outcomes})
    return conditional_expectation(target, F.morphism_at(t, claim.maturity))


def price_lattice(claim: Claim, rn: RiskNeutralFiltration) -> PriceLattice:
    times = grid_points("closed", GridTime(0, claim.maturity.N), claim.maturity)
    return PriceLattice({t: price(claim, rn, t) for t in times})


def g_factorize(m: ProbMorphism) -> dict[Path, Path]:
    """Factor a one-step map through plain restriction: find g with
    map = g o restrict, i.e. the map must agree on each sibling pair.

    Returns g on the landing-time path space.  Raises FactorizationError
    naming a separating sibling pair when no such g exists.
    """
    g: dict[Path, Path] = {}
    for w in m.target.outcomes:
        up, down = m.mapping[w.extend(1)], m.mapping[w.extend(0)]
        if up != down:
            raise FactorizationError(
                f"map splits the siblings of {w}: {w}1 -> {up} but {w}0 -> {down}",
                witness=(w.extend(1), w.extend(0)),
            )
        g[w] = down
    return g


@dataclass
class ReplicationResult:
    strategy: Strategy
    value: dict[GridTime, dict[Path, float]]  # backward hedge targets, 0 off-image
    covered: dict[GridTime, tuple[Path, ...]]  # factor image per rebalancing step

    def coverage_summary(self) -> list[tuple[GridTime, int, int]]:
        return [(t, len(self.covered[t]), len(self.value[t])) for t in sorted(self.covered)]


def replicate(claim: Claim, rn: RiskNeutralFiltration, params: MarketParams | None = None) -> ReplicationResult:
    """Extract the self-financing hedge delivering the payoff on reachable paths.

    Backward over each step, on the factor image of the step's arrow:

        phi = (V(up child) - V(down child)) / (2**(1 - N/2) sigma S)
        V   = ((2**(N/2) sigma - (mu - r)) V(up) + (2**(N/2) sigma + (mu - r)) V(down))
              / (2**(1 + N/2) sigma (1 + 2**-N r))

    (equivalently, V is the q-weighted child average discounted one step),
    with the bond leg closing the books.  Off the image both holdings are 0
    and the value target is 0.
    """
    params = params or rn.params
    T = claim.maturity
    base = rn.base
    stock = stock_process(base, params, T)
    sqrt_dt_sigma = 2.0 ** (1.0 - params.N / 2.0) * params.sigma
    denom = 2.0 ** (1.0 + params.N / 2.0) * params.sigma * params.growth
    spread = 2.0 ** (params.N / 2.0) * params.sigma
    drift_gap = params.mu - params.r

    value: dict[GridTime, dict[Path, float]] = {T: {w: claim.payoff[w] for w in base.space_at(T).outcomes}}
    covered: dict[GridTime, tuple[Path, ...]] = {}
    phi: dict[GridTime, dict[Path, float]] = {}
    psi: dict[GridTime, dict[Path, float]] = {}

    for t in reversed(grid_points("right-open", GridTime(0, T.N), T)):
        child = t.step(1)
        g = g_factorize(base.morphism_at(t, child))
        image = frozenset(g.values())
        covered[child] = tuple(sorted(image))
        s_t = stock.at(t)
        b_t = bond_value(params, t)
        v_next = value[child]
        v_here: dict[Path, float] = {}
        phi[child] = {}
        psi[child] = {}
        for w in base.space_at(t).outcomes:
            if w in image:
                v1, v0 = v_next[w.extend(1)], v_next[w.extend(0)]
                delta = (v1 - v0) / (sqrt_dt_sigma * s_t(w))
                vt = ((spread - drift_gap) * v1 + (spread + drift_gap) * v0) / denom
                phi[child][w] = delta
                psi[child][w] = (vt - s_t(w) * delta) / b_t
                v_here[w] = vt
            else:
                phi[child][w] = 0.0
                psi[child][w] = 0.0
                v_here[w] = 0.0
        value[t] = v_here

    return ReplicationResult(Strategy(phi, psi), value, covered)


@dataclass
class ReplicationCheck:
    self_financing_violations: list[tuple[GridTime, Path, float, float]]
    recursion_violations: list[tuple[GridTime, Path, float, float]]  # hedge recursion residuals
    maturity_mismatches: list[tuple[Path, float, float]]  # on positive-Q paths only

    @property
    def ok(self) -> bool:
        return not (self.self_financing_violations or self.recursion_violations or self.maturity_mismatches)


def replication_check(
    strat: Strategy,
    claim: Claim,
    rn: RiskNeutralFiltration,
    params: MarketParams | None = None,
    eps: float = EPS_EQ,
) -> ReplicationCheck:
    """Audit a strategy against a claim: exact self-financing, the one-step
    hedge recursion at every node, and payoff delivery on every path the
    re-weighted measures can see."""
    params = params or rn.params
    T = claim.maturity
    base = rn.base
    sf = is_self_financing(strat, base, params, T, eps)

    stock = stock_process(base, params, T)
    vproc = portfolio_value(strat, base, params, T)
    recursion = []
    for t in grid_points("right-open", GridTime(0, T.N), T):
        child = t.step(1)
        g = g_factorize(base.morphism_at(t, child))
        s_t = stock.at(t)
        v_t, v_next = vproc.at(t), vproc.at(child)
        for w in base.space_at(t).outcomes:
            for d in (0, 1):
                lhs = v_next(w.extend(d))
                drift = params.dt * (params.mu - params.r) + params.sqrt_dt * params.sigma * (2 * d - 1)
                rhs = drift * s_t(g[w]) * strat.phi[child][g[w]] + params.growth * v_t(g[w])
                if abs(lhs - rhs) > eps:
                    recursion.append((child, w.extend(d), lhs, rhs))

    q_T = rn.measure_at(T)
    v_T = vproc.at(T)
    maturity = []
    for w in base.space_at(T).outcomes:
        if q_T[w] > 0.0 and abs(v_T(w) - claim.payoff[w]) > eps:
            maturity.append((w, v_T(w), claim.payoff[w]))

    return ReplicationCheck(sf.violations, recursion, maturity)
