"""Tradable instruments, strategies, gains, and arbitrage over a filtration.

The stock and bond evolve by one-step recursions that read the previous
value *through the filtration's own one-step map*, so a memory-drop arrow
makes the stock continue from the value at the forgotten-bit node.
"""

from __future__ import annotations

from dataclasses import dataclass

from .binomial import Filtration, Path
from .probability import EPS_EQ, RandomVariable
from .timegrid import GridTime, grid_points


@dataclass(frozen=True)
class MarketParams:
    """Drift, volatility (> 0), rate (> -1), initial price (> 0), resolution.

    Besides the headline conditions this enforces a positive one-step down
    factor at the actual resolution, 1 + 2**-N mu - 2**(-N/2) sigma > 0,
    which is what actually keeps prices positive on every path.
    """

    mu: float
    sigma: float
    r: float
    s0: float
    N: int

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.r <= -1:
            raise ValueError(f"r must be > -1, got {self.r}")
        if self.s0 <= 0:
            raise ValueError(f"s0 must be > 0, got {self.s0}")
        if self.mu <= self.sigma - 1:
            raise ValueError(f"need mu > sigma - 1, got mu={self.mu}, sigma={self.sigma}")
        if self.down_factor <= 0:
            raise ValueError(
                f"down factor 1 + 2**-N*mu - 2**(-N/2)*sigma = {self.down_factor} is not positive at N={self.N}"
            )

    @property
    def dt(self) -> float:
        return 2.0**-self.N

    @property
    def sqrt_dt(self) -> float:
        return 2.0 ** (-self.N / 2.0)

    @property
    def up_factor(self) -> float:
        return 1.0 + self.dt * self.mu + self.sqrt_dt * self.sigma

    @property
    def down_factor(self) -> float:
        return 1.0 + self.dt * self.mu - self.sqrt_dt * self.sigma

    @property
    def growth(self) -> float:
        return 1.0 + self.dt * self.r

    def step_factor(self, bit: int) -> float:
        return self.up_factor if bit else self.down_factor


@dataclass
class AdaptedProcess:
    """One random variable per grid time up to a horizon."""

    values: dict[GridTime, RandomVariable]

    def at(self, t: GridTime) -> RandomVariable:
        return self.values[t]

    def times(self) -> list[GridTime]:
        return sorted(self.values)


@dataclass
class Strategy:
    """Portfolios chosen one step ahead: at each t in (0, horizon], the stock
    and bond holdings are functions on the path space one step earlier."""

    phi: dict[GridTime, dict[Path, float]]
    psi: dict[GridTime, dict[Path, float]]

    def times(self) -> list[GridTime]:
        return sorted(self.phi)


def _times_to(horizon: GridTime) -> list[GridTime]:
    return grid_points("closed", GridTime(0, horizon.N), horizon)


def stock_process(F: Filtration, params: MarketParams, horizon: GridTime) -> AdaptedProcess:
    """Stock values on every path: s0 at the root, then one up/down factor per
    step applied to the previous value as seen through the filtration's map."""
    values: dict[GridTime, RandomVariable] = {}
    times = _times_to(horizon)
    root = F.space_at(times[0])
    values[times[0]] = RandomVariable(root, {w: params.s0 for w in root.outcomes})
    for t_prev, t in zip(times, times[1:]):
        m = F.morphism_at(t_prev, t)
        prev = values[t_prev]
        space = F.space_at(t)
        values[t] = RandomVariable(
            space, {w: prev(m(w)) * params.step_factor(w.bit_at(t)) for w in space.outcomes}
        )
    return AdaptedProcess(values)


def bond_process(F: Filtration, params: MarketParams, horizon: GridTime) -> AdaptedProcess:
    """Bond values: 1 at the root, multiplied by (1 + 2**-N r) each step."""
    values: dict[GridTime, RandomVariable] = {}
    times = _times_to(horizon)
    root = F.space_at(times[0])
    values[times[0]] = RandomVariable(root, {w: 1.0 for w in root.outcomes})
    for t_prev, t in zip(times, times[1:]):
        m = F.morphism_at(t_prev, t)
        prev = values[t_prev]
        space = F.space_at(t)
        values[t] = RandomVariable(space, {w: prev(m(w)) * params.growth for w in space.outcomes})
    return AdaptedProcess(values)


def bond_value(params: MarketParams, t: GridTime) -> float:
    """Closed form for the (path-independent) bond: growth ** steps."""
    return params.growth**t.n


def discounted_stock(F: Filtration, params: MarketParams, horizon: GridTime) -> AdaptedProcess:
    """Stock divided by the bond, pathwise."""
    stock = stock_process(F, params, horizon)
    values = {}
    for t, rv in stock.values.items():
        b = bond_value(params, t)
        values[t] = RandomVariable(rv.space, {w: v / b for w, v in rv.values.items()})
    return AdaptedProcess(values)


def portfolio_value(strat: Strategy, F: Filtration, params: MarketParams, horizon: GridTime) -> AdaptedProcess:
    """Value of the held portfolio at each time.

    At the root this is the cost of the first portfolio; afterwards it is the
    current prices applied to the holdings chosen one step earlier, looked up
    through the filtration's one-step map.
    """
    stock = stock_process(F, params, horizon)
    times = _times_to(horizon)
    values: dict[GridTime, RandomVariable] = {}
    root_space = F.space_at(times[0])
    first = times[1] if len(times) > 1 else None
    if first is None:
        raise ValueError("horizon 0 leaves no portfolio to value")
    if first not in strat.phi or first not in strat.psi:
        raise ValueError(f"strategy has no portfolio for time {first}")
    star = root_space.outcomes[0]
    v0 = params.s0 * strat.phi[first][star] + 1.0 * strat.psi[first][star]
    values[times[0]] = RandomVariable(root_space, {star: v0})
    for t_prev, t in zip(times, times[1:]):
        if t not in strat.phi or t not in strat.psi:
            raise ValueError(f"strategy has no portfolio for time {t}")
        m = F.morphism_at(t_prev, t)
        s_t, b_t = stock.at(t), bond_value(params, t)
        space = F.space_at(t)
        values[t] = RandomVariable(
            space,
            {w: s_t(w) * strat.phi[t][m(w)] + b_t * strat.psi[t][m(w)] for w in space.outcomes},
        )
    return AdaptedProcess(values)


def gain_process(strat: Strategy, F: Filtration, params: MarketParams, horizon: GridTime) -> AdaptedProcess:
    """Gain at each rebalancing time t with t + delta <= horizon.

    At the root the gain is minus the cost of the first portfolio; afterwards
    it is the held portfolio's value minus the cost of the next one.  The
    final slice needs a portfolio one past it, so the process stops one step
    short of the horizon.
    """
    stock = stock_process(F, params, horizon)
    value = portfolio_value(strat, F, params, horizon)
    times = _times_to(horizon)
    values: dict[GridTime, RandomVariable] = {}
    for t, t_next in zip(times, times[1:]):
        space = F.space_at(t)
        s_t, b_t = stock.at(t), bond_value(params, t)
        cost = {
            w: s_t(w) * strat.phi[t_next][w] + b_t * strat.psi[t_next][w] for w in space.outcomes
        }
        if t.n == 0:
            values[t] = RandomVariable(space, {w: -cost[w] for w in space.outcomes})
        else:
            held = value.at(t)
            values[t] = RandomVariable(space, {w: held(w) - cost[w] for w in space.outcomes})
    return AdaptedProcess(values)


@dataclass
class SelfFinancingReport:
    violations: list[tuple[GridTime, Path, float, float]]  # (t, path, cost, value)

    @property
    def ok(self) -> bool:
        return not self.violations


def is_self_financing(
    strat: Strategy, F: Filtration, params: MarketParams, horizon: GridTime, eps: float = EPS_EQ
) -> SelfFinancingReport:
    """Check that each rebalance is paid for exactly by the current value.

    The condition is indexed over t in (0, horizon) with a next portfolio to
    buy; at the root the value *is* the first portfolio's cost.
    """
    stock = stock_process(F, params, horizon)
    value = portfolio_value(strat, F, params, horizon)
    times = _times_to(horizon)
    violations = []
    for t, t_next in zip(times, times[1:]):
        if t.n == 0:
            continue
        space = F.space_at(t)
        s_t, b_t = stock.at(t), bond_value(params, t)
        held = value.at(t)
        for w in space.outcomes:
            cost = s_t(w) * strat.phi[t_next][w] + b_t * strat.psi[t_next][w]
            if abs(cost - held(w)) > eps:
                violations.append((t, w, cost, held(w)))
    return SelfFinancingReport(violations)


def is_arbitrage(
    strat: Strategy, F: Filtration, params: MarketParams, horizon: GridTime, eps: float = EPS_EQ
) -> bool:
    """Exhaustive check: gains never negative on any positive-probability path,
    and strictly positive with positive probability at some time."""
    gains = gain_process(strat, F, params, horizon)
    some_positive = False
    for t in gains.times():
        g = gains.at(t)
        for w in g.space.support(0.0):
            if g(w) < -eps:
                return False
            if g(w) > eps:
                some_positive = True
    return some_positive


@dataclass
class ArbitrageSearch:
    """Outcome of the bound test plus, outside the bound, a constructed strategy."""

    gap: float  # |mu - r| - 2**(N/2) sigma
    bound: float  # 2**(N/2) sigma
    strategy: Strategy | None
    direction: int  # +1 long stock, -1 short stock, 0 none
    verified: bool | None  # is_arbitrage result for the constructed strategy
    warning: str | None = None


def detect_arbitrage(F: Filtration, params: MarketParams, horizon: GridTime) -> ArbitrageSearch:
    """Return a zero-cost arbitrage strategy when |mu - r| reaches 2**(N/2) sigma.

    Strictly inside the bound no strategy is constructed.  At or beyond it,
    hold one share (long if mu - r >= bound, short if r - mu >= bound) and
    finance it entirely with bonds; the stepwise gain then has a constant
    sign on every path.  With a trivial filtration (all step probabilities 0
    or 1) positive gains can have probability zero, so the verdict carries a
    warning instead of a certificate.
    """
    bound = 2.0 ** (params.N / 2.0) * params.sigma
    gap = abs(params.mu - params.r) - bound
    warning = None
    if len(F.space_at(horizon).support(0.0)) <= 1:
        # all step probabilities are 0 or 1: a single path carries all mass
        warning = "trivial filtration: positive-probability condition unverifiable"
    if gap < 0:
        return ArbitrageSearch(gap, bound, None, 0, None, warning)

    direction = 1 if params.mu - params.r >= bound else -1
    stock = stock_process(F, params, horizon)
    times = _times_to(horizon)
    phi: dict[GridTime, dict[Path, float]] = {}
    psi: dict[GridTime, dict[Path, float]] = {}
    for t_prev, t in zip(times, times[1:]):
        space = F.space_at(t_prev)
        s_prev, b_prev = stock.at(t_prev), bond_value(params, t_prev)
        phi[t] = {w: float(direction) for w in space.outcomes}
        psi[t] = {w: -(s_prev(w) / b_prev) * direction for w in space.outcomes}
    strat = Strategy(phi, psi)
    verified = is_arbitrage(strat, F, params, horizon)
    if not verified and warning is None:
        warning = "constructed strategy failed verification"
    return ArbitrageSearch(gap, bound, strat, direction, verified, warning)
