"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v`; a per-criterion PASS/FAIL
summary is printed at the end of the session (see conftest).
"""

import itertools
import json
import random
import subprocess
import sys

import pytest

from genfil import (
    BernoulliParams,
    Claim,
    Filtration,
    GridTime,
    MarketParams,
    Path,
    RandomVariable,
    bond_value,
    build_rn_drop,
    build_rn_full,
    check_functor_laws,
    conditional_expectation,
    detect_arbitrage,
    equivalence_witnesses,
    experienced_path,
    filtrations_equal,
    gain_process,
    is_arbitrage,
    make_drop_filtration,
    make_full_filtration,
    martingale_check,
    martingale_constants,
    naturality_check,
    next_bit_fiber,
    price_lattice,
    q_star,
    qcond_equivalences,
    replicate,
    replication_check,
    stock_process,
    tilde_filtration,
    xi,
)
from genfil.risk_neutral import QFunction, RiskNeutralFiltration

from oracles import crr_backward_induction, defining_identity_max_error

SCEN_A = dict(mu=0.1, sigma=0.2, r=0.02, s0=100.0, N=2)


def t(n, N=2):
    return GridTime(n, N)


def path(bits, N=2):
    return Path(tuple(int(c) for c in bits), GridTime(len(bits), N))


def scenario_filtrations():
    """The fixed 12-scenario grid: N in {1,2,3}, p in {0.3,0.5}, full/drop."""
    for N in (1, 2, 3):
        for p in (0.3, 0.5):
            params = BernoulliParams(N, p)
            yield N, p, "full", make_full_filtration(params), params
            drop = make_drop_filtration(params, GridTime(1, N), GridTime(max(1, 2 ** (N - 1)), N))
            yield N, p, "drop", drop, params


def test_c01_conditional_expectation_identity():
    """Criterion 1: the defining identity over all subsets, error <= 1e-10."""
    tol = 1e-10
    worst = 0.0
    rng = random.Random(101)
    for N, p, kind, F, params in scenario_filtrations():
        horizon = GridTime(2**N, N)
        times = [GridTime(k, N) for k in range(horizon.n + 1)]
        for u in times:
            source = F.space_at(u)
            X_rand = RandomVariable(source, {w: rng.uniform(-10, 10) for w in source.outcomes})
            X_sum = RandomVariable(source, {w: float(sum(w.bits)) - 1.5 for w in source.outcomes})
            for s in times:
                if s > u:
                    continue
                m = F.morphism_at(s, u)
                for X in (X_rand, X_sum):
                    Y = conditional_expectation(X, m)
                    worst = max(worst, defining_identity_max_error(X, m, Y, subset_cap=10))
    assert worst <= tol, f"worst defining-identity error {worst}"
    print(f"[criterion 1] PASS  max identity error {worst:.2e} <= {tol}")


def test_c02_functor_laws():
    """Criterion 2: zero violations for the shipped functors, and an
    adversarial functor is caught."""
    for N in (1, 2, 3):
        horizon = GridTime(2**N, N)
        for p in (0.3, 0.5):
            params = BernoulliParams(N, p)
            assert check_functor_laws(make_full_filtration(params), horizon).ok
            drop = make_drop_filtration(params, GridTime(1, N), GridTime(2 ** (N - 1) or 1, N))
            assert check_functor_laws(drop, horizon).ok

    good = make_full_filtration(BernoulliParams(2, 0.5))

    def broken_map(s, u):
        if s == u:
            return lambda w: w
        if (s, u) == (t(1), t(2)):
            return lambda w: Path((1 - w.bits[0],), t(1))
        return lambda w: w.restrict(s)

    adversarial = Filtration(2, good.space_at, broken_map, name="seeded-adversary")
    report = check_functor_laws(adversarial, t(3))
    assert len(report.violations) >= 1
    print("[criterion 2] PASS  laws hold for shipped functors; adversary caught")


def test_c03_fiber_counting_formula():
    """Criterion 3: fiber-count formula equals the conditional expectation of
    the +-1 driver on every positive-mass node, error <= 1e-12.

    Restriction steps are exercised at p in {0.3, 0.5}; forget steps at
    p = 1/2, the formula's domain of validity (its derivation needs every
    fiber member to restrict onto the conditioning node, which fails across
    a forget arrow when p != 1/2).
    """
    tol = 1e-12
    cases = []
    for N in (1, 2, 3):
        for p in (0.3, 0.5):
            cases.append((BernoulliParams(N, p), make_full_filtration(BernoulliParams(N, p))))
        p = 0.5
        params = BernoulliParams(N, p)
        cases.append((params, make_drop_filtration(params, GridTime(1, N), GridTime(2**N, N))))
    worst = 0.0
    for params, F in cases:
        N = params.N
        for k in range(2**N):
            u = GridTime(k, N)
            m = F.one_step(u)
            direct = conditional_expectation(xi(params, u.step(1)), m)
            for w in m.target.support(0.0):
                formula = len(m.fiber(w)) * params.p - len(next_bit_fiber(m, w, 0))
                worst = max(worst, abs(direct(w) - formula))
    assert worst <= tol, f"worst formula error {worst}"
    print(f"[criterion 3] PASS  max formula error {worst:.2e} <= {tol}")


def test_c04_martingale_construction():
    """Criterion 4: pricing identity and direct discounted-stock expectation
    pass at every constrained node for the benchmark scenario, both bases,
    three free choices; solved sibling weights exact to 1e-12."""
    tol = 1e-10
    market = MarketParams(**SCEN_A)
    q1, q0 = q_star(market)
    assert abs(q1 - 0.4) <= 1e-12 and abs(q0 - 0.6) <= 1e-12

    full = make_full_filtration(BernoulliParams(2, 0.5))
    rn_full = build_rn_full(full, market, t(4))
    rep_full = martingale_check(rn_full, eps=tol)
    assert rep_full.ok and not rep_full.boundary_rows

    drop = make_drop_filtration(BernoulliParams(2, 0.5), t(1), t(1))
    for free in (0.0, 0.37, 1.0):
        rn = build_rn_drop(drop, market, t(2), {path("11"): free})
        report = martingale_check(rn, eps=tol)
        assert report.ok, f"free={free}: {report.violations[:3]}"
        for row in report.rows:
            if row.enforced:
                assert row.error <= tol
                if row.direct_error is not None:
                    assert row.direct_error <= tol
        # the one pinned boundary step is reported, not silently dropped:
        # entering the forget landing would need weight 1/c0 > 1
        c = martingale_constants(market)
        assert [(r.t, r.path.label()) for r in report.boundary_rows] == [(t(0), "*")]
        assert report.boundary_rows[0].rhs == pytest.approx(c.c0, abs=1e-12)
    print("[criterion 4] PASS  identity + direct check <= 1e-10 on all constrained nodes")


def test_c05_non_equivalence_and_non_uniqueness():
    """Criterion 5: a zero-mass-under-Q witness with positive physical mass
    exists, and distinct free choices differ on the orphaned node while both
    passing criterion 4's check."""
    market = MarketParams(**SCEN_A)
    drop = make_drop_filtration(BernoulliParams(2, 0.5), t(1), t(1))
    rn_a = build_rn_drop(drop, market, t(2), {path("11"): 0.2})
    rn_b = build_rn_drop(drop, market, t(2), {path("11"): 0.8})

    witnesses = equivalence_witnesses(rn_a)
    assert (t(1), path("1")) in witnesses

    assert martingale_check(rn_a).ok and martingale_check(rn_b).ok
    assert rn_a.q.at(t(2))[path("11")] != rn_b.q.at(t(2))[path("11")]
    # the measures themselves agree wherever either one puts mass
    for k in range(3):
        for w, mass in rn_a.measure_at(t(k)).items():
            assert mass == pytest.approx(rn_b.measure_at(t(k))[w], abs=1e-12)
    print("[criterion 5] PASS  witness (0.25, '1'); free weights differ at '11', checks pass")


def test_c06_pricing():
    """Criterion 6: benchmark root prices to 1e-9; full pricing matches the
    classical backward-induction oracle node-for-node to 1e-10 on 20 random
    claims."""
    market = MarketParams(**SCEN_A)
    full = make_full_filtration(BernoulliParams(2, 0.5))
    rn_full = build_rn_full(full, market, t(4))

    S1 = stock_process(full, market, t(1))
    call1 = Claim.from_function(full, t(1), lambda w: max(S1.at(t(1))(w) - 100.0, 0.0))
    assert price_lattice(call1, rn_full).root() == pytest.approx(4.97512437811, abs=1e-9)

    drop = make_drop_filtration(BernoulliParams(2, 0.5), t(1), t(1))
    rn_drop = build_rn_drop(drop, market, t(2))
    S2 = stock_process(drop, market, t(2))
    call2 = Claim.from_function(drop, t(2), lambda w: max(S2.at(t(2))(w) - 100.0, 0.0))
    assert price_lattice(call2, rn_drop).root() == pytest.approx(1.625 / 1.010025, abs=1e-9)

    rng = random.Random(606)
    T = t(4)
    leaves = sorted(full.space_at(T).outcomes, key=lambda w: w.bits)
    worst = 0.0
    for _ in range(20):
        payoff = {w: rng.uniform(-50.0, 150.0) for w in leaves}
        lattice = price_lattice(Claim(T, payoff), rn_full)
        levels = crr_backward_induction([payoff[w] for w in leaves], 0.4, 0.6, market.growth)
        for k in range(T.n + 1):
            rv = lattice.at(t(k))
            for w in rv.space.outcomes:
                j = int(w.label(), 2) if w.bits else 0
                worst = max(worst, abs(rv(w) - levels[k][j] / market.growth**k))
    assert worst <= 1e-10, f"worst oracle gap {worst}"
    print(f"[criterion 6] PASS  roots exact; oracle gap {worst:.2e} <= 1e-10 on 20 claims")


def test_c07_replication():
    """Criterion 7: extracted strategies are self-financing (<= 1e-10),
    satisfy the hedge recursion at every node, and deliver the payoff on all
    positive-mass-under-Q paths (<= 1e-9); benchmark delta = 0.625."""
    market = MarketParams(**SCEN_A)
    full = make_full_filtration(BernoulliParams(2, 0.5))
    drop = make_drop_filtration(BernoulliParams(2, 0.5), t(1), t(1))
    rn_full = build_rn_full(full, market, t(4))
    rn_drop = build_rn_drop(drop, market, t(2))

    S1 = stock_process(full, market, t(1))
    call1 = Claim.from_function(full, t(1), lambda w: max(S1.at(t(1))(w) - 100.0, 0.0))
    delta = replicate(call1, rn_full).strategy.phi[t(1)][path("")]
    assert delta == pytest.approx(0.625, abs=1e-12)

    rng = random.Random(707)
    for rn, T in ((rn_full, t(4)), (rn_drop, t(2))):
        base = rn.base
        leaves = base.space_at(T).outcomes
        q_T = rn.measure_at(T)
        for _ in range(20):
            claim = Claim(T, {w: rng.uniform(-30.0, 130.0) for w in leaves})
            strat = replicate(claim, rn).strategy
            audit = replication_check(strat, claim, rn, eps=1e-10)
            assert not audit.self_financing_violations
            assert not audit.recursion_violations
            from genfil import portfolio_value

            v_T = portfolio_value(strat, base, market, T).at(T)
            for w in leaves:
                if q_T[w] > 0.0:
                    assert abs(v_T(w) - claim.payoff[w]) <= 1e-9
    print("[criterion 7] PASS  40 random claims replicated on support; delta 0.625")


def test_c08_arbitrage_sweep():
    """Criterion 8: across drift gaps {+-0.39, +-0.40, +-0.41} against the
    bound 0.4: nothing inside, a verified arbitrage at and beyond."""
    full = make_full_filtration(BernoulliParams(2, 0.5))
    horizon = t(4)
    for gap in (0.39, -0.39, 0.40, -0.40, 0.41, -0.41):
        market = MarketParams(mu=0.1, sigma=0.2, r=0.1 - gap, s0=100.0, N=2)
        search = detect_arbitrage(full, market, horizon)
        if abs(gap) < 0.4:
            assert search.strategy is None, f"gap {gap}: unexpected strategy"
        else:
            assert search.strategy is not None, f"gap {gap}: no strategy"
            assert is_arbitrage(search.strategy, full, market, horizon)
            gains = gain_process(search.strategy, full, market, horizon)
            positive = False
            for u in gains.times():
                g = gains.at(u)
                for w in g.space.support(0.0):
                    assert g(w) >= -1e-12
                    positive = positive or g(w) > 1e-12
            assert positive
    print("[criterion 8] PASS  sweep {+-0.39, +-0.40, +-0.41} vs bound 0.4")


def test_c09_experienced_paths():
    """Criterion 9: the recorded-path pattern holds for all 256 paths at
    N=3, naturality commutes exhaustively for N in {2,3}, and the image
    filtration of the classical one is itself, exactly."""
    drop3 = make_drop_filtration(BernoulliParams(3, 0.5), GridTime(3, 3), GridTime(5, 3))
    horizon3 = GridTime(8, 3)
    for bits in itertools.product((0, 1), repeat=8):
        w = Path(bits, horizon3)
        expected = Path((bits[0], bits[1], 0, 0, 0, bits[5], bits[6], bits[7]), horizon3)
        assert experienced_path(drop3, horizon3, w) == expected

    drop2 = make_drop_filtration(BernoulliParams(2, 0.5), GridTime(3, 3), GridTime(5, 3))
    assert naturality_check(drop2, t(4)).ok
    assert naturality_check(drop3, horizon3).ok

    for N, steps in ((2, 4), (3, 8)):
        full = make_full_filtration(BernoulliParams(N, 0.5))
        horizon = GridTime(steps, N)
        assert filtrations_equal(tilde_filtration(full, horizon), full, horizon, eps=0.0)
    print("[criterion 9] PASS  256-path pattern, naturality N in {2,3}, image of full is full")


def test_c10_product_measure_conditions():
    """Criterion 10: the three product-measure conditions agree in verdict on
    50 random product families and 10 seeded non-product families."""
    rng = random.Random(1010)
    params = BernoulliParams(2, 0.5)
    full = make_full_filtration(params)
    market = MarketParams(**SCEN_A)
    horizon = t(3)

    def random_product_family():
        weights = {}
        for k in (1, 2, 3):
            layer = {}
            for w in full.space_at(t(k - 1)).outcomes:
                up = rng.random()
                layer[w.extend(1)] = up
                layer[w.extend(0)] = 1.0 - up
            weights[t(k)] = layer
        return RiskNeutralFiltration(full, QFunction(weights), market, horizon)

    for _ in range(50):
        report = qcond_equivalences(random_product_family(), horizon)
        assert report.ok and report.consistent

    for _ in range(10):
        rn = random_product_family()
        family = {t(k): dict(rn.measure_at(t(k))) for k in range(4)}
        k = rng.choice((1, 2, 3))
        layer = family[t(k)]
        donor, receiver = rng.sample(sorted(layer), 2)
        shift = 0.05 + 0.5 * min(layer[donor], 1.0 - layer[receiver])
        layer[donor] -= shift
        layer[receiver] += shift  # total mass intact, sibling sums broken
        report = qcond_equivalences(family, horizon)
        assert not report.ok
        assert report.consistent, f"verdicts split: {report}"
    print("[criterion 10] PASS  verdicts agree on 50 product + 10 broken families")


def test_c11_cli_contract(tmp_path):
    """Criterion 11: byte-identical reports on identical scenarios; exit
    codes 0 (pass), 1 (violations), 2 (malformed input)."""
    scenario = {
        "N": 2,
        "horizon": "0.5",
        "p": 0.5,
        "market": {"mu": 0.1, "sigma": 0.2, "r": 0.02, "s0": 100},
        "filtration": {"kind": "drop", "alpha": "0.25", "beta": "0.25"},
        "claim": {"maturity": "0.5", "payoff": {"type": "call", "strike": 100}},
    }
    scen_file = tmp_path / "scenario.json"
    scen_file.write_text(json.dumps(scenario))

    def run(*extra):
        return subprocess.run(
            [sys.executable, "-m", "genfil.cli", "check", "--scenario", str(scen_file), *extra],
            capture_output=True,
        )

    first, second = run(), run()
    assert first.returncode == 0
    assert first.stdout == second.stdout  # byte-identical

    violation = run("--tolerance", "0")
    assert violation.returncode == 1

    scen_file.write_text(json.dumps({"N": 2, "horizon": "0.3"}))
    malformed = run()
    assert malformed.returncode == 2
    print("[criterion 11] PASS  deterministic bytes; exit codes 0/1/2")
