"""Scenario documents: the JSON surface shared by the CLI commands.

Times are written as fraction strings like "3/8" or exact decimal strings
like "0.375"; anything that does not land on the scenario's grid is
rejected rather than rounded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from .binomial import BernoulliParams, Filtration, Path, make_drop_filtration, make_full_filtration
from .errors import ScenarioError
from .market import MarketParams, stock_process
from .probability import EPS_EQ, EPS_MASS
from .timegrid import GridTime
from .valuation import Claim

PAYOFF_KINDS = ("call", "put", "digital", "table")


def parse_grid_time(raw: Any, N: int, where: str) -> GridTime:
    """Accept 'n/m' fractions, decimal strings, or JSON numbers; require the
    value to be exactly n * 2**-N for the scenario's N."""
    try:
        if isinstance(raw, str):
            value = Fraction(raw)
        elif isinstance(raw, (int, float)):
            value = Fraction(str(raw))
        else:
            raise ValueError(f"expected a time, got {type(raw).__name__}")
    except (ValueError, ZeroDivisionError) as exc:
        raise ScenarioError(where, f"unreadable time {raw!r} ({exc})")
    scaled = value * (1 << N)
    if scaled.denominator != 1 or scaled < 0:
        raise ScenarioError(where, f"time {raw!r} is not aligned to the 2**-{N} grid")
    return GridTime(int(scaled), N)


def parse_path(raw: str, t: GridTime, where: str) -> Path:
    bits = "" if raw in ("*", "") else raw
    if any(c not in "01" for c in bits):
        raise ScenarioError(where, f"path {raw!r} must be bits, '' or '*'")
    if len(bits) != t.n:
        raise ScenarioError(where, f"path {raw!r} has {len(bits)} bits, time {t} needs {t.n}")
    return Path(tuple(int(c) for c in bits), t)


@dataclass
class Scenario:
    N: int
    horizon: GridTime
    bernoulli: BernoulliParams
    market: MarketParams
    filtration_kind: str  # 'full' | 'drop'
    alpha: GridTime | None
    beta: GridTime | None
    claim_maturity: GridTime | None
    payoff_spec: dict | None
    free_q: dict[str, float] = field(default_factory=dict)
    eps_eq: float = EPS_EQ
    eps_mass: float = EPS_MASS
    raw: dict = field(default_factory=dict)

    def filtration(self) -> Filtration:
        if self.filtration_kind == "full":
            return make_full_filtration(self.bernoulli)
        return make_drop_filtration(self.bernoulli, self.alpha, self.beta)

    def claim(self) -> Claim:
        """Materialize the payoff over the scenario's own stock lattice."""
        if self.claim_maturity is None or self.payoff_spec is None:
            raise ScenarioError("claim", "scenario has no claim section")
        F = self.filtration()
        T = self.claim_maturity
        spec = self.payoff_spec
        kind = spec["type"]
        paths = F.space_at(T).outcomes
        if kind == "table":
            table = spec["values"]
            values = {}
            for w in paths:
                key = w.label()
                if key not in table:
                    raise ScenarioError("claim.payoff.values", f"missing path {key}")
                values[w] = float(table[key])
            return Claim(T, values)
        strike = float(spec["strike"])
        stock_T = stock_process(F, self.market, T).at(T)
        if kind == "call":
            return Claim(T, {w: max(stock_T(w) - strike, 0.0) for w in paths})
        if kind == "put":
            return Claim(T, {w: max(strike - stock_T(w), 0.0) for w in paths})
        return Claim(T, {w: 1.0 if stock_T(w) >= strike else 0.0 for w in paths})

    def free_q_paths(self) -> dict[Path, float]:
        """Free sibling weights keyed by bit-string node; the key length fixes
        the node's time."""
        out = {}
        for key, value in self.free_q.items():
            t = GridTime(len(key), self.N)
            out[parse_path(key, t, f"free_q.{key}")] = float(value)
        return out


def _require(doc: Mapping, key: str, where: str = "") -> Any:
    if key not in doc:
        raise ScenarioError(f"{where}{key}", "missing required field")
    return doc[key]


def load_scenario(doc: Mapping) -> Scenario:
    if not isinstance(doc, Mapping):
        raise ScenarioError("$", "scenario must be a JSON object")
    N = _require(doc, "N")
    if not isinstance(N, int) or N < 0:
        raise ScenarioError("N", f"resolution must be a non-negative integer, got {N!r}")
    horizon = parse_grid_time(_require(doc, "horizon"), N, "horizon")

    p_raw = doc.get("p", 0.5)
    if isinstance(p_raw, Mapping):
        table = {}
        for key, value in p_raw.items():
            t = parse_grid_time(key, N, f"p.{key}")
            if not 0.0 <= float(value) <= 1.0:
                raise ScenarioError(f"p.{key}", f"probability {value} outside [0, 1]")
            table[t] = float(value)
        bernoulli = BernoulliParams(N, 0.5, table)
    else:
        if not 0.0 <= float(p_raw) <= 1.0:
            raise ScenarioError("p", f"probability {p_raw} outside [0, 1]")
        bernoulli = BernoulliParams(N, float(p_raw))

    m = _require(doc, "market")
    try:
        market = MarketParams(
            mu=float(_require(m, "mu", "market.")),
            sigma=float(_require(m, "sigma", "market.")),
            r=float(_require(m, "r", "market.")),
            s0=float(_require(m, "s0", "market.")),
            N=N,
        )
    except ValueError as exc:
        raise ScenarioError("market", str(exc))

    f = doc.get("filtration", {"kind": "full"})
    kind = _require(f, "kind", "filtration.")
    if kind not in ("full", "drop"):
        raise ScenarioError("filtration.kind", f"expected 'full' or 'drop', got {kind!r}")
    alpha = beta = None
    if kind == "drop":
        alpha = parse_grid_time(_require(f, "alpha", "filtration."), N, "filtration.alpha")
        beta = parse_grid_time(_require(f, "beta", "filtration."), N, "filtration.beta")
        if alpha > beta:
            raise ScenarioError("filtration", f"alpha {alpha} > beta {beta}")

    claim_maturity = None
    payoff_spec = None
    if "claim" in doc:
        c = doc["claim"]
        claim_maturity = parse_grid_time(_require(c, "maturity", "claim."), N, "claim.maturity")
        if claim_maturity > horizon:
            raise ScenarioError("claim.maturity", f"maturity {claim_maturity} beyond horizon {horizon}")
        payoff_spec = dict(_require(c, "payoff", "claim."))
        ptype = _require(payoff_spec, "type", "claim.payoff.")
        if ptype not in PAYOFF_KINDS:
            raise ScenarioError("claim.payoff.type", f"expected one of {PAYOFF_KINDS}, got {ptype!r}")
        if ptype == "table" and "values" not in payoff_spec:
            raise ScenarioError("claim.payoff.values", "missing required field")
        if ptype != "table" and "strike" not in payoff_spec:
            raise ScenarioError("claim.payoff.strike", "missing required field")

    free_q = {str(k): float(v) for k, v in doc.get("free_q", {}).items()}
    for key, value in free_q.items():
        if not 0.0 <= value <= 1.0:
            raise ScenarioError(f"free_q.{key}", f"weight {value} outside [0, 1]")

    tol = doc.get("tolerances", {})
    return Scenario(
        N=N,
        horizon=horizon,
        bernoulli=bernoulli,
        market=market,
        filtration_kind=kind,
        alpha=alpha,
        beta=beta,
        claim_maturity=claim_maturity,
        payoff_spec=payoff_spec,
        free_q=free_q,
        eps_eq=float(tol.get("eq", EPS_EQ)),
        eps_mass=float(tol.get("mass", EPS_MASS)),
        raw=dict(doc),
    )


def load_scenario_file(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError("$file", f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ScenarioError("$file", f"invalid JSON in {path}: {exc}")
    return load_scenario(doc)
