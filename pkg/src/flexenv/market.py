"""Cost-optimal scheduling in energy, reserve and ramping-product markets.

Jointly optimizes a base (scheduled) GCP trajectory and a flexibility
envelope around it.  The base earns/pays the hourly energy price at the
GCP plus generator marginal cost; the distance from the base to the
envelope bounds is paid as up/down reserve capacity, and the deliverable
ramp into the next interval's envelope is paid the flexible-ramping
price.  Minimizing net cost trades energy arbitrage against the width
and placement of the envelope.

The base dispatch is a physical trajectory: device boxes, same-
trajectory ramp limits, storage dynamics and network voltage limits all
apply to it, but it is not confined inside the per-device envelope
bands; only the aggregate containment at the GCP links the two.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from . import lpcore, netmodel
from .envelope import (EnvelopeBuilder, EnvelopeConfig, EnvelopeKind,
                       EnvelopeSolution, EnvelopeError, EnvelopeInfeasible,
                       SolverFn, build_envelope_model, _collect)
from .lpcore import LinExpr, LpStatus
from .netmodel import CaseError, RobustMargins, Scenario

__all__ = [
    "MarketPrices",
    "MarketSolution",
    "solve_market",
    "reserve_capacities",
    "frp_quantities",
]


@dataclass(frozen=True, eq=False)
class MarketPrices:
    """Per-step prices: $/kWh for energy, $/kW per step for capacities."""

    energy: np.ndarray
    reserve_up: np.ndarray
    reserve_dn: np.ndarray
    frp: np.ndarray

    def __post_init__(self):
        for name in ("energy", "reserve_up", "reserve_dn", "frp"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise CaseError(f"non-finite entries in {name}", "prices")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = {len(getattr(self, k)) for k in ("energy", "reserve_up", "reserve_dn", "frp")}
        if len(n) != 1:
            raise CaseError("price series must all have the same length", "prices")

    @property
    def T(self) -> int:
        return len(self.energy)

    @classmethod
    def from_csv(cls, text: str) -> "MarketPrices":
        reader = csv.DictReader(io.StringIO(text))
        expected = {"t", "energy_per_kwh", "reserve_up_per_kw",
                    "reserve_dn_per_kw", "frp_per_kw"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise CaseError(
                f"prices CSV must have header {sorted(expected)}, got {reader.fieldnames}",
                "prices.csv")
        rows = {}
        for i, row in enumerate(reader):
            loc = f"prices.csv row {i + 2}"
            try:
                t = int(row["t"])
                rows[t] = tuple(float(row[k]) for k in (
                    "energy_per_kwh", "reserve_up_per_kw",
                    "reserve_dn_per_kw", "frp_per_kw"))
            except (TypeError, ValueError):
                raise CaseError(f"bad entry {row!r}", loc)
        if not rows or sorted(rows) != list(range(1, len(rows) + 1)):
            raise CaseError(f"need contiguous steps 1..T, got {sorted(rows)}", "prices.csv")
        data = np.array([rows[t] for t in range(1, len(rows) + 1)])
        return cls(energy=data[:, 0], reserve_up=data[:, 1],
                   reserve_dn=data[:, 2], frp=data[:, 3])


@dataclass
class MarketSolution:
    base: np.ndarray  # scheduled GCP power (T,), export positive
    env: EnvelopeSolution
    base_gen_p: np.ndarray  # (G, T)
    base_gen_q: np.ndarray
    base_sto_p: np.ndarray  # (E, T)
    base_soc: np.ndarray
    r_cap_up: np.ndarray  # (T,)
    r_cap_dn: np.ndarray
    r_frp_up: np.ndarray  # (T-1,)
    r_frp_dn: np.ndarray
    cost_energy: float
    rev_reserve: float
    rev_frp: float
    objective: float

    def to_json_dict(self) -> dict:
        def arr(a):
            return [float(v) for v in np.asarray(a).ravel()]

        return {
            "meta": {
                "cost_energy": self.cost_energy,
                "rev_reserve": self.rev_reserve,
                "rev_frp": self.rev_frp,
                "objective": self.objective,
            },
            "base": arr(self.base),
            "r_cap_up": arr(self.r_cap_up),
            "r_cap_dn": arr(self.r_cap_dn),
            "r_frp_up": arr(self.r_frp_up),
            "r_frp_dn": arr(self.r_frp_dn),
            "base_gen_p": [arr(row) for row in self.base_gen_p],
            "base_gen_q": [arr(row) for row in self.base_gen_q],
            "base_sto_p": [arr(row) for row in self.base_sto_p],
            "base_soc": [arr(row) for row in self.base_soc],
            "envelope": self.env.to_json_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)


def _add_base_dispatch(builder: EnvelopeBuilder, margins: RobustMargins | None):
    """Third trajectory set: a physically feasible scheduled dispatch."""
    m = builder.model
    scenario = builder.scenario
    T, dt = builder.T, builder.dt
    bp, bq, bsp, bse = [], [], [], []
    for g in scenario.generators:
        lo1, hi1 = builder._initial_band(g)
        bp.append([m.add_variable(lo1 if t == 0 else g.p_min,
                                  hi1 if t == 0 else g.p_max) for t in range(T)])
        bq.append([m.add_variable(g.q_min, g.q_max) for _ in range(T)])
        for t in range(1, T):
            m.add_range(LinExpr([(bp[-1][t], 1.0), (bp[-1][t - 1], -1.0)]),
                        -g.ramp_down, g.ramp_up)
    for e in scenario.storages:
        bsp.append([m.add_variable(-e.p_max, e.p_max) for _ in range(T)])
        bse.append([m.add_variable(e.e_init, e.e_init) if t == 0
                    else m.add_variable(e.e_min, e.e_max) for t in range(T)])
        for t in range(1, T):
            m.add_constraint(
                LinExpr([(bse[-1][t], 1.0), (bse[-1][t - 1], -e.kappa),
                         (bsp[-1][t - 1], dt)]), "==", 0.0)

    # network feasibility of the base dispatch, margins included
    net = scenario.network
    sens = builder.sens
    nred = net.n_bus - 1
    prof = scenario.profiles
    delta = np.zeros((T, nred)) if margins is None else np.asarray(margins.delta_u)
    const = (
        1.0
        + ((prof.pv_p[:, 1:] - prof.load_p[:, 1:]) / net.s_base) @ sens.h_p.T
        + (-prof.load_q[:, 1:] / net.s_base) @ sens.h_q.T
    )
    for t in range(T):
        for i in range(nred):
            terms = []
            for gi, g in enumerate(scenario.generators):
                hp = sens.h_p[i, g.bus - 2] / net.s_base
                hq = sens.h_q[i, g.bus - 2] / net.s_base
                if hp != 0.0:
                    terms.append((bp[gi][t], hp))
                if hq != 0.0:
                    terms.append((bq[gi][t], hq))
            for ei, e in enumerate(scenario.storages):
                hp = sens.h_p[i, e.bus - 2] / net.s_base
                if hp != 0.0:
                    terms.append((bsp[ei][t], hp))
            lo = net.u_min + delta[t, i] - const[t, i]
            hi = net.u_max - delta[t, i] - const[t, i]
            if terms:
                amin = sum(min(c * v.lower, c * v.upper) for v, c in terms)
                amax = sum(max(c * v.lower, c * v.upper) for v, c in terms)
                if builder.config.prune_voltage_rows and amin >= lo and amax <= hi:
                    continue
                m.add_range(LinExpr(terms), lo, hi)
    return bp, bq, bsp, bse


def solve_market(scenario: Scenario, prices: MarketPrices,
                 kind: EnvelopeKind | str, margins: RobustMargins | None = None,
                 config: EnvelopeConfig | None = None,
                 solver: SolverFn | None = None) -> MarketSolution:
    """Minimize energy cost minus reserve and ramping revenue.

    The envelope (of the requested kind) and the base dispatch are
    co-optimized; reserve capacity is the gap between base and envelope,
    ramping quantities reach into the next step's envelope and are kept
    nonnegative through the LP itself.
    """
    if isinstance(kind, str):
        kind = EnvelopeKind.parse(kind)
    if prices.T != scenario.profiles.T:
        raise CaseError(
            f"price series has {prices.T} steps, scenario {scenario.profiles.T}",
            "prices")
    builder = build_envelope_model(scenario, kind, margins, config)
    m = builder.model
    T, dt = builder.T, builder.dt
    prof = scenario.profiles
    prof_const = (prof.pv_p[:, 1:] - prof.load_p[:, 1:]).sum(axis=1)  # kW

    bp, bq, bsp, bse = _add_base_dispatch(builder, margins)

    def env_sum(side: str, t: int) -> list[tuple]:
        terms = []
        for gi in range(len(scenario.generators)):
            terms.append((builder.gp[gi][side][t], 1.0))
        for ei in range(len(scenario.storages)):
            terms.append((builder.sp[ei][side][t], 1.0))
        return terms

    def base_sum(t: int) -> list[tuple]:
        terms = [(bp[gi][t], 1.0) for gi in range(len(scenario.generators))]
        terms += [(bsp[ei][t], 1.0) for ei in range(len(scenario.storages))]
        return terms

    # aggregate containment: gcp_dn <= base <= gcp_up (profile terms cancel)
    for t in range(T):
        up_minus_base = LinExpr(env_sum("up", t))
        for var, coef in base_sum(t):
            up_minus_base.add(var, -coef)
        m.add_constraint(up_minus_base, ">=", 0.0)
        base_minus_dn = LinExpr(base_sum(t))
        for var, coef in env_sum("dn", t):
            base_minus_dn.add(var, -coef)
        m.add_constraint(base_minus_dn, ">=", 0.0)

    # deliverable ramping products, clamped nonnegative by construction
    rfu = [m.add_variable(0.0, lpcore.INF) for _ in range(T - 1)]
    rfd = [m.add_variable(0.0, lpcore.INF) for _ in range(T - 1)]
    for t in range(T - 1):
        cap_up = LinExpr(env_sum("up", t + 1))
        for var, coef in base_sum(t):
            cap_up.add(var, -coef)
        cap_up.add(rfu[t], -1.0)
        m.add_constraint(cap_up, ">=", prof_const[t] - prof_const[t + 1])
        cap_dn = LinExpr(base_sum(t))
        for var, coef in env_sum("dn", t + 1):
            cap_dn.add(var, -coef)
        cap_dn.add(rfd[t], -1.0)
        m.add_constraint(cap_dn, ">=", prof_const[t + 1] - prof_const[t])

    # net cost: energy for the base schedule minus capacity revenues
    obj = LinExpr()
    for t in range(T):
        # import = -gcp_base; energy cost = price * import * dt
        for var, coef in base_sum(t):
            obj.add(var, -prices.energy[t] * dt * coef)
        obj.add_constant(-prices.energy[t] * dt * prof_const[t])
        for gi, g in enumerate(scenario.generators):
            obj.add(bp[gi][t], g.marginal_cost * dt)
        # reserve: price * (envelope minus base), both sides
        for var, coef in env_sum("up", t):
            obj.add(var, -prices.reserve_up[t] * coef)
        for var, coef in base_sum(t):
            obj.add(var, prices.reserve_up[t] * coef)
        for var, coef in base_sum(t):
            obj.add(var, -prices.reserve_dn[t] * coef)
        for var, coef in env_sum("dn", t):
            obj.add(var, prices.reserve_dn[t] * coef)
    for t in range(T - 1):
        obj.add(rfu[t], -prices.frp[t])
        obj.add(rfd[t], -prices.frp[t])
    m.set_objective(obj, maximize=False)

    solver = solver or lpcore.solve
    sol = solver(m)
    if sol.status is LpStatus.INFEASIBLE:
        raise EnvelopeInfeasible(f"market model infeasible for kind {kind.value}")
    if sol.status is LpStatus.UNBOUNDED:
        raise EnvelopeError("market model unbounded; check prices and device bounds")
    if sol.status is not LpStatus.OPTIMAL:
        raise EnvelopeError(f"solver stopped with status {sol.status.value}")

    env = _collect(builder, sol)
    val = sol.value
    base_gen_p = np.array([[val(v) for v in row] for row in bp]).reshape(len(bp), T)
    base_gen_q = np.array([[val(v) for v in row] for row in bq]).reshape(len(bq), T)
    base_sto_p = np.array([[val(v) for v in row] for row in bsp]).reshape(len(bsp), T)
    base_soc = np.array([[val(v) for v in row] for row in bse]).reshape(len(bse), T)
    base = base_gen_p.sum(axis=0) + base_sto_p.sum(axis=0) + prof_const

    r_cap_up = env.gcp_up - base
    r_cap_dn = base - env.gcp_dn
    r_frp_up = np.array([val(v) for v in rfu])
    r_frp_dn = np.array([val(v) for v in rfd])

    gen_cost = sum(
        g.marginal_cost * dt * float(base_gen_p[gi].sum())
        for gi, g in enumerate(scenario.generators)
    )
    cost_energy = float(np.sum(prices.energy * (-base) * dt)) + gen_cost
    rev_reserve = float(np.sum(prices.reserve_up * r_cap_up)
                        + np.sum(prices.reserve_dn * r_cap_dn))
    rev_frp = float(np.sum(prices.frp[: T - 1] * (r_frp_up + r_frp_dn)))

    return MarketSolution(
        base=base,
        env=env,
        base_gen_p=base_gen_p,
        base_gen_q=base_gen_q,
        base_sto_p=base_sto_p,
        base_soc=base_soc,
        r_cap_up=r_cap_up,
        r_cap_dn=r_cap_dn,
        r_frp_up=r_frp_up,
        r_frp_dn=r_frp_dn,
        cost_energy=cost_energy,
        rev_reserve=rev_reserve,
        rev_frp=rev_frp,
        objective=cost_energy - rev_reserve - rev_frp,
    )


def reserve_capacities(sol: MarketSolution) -> tuple[np.ndarray, np.ndarray]:
    """Up/down reserve: distance from the base schedule to the envelope."""
    return sol.env.gcp_up - sol.base, sol.base - sol.env.gcp_dn


def frp_quantities(sol: MarketSolution) -> tuple[np.ndarray, np.ndarray]:
    """Deliverable ramping into the next interval (defined for t < T)."""
    return sol.r_frp_up, sol.r_frp_dn
