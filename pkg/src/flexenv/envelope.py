"""Aggregate flexibility envelope formulations.

Three model kinds share one builder:

* ``NORAMP``   — device boxes, storage energy coupling and network limits
  only; generator ramp limits are ignored (the counterexample model).
* ``BASELINE`` — adds same-envelope and worst-case cross-corner ramp
  limits between consecutive steps, which makes every interior
  trajectory deliverable.
* ``PRERAMP``  — adds nonnegative pre-ramp variables that shift
  generators and storage in opposite directions (net-zero at the GCP) at
  each step, so that ramp room next step is measured from the pre-ramped
  operating points; ramp feasibility becomes eight corner constraints
  per generator and step.

Envelope upper/lower trajectories are denoted ``up``/``dn``.  Pre-ramp
magnitudes attach to an envelope side: the ``dn`` pre-ramp raises a
generator (preparing upward moves) and charges storage deeper, the
``up`` pre-ramp mirrors that downward.

GCP power, nodal injections and squared voltages are affine in the
device variables, so they are eliminated from the LP and rebuilt after
the solve; voltage rows whose attainable range provably stays inside the
box are dropped up front (pure presolve, never changes the optimum).

Storage cross-cumulative energy rows are kept verbatim in the default
``strict`` mode; under ideal efficiency they force the storage envelope
powers to coincide before the final step.  ``sufficient`` mode drops
them — the SoC sandwich argument needs only the per-envelope recursion
and energy box — and lets storage contribute width everywhere.  Both
modes preserve the disaggregation guarantee.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import lpcore, netmodel
from .lpcore import INF, LinExpr, LpModel, LpSolution, LpStatus
from .netmodel import RobustMargins, Scenario

__all__ = [
    "EnvelopeKind",
    "EnvelopeConfig",
    "DeviceEnvelope",
    "EnvelopeSolution",
    "EnvelopeError",
    "EnvelopeInfeasible",
    "EnvelopeBuilder",
    "add_generator_constraints",
    "add_storage_constraints",
    "add_network_constraints",
    "add_gcp_constraints",
    "solve_envelope",
    "envelope_area",
]

SolverFn = Callable[[LpModel], LpSolution]


class EnvelopeKind(enum.Enum):
    NORAMP = "noramp"
    BASELINE = "baseline"
    PRERAMP = "preramp"

    @classmethod
    def parse(cls, text: str) -> "EnvelopeKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise EnvelopeError(f"unknown envelope kind {text!r}; "
                                f"expected one of {[k.value for k in cls]}")


@dataclass(frozen=True)
class EnvelopeConfig:
    mode: str = "strict"  # strict | sufficient (storage cross-cumulative rows)
    factor2: bool = False  # conventional LinDistFlow factor 2
    no_initial_ramp: bool = False  # literal reading: no ramp tie to p_init
    prune_voltage_rows: bool = True

    def __post_init__(self):
        if self.mode not in ("strict", "sufficient"):
            raise EnvelopeError(f"mode must be strict|sufficient, got {self.mode!r}")


class EnvelopeError(RuntimeError):
    pass


class EnvelopeInfeasible(EnvelopeError):
    pass


@dataclass
class DeviceEnvelope:
    """Per-device envelope trajectories (kW / kvar / kWh arrays over T)."""

    bus: int
    p_up: np.ndarray
    p_dn: np.ndarray
    q_up: np.ndarray | None = None  # generators only
    q_dn: np.ndarray | None = None
    soc_up: np.ndarray | None = None  # storage only
    soc_dn: np.ndarray | None = None
    pre_up: np.ndarray | None = None  # pre-ramp magnitudes, >= 0
    pre_dn: np.ndarray | None = None
    soc_up_pre: np.ndarray | None = None
    soc_dn_pre: np.ndarray | None = None


@dataclass
class EnvelopeSolution:
    kind: EnvelopeKind
    config: EnvelopeConfig
    dt: float
    gcp_up: np.ndarray
    gcp_dn: np.ndarray
    generators: list[DeviceEnvelope]
    storages: list[DeviceEnvelope]
    u_up: np.ndarray  # (T, N-1) squared voltages
    u_dn: np.ndarray
    u_up_pre: np.ndarray | None
    u_dn_pre: np.ndarray | None
    area_kwh: float
    robust: bool = False

    # -- serialization: the file contract consumed by disagg and the CLI ----

    def to_json_dict(self) -> dict:
        def arr(a):
            return None if a is None else [float(v) for v in np.asarray(a).ravel()]

        def mat(a):
            return None if a is None else [[float(v) for v in row] for row in a]

        def block(d: DeviceEnvelope) -> dict:
            out = {"bus": d.bus, "p_up": arr(d.p_up), "p_dn": arr(d.p_dn)}
            for name in ("q_up", "q_dn", "soc_up", "soc_dn", "pre_up", "pre_dn",
                         "soc_up_pre", "soc_dn_pre"):
                value = getattr(d, name)
                if value is not None:
                    out[name] = arr(value)
            return out

        return {
            "meta": {
                "kind": self.kind.value,
                "mode": self.config.mode,
                "factor2": self.config.factor2,
                "no_initial_ramp": self.config.no_initial_ramp,
                "robust": self.robust,
                "area_kwh": self.area_kwh,
                "dt_hours": self.dt,
                "steps": int(len(self.gcp_up)),
            },
            "gcp_up": arr(self.gcp_up),
            "gcp_dn": arr(self.gcp_dn),
            "generators": [block(d) for d in self.generators],
            "storages": [block(d) for d in self.storages],
            "voltages": {
                "u_up": mat(self.u_up),
                "u_dn": mat(self.u_dn),
                "u_up_pre": mat(self.u_up_pre),
                "u_dn_pre": mat(self.u_dn_pre),
            },
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "EnvelopeSolution":
        meta = doc["meta"]

        def arr(v):
            return None if v is None else np.asarray(v, dtype=float)

        def block(b: dict) -> DeviceEnvelope:
            return DeviceEnvelope(
                bus=int(b["bus"]),
                p_up=arr(b["p_up"]),
                p_dn=arr(b["p_dn"]),
                **{k: arr(b[k]) for k in ("q_up", "q_dn", "soc_up", "soc_dn",
                                          "pre_up", "pre_dn", "soc_up_pre",
                                          "soc_dn_pre") if k in b},
            )

        volt = doc.get("voltages", {})
        return cls(
            kind=EnvelopeKind(meta["kind"]),
            config=EnvelopeConfig(mode=meta["mode"], factor2=meta["factor2"],
                                  no_initial_ramp=meta["no_initial_ramp"]),
            dt=float(meta["dt_hours"]),
            gcp_up=arr(doc["gcp_up"]),
            gcp_dn=arr(doc["gcp_dn"]),
            generators=[block(b) for b in doc.get("generators", [])],
            storages=[block(b) for b in doc.get("storages", [])],
            u_up=arr(volt.get("u_up")),
            u_dn=arr(volt.get("u_dn")),
            u_up_pre=arr(volt.get("u_up_pre")),
            u_dn_pre=arr(volt.get("u_dn_pre")),
            area_kwh=float(meta["area_kwh"]),
            robust=bool(meta.get("robust", False)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EnvelopeSolution":
        return cls.from_json_dict(json.loads(text))


# ---------------------------------------------------------------------------
# model builder
# ---------------------------------------------------------------------------

SIDES = ("up", "dn")


class EnvelopeBuilder:
    """Holds the LP, the variable handles, and the scenario geometry."""

    def __init__(self, scenario: Scenario, kind: EnvelopeKind,
                 config: EnvelopeConfig, margins: RobustMargins | None = None):
        self.scenario = scenario
        self.kind = kind
        self.config = config
        self.margins = margins
        self.model = LpModel(f"envelope-{kind.value}")
        self.T = scenario.profiles.T
        self.dt = scenario.profiles.dt
        self.sens = netmodel.sensitivity_matrices(scenario.network, factor2=config.factor2)
        self.pruned_voltage_rows = 0

        # variable handles: gp[g][side][t], gq likewise; sp/se for storage
        self.gp: list[dict[str, list]] = []
        self.gq: list[dict[str, list]] = []
        self.gpre: list[dict[str, list]] = []
        self.sp: list[dict[str, list]] = []
        self.se: list[dict[str, list]] = []
        self.spre: list[dict[str, list]] = []
        self.se_pre: list[dict[str, list]] = []

        self._create_variables()

    # -- variables -----------------------------------------------------------

    def _initial_band(self, g: netmodel.Generator) -> tuple[float, float]:
        if self.kind is EnvelopeKind.NORAMP or self.config.no_initial_ramp:
            return g.p_min, g.p_max
        return (max(g.p_min, g.p_init - g.ramp_down),
                min(g.p_max, g.p_init + g.ramp_up))

    def _create_variables(self):
        m = self.model
        T = self.T
        preramp = self.kind is EnvelopeKind.PRERAMP
        for g in self.scenario.generators:
            lo1, hi1 = self._initial_band(g)
            self.gp.append({
                s: [m.add_variable(lo1 if t == 0 else g.p_min,
                                   hi1 if t == 0 else g.p_max) for t in range(T)]
                for s in SIDES
            })
            self.gq.append({s: [m.add_variable(g.q_min, g.q_max) for _ in range(T)]
                            for s in SIDES})
            if preramp:
                span = g.p_max - g.p_min
                self.gpre.append({s: [m.add_variable(0.0, span) for _ in range(T)]
                                  for s in SIDES})
        for e in self.scenario.storages:
            self.sp.append({s: [m.add_variable(-e.p_max, e.p_max) for _ in range(T)]
                            for s in SIDES})
            self.se.append({
                s: [m.add_variable(e.e_init, e.e_init) if t == 0
                    else m.add_variable(e.e_min, e.e_max) for t in range(T)]
                for s in SIDES
            })
            if preramp:
                self.spre.append({s: [m.add_variable(0.0, 2 * e.p_max) for _ in range(T)]
                                  for s in SIDES})
                self.se_pre.append({
                    s: [m.add_variable(e.e_init, e.e_init) if t == 0
                        else m.add_variable(e.e_min, e.e_max) for t in range(T)]
                    for s in SIDES
                })

    # -- pre-ramped operating points ------------------------------------------

    def gen_point(self, gi: int, side: str, t: int, pre: bool) -> list[tuple]:
        """(var, coef) terms of a generator's (pre-ramped) active power."""
        terms = [(self.gp[gi][side][t], 1.0)]
        if pre:
            # dn-side pre-ramp raises output, up-side lowers it
            sign = 1.0 if side == "dn" else -1.0
            terms.append((self.gpre[gi][side][t], sign))
        return terms

    def storage_point(self, ei: int, side: str, t: int, pre: bool) -> list[tuple]:
        terms = [(self.sp[ei][side][t], 1.0)]
        if pre:
            # mirror of the generator: dn-side pre-ramp charges deeper
            sign = -1.0 if side == "dn" else 1.0
            terms.append((self.spre[ei][side][t], sign))
        return terms


def add_generator_constraints(builder: EnvelopeBuilder, gi: int, kind: EnvelopeKind):
    """Ordering, ramp and pre-ramp feasibility rows for one generator.

    Box limits live on the variable bounds; the first-step band against
    the initial operating point is folded into the t=1 bounds unless the
    configuration says otherwise.
    """
    m = builder.model
    g = builder.scenario.generators[gi]
    T = builder.T
    up, dn = builder.gp[gi]["up"], builder.gp[gi]["dn"]

    for t in range(T):
        m.add_constraint(LinExpr([(up[t], 1.0), (dn[t], -1.0)]), ">=", 0.0)

    if kind is EnvelopeKind.NORAMP:
        return

    lo, hi = -g.ramp_down, g.ramp_up
    if kind is EnvelopeKind.BASELINE:
        for t in range(1, T):
            for prev in (up[t - 1], dn[t - 1]):
                m.add_range(LinExpr([(up[t], 1.0), (prev, -1.0)]), lo, hi)
                m.add_range(LinExpr([(dn[t], 1.0), (prev, -1.0)]), lo, hi)
        return

    # pre-ramp model: transitions start from the pre-ramped points at t-1
    pre_up, pre_dn = builder.gpre[gi]["up"], builder.gpre[gi]["dn"]
    for t in range(1, T):
        from_dn = [(dn[t - 1], -1.0), (pre_dn[t - 1], -1.0)]
        from_up = [(up[t - 1], -1.0), (pre_up[t - 1], 1.0)]
        for prev in (from_dn, from_up):
            m.add_range(LinExpr([(up[t], 1.0), *prev]), lo, hi)
            m.add_range(LinExpr([(dn[t], 1.0), *prev]), lo, hi)
    # the pre-ramped points themselves must be operable
    for t in range(T):
        m.add_range(LinExpr([(dn[t], 1.0), (pre_dn[t], 1.0)]), g.p_min, g.p_max)
        m.add_range(LinExpr([(up[t], 1.0), (pre_up[t], -1.0)]), g.p_min, g.p_max)


def add_storage_constraints(builder: EnvelopeBuilder, ei: int, kind: EnvelopeKind):
    """Power ordering, SoC recursion/box and pre-ramp energy budgets."""
    m = builder.model
    e = builder.scenario.storages[ei]
    T, dt = builder.T, builder.dt
    p, soc = builder.sp[ei], builder.se[ei]

    for t in range(T):
        m.add_constraint(LinExpr([(p["up"][t], 1.0), (p["dn"][t], -1.0)]), ">=", 0.0)

    for s in SIDES:
        for t in range(1, T):
            m.add_constraint(
                LinExpr([(soc[s][t], 1.0), (soc[s][t - 1], -e.kappa), (p[s][t - 1], dt)]),
                "==", 0.0)

    if builder.config.mode == "strict":
        # cross-cumulative energy rows: most-accumulating vs most-depleting
        for t in range(1, T):
            acc = LinExpr([(soc["up"][t], 1.0)])
            for tau in range(t):
                acc.add(p["dn"][tau], dt)
            m.add_constraint(acc, ">=", e.e_init)
            dep = LinExpr([(soc["dn"][t], 1.0)])
            for tau in range(t):
                dep.add(p["up"][tau], dt)
            m.add_constraint(dep, "<=", e.e_init)

    if kind is not EnvelopeKind.PRERAMP:
        return

    pre, soc_pre = builder.spre[ei], builder.se_pre[ei]
    for t in range(T):
        # pre-ramped power stays inside the converter rating
        m.add_range(LinExpr([(p["dn"][t], 1.0), (pre["dn"][t], -1.0)]), -e.p_max, e.p_max)
        m.add_range(LinExpr([(p["up"][t], 1.0), (pre["up"][t], 1.0)]), -e.p_max, e.p_max)
    # cumulative pre-ramp energy cannot exceed what the SoC can back
    budget_up = LinExpr([(pre["up"][t], dt) for t in range(T)])
    m.add_constraint(budget_up, "<=", e.e_init - e.e_min)
    budget_dn = LinExpr([(pre["dn"][t], dt) for t in range(T)])
    m.add_constraint(budget_dn, "<=", e.e_max - e.e_init)
    # SoC driven by the pre-ramped power must stay inside the energy box
    for s, sign in (("up", 1.0), ("dn", -1.0)):
        for t in range(1, T):
            m.add_constraint(
                LinExpr([
                    (soc_pre[s][t], 1.0),
                    (soc_pre[s][t - 1], -e.kappa),
                    (p[s][t - 1], dt),
                    (pre[s][t - 1], sign * dt),
                ]),
                "==", 0.0)


def add_network_constraints(builder: EnvelopeBuilder, scenario: Scenario,
                            margins: RobustMargins | None, kind: EnvelopeKind):
    """Squared-voltage boxes at envelope (and pre-ramped) injections.

    Rows are expressed directly in device variables; profile-driven
    terms land in the row bounds.  Rows whose attainable interval cannot
    leave the box are skipped.
    """
    m = builder.model
    net = scenario.network
    sens = builder.sens
    T = builder.T
    nred = net.n_bus - 1
    s_base = net.s_base

    delta = np.zeros((T, nred)) if margins is None else np.asarray(margins.delta_u)
    if delta.shape != (T, nred):
        raise EnvelopeError(f"margins shaped {delta.shape}, expected {(T, nred)}")
    lo_u = net.u_min + delta
    hi_u = net.u_max - delta
    bad = np.argwhere(lo_u > hi_u)
    if bad.size:
        t, i = bad[0]
        raise EnvelopeInfeasible(
            f"robust margins exceed the voltage band at bus {i + 2}, step {t + 1}")

    prof = scenario.profiles
    const = (
        1.0
        + ((prof.pv_p[:, 1:] - prof.load_p[:, 1:]) / s_base) @ sens.h_p.T
        + (-prof.load_q[:, 1:] / s_base) @ sens.h_q.T
    )

    preramp = kind is EnvelopeKind.PRERAMP
    points = [("up", False), ("dn", False)]
    if preramp:
        points += [("up", True), ("dn", True)]

    for side, pre in points:
        for t in range(T):
            for i in range(nred):
                terms = []
                for gi, g in enumerate(scenario.generators):
                    hp = sens.h_p[i, g.bus - 2] / s_base
                    hq = sens.h_q[i, g.bus - 2] / s_base
                    if hp != 0.0:
                        for var, sign in builder.gen_point(gi, side, t, pre):
                            terms.append((var, sign * hp))
                    if hq != 0.0:
                        terms.append((builder.gq[gi][side][t], hq))
                for ei, e in enumerate(scenario.storages):
                    hp = sens.h_p[i, e.bus - 2] / s_base
                    if hp != 0.0:
                        for var, sign in builder.storage_point(ei, side, t, pre):
                            terms.append((var, sign * hp))
                lo = lo_u[t, i] - const[t, i]
                hi = hi_u[t, i] - const[t, i]
                if builder.config.prune_voltage_rows and terms:
                    amin = sum(min(c * v.lower, c * v.upper) for v, c in terms)
                    amax = sum(max(c * v.lower, c * v.upper) for v, c in terms)
                    if amin >= lo and amax <= hi:
                        builder.pruned_voltage_rows += 1
                        continue
                if not terms:
                    if not lo <= 0.0 <= hi:
                        raise EnvelopeInfeasible(
                            f"profile-driven voltage leaves the box at bus {i + 2}, "
                            f"step {t + 1} (no device can reach it)")
                    continue
                m.add_range(LinExpr(terms), lo, hi)


def add_gcp_constraints(builder: EnvelopeBuilder, scenario: Scenario, kind: EnvelopeKind):
    """Envelope ordering at the GCP plus pre-ramp coordination balance.

    GCP power itself is eliminated: it is the sum of device variables
    and profile constants, so ordering rows involve only device terms.
    The pre-ramp balance (equal generator and storage pre-ramp totals
    per step and side) is what keeps the GCP power invariant under
    pre-ramping.
    """
    m = builder.model
    T = builder.T
    for t in range(T):
        width = LinExpr()
        for gi in range(len(scenario.generators)):
            width.add(builder.gp[gi]["up"][t], 1.0)
            width.add(builder.gp[gi]["dn"][t], -1.0)
        for ei in range(len(scenario.storages)):
            width.add(builder.sp[ei]["up"][t], 1.0)
            width.add(builder.sp[ei]["dn"][t], -1.0)
        m.add_constraint(width, ">=", 0.0)

    if kind is not EnvelopeKind.PRERAMP:
        return
    for s in SIDES:
        for t in range(T):
            bal = LinExpr()
            for gi in range(len(scenario.generators)):
                bal.add(builder.gpre[gi][s][t], 1.0)
            for ei in range(len(scenario.storages)):
                bal.add(builder.spre[ei][s][t], -1.0)
            m.add_constraint(bal, "==", 0.0)


def _set_objective(builder: EnvelopeBuilder):
    obj = LinExpr()
    for gi in range(len(builder.scenario.generators)):
        for t in range(builder.T):
            obj.add(builder.gp[gi]["up"][t], builder.dt)
            obj.add(builder.gp[gi]["dn"][t], -builder.dt)
    for ei in range(len(builder.scenario.storages)):
        for t in range(builder.T):
            obj.add(builder.sp[ei]["up"][t], builder.dt)
            obj.add(builder.sp[ei]["dn"][t], -builder.dt)
    builder.model.set_objective(obj, maximize=True)


def build_envelope_model(scenario: Scenario, kind: EnvelopeKind,
                         margins: RobustMargins | None = None,
                         config: EnvelopeConfig | None = None) -> EnvelopeBuilder:
    config = config or EnvelopeConfig()
    if not scenario.generators and not scenario.storages:
        raise EnvelopeError("scenario has no controllable devices")
    builder = EnvelopeBuilder(scenario, kind, config, margins)
    for gi in range(len(scenario.generators)):
        add_generator_constraints(builder, gi, kind)
    for ei in range(len(scenario.storages)):
        add_storage_constraints(builder, ei, kind)
    add_network_constraints(builder, scenario, margins, kind)
    add_gcp_constraints(builder, scenario, kind)
    _set_objective(builder)
    return builder


def _collect(builder: EnvelopeBuilder, sol: LpSolution) -> EnvelopeSolution:
    scenario = builder.scenario
    T = builder.T
    prof = scenario.profiles
    preramp = builder.kind is EnvelopeKind.PRERAMP

    def series(handles) -> np.ndarray:
        return np.array([sol.value(h) for h in handles])

    gens = []
    for gi, g in enumerate(scenario.generators):
        gens.append(DeviceEnvelope(
            bus=g.bus,
            p_up=series(builder.gp[gi]["up"]),
            p_dn=series(builder.gp[gi]["dn"]),
            q_up=series(builder.gq[gi]["up"]),
            q_dn=series(builder.gq[gi]["dn"]),
            pre_up=series(builder.gpre[gi]["up"]) if preramp else None,
            pre_dn=series(builder.gpre[gi]["dn"]) if preramp else None,
        ))
    stos = []
    for ei, e in enumerate(scenario.storages):
        stos.append(DeviceEnvelope(
            bus=e.bus,
            p_up=series(builder.sp[ei]["up"]),
            p_dn=series(builder.sp[ei]["dn"]),
            soc_up=series(builder.se[ei]["up"]),
            soc_dn=series(builder.se[ei]["dn"]),
            pre_up=series(builder.spre[ei]["up"]) if preramp else None,
            pre_dn=series(builder.spre[ei]["dn"]) if preramp else None,
            soc_up_pre=series(builder.se_pre[ei]["up"]) if preramp else None,
            soc_dn_pre=series(builder.se_pre[ei]["dn"]) if preramp else None,
        ))

    base_p = prof.pv_p[:, 1:] - prof.load_p[:, 1:]  # kW, non-slack buses
    base_q = -prof.load_q[:, 1:]
    nred = scenario.network.n_bus - 1

    def injections(side: str, pre: bool) -> tuple[np.ndarray, np.ndarray]:
        inj_p = base_p.copy()
        inj_q = base_q.copy()
        for d, dev in zip(gens, scenario.generators):
            p = d.p_up if side == "up" else d.p_dn
            if pre:
                mag = d.pre_up if side == "up" else d.pre_dn
                p = p - mag if side == "up" else p + mag
            inj_p[:, dev.bus - 2] += p
            inj_q[:, dev.bus - 2] += d.q_up if side == "up" else d.q_dn
        for d, dev in zip(stos, scenario.storages):
            p = d.p_up if side == "up" else d.p_dn
            if pre:
                mag = d.pre_up if side == "up" else d.pre_dn
                p = p + mag if side == "up" else p - mag
            inj_p[:, dev.bus - 2] += p
        return inj_p, inj_q

    s_base = scenario.network.s_base
    out = {}
    for side in SIDES:
        inj_p, inj_q = injections(side, pre=False)
        out[f"gcp_{side}"] = inj_p.sum(axis=1)
        out[f"u_{side}"] = netmodel.voltage_profile(builder.sens, inj_p / s_base, inj_q / s_base)
    u_pre = {"up": None, "dn": None}
    if preramp:
        for side in SIDES:
            inj_p, inj_q = injections(side, pre=True)
            u_pre[side] = netmodel.voltage_profile(builder.sens, inj_p / s_base, inj_q / s_base)

    return EnvelopeSolution(
        kind=builder.kind,
        config=builder.config,
        dt=builder.dt,
        gcp_up=out["gcp_up"],
        gcp_dn=out["gcp_dn"],
        generators=gens,
        storages=stos,
        u_up=out["u_up"],
        u_dn=out["u_dn"],
        u_up_pre=u_pre["up"],
        u_dn_pre=u_pre["dn"],
        area_kwh=float(sol.objective_value),
        robust=builder.margins is not None,
    )


def solve_envelope(scenario: Scenario, kind: EnvelopeKind | str,
                   margins: RobustMargins | None = None,
                   config: EnvelopeConfig | None = None,
                   solver: SolverFn | None = None) -> EnvelopeSolution:
    """Build and solve one envelope LP; raises on infeasible/unbounded."""
    if isinstance(kind, str):
        kind = EnvelopeKind.parse(kind)
    builder = build_envelope_model(scenario, kind, margins, config)
    solver = solver or lpcore.solve
    sol = solver(builder.model)
    if sol.status is LpStatus.INFEASIBLE:
        raise EnvelopeInfeasible(
            f"{kind.value} envelope is infeasible for this scenario"
            + (" under the given robust margins" if margins is not None else ""))
    if sol.status is LpStatus.UNBOUNDED:
        raise EnvelopeError(
            f"{kind.value} envelope is unbounded; check device bounds")
    if sol.status is not LpStatus.OPTIMAL:
        raise EnvelopeError(f"solver stopped with status {sol.status.value}")
    return _collect(builder, sol)


def envelope_area(sol: EnvelopeSolution) -> float:
    """Integral of the envelope width over the horizon (kWh)."""
    return float(np.sum(sol.gcp_up - sol.gcp_dn) * sol.dt)
