"""Network, device and profile data model for radial feeders.

Buses are numbered 1..N with bus 1 as the grid connection point (GCP,
the slack).  Lines must form a tree rooted there.  Device ratings and
profiles are kept in kW / kvar / kWh at the interface; everything that
touches the network model is converted to per-unit exactly once, using
the case's power base.

Squared-voltage sensitivities follow the linearized DistFlow model:
``u = 1 + h_p @ p_inj + h_q @ q_inj`` over non-slack buses, where
``h_p[i, j]`` is the total resistance on the path shared by buses i and
j on their way to the root.  The conventional squared-voltage model
carries a factor 2 on the impedance terms; ``factor2=True`` enables it,
the default reproduces the plain ``A^-1 R A^-T`` form.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Bus",
    "Line",
    "Network",
    "Generator",
    "Storage",
    "Profiles",
    "Scenario",
    "SensitivityMatrices",
    "UncertaintySpec",
    "RobustMargins",
    "CaseError",
    "parse_case",
    "serialize_case",
    "sensitivity_matrices",
    "voltage_profile",
    "branch_flows",
    "uncertainty_margins",
]


class CaseError(ValueError):
    """Raised when a case file violates the schema or an invariant."""

    def __init__(self, message: str, location: str = "<case>"):
        super().__init__(f"{location}: {message}")
        self.location = location
        self.reason = message


@dataclass(frozen=True)
class Bus:
    id: int
    name: str | None = None


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    r: float  # p.u.
    x: float  # p.u.


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    u_min: float  # p.u.^2
    u_max: float  # p.u.^2
    s_base: float  # kVA
    v_base: float  # kV

    @property
    def n_bus(self) -> int:
        return len(self.buses)


@dataclass(frozen=True)
class Generator:
    bus: int
    p_min: float
    p_max: float
    q_min: float
    q_max: float
    ramp_up: float  # kW per step
    ramp_down: float  # kW per step
    p_init: float
    marginal_cost: float = 0.0  # $/kWh


@dataclass(frozen=True)
class Storage:
    bus: int
    p_max: float  # kW, symmetric charge/discharge limit
    e_min: float  # kWh
    e_max: float
    e_init: float
    kappa: float = 1.0


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Profiles:
    """Per-bus time series, shape (T, N) indexed by step and bus-1.

    Column 0 belongs to the slack bus and is ignored by the network
    model (anything there is served directly from the upstream grid).
    """

    T: int
    dt: float  # hours
    load_p: np.ndarray
    load_q: np.ndarray
    pv_p: np.ndarray

    def __post_init__(self):
        for name in ("load_p", "load_q", "pv_p"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))

    def __eq__(self, other):
        if not isinstance(other, Profiles):
            return NotImplemented
        return (
            self.T == other.T
            and self.dt == other.dt
            and np.array_equal(self.load_p, other.load_p)
            and np.array_equal(self.load_q, other.load_q)
            and np.array_equal(self.pv_p, other.pv_p)
        )


@dataclass(frozen=True)
class Scenario:
    network: Network
    generators: tuple[Generator, ...]
    storages: tuple[Storage, ...]
    profiles: Profiles


@dataclass(frozen=True, eq=False)
class SensitivityMatrices:
    """Reduced incidence and squared-voltage sensitivities (non-slack buses).

    ``incidence`` is the (N-1)x(N-1) node-branch matrix with lines
    oriented away from the root; ``path`` marks, for each non-slack bus,
    the lines on its path to the root (used to rebuild branch flows).
    """

    incidence: np.ndarray
    h_p: np.ndarray
    h_q: np.ndarray
    path: np.ndarray

    def __post_init__(self):
        for name in ("incidence", "h_p", "h_q", "path"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))


@dataclass(frozen=True)
class UncertaintySpec:
    alpha: float  # load forecast-error fraction
    beta: float  # PV forecast-error fraction

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ValueError(f"alpha/beta must lie in [0, 1], got {self.alpha}, {self.beta}")


@dataclass(frozen=True, eq=False)
class RobustMargins:
    """Per-step, per-non-slack-bus tightening of the squared-voltage box."""

    delta_u: np.ndarray  # shape (T, N-1), p.u.^2, >= 0

    def __post_init__(self):
        object.__setattr__(self, "delta_u", _frozen_array(self.delta_u))


# ---------------------------------------------------------------------------
# case ingestion
# ---------------------------------------------------------------------------


def _require(mapping, key, loc, kind=None):
    if key not in mapping:
        raise CaseError(f"missing required key '{key}'", loc)
    value = mapping[key]
    if kind is not None and not isinstance(value, kind):
        raise CaseError(f"'{key}' has wrong type {type(value).__name__}", loc)
    return value


def _number(mapping, key, loc):
    value = _require(mapping, key, loc)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CaseError(f"'{key}' must be a number, got {value!r}", loc)
    return float(value)


def _orient_tree(n_bus: int, lines: list[Line]) -> tuple[Line, ...]:
    """BFS from bus 1, re-orienting every line away from the root.

    Raises on cycles, disconnected buses, or a wrong line count.
    """
    if len(lines) != n_bus - 1:
        raise CaseError(
            f"a tree on {n_bus} buses needs {n_bus - 1} lines, got {len(lines)} "
            "(extra lines create a cycle)",
            "network.lines",
        )
    adjacency: dict[int, list[tuple[int, int]]] = {b: [] for b in range(1, n_bus + 1)}
    for idx, ln in enumerate(lines):
        adjacency[ln.from_bus].append((ln.to_bus, idx))
        adjacency[ln.to_bus].append((ln.from_bus, idx))
    oriented: dict[int, Line] = {}
    seen = {1}
    queue = [1]
    while queue:
        bus = queue.pop(0)
        for nbr, idx in adjacency[bus]:
            if idx in oriented:
                continue
            if nbr in seen:
                raise CaseError(
                    f"line {lines[idx].from_bus}-{lines[idx].to_bus} closes a cycle",
                    f"network.lines[{idx}]",
                )
            ln = lines[idx]
            if ln.from_bus == bus:
                oriented[idx] = ln
            else:
                oriented[idx] = Line(from_bus=bus, to_bus=ln.from_bus, r=ln.r, x=ln.x)
            seen.add(nbr)
            queue.append(nbr)
    if len(seen) != n_bus:
        missing = sorted(set(range(1, n_bus + 1)) - seen)
        raise CaseError(f"buses {missing} are not connected to the root", "network.lines")
    return tuple(oriented[i] for i in range(len(lines)))


def _profiles_from_columns(columns, T: int, n_bus: int, dt: float, loc: str) -> Profiles:
    arrays = {}
    for name in ("load_p", "load_q", "pv_p"):
        arr = np.zeros((T, n_bus))
        for bus_key, series in (columns.get(name) or {}).items():
            try:
                bus = int(bus_key)
            except (TypeError, ValueError):
                raise CaseError(f"bad bus id {bus_key!r}", f"{loc}.{name}")
            if not 1 <= bus <= n_bus:
                raise CaseError(f"unknown bus {bus}", f"{loc}.{name}")
            if len(series) != T:
                raise CaseError(
                    f"bus {bus} series has {len(series)} entries, horizon is {T}",
                    f"{loc}.{name}",
                )
            arr[:, bus - 1] = series
        arrays[name] = arr
    for name in ("load_p", "pv_p"):
        if np.any(arrays[name] < 0):
            t, b = np.argwhere(arrays[name] < 0)[0]
            raise CaseError(f"negative value at t={t + 1}, bus={b + 1}", f"{loc}.{name}")
    return Profiles(T=T, dt=dt, **arrays)


def _profiles_from_csv(text: str, T: int, n_bus: int, dt: float) -> Profiles:
    load_p = np.zeros((T, n_bus))
    load_q = np.zeros((T, n_bus))
    pv_p = np.zeros((T, n_bus))
    reader = csv.DictReader(io.StringIO(text))
    expected = {"t", "bus", "load_p_kw", "load_q_kvar", "pv_p_kw"}
    if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
        raise CaseError(
            f"profiles CSV must have header {sorted(expected)}, got {reader.fieldnames}",
            "profiles.csv",
        )
    for i, row in enumerate(reader):
        loc = f"profiles.csv row {i + 2}"
        try:
            t = int(row["t"])
            bus = int(row["bus"])
        except ValueError:
            raise CaseError(f"non-integer t/bus in {row!r}", loc)
        if not 1 <= t <= T:
            raise CaseError(f"t={t} outside horizon 1..{T}", loc)
        if not 1 <= bus <= n_bus:
            raise CaseError(f"unknown bus {bus}", loc)
        try:
            load_p[t - 1, bus - 1] = float(row["load_p_kw"] or 0.0)
            load_q[t - 1, bus - 1] = float(row["load_q_kvar"] or 0.0)
            pv_p[t - 1, bus - 1] = float(row["pv_p_kw"] or 0.0)
        except ValueError:
            raise CaseError(f"non-numeric entry in {row!r}", loc)
    if np.any(load_p < 0):
        raise CaseError("negative load_p_kw", "profiles.csv")
    if np.any(pv_p < 0):
        raise CaseError("negative pv_p_kw", "profiles.csv")
    return Profiles(T=T, dt=dt, load_p=load_p, load_q=load_q, pv_p=pv_p)


def parse_case(text: str, profiles_csv: str | None = None) -> Scenario:
    """Parse a JSON case file (optionally with a companion profiles CSV).

    Profiles may be inline under a top-level ``profiles`` key; a CSV
    argument takes precedence.  Missing profile entries default to zero.
    All invariants are checked here so downstream code can assume a
    well-formed scenario.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseError(f"invalid JSON: {exc}", "<root>")
    if not isinstance(doc, dict):
        raise CaseError("top level must be an object", "<root>")

    net_doc = _require(doc, "network", "<root>", dict)
    s_base = _number(net_doc, "s_base_kva", "network")
    v_base = _number(net_doc, "v_base_kv", "network")
    u_min = _number(net_doc, "u_min", "network")
    u_max = _number(net_doc, "u_max", "network")
    if s_base <= 0 or v_base <= 0:
        raise CaseError("bases must be positive", "network")
    if not 0 < u_min < u_max:
        raise CaseError(f"need 0 < u_min < u_max, got {u_min}, {u_max}", "network")

    bus_ids = _require(net_doc, "buses", "network", list)
    if sorted(bus_ids) != list(range(1, len(bus_ids) + 1)):
        raise CaseError("bus ids must be unique and contiguous from 1", "network.buses")
    n_bus = len(bus_ids)
    if n_bus < 2:
        raise CaseError("need at least 2 buses", "network.buses")
    buses = tuple(Bus(id=b) for b in range(1, n_bus + 1))

    lines = []
    for i, ln in enumerate(_require(net_doc, "lines", "network", list)):
        loc = f"network.lines[{i}]"
        f = int(_number(ln, "from", loc))
        t = int(_number(ln, "to", loc))
        r = _number(ln, "r_pu", loc)
        x = _number(ln, "x_pu", loc)
        if f == t:
            raise CaseError("self-loop", loc)
        for end in (f, t):
            if not 1 <= end <= n_bus:
                raise CaseError(f"unknown bus {end}", loc)
        if r < 0 or x < 0:
            raise CaseError("r and x must be nonnegative", loc)
        lines.append(Line(from_bus=f, to_bus=t, r=r, x=x))
    oriented = _orient_tree(n_bus, lines)
    network = Network(buses=buses, lines=oriented, u_min=u_min, u_max=u_max,
                      s_base=s_base, v_base=v_base)

    horizon = _require(doc, "horizon", "<root>", dict)
    T = int(_number(horizon, "steps", "horizon"))
    dt = _number(horizon, "dt_hours", "horizon")
    if T < 2:
        raise CaseError(f"horizon needs at least 2 steps, got {T}", "horizon.steps")
    if dt <= 0:
        raise CaseError(f"dt_hours must be positive, got {dt}", "horizon.dt_hours")

    generators = []
    for i, g in enumerate(doc.get("generators") or []):
        loc = f"generators[{i}]"
        gen = Generator(
            bus=int(_number(g, "bus", loc)),
            p_min=_number(g, "p_min_kw", loc),
            p_max=_number(g, "p_max_kw", loc),
            q_min=_number(g, "q_min_kvar", loc),
            q_max=_number(g, "q_max_kvar", loc),
            ramp_up=_number(g, "ramp_up_kw", loc),
            ramp_down=_number(g, "ramp_down_kw", loc),
            p_init=_number(g, "p_init_kw", loc),
            marginal_cost=float(g.get("cost_per_kwh", 0.0)),
        )
        if not 1 <= gen.bus <= n_bus:
            raise CaseError(f"dangling device bus {gen.bus}", f"{loc}.bus")
        if gen.p_min > gen.p_max or not gen.p_min <= gen.p_init <= gen.p_max:
            raise CaseError("need p_min <= p_init <= p_max", loc)
        if gen.q_min > gen.q_max:
            raise CaseError("need q_min <= q_max", loc)
        if gen.ramp_up < 0 or gen.ramp_down < 0:
            raise CaseError("ramp limits must be nonnegative", loc)
        generators.append(gen)

    storages = []
    for i, s in enumerate(doc.get("storages") or []):
        loc = f"storages[{i}]"
        sto = Storage(
            bus=int(_number(s, "bus", loc)),
            p_max=_number(s, "p_max_kw", loc),
            e_min=_number(s, "e_min_kwh", loc),
            e_max=_number(s, "e_max_kwh", loc),
            e_init=_number(s, "e_init_kwh", loc),
            kappa=float(s.get("kappa", 1.0)),
        )
        if not 1 <= sto.bus <= n_bus:
            raise CaseError(f"dangling device bus {sto.bus}", f"{loc}.bus")
        if sto.p_max < 0:
            raise CaseError("p_max_kw must be nonnegative", loc)
        if not sto.e_min <= sto.e_init <= sto.e_max:
            raise CaseError("need e_min <= e_init <= e_max", loc)
        storages.append(sto)

    if profiles_csv is not None:
        profiles = _profiles_from_csv(profiles_csv, T, n_bus, dt)
    elif "profiles" in doc:
        profiles = _profiles_from_columns(doc["profiles"], T, n_bus, dt, "profiles")
    else:
        profiles = Profiles(T=T, dt=dt, load_p=np.zeros((T, n_bus)),
                            load_q=np.zeros((T, n_bus)), pv_p=np.zeros((T, n_bus)))

    return Scenario(network=network, generators=tuple(generators),
                    storages=tuple(storages), profiles=profiles)


def serialize_case(scenario: Scenario) -> str:
    """Render a Scenario back to case-file JSON with inline profiles.

    ``parse_case(serialize_case(s))`` reproduces ``s`` exactly.
    """
    net = scenario.network
    prof = scenario.profiles

    def _columns(arr):
        out = {}
        for b in range(net.n_bus):
            if np.any(arr[:, b] != 0.0):
                out[str(b + 1)] = [float(v) for v in arr[:, b]]
        return out

    doc = {
        "network": {
            "s_base_kva": net.s_base,
            "v_base_kv": net.v_base,
            "u_min": net.u_min,
            "u_max": net.u_max,
            "buses": [b.id for b in net.buses],
            "lines": [
                {"from": ln.from_bus, "to": ln.to_bus, "r_pu": ln.r, "x_pu": ln.x}
                for ln in net.lines
            ],
        },
        "generators": [
            {
                "bus": g.bus,
                "p_min_kw": g.p_min,
                "p_max_kw": g.p_max,
                "q_min_kvar": g.q_min,
                "q_max_kvar": g.q_max,
                "ramp_up_kw": g.ramp_up,
                "ramp_down_kw": g.ramp_down,
                "p_init_kw": g.p_init,
                "cost_per_kwh": g.marginal_cost,
            }
            for g in scenario.generators
        ],
        "storages": [
            {
                "bus": s.bus,
                "p_max_kw": s.p_max,
                "e_min_kwh": s.e_min,
                "e_max_kwh": s.e_max,
                "e_init_kwh": s.e_init,
                "kappa": s.kappa,
            }
            for s in scenario.storages
        ],
        "horizon": {"steps": prof.T, "dt_hours": prof.dt},
        "profiles": {
            "load_p": _columns(prof.load_p),
            "load_q": _columns(prof.load_q),
            "pv_p": _columns(prof.pv_p),
        },
    }
    return json.dumps(doc, indent=1)


# ---------------------------------------------------------------------------
# sensitivities and voltages
# ---------------------------------------------------------------------------


def sensitivity_matrices(network: Network, factor2: bool = False) -> SensitivityMatrices:
    """Common-path impedance sensitivities over non-slack buses.

    Built by tree traversal: ``path[i, e]`` flags line e on the path from
    non-slack bus i+2 to the root, and ``h_p = path @ diag(r) @ path.T``.
    No matrix is inverted.  ``factor2`` doubles both sensitivities.
    """
    n = network.n_bus
    m = n - 1
    parent_edge = {}  # bus -> line index
    children: dict[int, list[tuple[int, int]]] = {b: [] for b in range(1, n + 1)}
    for e, ln in enumerate(network.lines):
        children[ln.from_bus].append((ln.to_bus, e))
    path = np.zeros((m, m))
    stack = [(1, np.zeros(m))]
    while stack:
        bus, mask = stack.pop()
        for child, e in children[bus]:
            child_mask = mask.copy()
            child_mask[e] = 1.0
            path[child - 2] = child_mask
            parent_edge[child] = e
            stack.append((child, child_mask))
    if len(parent_edge) != m:
        raise CaseError("network is not a tree rooted at bus 1", "network.lines")

    r = np.array([ln.r for ln in network.lines])
    x = np.array([ln.x for ln in network.lines])
    scale = 2.0 if factor2 else 1.0
    h_p = scale * (path * r) @ path.T
    h_q = scale * (path * x) @ path.T

    incidence = np.zeros((m, m))
    for e, ln in enumerate(network.lines):
        if ln.from_bus != 1:
            incidence[ln.from_bus - 2, e] = 1.0
        incidence[ln.to_bus - 2, e] = -1.0
    return SensitivityMatrices(incidence=incidence, h_p=h_p, h_q=h_q, path=path)


def voltage_profile(sens: SensitivityMatrices, p_inj, q_inj) -> np.ndarray:
    """Squared voltages ``1 + h_p @ p + h_q @ q`` (per-unit inputs).

    Accepts single (N-1,) injection vectors or (T, N-1) batches.
    """
    p = np.asarray(p_inj, dtype=float)
    q = np.asarray(q_inj, dtype=float)
    m = sens.h_p.shape[0]
    if p.shape != q.shape or p.shape[-1] != m:
        raise ValueError(f"injection shape {p.shape}/{q.shape} does not match {m} non-slack buses")
    return 1.0 + p @ sens.h_p.T + q @ sens.h_q.T


def branch_flows(sens: SensitivityMatrices, p_inj, q_inj) -> tuple[np.ndarray, np.ndarray]:
    """Line active/reactive flows oriented away from the root.

    Flow on line e equals minus the net injection in the subtree it
    feeds, so exports toward the GCP show up as negative flows.
    """
    p = np.asarray(p_inj, dtype=float)
    q = np.asarray(q_inj, dtype=float)
    return -(p @ sens.path), -(q @ sens.path)


def uncertainty_margins(
    sens: SensitivityMatrices,
    profiles: Profiles,
    spec: UncertaintySpec,
    s_base_kva: float,
) -> RobustMargins:
    """Worst-case squared-voltage shifts for box load/PV forecast errors.

    ``delta_u[t] = |h_p| @ (alpha*|load_p[t]| + beta*|pv_p[t]|)`` with
    the profile magnitudes converted to per-unit.
    """
    xi = (
        spec.alpha * np.abs(profiles.load_p[:, 1:])
        + spec.beta * np.abs(profiles.pv_p[:, 1:])
    ) / s_base_kva
    delta = xi @ np.abs(sens.h_p).T
    return RobustMargins(delta_u=delta)
