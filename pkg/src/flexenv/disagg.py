"""Constructive disaggregation and Monte Carlo verification.

Any aggregate GCP trajectory inside an envelope maps to device schedules
by per-step convex interpolation between the envelope endpoints: with
``lam = (gcp_up - traj) / (gcp_up - gcp_dn)`` each device follows
``lam * dn + (1 - lam) * up``.  The envelope construction guarantees the
result satisfies every device and network constraint; the verifier here
re-checks that claim from scratch against the scenario data, so it
doubles as the falsifier for envelopes built without ramp limits.

For pre-ramped envelopes the physical transition from step t-1 to t
starts at the interpolated pre-ramped operating point, and storage
energy is driven by the pre-ramped power, mirroring the construction
used to prove the guarantee.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import netmodel
from .envelope import EnvelopeKind, EnvelopeSolution
from .netmodel import Scenario

__all__ = [
    "EnvelopeViolation",
    "SamplerConfig",
    "DisaggregationResult",
    "Violation",
    "FeasibilityReport",
    "VerifySummary",
    "lambda_coefficients",
    "interpolate_schedules",
    "check_feasibility",
    "sample_trajectories",
    "monte_carlo_verify",
]


class EnvelopeViolation(ValueError):
    """An aggregate trajectory leaves the envelope band."""

    def __init__(self, step: int, value: float, lo: float, hi: float):
        super().__init__(
            f"trajectory leaves the envelope at step {step}: "
            f"{value} not in [{lo}, {hi}]")
        self.step = step


@dataclass(frozen=True)
class SamplerConfig:
    n_vertex: int = 1000
    n_uniform: int = 4000
    seed: int = 0

    def __post_init__(self):
        if self.n_vertex < 0 or self.n_uniform < 0:
            raise ValueError("sample counts must be nonnegative")


@dataclass
class DisaggregationResult:
    lambdas: np.ndarray  # (T,)
    gcp: np.ndarray  # realized aggregate (T,)
    gen_p: np.ndarray  # (G, T)
    gen_q: np.ndarray  # (G, T)
    sto_p: np.ndarray  # (E, T)
    soc: np.ndarray  # realized stored energy (E, T)
    u: np.ndarray  # realized squared voltages (T, N-1)
    gen_p_pre: np.ndarray | None = None  # pre-ramped realized points
    sto_p_pre: np.ndarray | None = None
    u_pre: np.ndarray | None = None


@dataclass(frozen=True)
class Violation:
    family: str
    where: str  # device or bus label
    step: int  # 1-based
    magnitude: float


@dataclass
class FeasibilityReport:
    feasible: bool
    violations: list[Violation] = field(default_factory=list)

    def worst(self) -> Violation | None:
        return max(self.violations, key=lambda v: v.magnitude, default=None)


@dataclass
class VerifySummary:
    n_total: int
    n_feasible: int
    by_family: dict[str, int]
    worst: list[Violation]  # up to 10, largest magnitude first

    @property
    def all_feasible(self) -> bool:
        return self.n_feasible == self.n_total

    def to_json_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "n_feasible": self.n_feasible,
            "by_family": dict(sorted(self.by_family.items())),
            "worst": [
                {"family": v.family, "where": v.where, "step": v.step,
                 "magnitude": v.magnitude}
                for v in self.worst
            ],
        }


def lambda_coefficients(traj, env: EnvelopeSolution, tol: float = 1e-9) -> np.ndarray:
    """Interpolation coefficients of a trajectory inside the envelope.

    ``lam=0`` on the upper envelope, ``lam=1`` on the lower one, and 0 by
    convention wherever the band has zero width.
    """
    traj = np.asarray(traj, dtype=float)
    up, dn = env.gcp_up, env.gcp_dn
    if traj.shape != up.shape:
        raise ValueError(f"trajectory has shape {traj.shape}, envelope {up.shape}")
    outside = (traj < dn - tol) | (traj > up + tol)
    if outside.any():
        t = int(np.argmax(outside))
        raise EnvelopeViolation(t + 1, float(traj[t]), float(dn[t]), float(up[t]))
    width = up - dn
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(width > 0, (up - traj) / np.where(width > 0, width, 1.0), 0.0)
    return np.clip(lam, 0.0, 1.0)


def interpolate_schedules(lambdas, env: EnvelopeSolution,
                          scenario: Scenario) -> DisaggregationResult:
    """Device schedules realized from the interpolation coefficients."""
    lam = np.asarray(lambdas, dtype=float)
    T = lam.shape[0]
    prof = scenario.profiles
    preramp = env.kind is EnvelopeKind.PRERAMP

    def mix(dn, up):
        return lam * dn + (1.0 - lam) * up

    gen_p = np.array([mix(d.p_dn, d.p_up) for d in env.generators]).reshape(-1, T)
    gen_q = np.array([mix(d.q_dn, d.q_up) for d in env.generators]).reshape(-1, T)
    sto_p = np.array([mix(d.p_dn, d.p_up) for d in env.storages]).reshape(-1, T)

    gen_p_pre = sto_p_pre = None
    if preramp:
        gen_p_pre = np.array([
            mix(d.p_dn + d.pre_dn, d.p_up - d.pre_up) for d in env.generators
        ]).reshape(-1, T)
        sto_p_pre = np.array([
            mix(d.p_dn - d.pre_dn, d.p_up + d.pre_up) for d in env.storages
        ]).reshape(-1, T)

    # realized stored energy; for the pre-ramped model the dynamics follow
    # the pre-ramped power
    drive = sto_p_pre if preramp else sto_p
    soc = np.zeros_like(sto_p)
    for ei, sto in enumerate(scenario.storages):
        level = sto.e_init
        for t in range(T):
            soc[ei, t] = level
            level = sto.kappa * level - drive[ei, t] * prof.dt

    net = scenario.network
    sens = netmodel.sensitivity_matrices(net, factor2=env.config.factor2)
    base_p = prof.pv_p[:, 1:] - prof.load_p[:, 1:]
    base_q = -prof.load_q[:, 1:]

    def realized_u(gp, sp):
        inj_p = base_p.copy()
        inj_q = base_q.copy()
        for gi, g in enumerate(scenario.generators):
            inj_p[:, g.bus - 2] += gp[gi]
            inj_q[:, g.bus - 2] += gen_q[gi]
        for ei, s in enumerate(scenario.storages):
            inj_p[:, s.bus - 2] += sp[ei]
        u = netmodel.voltage_profile(sens, inj_p / net.s_base, inj_q / net.s_base)
        return u, inj_p

    u, inj_p = realized_u(gen_p, sto_p)
    u_pre = None
    if preramp:
        u_pre, _ = realized_u(gen_p_pre, sto_p_pre)

    return DisaggregationResult(
        lambdas=lam,
        gcp=inj_p.sum(axis=1),
        gen_p=gen_p,
        gen_q=gen_q,
        sto_p=sto_p,
        soc=soc,
        u=u,
        gen_p_pre=gen_p_pre,
        sto_p_pre=sto_p_pre,
        u_pre=u_pre,
    )


def check_feasibility(result: DisaggregationResult, scenario: Scenario,
                      env_kind: EnvelopeKind, *, initial_ramp: bool = True,
                      target=None, tol: float = 1e-6) -> FeasibilityReport:
    """Re-verify a realized dispatch against the raw scenario constraints.

    Ramp limits are always checked (that is how ramp-blind envelopes get
    caught); for the pre-ramped model the step t-1 -> t transition is
    measured from the pre-ramped operating point.  Infeasibility is
    reported exhaustively, never raised.
    """
    violations: list[Violation] = []
    T = result.gen_p.shape[1] if result.gen_p.size else result.sto_p.shape[1]
    preramp = env_kind is EnvelopeKind.PRERAMP

    def flag(family, where, t, magnitude):
        if magnitude > tol:
            violations.append(Violation(family, where, t + 1, float(magnitude)))

    for gi, g in enumerate(scenario.generators):
        label = f"gen@{g.bus}"
        p = result.gen_p[gi]
        q = result.gen_q[gi]
        for t in range(T):
            flag("gen_p_box", label, t, max(g.p_min - p[t], p[t] - g.p_max))
            flag("gen_q_box", label, t, max(g.q_min - q[t], q[t] - g.q_max))
        if preramp:
            pp = result.gen_p_pre[gi]
            for t in range(T):
                flag("gen_pre_box", label, t, max(g.p_min - pp[t], pp[t] - g.p_max))
        start = result.gen_p_pre[gi] if preramp else p
        if initial_ramp:
            flag("gen_ramp", label, 0,
                 max(p[0] - g.p_init - g.ramp_up, g.p_init - p[0] - g.ramp_down))
        for t in range(1, T):
            flag("gen_ramp", label, t,
                 max(p[t] - start[t - 1] - g.ramp_up,
                     start[t - 1] - p[t] - g.ramp_down))

    for ei, s in enumerate(scenario.storages):
        label = f"ess@{s.bus}"
        p = result.sto_p[ei]
        for t in range(T):
            flag("ess_box", label, t, abs(p[t]) - s.p_max)
        if preramp:
            pp = result.sto_p_pre[ei]
            for t in range(T):
                flag("ess_pre_box", label, t, abs(pp[t]) - s.p_max)
        for t in range(T):
            flag("soc", label, t,
                 max(s.e_min - result.soc[ei, t], result.soc[ei, t] - s.e_max))

    net = scenario.network
    for name, u in (("voltage", result.u), ("voltage_pre", result.u_pre)):
        if u is None:
            continue
        over = np.maximum(net.u_min - u, u - net.u_max)
        for t, i in np.argwhere(over > tol):
            violations.append(Violation(name, f"bus{i + 2}", t + 1, float(over[t, i])))

    if target is not None:
        err = np.abs(result.gcp - np.asarray(target, dtype=float))
        for t in np.flatnonzero(err > tol):
            violations.append(Violation("gcp_identity", "gcp", t + 1, float(err[t])))

    return FeasibilityReport(feasible=not violations, violations=violations)


def sample_trajectories(env: EnvelopeSolution, cfg: SamplerConfig) -> np.ndarray:
    """Vertex (coin-flip per step) plus uniform samples inside the band.

    Deterministic for a fixed seed; returns an (n_vertex + n_uniform, T)
    array.
    """
    rng = np.random.default_rng(cfg.seed)
    up, dn = env.gcp_up, env.gcp_dn
    T = up.shape[0]
    pick_up = rng.integers(0, 2, size=(cfg.n_vertex, T)).astype(bool)
    vertices = np.where(pick_up, up, dn)
    uniform = dn + rng.random((cfg.n_uniform, T)) * (up - dn)
    return np.vstack([vertices, uniform])


def monte_carlo_verify(env: EnvelopeSolution, scenario: Scenario,
                       cfg: SamplerConfig, tol: float = 1e-6) -> VerifySummary:
    """Disaggregate every sample and tally feasibility.

    For ramp-aware envelopes the expected outcome is that every sample
    passes; each failure is counted once per violated constraint family.
    """
    samples = sample_trajectories(env, cfg)
    counts: Counter[str] = Counter()
    worst: list[Violation] = []
    n_feasible = 0
    initial_ramp = not env.config.no_initial_ramp
    for traj in samples:
        lam = lambda_coefficients(traj, env)
        result = interpolate_schedules(lam, env, scenario)
        report = check_feasibility(result, scenario, env.kind,
                                   initial_ramp=initial_ramp, target=traj, tol=tol)
        if report.feasible:
            n_feasible += 1
            continue
        counts.update({v.family for v in report.violations})
        worst.extend(report.violations)
        worst.sort(key=lambda v: -v.magnitude)
        del worst[10:]
    return VerifySummary(
        n_total=samples.shape[0],
        n_feasible=n_feasible,
        by_family=dict(counts),
        worst=worst,
    )
