"""Linear-program model builder and a bundled revised-simplex solver.

The model is solver-agnostic: rows are stored as ``lo <= expr <= hi``
(one-sided rows leave an end infinite, equalities pin both), variables
carry their own bounds, and ``solve`` is a pure function of the model so
alternative solvers can be swapped behind the same contract
(:func:`solve_with_scipy` adapts ``scipy.optimize.linprog``/HiGHS).

The bundled solver is a primal revised simplex for bounded variables:
every row gets a logical variable (``A x - r = 0`` with ``r`` bounded by
the row), the basis is kept as a sparse LU factorization with
product-form eta updates, and scaling is by powers of two so it never
perturbs representable data.  Pricing is Dantzig's rule with an
automatic switch to Bland's rule while the objective stalls, which keeps
the method exact on degenerate models without giving up speed.
Everything is deterministic: a bit-identical model yields a bit-identical
solution.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

__all__ = [
    "LpStatus",
    "VarRef",
    "LinExpr",
    "LpModel",
    "LpSolution",
    "SolverOptions",
    "LpError",
    "LpNumericalError",
    "solve",
    "solve_with_scipy",
    "lp_text",
]

INF = math.inf


class LpError(ValueError):
    pass


class LpNumericalError(RuntimeError):
    """The returned basis failed the post-solve feasibility audit."""


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class VarRef:
    index: int
    lower: float
    upper: float


class LinExpr:
    """Sparse linear expression: coefficient map plus a constant offset.

    Duplicate variables merge on insertion, so ``x + x`` normalizes to
    ``2 x``.
    """

    __slots__ = ("terms", "constant")

    def __init__(self, terms=None, constant: float = 0.0):
        self.terms: dict[int, float] = {}
        self.constant = float(constant)
        if terms:
            for ref, coef in terms:
                self.add(ref, coef)

    def add(self, ref: VarRef | int, coef: float) -> "LinExpr":
        idx = ref.index if isinstance(ref, VarRef) else int(ref)
        self.terms[idx] = self.terms.get(idx, 0.0) + float(coef)
        return self

    def add_constant(self, value: float) -> "LinExpr":
        self.constant += float(value)
        return self

    def copy(self) -> "LinExpr":
        out = LinExpr(constant=self.constant)
        out.terms = dict(self.terms)
        return out


@dataclass
class SolverOptions:
    feas_tol: float = 1e-7
    dual_tol: float = 1e-8
    pivot_tol: float = 1e-9
    max_iter: int = 1_000_000
    refactor_every: int = 120
    stall_switch: int = 60  # degenerate steps before Bland's rule kicks in


class LpModel:
    """Incrementally built LP: bounded variables, ranged rows, one objective."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self.var_lo: list[float] = []
        self.var_hi: list[float] = []
        self.rows: list[tuple[dict[int, float], float, float]] = []
        self.objective: LinExpr = LinExpr()
        self.maximize = True

    @property
    def n_vars(self) -> int:
        return len(self.var_lo)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_variable(self, lower: float = -INF, upper: float = INF) -> VarRef:
        if not lower <= upper:
            raise LpError(f"inverted bounds [{lower}, {upper}]")
        if lower == INF or upper == -INF:
            raise LpError(f"bounds [{lower}, {upper}] admit no finite value")
        self.var_lo.append(float(lower))
        self.var_hi.append(float(upper))
        return VarRef(index=len(self.var_lo) - 1, lower=float(lower), upper=float(upper))

    def _check_expr(self, expr: LinExpr):
        for idx in expr.terms:
            if not 0 <= idx < self.n_vars:
                raise LpError(f"expression references unknown variable {idx}")

    def add_constraint(self, expr: LinExpr, sense: str, rhs: float) -> int:
        """Record ``expr (sense) rhs`` with sense one of '<=', '>=', '=='."""
        if sense in ("<=", "<"):
            return self.add_range(expr, -INF, rhs)
        if sense in (">=", ">"):
            return self.add_range(expr, rhs, INF)
        if sense in ("==", "="):
            return self.add_range(expr, rhs, rhs)
        raise LpError(f"unknown sense {sense!r}")

    def add_range(self, expr: LinExpr, lo: float, hi: float) -> int:
        self._check_expr(expr)
        if not lo <= hi:
            raise LpError(f"inverted row range [{lo}, {hi}]")
        # fold the expression constant into the row bounds
        c = expr.constant
        terms = {i: v for i, v in expr.terms.items() if v != 0.0}
        self.rows.append((terms, lo - c, hi - c))
        return len(self.rows) - 1

    def set_objective(self, expr: LinExpr, maximize: bool = True):
        self._check_expr(expr)
        self.objective = expr.copy()
        self.maximize = maximize

    def matrix(self) -> sp.csc_matrix:
        """Row-major constraint matrix as CSC (m x n)."""
        data, ri, ci = [], [], []
        for i, (terms, _, _) in enumerate(self.rows):
            for j, v in terms.items():
                ri.append(i)
                ci.append(j)
                data.append(v)
        return sp.coo_matrix(
            (data, (ri, ci)), shape=(self.n_rows, self.n_vars)
        ).tocsc()

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([r[1] for r in self.rows], dtype=float)
        hi = np.array([r[2] for r in self.rows], dtype=float)
        return lo, hi

    def objective_array(self) -> tuple[np.ndarray, float]:
        c = np.zeros(self.n_vars)
        for j, v in self.objective.terms.items():
            c[j] = v
        return c, self.objective.constant


@dataclass
class LpSolution:
    status: LpStatus
    objective_value: float
    primal: np.ndarray | None
    iterations: int = 0

    def value(self, ref: VarRef) -> float:
        if self.primal is None:
            raise LpError("no primal available")
        return float(self.primal[ref.index])

    def values(self, refs) -> np.ndarray:
        if self.primal is None:
            raise LpError("no primal available")
        return self.primal[np.asarray([r.index for r in refs], dtype=int)]


# ---------------------------------------------------------------------------
# bundled solver
# ---------------------------------------------------------------------------

_BASIC, _AT_LO, _AT_UP, _FREE = 0, 1, 2, 3


def _pow2_scale(values: np.ndarray) -> np.ndarray:
    """Reciprocal max-abs scale factors rounded to powers of two."""
    out = np.ones_like(values)
    pos = values > 0
    out[pos] = np.exp2(-np.round(np.log2(values[pos])))
    return out


class _Simplex:
    def __init__(self, model: LpModel, options: SolverOptions):
        self.opt = options
        self.m = model.n_rows
        self.n = model.n_vars
        A = model.matrix()

        # power-of-two equilibration: rows then columns
        row_max = np.zeros(self.m)
        col_max = np.zeros(self.n)
        if A.nnz:
            absA = abs(A)
            row_max = absA.max(axis=1).toarray().ravel()
            self.row_scale = _pow2_scale(row_max)
            scaled = sp.diags(self.row_scale) @ A
            col_max = abs(scaled).max(axis=0).toarray().ravel()
            self.col_scale = _pow2_scale(col_max)
            self.A = (scaled @ sp.diags(self.col_scale)).tocsc()
        else:
            self.row_scale = np.ones(self.m)
            self.col_scale = np.ones(self.n)
            self.A = A

        row_lo, row_hi = model.row_bounds()
        c, self.c0 = model.objective_array()
        self.sign = -1.0 if model.maximize else 1.0  # internal: minimize
        # bounds in scaled space: structurals then logicals
        self.lb = np.concatenate([np.array(model.var_lo) / self.col_scale,
                                  row_lo * self.row_scale])
        self.ub = np.concatenate([np.array(model.var_hi) / self.col_scale,
                                  row_hi * self.row_scale])
        self.c = np.concatenate([self.sign * c * self.col_scale, np.zeros(self.m)])
        self.nt = self.n + self.m

        self.x = np.zeros(self.nt)
        self.status = np.full(self.nt, _AT_LO, dtype=np.int8)
        for j in range(self.nt):
            lo, hi = self.lb[j], self.ub[j]
            if lo == -INF and hi == INF:
                self.status[j] = _FREE
                self.x[j] = 0.0
            elif lo == -INF:
                self.status[j] = _AT_UP
                self.x[j] = hi
            elif hi == INF or abs(lo) <= abs(hi):
                self.status[j] = _AT_LO
                self.x[j] = lo
            else:
                self.status[j] = _AT_UP
                self.x[j] = hi

        # start from the all-logical basis
        self.basis = np.arange(self.n, self.n + self.m)
        self.status[self.basis] = _BASIC
        self.lu = None
        self.etas: list[tuple[int, np.ndarray]] = []
        self.iterations = 0
        self.bland = False
        self.stall = 0
        self.AT = self.A.T.tocsr()
        self.gamma = np.ones(self.nt)  # devex reference weights
        self._refactor()

    # -- linear algebra ----------------------------------------------------

    def _refactor(self):
        m = self.m
        data, ri, ci = [], [], []
        indptr, indices, vals = self.A.indptr, self.A.indices, self.A.data
        for k, col in enumerate(self.basis):
            if col < self.n:
                a, b = indptr[col], indptr[col + 1]
                ri.extend(indices[a:b])
                ci.extend([k] * (b - a))
                data.extend(vals[a:b])
            else:
                ri.append(col - self.n)
                ci.append(k)
                data.append(-1.0)
        B = sp.coo_matrix((data, (ri, ci)), shape=(m, m)).tocsc()
        try:
            self.lu = splu(B, permc_spec="COLAMD")
        except RuntimeError as exc:
            raise LpNumericalError(f"singular basis during refactorization: {exc}")
        self.etas = []
        self.gamma[:] = 1.0  # restart the devex reference framework
        self._recompute_basics()

    def _recompute_basics(self):
        xs = self.x.copy()
        xs[self.basis] = 0.0
        rhs = self.A @ xs[: self.n] - xs[self.n:]
        self.x[self.basis] = self.lu.solve(-rhs) if self.m else np.zeros(0)

    def _ftran(self, v: np.ndarray) -> np.ndarray:
        v = self.lu.solve(v)
        for r, w in self.etas:
            t = v[r] / w[r]
            if t != 0.0:
                v -= t * w
            v[r] = t
        return v

    def _btran(self, v: np.ndarray) -> np.ndarray:
        v = v.copy()
        for r, w in reversed(self.etas):
            v[r] = (v[r] - (w @ v - w[r] * v[r])) / w[r]
        return self.lu.solve(v, trans="T")

    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.m)
        if j < self.n:
            a, b = self.A.indptr[j], self.A.indptr[j + 1]
            col[self.A.indices[a:b]] = self.A.data[a:b]
        else:
            col[j - self.n] = -1.0
        return col

    def _reduced_costs(self, cvec: np.ndarray) -> np.ndarray:
        y = self._btran(cvec[self.basis])
        d = cvec.copy()
        d[: self.n] -= self.AT @ y
        d[self.n:] += y
        return d

    def _pivot_row(self, rpos: int) -> np.ndarray:
        """Row rpos of B^-1 @ Abar (needed for devex weight updates)."""
        e = np.zeros(self.m)
        e[rpos] = 1.0
        beta = self._btran(e)
        alpha = np.empty(self.nt)
        alpha[: self.n] = self.AT @ beta
        alpha[self.n:] = -beta
        return alpha

    # -- simplex iterations -------------------------------------------------

    def _violations(self) -> np.ndarray:
        """Signed bound violations of the basic variables."""
        xb = self.x[self.basis]
        lo, hi = self.lb[self.basis], self.ub[self.basis]
        tol = self.opt.feas_tol
        sigma = np.zeros(self.m)
        sigma[xb < lo - tol] = -1.0
        sigma[xb > hi + tol] = 1.0
        return sigma

    def _infeasibility(self) -> float:
        xb = self.x[self.basis]
        lo, hi = self.lb[self.basis], self.ub[self.basis]
        return float(np.sum(np.maximum(lo - xb, 0.0)[np.isfinite(lo)])
                     + np.sum(np.maximum(xb - hi, 0.0)[np.isfinite(hi)]))

    def _entering(self, d: np.ndarray) -> int:
        tol = self.opt.dual_tol
        movable = self.ub - self.lb > 0
        cand = (
            ((self.status == _AT_LO) & (d < -tol) & movable)
            | ((self.status == _AT_UP) & (d > tol) & movable)
            | ((self.status == _FREE) & (np.abs(d) > tol))
        )
        if not cand.any():
            return -1
        idx = np.flatnonzero(cand)
        if self.bland:
            return int(idx[0])
        # devex: largest d^2 / gamma wins
        score = d[idx] ** 2 / self.gamma[idx]
        return int(idx[np.argmax(score)])

    def _update_devex(self, q: int, rpos: int, w: np.ndarray):
        alpha = self._pivot_row(rpos)
        piv = alpha[q]
        if piv == 0.0:
            return
        gq = self.gamma[q]
        nonbasic = self.status != _BASIC
        ratio = (alpha[nonbasic] / piv) ** 2 * gq
        self.gamma[nonbasic] = np.maximum(self.gamma[nonbasic], ratio)
        self.gamma[self.basis[rpos]] = max(gq / piv**2, 1.0)

    def _ratio_test(self, q: int, dirn: float, w: np.ndarray):
        """Classic bounded ratio test: first blocking bound wins.

        Returns (theta, rpos); rpos -1 means a bound flip of q, -2 an
        unblocked (unbounded) direction.
        """
        opt = self.opt
        s = -dirn * w
        xb = self.x[self.basis]
        lo, hi = self.lb[self.basis], self.ub[self.basis]
        target = np.full(self.m, INF)
        act = np.abs(w) > opt.pivot_tol
        tol = opt.feas_tol
        inc = act & (s > 0)
        dec = act & (s < 0)
        below = xb < lo - tol
        above = xb > hi + tol
        np.copyto(target, lo, where=inc & below)
        np.copyto(target, hi, where=inc & ~below & ~above)
        np.copyto(target, hi, where=dec & above)
        np.copyto(target, lo, where=dec & ~below & ~above)
        with np.errstate(invalid="ignore"):
            theta = np.where(np.isfinite(target), (target - xb) / np.where(s == 0, 1.0, s), INF)
        theta = np.where(act, np.maximum(theta, 0.0), INF)

        theta_basic = float(theta.min()) if self.m else INF
        theta_enter = self.ub[q] - self.lb[q]
        if theta_enter <= theta_basic:
            if not np.isfinite(theta_enter):
                return INF, -2  # nothing blocks: unbounded direction
            return theta_enter, -1
        if not np.isfinite(theta_basic):
            return INF, -2
        ties = np.flatnonzero(theta <= theta_basic + 1e-9 * (1.0 + abs(theta_basic)))
        if self.bland:
            rpos = int(ties[np.argmin(self.basis[ties])])
        else:
            rpos = int(ties[np.argmax(np.abs(w[ties]))])
        return float(theta[rpos]), rpos

    def _ratio_test_phase1(self, q: int, dirn: float, w: np.ndarray, slope: float):
        """Piecewise-linear phase-1 ratio test (long step).

        The infeasibility sum is piecewise linear in the step length;
        its slope increases by |s_i| whenever a basic crosses a bound.
        Walk the breakpoints until the slope turns nonnegative and leave
        the basis at the variable that flattened it.  Crossing several
        cured violations in one pivot is what keeps phase 1 short.
        """
        opt = self.opt
        s = -dirn * w
        xb = self.x[self.basis]
        lo, hi = self.lb[self.basis], self.ub[self.basis]
        tol = opt.feas_tol
        act = np.abs(w) > opt.pivot_tol

        bp_theta: list[np.ndarray] = []
        bp_pos: list[np.ndarray] = []
        bp_weight: list[np.ndarray] = []
        bp_bound: list[np.ndarray] = []  # bound value the basic stops at

        def _add(mask, bound):
            idx = np.flatnonzero(mask)
            if idx.size == 0:
                return
            th = (bound[idx] - xb[idx]) / s[idx]
            bp_theta.append(np.maximum(th, 0.0))
            bp_pos.append(idx)
            bp_weight.append(np.abs(s[idx]))
            bp_bound.append(bound[idx])

        inc = act & (s > 0)
        dec = act & (s < 0)
        below = xb < lo - tol
        above = xb > hi + tol
        # ahead of each travelling basic: possibly two breakpoints (cure a
        # violation at the near bound, re-violate at the far one)
        _add(inc & below, lo)
        _add(inc & ~above & np.isfinite(hi), hi)
        _add(dec & above, hi)
        _add(dec & ~below & np.isfinite(lo), lo)

        theta_enter = self.ub[q] - self.lb[q]
        if not bp_theta:
            if not np.isfinite(theta_enter):
                return INF, -2, 0.0
            return theta_enter, -1, 0.0

        theta_all = np.concatenate(bp_theta)
        pos_all = np.concatenate(bp_pos)
        weight_all = np.concatenate(bp_weight)
        bound_all = np.concatenate(bp_bound)
        order = np.argsort(theta_all, kind="stable")

        run = slope  # negative on entry
        for k in order:
            th = theta_all[k]
            if th > theta_enter:
                break
            run += weight_all[k]
            if run >= -opt.pivot_tol:
                return float(th), int(pos_all[k]), float(bound_all[k])
        if not np.isfinite(theta_enter):
            return INF, -2, 0.0
        return float(theta_enter), -1, 0.0

    def _step(self, q: int, dirn: float, w: np.ndarray, theta: float, rpos: int,
              leave_at: float | None = None):
        if theta != 0.0:
            self.x[self.basis] -= dirn * theta * w
            self.x[q] += dirn * theta
        if rpos < 0:
            # bound flip, basis unchanged
            self.status[q] = _AT_UP if dirn > 0 else _AT_LO
            self.x[q] = self.ub[q] if dirn > 0 else self.lb[q]
            return
        leaving = self.basis[rpos]
        if leave_at is None:
            # snap the leaving variable onto the nearer bound (it stopped there)
            dl = abs(self.x[leaving] - self.lb[leaving])
            du = abs(self.x[leaving] - self.ub[leaving])
            leave_at = self.lb[leaving] if dl <= du else self.ub[leaving]
        self.x[leaving] = leave_at
        self.status[leaving] = _AT_LO if leave_at == self.lb[leaving] else _AT_UP
        self.basis[rpos] = q
        self.status[q] = _BASIC
        self.etas.append((rpos, w))
        if len(self.etas) >= self.opt.refactor_every:
            self._refactor()

    def _iterate(self, cvec: np.ndarray, phase1: bool) -> LpStatus | None:
        """One pivot under cost vector ``cvec``; None means keep going."""
        d = self._reduced_costs(cvec)
        q = self._entering(d)
        if q < 0:
            return LpStatus.OPTIMAL
        dirn = 1.0 if (self.status[q] == _AT_LO or (self.status[q] == _FREE and d[q] < 0)) else -1.0
        w = self._ftran(self._column(q))
        leave_at = None
        if phase1 and not self.bland:
            theta, rpos, leave_at = self._ratio_test_phase1(q, dirn, w, dirn * d[q])
            if rpos == -1:
                leave_at = None
        else:
            theta, rpos = self._ratio_test(q, dirn, w)
        if rpos == -2:
            return LpStatus.UNBOUNDED
        if rpos >= 0 and not self.bland:
            self._update_devex(q, rpos, w)
        self._step(q, dirn, w, theta, rpos, leave_at)
        self.iterations += 1
        if theta <= 1e-12:
            self.stall += 1
            if self.stall >= self.opt.stall_switch:
                self.bland = True
        else:
            self.stall = 0
            self.bland = False
        return None

    def run(self) -> LpStatus:
        opt = self.opt
        # phase 1: drive bound violations of the basics to zero
        fresh_factor = True
        while self.iterations < opt.max_iter:
            sigma = self._violations()
            if not sigma.any():
                break
            cvec = np.zeros(self.nt)
            cvec[self.basis] = sigma
            outcome = self._iterate(cvec, phase1=True)
            if outcome is LpStatus.UNBOUNDED:
                # cannot happen in exact arithmetic: the infeasibility sum is
                # bounded below, so some basic must block.  Treat as noise.
                if fresh_factor:
                    raise LpNumericalError("unblocked descent direction in phase 1")
                self._refactor()
                fresh_factor = True
                continue
            fresh_factor = False
            if outcome is LpStatus.OPTIMAL:
                if self._infeasibility() > 10 * opt.feas_tol:
                    return LpStatus.INFEASIBLE
                break
        else:
            return LpStatus.ITERATION_LIMIT

        # phase 2: optimize the true objective
        self.stall = 0
        self.bland = False
        cvec = self.c
        while self.iterations < opt.max_iter:
            if self._violations().any():
                # numerical drift back to infeasibility: clean and redo phase 1
                self._refactor()
                if self._violations().any():
                    sigma = self._violations()
                    cv = np.zeros(self.nt)
                    cv[self.basis] = sigma
                    outcome = self._iterate(cv, phase1=True)
                    if outcome is LpStatus.OPTIMAL and self._infeasibility() > 10 * opt.feas_tol:
                        return LpStatus.INFEASIBLE
                    continue
            outcome = self._iterate(cvec, phase1=False)
            if outcome is LpStatus.UNBOUNDED and self.etas:
                self._refactor()  # confirm on a fresh factorization
                continue
            if outcome is not None:
                return outcome
        return LpStatus.ITERATION_LIMIT

    def primal(self) -> np.ndarray:
        self._refactor()  # clean basic values before reporting
        return self.x[: self.n] * self.col_scale


def solve(model: LpModel, options: SolverOptions | None = None) -> LpSolution:
    """Solve with the bundled simplex; deterministic for a fixed model."""
    options = options or SolverOptions()
    if model.n_vars == 0:
        raise LpError("empty model")
    if model.n_rows == 0:
        # pure bound problem: each variable sits at its best bound
        c, c0 = model.objective_array()
        lo = np.array(model.var_lo)
        hi = np.array(model.var_hi)
        want_hi = (c > 0) == model.maximize
        x = np.where(c == 0, np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0)),
                     np.where(want_hi, hi, lo))
        if not np.all(np.isfinite(x[c != 0])):
            return LpSolution(LpStatus.UNBOUNDED, INF if model.maximize else -INF, None)
        x = np.where(np.isfinite(x), x, 0.0)
        return LpSolution(LpStatus.OPTIMAL, float(c @ x + c0), x)

    engine = _Simplex(model, options)
    status = engine.run()
    if status is not LpStatus.OPTIMAL:
        obj = {
            LpStatus.UNBOUNDED: INF if model.maximize else -INF,
            LpStatus.INFEASIBLE: math.nan,
            LpStatus.ITERATION_LIMIT: math.nan,
        }[status]
        return LpSolution(status, obj, None, engine.iterations)

    x = engine.primal()
    _audit(model, x, options.feas_tol)
    c, c0 = model.objective_array()
    return LpSolution(LpStatus.OPTIMAL, float(c @ x + c0), x, engine.iterations)


def _audit(model: LpModel, x: np.ndarray, tol: float):
    """Feasibility audit of an Optimal result (variable and row ranges)."""
    lo = np.array(model.var_lo)
    hi = np.array(model.var_hi)
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        j = int(np.argmax(np.maximum(lo - x, x - hi)))
        raise LpNumericalError(f"variable {j} out of bounds: {x[j]} not in [{lo[j]}, {hi[j]}]")
    A = model.matrix()
    act = A @ x
    rlo, rhi = model.row_bounds()
    viol = np.maximum(rlo - act, act - rhi)
    if viol.size and viol.max() > tol:
        i = int(np.argmax(viol))
        raise LpNumericalError(
            f"row {i} violated by {viol.max():.3e}: {act[i]} not in [{rlo[i]}, {rhi[i]}]"
        )


# ---------------------------------------------------------------------------
# external solver adapter and LP-format dump
# ---------------------------------------------------------------------------


def solve_with_scipy(model: LpModel) -> LpSolution:
    """External cross-check solver: scipy.optimize.linprog (HiGHS)."""
    from scipy.optimize import linprog

    c, c0 = model.objective_array()
    sign = -1.0 if model.maximize else 1.0
    a_ub_rows, b_ub, a_eq_rows, b_eq = [], [], [], []
    n = model.n_vars
    for terms, lo, hi in model.rows:
        row = np.zeros(n)
        for j, v in terms.items():
            row[j] = v
        if lo == hi:
            a_eq_rows.append(row)
            b_eq.append(lo)
            continue
        if np.isfinite(hi):
            a_ub_rows.append(row)
            b_ub.append(hi)
        if np.isfinite(lo):
            a_ub_rows.append(-row)
            b_ub.append(-lo)
    bounds = [
        (lo if np.isfinite(lo) else None, hi if np.isfinite(hi) else None)
        for lo, hi in zip(model.var_lo, model.var_hi)
    ]
    res = linprog(
        sign * c,
        A_ub=np.array(a_ub_rows) if a_ub_rows else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(a_eq_rows) if a_eq_rows else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
    )
    if res.status == 0:
        return LpSolution(LpStatus.OPTIMAL, float(c @ res.x + c0), np.asarray(res.x))
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, math.nan, None)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, INF if model.maximize else -INF, None)
    return LpSolution(LpStatus.ITERATION_LIMIT, math.nan, None)


def lp_text(model: LpModel) -> str:
    """Model as LP-format text for eyeballing or external tools."""

    def _term(j, v):
        return f"{'+' if v >= 0 else '-'} {abs(v):.12g} x{j} "

    out = [f"\\ {model.name}", "Maximize" if model.maximize else "Minimize"]
    obj = " obj: " + "".join(_term(j, v) for j, v in sorted(model.objective.terms.items()))
    out.append(obj.rstrip() or " obj: 0 x0")
    out.append("Subject To")
    for i, (terms, lo, hi) in enumerate(model.rows):
        body = "".join(_term(j, v) for j, v in sorted(terms.items())).rstrip()
        if lo == hi:
            out.append(f" c{i}: {body} = {lo:.12g}")
        else:
            if np.isfinite(hi):
                out.append(f" c{i}u: {body} <= {hi:.12g}")
            if np.isfinite(lo):
                out.append(f" c{i}l: {body} >= {lo:.12g}")
    out.append("Bounds")
    for j, (lo, hi) in enumerate(zip(model.var_lo, model.var_hi)):
        l = "-inf" if lo == -INF else f"{lo:.12g}"
        h = "+inf" if hi == INF else f"{hi:.12g}"
        out.append(f" {l} <= x{j} <= {h}")
    out.append("End")
    return "\n".join(out) + "\n"
