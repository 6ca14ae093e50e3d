"""Least-distance quadratic programs solved by operator splitting (ADMM).

The problems have the form::

    minimize    sum over anchored i of (x_i - a_i)^2
    subject to  lo <= A x <= hi

Unanchored (auxiliary) variables carry no objective weight, so the Hessian is
diagonal and only positive semidefinite.  The iteration follows the usual
splitting ``z = A x`` with an adaptive penalty; once residuals are small a
polish step solves the equality-constrained problem on the detected active
set and refines it until the multiplier signs and primal feasibility agree.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import lsq_linear

from .cyclebound import ConstraintSystem

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"


@dataclass
class SolverSettings:
    eps_abs: float = 1e-8
    eps_rel: float = 1e-8
    max_iter: int = 200_000
    rho: float = 0.1
    rho_min: float = 1e-6
    rho_max: float = 1e6
    eq_rho_scale: float = 1e3
    sigma: float = 1e-6
    alpha: float = 1.6
    check_interval: int = 25
    adapt_interval: int = 25
    eps_prim_inf: float = 1e-7
    polish: bool = True
    polish_rounds: int = 30
    polish_reg: float = 1e-10
    polish_prox: float = 1e-7
    polish_tol: float = 1e-9


DEFAULT_SETTINGS = SolverSettings()


@dataclass
class QpProblem:
    system: ConstraintSystem
    anchors: Sequence[tuple[int, float]]

    def __post_init__(self):
        self.anchors = [(int(v), float(a)) for v, a in self.anchors]
        seen = set()
        for v, _ in self.anchors:
            if not 0 <= v < self.system.n_vars:
                raise IndexError(f"anchor references undeclared variable {v}")
            if v in seen:
                raise ValueError(f"variable {v} anchored twice")
            seen.add(v)

    def objective_terms(self):
        n = self.system.n_vars
        p = np.zeros(n)
        q = np.zeros(n)
        for v, a in self.anchors:
            p[v] = 2.0
            q[v] = -2.0 * a
        return p, q

    def objective(self, x) -> float:
        return float(sum((x[v] - a) ** 2 for v, a in self.anchors))


@dataclass
class QpSolution:
    status: str
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    objective: float = float("nan")
    primal_residual: float = float("inf")
    dual_residual: float = float("inf")
    iterations: int = 0
    polished: bool = False
    weights: np.ndarray | None = None
    worst_slack: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class KKTResiduals(NamedTuple):
    stationarity: float
    complementarity: float
    primal: float


def _inf_norm(v) -> float:
    return float(np.max(np.abs(v))) if len(v) else 0.0


class _Admm:
    def __init__(self, P_diag, q, A, lo, hi, settings: SolverSettings):
        self.p = P_diag
        self.q = q
        self.A = A.tocsc()
        self.At = self.A.T.tocsc()
        self.lo = lo
        self.hi = hi
        self.s = settings
        self.n, self.m = len(q), A.shape[0]
        self.is_eq = np.isfinite(lo) & np.isfinite(hi) & (np.abs(hi - lo) < 1e-12)
        self.rho = settings.rho
        self._factor()

    def _rho_vec(self):
        r = np.full(self.m, self.rho)
        r[self.is_eq] *= self.s.eq_rho_scale
        return r

    def _factor(self):
        self.rho_vec = self._rho_vec()
        K = (sp.diags(self.p + self.s.sigma) + self.At @ sp.diags(self.rho_vec) @ self.A).tocsc()
        self.solve_k = spla.factorized(K)

    def residuals(self, x, z, y):
        Ax = self.A @ x
        Px = self.p * x
        Aty = self.At @ y
        r_p = _inf_norm(Ax - z)
        r_d = _inf_norm(Px + self.q + Aty)
        scale_p = max(_inf_norm(Ax), _inf_norm(z))
        scale_d = max(_inf_norm(Px), _inf_norm(Aty), _inf_norm(self.q))
        return r_p, r_d, scale_p, scale_d

    def primal_infeasible(self, dy) -> bool:
        norm = _inf_norm(dy)
        if norm < 1e-14:
            return False
        eps = self.s.eps_prim_inf
        if _inf_norm(self.At @ dy) > eps * norm:
            return False
        pos = dy > eps * norm
        neg = dy < -eps * norm
        if np.any(pos & ~np.isfinite(self.hi)) or np.any(neg & ~np.isfinite(self.lo)):
            return False
        support = np.sum(self.hi[pos] * dy[pos]) + np.sum(self.lo[neg] * dy[neg])
        return support < -eps * norm


def _kkt_solve(p, q, A_act, b_act, x_ref, eps, reg, steps=8):
    """Equality-constrained least-distance solve by proximal iterations.

    Each step minimizes the objective plus ``eps * |x - x_k|^2`` on the
    affine set, starting from ``x_ref``.  Variables without objective weight
    therefore move only as far as the active rows require.
    """
    n = len(q)
    k = A_act.shape[0]
    if k:
        K = sp.bmat([[sp.diags(p + eps), A_act.T],
                     [A_act, sp.diags(np.full(k, -reg))]], format="csc")
    else:
        K = sp.diags(p + eps).tocsc()
    solve = spla.factorized(K)
    x = x_ref.copy()
    y = np.zeros(k)
    for _ in range(steps):
        sol = solve(np.concatenate([-q + eps * x, b_act - reg * y]))
        x_new, y = sol[:n], sol[n:]
        done = _inf_norm(x_new - x) < 1e-15 * max(1.0, _inf_norm(x))
        x = x_new
        if done:
            break
    return x, y


def _polish(admm: _Admm, x, z, y, settings: SolverSettings):
    """Active-set refinement from an ADMM iterate; returns (x, y) or None."""
    A, lo, hi, p, q = admm.A.tocsr(), admm.lo, admm.hi, admm.p, admm.q
    lower = (z - lo < -y) | admm.is_eq
    upper = (hi - z < y) & ~admm.is_eq
    scale = 1.0 + max(_inf_norm(q), _inf_norm(np.where(np.isfinite(lo), lo, 0)),
                      _inf_norm(np.where(np.isfinite(hi), hi, 0)))
    tol = settings.polish_tol * scale
    for _ in range(settings.polish_rounds):
        act_lo = np.flatnonzero(lower)
        act_hi = np.flatnonzero(upper)
        rows = np.concatenate([act_lo, act_hi])
        b = np.concatenate([lo[act_lo], hi[act_hi]])
        xs, ys = _kkt_solve(p, q, A[rows], b, x, settings.polish_prox, settings.polish_reg)
        yfull = np.zeros(admm.m)
        yfull[rows] = ys
        Ax = A @ xs
        viol_lo = lo - Ax > tol
        viol_hi = Ax - hi > tol
        bad_lo = lower & ~admm.is_eq & (yfull > tol)
        bad_hi = upper & (yfull < -tol)
        if not (viol_lo.any() or viol_hi.any() or bad_lo.any() or bad_hi.any()):
            r_d = _inf_norm(p * xs + q + admm.At @ yfull)
            if r_d <= tol:
                return xs, yfull
            return None
        # drop rows with wrong-sign multipliers, add violated rows
        lower = (lower & ~bad_lo) | viol_lo
        upper = (upper & ~bad_hi) | viol_hi
    return None


def solve(problem: QpProblem, settings: SolverSettings | None = None) -> QpSolution:
    s = settings or DEFAULT_SETTINGS
    system = problem.system
    p, q = problem.objective_terms()
    n = system.n_vars
    A, lo, hi = system.matrix()
    m = A.shape[0]

    if m == 0:
        x = np.zeros(n)
        for v, a in problem.anchors:
            x[v] = a
        return _finish(problem, x, np.zeros(0), OPTIMAL, 0.0, 0.0, 0, False)

    admm = _Admm(p, q, A, lo, hi, s)
    x = np.zeros(n)
    for v, a in problem.anchors:
        x[v] = a
    z = np.clip(A @ x, lo, hi)
    y = np.zeros(m)
    next_polish = s.check_interval
    status = ITERATION_LIMIT
    it = 0
    r_p = r_d = np.inf
    for it in range(1, s.max_iter + 1):
        y_prev = y
        rhs = s.sigma * x - q + admm.At @ (admm.rho_vec * z - y)
        xt = admm.solve_k(rhs)
        zt = A @ xt
        x = s.alpha * xt + (1 - s.alpha) * x
        zh = s.alpha * zt + (1 - s.alpha) * z
        z = np.clip(zh + y / admm.rho_vec, lo, hi)
        y = y + admm.rho_vec * (zh - z)

        if it % s.check_interval and it != s.max_iter:
            continue
        r_p, r_d, sc_p, sc_d = admm.residuals(x, z, y)
        eps_p = s.eps_abs + s.eps_rel * sc_p
        eps_d = s.eps_abs + s.eps_rel * sc_d
        converged = r_p <= eps_p and r_d <= eps_d
        if s.polish and (converged or it >= next_polish):
            next_polish = 2 * it
            polished = _polish(admm, x, z, y, s)
            if polished is not None:
                xs, ys = polished
                pr = system.max_violation(xs)
                dr = _inf_norm(p * xs + q + A.T @ ys)
                return _finish(problem, xs, ys, OPTIMAL, pr, dr, it, True)
        if converged:
            status = OPTIMAL
            break
        if admm.primal_infeasible(y - y_prev):
            log.debug("primal infeasibility certificate after %d iterations", it)
            return QpSolution(INFEASIBLE, iterations=it)
        if it % s.adapt_interval == 0:
            ratio = np.sqrt((r_p / (sc_p + 1e-30)) / (r_d / (sc_d + 1e-30) + 1e-30))
            new_rho = float(np.clip(admm.rho * ratio, s.rho_min, s.rho_max))
            if new_rho > 5 * admm.rho or new_rho < 0.2 * admm.rho:
                admm.rho = new_rho
                admm._factor()
    if status != OPTIMAL:
        return QpSolution(ITERATION_LIMIT, x=x, y=y, iterations=it,
                          primal_residual=r_p, dual_residual=r_d,
                          objective=problem.objective(x))
    return _finish(problem, x, y, OPTIMAL, system.max_violation(x), r_d, it, False)


def _finish(problem, x, y, status, r_p, r_d, it, polished) -> QpSolution:
    weights = np.array([x[v] for v, _ in problem.anchors])
    return QpSolution(
        status=status, x=x, y=y, objective=problem.objective(x),
        primal_residual=float(r_p), dual_residual=float(r_d), iterations=it,
        polished=polished, weights=weights,
        worst_slack=problem.system.worst_slack(x))


def check_kkt(problem: QpProblem, solution: QpSolution, active_tol: float = 1e-7) -> KKTResiduals:
    """Audit a point against the optimality conditions, ignoring solver multipliers.

    Multipliers are refit by bounded least squares on the near-active rows, so
    the stationarity residual is the distance from the objective gradient to
    the cone those rows generate.
    """
    system = problem.system
    x = np.asarray(solution.x, dtype=float)
    p, q = problem.objective_terms()
    grad = p * x + q
    if not system.rows:
        return KKTResiduals(_inf_norm(grad), 0.0, 0.0)
    A, lo, hi = system.matrix()
    slack = system.slacks(x)
    scale = 1.0 + _inf_norm(x)
    active = np.flatnonzero(slack <= active_tol * scale)
    primal = float(max(0.0, -slack.min()))
    if len(active) == 0:
        return KKTResiduals(_inf_norm(grad), 0.0, primal)
    Aa = A[active].toarray()
    lb = np.full(len(active), -np.inf)
    ub = np.full(len(active), np.inf)
    for j, i in enumerate(active):
        sense = system.rows[i].sense
        if sense == ">=":
            ub[j] = 0.0  # grad + A^T y = 0 with y <= 0 on lower-bounded rows
        elif sense == "<=":
            lb[j] = 0.0
    res = lsq_linear(Aa.T, -grad, bounds=(lb, ub), method="bvls", tol=1e-14, max_iter=10_000)
    yfit = res.x
    stationarity = _inf_norm(grad + Aa.T @ yfit)
    complementarity = float(np.max(np.abs(yfit * slack[active])))
    return KKTResiduals(stationarity, complementarity, primal)


def solve_system(system: ConstraintSystem, anchors: Mapping[int, float] | Sequence[tuple[int, float]],
                 settings: SolverSettings | None = None) -> QpSolution:
    items = anchors.items() if isinstance(anchors, Mapping) else anchors
    return solve(QpProblem(system, list(items)), settings)
