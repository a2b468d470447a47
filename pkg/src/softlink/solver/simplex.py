"""Bounded-variable revised simplex with an explicit basis inverse.

Two phases: phase 1 drives artificial variables out with a unit cost,
phase 2 optimises the true cost with artificials fixed at zero. Pricing is
Dantzig's rule (lowest index on ties) and falls back to Bland's rule after a
run of degenerate pivots, which rules out cycling. The basis inverse is
updated by elementary row operations and refactorised periodically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .core import INFEASIBLE, OPTIMAL, UNBOUNDED, NumericalFailureError, SolverConfig
from .program import CompiledProgram

_PIVOT_TOL = 1e-9
_DEGENERATE_STEP = 1e-12


@dataclass
class RawLpResult:
    status: str
    x: np.ndarray | None = None
    y: np.ndarray | None = None  # min-form row duals
    d: np.ndarray | None = None  # min-form reduced costs of structurals
    objective: float = math.nan  # min-form
    iterations: int = 0


class _Simplex:
    def __init__(self, prog: CompiledProgram, lower: np.ndarray, upper: np.ndarray, config: SolverConfig):
        self.cfg = config
        m, n = prog.n_rows, prog.n_vars
        self.m, self.n = m, n
        self.b = np.asarray(prog.rhs, float)
        # slack bounds encode the row relation: A x + s = b
        s_lo = np.where(prog.relation < 0, 0.0, np.where(prog.relation > 0, -np.inf, 0.0))
        s_hi = np.where(prog.relation < 0, np.inf, 0.0)

        x0 = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))
        resid = self.b - prog.A @ x0
        s0 = np.clip(resid, s_lo, s_hi)
        need_art = np.abs(resid - s0) > 0.0
        art_sign = np.where(resid - s0 >= 0, 1.0, -1.0)

        self.M = sp.hstack(
            [prog.A, sp.identity(m, format="csr"), sp.diags(art_sign, format="csr")], format="csc"
        )
        self.lb = np.concatenate([lower, s_lo, np.zeros(m)])
        self.ub = np.concatenate([upper, s_hi, np.where(need_art, np.inf, 0.0)])
        self.x = np.concatenate([x0, s0, np.abs(resid - s0)])
        self.cost2 = np.concatenate([prog.cost, np.zeros(2 * m)])
        self.cost1 = np.concatenate([np.zeros(n + m), need_art.astype(float)])

        self.basis = np.where(need_art, n + m + np.arange(m), n + np.arange(m))
        self.is_basic = np.zeros(n + 2 * m, bool)
        self.is_basic[self.basis] = True
        self.Binv = np.diag(1.0 / np.where(need_art, art_sign, 1.0))
        self.iterations = 0
        self.since_refactor = 0
        self.failures = 0
        self.bscale = 1.0 + (np.max(np.abs(self.b)) if m else 0.0)

    def _column(self, j: int) -> np.ndarray:
        start, end = self.M.indptr[j], self.M.indptr[j + 1]
        rows = self.M.indices[start:end]
        vals = self.M.data[start:end]
        return self.Binv[:, rows] @ vals

    def refactor(self) -> None:
        B = self.M[:, self.basis].toarray()
        try:
            lu = la.lu_factor(B, check_finite=True)
            if np.min(np.abs(np.diag(lu[0]))) < 1e-13 * max(1.0, np.max(np.abs(lu[0]))):
                raise la.LinAlgError("near-singular basis")
            self.Binv = la.lu_solve(lu, np.eye(self.m))
        except (la.LinAlgError, ValueError) as exc:
            self.failures += 1
            if self.failures > self.cfg.retry_budget:
                raise NumericalFailureError(f"basis refactorisation failed: {exc}") from exc
            return
        nonbasic = ~self.is_basic
        rhs = self.b - self.M[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.Binv @ rhs
        self.since_refactor = 0

    def run(self, cost: np.ndarray) -> str:
        cfg = self.cfg
        bland = False
        degenerate = 0
        opt_tol = cfg.optimality_tol * (1.0 + np.abs(cost))
        span_tol = cfg.feasibility_tol
        while True:
            if self.iterations >= cfg.max_iterations:
                raise NumericalFailureError(f"iteration budget of {cfg.max_iterations} exhausted")
            if self.since_refactor >= cfg.refactor_every:
                self.refactor()
            y = self.Binv.T @ cost[self.basis]
            d = cost - self.M.T @ y
            d[self.is_basic] = 0.0
            x, lb, ub = self.x, self.lb, self.ub
            can_up = (x < ub - span_tol) & (d < -opt_tol)
            can_down = (x > lb + span_tol) & (d > opt_tol)
            eligible = (can_up | can_down) & ~self.is_basic
            if not eligible.any():
                return OPTIMAL
            if bland:
                q = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                q = int(np.argmax(score))
            direction = 1.0 if d[q] < 0 else -1.0

            alpha = self._column(q)
            delta = direction * alpha
            xb = x[self.basis]
            lbb, ubb = lb[self.basis], ub[self.basis]
            with np.errstate(divide="ignore", invalid="ignore"):
                t_dec = np.where((delta > _PIVOT_TOL) & np.isfinite(lbb), (xb - lbb) / delta, np.inf)
                t_inc = np.where((delta < -_PIVOT_TOL) & np.isfinite(ubb), (ubb - xb) / -delta, np.inf)
            t = np.maximum(np.minimum(t_dec, t_inc), 0.0)
            theta = float(np.min(t)) if self.m else math.inf
            flip = ub[q] - lb[q]
            self.iterations += 1
            self.since_refactor += 1

            if flip <= theta:
                if math.isinf(flip):
                    return UNBOUNDED
                x[self.basis] = xb - flip * delta
                x[q] = ub[q] if direction > 0 else lb[q]
                degenerate = 0
                bland = False
                continue
            if math.isinf(theta):
                return UNBOUNDED

            ties = np.flatnonzero(t <= theta + 1e-12 * (1.0 + theta))
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(delta[ties]))])
            leaving = int(self.basis[r])

            x[self.basis] = xb - theta * delta
            x[q] = x[q] + direction * theta
            x[leaving] = lb[leaving] if delta[r] > 0 else ub[leaving]
            if not math.isfinite(x[leaving]):
                x[leaving] = 0.0

            pivot = alpha[r]
            row = self.Binv[r] / pivot
            self.Binv -= np.outer(alpha, row)
            self.Binv[r] = row
            self.basis[r] = q
            self.is_basic[q] = True
            self.is_basic[leaving] = False

            if theta <= _DEGENERATE_STEP:
                degenerate += 1
                if degenerate >= self.cfg.degenerate_limit:
                    bland = True
            else:
                degenerate = 0
                bland = False


def simplex_solve(prog: CompiledProgram, lower: np.ndarray | None = None, upper: np.ndarray | None = None,
                  config: SolverConfig | None = None) -> RawLpResult:
    """Solve ``min cost.x`` over the compiled program with optional bound overrides."""
    cfg = config or SolverConfig()
    lower = np.asarray(prog.lower if lower is None else lower, float)
    upper = np.asarray(prog.upper if upper is None else upper, float)
    if np.any(lower > upper):
        return RawLpResult(INFEASIBLE)
    n, m = prog.n_vars, prog.n_rows
    if m == 0:
        x = np.where(prog.cost > 0, lower, np.where(prog.cost < 0, upper, np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))))
        if not np.all(np.isfinite(x)):
            return RawLpResult(UNBOUNDED)
        return RawLpResult(OPTIMAL, x, np.zeros(0), np.asarray(prog.cost, float).copy(), float(prog.cost @ x))

    s = _Simplex(prog, lower, upper, cfg)
    if s.cost1.any():
        s.run(s.cost1)
        s.refactor()
        infeas = float(s.x[n + m:].sum())
        if infeas > cfg.feasibility_tol * s.bscale:
            return RawLpResult(INFEASIBLE, iterations=s.iterations)
        s.ub[n + m:] = 0.0
    status = s.run(s.cost2)
    if status == UNBOUNDED:
        return RawLpResult(UNBOUNDED, iterations=s.iterations)
    s.refactor()
    # a refactorisation can expose drift; re-optimise briefly if needed
    status = s.run(s.cost2)
    if status == UNBOUNDED:
        return RawLpResult(UNBOUNDED, iterations=s.iterations)
    x = s.x[:n].copy()
    x = np.clip(x, lower, upper)
    y = s.Binv.T @ s.cost2[s.basis]
    d = prog.cost - prog.A.T @ y
    return RawLpResult(OPTIMAL, x, y, d, float(prog.cost @ x), s.iterations)
