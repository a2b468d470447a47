"""External engine: HiGHS through scipy.

Returns the same raw results as the built-in engine, including row duals,
so it can stand in for it wherever prices are extracted.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .core import INFEASIBLE, NODE_LIMIT, OPTIMAL, UNBOUNDED, NumericalFailureError, SolverConfig, relative_gap
from .program import CompiledProgram
from .simplex import RawLpResult


def _split(prog: CompiledProgram):
    A = prog.A.tocsr()
    le = prog.relation < 0
    ge = prog.relation > 0
    eq = prog.relation == 0
    ub_rows = np.flatnonzero(le | ge)
    ub_sign = np.where(ge[ub_rows], -1.0, 1.0)
    A_ub = sp.diags(ub_sign) @ A[ub_rows]
    b_ub = ub_sign * prog.rhs[ub_rows]
    eq_rows = np.flatnonzero(eq)
    return A_ub, b_ub, ub_rows, ub_sign, A[eq_rows], prog.rhs[eq_rows], eq_rows


def highs_lp(prog: CompiledProgram, lower: np.ndarray, upper: np.ndarray, config: SolverConfig) -> RawLpResult:
    A_ub, b_ub, ub_rows, ub_sign, A_eq, b_eq, eq_rows = _split(prog)
    bounds = np.column_stack([lower, upper])
    res = linprog(
        prog.cost,
        A_ub=A_ub if len(ub_rows) else None,
        b_ub=b_ub if len(ub_rows) else None,
        A_eq=A_eq if len(eq_rows) else None,
        b_eq=b_eq if len(eq_rows) else None,
        bounds=bounds,
        method="highs-ds",
        options={
            "primal_feasibility_tolerance": max(config.feasibility_tol, 1e-10),
            "dual_feasibility_tolerance": max(config.optimality_tol, 1e-10),
            "presolve": True,
        },
    )
    if res.status == 2:
        return RawLpResult(INFEASIBLE, iterations=int(res.nit))
    if res.status == 3:
        return RawLpResult(UNBOUNDED, iterations=int(res.nit))
    if res.status != 0:
        raise NumericalFailureError(f"HiGHS LP failed: {res.message}")
    y = np.zeros(prog.n_rows)
    if len(ub_rows):
        y[ub_rows] = ub_sign * res.ineqlin.marginals
    if len(eq_rows):
        y[eq_rows] = res.eqlin.marginals
    d = res.lower.marginals + res.upper.marginals
    return RawLpResult(OPTIMAL, np.asarray(res.x, float), y, np.asarray(d, float), float(res.fun), int(res.nit))


def highs_mip(prog: CompiledProgram, gap_target: float, config: SolverConfig) -> dict:
    lo = np.where(prog.relation < 0, -np.inf, prog.rhs)
    hi = np.where(prog.relation > 0, np.inf, prog.rhs)
    constraints = [LinearConstraint(prog.A, lo, hi)] if prog.n_rows else []
    res = milp(
        prog.cost,
        integrality=prog.integer.astype(int),
        bounds=Bounds(prog.lower, prog.upper),
        constraints=constraints,
        options={"mip_rel_gap": gap_target, "node_limit": config.node_limit, "disp": False},
    )
    if res.status == 2:
        return dict(status=INFEASIBLE, nodes=0)
    if res.status == 3:
        return dict(status=UNBOUNDED, nodes=0)
    if res.x is None:
        if res.status == 1:
            return dict(status=NODE_LIMIT, nodes=0)
        raise NumericalFailureError(f"HiGHS MIP failed: {res.message}")
    x = np.asarray(res.x, float)
    int_idx = np.flatnonzero(prog.integer)
    x[int_idx] = np.round(x[int_idx])
    objective = float(prog.cost @ x)
    bound = getattr(res, "mip_dual_bound", None)
    bound = objective if bound is None else float(bound)
    gap = relative_gap(objective, bound) if np.isfinite(bound) else 0.0
    status = OPTIMAL if res.status == 0 else NODE_LIMIT
    return dict(status=status, x=x, objective=objective, bound=bound, gap=gap,
                nodes=int(getattr(res, "mip_node_count", None) or 0))
