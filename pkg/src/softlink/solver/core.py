"""Solver configuration, result containers and certificate checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .program import CompiledProgram, LinearProgram

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NODE_LIMIT = "node_limit"


class NumericalFailureError(RuntimeError):
    """The engine lost numerical control (singular basis, iteration budget).

    Usually a sign that the instance needs rescaling.
    """


@dataclass(frozen=True)
class SolverConfig:
    feasibility_tol: float = 1e-7
    optimality_tol: float = 1e-7
    integrality_tol: float = 1e-6
    mip_gap: float = 1e-3
    backend: str = "builtin"
    max_iterations: int = 200_000
    node_limit: int = 100_000
    refactor_every: int = 64
    degenerate_limit: int = 30
    retry_budget: int = 2

    def replace(self, **changes) -> "SolverConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class LpSolution:
    """Solution of a linear program in the program's own sense.

    ``duals[row]`` is the rate of change of the optimal objective per unit
    increase of that row's right-hand side; ``reduced_costs`` follow the
    same convention for variable bounds.
    """

    status: str
    objective: float = math.nan
    values: dict[str, float] = field(default_factory=dict)
    duals: dict[str, float] = field(default_factory=dict)
    reduced_costs: dict[str, float] = field(default_factory=dict)
    iterations: int = 0
    backend: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def __getitem__(self, name: str) -> float:
        return self.values[name]


@dataclass(frozen=True)
class MipSolution:
    status: str
    objective: float = math.nan
    values: dict[str, float] = field(default_factory=dict)
    gap: float = math.inf
    best_bound: float = math.nan
    nodes: int = 0
    flagged: bool = False
    backend: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def has_incumbent(self) -> bool:
        return bool(self.values)

    def __getitem__(self, name: str) -> float:
        return self.values[name]


def relative_gap(incumbent: float, bound: float) -> float:
    if not math.isfinite(incumbent):
        return math.inf
    return max(0.0, incumbent - bound) / max(abs(incumbent), 1.0)


def row_activity(prog: CompiledProgram, x: np.ndarray) -> np.ndarray:
    return prog.A @ x


def dual_objective(lp: LinearProgram, sol: LpSolution) -> float:
    """Objective of the dual problem built from the row duals alone.

    Variable bound multipliers are recovered from ``c - A'y`` and priced at
    whichever bound their sign selects, so the value is independent of the
    primal point. Returns ``-inf`` (for min) if the duals are not
    bound-feasible, i.e. a multiplier pushes against an infinite bound.
    """
    prog = lp.compiled
    s = prog.sign
    y = s * np.array([sol.duals[r] for r in prog.row_names])  # min-form duals
    d = prog.cost - prog.A.T @ y
    total = float(prog.rhs @ y)
    for j in range(prog.n_vars):
        if d[j] > 0:
            bound = prog.lower[j]
        elif d[j] < 0:
            bound = prog.upper[j]
        else:
            continue
        if math.isinf(bound):
            if abs(d[j]) > 1e-9 * (1 + abs(prog.cost[j])):
                return -math.inf * s
            continue
        total += d[j] * bound
    return s * total


def certify_lp(lp: LinearProgram, sol: LpSolution, tol: float = 1e-6) -> dict[str, float]:
    """Residuals of the optimality certificate of an optimal LP solution.

    Returns primal infeasibility, duality gap (relative to 1 + |objective|),
    dual sign violations and the worst complementary-slackness product, each
    normalised so that ``tol`` is the acceptance threshold.
    """
    prog = lp.compiled
    x = np.array([sol.values[v] for v in prog.var_names])
    act = prog.A @ x
    scale = 1.0 + abs(sol.objective)
    viol = np.zeros(prog.n_rows)
    viol = np.where(prog.relation <= 0, np.maximum(viol, act - prog.rhs), viol)
    viol = np.where(prog.relation >= 0, np.maximum(viol, prog.rhs - act), viol)
    bound_viol = np.maximum(prog.lower - x, 0) + np.maximum(x - prog.upper, 0)
    row_scale = 1.0 + np.abs(prog.rhs)
    primal = float(max(np.max(viol / row_scale, initial=0.0), np.max(bound_viol, initial=0.0)))

    y = prog.sign * np.array([sol.duals[r] for r in prog.row_names])
    # min-form sign rules: <= rows need y <= 0, >= rows need y >= 0
    sign_viol = np.where(prog.relation < 0, np.maximum(y, 0), 0) + np.where(prog.relation > 0, np.maximum(-y, 0), 0)
    slack = prog.rhs - act
    cs = np.abs(y * slack) / scale
    d = prog.cost - prog.A.T @ y
    at_lower = np.abs(x - prog.lower) <= 1e-7 * (1 + np.abs(prog.lower))
    at_upper = np.abs(x - prog.upper) <= 1e-7 * (1 + np.abs(prog.upper))
    var_cs = np.where(at_lower | at_upper, 0.0, np.abs(d * x)) / scale
    dual_gap = abs(sol.objective - dual_objective(lp, sol)) / scale
    return {
        "primal_infeasibility": primal,
        "duality_gap": dual_gap,
        "dual_sign": float(np.max(sign_viol / (1 + np.abs(y)), initial=0.0)),
        "complementary_slackness": float(max(np.max(cs, initial=0.0), np.max(var_cs, initial=0.0))),
    }
