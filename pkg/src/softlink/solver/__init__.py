"""LP and MIP solving behind one interface.

``solve_lp`` and ``solve_mip`` dispatch on ``SolverConfig.backend``:
``"builtin"`` is the revised simplex / branch-and-bound reference engine,
``"highs"`` uses HiGHS via scipy. Both return row duals for LPs.
"""

from __future__ import annotations

import numpy as np

from .bnb import branch_and_bound
from .core import (
    INFEASIBLE,
    NODE_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LpSolution,
    MipSolution,
    NumericalFailureError,
    SolverConfig,
    certify_lp,
    dual_objective,
    relative_gap,
)
from .highs import highs_lp, highs_mip
from .program import (
    CompiledProgram,
    Constraint,
    LinearProgram,
    MalformedProgramError,
    MixedIntegerProgram,
    ProgramBuilder,
    Variable,
    to_lp_format,
    validate_program,
)
from .simplex import RawLpResult, simplex_solve

__all__ = [
    "Constraint", "INFEASIBLE", "LinearProgram", "LpSolution", "MalformedProgramError", "MipSolution",
    "MixedIntegerProgram", "NODE_LIMIT", "NumericalFailureError", "OPTIMAL", "ProgramBuilder",
    "SolverConfig", "UNBOUNDED", "Variable", "certify_lp", "dual_objective", "lp_engine", "relative_gap",
    "solve_lp", "solve_mip", "to_lp_format", "validate_program",
]

_LP_ENGINES = {"builtin": simplex_solve, "highs": highs_lp}


def lp_engine(name: str):
    try:
        return _LP_ENGINES[name]
    except KeyError:
        raise ValueError(f"unknown solver backend {name!r}; choose from {sorted(_LP_ENGINES)}") from None


def _wrap_lp(prog: CompiledProgram, raw: RawLpResult, backend: str) -> LpSolution:
    if raw.status != OPTIMAL:
        return LpSolution(raw.status, iterations=raw.iterations, backend=backend)
    s = prog.sign
    return LpSolution(
        status=OPTIMAL,
        objective=s * raw.objective,
        values=dict(zip(prog.var_names, (raw.x + 0.0).tolist())),
        duals=dict(zip(prog.row_names, (s * raw.y).tolist())),
        reduced_costs=dict(zip(prog.var_names, (s * raw.d).tolist())),
        iterations=raw.iterations,
        backend=backend,
    )


def solve_lp(lp: LinearProgram, config: SolverConfig | None = None) -> LpSolution:
    """Solve a linear program and return primal values, row duals and reduced costs.

    Raises :class:`MalformedProgramError` for structural defects and
    :class:`NumericalFailureError` when the engine cannot finish.
    """
    cfg = config or SolverConfig()
    prog = lp.compiled
    raw = lp_engine(cfg.backend)(prog, np.asarray(prog.lower), np.asarray(prog.upper), cfg)
    return _wrap_lp(prog, raw, cfg.backend)


def solve_mip(mip: MixedIntegerProgram, gap_target: float | None = None,
              config: SolverConfig | None = None) -> MipSolution:
    """Solve a mixed-integer program to a relative gap of ``gap_target``.

    When the node budget runs out the best incumbent is returned with
    ``status == "node_limit"``, ``flagged`` set and the gap achieved.
    """
    cfg = config or SolverConfig()
    gap = cfg.mip_gap if gap_target is None else gap_target
    if not 0 < gap <= 1:
        raise ValueError(f"gap_target must lie in (0, 1], got {gap}")
    prog = mip.compiled
    if cfg.backend == "highs":
        raw = highs_mip(prog, gap, cfg)
    else:
        raw = branch_and_bound(prog, lp_engine(cfg.backend), gap, cfg)
    status = raw["status"]
    s = prog.sign
    if "x" not in raw:
        return MipSolution(status, nodes=raw.get("nodes", 0), flagged=status == NODE_LIMIT, backend=cfg.backend,
                           best_bound=s * raw.get("bound", np.nan))
    return MipSolution(
        status=status,
        objective=s * raw["objective"],
        values=dict(zip(prog.var_names, (raw["x"] + 0.0).tolist())),
        gap=raw["gap"],
        best_bound=s * raw["bound"],
        nodes=raw["nodes"],
        flagged=status == NODE_LIMIT,
        backend=cfg.backend,
    )
