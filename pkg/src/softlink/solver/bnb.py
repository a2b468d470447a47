"""LP-based branch and bound.

Most-fractional branching; nodes are explored depth-first until the first
incumbent exists and best-bound afterwards. Node LPs are solved by whichever
LP engine the caller supplies, so the search works over the built-in simplex
and over external engines alike.
"""

from __future__ import annotations

import heapq
import itertools
import math
from typing import Callable

import numpy as np

from .core import INFEASIBLE, NODE_LIMIT, OPTIMAL, UNBOUNDED, SolverConfig, relative_gap
from .program import CompiledProgram
from .simplex import RawLpResult

LpEngine = Callable[[CompiledProgram, np.ndarray, np.ndarray, SolverConfig], RawLpResult]


def branch_and_bound(prog: CompiledProgram, lp_engine: LpEngine, gap_target: float,
                     config: SolverConfig) -> dict:
    """Minimise ``prog`` with integrality on ``prog.integer``.

    Returns a plain dict (status, x, objective, bound, gap, nodes) in
    minimisation form.
    """
    int_idx = np.flatnonzero(prog.integer)
    tol = config.integrality_tol
    lower0 = np.array(prog.lower, float)
    upper0 = np.array(prog.upper, float)
    lower0[int_idx] = np.ceil(lower0[int_idx] - tol)
    upper0[int_idx] = np.floor(upper0[int_idx] + tol)

    incumbent_x: np.ndarray | None = None
    incumbent = math.inf
    counter = itertools.count()
    nodes = 0

    root = lp_engine(prog, lower0, upper0, config)
    nodes += 1
    if root.status == INFEASIBLE:
        return dict(status=INFEASIBLE, nodes=nodes)
    if root.status == UNBOUNDED:
        return dict(status=UNBOUNDED, nodes=nodes)

    # entries: (bound, seq, lower, upper, x)
    dive: list = []  # LIFO stack while no incumbent
    heap: list = []

    def push(bound, lo, hi, x):
        seq = next(counter)
        if incumbent_x is None:
            dive.append((bound, seq, lo, hi, x))
        else:
            heapq.heappush(heap, (bound, seq, lo, hi, x))

    def fractional(x):
        vals = x[int_idx]
        frac = np.abs(vals - np.round(vals))
        return frac

    push(root.objective, lower0, upper0, root.x)

    while dive or heap:
        if incumbent_x is not None and dive:
            for item in dive:
                heapq.heappush(heap, item)
            dive.clear()
        if dive:
            bound, _, lo, hi, x = dive.pop()
        else:
            item = heapq.heappop(heap)
            bound, _, lo, hi, x = item
            if relative_gap(incumbent, bound) <= gap_target:
                heapq.heappush(heap, item)
                break
        if bound >= incumbent - gap_target * max(abs(incumbent), 1.0) and incumbent_x is not None:
            continue

        frac = fractional(x)
        if frac.size == 0 or frac.max() <= tol:
            if bound < incumbent:
                incumbent, incumbent_x = bound, x
            continue

        if nodes >= config.node_limit:
            if dive:
                dive.append((bound, next(counter), lo, hi, x))
            else:
                heapq.heappush(heap, (bound, next(counter), lo, hi, x))
            break

        # most fractional: distance to nearest integer closest to 1/2; lowest index on ties
        k = int(np.argmax(frac))
        j = int(int_idx[k])
        v = x[j]
        down_hi = hi.copy()
        down_hi[j] = math.floor(v)
        up_lo = lo.copy()
        up_lo[j] = math.ceil(v)
        children = [(lo, down_hi), (up_lo, hi)]
        # while diving, explore the nearer rounding first (it is pushed last)
        if v - math.floor(v) < 0.5:
            children.reverse()
        for c_lo, c_hi in children:
            res = lp_engine(prog, c_lo, c_hi, config)
            nodes += 1
            if res.status != OPTIMAL:
                continue
            if res.objective >= incumbent - gap_target * max(abs(incumbent), 1.0) and incumbent_x is not None:
                continue
            push(res.objective, c_lo, c_hi, res.x)

    remaining = [item[0] for item in heap] + [item[0] for item in dive]
    open_bound = min(remaining) if remaining else incumbent
    best_bound = min(open_bound, incumbent) if incumbent_x is not None else open_bound
    if incumbent_x is None:
        if remaining:
            return dict(status=NODE_LIMIT, nodes=nodes, bound=best_bound)
        return dict(status=INFEASIBLE, nodes=nodes)
    gap = relative_gap(incumbent, best_bound)
    x = incumbent_x.copy()
    x[int_idx] = np.round(x[int_idx])
    status = OPTIMAL if (not remaining or gap <= gap_target) else NODE_LIMIT
    return dict(status=status, x=x, objective=float(prog.cost @ x), bound=best_bound, gap=gap, nodes=nodes)
