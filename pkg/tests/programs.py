"""Turn oracle problem dicts into softlink programs."""

from __future__ import annotations

from softlink.solver import ProgramBuilder


def builder_from_arrays(d: dict, integer: bool = False) -> ProgramBuilder:
    b = ProgramBuilder(sense=d["sense"])
    A = d["A"]
    n = A.shape[1]
    lower = d.get("lower", [0.0] * n)
    upper = d.get("upper", [1.0] * n)
    for j in range(n):
        b.var(f"x{j}", lower[j], upper[j], d["cost"][j], integer=integer)
    for i in range(A.shape[0]):
        b.row(f"r{i}", {f"x{j}": A[i, j] for j in range(n)}, str(d["rel"][i]), d["b"][i])
    return b


def dispatch_toy(demand: float = 15.0):
    """Cheap unit (cap 10, cost 20) and an uncapped expensive unit (cost 50)."""
    b = ProgramBuilder("dispatch")
    b.var("cheap", 0, 10, 20)
    b.var("dear", 0, float("inf"), 50)
    b.row("balance", {"cheap": 1, "dear": 1}, "=", demand)
    return b.build()
