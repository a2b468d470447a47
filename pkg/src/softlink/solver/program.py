"""Linear and mixed-integer program containers.

Programs are built row by row with :class:`ProgramBuilder`, frozen into a
:class:`LinearProgram`, and compiled lazily into sparse arrays for the engines.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

LE, EQ, GE = "<=", "=", ">="
RELATIONS = (LE, EQ, GE)


class MalformedProgramError(ValueError):
    """Program violates a structural invariant (dangling reference, bad bounds)."""


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float = 0.0
    upper: float = math.inf
    cost: float = 0.0


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: tuple[tuple[str, float], ...]
    relation: str
    rhs: float


@dataclass(frozen=True)
class CompiledProgram:
    """Array form of a program, always in minimisation form.

    ``cost`` is already negated for maximisation programs; ``sign`` records
    the factor needed to map objective and duals back to the user's sense.
    """

    var_names: tuple[str, ...]
    row_names: tuple[str, ...]
    A: sp.csr_matrix
    rhs: np.ndarray
    relation: np.ndarray  # -1 for <=, 0 for =, +1 for >=
    lower: np.ndarray
    upper: np.ndarray
    cost: np.ndarray
    sign: float
    integer: np.ndarray  # bool mask

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)


@dataclass(frozen=True, eq=False)
class LinearProgram:
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    sense: str = "min"
    name: str = "lp"

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")

    @cached_property
    def var_index(self) -> dict[str, int]:
        return {v.name: i for i, v in enumerate(self.variables)}

    @cached_property
    def row_index(self) -> dict[str, int]:
        return {c.name: i for i, c in enumerate(self.constraints)}

    def compile(self, integer: Iterable[str] = ()) -> CompiledProgram:
        diags = validate_program(self)
        if diags:
            raise MalformedProgramError("; ".join(diags))
        return _compile(self, frozenset(integer))

    @cached_property
    def compiled(self) -> CompiledProgram:
        return self.compile()

    def with_bounds(self, bounds: Mapping[str, tuple[float, float]]) -> "LinearProgram":
        """Copy with some variable bounds replaced."""
        new_vars = tuple(
            Variable(v.name, *bounds[v.name], v.cost) if v.name in bounds else v
            for v in self.variables
        )
        return LinearProgram(new_vars, self.constraints, self.sense, self.name)

    def with_rhs(self, changes: Mapping[str, float]) -> "LinearProgram":
        """Copy with some right-hand sides replaced (used for perturbation checks)."""
        new_rows = tuple(
            Constraint(c.name, c.coeffs, c.relation, changes[c.name]) if c.name in changes else c
            for c in self.constraints
        )
        return LinearProgram(self.variables, new_rows, self.sense, self.name)

    def write_lp(self, path: str | Path, integer: Iterable[str] = ()) -> Path:
        path = Path(path)
        path.write_text(to_lp_format(self, integer))
        return path


@dataclass(frozen=True, eq=False)
class MixedIntegerProgram:
    lp: LinearProgram
    integer: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "integer", frozenset(self.integer))

    @cached_property
    def compiled(self) -> CompiledProgram:
        unknown = sorted(self.integer - set(self.lp.var_index))
        if unknown:
            raise MalformedProgramError(f"integrality set references undeclared variables: {unknown[:5]}")
        return self.lp.compile(self.integer)

    def relaxation(self) -> LinearProgram:
        return self.lp


def validate_program(lp: LinearProgram) -> list[str]:
    """Return structural diagnostics; an empty list means the program is well formed."""
    diags: list[str] = []
    seen_vars: set[str] = set()
    for v in lp.variables:
        if v.name in seen_vars:
            diags.append(f"duplicate variable name: {v.name}")
        seen_vars.add(v.name)
        if math.isnan(v.lower) or math.isnan(v.upper) or math.isnan(v.cost):
            diags.append(f"NaN in variable {v.name}")
        elif v.lower > v.upper:
            diags.append(f"inverted bounds on {v.name}: lower {v.lower} > upper {v.upper}")
    seen_rows: set[str] = set()
    for c in lp.constraints:
        if c.name in seen_rows:
            diags.append(f"duplicate constraint name: {c.name}")
        seen_rows.add(c.name)
        if c.relation not in RELATIONS:
            diags.append(f"unknown relation {c.relation!r} in {c.name}")
        if not math.isfinite(c.rhs):
            diags.append(f"non-finite rhs in {c.name}")
        for var, coef in c.coeffs:
            if var not in seen_vars:
                diags.append(f"dangling reference: constraint {c.name} uses undeclared variable {var}")
            if not math.isfinite(coef):
                diags.append(f"non-finite coefficient for {var} in {c.name}")
    return diags


def _compile(lp: LinearProgram, integer: frozenset[str]) -> CompiledProgram:
    index = lp.var_index
    rows, cols, vals = [], [], []
    for i, c in enumerate(lp.constraints):
        for var, coef in c.coeffs:
            rows.append(i)
            cols.append(index[var])
            vals.append(coef)
    n, m = len(lp.variables), len(lp.constraints)
    A = sp.csr_matrix((np.asarray(vals, float), (np.asarray(rows, int), np.asarray(cols, int))), shape=(m, n))
    A.sum_duplicates()
    sign = 1.0 if lp.sense == "min" else -1.0
    rel_code = {LE: -1, EQ: 0, GE: 1}
    arrays = dict(
        rhs=np.array([c.rhs for c in lp.constraints], float),
        relation=np.array([rel_code[c.relation] for c in lp.constraints], int),
        lower=np.array([v.lower for v in lp.variables], float),
        upper=np.array([v.upper for v in lp.variables], float),
        cost=sign * np.array([v.cost for v in lp.variables], float),
        integer=np.array([v.name in integer for v in lp.variables], bool),
    )
    for arr in arrays.values():
        arr.flags.writeable = False
    return CompiledProgram(
        var_names=tuple(v.name for v in lp.variables),
        row_names=tuple(c.name for c in lp.constraints),
        A=A,
        sign=sign,
        **arrays,
    )


class ProgramBuilder:
    """Incremental construction of a :class:`LinearProgram`.

    Constraint terms may mention the same variable more than once; the
    coefficients are summed.
    """

    def __init__(self, name: str = "lp", sense: str = "min"):
        self.name = name
        self.sense = sense
        self._vars: dict[str, Variable] = {}
        self._rows: dict[str, Constraint] = {}
        self.integer: set[str] = set()

    def var(self, name: str, lower: float = 0.0, upper: float = math.inf, cost: float = 0.0,
            integer: bool = False) -> str:
        if name in self._vars:
            raise MalformedProgramError(f"variable {name} declared twice")
        self._vars[name] = Variable(name, float(lower), float(upper), float(cost))
        if integer:
            self.integer.add(name)
        return name

    def has_var(self, name: str) -> bool:
        return name in self._vars

    def add_cost(self, name: str, cost: float) -> None:
        v = self._vars[name]
        self._vars[name] = Variable(v.name, v.lower, v.upper, v.cost + float(cost))

    def row(self, name: str, terms: Mapping[str, float] | Iterable[tuple[str, float]], relation: str,
            rhs: float) -> str:
        if name in self._rows:
            raise MalformedProgramError(f"constraint {name} declared twice")
        if relation not in RELATIONS:
            raise MalformedProgramError(f"unknown relation {relation!r}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[str, float] = {}
        for var, coef in items:
            merged[var] = merged.get(var, 0.0) + float(coef)
        coeffs = tuple((v, c) for v, c in merged.items() if c != 0.0)
        self._rows[name] = Constraint(name, coeffs, relation, float(rhs))
        return name

    def build(self) -> LinearProgram:
        return LinearProgram(tuple(self._vars.values()), tuple(self._rows.values()), self.sense, self.name)

    def build_mip(self) -> MixedIntegerProgram:
        return MixedIntegerProgram(self.build(), frozenset(self.integer))


_LP_NAME_BAD = re.compile(r"[^A-Za-z0-9_.()]")


def _lp_name(name: str) -> str:
    out = _LP_NAME_BAD.sub("_", name.replace("[", "(").replace("]", ")"))
    if out[0].isdigit() or out[0] in ".eE":
        out = "_" + out
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def to_lp_format(lp: LinearProgram, integer: Iterable[str] = ()) -> str:
    """Render the program in CPLEX LP text format.

    Names are sanitised (brackets become parentheses, commas underscores), so
    the file is for cross-checking with third-party solvers only.
    """
    lines = ["\\ " + lp.name, "Minimize" if lp.sense == "min" else "Maximize"]

    def expr(terms):
        parts = []
        for var, coef in terms:
            op = "-" if coef < 0 else "+"
            parts.append(f"{op} {_fmt(abs(coef))} {_lp_name(var)}")
        return " ".join(parts) if parts else "0 " + _lp_name(lp.variables[0].name)

    lines.append(" obj: " + expr([(v.name, v.cost) for v in lp.variables if v.cost != 0.0]))
    lines.append("Subject To")
    for c in lp.constraints:
        lines.append(f" {_lp_name(c.name)}: {expr(c.coeffs)} {c.relation} {_fmt(c.rhs)}")
    lines.append("Bounds")
    for v in lp.variables:
        name = _lp_name(v.name)
        lo = "-inf" if v.lower == -math.inf else _fmt(v.lower)
        hi = "+inf" if v.upper == math.inf else _fmt(v.upper)
        if v.lower == -math.inf and v.upper == math.inf:
            lines.append(f" {name} free")
        else:
            lines.append(f" {lo} <= {name} <= {hi}")
    ints = sorted(integer)
    if ints:
        lines.append("General")
        lines.extend(" " + _lp_name(v) for v in ints)
    lines.append("End")
    return "\n".join(lines) + "\n"
