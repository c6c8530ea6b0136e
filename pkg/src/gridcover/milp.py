"""Generic mixed-integer linear program container and LP-format text export.

Variables and constraints are addressed by dense integer ids issued by the
owning instance (ids from one instance are meaningless in another).
Variable bounds are metadata, not constraint rows, so constraint counts
match the usual "number of constraints" bookkeeping that excludes range
bounds.  Constraint order is insertion order and is part of the
deterministic export contract.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Sequence, Tuple

VarId = int
ConstraintId = int
Assignment = Dict[int, float]

SENSES = ("<=", "=", ">=")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


class Variable(NamedTuple):
    name: str
    kind: str  # "continuous" | "binary"
    lower: float
    upper: float


class LinearConstraint(NamedTuple):
    terms: Tuple[Tuple[int, float], ...]  # (var id, coefficient), no duplicate ids
    sense: str  # "<=", "=", ">="
    rhs: float


@dataclass(frozen=True)
class InstanceStats:
    n_binary: int
    n_continuous: int
    n_constraints: int


class MilpInstance:
    """A mutable-during-construction, then effectively frozen, MILP."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: List[Variable] = []
        self.constraints: List[LinearConstraint] = []
        self.objective_terms: Dict[int, float] = {}
        self.objective_sense: str = "maximize"
        self._names: Dict[str, int] = {}
        self._n_binary = 0

    # -- construction -----------------------------------------------------

    def add_variable(self, name: str, kind: str, lower: float, upper: float) -> VarId:
        if not _NAME_RE.match(name):
            raise ValueError(f"invalid variable name {name!r}")
        if name in self._names:
            raise ValueError(f"duplicate variable name {name!r}")
        if kind not in ("continuous", "binary"):
            raise ValueError(f"unknown variable kind {kind!r}")
        if not lower <= upper:
            raise ValueError(f"inverted bounds for {name!r}: [{lower}, {upper}]")
        if kind == "binary" and not (0 <= lower and upper <= 1):
            raise ValueError(f"binary {name!r} must have bounds within [0, 1]")
        vid = len(self.variables)
        self.variables.append(Variable(name, kind, float(lower), float(upper)))
        self._names[name] = vid
        if kind == "binary":
            self._n_binary += 1
        return vid

    def _fast_variable(self, name: str, kind: str, lower: float, upper: float) -> VarId:
        """Builder-internal append; trusts the caller for name syntax and
        bound sanity but still rejects duplicates."""
        if name in self._names:
            raise ValueError(f"duplicate variable name {name!r}")
        vid = len(self.variables)
        self.variables.append(Variable(name, kind, lower, upper))
        self._names[name] = vid
        if kind == "binary":
            self._n_binary += 1
        return vid

    def _fast_constraint(self, terms, sense: str, rhs: float) -> ConstraintId:
        """Builder-internal append; terms must already be a well-formed
        tuple of (valid id, float) pairs without duplicates."""
        cid = len(self.constraints)
        self.constraints.append(LinearConstraint(terms, sense, rhs))
        return cid

    def _bulk_variables(self, names: List[str], kind: str, lower: float, upper: float) -> int:
        """Builder-internal batch of [0,1]-style variables sharing one kind
        and bound pair; returns the id of the first.  Duplicate names
        (within the batch or against existing ones) are rejected."""
        base = len(self.variables)
        ids = range(base, base + len(names))
        self._names.update(zip(names, ids))
        if len(self._names) != base + len(names):
            raise ValueError("duplicate variable name in bulk registration")
        self.variables.extend(Variable(n, kind, lower, upper) for n in names)
        if kind == "binary":
            self._n_binary += len(names)
        return base

    def add_constraint(
        self, terms: Iterable[Tuple[int, float]], sense: str, rhs: float
    ) -> ConstraintId:
        if sense not in SENSES:
            raise ValueError(f"unknown constraint sense {sense!r}")
        tt = tuple((int(v), float(c)) for v, c in terms)
        n = len(self.variables)
        seen = set()
        for vid, coef in tt:
            if not 0 <= vid < n:
                raise ValueError(f"unknown variable id {vid}")
            if vid in seen:
                raise ValueError(f"duplicate variable id {vid} in constraint terms")
            if not math.isfinite(coef):
                raise ValueError(f"non-finite coefficient {coef} for variable id {vid}")
            seen.add(vid)
        cid = len(self.constraints)
        self.constraints.append(LinearConstraint(tt, sense, float(rhs)))
        return cid

    def set_objective(self, terms: Iterable[Tuple[int, float]], sense: str) -> None:
        if sense not in ("maximize", "minimize"):
            raise ValueError(f"unknown objective sense {sense!r}")
        out: Dict[int, float] = {}
        n = len(self.variables)
        for vid, coef in terms:
            if not 0 <= vid < n:
                raise ValueError(f"unknown variable id {vid}")
            if vid in out:
                raise ValueError(f"duplicate variable id {vid} in objective")
            out[vid] = float(coef)
        self.objective_terms = out
        self.objective_sense = sense

    # -- queries ----------------------------------------------------------

    def var_id(self, name: str) -> VarId:
        return self._names[name]

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def objective_value(self, values: Assignment) -> float:
        return sum(c * values.get(v, 0.0) for v, c in self.objective_terms.items())

    def constraint_violation(self, values: Assignment) -> float:
        """Largest residual of any constraint under `values` (0 if feasible)."""
        worst = 0.0
        for con in self.constraints:
            lhs = sum(c * values.get(v, 0.0) for v, c in con.terms)
            if con.sense == "<=":
                worst = max(worst, lhs - con.rhs)
            elif con.sense == ">=":
                worst = max(worst, con.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - con.rhs))
        return worst


def instance_stats(instance: MilpInstance) -> InstanceStats:
    """Exact variable/constraint counts; bound boxes are not constraints."""
    return InstanceStats(
        n_binary=instance._n_binary,
        n_continuous=len(instance.variables) - instance._n_binary,
        n_constraints=len(instance.constraints),
    )


def _num(value: float) -> str:
    """Shortest decimal that round-trips; integral values print bare."""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _terms_text(terms: Sequence[Tuple[int, float]], variables: Sequence[Variable]) -> str:
    parts: List[str] = []
    for vid, coef in terms:
        name = variables[vid].name
        if not parts:
            parts.append(f"{_num(coef)} {name}")
        elif coef < 0:
            parts.append(f"- {_num(-coef)} {name}")
        else:
            parts.append(f"+ {_num(coef)} {name}")
    return " ".join(parts)


def write_lp_text(instance: MilpInstance) -> str:
    """Serialize to LP text format, byte-deterministic for a given instance.

    Sections: Maximize/Minimize, Subject To (insertion order, one line per
    constraint `cK: a1 x1 + a2 x2 <= b`), Bounds (one explicit line per
    variable; infinities spelled -inf/+inf), Binary, End.
    """
    lines: List[str] = []
    lines.append("Maximize" if instance.objective_sense == "maximize" else "Minimize")
    obj_terms = sorted(instance.objective_terms.items())
    obj_terms = [(v, c) for v, c in obj_terms if c != 0.0]
    lines.append(f" obj: {_terms_text(obj_terms, instance.variables)}" if obj_terms else " obj: 0")

    lines.append("Subject To")
    for k, con in enumerate(instance.constraints, start=1):
        body = _terms_text([t for t in con.terms if t[1] != 0.0], instance.variables)
        if not body:
            body = "0"
        lines.append(f" c{k}: {body} {con.sense} {_num(con.rhs)}")

    lines.append("Bounds")
    for var in instance.variables:
        lo = "-inf" if var.lower == -math.inf else _num(var.lower)
        up = "+inf" if var.upper == math.inf else _num(var.upper)
        if var.lower == -math.inf and var.upper == math.inf:
            lines.append(f" {var.name} free")
        elif var.lower == var.upper:
            lines.append(f" {var.name} = {lo}")
        else:
            lines.append(f" {lo} <= {var.name} <= {up}")

    binaries = [v.name for v in instance.variables if v.kind == "binary"]
    if binaries:
        lines.append("Binary")
        for name in binaries:
            lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def parse_solution_values(text: str, instance: MilpInstance) -> Assignment:
    """Parse `name value` lines into a total assignment (unlisted ids -> 0)."""
    values: Assignment = {vid: 0.0 for vid in range(instance.n_variables)}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {ln}: expected 'name value', got {raw!r}")
        name, sval = parts
        if name not in instance._names:
            raise ValueError(f"line {ln}: unknown variable name {name!r}")
        try:
            values[instance._names[name]] = float(sval)
        except ValueError as exc:
            raise ValueError(f"line {ln}: unparseable value {sval!r}") from exc
    return values
