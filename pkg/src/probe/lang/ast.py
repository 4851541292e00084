"""Abstract syntax for the process language.

Two layers live here: data expressions (evaluated by :mod:`probe.data`)
and process expressions.  All nodes are frozen dataclasses; the source
position is carried along but excluded from equality so that a parsed
and a re-parsed tree compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union


# ---------------------------------------------------------------------------
# Sorts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sort:
    name: str
    lo: Optional[int] = None
    hi: Optional[int] = None

    def __post_init__(self):
        if self.name == "Range":
            if self.lo is None or self.hi is None or self.lo > self.hi:
                raise ValueError(f"invalid range [{self.lo}..{self.hi}]")

    @property
    def is_finite(self) -> bool:
        return self.name in ("Bool", "Range")

    @property
    def is_numeric(self) -> bool:
        return self.name != "Bool"

    def contains(self, value) -> bool:
        if self.name == "Bool":
            return isinstance(value, bool)
        if isinstance(value, bool):
            return False
        if self.name == "Real":
            return isinstance(value, (int, Fraction, float))
        if isinstance(value, Fraction):
            if value.denominator != 1:
                return False
            value = value.numerator
        if not isinstance(value, int):
            return False
        if self.name == "Nat":
            return value >= 0
        if self.name == "Range":
            return self.lo <= value <= self.hi
        return True

    def __str__(self):
        if self.name == "Range":
            return f"[{self.lo}..{self.hi}]"
        return self.name


BOOL = Sort("Bool")
NAT = Sort("Nat")
INT = Sort("Int")
REAL = Sort("Real")


def Range(lo: int, hi: int) -> Sort:
    return Sort("Range", lo, hi)


# ---------------------------------------------------------------------------
# Data expressions
# ---------------------------------------------------------------------------

Pos = Optional[tuple]


@dataclass(frozen=True)
class Lit:
    value: Union[bool, int, Fraction, float]
    pos: Pos = field(default=None, compare=False, repr=False)

    def __eq__(self, other):
        # True == 1 in Python; literals of different kinds must stay distinct
        return (isinstance(other, Lit) and type(self.value) is type(other.value)
                and self.value == other.value)

    def __hash__(self):
        return hash((type(self.value).__name__, self.value))


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "!"
    operand: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IfExpr:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


Expr = Union[Lit, Var, Unary, Binary, IfExpr]


def expr_free_vars(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Lit):
        return frozenset()
    if isinstance(e, Unary):
        return expr_free_vars(e.operand)
    if isinstance(e, Binary):
        return expr_free_vars(e.left) | expr_free_vars(e.right)
    if isinstance(e, IfExpr):
        return expr_free_vars(e.cond) | expr_free_vars(e.then) | expr_free_vars(e.orelse)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PmfExpr:
    """Probability mass given as an expression in the bound variable."""
    expr: Expr


CONTINUOUS_ARITY = {"Uniform": 2, "Exponential": 1, "NormalTrunc": 4}


@dataclass(frozen=True)
class NamedContinuous:
    kind: str  # one of CONTINUOUS_ARITY
    params: tuple

    def __post_init__(self):
        if self.kind not in CONTINUOUS_ARITY:
            raise ValueError(f"unknown continuous distribution {self.kind!r}")
        if len(self.params) != CONTINUOUS_ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {CONTINUOUS_ARITY[self.kind]} parameters")


DensitySpec = Union[PmfExpr, NamedContinuous]


def density_free_vars(d: DensitySpec) -> frozenset:
    if isinstance(d, PmfExpr):
        return expr_free_vars(d.expr)
    out = frozenset()
    for p in d.params:
        out |= expr_free_vars(p)
    return out


# ---------------------------------------------------------------------------
# Process expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Delta:
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Terminated:
    """Successful termination.  Internal only; has no concrete syntax."""
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Action:
    name: str
    args: tuple = ()
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Seq:
    left: "ProcExpr"
    right: "ProcExpr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Alt:
    left: "ProcExpr"
    right: "ProcExpr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Cond:
    cond: Expr
    then: "ProcExpr"
    orelse: "ProcExpr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Sum:
    var: str
    sort: Sort
    body: "ProcExpr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Dist:
    var: str
    sort: Sort
    density: DensitySpec
    body: "ProcExpr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ProcRef:
    name: str
    args: tuple = ()
    pos: Pos = field(default=None, compare=False, repr=False)


ProcExpr = Union[Delta, Terminated, Action, Seq, Alt, Cond, Sum, Dist, ProcRef]


_FREE_CACHE: dict = {}


def proc_free_vars(p: ProcExpr) -> frozenset:
    """Free data variables of a process expression (memoised per node)."""
    key = id(p)
    hit = _FREE_CACHE.get(key)
    if hit is not None and hit[0] is p:
        return hit[1]
    if isinstance(p, (Delta, Terminated)):
        out = frozenset()
    elif isinstance(p, (Action, ProcRef)):
        out = frozenset().union(*(expr_free_vars(a) for a in p.args))
    elif isinstance(p, (Seq, Alt)):
        out = proc_free_vars(p.left) | proc_free_vars(p.right)
    elif isinstance(p, Cond):
        out = expr_free_vars(p.cond) | proc_free_vars(p.then) | proc_free_vars(p.orelse)
    elif isinstance(p, Sum):
        out = proc_free_vars(p.body) - {p.var}
    elif isinstance(p, Dist):
        out = density_free_vars(p.density) | (proc_free_vars(p.body) - {p.var})
    else:
        raise TypeError(f"not a process expression: {p!r}")
    # keep p alive alongside its id so the entry cannot be confused with a new object
    _FREE_CACHE[key] = (p, out)
    return out


# ---------------------------------------------------------------------------
# Specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActionDecl:
    name: str
    sorts: tuple = ()
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ProcDecl:
    name: str
    params: tuple  # of (name, Sort)
    body: ProcExpr
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Spec:
    actions: tuple  # of ActionDecl, in declaration order
    equations: tuple  # of ProcDecl, in declaration order
    init: ProcExpr

    def action(self, name: str) -> Optional[ActionDecl]:
        for a in self.actions:
            if a.name == name:
                return a
        return None

    def equation(self, name: str) -> Optional[ProcDecl]:
        return self._eqs.get(name)

    @property
    def _eqs(self) -> dict:
        try:
            return self.__dict__["_eq_index"]
        except KeyError:
            idx = {}
            for eq in self.equations:
                idx.setdefault(eq.name, eq)
            object.__setattr__(self, "_eq_index", idx)
            return idx
