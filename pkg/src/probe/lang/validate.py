"""Static checks on parsed specifications.

Diagnostics are returned as data.  Errors make a specification unfit for
exploration and simulation; warnings flag constructs that only some
operations can handle (an infinite ``sum`` can be simulated with a
resolver but not explored).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from probe.lang.ast import (
    Action, Alt, Binary, Cond, Delta, Dist, IfExpr, Lit,
    NamedContinuous, PmfExpr, ProcRef, Seq, Spec, Sum, Terminated, Unary, Var,
)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    message: str
    pos: Optional[tuple] = None

    def __str__(self):
        where = f"{self.pos[0]}:{self.pos[1]}: " if self.pos else ""
        return f"{where}{self.severity}: {self.message}"


# Expression kinds used for light-weight sort checking.  "int" is any
# integral sort, "real" is everything numeric.
def _kind_of_sort(sort):
    if sort.name == "Bool":
        return "bool"
    if sort.name == "Real":
        return "real"
    return "int"


def _compatible(actual, expected):
    if actual is None or expected is None:
        return True
    if expected == "real":
        return actual in ("int", "real")
    return actual == expected


class _Checker:

    def __init__(self, spec: Spec):
        self.spec = spec
        self.diags: List[Diagnostic] = []

    def err(self, msg, pos=None):
        self.diags.append(Diagnostic("error", msg, pos))

    def warn(self, msg, pos=None):
        self.diags.append(Diagnostic("warning", msg, pos))

    # -- expressions -------------------------------------------------------

    def expr(self, e, scope):
        """Return the kind of ``e`` ("bool", "int", "real") or None if unknown."""
        if isinstance(e, Lit):
            if isinstance(e.value, bool):
                return "bool"
            return "real" if isinstance(e.value, float) else "int"
        if isinstance(e, Var):
            if e.name not in scope:
                self.err(f"unbound variable {e.name}", e.pos)
                return None
            return _kind_of_sort(scope[e.name])
        if isinstance(e, Unary):
            k = self.expr(e.operand, scope)
            want = "bool" if e.op == "!" else "real"
            if not _compatible(k, want):
                self.err(f"operator {e.op} applied to a {k} operand", e.pos)
            return "bool" if e.op == "!" else k
        if isinstance(e, IfExpr):
            c = self.expr(e.cond, scope)
            if not _compatible(c, "bool"):
                self.err("if condition is not boolean", e.pos)
            a, b = self.expr(e.then, scope), self.expr(e.orelse, scope)
            if a is not None and b is not None and (a == "bool") != (b == "bool"):
                self.err("if branches have different sorts", e.pos)
            if a == "real" or b == "real":
                return "real"
            return a if a is not None else b
        if isinstance(e, Binary):
            a, b = self.expr(e.left, scope), self.expr(e.right, scope)
            if e.op in ("&&", "||"):
                if not (_compatible(a, "bool") and _compatible(b, "bool")):
                    self.err(f"operator {e.op} needs boolean operands", e.pos)
                return "bool"
            if e.op in ("=", "!="):
                if a is not None and b is not None and (a == "bool") != (b == "bool"):
                    self.err(f"comparison {e.op} between different sorts", e.pos)
                return "bool"
            if not (_compatible(a, "real") and _compatible(b, "real")):
                self.err(f"operator {e.op} needs numeric operands", e.pos)
            if e.op in ("<", "<=", ">", ">="):
                return "bool"
            if e.op == "/" or "real" in (a, b):
                return "real"
            return "int"
        raise TypeError(f"not an expression: {e!r}")

    # -- processes ---------------------------------------------------------

    def proc(self, p, scope):
        if isinstance(p, (Delta, Terminated)):
            return
        if isinstance(p, (Seq, Alt)):
            self.proc(p.left, scope)
            self.proc(p.right, scope)
        elif isinstance(p, Cond):
            if not _compatible(self.expr(p.cond, scope), "bool"):
                self.err("condition is not boolean", p.pos)
            self.proc(p.then, scope)
            self.proc(p.orelse, scope)
        elif isinstance(p, Action):
            decl = self.spec.action(p.name)
            kinds = [self.expr(a, scope) for a in p.args]
            if decl is None:
                self.err(f"undeclared action {p.name}", p.pos)
            elif len(decl.sorts) != len(p.args):
                self.err(f"action {p.name} expects {len(decl.sorts)} argument(s), got {len(p.args)}", p.pos)
            else:
                for k, s in zip(kinds, decl.sorts):
                    if not _compatible(k, _kind_of_sort(s)):
                        self.err(f"argument of {p.name} should have sort {s}", p.pos)
        elif isinstance(p, ProcRef):
            eq = self.spec.equation(p.name)
            kinds = [self.expr(a, scope) for a in p.args]
            if eq is None:
                self.err(f"unknown action or process {p.name}", p.pos)
            elif len(eq.params) != len(p.args):
                self.err(f"process {p.name} expects {len(eq.params)} argument(s), got {len(p.args)}", p.pos)
            else:
                for k, (n, s) in zip(kinds, eq.params):
                    if not _compatible(k, _kind_of_sort(s)):
                        self.err(f"argument {n} of {p.name} should have sort {s}", p.pos)
        elif isinstance(p, Sum):
            if not p.sort.is_finite:
                self.warn(f"sum over infinite sort: not finitely explorable (sum {p.var}:{p.sort})", p.pos)
            self.proc(p.body, {**scope, p.var: p.sort})
        elif isinstance(p, Dist):
            self.density(p, scope)
            self.proc(p.body, {**scope, p.var: p.sort})
        else:
            raise TypeError(f"not a process expression: {p!r}")

    def density(self, p: Dist, scope):
        d = p.density
        if isinstance(d, PmfExpr):
            if p.sort.name == "Real":
                self.err(f"dist {p.var}:Real needs a named continuous density (Uniform, Exp, NormalTrunc)", p.pos)
            elif not p.sort.is_finite:
                self.warn(f"countable distribution over {p.sort}: support is truncated during exploration", p.pos)
            k = self.expr(d.expr, {**scope, p.var: p.sort})
            if k == "bool":
                self.err("probability mass expression is boolean", p.pos)
            return
        assert isinstance(d, NamedContinuous)
        if p.sort.name != "Real":
            self.err(f"{d.kind} density requires sort Real, not {p.sort}", p.pos)
        for x in d.params:
            if not _compatible(self.expr(x, scope), "real"):
                self.err(f"{d.kind} parameter is not numeric", p.pos)
        consts = _constant_params(d)
        if consts is not None:
            from probe.distributions import check_continuous_params
            try:
                check_continuous_params(d.kind, consts)
            except Exception as exc:
                self.err(str(exc), p.pos)

    # -- guardedness -------------------------------------------------------

    def guardedness(self):
        # unguarded edges: process references reachable without passing an action
        edges = {eq.name: _unguarded_refs(eq.body) for eq in self.spec.equations}
        reported = set()
        for start in edges:
            # DFS for a cycle through `start`
            stack, seen = [start], set()
            while stack:
                x = stack.pop()
                for y in edges.get(x, ()):
                    if y == start and start not in reported:
                        eq = self.spec.equation(start)
                        self.err(f"unguarded recursion at {start}", eq.pos)
                        reported.add(start)
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)

    def run(self):
        seen = set()
        for a in self.spec.actions:
            if a.name in seen:
                self.err(f"duplicate action declaration {a.name}", a.pos)
            seen.add(a.name)
        seen_eq = set()
        for eq in self.spec.equations:
            if eq.name in seen_eq:
                self.err(f"duplicate process equation {eq.name}", eq.pos)
            if eq.name in seen:
                self.err(f"{eq.name} is declared both as action and process", eq.pos)
            seen_eq.add(eq.name)
            names = [n for n, _ in eq.params]
            if len(set(names)) != len(names):
                self.err(f"duplicate parameter in {eq.name}", eq.pos)
            self.proc(eq.body, dict(eq.params))
        self.proc(self.spec.init, {})
        self.guardedness()
        return self.diags


def _constant_params(d: NamedContinuous):
    from probe.data import eval_expr
    from probe.errors import EvalError
    try:
        return [eval_expr(x, {}) for x in d.params]
    except EvalError:
        return None


def _unguarded_refs(p):
    if isinstance(p, ProcRef):
        return {p.name}
    if isinstance(p, Seq):
        # every process performs an action before it can terminate, so the
        # right operand of a sequence is always guarded
        return _unguarded_refs(p.left)
    if isinstance(p, Alt):
        return _unguarded_refs(p.left) | _unguarded_refs(p.right)
    if isinstance(p, Cond):
        return _unguarded_refs(p.then) | _unguarded_refs(p.orelse)
    if isinstance(p, (Sum, Dist)):
        return _unguarded_refs(p.body)
    return set()


def validate(spec: Spec) -> List[Diagnostic]:
    """Check a parsed specification.

    :return: list of diagnostics; empty iff the specification is well formed
             and finitely explorable.
    """
    return _Checker(spec).run()


def errors(diags):
    return [d for d in diags if d.severity == "error"]
