"""Canonical concrete syntax for specifications.

The output re-parses to a structurally equal tree.  Non-atomic factors are
always parenthesised, so the printer does not need to reason about the
greedy ``<>`` branch or binder scope.
"""

from __future__ import annotations

from fractions import Fraction

from probe.lang.ast import (
    Action, Alt, Binary, Cond, Delta, Dist, IfExpr, Lit, NamedContinuous,
    PmfExpr, ProcRef, Seq, Spec, Sum, Terminated, Unary, Var,
)

_PREC = {"||": 1, "&&": 2, "=": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
         "+": 4, "-": 4, "*": 5, "/": 5, "^": 7}
_CONTINUOUS_SYNTAX = {"Uniform": "Uniform", "Exponential": "Exp", "NormalTrunc": "NormalTrunc"}


def format_value(v) -> str:
    """Render a data value; also used for action labels."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if v == float("inf"):
            return "inf"
        if v == float("-inf"):
            return "-inf"
        return repr(v)
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


def format_expr(e, prec=0) -> str:
    if isinstance(e, Lit):
        text = format_value(e.value)
        if isinstance(e.value, Fraction) and e.value.denominator != 1:
            return f"({text})"
        return text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, IfExpr):
        return f"if({format_expr(e.cond)}, {format_expr(e.then)}, {format_expr(e.orelse)})"
    if isinstance(e, Unary):
        text = e.op + format_expr(e.operand, 6)
        return f"({text})" if prec > 6 else text
    if isinstance(e, Binary):
        p = _PREC[e.op]
        if e.op == "^":
            # right operand is a unary-level expression, left is an atom
            text = f"{format_expr(e.left, 8)}^{format_expr(e.right, 6)}"
        elif p == 3:
            text = f"{format_expr(e.left, p + 1)} {e.op} {format_expr(e.right, p + 1)}"
        else:
            text = f"{format_expr(e.left, p)} {e.op} {format_expr(e.right, p + 1)}"
        return f"({text})" if prec > p else text
    raise TypeError(f"not an expression: {e!r}")


def format_density(d) -> str:
    if isinstance(d, PmfExpr):
        return format_expr(d.expr)
    assert isinstance(d, NamedContinuous)
    args = ", ".join(format_expr(x) for x in d.params)
    return f"{_CONTINUOUS_SYNTAX[d.kind]}({args})"


def _call(name, args):
    if not args:
        return name
    return f"{name}({', '.join(format_expr(a) for a in args)})"


def format_proc(p) -> str:
    if isinstance(p, Alt):
        # Alt is left-associative; a right-nested Alt needs parentheses
        right = format_proc(p.right)
        if isinstance(p.right, Alt):
            right = f"({right})"
        return f"{format_proc(p.left)} + {right}"
    if isinstance(p, Seq):
        left = format_proc(p.left) if isinstance(p.left, Seq) else _factor(p.left)
        return f"{left} . {_factor(p.right)}"
    if isinstance(p, Delta):
        return "delta"
    if isinstance(p, Terminated):
        raise ValueError("the termination marker has no concrete syntax")
    if isinstance(p, (Action, ProcRef)):
        return _call(p.name, p.args)
    if isinstance(p, Sum):
        return f"sum {p.var}:{p.sort} . {_factor(p.body)}"
    if isinstance(p, Dist):
        return f"dist {p.var}:{p.sort}[{format_density(p.density)}] . {_factor(p.body)}"
    if isinstance(p, Cond):
        return f"({format_expr(p.cond)}) -> {_factor(p.then)} <> {_factor(p.orelse)}"
    raise TypeError(f"not a process expression: {p!r}")


def _factor(p) -> str:
    if isinstance(p, (Delta, Action, ProcRef)):
        return format_proc(p)
    return f"({format_proc(p)})"


def pretty_print(spec: Spec) -> str:
    lines = []
    for a in spec.actions:
        if a.sorts:
            lines.append(f"act {a.name}: {' # '.join(str(s) for s in a.sorts)};")
        else:
            lines.append(f"act {a.name};")
    for eq in spec.equations:
        head = eq.name
        if eq.params:
            head += "(" + ", ".join(f"{n}:{s}" for n, s in eq.params) + ")"
        lines.append(f"proc {head} = {format_proc(eq.body)};")
    lines.append(f"init {format_proc(spec.init)};")
    return "\n".join(lines) + "\n"
