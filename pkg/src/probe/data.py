"""Evaluation of data expressions.

Values are plain Python objects: ``bool``, ``int`` (also for ``Nat`` and
ranges), :class:`fractions.Fraction` for exact rationals and ``float`` for
reals.  Arithmetic stays exact as long as no float enters; dividing two
integers yields a ``Fraction``.
"""

from __future__ import annotations

import operator
from fractions import Fraction
from typing import Mapping

from probe.errors import EvalError
from probe.lang.ast import Binary, IfExpr, Lit, Sort, Unary, Var

Env = Mapping[str, object]


def _num(v, op):
    if isinstance(v, bool) or not isinstance(v, (int, Fraction, float)):
        raise EvalError(f"operator {op} expects a number, got {_show(v)}")
    return v


def _bool(v, op):
    if not isinstance(v, bool):
        raise EvalError(f"operator {op} expects a boolean, got {_show(v)}")
    return v


def _show(v):
    from probe.lang.printer import format_value
    return format_value(v)


def _tidy(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul}
_ORDER = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


def eval_expr(e, env: Env):
    """Evaluate ``e`` in ``env``.

    :raises EvalError: on an unbound variable, a sort mismatch, division by
        zero or a power with a negative or non-integral exponent.
    """
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvalError(f"unbound variable {e.name}") from None
    if isinstance(e, Unary):
        v = eval_expr(e.operand, env)
        if e.op == "!":
            return not _bool(v, "!")
        return -_num(v, "-")
    if isinstance(e, IfExpr):
        c = _bool(eval_expr(e.cond, env), "if")
        return eval_expr(e.then if c else e.orelse, env)
    if not isinstance(e, Binary):
        raise TypeError(f"not an expression: {e!r}")

    op = e.op
    if op == "&&":
        return _bool(eval_expr(e.left, env), op) and _bool(eval_expr(e.right, env), op)
    if op == "||":
        return _bool(eval_expr(e.left, env), op) or _bool(eval_expr(e.right, env), op)

    a = eval_expr(e.left, env)
    b = eval_expr(e.right, env)
    if op in ("=", "!="):
        if isinstance(a, bool) != isinstance(b, bool):
            raise EvalError(f"cannot compare {_show(a)} with {_show(b)}")
        return (a == b) if op == "=" else (a != b)
    a, b = _num(a, op), _num(b, op)
    if op in _ORDER:
        return _ORDER[op](a, b)
    if op in _ARITH:
        return _tidy(_ARITH[op](a, b))
    if op == "/":
        if b == 0:
            raise EvalError("division by zero")
        if isinstance(a, float) or isinstance(b, float):
            return a / b
        return _tidy(Fraction(a) / Fraction(b))
    if op == "^":
        if isinstance(b, Fraction) and b.denominator == 1:
            b = b.numerator
        if not isinstance(b, int) or b < 0:
            raise EvalError(f"exponent must be a non-negative integer, got {_show(b)}")
        if isinstance(a, float):
            return a ** b
        return _tidy(Fraction(a) ** b)
    raise EvalError(f"unknown operator {op}")


def enumerate_sort(sort: Sort) -> list:
    """All values of a finite sort in ascending order."""
    if sort.name == "Bool":
        return [False, True]
    if sort.name == "Range":
        return list(range(sort.lo, sort.hi + 1))
    raise EvalError(f"infinite sort {sort}")


def countable_values(sort: Sort):
    """Enumerate ``Nat`` as 0, 1, 2, ... and ``Int`` as 0, 1, -1, 2, -2, ..."""
    if sort.is_finite:
        yield from enumerate_sort(sort)
        return
    if sort.name == "Nat":
        n = 0
        while True:
            yield n
            n += 1
    if sort.name == "Int":
        yield 0
        n = 1
        while True:
            yield n
            yield -n
            n += 1
    raise EvalError(f"sort {sort} is not countable")


def check_member(sort: Sort, value, what="value"):
    if not sort.contains(value):
        raise EvalError(f"{what} {_show(value)} is not of sort {sort}")
    return value
