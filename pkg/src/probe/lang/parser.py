"""Recursive-descent parser for ``.prb`` specifications.

Grammar (whitespace-insensitive, ``%`` starts a line comment)::

    spec     = { actdecl | procdecl } initdecl
    actdecl  = "act" name {"," name} [":" sort {"#" sort}] ";"
    procdecl = "proc" Name ["(" param {"," param} ")"] "=" proc ";"
    param    = name ":" sort
    initdecl = "init" proc ";"
    proc     = term { "+" term }
    term     = factor { "." factor }
    factor   = "delta" | action | procref | "(" proc ")"
             | "sum" name ":" sort "." factor
             | "dist" name ":" sort "[" density "]" "." factor
             | "(" expr ")" "->" factor [ "<>" factor ]
    sort     = "Bool" | "Nat" | "Int" | "Real" | "[" int ".." int "]"
    density  = expr | "Uniform(" expr "," expr ")" | "Exp(" expr ")"
             | "NormalTrunc(" expr "," expr "," expr "," expr ")"

Data expressions support literals (integers, decimals, ``true``, ``false``,
``inf``), variables, ``+ - * / ^``, ``= != < <= > >=``, ``&& || !`` and
``if(c, x, y)``.

Whether ``f(args)`` is an action or a process reference is decided after
the whole file is read: declared actions win, everything else is a
process reference (undeclared ones are reported by :func:`validate`).
"""

from __future__ import annotations

import re
from dataclasses import replace
from typing import List, Optional

from probe.errors import ParseError
from probe.lang.ast import (
    BOOL, INT, NAT, REAL, Action, ActionDecl, Alt, Binary, Cond, Delta, Dist,
    IfExpr, Lit, NamedContinuous, PmfExpr, ProcDecl, ProcRef, Range, Seq, Sort,
    Spec, Sum, Unary, Var,
)

KEYWORDS = {"act", "proc", "init", "delta", "sum", "dist", "true", "false", "if", "inf"}
SORT_NAMES = {"Bool": BOOL, "Nat": NAT, "Int": INT, "Real": REAL}
CONTINUOUS = {"Uniform": "Uniform", "Exp": "Exponential", "NormalTrunc": "NormalTrunc"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>->|<>|<=|>=|!=|&&|\|\||\.\.|[=<>+\-*/^!()\[\],;:.\#])
""", re.VERBOSE)


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Backtrack(Exception):
    pass


class Parser:

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "name") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def error(self, message, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.col)

    def name(self) -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            self.error(f"expected a name, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    @staticmethod
    def where(t: Token):
        return (t.line, t.col)

    # -- declarations ------------------------------------------------------

    def spec(self) -> Spec:
        actions, equations = [], []
        while True:
            if self.at("act"):
                actions.extend(self.actdecl())
            elif self.at("proc"):
                equations.append(self.procdecl())
            elif self.at("init"):
                self.i += 1
                init = self.proc()
                self.expect(";")
                break
            else:
                self.error(f"expected 'act', 'proc' or 'init', found {self.tok.text or 'end of input'!r}")
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r} after init declaration")
        return Spec(tuple(actions), tuple(equations), init)

    def actdecl(self):
        self.expect("act")
        names = [self.name()]
        while self.accept(","):
            names.append(self.name())
        sorts = ()
        if self.accept(":"):
            sorts = [self.sort()]
            while self.accept("#"):
                sorts.append(self.sort())
            sorts = tuple(sorts)
        self.expect(";")
        return [ActionDecl(t.text, sorts, self.where(t)) for t in names]

    def procdecl(self) -> ProcDecl:
        self.expect("proc")
        t = self.name()
        params = []
        if self.accept("("):
            params.append(self.param())
            while self.accept(","):
                params.append(self.param())
            self.expect(")")
        self.expect("=")
        body = self.proc()
        self.expect(";")
        return ProcDecl(t.text, tuple(params), body, self.where(t))

    def param(self):
        n = self.name().text
        self.expect(":")
        return (n, self.sort())

    def sort(self) -> Sort:
        t = self.tok
        if t.kind == "name":
            if t.text not in SORT_NAMES:
                self.error(f"unknown sort {t.text!r}")
            self.i += 1
            return SORT_NAMES[t.text]
        if self.accept("["):
            lo = self.signed_int()
            self.expect("..")
            hi = self.signed_int()
            self.expect("]")
            if lo > hi:
                self.error(f"empty range [{lo}..{hi}]", t)
            return Range(lo, hi)
        self.error(f"expected a sort, found {t.text or 'end of input'!r}")

    def signed_int(self) -> int:
        neg = self.accept("-")
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            self.error("expected an integer bound")
        self.i += 1
        return -int(t.text) if neg else int(t.text)

    # -- processes ---------------------------------------------------------

    def proc(self):
        t = self.tok
        p = self.term()
        while self.accept("+"):
            p = Alt(p, self.term(), self.where(t))
        return p

    def term(self):
        t = self.tok
        p = self.factor()
        while self.accept("."):
            p = Seq(p, self.factor(), self.where(t))
        return p

    def factor(self):
        t = self.tok
        where = self.where(t)
        if self.accept("delta"):
            return Delta(where)
        if self.accept("sum"):
            var = self.name().text
            self.expect(":")
            sort = self.sort()
            self.expect(".")
            return Sum(var, sort, self.factor(), where)
        if self.accept("dist"):
            var = self.name().text
            self.expect(":")
            sort = self.sort()
            self.expect("[")
            density = self.density()
            self.expect("]")
            self.expect(".")
            return Dist(var, sort, density, self.factor(), where)
        if self.at("("):
            cond = self._try_condition()
            if cond is not None:
                then = self.factor()
                orelse = self.factor() if self.accept("<>") else Delta(where)
                return Cond(cond, then, orelse, where)
            self.expect("(")
            p = self.proc()
            self.expect(")")
            return p
        if t.kind == "name" and t.text not in KEYWORDS:
            self.i += 1
            args = ()
            if self.accept("("):
                args = [self.expr()]
                while self.accept(","):
                    args.append(self.expr())
                self.expect(")")
                args = tuple(args)
            # resolved into Action or ProcRef once all declarations are known
            return ProcRef(t.text, args, where)
        self.error(f"expected a process, found {t.text or 'end of input'!r}")

    def _try_condition(self):
        """Parse ``( expr ) ->`` if present; otherwise rewind and return None."""
        start = self.i
        try:
            self.expect("(")
            c = self.expr()
            self.expect(")")
            self.expect("->")
            return c
        except ParseError:
            self.i = start
            return None

    def density(self):
        t = self.tok
        if t.kind == "name" and t.text in CONTINUOUS and self.peek().text == "(":
            self.i += 2
            params = [self.expr()]
            while self.accept(","):
                params.append(self.expr())
            self.expect(")")
            kind = CONTINUOUS[t.text]
            try:
                return NamedContinuous(kind, tuple(params))
            except ValueError as exc:
                self.error(f"malformed distribution {t.text}: {exc}", t)
        return PmfExpr(self.expr())

    # -- data expressions --------------------------------------------------

    _BINARY_LEVELS = [
        ("||",),
        ("&&",),
        ("=", "!=", "<", "<=", ">", ">="),
        ("+", "-"),
        ("*", "/"),
    ]

    def expr(self, level=0):
        if level == len(self._BINARY_LEVELS):
            return self.unary()
        ops = self._BINARY_LEVELS[level]
        t = self.tok
        left = self.expr(level + 1)
        if level == 2:
            # comparisons do not chain
            if self.tok.kind == "op" and self.tok.text in ops:
                op = self.tok.text
                self.i += 1
                left = Binary(op, left, self.expr(level + 1), self.where(t))
            return left
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.tok.text
            self.i += 1
            left = Binary(op, left, self.expr(level + 1), self.where(t))
        return left

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text in ("-", "!"):
            self.i += 1
            return Unary(t.text, self.unary(), self.where(t))
        return self.power()

    def power(self):
        t = self.tok
        base = self.atom()
        if self.accept("^"):
            return Binary("^", base, self.unary(), self.where(t))
        return base

    def atom(self):
        t = self.tok
        where = self.where(t)
        if t.kind == "num":
            self.i += 1
            if any(c in t.text for c in ".eE"):
                return Lit(float(t.text), where)
            return Lit(int(t.text), where)
        if t.kind == "name":
            if t.text in ("true", "false"):
                self.i += 1
                return Lit(t.text == "true", where)
            if t.text == "inf":
                self.i += 1
                return Lit(float("inf"), where)
            if t.text == "if":
                self.i += 1
                self.expect("(")
                c = self.expr()
                self.expect(",")
                x = self.expr()
                self.expect(",")
                y = self.expr()
                self.expect(")")
                return IfExpr(c, x, y, where)
            if t.text in KEYWORDS:
                self.error(f"unexpected keyword {t.text!r}")
            self.i += 1
            return Var(t.text, where)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error(f"expected an expression, found {t.text or 'end of input'!r}")


# ---------------------------------------------------------------------------
# Post-processing: name resolution and sum narrowing
# ---------------------------------------------------------------------------

def _map_proc(p, fn):
    """Rebuild ``p`` bottom-up, applying ``fn`` to every rebuilt node."""
    if isinstance(p, (Seq, Alt)):
        p = replace(p, left=_map_proc(p.left, fn), right=_map_proc(p.right, fn))
    elif isinstance(p, Cond):
        p = replace(p, then=_map_proc(p.then, fn), orelse=_map_proc(p.orelse, fn))
    elif isinstance(p, (Sum, Dist)):
        p = replace(p, body=_map_proc(p.body, fn))
    return fn(p)


def _resolver(action_names):
    def resolve(p):
        if isinstance(p, ProcRef) and p.name in action_names:
            return Action(p.name, p.args, p.pos)
        return p
    return resolve


def _bounds(cond, var):
    """Integer bounds on ``var`` implied by a conjunction of simple comparisons.

    Returns ``(lo, hi)`` with ``None`` for a missing side, or ``None`` when the
    condition has a conjunct that is not of the recognised form.
    """
    if isinstance(cond, Binary) and cond.op == "&&":
        a = _bounds(cond.left, var)
        b = _bounds(cond.right, var)
        if a is None or b is None:
            return None
        lo = max((x for x in (a[0], b[0]) if x is not None), default=None)
        hi = min((x for x in (a[1], b[1]) if x is not None), default=None)
        return lo, hi
    if not (isinstance(cond, Binary) and cond.op in ("<", "<=", ">", ">=")):
        return None
    op, l, r = cond.op, cond.left, cond.right
    if isinstance(r, Var) and r.name == var and _int_lit(l) is not None:
        l, r = r, l
        op = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}[op]
    k = _int_lit(r)
    if not (isinstance(l, Var) and l.name == var) or k is None:
        return None
    return {"<": (None, k - 1), "<=": (None, k), ">": (k + 1, None), ">=": (k, None)}[op]


def _int_lit(e):
    if isinstance(e, Lit) and type(e.value) is int:
        return e.value
    if isinstance(e, Unary) and e.op == "-" and isinstance(e.operand, Lit) and type(e.operand.value) is int:
        return -e.operand.value
    return None


def narrow_sum(p):
    """Rewrite ``sum n:Nat.(n < k) -> q <> delta`` into a sum over ``[0..k-1]``.

    Only applies when the else branch is ``delta`` and the condition is a
    conjunction of ``var < k``, ``var <= k`` (and, for ``Int``, lower
    bounds).  The condition is kept; it is true on the whole range.
    """
    if not (isinstance(p, Sum) and p.sort.name in ("Nat", "Int")
            and isinstance(p.body, Cond) and isinstance(p.body.orelse, Delta)):
        return p
    b = _bounds(p.body.cond, p.var)
    if b is None:
        return p
    lo, hi = b
    if p.sort.name == "Nat":
        lo = 0 if lo is None else max(lo, 0)
    if lo is None or hi is None:
        return p
    if lo > hi:
        return Delta(p.pos)
    return replace(p, sort=Range(lo, hi))


def parse_spec(text: str) -> Spec:
    """Parse a specification.

    :param text: source text of a ``.prb`` file.
    :return: the :class:`Spec`; raises :class:`ParseError` carrying
             line and column on malformed input.
    """
    raw = Parser(text).spec()
    names = {a.name for a in raw.actions}
    resolve = _resolver(names)

    def post(p):
        return narrow_sum(resolve(p))

    equations = tuple(replace(eq, body=_map_proc(eq.body, post)) for eq in raw.equations)
    return Spec(raw.actions, equations, _map_proc(raw.init, post))


def parse_proc(text: str, action_names=()):
    """Parse a lone process expression (handy in tests and the REPL)."""
    parser = Parser(text)
    p = parser.proc()
    if parser.tok.kind != "eof":
        parser.error(f"unexpected {parser.tok.text!r}")
    resolve = _resolver(set(action_names))
    return _map_proc(p, lambda q: narrow_sum(resolve(q)))


def parse_expr(text: str):
    parser = Parser(text)
    e = parser.expr()
    if parser.tok.kind != "eof":
        parser.error(f"unexpected {parser.tok.text!r}")
    return e


def parse_density(text: str):
    parser = Parser(text)
    d = parser.density()
    if parser.tok.kind != "eof":
        parser.error(f"unexpected {parser.tok.text!r}")
    return d
