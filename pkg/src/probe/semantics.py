"""Probabilistic transition-system semantics for the finite fragment.

A process expression denotes a distribution over *state terms*; a state
term offers action transitions, each leading to another distribution.
Choice is resolved jointly: for ``p + q`` the probabilistic choices of
both operands are made first, independently, and the resulting state is
the combination of the two residuals.  A finite ``sum`` is the n-fold
version of the same product.

State terms are kept in a normal form:

* the continuation of a sequential composition is pushed into every
  action prefix, so ``(a + b) . X`` resolves to ``Combine([a.X, b.X])``;
* combinations are flattened, sorted by their canonical key and stripped
  of deadlock members; ``Combine([])`` is deadlock and ``Combine([x])`` is
  ``x``.

Two state terms are equal iff their canonical keys are equal; the key
doubles as the fingerprint of a state in an explored system.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from probe.data import check_member, enumerate_sort, eval_expr
from probe.distributions import RESIDUAL, FinitePMF, pmf_from_expr
from probe.errors import EvalError, LimitExceeded, ProbeError, SemanticError
from probe.lang.ast import (
    Action, Alt, Cond, Delta, Dist, NamedContinuous, ProcRef, Seq, Spec, Sum,
    Terminated, proc_free_vars,
)
from probe.lang.printer import format_proc, format_value

UNEXPLORED = "<unexplored>"

DEFAULT_MAX_PRODUCT = 10**6
DEFAULT_MAX_SUPPORT = 64
DEFAULT_MAX_UNFOLD = 10_000


# ---------------------------------------------------------------------------
# State terms
# ---------------------------------------------------------------------------

class StateTerm:
    """Base class; equality, hashing and ordering go through ``key``."""

    __slots__ = ("_key",)

    @property
    def key(self) -> str:
        k = self._key
        if k is None:
            k = self._key = self._make_key()
        return k

    def __eq__(self, other):
        return isinstance(other, StateTerm) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"<{self.key}>"


class _Atom(StateTerm):
    __slots__ = ()

    def __init__(self, key):
        self._key = key


DEADLOCK = _Atom("delta")
TERMINATED = _Atom("tick")
# Mass of a countable distribution beyond the enumerated support.  Its
# behaviour is unknown, so it is an absorbing, unexplored state.
RESIDUAL_STATE = _Atom("residual")


_TEXT_CACHE: dict = {}


def _proc_text(p):
    hit = _TEXT_CACHE.get(id(p))
    if hit is not None and hit[0] is p:
        return hit[1]
    text = format_proc(p)
    _TEXT_CACHE[id(p)] = (p, text)
    return text


def _env_text(env) -> str:
    return ",".join(f"{k}={format_value(v)}" for k, v in env)


class Closure:
    """A process expression paired with values for its free variables."""

    __slots__ = ("expr", "env", "_key")

    def __init__(self, expr, env):
        free = proc_free_vars(expr)
        self.expr = expr
        self.env = tuple(sorted((k, v) for k, v in env.items() if k in free)) if free else ()
        self._key = None

    @property
    def key(self) -> str:
        if self._key is None:
            self._key = self._make_key()
        return self._key

    def _make_key(self):
        if isinstance(self.expr, ProcRef):
            try:
                env = dict(self.env)
                args = [format_value(eval_expr(a, env)) for a in self.expr.args]
                return f"{self.expr.name}({','.join(args)})" if args else self.expr.name
            except EvalError:
                pass
        text = _proc_text(self.expr)
        return f"{text}{{{_env_text(self.env)}}}" if self.env else text

    def env_dict(self):
        return dict(self.env)

    def __eq__(self, other):
        return isinstance(other, Closure) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Closure({self.key})"


def _conts_key(conts) -> str:
    return "; ".join(c.key for c in conts)


class Prefix(StateTerm):
    """Action ``label`` followed by the sequence of closures ``conts``.

    An empty continuation means successful termination after the action.
    """

    __slots__ = ("name", "values", "label", "conts")

    def __init__(self, name: str, values: tuple, conts: tuple = ()):
        self.name = name
        self.values = values
        self.label = make_label(name, values) if values else name
        self.conts = conts
        self._key = None

    def _make_key(self):
        return f"{self.label}.[{_conts_key(self.conts)}]"


class Combine(StateTerm):
    """Residual of a choice: the union of the members' transitions."""

    __slots__ = ("members",)

    def __init__(self, members):
        self.members = tuple(members)
        self._key = None

    def _make_key(self):
        return "{" + " + ".join(m.key for m in self.members) + "}"


def make_label(name: str, values) -> str:
    if not values:
        return name
    return f"{name}({','.join(format_value(v) for v in values)})"


def combine(terms) -> StateTerm:
    """Normalising constructor for combinations."""
    members = []
    for t in terms:
        if t is RESIDUAL_STATE:
            return RESIDUAL_STATE
        if t is DEADLOCK:
            continue
        if isinstance(t, Combine):
            members.extend(t.members)
        elif isinstance(t, Prefix):
            members.append(t)
        else:
            raise SemanticError(f"cannot combine state {t.key}")
    if not members:
        return DEADLOCK
    if len(members) == 1:
        return members[0]
    members.sort(key=lambda m: m.key)
    return Combine(members)


def seq_tail(s: StateTerm, conts: tuple) -> StateTerm:
    """``SeqTail(s, conts)`` in normal form (``s`` must not be terminated)."""
    if not conts or s is DEADLOCK or s is RESIDUAL_STATE:
        return s
    if isinstance(s, Prefix):
        return Prefix(s.name, s.values, s.conts + conts)
    if isinstance(s, Combine):
        return combine(seq_tail(m, conts) for m in s.members)
    raise SemanticError(f"cannot sequence after state {s.key}")


# ---------------------------------------------------------------------------
# Behavioural distributions
# ---------------------------------------------------------------------------

class Semantics:
    """Distribution semantics of one specification, with memoisation.

    :param spec: the specification providing process equations.
    :param max_product: bound on the support of an intermediate product
        distribution before merging.
    :param max_support: number of values enumerated for a countable
        (``Nat``/``Int``) distribution before the rest is lumped into an
        unexplored residual state.
    """

    def __init__(self, spec: Spec, max_product=DEFAULT_MAX_PRODUCT,
                 max_support=DEFAULT_MAX_SUPPORT, max_unfold=DEFAULT_MAX_UNFOLD):
        self.spec = spec
        self.max_product = max_product
        self.max_support = max_support
        self.max_unfold = max_unfold
        self._memo: Dict[str, FinitePMF] = {}
        self._cont_memo: Dict[str, FinitePMF] = {}
        self._unfolding: List[str] = []

    # -- public ------------------------------------------------------------

    def distribution(self, p, env=None) -> FinitePMF:
        """The behavioural distribution of ``p`` under ``env``."""
        c = Closure(p, env or {})
        hit = self._memo.get(c.key)
        if hit is None:
            hit = self._compute(p, c.env_dict())
            self._memo[c.key] = hit
        return hit

    def continuation(self, conts: tuple) -> FinitePMF:
        """Distribution reached after an action whose continuation is ``conts``."""
        if not conts:
            return FinitePMF.dirac(TERMINATED)
        key = _conts_key(conts)
        hit = self._cont_memo.get(key)
        if hit is None:
            first = conts[0]
            hit = self._append(self.distribution(first.expr, first.env_dict()), conts[1:])
            self._cont_memo[key] = hit
        return hit

    def transitions(self, s: StateTerm) -> List[Tuple[str, FinitePMF]]:
        if isinstance(s, Prefix):
            return [(s.label, self.continuation(s.conts))]
        if isinstance(s, Combine):
            out = []
            for m in s.members:
                out.extend(self.transitions(m))
            return out
        return []

    # -- rules -------------------------------------------------------------

    def _append(self, pmf: FinitePMF, conts: tuple) -> FinitePMF:
        if not conts:
            return pmf
        pairs = []
        for s, p in pmf.items():
            if s is TERMINATED:
                pairs.extend((t, p * q) for t, q in self.continuation(conts).items())
            else:
                pairs.append((seq_tail(s, conts), p))
        return FinitePMF(pairs)

    def _product(self, a: FinitePMF, b: FinitePMF) -> FinitePMF:
        if len(a) * len(b) > self.max_product:
            raise LimitExceeded(
                f"product support {len(a) * len(b)} exceeds the bound {self.max_product}")
        return FinitePMF((combine((s, t)), p * q) for s, p in a.items() for t, q in b.items())

    def _compute(self, p, env) -> FinitePMF:
        if isinstance(p, Delta):
            return FinitePMF.dirac(DEADLOCK)
        if isinstance(p, Terminated):
            return FinitePMF.dirac(TERMINATED)
        if isinstance(p, Action):
            return FinitePMF.dirac(Prefix(p.name, self._action_values(p, env)))
        if isinstance(p, Seq):
            return self._append(self.distribution(p.left, env), (Closure(p.right, env),))
        if isinstance(p, Alt):
            return self._product(self.distribution(p.left, env), self.distribution(p.right, env))
        if isinstance(p, Cond):
            c = eval_expr(p.cond, env)
            if not isinstance(c, bool):
                raise EvalError("condition did not evaluate to a boolean")
            return self.distribution(p.then if c else p.orelse, env)
        if isinstance(p, Sum):
            if not p.sort.is_finite:
                raise SemanticError(
                    f"sum over infinite sort: not finitely explorable (sum {p.var}:{p.sort})")
            acc = FinitePMF.dirac(DEADLOCK)
            for v in enumerate_sort(p.sort):
                acc = self._product(acc, self.distribution(p.body, {**env, p.var: v}))
            return acc
        if isinstance(p, Dist):
            if isinstance(p.density, NamedContinuous) or p.sort.name == "Real":
                raise SemanticError(
                    f"continuous distribution over {p.var}:{p.sort} is not finitely explorable")
            pmf = pmf_from_expr(p.var, p.sort, p.density.expr, env, max_support=self.max_support)
            pairs = []
            for v, w in pmf.items():
                if v is RESIDUAL:
                    pairs.append((RESIDUAL_STATE, w))
                    continue
                pairs.extend((t, w * q) for t, q in self.distribution(p.body, {**env, p.var: v}).items())
            return FinitePMF(pairs)
        if isinstance(p, ProcRef):
            return self._unfold(p, env)
        raise TypeError(f"not a process expression: {p!r}")

    def _action_values(self, p: Action, env) -> tuple:
        values = tuple(eval_expr(a, env) for a in p.args)
        decl = self.spec.action(p.name)
        if decl is not None and len(decl.sorts) == len(values):
            for s, v in zip(decl.sorts, values):
                check_member(s, v, f"argument of {p.name}")
        return values

    def _unfold(self, p: ProcRef, env) -> FinitePMF:
        eq = self.spec.equation(p.name)
        if eq is None:
            raise SemanticError(f"unknown process {p.name}")
        if len(eq.params) != len(p.args):
            raise SemanticError(f"process {p.name} expects {len(eq.params)} argument(s)")
        binding = {}
        for (name, sort), a in zip(eq.params, p.args):
            binding[name] = check_member(sort, eval_expr(a, env), f"argument {name} of {p.name}")
        tag = Closure(p, env).key
        if tag in self._unfolding:
            raise SemanticError(f"unguarded recursion at {p.name}")
        if len(self._unfolding) >= self.max_unfold:
            raise LimitExceeded(f"unfolding depth exceeds {self.max_unfold}")
        self._unfolding.append(tag)
        try:
            return self.distribution(eq.body, binding)
        finally:
            self._unfolding.pop()


def behavioural_distribution(p, env, defs: Spec, **options) -> FinitePMF:
    """Distribution over state terms denoted by ``p`` in ``env``."""
    return Semantics(defs, **options).distribution(p, env)


def enabled_transitions(s: StateTerm, defs: Spec, **options):
    """Action transitions of a resolved state term as ``(label, distribution)`` pairs."""
    return Semantics(defs, **options).transitions(s)


# ---------------------------------------------------------------------------
# Explicit transition systems
# ---------------------------------------------------------------------------

@dataclass
class NDState:
    fingerprint: str
    transitions: list = field(default_factory=list)  # of (label, prob-state id)
    terminated: bool = False
    unexplored: bool = False


@dataclass
class PLTS:
    """Alternating system: distributions over nd-states, nd-states with action edges."""
    prob_states: list  # of FinitePMF over nd-state ids
    nd_states: list  # of NDState
    initial: int
    truncated: bool = False

    @property
    def transition_count(self):
        return sum(len(s.transitions) for s in self.nd_states)

    def summary(self) -> str:
        def n(k, word):
            return f"{k} {word}" + ("" if k == 1 else "s")
        return ", ".join([n(len(self.nd_states), "nd-state"), n(len(self.prob_states), "prob-state"),
                          n(self.transition_count, "transition")])

    def check(self):
        """Assert the structural invariants."""
        n_nd, n_pr = len(self.nd_states), len(self.prob_states)
        assert 0 <= self.initial < n_pr
        for pmf in self.prob_states:
            assert all(0 <= i < n_nd for i in pmf)
        seen = set()
        for s in self.nd_states:
            assert s.fingerprint not in seen, s.fingerprint
            seen.add(s.fingerprint)
            if s.terminated or s.unexplored:
                assert not s.transitions
            assert all(0 <= pid < n_pr for _, pid in s.transitions)


@dataclass(frozen=True)
class ExploreLimits:
    max_nd_states: int = 100_000
    max_depth: int = 1_000_000
    max_support: int = DEFAULT_MAX_SUPPORT
    max_product: int = DEFAULT_MAX_PRODUCT

    def __post_init__(self):
        for name in ("max_nd_states", "max_depth", "max_support", "max_product"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def explore(spec: Spec, limits: ExploreLimits = ExploreLimits()) -> PLTS:
    """Breadth-first construction of the reachable transition system.

    nd-states at depth ``max_depth`` (actions from the start) and any
    beyond the first ``max_nd_states`` are kept but flagged unexplored.
    """
    sem = Semantics(spec, max_product=limits.max_product, max_support=limits.max_support)
    nd_index: Dict[StateTerm, int] = {}
    nd_states: List[NDState] = []
    terms: List[StateTerm] = []
    prob_index: Dict[tuple, int] = {}
    prob_states: List[FinitePMF] = []
    queue = deque()
    truncated = False

    def nd_id(term, depth):
        nonlocal truncated
        i = nd_index.get(term)
        if i is not None:
            return i
        i = len(nd_states)
        nd_index[term] = i
        terms.append(term)
        state = NDState(term.key, terminated=term is TERMINATED)
        nd_states.append(state)
        if term is RESIDUAL_STATE:
            state.unexplored = True
            truncated = True
        elif i >= limits.max_nd_states:
            state.unexplored = True
            truncated = True
        elif term is not TERMINATED and term is not DEADLOCK:
            queue.append((i, term, depth))
        return i

    def prob_id(pmf, depth):
        pairs = [(nd_id(t, depth), p) for t, p in sorted(pmf.items(), key=lambda tp: tp[0].key)]
        key = tuple(sorted(pairs, key=lambda ip: ip[0]))
        pid = prob_index.get(key)
        if pid is None:
            pid = len(prob_states)
            prob_index[key] = pid
            prob_states.append(FinitePMF(key))
        return pid

    initial = prob_id(sem.distribution(spec.init, {}), 0)
    while queue:
        i, term, depth = queue.popleft()
        if depth >= limits.max_depth:
            nd_states[i].unexplored = True
            truncated = True
            continue
        for label, pmf in sem.transitions(term):
            nd_states[i].transitions.append((label, prob_id(pmf, depth + 1)))

    plts = PLTS(prob_states, nd_states, initial, truncated)
    plts.terms = terms
    return plts


def bounded_trace_distribution(plts: PLTS, length: int) -> Dict[tuple, object]:
    """Distribution over traces of at most ``length`` actions.

    A trace stops early when it reaches a terminated or deadlocked state;
    reaching an unexplored state appends :data:`UNEXPLORED`.  Only defined
    for systems with at most one distinct transition per nd-state.
    """
    if length < 0:
        raise ValueError("length must be non-negative")
    result = defaultdict(int)
    single = {}

    def only_transition(nd):
        if nd not in single:
            s = plts.nd_states[nd]
            edges = list(dict.fromkeys(s.transitions))
            if len(edges) > 1:
                raise SemanticError(f"nondeterministic system at state {nd} ({s.fingerprint})")
            single[nd] = edges[0] if edges else None
        return single[nd]

    stack = [(plts.initial, (), 1)]
    while stack:
        pid, trace, mass = stack.pop()
        for nd, p in plts.prob_states[pid].items():
            m = mass * p
            if len(trace) == length:
                result[trace] += m
                continue
            if plts.nd_states[nd].unexplored:
                result[trace + (UNEXPLORED,)] += m
                continue
            edge = only_transition(nd)
            if edge is None:
                result[trace] += m
            else:
                stack.append((edge[1], trace + (edge[0],), m))
    return dict(sorted(result.items()))


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def _format_prob(p) -> str:
    if isinstance(p, float):
        return repr(p)
    p = Fraction(p)
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def write_plts(plts: PLTS) -> str:
    lines = [f"pdes ({plts.initial}, {len(plts.prob_states)}, {len(plts.nd_states)})"]
    for pid, pmf in enumerate(plts.prob_states):
        for nd, p in pmf.items():
            lines.append(f"P {pid} {nd} {_format_prob(p)}")
    for nd, s in enumerate(plts.nd_states):
        for label, pid in s.transitions:
            lines.append(f'T {nd} "{label}" {pid}')
    for nd, s in enumerate(plts.nd_states):
        if s.terminated:
            lines.append(f"F {nd} terminated")
        if s.unexplored:
            lines.append(f"F {nd} unexplored")
    return "\n".join(lines) + "\n"


def _parse_prob(text: str):
    if any(c in text for c in ".eEn"):
        return float(text)
    return Fraction(text)


def read_plts(text: str) -> PLTS:
    import re
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ProbeError("empty PLTS file")
    m = re.fullmatch(r"\s*pdes\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*", lines[0])
    if m is None:
        raise ProbeError(f"bad header: {lines[0]!r}")
    initial, n_prob, n_nd = (int(x) for x in m.groups())
    entries = [[] for _ in range(n_prob)]
    nd_states = [NDState(f"s{i}") for i in range(n_nd)]
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            if line.startswith("P "):
                _, pid, nd, p = line.split()
                entries[int(pid)].append((int(nd), _parse_prob(p)))
            elif line.startswith("T "):
                m = re.fullmatch(r'T (\d+) "([^"]*)" (\d+)', line.strip())
                if m is None:
                    raise ValueError(line)
                nd_states[int(m.group(1))].transitions.append((m.group(2), int(m.group(3))))
            elif line.startswith("F "):
                _, nd, flag = line.split()
                if flag not in ("terminated", "unexplored"):
                    raise ValueError(flag)
                setattr(nd_states[int(nd)], flag, True)
            else:
                raise ValueError(line)
        except (ValueError, IndexError) as exc:
            raise ProbeError(f"line {lineno}: malformed PLTS entry ({exc})") from None
    plts = PLTS([FinitePMF(e) for e in entries], nd_states, initial,
                truncated=any(s.unexplored for s in nd_states))
    plts.check()
    return plts
