"""Independent reference computations used by the tests.

Nothing here calls the product or refinement code under test; the
oracles only share the data evaluator and the AST types.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from probe.data import eval_expr
from probe.distributions import FinitePMF
from probe.lang.ast import (
    BOOL, Action, Alt, Binary, Cond, Delta, Dist, IfExpr, Lit, PmfExpr, Range, Seq, Sum, Var,
)
from probe.semantics import DEADLOCK, PLTS, TERMINATED, Combine, NDState, Prefix, Semantics


# ---------------------------------------------------------------------------
# Random processes without recursion
# ---------------------------------------------------------------------------

ACTIONS = ("a", "b", "c")


def _domain(sort):
    if sort.name == "Bool":
        return [False, True]
    return list(range(sort.lo, sort.hi + 1))


def random_proc(rng: random.Random, depth: int, scope=()):
    """A process of nesting depth at most ``depth`` built from the finite fragment.

    ``scope`` lists ``(variable, sort)`` pairs bound above; they show up in
    action arguments, conditions and masses.
    """
    leaf = depth <= 0 or rng.random() < 0.25
    if leaf:
        r = rng.random()
        if r < 0.1:
            return Delta()
        name = rng.choice(ACTIONS)
        ints = [v for v, s in scope if s.name != "Bool"]
        if ints and rng.random() < 0.5:
            return Action(name + "1", (Var(rng.choice(ints)),))
        return Action(name)
    kind = rng.choice(["seq", "alt", "alt", "cond", "dist", "dist", "sum"])
    if kind == "seq":
        return Seq(random_proc(rng, depth - 1, scope), random_proc(rng, depth - 1, scope))
    if kind == "alt":
        return Alt(random_proc(rng, depth - 1, scope), random_proc(rng, depth - 1, scope))
    if kind == "cond":
        return Cond(_random_cond(rng, scope), random_proc(rng, depth - 1, scope),
                    random_proc(rng, depth - 1, scope))
    var = f"v{depth}{rng.randrange(100)}"
    if kind == "sum":
        sort = Range(1, rng.randint(1, 2))
        return Sum(var, sort, random_proc(rng, depth - 1, scope + ((var, sort),)))
    if rng.random() < 0.5:
        sort = BOOL
        p = Fraction(rng.randint(1, 4), 5)
        expr = IfExpr(Var(var), Lit(p), Lit(1 - p))
    else:
        sort = Range(0, rng.randint(0, 2))
        expr = Lit(Fraction(1, sort.hi - sort.lo + 1))
    return Dist(var, sort, PmfExpr(expr), random_proc(rng, depth - 1, scope + ((var, sort),)))


def _random_cond(rng, scope):
    if not scope or rng.random() < 0.2:
        return Lit(rng.random() < 0.5)
    v, s = rng.choice(scope)
    if s.name == "Bool":
        return Var(v)
    return Binary("=", Var(v), Lit(rng.choice(_domain(s))))


# ---------------------------------------------------------------------------
# Product rule: enumerate every joint resolution at once
# ---------------------------------------------------------------------------

def _slots(p, env, path, out):
    """Collect every Dist reachable before the first action, both Cond branches included."""
    if isinstance(p, Seq):
        _slots(p.left, env, path + ("L",), out)
    elif isinstance(p, Alt):
        _slots(p.left, env, path + ("l",), out)
        _slots(p.right, env, path + ("r",), out)
    elif isinstance(p, Cond):
        _slots(p.then, env, path + ("t",), out)
        _slots(p.orelse, env, path + ("e",), out)
    elif isinstance(p, Sum):
        for v in _domain(p.sort):
            _slots(p.body, {**env, p.var: v}, path + ("s", v), out)
    elif isinstance(p, Dist):
        out.append((path, p))
        # nested slots see this variable through the assignment, not ``env``
        _slots(p.body, env, path + ("d",), out)


def _resolve(p, env, path, assignment, weight):
    """Enabled prefixes ``(name, values, continuation)`` of ``p`` under a full assignment.

    ``weight`` is a one-element list receiving the mass of every visited
    and unvisited Dist node.
    """
    if isinstance(p, Delta):
        return []
    if isinstance(p, Action):
        return [(p.name, tuple(eval_expr(a, env) for a in p.args), ())]
    if isinstance(p, Seq):
        return [(n, vals, cont + ((p.right, env),))
                for n, vals, cont in _resolve(p.left, env, path + ("L",), assignment, weight)]
    if isinstance(p, Alt):
        return (_resolve(p.left, env, path + ("l",), assignment, weight)
                + _resolve(p.right, env, path + ("r",), assignment, weight))
    if isinstance(p, Cond):
        taken = eval_expr(p.cond, env)
        a = _resolve(p.then, env, path + ("t",), assignment, weight)
        b = _resolve(p.orelse, env, path + ("e",), assignment, weight)
        return a if taken else b
    if isinstance(p, Sum):
        out = []
        for v in _domain(p.sort):
            out += _resolve(p.body, {**env, p.var: v}, path + ("s", v), assignment, weight)
        return out
    if isinstance(p, Dist):
        v = assignment[path]
        inner = {**env, p.var: v}
        weight[0] *= eval_expr(p.density.expr, inner)
        return _resolve(p.body, inner, path + ("d",), assignment, weight)
    raise TypeError(p)


def _canon(dist):
    """A hashable canonical form of ``{observation: mass}``."""
    return tuple(sorted(((o, m) for o, m in dist.items() if m != 0), key=repr))


def oracle_distribution(p, env=None, depth: int = 4):
    """``{observation: mass}`` by brute-force enumeration of all Dist values.

    An observation is the sorted multiset of ``(name, values, next)`` for
    the enabled prefixes, where ``next`` is the canonical observation
    distribution after the action (``"tick"`` for termination).
    """
    env = dict(env or {})
    slots = []
    _slots(p, env, (), slots)
    out = {}
    domains = [_domain(d.sort) for _, d in slots]
    for values in itertools.product(*domains):
        assignment = {path: v for (path, _), v in zip(slots, values)}
        weight = [Fraction(1)]
        prefixes = _resolve(p, env, (), assignment, weight)
        if weight[0] == 0:
            continue
        obs = tuple(sorted(((n, vals, _after(cont, depth)) for n, vals, cont in prefixes), key=repr))
        out[obs] = out.get(obs, 0) + weight[0]
    return dict(_canon(out))


def _after(cont, depth):
    if not cont:
        return "tick"
    if depth <= 0:
        return "..."
    (first, _), rest = cont[0], cont[1:]
    proc = first
    for q, _ in rest:
        proc = Seq(proc, q)
    # continuations in ``rest`` were captured under their own environments; the
    # generator never rebinds a name, so merging the environments is exact
    merged = {}
    for _, e in cont:
        merged.update(e)
    return _canon(oracle_distribution(proc, merged, depth - 1))


def engine_distribution(sem: Semantics, p, env=None, depth: int = 4):
    """The engine's behavioural distribution projected onto oracle observations."""
    out = {}
    for state, m in sem.distribution(p, env or {}).items():
        obs = _observe(sem, state, depth)
        out[obs] = out.get(obs, 0) + m
    return dict(_canon(out))


def _observe(sem, state, depth):
    if state is DEADLOCK:
        members = []
    elif isinstance(state, Combine):
        members = list(state.members)
    else:
        members = [state]
    obs = []
    for m in members:
        if not isinstance(m, Prefix):
            raise AssertionError(f"unexpected member {m!r}")
        if not m.conts:
            nxt = "tick"
        elif depth <= 0:
            nxt = "..."
        else:
            acc = {}
            for s, q in sem.continuation(m.conts).items():
                if s is TERMINATED:
                    o = "tick"
                else:
                    o = _observe(sem, s, depth - 1)
                acc[o] = acc.get(o, 0) + q
            nxt = _canon(acc)
        obs.append((m.name, tuple(m.values), nxt))
    return tuple(sorted(obs, key=repr))


# ---------------------------------------------------------------------------
# Bisimulation: greatest fixed point over state pairs
# ---------------------------------------------------------------------------

def _status(s):
    return (s.terminated, s.unexplored)


def naive_bisimulation(plts: PLTS):
    """The largest probabilistic bisimulation as a set of state pairs."""
    n = len(plts.nd_states)
    rel = {(s, t) for s in range(n) for t in range(n)
           if _status(plts.nd_states[s]) == _status(plts.nd_states[t])}
    while True:
        classes = {s: frozenset(t for t in range(n) if (s, t) in rel) for s in range(n)}

        def same(mu, nu):
            for c in set(classes.values()):
                if sum(mu[x] for x in c) != sum(nu[x] for x in c):
                    return False
            return True

        def matched(s, t):
            for label, pid in plts.nd_states[s].transitions:
                mu = plts.prob_states[pid]
                if not any(l2 == label and same(mu, plts.prob_states[p2])
                           for l2, p2 in plts.nd_states[t].transitions):
                    return False
            return True

        new = {(s, t) for s, t in rel if matched(s, t) and matched(t, s)}
        if new == rel:
            return rel
        rel = new


def random_plts(rng: random.Random, max_nd: int = 6, labels=("a", "b")) -> PLTS:
    n = rng.randint(1, max_nd)
    n_prob = rng.randint(1, 4)
    prob = []
    for _ in range(n_prob):
        k = rng.randint(1, min(n, 3))
        targets = rng.sample(range(n), k)
        weights = [rng.randint(1, 3) for _ in targets]
        total = sum(weights)
        prob.append(FinitePMF((t, Fraction(w, total)) for t, w in zip(targets, weights)))
    nds = []
    for i in range(n):
        r = rng.random()
        s = NDState(f"s{i}")
        if r < 0.1:
            s.terminated = True
        elif r < 0.15:
            s.unexplored = True
        else:
            for _ in range(rng.randint(0, 2)):
                s.transitions.append((rng.choice(labels), rng.randrange(n_prob)))
        nds.append(s)
    return PLTS(prob, nds, rng.randrange(n_prob), any(s.unexplored for s in nds))


def permuted(plts: PLTS, rng: random.Random) -> PLTS:
    """The same system with nd-state ids shuffled."""
    n = len(plts.nd_states)
    perm = list(range(n))
    rng.shuffle(perm)
    prob = [FinitePMF((perm[nd], p) for nd, p in pmf.items()) for pmf in plts.prob_states]
    nds = [None] * n
    for i, s in enumerate(plts.nd_states):
        nds[perm[i]] = NDState(s.fingerprint, list(s.transitions), s.terminated, s.unexplored)
    return PLTS(prob, nds, plts.initial, plts.truncated)


def with_clone(plts: PLTS, rng: random.Random) -> PLTS:
    """Duplicate one nd-state and split every incoming mass between the copies.

    The result is bisimilar to the input but not isomorphic to it.
    """
    n = len(plts.nd_states)
    victim = rng.randrange(n)
    src = plts.nd_states[victim]
    nds = [NDState(s.fingerprint, list(s.transitions), s.terminated, s.unexplored)
           for s in plts.nd_states]
    nds.append(NDState(src.fingerprint + "'", list(src.transitions), src.terminated, src.unexplored))
    prob = []
    for pmf in plts.prob_states:
        pairs = []
        for nd, p in pmf.items():
            if nd == victim:
                pairs += [(nd, p / 3), (n, 2 * p / 3)]
            else:
                pairs.append((nd, p))
        prob.append(FinitePMF(pairs))
    return PLTS(prob, nds, plts.initial, plts.truncated)


def naive_equivalent(a: PLTS, b: PLTS) -> bool:
    from probe.bisimulation import disjoint_union
    u = disjoint_union(a, b)
    rel = naive_bisimulation(u)
    n = len(u.nd_states)
    mu, nu = u.prob_states[a.initial], u.prob_states[b.initial + len(a.prob_states)]
    for s in range(n):
        c = [t for t in range(n) if (s, t) in rel]
        if sum(mu[x] for x in c) != sum(nu[x] for x in c):
            return False
    return True
