"""Simulation of specifications by sampling.

Each run resolves the probabilistic choices of the current process the
way the product semantics does (every summand of ``+`` and of a finite
``sum`` draws independently), then lets a scheduler pick one of the
enabled transitions.  Run ``k`` draws from ``RngStream(seed, k)``, so a
report depends only on ``(spec, scheduler, runs, max_steps, seed)`` and
not on how runs are spread over worker processes.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Dict, List, Optional

from probe.data import check_member, enumerate_sort, eval_expr
from probe.distributions import (
    CumulativeTable, RngStream, check_continuous_params, pmf_from_expr,
    sample_continuous, sample_countable,
)
from probe.errors import EvalError, SemanticError, SimulationError
from probe.lang.ast import (
    Action, Alt, Cond, Delta, Dist, NamedContinuous, ProcRef, Seq,
    Spec, Sum, Terminated, expr_free_vars,
)
from probe.semantics import (
    DEADLOCK, TERMINATED, Closure, Combine, Prefix, combine, seq_tail,
)

DEFAULT_SEED = 0xC0FFEE
Z95 = NormalDist().inv_cdf(0.975)


@dataclass(frozen=True)
class Scheduler:
    """How nondeterminism is resolved during simulation.

    ``policy`` is ``"uniform"`` (uniform over enabled transitions) or
    ``"fixed"`` (always transition ``index`` in canonical order, clamped
    to the last one).  ``resolvers`` maps the variable of an infinite
    ``sum`` to the density its value is drawn from.
    """
    policy: str = "uniform"
    index: int = 0
    resolvers: tuple = ()  # of (variable, DensitySpec)

    def __post_init__(self):
        if self.policy not in ("uniform", "fixed"):
            raise SimulationError(f"unknown scheduler policy {self.policy!r}")
        if self.index < 0:
            raise SimulationError("fixed scheduler index must be non-negative")

    def resolver(self, var):
        for name, density in self.resolvers:
            if name == var:
                return density
        return None

    def choose(self, n: int, rng: RngStream) -> int:
        if self.policy == "fixed":
            return min(self.index, n - 1)
        return rng.index(n) if n > 1 else 0


UNIFORM = Scheduler()


def parse_scheduler(specs) -> Scheduler:
    """Build a scheduler from ``uniform``, ``fixed:<k>`` and ``resolve:<var>=<density>`` items."""
    from probe.lang.parser import parse_density
    policy, index, resolvers = "uniform", 0, []
    for item in specs:
        item = item.strip()
        if item == "uniform":
            policy = "uniform"
        elif item.startswith("fixed:"):
            try:
                index = int(item[len("fixed:"):])
            except ValueError:
                raise SimulationError(f"bad scheduler {item!r}") from None
            policy = "fixed"
        elif item.startswith("resolve:") and "=" in item:
            var, _, density = item[len("resolve:"):].partition("=")
            resolvers.append((var.strip(), parse_density(density)))
        else:
            raise SimulationError(f"bad scheduler {item!r}")
    return Scheduler(policy, index, tuple(resolvers))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def wilson_interval(k: int, n: int, z: float = Z95):
    """Wilson score interval for ``k`` successes in ``n`` trials."""
    if n <= 0:
        raise ValueError("need at least one trial")
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class SimulationReport:
    runs: int
    max_steps: int
    seed: int
    counts: Dict[str, int]  # runs in which the action occurred at least once
    steps: Dict[str, int] = field(default_factory=dict)  # total occurrences
    traces: Optional[List[list]] = None

    def estimate(self, action: str):
        return estimate_action_probability(self, action)

    def to_dict(self):
        out = {"runs": self.runs, "max_steps": self.max_steps, "seed": self.seed, "actions": {}}
        for a in sorted(self.counts):
            p, (lo, hi) = estimate_action_probability(self, a)
            out["actions"][a] = {"count": self.counts[a], "estimate": p, "ci_low": lo, "ci_high": hi}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"runs: {self.runs}", f"max_steps: {self.max_steps}", f"seed: {self.seed}"]
        for a, row in self.to_dict()["actions"].items():
            lines.append(f"{a}: count={row['count']} estimate={row['estimate']:.6f} "
                         f"ci_low={row['ci_low']:.6f} ci_high={row['ci_high']:.6f}")
        return "\n".join(lines) + "\n"

    def trace_lines(self) -> str:
        return "".join(" ".join(t) + "\n" for t in (self.traces or []))


def estimate_action_probability(report: SimulationReport, action: str):
    """Fraction of runs in which ``action`` occurred, with a 95% Wilson interval."""
    if action not in report.counts:
        raise KeyError(f"unknown action {action!r}")
    k = report.counts[action]
    return k / report.runs, wilson_interval(k, report.runs)


# ---------------------------------------------------------------------------
# Sampling the semantics
# ---------------------------------------------------------------------------

class Sampler:
    """Draws concrete state terms from process expressions."""

    def __init__(self, spec: Spec, scheduler: Scheduler):
        self.spec = spec
        self.scheduler = scheduler
        self._tables: Dict[tuple, tuple] = {}
        self._free: Dict[int, tuple] = {}
        self._dispatch = {
            Delta: lambda p, env, rng: DEADLOCK,
            Terminated: lambda p, env, rng: TERMINATED,
            Action: self._action,
            Seq: self._seq,
            Alt: self._alt,
            Cond: self._cond,
            Sum: self._sum,
            Dist: self._dist,
            ProcRef: self._procref,
        }
        self._depth = 0

    def draw(self, p, env, rng: RngStream):
        self._depth += 1
        if self._depth > 10_000:
            raise SemanticError("unfolding depth exceeded while sampling (unguarded recursion?)")
        try:
            return self._dispatch[type(p)](p, env, rng)
        finally:
            self._depth -= 1

    def _action(self, p, env, rng):
        if not p.args:
            return Prefix(p.name, ())
        values = tuple(eval_expr(a, env) for a in p.args)
        decl = self.spec.action(p.name)
        if decl is not None and len(decl.sorts) == len(values):
            for s, v in zip(decl.sorts, values):
                check_member(s, v, f"argument of {p.name}")
        return Prefix(p.name, values)

    def _seq(self, p, env, rng):
        s = self.draw(p.left, env, rng)
        conts = (Closure(p.right, env),)
        if s is TERMINATED:
            return self.resume(conts, rng)
        return seq_tail(s, conts)

    def _alt(self, p, env, rng):
        return combine((self.draw(p.left, env, rng), self.draw(p.right, env, rng)))

    def _cond(self, p, env, rng):
        c = eval_expr(p.cond, env)
        if not isinstance(c, bool):
            raise EvalError("condition did not evaluate to a boolean")
        return self.draw(p.then if c else p.orelse, env, rng)

    def _sum(self, p, env, rng):
        if p.sort.is_finite:
            return combine([self.draw(p.body, {**env, p.var: v}, rng) for v in enumerate_sort(p.sort)])
        density = self.scheduler.resolver(p.var)
        if density is None:
            raise SimulationError(
                f"unresolved sum variable {p.var} (sum over {p.sort}); "
                f"add a resolver, e.g. resolve:{p.var}=<density>")
        v = self._draw_value(p.var, p.sort, density, env, rng)
        return self.draw(p.body, {**env, p.var: v}, rng)

    def _dist(self, p, env, rng):
        v = self._draw_value(p.var, p.sort, p.density, env, rng, node=p)
        return self.draw(p.body, {**env, p.var: v}, rng)

    def _procref(self, p, env, rng):
        eq = self.spec.equation(p.name)
        if eq is None:
            raise SemanticError(f"unknown process {p.name}")
        binding = {name: check_member(sort, eval_expr(a, env), f"argument {name} of {p.name}")
                   for (name, sort), a in zip(eq.params, p.args)}
        return self.draw(eq.body, binding, rng)

    def _table(self, p: Dist, env) -> CumulativeTable:
        free = self._free.get(id(p))
        if free is None:
            free = self._free[id(p)] = (p, tuple(sorted(expr_free_vars(p.density.expr) - {p.var})))
        key = (id(p),) + tuple((type(env[k]).__name__, env[k]) for k in free[1] if k in env)
        hit = self._tables.get(key)
        if hit is None:
            hit = self._tables[key] = (p, CumulativeTable(pmf_from_expr(p.var, p.sort, p.density.expr, env)))
        return hit[1]

    def _draw_value(self, var, sort, density, env, rng, node=None):
        if isinstance(density, NamedContinuous):
            if sort.name != "Real":
                raise SimulationError(f"continuous density for {var} needs sort Real")
            params = [eval_expr(x, env) for x in density.params]
            check_continuous_params(density.kind, params)
            return sample_continuous(density.kind, params, rng)
        if sort.is_finite:
            if node is not None:
                return self._table(node, env).draw(rng)
            return CumulativeTable(pmf_from_expr(var, sort, density.expr, env)).draw(rng)
        if sort.name in ("Nat", "Int"):
            return sample_countable(var, sort, density.expr, env, rng)
        raise SimulationError(f"mass expression over {sort} for {var} needs a continuous density")

    def resume(self, conts, rng: RngStream):
        """Draw the state reached after an action with continuation ``conts``."""
        while conts:
            first, rest = conts[0], conts[1:]
            s = self.draw(first.expr, first.env_dict(), rng)
            if s is not TERMINATED:
                return seq_tail(s, rest)
            conts = rest
        return TERMINATED


def _enabled(s):
    if isinstance(s, Prefix):
        return [s]
    if isinstance(s, Combine):
        return list(s.members)
    return []


def _run_chunk(spec, scheduler, start, stop, max_steps, seed, keep_traces):
    sampler = Sampler(spec, scheduler)
    counts, steps = {}, {}
    traces = [] if keep_traces else None
    for k in range(start, stop):
        rng = RngStream(seed, k)
        s = sampler.draw(spec.init, {}, rng)
        seen = set()
        trace = []
        for step in range(max_steps):
            enabled = _enabled(s)
            if not enabled:
                break
            chosen = enabled[scheduler.choose(len(enabled), rng)]
            name = chosen.name
            steps[name] = steps.get(name, 0) + 1
            seen.add(name)
            if keep_traces:
                trace.append(chosen.label)
            if step + 1 < max_steps:
                s = sampler.resume(chosen.conts, rng)
        for name in seen:
            counts[name] = counts.get(name, 0) + 1
        if keep_traces:
            traces.append(trace)
    return counts, steps, traces


def simulate(spec: Spec, sched: Scheduler = UNIFORM, runs: int = 10_000, max_steps: int = 100,
             seed: int = DEFAULT_SEED, jobs: int = 1, keep_traces: bool = False) -> SimulationReport:
    """Execute ``runs`` independent runs of at most ``max_steps`` actions.

    Action statistics count runs in which an action (by name) occurred at
    least once.  Every declared action is reported, including those that
    never occurred.
    """
    if runs <= 0 or max_steps < 0:
        raise SimulationError("runs must be positive and max_steps non-negative")
    for var, density in sched.resolvers:
        if not _binds_sum(spec, var):
            raise SimulationError(f"resolver for {var}: no sum binds this variable")
    jobs = max(1, min(jobs, runs))
    bounds = [(runs * i // jobs, runs * (i + 1) // jobs) for i in range(jobs)]
    if jobs == 1:
        parts = [_run_chunk(spec, sched, 0, runs, max_steps, seed, keep_traces)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_chunk, spec, sched, a, b, max_steps, seed, keep_traces)
                       for a, b in bounds]
            parts = [f.result() for f in futures]
    counts = {a.name: 0 for a in spec.actions}
    steps = {a.name: 0 for a in spec.actions}
    traces = [] if keep_traces else None
    for c, st, tr in parts:
        for a, n in c.items():
            counts[a] = counts.get(a, 0) + n
        for a, n in st.items():
            steps[a] = steps.get(a, 0) + n
        if keep_traces:
            traces.extend(tr)
    return SimulationReport(runs, max_steps, seed, counts, steps, traces)


def _binds_sum(spec: Spec, var: str) -> bool:
    def walk(p):
        if isinstance(p, Sum):
            return p.var == var or walk(p.body)
        if isinstance(p, (Seq, Alt)):
            return walk(p.left) or walk(p.right)
        if isinstance(p, Cond):
            return walk(p.then) or walk(p.orelse)
        if isinstance(p, Dist):
            return walk(p.body)
        return False
    return walk(spec.init) or any(walk(eq.body) for eq in spec.equations)
