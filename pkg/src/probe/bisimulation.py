"""Probabilistic strong bisimulation by signature refinement.

Two nd-states are bisimilar when they have the same status (normal,
terminated, unexplored) and every transition of one is matched by a
transition of the other with the same label whose target distribution
puts the same mass on every equivalence class.  The coarsest such
partition is computed by repeatedly splitting blocks on the signature

    { (label, lifted target distribution) : s --label--> mu }

until the number of blocks stops growing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from probe.distributions import FinitePMF
from probe.semantics import PLTS, NDState

MASS_DIGITS = 9  # float masses compare to 1e-9


@dataclass
class Partition:
    block_of: List[int]  # block id per nd-state
    count: int

    def blocks(self):
        out = [[] for _ in range(self.count)]
        for s, b in enumerate(self.block_of):
            out[b].append(s)
        return out


def _status(s: NDState) -> int:
    if s.unexplored:
        return 2
    return 1 if s.terminated else 0


def _mass_key(m):
    return round(m, MASS_DIGITS) if isinstance(m, float) else m


def lift(pmf: FinitePMF, block_of) -> tuple:
    """Mass per block as a sorted tuple of ``(block, mass)``."""
    acc = {}
    for nd, p in pmf.items():
        b = block_of[nd]
        acc[b] = acc.get(b, 0) + p
    return tuple(sorted((b, _mass_key(m)) for b, m in acc.items()))


def _renumber(keys) -> List[int]:
    """Map arbitrary hashable keys to block ids in order of first occurrence."""
    ids = {}
    return [ids.setdefault(k, len(ids)) for k in keys]


def coarsest_partition(plts: PLTS) -> Partition:
    block_of = _renumber(_status(s) for s in plts.nd_states)
    count = len(set(block_of))
    while True:
        lifted = [lift(pmf, block_of) for pmf in plts.prob_states]
        sigs = []
        for s, state in enumerate(plts.nd_states):
            sig = frozenset((label, lifted[pid]) for label, pid in state.transitions)
            sigs.append((block_of[s], sig))
        new = _renumber(sigs)
        new_count = max(new, default=-1) + 1
        block_of = new
        if new_count == count:
            return Partition(block_of, count)
        count = new_count


def minimize(plts: PLTS):
    """Quotient of ``plts`` by the coarsest bisimulation.

    :return: ``(quotient, partition)``; the quotient has one nd-state per
        block, distributions lifted to blocks and duplicate transitions
        merged.
    """
    part = coarsest_partition(plts)
    reps = [None] * part.count
    for s, b in enumerate(part.block_of):
        if reps[b] is None:
            reps[b] = s

    prob_index, prob_states = {}, []

    def pid_of(pmf):
        key = lift(pmf, part.block_of)
        if key not in prob_index:
            prob_index[key] = len(prob_states)
            prob_states.append(FinitePMF(_exact_lift(pmf, part.block_of)))
        return prob_index[key]

    initial = pid_of(plts.prob_states[plts.initial])
    nd_states = []
    for b, s in enumerate(reps):
        src = plts.nd_states[s]
        edges = list(dict.fromkeys((label, pid_of(plts.prob_states[pid])) for label, pid in src.transitions))
        nd_states.append(NDState(src.fingerprint, edges, src.terminated, src.unexplored))
    quotient = PLTS(prob_states, nd_states, initial, plts.truncated)
    return quotient, part


def _exact_lift(pmf, block_of):
    acc = {}
    for nd, p in pmf.items():
        acc[block_of[nd]] = acc.get(block_of[nd], 0) + p
    return sorted(acc.items())


@dataclass(frozen=True)
class Verdict:
    equivalent: bool
    block: Optional[int] = None
    mass_a: object = None
    mass_b: object = None

    def __bool__(self):
        return self.equivalent

    def __str__(self):
        if self.equivalent:
            return "EQUIVALENT"
        return f"DISTINGUISHED block={self.block} massA={_fmt(self.mass_a)} massB={_fmt(self.mass_b)}"


def _fmt(m):
    from probe.semantics import _format_prob
    return _format_prob(m)


def disjoint_union(a: PLTS, b: PLTS) -> PLTS:
    na, pa = len(a.nd_states), len(a.prob_states)
    prob = list(a.prob_states)
    prob += [FinitePMF((nd + na, p) for nd, p in pmf.items()) for pmf in b.prob_states]
    nds = list(a.nd_states)
    nds += [NDState(f"B:{s.fingerprint}", [(l, pid + pa) for l, pid in s.transitions],
                    s.terminated, s.unexplored) for s in b.nd_states]
    return PLTS(prob, nds, a.initial, a.truncated or b.truncated)


def equivalent(a: PLTS, b: PLTS) -> Verdict:
    """Decide whether the initial distributions of two systems are bisimilar."""
    union = disjoint_union(a, b)
    part = coarsest_partition(union)
    init_a = dict(_exact_lift(union.prob_states[a.initial], part.block_of))
    init_b = dict(_exact_lift(union.prob_states[b.initial + len(a.prob_states)], part.block_of))
    for block in range(part.count):
        ma, mb = init_a.get(block, 0), init_b.get(block, 0)
        if _mass_key(ma) != _mass_key(mb):
            return Verdict(False, block, ma, mb)
    return Verdict(True)
