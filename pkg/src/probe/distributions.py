"""Finite probability mass functions and sampling.

:class:`FinitePMF` checks its own normalisation when it is built, exactly
for rational masses and to within :data:`FLOAT_TOLERANCE` once a float is
involved.  :class:`RngStream` is a reproducible random stream keyed by
``(seed, stream index)``; it wraps numpy's counter-based Philox generator
so that stream ``k`` never depends on how much stream ``k - 1`` consumed.
"""

from __future__ import annotations

import bisect
import contextlib
import functools
import math
import threading
from fractions import Fraction
from statistics import NormalDist
from typing import Iterable

import numpy as np

from probe.data import countable_values, enumerate_sort, eval_expr
from probe.errors import DistributionError, EvalError, NormalizationError
from probe.lang.ast import NamedContinuous, PmfExpr, Sort

FLOAT_TOLERANCE = 1e-9
MIN_ACCEPTANCE = 1e-6

_audits = []


@contextlib.contextmanager
def audit():
    """Record every :class:`FinitePMF` built in the block.

    Yields a list that receives the tuple of masses of each PMF, so that
    callers can re-check normalisation independently of the constructor.
    """
    log = []
    _audits.append(log)
    try:
        yield log
    finally:
        _audits.remove(log)


def is_normalized(total, exact: bool) -> bool:
    if exact:
        return total == 1
    return abs(total - 1) <= FLOAT_TOLERANCE


class FinitePMF:
    """An immutable finite distribution over hashable outcomes.

    Outcomes keep the order in which they were first seen.  Duplicate
    outcomes are merged and zero masses dropped.
    """

    __slots__ = ("_mass", "exact")

    def __init__(self, pairs: Iterable = ()):
        mass = {}
        for outcome, p in pairs:
            if p < 0:
                raise DistributionError(f"negative mass {p} for {outcome!r}")
            if outcome in mass:
                mass[outcome] = mass[outcome] + p
            else:
                mass[outcome] = p
        mass = {o: p for o, p in mass.items() if p != 0}
        exact = all(not isinstance(p, float) for p in mass.values())
        total = sum(mass.values(), Fraction(0) if exact else 0.0)
        if not is_normalized(total, exact):
            raise NormalizationError(f"distribution not normalized: total mass {total}")
        for p in mass.values():
            if p > 1 + (0 if exact else FLOAT_TOLERANCE):
                raise DistributionError(f"mass {p} exceeds 1")
        for log in _audits:
            log.append(tuple(mass.values()))
        self._mass = mass
        self.exact = exact

    @classmethod
    def dirac(cls, outcome):
        return cls([(outcome, 1)])

    def items(self):
        return self._mass.items()

    def outcomes(self):
        return list(self._mass)

    def __getitem__(self, outcome):
        return self._mass.get(outcome, 0)

    def __len__(self):
        return len(self._mass)

    def __iter__(self):
        return iter(self._mass)

    def __eq__(self, other):
        return isinstance(other, FinitePMF) and self._mass == other._mass

    def __hash__(self):
        return hash(frozenset(self._mass.items()))

    def total(self):
        return sum(self._mass.values())

    def map(self, fn):
        """Push the distribution forward through ``fn``; equal images merge."""
        return FinitePMF((fn(o), p) for o, p in self._mass.items())

    def __repr__(self):
        body = ", ".join(f"{o!r}: {p}" for o, p in self._mass.items())
        return f"FinitePMF({{{body}}})"


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

class RngStream:
    """Reproducible uniform stream identified by ``(seed, stream)``.

    Uniforms come from the Philox-4x64 counter-based generator keyed with
    the two 64-bit words.  Draws are served from blocks of :attr:`BLOCK`
    values; block ``b`` is generated from counter ``b * BLOCK / 4``, so the
    sequence is a pure function of the key and identical on every
    platform.  A single bit generator per thread is re-keyed on each
    refill because constructing one per stream is comparatively slow.
    """

    BLOCK = 64

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream = int(stream) & 0xFFFFFFFFFFFFFFFF
        self._block = 0
        self._buf = ()
        self._next = self.BLOCK

    def _refill(self):
        bitgen, gen = _philox()
        bitgen.state = {
            "bit_generator": "Philox",
            "state": {"counter": np.array([self._block * (self.BLOCK // 4), 0, 0, 0], dtype=np.uint64),
                      "key": np.array([self.seed, self.stream], dtype=np.uint64)},
            "buffer": np.zeros(4, dtype=np.uint64), "buffer_pos": 4,
            "has_uint32": 0, "uinteger": 0,
        }
        self._buf = gen.random(self.BLOCK).tolist()
        self._block += 1
        self._next = 0

    def uniform(self) -> float:
        """A draw from [0, 1)."""
        if self._next >= self.BLOCK:
            self._refill()
        u = self._buf[self._next]
        self._next += 1
        return u

    def index(self, n: int) -> int:
        return min(int(self.uniform() * n), n - 1)


_local = threading.local()


def _philox():
    pair = getattr(_local, "philox", None)
    if pair is None:
        bitgen = np.random.Philox(0)
        pair = _local.philox = (bitgen, np.random.Generator(bitgen))
    return pair


# ---------------------------------------------------------------------------
# PMFs from density expressions
# ---------------------------------------------------------------------------

def pmf_from_expr(var: str, sort: Sort, expr, env, max_support: int = None) -> FinitePMF:
    """Evaluate a mass expression at every value of ``sort``.

    :param var: the bound variable.
    :param sort: a finite sort, or ``Nat``/``Int`` when ``max_support`` is
        given; countable supports are enumerated until the mass is used
        up or ``max_support`` values have been seen, and the missing mass
        is reported under the key :data:`RESIDUAL`.
    :raises NormalizationError: when the masses do not sum to one.
    :raises DistributionError: on a negative mass.
    """
    if sort.is_finite:
        values = enumerate_sort(sort)
    elif max_support is not None and sort.name in ("Nat", "Int"):
        values = countable_values(sort)
    else:
        raise EvalError(f"infinite sort {sort}")

    pairs = []
    total = 0
    for i, v in enumerate(values):
        if not sort.is_finite and (i >= max_support or (total == 1 and not isinstance(total, float))):
            break
        p = eval_expr(expr, {**env, var: v})
        if isinstance(p, bool) or not isinstance(p, (int, Fraction, float)):
            raise DistributionError(f"mass for {var}={v} is not a number")
        if p < 0:
            raise DistributionError(f"negative mass {p} at {var}={v}")
        pairs.append((v, p))
        total += p
    if not sort.is_finite:
        rest = 1 - total
        if rest < 0 and not is_normalized(total, not isinstance(total, float)):
            raise NormalizationError(f"distribution not normalized: total mass {total}")
        if rest > 0:
            pairs.append((RESIDUAL, rest))
    elif not is_normalized(total, not isinstance(total, float)):
        raise NormalizationError(f"distribution not normalized: total mass {total}")
    return FinitePMF(pairs)


class _Residual:
    """Marker for the mass of a countable distribution beyond the enumerated support."""

    def __repr__(self):
        return "RESIDUAL"

    def __reduce__(self):
        return "RESIDUAL"


RESIDUAL = _Residual()


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

_STD_NORMAL = NormalDist()


def check_continuous_params(kind: str, params):
    for x in params:
        if isinstance(x, bool) or not isinstance(x, (int, Fraction, float)):
            raise DistributionError(f"{kind} parameter {x!r} is not a number")
    if kind == "Uniform":
        lo, hi = params
        if not lo < hi:
            raise DistributionError(f"Uniform requires lo < hi, got {lo}, {hi}")
        if math.isinf(lo) or math.isinf(hi):
            raise DistributionError("Uniform requires finite bounds")
    elif kind == "Exponential":
        (rate,) = params
        if not rate > 0:
            raise DistributionError(f"Exp requires rate > 0, got {rate}")
    elif kind == "NormalTrunc":
        mu, sigma, lo, hi = params
        if not sigma > 0:
            raise DistributionError(f"NormalTrunc requires sigma > 0, got {sigma}")
        if not lo < hi:
            raise DistributionError(f"NormalTrunc requires lo < hi, got {lo}, {hi}")
        mu, sigma = float(mu), float(sigma)
        accept = _STD_NORMAL.cdf((float(hi) - mu) / sigma) - _STD_NORMAL.cdf((float(lo) - mu) / sigma)
        if accept < MIN_ACCEPTANCE:
            raise DistributionError(
                f"NormalTrunc acceptance probability {accept:.3g} is below {MIN_ACCEPTANCE}")
    else:
        raise DistributionError(f"unknown distribution {kind}")


def sample_continuous(kind: str, params, rng: RngStream) -> float:
    if kind == "Uniform":
        lo, hi = float(params[0]), float(params[1])
        return lo + (hi - lo) * rng.uniform()
    if kind == "Exponential":
        return -math.log(1.0 - rng.uniform()) / float(params[0])
    if kind == "NormalTrunc":
        mu, sigma, lo, hi = (float(x) for x in params)
        while True:
            u = rng.uniform()
            if u == 0.0:
                continue
            x = mu + sigma * _STD_NORMAL.inv_cdf(u)
            if lo <= x <= hi:
                return x
    raise DistributionError(f"unknown distribution {kind}")


class CumulativeTable:
    """Float cumulative masses of a PMF for inversion sampling."""

    __slots__ = ("outcomes", "cumulative")

    def __init__(self, pmf: FinitePMF):
        self.outcomes = []
        self.cumulative = []
        acc = 0
        for o, p in pmf.items():
            acc += p
            self.outcomes.append(o)
            self.cumulative.append(float(acc))
        self.cumulative[-1] = 1.0

    def draw(self, rng: RngStream):
        return self.outcomes[bisect.bisect_right(self.cumulative, rng.uniform())]


def sample(d, env, rng: RngStream, var: str = None, sort: Sort = None):
    """Draw one value from a density.

    :param d: a :class:`PmfExpr` (then ``var`` and ``sort`` are required) or
        a :class:`NamedContinuous`.
    :param env: environment for the density's free variables.
    """
    if isinstance(d, NamedContinuous):
        params = [eval_expr(x, env) for x in d.params]
        check_continuous_params(d.kind, params)
        return sample_continuous(d.kind, params, rng)
    if isinstance(d, PmfExpr):
        if var is None or sort is None:
            raise ValueError("sampling a mass expression needs its variable and sort")
        return _table(d, var, sort, tuple(sorted(env.items()))).draw(rng)
    raise TypeError(f"not a density: {d!r}")


@functools.lru_cache(maxsize=256)
def _table(d: PmfExpr, var: str, sort: Sort, env: tuple) -> CumulativeTable:
    return CumulativeTable(pmf_from_expr(var, sort, d.expr, dict(env)))


def sample_countable(var: str, sort: Sort, expr, env, rng: RngStream, max_support: int = 10**6):
    """Inversion sampling over ``Nat`` or ``Int`` without truncating the support."""
    u = rng.uniform()
    acc = 0
    for i, v in enumerate(countable_values(sort)):
        if i >= max_support:
            raise DistributionError(
                f"countable distribution over {var} not exhausted after {max_support} values")
        p = eval_expr(expr, {**env, var: v})
        if isinstance(p, bool) or not isinstance(p, (int, Fraction, float)) or p < 0:
            raise DistributionError(f"invalid mass {p!r} at {var}={v}")
        acc += p
        if u < acc:
            return v
