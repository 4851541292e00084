"""The real hotel, approximated by n groups of guests.

Guests are split into n groups of rooms; each guest draws a group
uniformly, and the light goes on if somebody draws their own group.  The
light-on probability is ``1 - (1 - 1/n)**n``, which tends to ``1 - 1/e``.
The uncountable puzzle itself is never executed; everything here works on
the finite approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from probe.lang.parser import parse_spec

LIMIT = 1 - math.exp(-1)
EXACT_UP_TO = 64


def hotel_light_probability(n: int, exact: Optional[bool] = None):
    """``1 - (1 - 1/n)**n``.

    :param exact: return a :class:`Fraction`; defaults to exact for
        ``n <= 64`` and to a float beyond (the rational has ``n**n`` as
        denominator).
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"need a positive group count, got {n!r}")
    if exact is None:
        exact = n <= EXACT_UP_TO
    if exact:
        return 1 - Fraction(n - 1, n) ** n
    return -math.expm1(n * math.log1p(-1.0 / n)) if n > 1 else 1.0


def complement_product(probs: Sequence, exact: Optional[bool] = None):
    """``1 - prod(1 - p_i)``: the chance that at least one independent event happens.

    Exact when every ``p_i`` is rational (or ``exact=True``); otherwise
    summed in log space with ``log1p`` for accuracy.
    """
    probs = list(probs)
    for p in probs:
        if isinstance(p, bool) or not 0 <= p <= 1:
            raise ValueError(f"probability out of range: {p!r}")
    if exact is None:
        exact = all(isinstance(p, (int, Fraction)) for p in probs)
    if exact:
        acc = Fraction(1)
        for p in probs:
            acc *= 1 - Fraction(p)
        return 1 - acc
    if any(p == 1 for p in probs):
        return 1.0
    return -math.expm1(math.fsum(math.log1p(-float(p)) for p in probs))


def hotel_spec_text(n: int) -> str:
    if n < 1:
        raise ValueError(f"need a positive group count, got {n!r}")
    return f"act a;\ninit sum i:[1..{n}]. dist j:[1..{n}][1/{n}]. (i = j) -> a;\n"


def generate_hotel_spec(n: int):
    """Guest ``i`` draws group ``j`` uniformly and presses ``a`` on a match."""
    return parse_spec(hotel_spec_text(n))


def _fraction_text(p: Fraction) -> str:
    p = Fraction(p)
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def bernoulli_spec_text(p) -> str:
    if isinstance(p, float):
        if not 0 <= p <= 1:
            raise ValueError(f"probability out of range: {p!r}")
        ptext = repr(p)
    else:
        p = Fraction(p)
        if not 0 <= p <= 1:
            raise ValueError(f"probability out of range: {p}")
        ptext = _fraction_text(p)
    return f"act a;\ninit dist b:Bool[if(b, {ptext}, 1 - {ptext})]. (b) -> a;\n"


def bernoulli_reference(p):
    """The one-coin process that enables ``a`` with probability ``p``."""
    return parse_spec(bernoulli_spec_text(p))


@dataclass
class LimitEstimate:
    ns: list
    estimates: list
    limit: float
    slope: float
    residual: float


def limit_estimate(ns: Sequence[int]) -> LimitEstimate:
    """Extrapolate ``n -> infinity`` by fitting ``e_n = L + c/n``.

    The fit is least squares on the last three points; ``residual`` is the
    root-mean-square misfit of those points.
    """
    ns = list(ns)
    if len(ns) < 3:
        raise ValueError("need at least three points")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("ns must be strictly ascending")
    estimates = [float(hotel_light_probability(n)) for n in ns]
    x = np.array([1.0 / n for n in ns[-3:]])
    y = np.array(estimates[-3:])
    design = np.column_stack([np.ones_like(x), x])
    (limit, slope), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.sqrt(np.mean((design @ np.array([limit, slope]) - y) ** 2)))
    return LimitEstimate(ns, estimates, float(limit), float(slope), residual)


@dataclass
class HotelApproximation:
    n: int
    p_analytic: object
    p_semantic: Optional[Fraction] = None
    p_empirical: Optional[tuple] = None  # (estimate, (lo, hi))


def semantic_probability(n: int, limits=None):
    """Light-on probability read off the minimised transition system.

    It is the initial mass of the block whose states can do ``a``.
    """
    from probe.bisimulation import minimize
    from probe.semantics import ExploreLimits, explore
    plts = explore(generate_hotel_spec(n), limits or ExploreLimits())
    quotient, _ = minimize(plts)
    mass = 0
    for nd, p in quotient.prob_states[quotient.initial].items():
        if any(label == "a" for label, _ in quotient.nd_states[nd].transitions):
            mass += p
    return mass


def approximate(n: int, semantic: bool = False, runs: int = 0, seed: Optional[int] = None):
    """Collect the analytic, and optionally semantic and simulated, answers for ``n``."""
    out = HotelApproximation(n, hotel_light_probability(n))
    if semantic:
        out.p_semantic = semantic_probability(n)
    if runs:
        from probe.montecarlo import DEFAULT_SEED, simulate
        rep = simulate(generate_hotel_spec(n), runs=runs, max_steps=1,
                       seed=DEFAULT_SEED if seed is None else seed)
        out.p_empirical = rep.estimate("a")
    return out


def hotel_table(ns: Sequence[int]):
    """Rows ``(n, p_exact or None, p_float, |p - (1 - 1/e)|)``."""
    rows = []
    for n in ns:
        p = hotel_light_probability(n)
        exact = p if isinstance(p, Fraction) else None
        pf = float(p)
        rows.append((n, exact, pf, abs(pf - LIMIT)))
    return rows


def format_hotel_table(rows, csv: bool = False) -> str:
    if csv:
        lines = ["n,p_exact,p_float,abs_err"]
        for n, exact, pf, err in rows:
            lines.append(f"{n},{_fraction_text(exact) if exact is not None else ''},{pf!r},{err!r}")
        return "\n".join(lines) + "\n"
    lines = [f"{'n':>10}  {'p_exact':>24}  {'p_float':>14}  {'|p-(1-1/e)|':>12}"]
    for n, exact, pf, err in rows:
        if exact is None:
            etext = "(float)"
        else:
            etext = _fraction_text(exact)
            if len(etext) > 24:
                etext = etext[:21] + "..."
        lines.append(f"{n:>10}  {etext:>24}  {pf:>14.10f}  {err:>12.3e}")
    return "\n".join(lines) + "\n"
