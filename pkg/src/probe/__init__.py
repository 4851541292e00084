"""Probabilistic processes with data: parse, explore, minimise, simulate.

Typical use::

    from probe import corpus_text, parse_spec, explore, minimize
    plts = explore(parse_spec(corpus_text("throw.prb")))
"""

from importlib import resources

from probe.bisimulation import Verdict, equivalent, minimize
from probe.distributions import FinitePMF
from probe.errors import (
    DistributionError, EvalError, LimitExceeded, NormalizationError, ParseError,
    ProbeError, SemanticError, SimulationError,
)
from probe.hotel import bernoulli_reference, generate_hotel_spec, hotel_light_probability
from probe.lang import parse_spec, pretty_print, validate
from probe.montecarlo import DEFAULT_SEED, Scheduler, parse_scheduler, simulate
from probe.semantics import (
    PLTS, ExploreLimits, behavioural_distribution, bounded_trace_distribution,
    explore, read_plts, write_plts,
)


def corpus_files():
    """Names of the example specifications shipped with the package."""
    root = resources.files("probe") / "corpus"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".prb"))


def corpus_text(name: str) -> str:
    return (resources.files("probe") / "corpus" / name).read_text()


__all__ = [
    "parse_spec", "pretty_print", "validate", "explore", "ExploreLimits", "PLTS",
    "behavioural_distribution", "bounded_trace_distribution", "read_plts", "write_plts",
    "minimize", "equivalent", "Verdict", "FinitePMF", "simulate", "Scheduler",
    "parse_scheduler", "DEFAULT_SEED", "generate_hotel_spec", "bernoulli_reference",
    "hotel_light_probability", "corpus_files", "corpus_text",
    "ProbeError", "ParseError", "EvalError", "DistributionError", "NormalizationError",
    "SemanticError", "LimitExceeded", "SimulationError",
]
