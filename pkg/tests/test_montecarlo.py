import json
import math
from fractions import Fraction

import pytest
from statsmodels.stats.proportion import proportion_confint

from probe import corpus_text
from probe.errors import SimulationError
from probe.hotel import generate_hotel_spec
from probe.lang.parser import parse_spec
from probe.montecarlo import (
    DEFAULT_SEED, Scheduler, SimulationReport, estimate_action_probability, parse_scheduler,
    simulate, wilson_interval,
)
from probe.semantics import bounded_trace_distribution, explore

THROW = parse_spec(corpus_text("throw.prb"))


def band(p, n, k=3):
    return k * math.sqrt(p * (1 - p) / n)


def test_default_seed():
    assert DEFAULT_SEED == 0xC0FFEE


@pytest.mark.parametrize("k, n", [(63_000, 100_000), (0, 50), (50, 50), (1, 3), (7, 1000)])
def test_wilson_matches_reference(k, n):
    lo, hi = wilson_interval(k, n)
    ref_lo, ref_hi = proportion_confint(k, n, alpha=0.05, method="wilson")
    assert lo == pytest.approx(ref_lo, abs=1e-12)
    assert hi == pytest.approx(ref_hi, abs=1e-12)


def test_wilson_examples():
    report = SimulationReport(100_000, 1, 0, {"a": 63_000, "b": 0, "c": 100_000})
    p, (lo, hi) = estimate_action_probability(report, "a")
    assert p == 0.63 and round(lo, 3) == 0.627 and round(hi, 3) == 0.633
    assert estimate_action_probability(report, "b")[0] == 0
    assert estimate_action_probability(report, "b")[1][0] == 0
    assert estimate_action_probability(report, "c")[1][1] == 1
    with pytest.raises(KeyError):
        estimate_action_probability(report, "d")


def test_throw_frequency():
    n = 100_000
    report = simulate(THROW, runs=n, max_steps=1)
    p, (lo, hi) = report.estimate("head")
    assert abs(p - 0.5) <= 3 * 0.5 / math.sqrt(n)
    assert lo <= 0.5 <= hi
    assert report.counts["head"] + report.counts["tail"] == n


def test_delta_runs_do_nothing():
    report = simulate(parse_spec("init delta;"), runs=10, max_steps=5, keep_traces=True)
    assert report.counts == {} and report.traces == [[]] * 10


def test_hotel16_frequency():
    n, p = 20_000, 1 - (15 / 16) ** 16
    est, _ = simulate(generate_hotel_spec(16), runs=n, max_steps=1).estimate("a")
    assert abs(est - p) <= band(p, n)


def test_reproducible_across_jobs():
    spec = parse_spec("act a, b; proc P = dist x:[1..3][1/3]. ((x = 1) -> a <> b) . P; init P;")
    one = simulate(spec, runs=2_000, max_steps=4, seed=9, keep_traces=True)
    three = simulate(spec, runs=2_000, max_steps=4, seed=9, jobs=3, keep_traces=True)
    assert one == three
    assert one != simulate(spec, runs=2_000, max_steps=4, seed=10, keep_traces=True)


def test_agrees_with_trace_semantics():
    spec = parse_spec("act a, b; proc P = dist x:[1..3][1/3]. ((x = 1) -> a <> b) . P; init P;")
    steps, n = 3, 30_000
    exact = sum(m for t, m in bounded_trace_distribution(explore(spec), steps).items() if "a" in t)
    assert exact == 1 - Fraction(2, 3) ** 3
    est, _ = simulate(spec, runs=n, max_steps=steps).estimate("a")
    assert abs(est - float(exact)) <= band(float(exact), n)


def test_sum_needs_resolver():
    spec = parse_spec(corpus_text("slot_machine.prb"))
    with pytest.raises(SimulationError, match="unresolved sum variable t"):
        simulate(spec, runs=5, max_steps=3)
    report = simulate(spec, parse_scheduler(["resolve:t=Exp(1)"]), runs=200, max_steps=3,
                      keep_traces=True)
    assert report.counts == {"wait": 200, "payout": 200}
    assert all(len(t) == 2 and t[0].startswith("wait(") for t in report.traces)


def test_resolver_for_unknown_variable():
    with pytest.raises(SimulationError, match="no sum binds"):
        simulate(THROW, parse_scheduler(["resolve:q=Exp(1)"]), runs=5)


def test_store_employees():
    spec = parse_spec(corpus_text("store_employees.prb"))
    report = simulate(spec, parse_scheduler(["resolve:r=Uniform(0, 1)"]), runs=3_000,
                      max_steps=2, keep_traces=True)
    firsts = [int(t[0].split("(")[1].split(",")[0]) for t in report.traces]
    for e in (1, 2, 3):
        assert abs(firsts.count(e) / 3_000 - 1 / 3) <= band(1 / 3, 3_000)


def test_fixed_scheduler():
    spec = parse_spec("act a, b; init a + b;")
    first = simulate(spec, Scheduler("fixed", 0), runs=50, max_steps=1)
    last = simulate(spec, Scheduler("fixed", 7), runs=50, max_steps=1)
    assert sorted(first.counts.values()) == [0, 50] and sorted(last.counts.values()) == [0, 50]
    assert first.counts != last.counts
    uniform = simulate(spec, runs=4_000, max_steps=1)
    assert abs(uniform.counts["a"] / 4_000 - 0.5) <= band(0.5, 4_000)


def test_step_budget_respected():
    report = simulate(THROW, runs=100, max_steps=7, keep_traces=True)
    assert all(len(t) == 7 for t in report.traces)
    assert sum(report.steps.values()) == 700


@pytest.mark.parametrize("items", [["sometimes"], ["fixed:x"], ["fixed:-1"], ["resolve:t"]])
def test_bad_scheduler(items):
    with pytest.raises(SimulationError):
        parse_scheduler(items)


def test_report_json():
    data = json.loads(simulate(THROW, runs=100, max_steps=2).to_json())
    assert data["runs"] == 100 and set(data["actions"]) == {"head", "tail"}
    assert data["seed"] == DEFAULT_SEED
