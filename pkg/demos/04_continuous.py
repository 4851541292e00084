"""Simulating models with real-valued choices.

A sum over Real has no finite semantics here; simulation needs a
resolver that says how the value is picked.
"""

import numpy as np

from probe import corpus_text, parse_scheduler, parse_spec, simulate
from probe.errors import SimulationError

slot = parse_spec(corpus_text("slot_machine.prb"))
try:
    simulate(slot, runs=10, max_steps=2)
except SimulationError as exc:
    print("without a resolver:", exc)

report = simulate(slot, parse_scheduler(["resolve:t=Exp(1)"]), runs=20_000, max_steps=2,
                  keep_traces=True)
waits = np.array([float(t[0][5:-1]) for t in report.traces])
payouts = np.array([float(t[1][7:-1]) for t in report.traces])
# payout ~ Exp(1/(1+t)) has conditional mean 1 + t, so E[payout] = 1 + E[t] = 2
print(f"mean wait {waits.mean():.3f}, mean payout {payouts.mean():.3f} (expected 2)")
print(f"corr(wait, payout) = {np.corrcoef(waits, payouts)[0, 1]:.3f}")

store = parse_spec(corpus_text("store_employees.prb"))
report = simulate(store, parse_scheduler(["resolve:r=Uniform(0, 1)"]), runs=20_000, max_steps=1,
                  keep_traces=True)
who = np.array([int(t[0].split("(")[1].split(",")[0]) for t in report.traces])
service = np.array([float(t[0].split(",")[1][:-1]) for t in report.traces])
print("employee shares:", np.bincount(who)[1:] / len(who))
# E[1/(2+3r)] for r uniform on [0,1] is ln(5/2)/3
print(f"mean service {service.mean():.4f} (expected {np.log(2.5) / 3:.4f})")
