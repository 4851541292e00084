"""The hotel light, approximated by n groups of guests.

Each of n guests draws a group uniformly; the light turns on when some
guest draws their own group.  For finite n the explored system is exactly
bisimilar to a single biased coin, and the bias tends to 1 - 1/e.
"""

import math
import time

import numpy as np

from probe import bernoulli_reference, equivalent, explore, generate_hotel_spec, simulate
from probe.hotel import format_hotel_table, hotel_light_probability, hotel_table, limit_estimate

for n in range(1, 6):
    p = hotel_light_probability(n)
    t0 = time.perf_counter()
    verdict = equivalent(explore(generate_hotel_spec(n)), explore(bernoulli_reference(p)))
    print(f"n={n}  p={str(p):>12}  {verdict}  ({time.perf_counter() - t0:.3f}s)")

print()
print(format_hotel_table(hotel_table([1, 2, 4, 8, 16, 64, 1000, 10 ** 6])))

est = limit_estimate([10, 100, 1000])
print(f"L + c/n fit: L={est.limit:.8f}  c={est.slope:.4f}  residual={est.residual:.1e}")
print(f"1 - 1/e    : {1 - math.exp(-1):.8f}")

# The error shrinks like 1/(2en); check the slope on a log-log scale.
ns = np.logspace(1, 6, 11).astype(int)
errs = np.array([hotel_light_probability(int(n)) for n in ns], dtype=float) - (1 - math.exp(-1))
slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
print(f"log-log slope of the error: {slope:.3f}")

report = simulate(generate_hotel_spec(16), runs=20_000, max_steps=1)
est16, (lo, hi) = report.estimate("a")
print(f"n=16 simulated: {est16:.4f} in [{lo:.4f}, {hi:.4f}], exact {float(hotel_light_probability(16)):.4f}")
