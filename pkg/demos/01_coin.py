"""A fair coin thrown forever: build it, shrink it, trace it, simulate it."""

from probe import corpus_text, parse_spec, explore, minimize, write_plts
from probe import bounded_trace_distribution, simulate

spec = parse_spec(corpus_text("throw.prb"))

# One probabilistic state with two halves, one nd-state per face, both
# looping back to the same distribution.
plts = explore(spec)
print(plts.summary())
print(write_plts(plts))

# Already minimal: head and tail states carry different labels.
quotient, partition = minimize(plts)
print("blocks:", partition.blocks())

# Every trace of length three has probability 1/8.
for trace, p in bounded_trace_distribution(plts, 3).items():
    print(f"{str(p):>5}  {' '.join(trace)}")

# Simulation agrees; the seed is fixed so this prints the same numbers every run.
print(simulate(spec, runs=20_000, max_steps=1).to_text())
