"""Deciding the number of heads up front versus throwing each time.

ThrowSequence draws k from a geometric distribution and then throws k
heads and a tail.  Its state space is infinite, so it is explored to a
depth bound, and its countable distribution is enumerated up to a support
bound; whatever lies beyond shows up as unexplored mass.
"""

from fractions import Fraction

from probe import ExploreLimits, bounded_trace_distribution, corpus_text, equivalent, explore, parse_spec

throw = explore(parse_spec(corpus_text("throw.prb")))
sequence = explore(parse_spec(corpus_text("throw_sequence.prb")), ExploreLimits(max_depth=10))
print("ThrowSequence, depth 10:", sequence.summary(), "(truncated)" if sequence.truncated else "")

for k in range(10):
    p = bounded_trace_distribution(sequence, k + 1)[("head",) * k + ("tail",)]
    print(f"head^{k} tail: {p}  (expected {Fraction(1, 2 ** (k + 1))})")

a = bounded_trace_distribution(throw, 3)
b = bounded_trace_distribution(sequence, 3)
print("\ntraces of length 3")
for t in sorted(set(a) | set(b)):
    print(f"  {' '.join(t):<28} Throw={str(a.get(t, 0)):>6}  ThrowSequence={b.get(t, 0)}")

# The mass the support bound left out is visible, so the two systems are
# not declared equivalent.
print("\n", equivalent(throw, explore(parse_spec(corpus_text("throw_sequence.prb")),
                                      ExploreLimits(max_depth=6))))
