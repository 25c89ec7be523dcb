"""
Finite-depth violation on a looping chain
=========================================

The goal is reached with probability one, but only in the limit. The
on-the-fly checker unrolls the counterexample one step at a time and stops
at the first depth where the bounded probability exceeds 3/4.
"""

from pathlib import Path

from pcegar import CounterExample, Partition, bar_copy, max_prob, otf_check, parse_formula, parse_mdp_file
from pcegar.formula import TRUE, Prop, Until

here = Path(__file__).parent
m = parse_mdp_file((here / "models" / "chain.mdp").read_text())
print("max P(true U P) from q1:", max_prob(m, Until(TRUE, Prop("P")))[m.init])

psi = parse_formula("P<=3/4[true U P]")
cex = CounterExample(*bar_copy(m))
res = otf_check(m, Partition.identity(len(m)), cex, psi)
for line in res.trace():
    print(line)
print(res.kind.value, "at depth", res.depth)
