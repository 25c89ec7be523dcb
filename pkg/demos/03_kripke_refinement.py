"""
Refining a spurious abstraction
===============================

Eight blocks hide the fact that q5 can never reach the goal while q6 can.
We follow one refinement by hand and then run the whole loop.
"""

from pathlib import Path

from pcegar import (
    cegar_loop,
    check_validity,
    gen_min_cex,
    parse_formula,
    parse_mdp_file,
    parse_partition_file,
    quotient,
    refine,
)

here = Path(__file__).parent
m = parse_mdp_file((here / "models" / "kripke.mdp").read_text())
part = parse_partition_file((here / "models" / "kripke.part").read_text(), m)
psi = parse_formula("P<=0[true U P]")

quo = quotient(m, part)
print("abstract states:", quo.abstract.names)

# route the counterexample through {q5,q6} by trying the edge to {q4} first
to_q4 = next((0, i, t) for (s, i, t) in quo.abstract.edges() if s == 0 and quo.abstract.names[t] == "q4")
cex = gen_min_cex(quo.abstract, psi, order=[to_q4])
print("counterexample:", " -> ".join(cex.e.names))

w = check_validity(m, part, cex)
print("invalid at", cex.e.names[w.state], "after", w.sweeps, "sweeps")
for a in cex.e.states:
    print(f"  R_old({cex.e.names[a]}) = {sorted(m.names[q] for q in w.r_old(a))}")

finer = refine(part, w)
print("blocks after refine:", [sorted(m.names[q] for q in b) for b in finer.blocks])

# the full loop with the default edge order
res = cegar_loop(m, psi, init=part)
for rec in res.trace:
    print(rec.line())
print("verdict:", res.verdict.kind.value)
