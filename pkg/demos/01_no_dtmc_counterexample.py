"""
A counterexample that must keep nondeterminism
==============================================

Each choice at q0 alone keeps one disjunct below 3/4, so any model that
violates the formula must offer both choices.
"""

from pathlib import Path

from pcegar import check, counterexample_is_minimal, gen_min_cex, parse_formula, parse_mdp_file, print_mdp

here = Path(__file__).parent
m = parse_mdp_file((here / "models" / "two_choice.mdp").read_text())
psi = parse_formula("P<3/4[X (P1 & !P2)] | P<3/4[X (!P1 & P2)]")
print("model satisfies psi:", check(m, psi))

# the model is its own abstraction here
cex = gen_min_cex(m, psi)
print(print_mdp(cex.e))
print("choices kept at the initial state:", len(cex.e.choices[cex.e.init]))
print("minimal:", counterexample_is_minimal(m, psi, cex))

# removing either choice restores the property
for i, mu in enumerate(cex.e.choices[cex.e.init]):
    only = cex.e.replace(choices=((mu,),) + cex.e.choices[1:])
    print(f"only choice {i}: satisfies psi = {check(only, psi)}")
