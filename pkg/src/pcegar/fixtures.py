"""Small reference models used by tests and demos."""

from __future__ import annotations

from fractions import Fraction

from .abstraction import Partition, partition_from_names
from .formula import Formula, parse_formula
from .mdp import Mdp


def two_choice_mdp() -> tuple[Mdp, Formula]:
    """An MDP whose violation of the formula needs both initial choices.

    Either choice alone keeps one disjunct below 3/4.
    """
    m = Mdp.build(
        [("q0", ()), ("q1", ("P1",)), ("q2", ("P2",))],
        "q0",
        {
            "q0": [
                {"q1": Fraction(3, 4), "q2": Fraction(1, 4)},
                {"q1": Fraction(1, 4), "q2": Fraction(3, 4)},
            ]
        },
    )
    return m, parse_formula("P<3/4[X (P1 & !P2)] | P<3/4[X (!P1 & P2)]")


def loop_chain(eps: Fraction = Fraction(1, 2)) -> Mdp:
    """``q1 -> q2`` surely, ``q2`` back to ``q1`` with ``1 - eps`` and on to
    the goal ``q3`` with ``eps``."""
    eps = Fraction(eps)
    return Mdp.build(
        [("q1", ()), ("q2", ()), ("q3", ("P",))],
        "q1",
        {"q1": [{"q2": 1}], "q2": [{"q1": 1 - eps, "q3": eps}]},
    )


KRIPKE_EDGES = {
    "q0": ["q1", "q2", "q5"],
    "q1": ["q3", "q5"],
    "q2": ["q9"],
    "q3": ["q4", "q5"],
    "q4": ["q10"],
    "q5": ["q8"],
    "q6": ["q7"],
    "q7": ["q11"],
    "q8": ["q8"],
    "q9": ["q11"],
    "q10": ["q11"],
    "q11": ["q11"],
}

KRIPKE_BLOCKS = [["q0", "q1", "q3"], ["q2"], ["q4"], ["q5", "q6"], ["q7", "q8"], ["q9"], ["q10"], ["q11"]]


def kripke() -> tuple[Mdp, Partition, Formula]:
    """Twelve-state Kripke structure, its eight-block partition and
    ``P<=0[true U P]`` (the goal ``q11`` must be unreachable).

    Each edge is a separate Dirac choice.
    """
    names = [f"q{i}" for i in range(12)]
    m = Mdp.build(
        [(s, ("P",) if s == "q11" else ()) for s in names],
        "q0",
        {s: [{t: 1} for t in ts] for s, ts in KRIPKE_EDGES.items()},
    )
    return m, partition_from_names(m, KRIPKE_BLOCKS), parse_formula("P<=0[true U P]")


def single_state() -> Mdp:
    return Mdp.build([("s", ())], "s")
