"""Depth-incremental checking of weak-safety counterexamples.

Rather than building a tree unrolling of the counterexample, the checker
keeps, per counterexample state and depth ``k``, the concrete states that
still simulate it up to depth ``k`` (``R_k``), the strict-liveness
subformulas it satisfies at depth ``k`` (``Sat_k``) and the maximal
probabilities of the path subformulas (``MaxProb_k``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .abstraction import Partition
from .cegar import CounterExample, concretisation
from .formula import (
    And,
    FalseF,
    Formula,
    FormulaError,
    Fragment,
    Next,
    Not,
    Or,
    Prob,
    Prop,
    TrueF,
    Until,
    classify,
    negate,
    size,
    sub_and_path_formulas,
)
from .mdp import ONE, ZERO, Mdp, SubDist
from .relation import SimRelation
from .simulation import blockwise_leq


class OtfKind(enum.Enum):
    NOT_SIMULATED = "not-simulated"
    SAFETY_VIOLATED = "safety-violated"
    DEPTH_EXCEEDED = "depth-exceeded"


@dataclass(frozen=True)
class OtfRound:
    k: int
    relation_size: int
    sat_init: bool
    maxprob_init: Fraction | None
    decimal: bool = False

    def line(self) -> str:
        if self.maxprob_init is None:
            mp = "-"
        elif self.decimal:
            mp = f"{float(self.maxprob_init):.6g}"
        else:
            mp = str(self.maxprob_init)
        return f"k={self.k} |R|={self.relation_size} sat_init={self.sat_init} maxprob_init={mp}"


@dataclass
class OtfState:
    k: int
    r_curr: SimRelation
    sat_curr: list[frozenset]
    maxprob_curr: list[dict]


@dataclass
class OtfResult:
    kind: OtfKind
    depth: int
    state: OtfState
    rounds: list[OtfRound] = field(default_factory=list)

    def trace(self) -> list[str]:
        return [r.line() for r in self.rounds]


def _compute(
    labels: frozenset[str],
    chs: Sequence[SubDist],
    order: Sequence,
    sat_prev: Sequence[frozenset],
    mp_prev: Sequence[dict],
) -> tuple[frozenset, dict]:
    """One state's ``Sat`` and ``MaxProb`` at the next depth.

    Subformulas are visited by increasing size, so operands are settled at
    this depth before the formulas that use them; ``X`` and ``U`` look one
    step ahead through the previous depth's tables.
    """
    sat: set = set()
    mp: dict = {}
    for phi in order:
        if isinstance(phi, TrueF):
            sat.add(phi)
        elif isinstance(phi, FalseF):
            pass
        elif isinstance(phi, Prop):
            if phi.name in labels:
                sat.add(phi)
        elif isinstance(phi, Not):
            arg = phi.arg
            if isinstance(arg, Prop):
                if arg.name not in labels:
                    sat.add(phi)
            elif isinstance(arg, Prob):
                if not arg.holds(mp[arg.path]):
                    sat.add(phi)
            else:
                raise FormulaError(f"unexpected negation {phi}")
        elif isinstance(phi, Or):
            if phi.left in sat or phi.right in sat:
                sat.add(phi)
        elif isinstance(phi, And):
            if phi.left in sat and phi.right in sat:
                sat.add(phi)
        elif isinstance(phi, Next):
            mp[phi] = max(
                (mu.measure(b for b in mu.support() if phi.arg in sat_prev[b]) for mu in chs),
                default=ZERO,
            )
        elif isinstance(phi, Until):
            if phi.right in sat:
                mp[phi] = ONE
            elif phi.left not in sat:
                mp[phi] = ZERO
            else:
                mp[phi] = max(
                    (sum((p * mp_prev[b][phi] for b, p in mu.items()), ZERO) for mu in chs),
                    default=ZERO,
                )
        else:
            raise FormulaError(f"unexpected subformula {phi}")
    return frozenset(sat), mp


def _main_path(psl: Formula):
    if isinstance(psl, Not) and isinstance(psl.arg, Prob):
        return psl.arg.path
    return None


def otf_check(
    m: Mdp,
    part: Partition,
    cex: CounterExample,
    psi_ws: Formula,
    max_depth: int = 10**6,
    incremental: bool = False,
    decimal_trace: bool = False,
) -> OtfResult:
    """Decide validity of ``cex`` for the weak-safety formula ``psi_ws``.

    Returns ``NOT_SIMULATED`` once the concrete MDP provably cannot mimic the
    counterexample within the abstraction, ``SAFETY_VIOLATED`` once the
    concrete initial state is shown to violate ``psi_ws`` at some depth, and
    ``DEPTH_EXCEEDED`` at ``max_depth``. With ``incremental`` only states
    whose successors changed in the previous round are recomputed.
    ``decimal_trace`` prints trace probabilities as floats; verdicts always
    use exact values.
    """
    if Fragment.WEAK_SAFETY not in classify(psi_ws):
        raise FormulaError(f"{psi_ws} is not a weak-safety formula")
    psl = negate(psi_ws)
    states_f, paths_f = sub_and_path_formulas(psl)
    order = sorted(states_f + paths_f, key=lambda g: (size(g), str(g)))
    main = _main_path(psl)

    e = cex.e
    gi = concretisation(part, cex)
    r_curr = [frozenset(s) for s in gi.images]
    empty_sat = [frozenset()] * len(e)
    empty_mp = [{p: ZERO for p in paths_f} for _ in e.states]
    sat_curr, mp_curr = [], []
    for a in e.states:
        s, p = _compute(e.labels[a], (), order, empty_sat, empty_mp)
        sat_curr.append(s)
        mp_curr.append(p)
    preds: list[set[int]] = [set() for _ in e.states]
    for a in e.states:
        for b in e.successors(a):
            preds[b].add(a)
    changed: set[int] | None = None  # None: recompute everything
    k = 0
    rounds: list[OtfRound] = []

    def snapshot() -> OtfState:
        return OtfState(k, SimRelation(tuple(r_curr)), list(sat_curr), list(mp_curr))

    def record() -> None:
        rounds.append(
            OtfRound(
                k,
                sum(len(s) for s in r_curr),
                psl in sat_curr[e.init],
                mp_curr[e.init].get(main) if main is not None else None,
                decimal_trace,
            )
        )

    while True:
        record()
        if m.init not in r_curr[e.init]:
            return OtfResult(OtfKind.NOT_SIMULATED, k, snapshot(), rounds)
        if psl in sat_curr[e.init]:
            return OtfResult(OtfKind.SAFETY_VIOLATED, k, snapshot(), rounds)
        if k >= max_depth:
            return OtfResult(OtfKind.DEPTH_EXCEEDED, k, snapshot(), rounds)
        if incremental and changed is not None:
            dirty = set(changed)
            for b in changed:
                dirty |= preds[b]
        else:
            dirty = set(e.states)
        owner = SimRelation(tuple(r_curr)).owner_map()
        r_next = list(r_curr)
        sat_next = list(sat_curr)
        mp_next = list(mp_curr)
        for a in sorted(dirty):
            tmp = frozenset(
                q
                for q in r_curr[a]
                if all(any(blockwise_leq(mu, nu, owner) for nu in m.choices[q]) for mu in e.choices[a])
            )
            if not tmp:
                r_next[a] = tmp
                k += 1
                r_curr = r_next
                record()
                return OtfResult(OtfKind.NOT_SIMULATED, k, snapshot(), rounds)
            s, p = _compute(e.labels[a], e.choices[a], order, sat_curr, mp_curr)
            assert tmp <= r_curr[a], "R_k must shrink"
            assert sat_curr[a] <= s, "Sat_k must grow"
            assert all(mp_curr[a][f] <= v <= ONE for f, v in p.items()), "MaxProb_k must grow"
            r_next[a], sat_next[a], mp_next[a] = tmp, s, p
        changed = {
            a for a in dirty
            if r_next[a] != r_curr[a] or sat_next[a] != sat_curr[a] or mp_next[a] != mp_curr[a]
        }
        r_curr, sat_curr, mp_curr = r_next, sat_next, mp_next
        k += 1
