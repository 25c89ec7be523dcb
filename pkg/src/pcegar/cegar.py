"""Counterexample-guided abstraction refinement for safety PCTL on MDPs.

The loop alternates four steps: model check the quotient, extract a minimal
counterexample by greedy edge deletion, check whether the concrete MDP
exhibits it consistently with the abstraction, and otherwise split blocks
along the invalidating witness.
"""

from __future__ import annotations

import enum
import logging
import random
from dataclasses import dataclass, field
from typing import Sequence, Union

from .abstraction import Partition, Quotient, coarsest_compatible, quotient
from .formula import Formula, FormulaError, Fragment, classify
from .mdp import Mdp, SubDist, bar_copy
from .modelcheck import check, induced_dtmc, violating_scheduler
from .relation import SimRelation
from .simulation import blockwise_leq, is_canonical_simulation

log = logging.getLogger(__name__)

Edge = tuple[int, int, int]
EdgeOrder = Union[str, Sequence[Edge]]


@dataclass(frozen=True)
class CounterExample:
    """An MDP ``e`` violating the property and a canonical simulation ``r``
    of ``e`` by the abstract MDP."""

    e: Mdp
    r: SimRelation


def edge_order(m: Mdp, order: EdgeOrder = "default", seed: int | None = None) -> list[Edge]:
    """Edges of ``m`` in the order greedy deletion will try them.

    ``"default"`` is ascending ``(state, choice, target)``; ``"reverse"`` its
    mirror; ``"random"`` a shuffle seeded by ``seed``. An explicit sequence
    is tried first, followed by the remaining edges in default order.
    """
    edges = m.edges()
    if isinstance(order, str):
        if order == "default":
            return edges
        if order == "reverse":
            return edges[::-1]
        if order == "random":
            shuffled = list(edges)
            random.Random(seed).shuffle(shuffled)
            return shuffled
        raise ValueError(f"unknown edge order {order!r}")
    present = set(edges)
    head = [tuple(e) for e in order if tuple(e) in present]
    listed = set(head)
    return head + [e for e in edges if e not in listed]


def _normalise(chs: list[SubDist]) -> tuple[SubDist, ...]:
    """Drop all-zero and repeated choices; maximal probabilities are unchanged."""
    kept: list[SubDist] = []
    for mu in chs:
        if not mu.is_zero() and mu not in kept:
            kept.append(mu)
    return tuple(kept) or (SubDist(),)


def gen_min_cex(
    abstract: Mdp,
    psi: Formula,
    order: EdgeOrder = "default",
    seed: int | None = None,
    init_from_scheduler: bool = False,
) -> CounterExample:
    """Minimal counterexample for ``abstract`` and the safety formula ``psi``.

    Starting from a renamed copy of ``abstract``, each edge is zeroed in turn
    and the deletion kept whenever the result still violates ``psi``. States
    unreachable afterwards are dropped, as are repeated choices and all-zero
    choices at states that keep a nonzero one.
    """
    if Fragment.SAFETY not in classify(psi):
        raise FormulaError(f"{psi} is not a safety formula")
    if check(abstract, psi):
        raise ValueError("the abstract MDP satisfies the formula; there is no counterexample")
    current, _ = bar_copy(abstract)
    if init_from_scheduler:
        sched = violating_scheduler(current, psi)
        if sched is not None:
            dtmc = induced_dtmc(current, sched)
            if not check(dtmc, psi):
                current = dtmc
    choices = [list(chs) for chs in current.choices]
    for q, i, t in edge_order(current, order, seed):
        mu = choices[q][i]
        if t not in mu:
            continue
        choices[q][i] = mu.without(t)
        trial = current.replace(choices=tuple(tuple(c) for c in choices))
        if check(trial, psi):
            choices[q][i] = mu
    final = current.replace(choices=tuple(_normalise(c) for c in choices))
    e, kept = final.restrict(final.reachable())
    return CounterExample(e, SimRelation(tuple(frozenset({a}) for a in kept)))


# --------------------------------------------------------------------------
# validity


@dataclass(frozen=True)
class Valid:
    """The counterexample is exhibited by the concrete MDP via ``relation``."""

    relation: SimRelation
    sweeps: int


@dataclass(frozen=True)
class InvalidityWitness:
    """Where validity checking failed.

    ``state`` is the invalidating counterexample state and ``choice`` the
    invalidating transition; ``gamma_inj`` maps each counterexample state to
    the concrete block it abstracts.

    ``r_new(state)`` has been filtered by every choice of ``state`` seen so
    far in the sweep, so it can lose states that do match ``choice``.
    ``failed`` is the part of ``r_old(state)`` with no move matching
    ``choice`` itself; it equals ``r_old(state) - r_new(state)`` when the
    state has a single choice.
    """

    state: int
    choice: SubDist
    r_old: SimRelation
    r_new: SimRelation
    gamma_inj: SimRelation
    sweeps: int
    failed: frozenset[int] = frozenset()


ValidityResult = Union[Valid, InvalidityWitness]


def concretisation(part: Partition, cex: CounterExample) -> SimRelation:
    """``gamma o inj``; rejects relations that are not injective functions."""
    r = cex.r
    if r.n_left != len(cex.e) or not (r.is_functional() and r.is_total()):
        raise ValueError("counterexample relation must map every state to one abstract state")
    targets = [next(iter(img)) for img in r.images]
    if len(set(targets)) != len(targets):
        raise ValueError("counterexample relation must be injective")
    if any(not 0 <= a < len(part) for a in targets):
        raise ValueError("counterexample relation refers to unknown abstract states")
    return SimRelation(tuple(part.blocks[a] for a in targets))


def check_validity(m: Mdp, part: Partition, cex: CounterExample) -> ValidityResult:
    """Search for a validating simulation inside ``gamma o inj``.

    Each sweep filters every ``R(a)`` against the relation as it stood at the
    start of the sweep (``R_old``); failure is reported the moment some
    ``R(a)`` empties or the concrete initial state leaves ``R(init)``.
    """
    e = cex.e
    gi = concretisation(part, cex)
    images = [set(s) for s in gi.images]
    old: list[frozenset[int]] | None = None
    sweeps = 0
    while old != [frozenset(s) for s in images]:
        old = [frozenset(s) for s in images]
        r_old = SimRelation(tuple(old))
        owner = r_old.owner_map()
        sweeps += 1
        for a in e.states:
            for mu in e.choices[a]:
                images[a] = {
                    q for q in images[a] if any(blockwise_leq(mu, nu, owner) for nu in m.choices[q])
                }
                if not images[a] or (a == e.init and m.init not in images[a]):
                    failed = frozenset(
                        q for q in old[a] if not any(blockwise_leq(mu, nu, owner) for nu in m.choices[q])
                    )
                    return InvalidityWitness(a, mu, r_old, SimRelation.from_images(images), gi, sweeps, failed)
    relation = SimRelation.from_images(images)
    assert m.init in relation(e.init)
    return Valid(relation, sweeps)


def refine(part: Partition, w: InvalidityWitness, gamma: SimRelation | None = None) -> Partition:
    """Split blocks along an invalidating witness.

    The invalidating state's block splits off the states that cannot match
    the invalidating transition (``w.failed``); each other
    successor ``b`` of the invalidating transition splits off ``R_old(b)``.
    ``gamma`` maps counterexample states to their concrete blocks and
    defaults to the one recorded in the witness.
    """
    gi = w.gamma_inj if gamma is None else gamma
    a = w.state
    for d in {a} | (w.choice.support() - {a}):
        if gi(d) not in part.blocks:
            raise ValueError("stale witness: its blocks are not blocks of this partition")
    new = part.split(gi(a), w.failed)
    for b in sorted(w.choice.support() - {a}):
        new = new.split(gi(b), w.r_old(b))
    return new


# --------------------------------------------------------------------------
# the loop


class VerdictKind(enum.Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    ITERATION_LIMIT = "iteration-limit"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    iterations: int
    partition: Partition
    cex: CounterExample | None = None
    relation: SimRelation | None = None  # validating simulation into the concrete MDP


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    partition: Partition
    quotient: Quotient
    cex: CounterExample | None
    validity: ValidityResult | None
    outcome: str

    def line(self) -> str:
        states = len(self.cex.e) if self.cex is not None else 0
        return (
            f"iter={self.iteration} blocks={len(self.partition)} "
            f"cex_states={states} verdict={self.outcome}"
        )


@dataclass
class CegarResult:
    verdict: Verdict
    trace: list[IterationRecord] = field(default_factory=list)


def cegar_loop(
    m: Mdp,
    psi: Formula,
    init: Partition | None = None,
    max_iters: int | None = None,
    order: EdgeOrder = "default",
    seed: int | None = None,
    init_from_scheduler: bool = False,
) -> CegarResult:
    """Run abstraction refinement until a verdict or ``max_iters`` rounds.

    ``max_iters`` defaults to ``|Q|``, which the strict-split progress
    guarantee never exceeds.
    """
    if Fragment.SAFETY not in classify(psi):
        raise FormulaError(f"{psi} is not a safety formula")
    part = coarsest_compatible(m) if init is None else init
    if not part.is_compatible(m):
        raise ValueError("initial partition is not compatible with the MDP")
    limit = len(m) if max_iters is None else max_iters
    trace: list[IterationRecord] = []
    for it in range(1, limit + 1):
        quo = quotient(m, part)
        if check(quo.abstract, psi):
            trace.append(IterationRecord(it, part, quo, None, None, VerdictKind.HOLDS.value))
            log.info(trace[-1].line())
            return CegarResult(Verdict(VerdictKind.HOLDS, it, part), trace)
        cex = gen_min_cex(quo.abstract, psi, order, seed, init_from_scheduler)
        res = check_validity(m, part, cex)
        if isinstance(res, Valid):
            if not is_canonical_simulation(cex.e, m, res.relation):
                raise AssertionError("validating relation failed the simulation re-check")
            if not res.relation.issubset(concretisation(part, cex)):
                raise AssertionError("validating relation is inconsistent with the abstraction")
            trace.append(IterationRecord(it, part, quo, cex, res, VerdictKind.VIOLATED.value))
            log.info(trace[-1].line())
            return CegarResult(Verdict(VerdictKind.VIOLATED, it, part, cex, res.relation), trace)
        trace.append(IterationRecord(it, part, quo, cex, res, "spurious"))
        log.info(trace[-1].line())
        finer = refine(part, res)
        if len(finer) <= len(part):
            raise AssertionError("refinement made no progress")
        part = finer
    return CegarResult(Verdict(VerdictKind.ITERATION_LIMIT, limit, part), trace)


def counterexample_is_minimal(abstract: Mdp, psi: Formula, cex: CounterExample) -> bool:
    """Re-deletion audit: removing any single edge of ``cex.e`` restores ``psi``."""
    e = cex.e
    for q, i, t in e.edges():
        chs = [list(c) for c in e.choices]
        chs[q][i] = chs[q][i].without(t)
        if not check(e.replace(choices=tuple(tuple(c) for c in chs)), psi):
            return False
    return True
