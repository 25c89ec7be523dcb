"""Exact model checking of the safety/liveness fragments on MDPs.

Only maximal probabilities are needed: ``q |= P<p[phi]`` iff the supremum over
schedulers of the measure of ``phi`` is below ``p``. Until-probabilities are
computed by graph precomputation followed by policy iteration with exact
rational linear solves.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

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
)
from .mdp import ONE, ZERO, Mdp, SubDist


@dataclass(frozen=True)
class Scheduler:
    """Memoryless scheduler: one choice index per state."""

    choice: tuple[int, ...]

    def __getitem__(self, q: int) -> int:
        return self.choice[q]


def induced_dtmc(m: Mdp, scheduler: Scheduler) -> Mdp:
    """``m^S``: same states, only the scheduled choice kept."""
    return m.replace(choices=tuple((m.choices[q][scheduler[q]],) for q in m.states))


def max_next(m: Mdp, target: Iterable[int]) -> tuple[tuple[Fraction, ...], Scheduler]:
    target = frozenset(target)
    values = []
    sched = []
    for chs in m.choices:
        best, arg = ZERO, 0
        for i, mu in enumerate(chs):
            v = mu.measure(target & mu.support())
            if v > best:
                best, arg = v, i
        values.append(best)
        sched.append(arg)
    return tuple(values), Scheduler(tuple(sched))


def prob0_max(m: Mdp, safe: Iterable[int], target: Iterable[int]) -> frozenset[int]:
    """States from which no scheduler reaches ``target`` through ``safe``."""
    safe, target = frozenset(safe), frozenset(target)
    can = set(target)
    changed = True
    while changed:
        changed = False
        for q in m.states:
            if q in can or q not in safe:
                continue
            if any(mu.support() & can for mu in m.choices[q]):
                can.add(q)
                changed = True
    return frozenset(m.states) - can


def prob1_max(
    m: Mdp, safe: Iterable[int], target: Iterable[int]
) -> tuple[frozenset[int], dict[int, int]]:
    """States where some scheduler reaches ``target`` through ``safe`` surely.

    Returns the set and, for its non-target states, a choice that realises
    probability one. Choices losing mass to the implicit sink never qualify.
    """
    safe, target = frozenset(safe), frozenset(target)
    cand = set(m.states)
    while True:
        reach = set(target & cand)
        witness: dict[int, int] = {}
        changed = True
        while changed:
            changed = False
            for q in m.states:
                if q in reach or q not in safe or q not in cand:
                    continue
                for i, mu in enumerate(m.choices[q]):
                    supp = mu.support()
                    if mu.mass == 1 and supp <= cand and supp & reach:
                        reach.add(q)
                        witness[q] = i
                        changed = True
                        break
        if reach == cand:
            return frozenset(reach), witness
        cand = reach


def _solve(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals; ``a`` must be nonsingular."""
    n = len(b)
    rows = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if piv is None:
            raise ArithmeticError("singular system in policy evaluation")
        rows[col], rows[piv] = rows[piv], rows[col]
        p = rows[col][col]
        pivot_row = [x / p for x in rows[col]]
        rows[col] = pivot_row
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], pivot_row)]
    return [rows[r][n] for r in range(n)]


def max_until(
    m: Mdp, safe: Iterable[int], target: Iterable[int]
) -> tuple[tuple[Fraction, ...], Scheduler]:
    """Maximal probability of ``safe U target`` from every state, exactly."""
    safe, target = frozenset(safe), frozenset(target)
    no = prob0_max(m, safe, target)
    yes, witness = prob1_max(m, safe, target)
    maybe = [q for q in m.states if q not in no and q not in yes]
    values = [ONE if q in yes else ZERO for q in m.states]
    sched = [witness.get(q, 0) for q in m.states]
    if not maybe:
        return tuple(values), Scheduler(tuple(sched))

    # initial proper policy: each maybe-state moves closer to `yes`
    done = set(yes)
    pending = set(maybe)
    while pending:
        layer = {}
        for q in sorted(pending):
            for i, mu in enumerate(m.choices[q]):
                if mu.support() & done:
                    layer[q] = i
                    break
        if not layer:
            raise AssertionError("maybe-states without a path to the target")
        for q, i in layer.items():
            sched[q] = i
        done |= layer.keys()
        pending -= layer.keys()

    pos = {q: k for k, q in enumerate(maybe)}

    def q_value(mu: SubDist, vals: Sequence[Fraction]) -> Fraction:
        return sum((p * vals[t] for t, p in mu.items()), ZERO)

    while True:
        a = [[ZERO] * len(maybe) for _ in maybe]
        b = [ZERO] * len(maybe)
        for q in maybe:
            r = pos[q]
            a[r][r] += 1
            for t, p in m.choices[q][sched[q]].items():
                if t in pos:
                    a[r][pos[t]] -= p
                elif t in yes:
                    b[r] += p
        x = _solve(a, b)
        for q in maybe:
            values[q] = x[pos[q]]
        improved = False
        for q in maybe:
            current = values[q]
            best, arg = current, sched[q]
            for i, mu in enumerate(m.choices[q]):
                v = q_value(mu, values)
                if v > best:
                    best, arg = v, i
            if arg != sched[q]:
                # lowest index among the maximisers
                arg = min(i for i, mu in enumerate(m.choices[q]) if q_value(mu, values) == best)
                sched[q] = arg
                improved = True
        if not improved:
            return tuple(values), Scheduler(tuple(sched))


class Checker:
    """Memoising model checker for one MDP (the Sat table)."""

    def __init__(self, m: Mdp):
        self.m = m
        self.sat: dict[Formula, frozenset[int]] = {}
        self.prob: dict[object, tuple[tuple[Fraction, ...], Scheduler]] = {}

    def sat_states(self, f: Formula) -> frozenset[int]:
        hit = self.sat.get(f)
        if hit is not None:
            return hit
        m = self.m
        if isinstance(f, TrueF):
            out = frozenset(m.states)
        elif isinstance(f, FalseF):
            out = frozenset()
        elif isinstance(f, Prop):
            out = frozenset(q for q in m.states if f.name in m.labels[q])
        elif isinstance(f, Not):
            out = frozenset(m.states) - self.sat_states(f.arg)
        elif isinstance(f, And):
            out = self.sat_states(f.left) & self.sat_states(f.right)
        elif isinstance(f, Or):
            out = self.sat_states(f.left) | self.sat_states(f.right)
        elif isinstance(f, Prob):
            vals, _ = self.max_prob(f.path)
            out = frozenset(q for q in m.states if f.holds(vals[q]))
        else:
            raise TypeError(f"not a state formula: {f!r}")
        self.sat[f] = out
        return out

    def max_prob(self, path: Next | Until) -> tuple[tuple[Fraction, ...], Scheduler]:
        hit = self.prob.get(path)
        if hit is not None:
            return hit
        if isinstance(path, Next):
            out = max_next(self.m, self.sat_states(path.arg))
        elif isinstance(path, Until):
            out = max_until(self.m, self.sat_states(path.left), self.sat_states(path.right))
        else:
            raise TypeError(f"not a path formula: {path!r}")
        self.prob[path] = out
        return out


def _require_fragment(f: Formula) -> None:
    if classify(f) == Fragment.OUTSIDE:
        raise FormulaError(f"{f} is outside the safety and liveness fragments")


def max_prob(m: Mdp, path: Next | Until) -> tuple[Fraction, ...]:
    """Supremum over schedulers of the measure of ``path``, per state."""
    return Checker(m).max_prob(path)[0]


def sat_states(m: Mdp, f: Formula) -> frozenset[int]:
    _require_fragment(f)
    return Checker(m).sat_states(f)


def check(m: Mdp, f: Formula) -> bool:
    """``m |= f``: the initial state satisfies ``f``."""
    return m.init in sat_states(m, f)


def violating_scheduler(m: Mdp, f: Formula) -> Scheduler | None:
    """Maximising scheduler for a flat ``P<p[...]`` formula, else ``None``.

    Flat means both path operands are propositional, so the scheduler alone
    witnesses the violation.
    """
    if not isinstance(f, Prob):
        return None
    operands = [f.path.arg] if isinstance(f.path, Next) else [f.path.left, f.path.right]
    if any(_has_prob(g) for g in operands):
        return None
    return Checker(m).max_prob(f.path)[1]


def _has_prob(f: Formula) -> bool:
    if isinstance(f, Prob):
        return True
    if isinstance(f, Not):
        return _has_prob(f.arg)
    if isinstance(f, (And, Or)):
        return _has_prob(f.left) or _has_prob(f.right)
    return False
