"""Finite MDPs with exact rational sub-probability measures.

States are dense integer indices; display names only matter for I/O and for
name-based containment checks.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .relation import SimRelation

ZERO = Fraction(0)
ONE = Fraction(1)


class SubDist(Mapping[int, Fraction]):
    """Immutable sparse sub-probability measure over state indices.

    Absent states have probability zero, so ``mu[q]`` never raises for an
    integer ``q``.
    """

    __slots__ = ("_entries", "_mass", "_hash")

    def __init__(self, entries: Mapping[int, object] | Iterable[tuple[int, object]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        d: dict[int, Fraction] = {}
        for q, p in items:
            p = Fraction(p)
            if p < 0:
                raise ValueError(f"negative probability {p} for state {q}")
            if q in d:
                raise ValueError(f"duplicate entry for state {q}")
            if p:
                d[int(q)] = p
        mass = sum(d.values(), ZERO)
        if mass > 1:
            raise ValueError(f"total mass {mass} exceeds 1")
        self._entries = dict(sorted(d.items()))
        self._mass = mass
        self._hash: int | None = None

    def __getitem__(self, q: int) -> Fraction:
        return self._entries.get(q, ZERO)

    def __contains__(self, q: object) -> bool:
        return q in self._entries

    def __iter__(self) -> Iterator[int]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SubDist):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._entries.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{q}: {p}" for q, p in self._entries.items())
        return f"SubDist({{{body}}})"

    @property
    def mass(self) -> Fraction:
        return self._mass

    def support(self) -> frozenset[int]:
        return frozenset(self._entries)

    def is_zero(self) -> bool:
        return not self._entries

    def measure(self, states: Iterable[int]) -> Fraction:
        return sum((self._entries.get(q, ZERO) for q in set(states)), ZERO)

    def without(self, q: int) -> "SubDist":
        return SubDist((t, p) for t, p in self._entries.items() if t != q)

    def pushforward(self, f: Callable[[int], int] | Sequence[int]) -> "SubDist":
        """Image measure under a state map; colliding entries add up."""
        get = f.__getitem__ if isinstance(f, Sequence) else f
        out: dict[int, Fraction] = {}
        for q, p in self._entries.items():
            t = get(q)
            out[t] = out.get(t, ZERO) + p
        return SubDist(out)


def post(mu: SubDist) -> frozenset[int]:
    """Support of ``mu``: the states it reaches with positive probability."""
    return mu.support()


@dataclass(frozen=True, eq=False)
class Mdp:
    """``(Q, q_I, delta, L)`` with ``Q = range(len(names))``.

    Every state has at least one choice; a state without transitions carries
    the single all-zero measure.
    """

    names: tuple[str, ...]
    labels: tuple[frozenset[str], ...]
    init: int
    choices: tuple[tuple[SubDist, ...], ...]
    alphabet: tuple[str, ...] = ()
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = len(self.names)
        if n == 0:
            raise ValueError("an MDP needs at least one state")
        if len(self.labels) != n or len(self.choices) != n:
            raise ValueError("names, labels and choices must have equal length")
        index = {name: i for i, name in enumerate(self.names)}
        if len(index) != n:
            raise ValueError("state names must be unique")
        if not 0 <= self.init < n:
            raise ValueError(f"initial state {self.init} out of range")
        for q, chs in enumerate(self.choices):
            if not chs:
                raise ValueError(f"state {self.names[q]} has no choices")
            for mu in chs:
                for t in mu:
                    if not 0 <= t < n:
                        raise ValueError(f"state {self.names[q]} has a successor {t} out of range")
        props = set().union(*self.labels)
        if not self.alphabet:
            object.__setattr__(self, "alphabet", tuple(sorted(props)))
        elif not props <= set(self.alphabet):
            raise ValueError(f"labels {sorted(props - set(self.alphabet))} not in alphabet")
        object.__setattr__(self, "_index", index)

    @classmethod
    def build(
        cls,
        states: Sequence[tuple[str, Iterable[str]]],
        init: str,
        transitions: Mapping[str, Sequence[Mapping[str, object]]] | None = None,
        alphabet: Sequence[str] = (),
    ) -> "Mdp":
        """Assemble an MDP from named states and named transition maps."""
        names = tuple(s for s, _ in states)
        index = {s: i for i, s in enumerate(names)}
        transitions = transitions or {}
        for s in transitions:
            if s not in index:
                raise ValueError(f"unknown state {s!r}")
        choices = []
        for s in names:
            chs = [SubDist({index[t]: p for t, p in mu.items()}) for mu in transitions.get(s, ())]
            choices.append(tuple(chs) or (SubDist(),))
        return cls(
            names,
            tuple(frozenset(lab) for _, lab in states),
            index[init],
            tuple(choices),
            tuple(alphabet),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mdp):
            return NotImplemented
        return (
            self.names == other.names
            and self.labels == other.labels
            and self.init == other.init
            and self.choices == other.choices
            and self.alphabet == other.alphabet
        )

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self.names)

    @property
    def states(self) -> range:
        return range(len(self.names))

    def index(self, name: str) -> int:
        return self._index[name]

    def edges(self) -> list[tuple[int, int, int]]:
        """Labeled underlying graph as ``(state, choice position, target)``."""
        return [
            (q, i, t)
            for q, chs in enumerate(self.choices)
            for i, mu in enumerate(chs)
            for t in mu
        ]

    def successors(self, q: int) -> frozenset[int]:
        return frozenset().union(*(mu.support() for mu in self.choices[q]))

    def reachable(self, start: int | None = None) -> list[int]:
        start = self.init if start is None else start
        seen = {start}
        queue = deque([start])
        while queue:
            q = queue.popleft()
            for t in sorted(self.successors(q)):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return sorted(seen)

    def replace(self, **changes) -> "Mdp":
        fields = dict(
            names=self.names,
            labels=self.labels,
            init=self.init,
            choices=self.choices,
            alphabet=self.alphabet,
        )
        fields.update(changes)
        return Mdp(**fields)

    def restrict(self, keep: Iterable[int]) -> tuple["Mdp", list[int]]:
        """Sub-MDP on ``keep`` (must contain init); measures are truncated.

        Returns the new MDP and the list mapping new indices to old ones.
        """
        old = sorted(set(keep))
        if self.init not in old:
            raise ValueError("restriction must keep the initial state")
        new_of = {q: i for i, q in enumerate(old)}
        choices = []
        for q in old:
            chs = tuple(
                SubDist((new_of[t], p) for t, p in mu.items() if t in new_of)
                for mu in self.choices[q]
            )
            choices.append(chs)
        m = Mdp(
            tuple(self.names[q] for q in old),
            tuple(self.labels[q] for q in old),
            new_of[self.init],
            tuple(choices),
            self.alphabet,
        )
        return m, old

    def rename(self, names: Sequence[str]) -> "Mdp":
        return self.replace(names=tuple(names))

    def is_dtmc(self) -> bool:
        return all(len(chs) == 1 for chs in self.choices)

    def __repr__(self) -> str:
        return f"Mdp(states={len(self)}, init={self.names[self.init]!r}, edges={len(self.edges())})"


def unroll(m: Mdp, q: int, k: int) -> Mdp:
    """The ``k``-th unrolling of ``m`` rooted at ``q``.

    State ``(q, k)`` is index 0; ``(q', j)`` for ``j < k`` is
    ``1 + j * |Q| + q'``. Measures at depth ``j + 1`` target depth ``j``;
    depth 0 has only the zero measure.
    """
    if not 0 <= q < len(m):
        raise ValueError(f"state {q} out of range")
    n = len(m)

    def lifted(state: int, depth: int) -> tuple[SubDist, ...]:
        if depth == 0:
            return (SubDist(),)
        out: list[SubDist] = []
        for mu in m.choices[state]:
            nu = SubDist((1 + (depth - 1) * n + t, p) for t, p in mu.items())
            if nu not in out:
                out.append(nu)
        return tuple(out)

    names = [f"{m.names[q]}@{k}"]
    labels = [m.labels[q]]
    choices = [lifted(q, k)]
    for j in range(k):
        for s in range(n):
            names.append(f"{m.names[s]}@{j}")
            labels.append(m.labels[s])
            choices.append(lifted(s, j))
    return Mdp(tuple(names), tuple(labels), 0, tuple(choices), m.alphabet)


def direct_sum(m: Mdp, m2: Mdp, init_side: tuple[int, int] = (0, 0)) -> Mdp:
    """Disjoint union ``Q x {0} | Q' x {1}`` with initial state ``init_side``.

    ``init_side`` is ``(side, state)``; right-hand states are shifted by
    ``len(m)``.
    """
    side, state = init_side
    shift = len(m)
    names = tuple(f"{s}#0" for s in m.names) + tuple(f"{s}#1" for s in m2.names)
    labels = m.labels + m2.labels
    choices = m.choices + tuple(
        tuple(SubDist((t + shift, p) for t, p in mu.items()) for mu in chs) for chs in m2.choices
    )
    alphabet = tuple(dict.fromkeys(m.alphabet + m2.alphabet))
    init = state if side == 0 else state + shift
    return Mdp(names, labels, init, choices, alphabet)


BAR = "_bar"


def bar_copy(m: Mdp, suffix: str = BAR) -> tuple[Mdp, SimRelation]:
    """Isomorphic copy with fresh names, plus ``inj = {(q_bar, q)}``."""
    copy = m.rename(tuple(s + suffix for s in m.names))
    inj = SimRelation(tuple(frozenset({q}) for q in m.states))
    return copy, inj


def _choice_fits(sub: SubDist, sup: SubDist, to_sup: Sequence[int]) -> bool:
    return all(sup[to_sup[t]] == p for t, p in sub.items())


def is_contained(sub: Mdp, sup: Mdp) -> bool:
    """Containment ``sub <= sup`` with states identified by name.

    Each nonzero entry of a ``sub`` choice must agree with the matched
    ``sup`` choice; the matching of choices is injective per state.
    """
    try:
        to_sup = [sup.index(s) for s in sub.names]
    except KeyError:
        return False
    if to_sup[sub.init] != sup.init:
        return False
    for q, t in enumerate(to_sup):
        if sub.labels[q] != sup.labels[t]:
            return False
        if not _injective_match(sub.choices[q], sup.choices[t], to_sup):
            return False
    return True


def _injective_match(small: Sequence[SubDist], big: Sequence[SubDist], to_big: Sequence[int]) -> bool:
    if len(small) > len(big):
        return False
    fits = [[j for j, nu in enumerate(big) if _choice_fits(mu, nu, to_big)] for mu in small]
    used: set[int] = set()

    def assign(i: int) -> bool:
        if i == len(small):
            return True
        for j in fits[i]:
            if j not in used:
                used.add(j)
                if assign(i + 1):
                    return True
                used.discard(j)
        return False

    return assign(0)


def number_size(p: Fraction) -> int:
    """Bits of numerator plus bits of denominator, in lowest terms."""
    return p.numerator.bit_length() + p.denominator.bit_length()


def mdp_size(m: Mdp) -> int:
    """Vertices + labeled edges + bit sizes of all positive probabilities."""
    vertices = len(m)
    edges = 0
    bits = 0
    for chs in m.choices:
        for mu in chs:
            edges += len(mu)
            bits += sum(number_size(p) for p in mu.values())
    return vertices + edges + bits


def cex_size(e: Mdp, r: SimRelation) -> int:
    return mdp_size(e) + len(r)


def is_acyclic(m: Mdp) -> bool:
    """Kahn's algorithm on the unlabeled underlying graph."""
    indeg = [0] * len(m)
    succ = [m.successors(q) for q in m.states]
    for ts in succ:
        for t in ts:
            indeg[t] += 1
    queue = deque(q for q in m.states if indeg[q] == 0)
    seen = 0
    while queue:
        q = queue.popleft()
        seen += 1
        for t in succ[q]:
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    return seen == len(m)
