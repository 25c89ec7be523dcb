"""Partitions, lifted measures and quotient MDPs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .mdp import Mdp, SubDist
from .relation import SimRelation


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty blocks covering ``range(n)``, ordered by least member."""

    blocks: tuple[frozenset[int], ...]
    block_of: tuple[int, ...]

    @classmethod
    def from_blocks(cls, n: int, blocks: Iterable[Iterable[int]]) -> "Partition":
        bs = [frozenset(b) for b in blocks]
        if any(not b for b in bs):
            raise PartitionError("empty block")
        seen: set[int] = set()
        for b in bs:
            if seen & b:
                raise PartitionError(f"states {sorted(seen & b)} occur in two blocks")
            seen |= b
        if seen != set(range(n)):
            raise PartitionError("blocks do not cover the state space")
        bs.sort(key=min)
        owner = [0] * n
        for i, b in enumerate(bs):
            for q in b:
                owner[q] = i
        return cls(tuple(bs), tuple(owner))

    @classmethod
    def identity(cls, n: int) -> "Partition":
        return cls.from_blocks(n, ([q] for q in range(n)))

    @classmethod
    def from_labels(cls, m: Mdp) -> "Partition":
        groups: dict[frozenset[str], list[int]] = {}
        for q in m.states:
            groups.setdefault(m.labels[q], []).append(q)
        return cls.from_blocks(len(m), groups.values())

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def n_states(self) -> int:
        return len(self.block_of)

    def block(self, q: int) -> frozenset[int]:
        return self.blocks[self.block_of[q]]

    def is_compatible(self, m: Mdp) -> bool:
        return len(m) == self.n_states and all(
            len({m.labels[q] for q in b}) == 1 for b in self.blocks
        )

    def refines(self, coarse: "Partition") -> bool:
        return self.n_states == coarse.n_states and all(
            len({coarse.block_of[q] for q in b}) == 1 for b in self.blocks
        )

    def split(self, block: frozenset[int], part: Iterable[int]) -> "Partition":
        """Replace ``block`` by ``part & block`` and the rest; empty halves vanish."""
        if block not in self.blocks:
            raise PartitionError("block is not part of this partition")
        inside = block & frozenset(part)
        rest = block - inside
        others = [b for b in self.blocks if b != block]
        return Partition.from_blocks(self.n_states, others + [h for h in (inside, rest) if h])


def coarsest_compatible(m: Mdp) -> Partition:
    """Label-equality classes."""
    return Partition.from_labels(m)


def lift(mu: SubDist, part: Partition) -> SubDist:
    """``[mu]([q]) = mu(block of q)``."""
    return mu.pushforward(part.block_of)


@dataclass(frozen=True)
class Quotient:
    abstract: Mdp
    alpha: SimRelation  # concrete -> abstract
    gamma: SimRelation  # abstract -> concrete
    partition: Partition


def block_name(m: Mdp, block: Iterable[int]) -> str:
    return "+".join(m.names[q] for q in sorted(block))


def quotient(m: Mdp, part: Partition) -> Quotient:
    """Abstract MDP over the blocks of ``part``.

    Each block offers the distinct lifted choices of its members, in order of
    first appearance (member index, then choice index).
    """
    if not part.is_compatible(m):
        raise PartitionError("partition mixes states with different labels")
    choices = []
    for b in part.blocks:
        seen: list[SubDist] = []
        for q in sorted(b):
            for mu in m.choices[q]:
                nu = lift(mu, part)
                if nu not in seen:
                    seen.append(nu)
        choices.append(tuple(seen))
    abstract = Mdp(
        tuple(block_name(m, b) for b in part.blocks),
        tuple(m.labels[min(b)] for b in part.blocks),
        part.block_of[m.init],
        tuple(choices),
        m.alphabet,
    )
    alpha = SimRelation(tuple(frozenset({a}) for a in part.block_of))
    gamma = SimRelation(part.blocks)
    return Quotient(abstract, alpha, gamma, part)


def refinement_relation(fine: Partition, coarse: Partition) -> SimRelation:
    """``{([q]_fine, [q]_coarse)}`` between the two quotients' states."""
    if not fine.refines(coarse):
        raise PartitionError("first partition does not refine the second")
    return SimRelation(tuple(frozenset({coarse.block_of[min(b)]}) for b in fine.blocks))


def partition_from_names(m: Mdp, blocks: Sequence[Sequence[str]]) -> Partition:
    """Listed blocks by state name; unlisted states become singletons."""
    listed = [[m.index(s) for s in b] for b in blocks]
    covered = {q for b in listed for q in b}
    return Partition.from_blocks(len(m), listed + [[q] for q in m.states if q not in covered])
