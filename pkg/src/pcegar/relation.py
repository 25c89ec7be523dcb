"""Relations between the state spaces of two disjoint MDPs.

A :class:`SimRelation` stores only the cross pairs ``R`` of a canonical
relation ``id_left | R | id_right``; the identity parts are implicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


@dataclass(frozen=True)
class SimRelation:
    """Pairs ``(q, t)`` with ``q`` a left state and ``t`` a right state.

    ``images[q]`` is the image set ``R(q)``.
    """

    images: tuple[frozenset[int], ...]

    @classmethod
    def from_pairs(cls, n_left: int, pairs: Iterable[tuple[int, int]]) -> "SimRelation":
        img: list[set[int]] = [set() for _ in range(n_left)]
        for q, t in pairs:
            img[q].add(t)
        return cls(tuple(frozenset(s) for s in img))

    @classmethod
    def from_images(cls, images: Iterable[Iterable[int]]) -> "SimRelation":
        return cls(tuple(frozenset(s) for s in images))

    @classmethod
    def empty(cls, n_left: int) -> "SimRelation":
        return cls(tuple(frozenset() for _ in range(n_left)))

    @property
    def n_left(self) -> int:
        return len(self.images)

    def __call__(self, q: int) -> frozenset[int]:
        return self.images[q]

    def __contains__(self, pair: object) -> bool:
        q, t = pair  # type: ignore[misc]
        return 0 <= q < len(self.images) and t in self.images[q]

    def __len__(self) -> int:
        return sum(len(s) for s in self.images)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return self.pairs()

    def pairs(self) -> Iterator[tuple[int, int]]:
        for q, img in enumerate(self.images):
            for t in sorted(img):
                yield q, t

    def issubset(self, other: "SimRelation") -> bool:
        return len(self.images) == len(other.images) and all(
            a <= b for a, b in zip(self.images, other.images)
        )

    def then(self, after: "SimRelation") -> "SimRelation":
        """Relational composition ``after o self`` (apply ``self`` first)."""
        return SimRelation(
            tuple(
                frozenset().union(*(after.images[m] for m in img)) if img else frozenset()
                for img in self.images
            )
        )

    def is_functional(self) -> bool:
        return all(len(s) <= 1 for s in self.images)

    def is_total(self) -> bool:
        return all(self.images)

    def images_disjoint(self, over: Iterable[int] | None = None) -> bool:
        seen: set[int] = set()
        for q in range(len(self.images)) if over is None else over:
            img = self.images[q]
            if seen & img:
                return False
            seen |= img
        return True

    def owner_map(self) -> dict[int, int]:
        """Map each right state to the unique left state relating to it.

        Only meaningful when the images are pairwise disjoint.
        """
        owner: dict[int, int] = {}
        for q, img in enumerate(self.images):
            for t in img:
                owner[t] = q
        return owner
