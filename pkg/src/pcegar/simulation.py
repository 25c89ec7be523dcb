"""Simulation between disjoint MDPs.

``mu <=_R mu2`` asks that ``mu(A) <= mu2(A)`` for every set ``A`` closed under
``id | R | id``. Closed sets are never enumerated: the general test is a
max-flow feasibility problem, and when the images of ``R`` are pairwise
disjoint a per-state comparison suffices.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Mapping

from .mdp import ZERO, Mdp, SubDist
from .relation import SimRelation

__all__ = [
    "SimRelation",
    "dist_leq",
    "dist_leq_blockwise",
    "is_canonical_simulation",
    "compute_simulation",
    "simulates",
    "label_seed",
]


def _max_flow(cap: dict[object, dict[object, Fraction]], source: object, sink: object) -> Fraction:
    """Edmonds-Karp on an exact rational network (``cap`` is mutated)."""
    for u in list(cap):
        for v in list(cap[u]):
            cap.setdefault(v, {}).setdefault(u, ZERO)
    flow = ZERO
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v, c in cap[u].items():
                if c > 0 and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            return flow
        bottleneck = None
        v = sink
        while parent[v] is not None:
            u = parent[v]
            c = cap[u][v]
            bottleneck = c if bottleneck is None or c < bottleneck else bottleneck
            v = u
        v = sink
        while parent[v] is not None:
            u = parent[v]
            cap[u][v] -= bottleneck
            cap[v][u] += bottleneck
            v = u
        flow += bottleneck


def dist_leq(mu: SubDist, mu2: SubDist, r: SimRelation) -> bool:
    """Decide ``mu <=_R mu2`` (``mu`` over left states, ``mu2`` over right).

    Feasible iff a flow of value ``mass(mu)`` routes each left state's mass
    to right states in its image without exceeding ``mu2``.
    """
    total = mu.mass
    if total == 0:
        return True
    if total > mu2.mass:
        return False
    src, snk = ("s",), ("t",)
    cap: dict[object, dict[object, Fraction]] = {src: {}}
    for q, p in mu.items():
        targets = [t for t in r(q) if t in mu2]
        if not targets:
            return False
        cap[src][("l", q)] = p
        cap[("l", q)] = {("r", t): total for t in targets}
    for t, p in mu2.items():
        cap.setdefault(("r", t), {})[snk] = p
    return _max_flow(cap, src, snk) == total


class OverlappingImages(ValueError):
    pass


def dist_leq_blockwise(mu: SubDist, mu2: SubDist, r: SimRelation) -> bool:
    """``mu <=_R mu2`` when the images ``R(b)`` are pairwise disjoint.

    Then ``mu(b) <= mu2(R(b))`` for each ``b`` is necessary and sufficient.
    """
    if not r.images_disjoint(mu):
        raise OverlappingImages("relation images overlap on the support of mu")
    return all(p <= mu2.measure(r(b) & mu2.support()) for b, p in mu.items())


def blockwise_leq(mu: SubDist, mu2: SubDist, owner: Mapping[int, int]) -> bool:
    """Fast form of :func:`dist_leq_blockwise` given the inverse image map.

    ``owner[t]`` is the left state whose image contains ``t``.
    """
    acc: dict[int, Fraction] = {}
    for t, p in mu2.items():
        b = owner.get(t)
        if b is not None:
            acc[b] = acc.get(b, ZERO) + p
    return all(p <= acc.get(b, ZERO) for b, p in mu.items())


def label_seed(left: Mdp, right: Mdp) -> SimRelation:
    """All label-equal pairs."""
    by_label: dict[frozenset[str], set[int]] = {}
    for t in right.states:
        by_label.setdefault(right.labels[t], set()).add(t)
    return SimRelation(tuple(frozenset(by_label.get(left.labels[q], ())) for q in left.states))


def _matched(left: Mdp, right: Mdp, q: int, t: int, r: SimRelation) -> bool:
    return all(any(dist_leq(mu, nu, r) for nu in right.choices[t]) for mu in left.choices[q])


def is_canonical_simulation(left: Mdp, right: Mdp, r: SimRelation) -> bool:
    """Whether ``id | r | id`` is a simulation relating the initial states."""
    if r.n_left != len(left) or (left.init, right.init) not in r:
        return False
    for q, t in r.pairs():
        if not 0 <= t < len(right) or left.labels[q] != right.labels[t]:
            return False
        if not _matched(left, right, q, t, r):
            return False
    return True


def compute_simulation(left: Mdp, right: Mdp, seed: SimRelation | None = None) -> SimRelation | None:
    """Greatest canonical simulation inside ``seed``; ``None`` if it misses init.

    ``seed`` defaults to all label-equal pairs; other seeds are intersected
    with label equality.
    """
    base = label_seed(left, right)
    if seed is not None:
        base = SimRelation(tuple(a & b for a, b in zip(seed.images, base.images)))
    images = [set(s) for s in base.images]
    changed = True
    while changed:
        changed = False
        current = SimRelation.from_images(images)
        for q in left.states:
            for t in sorted(images[q]):
                if not _matched(left, right, q, t, current):
                    images[q].discard(t)
                    current = SimRelation.from_images(images)
                    changed = True
    result = SimRelation.from_images(images)
    if right.init not in result(left.init):
        return None
    return result


def simulates(right: Mdp, left: Mdp) -> bool:
    """``left <= right``."""
    return compute_simulation(left, right) is not None
