"""Numbered acceptance criteria.

Each test carries an ``acceptance`` marker; ``conftest.py`` prints one
PASS/FAIL line per criterion at the end of the run. Random instances come
from fixed seeds and expected values from ``oracles``.
"""

import random
import time
from fractions import Fraction as F

import pytest

import oracles
from pcegar.abstraction import Partition, coarsest_compatible, quotient
from pcegar.cegar import (
    CounterExample,
    InvalidityWitness,
    Valid,
    VerdictKind,
    cegar_loop,
    check_validity,
    gen_min_cex,
    refine,
)
from pcegar.fixtures import kripke, loop_chain, two_choice_mdp
from pcegar.formula import Until, parse_formula
from pcegar.mdp import Mdp, SubDist, bar_copy, is_contained
from pcegar.modelcheck import check, max_prob
from pcegar.onthefly import OtfKind, otf_check
from pcegar.relation import SimRelation
from pcegar.simulation import compute_simulation, dist_leq, dist_leq_blockwise
from randgen import random_mdp, random_partition, random_safety, random_subdist

acceptance = pytest.mark.acceptance


def drop_edges(m, drop):
    chs = [list(c) for c in m.choices]
    for q, i, t in drop:
        chs[q][i] = chs[q][i].without(t)
    return m.replace(choices=tuple(tuple(c) for c in chs))


def strip_bar(e):
    return e.rename([n[: -len("_bar")] for n in e.names])


@acceptance(1, "two-choice fixture has no violating DTMC; both choices kept")
def test_two_choice_fixture():
    m, psi = two_choice_mdp()
    assert psi == parse_formula("P<3/4[X (P1&!P2)] | P<3/4[X (!P1&P2)]")
    assert not check(m, psi) and not oracles.holds(m, psi)
    cex = gen_min_cex(quotient(m, Partition.identity(len(m))).abstract, psi)
    e = cex.e
    assert len(e.choices[e.init]) >= 2
    assert not check(e, psi)
    for i in range(len(e.choices[e.init])):
        chs = list(e.choices)
        chs[e.init] = chs[e.init][:i] + chs[e.init][i + 1 :]
        assert check(e.replace(choices=tuple(chs)), psi)
        assert oracles.holds(e.replace(choices=tuple(chs)), psi)


@acceptance(2, "chain: reach probability 1, violated, all three edges needed")
def test_chain_fixture():
    m = loop_chain(F(1, 2))
    reach = parse_formula("P<1[true U P]")
    assert isinstance(reach.path, Until)
    q1 = m.index("q1")
    assert max_prob(m, reach.path)[q1] == 1
    assert oracles.close(oracles.path_max(m, reach.path)[q1], 1)
    assert not check(m, reach)
    cex = gen_min_cex(m, reach)
    edges = cex.e.edges()
    assert len(edges) == 3
    for edge in edges:
        assert check(drop_edges(cex.e, [edge]), reach)
        assert oracles.holds(drop_edges(cex.e, [edge]), reach)


@acceptance(3, "Kripke structure: 8-state quotient, q5/q6 split, cegar within 12 rounds")
def test_kripke_refinement():
    m, part, psi = kripke()
    abstract = quotient(m, part).abstract
    assert len(m) == 12 and len(abstract) == 8
    to_q4 = next((s, i, t) for (s, i, t) in abstract.edges() if s == abstract.init and abstract.names[t] == "q4")
    cex = gen_min_cex(abstract, psi, order=[to_q4])
    assert cex.e.names == ("q0+q1+q3_bar", "q5+q6_bar", "q7+q8_bar", "q11_bar")
    w = check_validity(m, part, cex)
    assert isinstance(w, InvalidityWitness)
    b56 = cex.e.index("q5+q6_bar")
    assert {m.names[q] for q in w.r_old(b56)} == {"q6"}
    finer = refine(part, w)
    blocks = sorted(sorted(m.names[q] for q in b) for b in finer.blocks)
    assert ["q5"] in blocks and ["q6"] in blocks
    assert len(finer) == len(part) + 1
    res = cegar_loop(m, psi, init=part, max_iters=10 * len(m))
    assert res.verdict.kind is VerdictKind.VIOLATED
    assert res.verdict.iterations <= len(m) == 12


@acceptance(4, "greedy counterexamples contain no smaller counterexample (brute force)")
def test_minimality_brute_force():
    rng = random.Random(20240404)
    done = 0
    while done < 200:
        m = random_mdp(rng, 5, 2)
        psi = random_safety(rng, 2)
        if oracles.holds(m, psi):
            continue
        assert not check(m, psi)
        done += 1
        cex = gen_min_cex(m, psi)
        e = cex.e
        assert not oracles.holds(e, psi)
        assert is_contained(strip_bar(e), m)
        for drop, _ in oracles.sub_mdps(e):
            if drop:
                assert oracles.holds(drop_edges(e, drop), psi), (m, psi, drop)


def _simulated_pair(rng):
    kind = rng.randrange(3)
    if kind == 0:
        # right is a quotient of left
        left = random_mdp(rng, 5, 2)
        return left, quotient(left, random_partition(rng, left)).abstract
    if kind == 1:
        # left keeps a random subset of right's edges
        right = random_mdp(rng, 5, 2)
        drop = [x for x in right.edges() if rng.random() < 0.4]
        return drop_edges(right, drop), right
    while True:
        left, right = random_mdp(rng, 4, 2, props=("P",)), random_mdp(rng, 4, 3, props=("P",))
        if compute_simulation(left, right) is not None:
            return left, right


@acceptance(5, "safety is reflected along simulation (500 pairs)")
def test_safety_reflection():
    rng = random.Random(5150)
    checked = 0
    for _ in range(500):
        left, right = _simulated_pair(rng)
        rel = compute_simulation(left, right)
        assert rel is not None
        assert (left.init, right.init) in oracles.greatest_simulation(left, right)
        for _ in range(3):
            psi = random_safety(rng, 3, props=tuple(sorted(set().union(*left.labels, *right.labels)) or ("P",)))
            if oracles.holds(right, psi):
                checked += 1
                assert oracles.holds(left, psi), (left, right, psi)
    assert checked > 200


@acceptance(6, "blockwise distribution test equals the flow test (1000 instances)")
def test_blockwise_matches_flow():
    rng = random.Random(6006)
    yes = 0
    for _ in range(1000):
        n1, n2 = rng.randint(1, 5), rng.randint(1, 6)
        mu, nu = random_subdist(rng, n1, 3), random_subdist(rng, n2, 4)
        imgs = [set() for _ in range(n1)]
        for t in range(n2):
            if rng.random() < 0.8:
                imgs[rng.randrange(n1)].add(t)
        r = SimRelation.from_images(imgs)
        a = dist_leq_blockwise(mu, nu, r)
        assert a == dist_leq(mu, nu, r)
        assert a == oracles.flow_leq(mu, nu, set(r.pairs()))
        yes += a
    assert 100 < yes < 900


@acceptance(7, "every refinement splits a block; cegar rounds never exceed |Q|")
def test_refinement_progress():
    rng = random.Random(7007)
    refinements = 0
    for run in range(800):
        # a single proposition keeps blocks coarse, so refinement actually happens
        props = ("P",) if run % 2 else ("P", "Q")
        m = random_mdp(rng, 7, 2, props=props, min_states=3)
        psi = random_safety(rng, 2, props=props)
        order = ("default", "reverse", "random")[run % 3]
        part = coarsest_compatible(m) if run % 5 else random_partition(rng, m)
        res = cegar_loop(m, psi, init=part, max_iters=10 * len(m), order=order, seed=run)
        assert res.verdict.kind is not VerdictKind.ITERATION_LIMIT
        assert res.verdict.iterations <= len(m)
        assert (res.verdict.kind is VerdictKind.HOLDS) == oracles.holds(m, psi)
        for a, b in zip(res.trace, res.trace[1:]):
            assert isinstance(a.validity, InvalidityWitness)
            assert len(b.partition) > len(a.partition)
            assert b.partition.refines(a.partition)
            assert b.partition == refine(a.partition, a.validity)
            refinements += 1
    assert refinements > 100


def _otf_instances(seed, count):
    rng = random.Random(seed)
    got = 0
    while got < count:
        m = random_mdp(rng, 6, 2)
        part = random_partition(rng, m)
        psi = random_safety(rng, 2, weak=True)
        abstract = quotient(m, part).abstract
        if check(abstract, psi):
            continue
        got += 1
        yield m, part, psi, gen_min_cex(abstract, psi)


@acceptance(8, "on-the-fly verdict matches the offline pipeline; chain found at first depth above 3/4")
def test_on_the_fly_agreement():
    m = loop_chain(F(1, 2))
    psi = parse_formula("P<=3/4[true U P]")
    cex = CounterExample(*bar_copy(m))
    res = otf_check(m, Partition.identity(len(m)), cex, psi)
    goal = {m.index("q3")}
    horizon = [oracles.finite_horizon_until(m, set(m.states), goal, k)[m.init] for k in range(12)]
    assert horizon[2:7] == [F(1, 2), F(1, 2), F(3, 4), F(3, 4), F(7, 8)]
    first = next(k for k, v in enumerate(horizon) if v > F(3, 4))
    assert res.kind is OtfKind.SAFETY_VIOLATED and res.depth == first

    expected = {True: OtfKind.SAFETY_VIOLATED, False: OtfKind.NOT_SIMULATED}
    mismatches = []
    for idx, (m, part, psi, cex) in enumerate(_otf_instances(8008, 100)):
        offline = isinstance(check_validity(m, part, cex), Valid)
        got = otf_check(m, part, cex, psi, max_depth=64).kind
        if got is not expected[offline]:
            mismatches.append((idx, offline, got.value))
    assert not mismatches, f"{len(mismatches)}/100 disagree: {mismatches}"


def _two_chains(n=100):
    """Two ``n``-state chains with matching labels; 2n states, 6n edges."""
    names = [f"x{i}" for i in range(n)] + [f"y{i}" for i in range(n)]
    labels = tuple(frozenset({"P"}) if i % n == n - 1 else frozenset() for i in range(2 * n))
    choices = []
    for side in range(2):
        for i in range(n):
            j = (i + 1) % n
            own, other = side * n + j, (1 - side) * n + j
            p = F(1, 2) if side == 0 else F(1, 3)
            choices.append((SubDist({own: 1}), SubDist({own: 1 - p, other: p})))
    return Mdp(tuple(names), labels, 0, tuple(choices), ("P",))


@acceptance(9, "validity check on a 200-state, 600-edge model finishes under 10 s")
def test_validity_timing():
    m = _two_chains()
    assert len(m) == 200 and len(m.edges()) == 600
    part = Partition.from_blocks(200, [[i, i + 100] for i in range(100)])
    abstract = quotient(m, part).abstract
    cex = CounterExample(*bar_copy(abstract))
    start = time.perf_counter()
    res = check_validity(m, part, cex)
    elapsed = time.perf_counter() - start
    assert isinstance(res, (Valid, InvalidityWitness))
    assert elapsed < 10.0, elapsed
