import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pcegar.abstraction import Partition, quotient
from pcegar.cegar import CounterExample, Valid, check_validity, gen_min_cex
from pcegar.fixtures import kripke, loop_chain, two_choice_mdp
from pcegar.formula import FormulaError, negate, parse_formula, sub_and_path_formulas
from pcegar.mdp import Mdp, SubDist, bar_copy, unroll
from pcegar.modelcheck import check, sat_states
from pcegar.onthefly import OtfKind, otf_check
from randgen import random_mdp, random_partition, random_safety

CHAIN_PSI = "P<=3/4[true U P]"


def identity_cex(m):
    return CounterExample(*bar_copy(m))


def test_chain_violation_found_at_first_depth_above_three_quarters():
    m = loop_chain()
    psi = parse_formula(CHAIN_PSI)
    res = otf_check(m, Partition.identity(3), identity_cex(m), psi)
    goal = {m.index("q3")}
    horizon = [oracles.finite_horizon_until(m, set(m.states), goal, k)[m.init] for k in range(10)]
    first = next(k for k, v in enumerate(horizon) if v > F(3, 4))
    assert res.kind is OtfKind.SAFETY_VIOLATED
    assert res.depth == first == 6
    assert [v for v in horizon[2:7]] == [F(1, 2), F(1, 2), F(3, 4), F(3, 4), F(7, 8)]


def test_chain_trace_lines():
    m = loop_chain()
    res = otf_check(m, Partition.identity(3), identity_cex(m), parse_formula(CHAIN_PSI))
    lines = res.trace()
    assert lines[0] == "k=0 |R|=3 sat_init=False maxprob_init=0"
    assert lines[-1] == "k=6 |R|=3 sat_init=True maxprob_init=7/8"
    dec = otf_check(m, Partition.identity(3), identity_cex(m), parse_formula(CHAIN_PSI), decimal_trace=True)
    assert dec.trace()[-1] == "k=6 |R|=3 sat_init=True maxprob_init=0.875"
    assert dec.kind is res.kind and dec.depth == res.depth


def test_max_depth_zero():
    m = loop_chain()
    res = otf_check(m, Partition.identity(3), identity_cex(m), parse_formula(CHAIN_PSI), max_depth=0)
    assert res.kind is OtfKind.DEPTH_EXCEEDED and res.depth == 0


def test_depth_guard_on_a_holding_property():
    m = loop_chain()
    res = otf_check(m, Partition.identity(3), identity_cex(m), parse_formula("P<=1[true U P]"), max_depth=20)
    assert res.kind is OtfKind.DEPTH_EXCEEDED and res.depth == 20


def test_rejects_non_weak_safety():
    m = loop_chain()
    with pytest.raises(FormulaError):
        otf_check(m, Partition.identity(3), identity_cex(m), parse_formula("P<3/4[true U P]"))


def test_not_simulated_on_kripke():
    m, part, _ = kripke()
    psi = parse_formula("P<=0[true U P]")
    cex = gen_min_cex(quotient(m, part).abstract, psi)
    res = otf_check(m, part, cex, psi, max_depth=64)
    assert res.kind is OtfKind.NOT_SIMULATED
    assert not isinstance(check_validity(m, part, cex), Valid)


def test_next_formula_on_two_choice_mdp():
    m, _ = two_choice_mdp()
    psi = parse_formula("P<=1/2[X P1]")
    res = otf_check(m, Partition.identity(3), identity_cex(m), psi)
    assert res.kind is OtfKind.SAFETY_VIOLATED and res.depth == 1


def test_weak_simulation_gap():
    # the concrete model mimics one step of the self-loop but not the loop itself
    m = Mdp.build([("s0", ("P", "Q")), ("s1", ("P", "Q"))], "s0", {"s0": [{"s1": 1}]})
    part = Partition.from_blocks(2, [[0, 1]])
    psi = parse_formula("P<=1/2[X Q]")
    cex = gen_min_cex(quotient(m, part).abstract, psi)
    assert len(cex.e) == 1 and cex.e.choices[0] == (SubDist({0: 1}),)
    assert not isinstance(check_validity(m, part, cex), Valid)
    res = otf_check(m, part, cex, psi)
    assert res.kind is OtfKind.SAFETY_VIOLATED and res.depth == 1
    assert not check(m, psi)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_sat_k_matches_explicit_unrolling(seed):
    rng = random.Random(seed)
    e = random_mdp(rng, 5, 2)
    psi = random_safety(rng, 2, weak=True)
    states, _ = sub_and_path_formulas(negate(psi))
    cex = identity_cex(e)
    for k in range(5):
        res = otf_check(e, Partition.identity(len(e)), cex, psi, max_depth=k)
        if res.depth != k:
            break
        for a in e.states:
            u = unroll(e, a, k)
            for f in states:
                assert (f in res.state.sat_curr[a]) == (u.init in sat_states(u, f))


def _decided(seed, count):
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


def test_incremental_matches_plain():
    for m, part, psi, cex in _decided(41, 150):
        a = otf_check(m, part, cex, psi, max_depth=64)
        b = otf_check(m, part, cex, psi, max_depth=64, incremental=True)
        assert (a.kind, a.depth) == (b.kind, b.depth)
        assert a.trace() == b.trace()
        assert a.state.sat_curr == b.state.sat_curr
        assert a.state.maxprob_curr == b.state.maxprob_curr


def test_sound_directions_against_offline_pipeline():
    for m, part, psi, cex in _decided(43, 400):
        res = otf_check(m, part, cex, psi, max_depth=64)
        off = check_validity(m, part, cex)
        if res.kind is OtfKind.NOT_SIMULATED:
            assert not isinstance(off, Valid)
        if res.kind is OtfKind.SAFETY_VIOLATED:
            assert not check(m, psi)
        if isinstance(off, Valid):
            assert res.kind is OtfKind.SAFETY_VIOLATED
