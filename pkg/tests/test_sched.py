"""Scheduler policies, exact evaluation, backward induction, sampling."""

from fractions import Fraction as F

import pytest

from ivalbench import machine, models, sched
from ivalbench.lang import (
    Alloc, Faa, Flip, Fork, If, Let, Load, Var, Wait, num, parse, seq, unit,
)
from ivalbench.models import read_int


def lite_counter(threads: int):
    """Flip-guarded fetch-and-add counter, small enough for brute force."""
    l, d = Var("l"), Var("d")
    incr = If(Flip(num(1), num(2)), seq(Faa(l, num(1)), unit), unit)
    worker = seq(incr, Faa(d, num(1)))
    body = [Fork(worker) for _ in range(threads - 1)]
    body += [incr, Wait(d, num(threads - 1)), Load(l)]
    return Let("l", Alloc(num(0)), Let("d", Alloc(num(0)), seq(*body)))


def test_round_robin_alternates():
    t = machine.initial_trace([parse("(flip 1 2)"), parse("(flip 1 2)")])
    pol = sched.round_robin()
    assert pol.decide(t) == 0
    t2 = t.extend(t.curr)
    assert pol.decide(t2) == 1
    assert pol.decide(t2.extend(t2.curr)) == 0


def test_fixed_script_pads_with_stutters():
    pol = sched.fixed_script([1, 0])
    t = machine.initial_trace([parse("(flip 1 2)")])
    long = t.extend(t.curr).extend(t.curr)
    assert pol.decide(long) >= len(long.curr.threads)


def test_seeded_random_reproducible():
    a, b = sched.seeded_random(5), sched.seeded_random(5)
    t = machine.initial_trace([parse("1"), parse("2"), parse("3")])
    assert [a.decide(t)] * 3 == [b.decide(t)] * 3
    assert a.decide_quick(4, t.curr) == b.decide_quick(4, t.curr)
    c = sched.seeded_random(6)
    picks_a = [a.decide_quick(s, t.curr) for s in range(40)]
    picks_c = [c.decide_quick(s, t.curr) for s in range(40)]
    assert picks_a != picks_c


def test_evaluate_policy_single_flip():
    f = lambda v: F(1) if v == __import__("ivalbench.lang", fromlist=["lang"]).TRUE else F(0)
    for pol in (sched.round_robin(), sched.seeded_random(1)):
        got = sched.evaluate_policy(parse("(flip 1 2)"), pol, 3,
                                    models.read_true_indicator)
        assert got == F(1, 2)


def test_evaluate_policy_constant_program():
    got = sched.evaluate_policy(parse("(+ 2 3)"), sched.round_robin(), 4, read_int)
    assert got == 5


def test_evaluate_policy_requires_termination():
    spin = parse("(let (lk (alloc #t)) "
                 "((rec (sp u) (if (cas lk #f #t) () (sp ()))) ()))")
    with pytest.raises(sched.ScheduleError):
        sched.evaluate_policy(spin, sched.round_robin(), 30, read_int)


def test_counter_round_robin_exact():
    prog = models.unbiased_counter_program(2, max_value=2)
    assert sched.evaluate_policy(prog, sched.round_robin(), 70, read_int) == 2


def test_extremal_single_thread_matches_policy_eval():
    prog = parse("(if (flip 1 3) 9 0)")
    res = sched.extremal_expectation(prog, 5, read_int)
    got = sched.evaluate_policy(prog, sched.round_robin(), 5, read_int)
    assert res.lo == res.hi == got == F(3)


def test_extremal_counter_exact():
    for threads in (1, 2):
        prog = models.unbiased_counter_program(threads, max_value=2)
        res = sched.extremal_expectation(prog, 70, read_int)
        assert res.lo == res.hi == threads


def test_extremal_budget_violation_reported():
    prog = models.unbiased_counter_program(2, max_value=2)
    with pytest.raises(sched.ScheduleError):
        sched.extremal_expectation(prog, 12, read_int)


def test_extremal_deadlock_reported():
    prog = parse("(let (l (alloc 0)) (wait l 1))")
    with pytest.raises(sched.ScheduleError):
        sched.extremal_expectation(prog, 10, read_int)


def test_policy_extraction_replays_extrema():
    prog = models.dlm_counter_program(2, bits=2)
    res = sched.extremal_expectation(prog, 80, models.read_pow2_minus_1)
    assert res.lo < 2 < res.hi
    for direction, value in (("lo", res.lo), ("hi", res.hi)):
        pol = sched.extract_policy(res, direction)
        assert sched.evaluate_policy(prog, pol, 80,
                                     models.read_pow2_minus_1) == value


def test_concrete_policies_inside_extrema():
    prog = models.dlm_counter_program(2, bits=2)
    res = sched.extremal_expectation(prog, 90, models.read_pow2_minus_1)
    for pol in (sched.round_robin(), sched.seeded_random(2), sched.seeded_random(9)):
        got = sched.evaluate_policy(prog, pol, 90, models.read_pow2_minus_1)
        assert res.lo <= got <= res.hi


def test_extracted_adversary_beats_round_robin():
    prog = models.dlm_counter_program(2, bits=2)
    res = sched.extremal_expectation(prog, 80, models.read_pow2_minus_1)
    rr = sched.evaluate_policy(prog, sched.round_robin(), 80,
                               models.read_pow2_minus_1)
    hi = sched.extract_policy(res, "hi")
    assert sched.evaluate_policy(prog, hi, 80, models.read_pow2_minus_1) > rr


def test_brute_force_matches_memoized():
    prog = lite_counter(2)
    res = sched.extremal_expectation(prog, 40, read_int)
    bf = sched.brute_force_extrema(prog, 40, read_int)
    assert (bf.lo, bf.hi) == (res.lo, res.hi)
    assert bf.nodes <= 10 ** 6


def test_stutter_moves_do_not_change_extrema():
    prog = parse("(let (l (alloc 0)) (seq (fork (store l 5)) "
                 "(if (flip 1 2) (load l) (load l))))")
    base = sched.brute_force_extrema(prog, 9, read_int)
    assert (base.lo, base.hi) == (F(0), F(5))
    for extra in (1, 2):
        bf = sched.brute_force_extrema(prog, 9 + extra, read_int,
                                       allow_stutters=extra)
        assert (bf.lo, bf.hi) == (base.lo, base.hi)


def test_monte_carlo_flip_binomial():
    mc = sched.monte_carlo(parse("(flip 1 2)"), sched.round_robin(), 3,
                           models.read_true_indicator, trials=20000, seed=3)
    assert mc.contains(F(1, 2))
    assert abs(mc.mean - 0.5) < 0.02


def test_monte_carlo_seed_reproducible():
    prog = models.unbiased_counter_program(2, max_value=2)
    a = sched.monte_carlo(prog, sched.seeded_random(4), 80, read_int, 500, seed=8)
    b = sched.monte_carlo(prog, sched.seeded_random(4), 80, read_int, 500, seed=8)
    assert (a.mean, a.variance) == (b.mean, b.variance)


def test_monte_carlo_worker_invariance():
    prog = models.unbiased_counter_program(2, max_value=2)
    a = sched.monte_carlo(prog, sched.round_robin(), 80, read_int, 600, seed=8,
                          workers=1)
    b = sched.monte_carlo(prog, sched.round_robin(), 80, read_int, 600, seed=8,
                          workers=2)
    assert (a.mean, a.variance) == (b.mean, b.variance)


def test_sandwich_counter_against_spec():
    prog = models.unbiased_counter_program(2, max_value=2)
    spec = models.approx_n(2, 0, 2)
    rep = sched.soundness_sandwich_check(prog, spec, read_int,
                                         lambda v: F(v), 70)
    assert rep.passed
    assert (rep.spec_min, rep.mdp_lo, rep.mdp_hi, rep.spec_max) == (2, 2, 2, 2)


def test_sandwich_trivial_program():
    from ivalbench import ndset
    rep = sched.soundness_sandwich_check(parse("5"), ndset.ret(5), read_int,
                                         lambda v: F(v), 2)
    assert rep.passed and rep.mdp_lo == rep.mdp_hi == 5


def test_sandwich_mismatch_detected():
    # the biasable counter against the scheduler-independent spec must fail
    prog = models.dlm_counter_program(2, bits=2)
    spec = models.approx_n(2, 0, 2)
    rep = sched.soundness_sandwich_check(prog, spec, models.read_pow2_minus_1,
                                         lambda v: F(v), 90)
    assert not rep.passed
