"""Scheduler policies and exact adversarial analysis.

A policy maps execution traces to thread indices (it may inspect the whole
history).  ``evaluate_policy`` computes the exact expected value of a
functional of the first thread's final value after ``n`` steps under one
policy.  ``extremal_expectation`` computes the range of that quantity over
*all* deterministic policies by backward induction memoized on
(configuration, remaining budget):

* a terminated configuration is worth ``f(first thread's value)`` --
  nothing a scheduler does afterwards can change that thread;
* otherwise the scheduler picks among *enabled* threads (stutter choices
  are excluded: a stutter repeats the configuration and only burns budget,
  so any stutter-ful schedule is matched by its stutter-free compression);
* running out of budget before termination means some scheduler does not
  terminate within ``n``, which is reported loudly rather than truncated.

Collapsing history-dependent schedulers to (configuration, budget) keys is
justified for expected-value objectives and checked empirically:
``brute_force_extrema`` enumerates full history-dependent decision trees
(optionally with explicit stutter moves) and the test suite asserts exact
agreement on instances up to a million decision nodes.

The extremizing choices are recorded, so ``extract_policy`` yields an
ordinary policy that replays the extremum exactly.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from ivalbench import machine
from ivalbench.ival import as_rational
from ivalbench.lang import Expr, is_value, to_val
from ivalbench.machine import Config, Trace, config_step, initial_trace, is_terminated, outcomes


class ScheduleError(Exception):
    """Termination/budget violations discovered during analysis."""


@dataclass(frozen=True)
class SchedulerPolicy:
    """A total strategy.  ``decide`` sees the whole trace; ``decide_quick``
    is the sampling fast path fed only (step index, current config) and
    must agree with ``decide`` for the built-in policies."""

    name: str
    decide: Callable[[Trace], int]
    decide_quick: Callable[[int, Config], int]


def round_robin() -> SchedulerPolicy:
    def decide(t: Trace) -> int:
        return (len(t.configs) - 1) % len(t.curr.threads)

    return SchedulerPolicy("round-robin", decide,
                           lambda step, c: step % len(c.threads))


STUTTER = 10 ** 9  # out of range for any desk-scale pool


def fixed_script(indices) -> SchedulerPolicy:
    script = tuple(indices)

    def decide(t: Trace) -> int:
        step = len(t.configs) - 1
        return script[step] if step < len(script) else STUTTER

    return SchedulerPolicy(f"script{list(script)}", decide,
                           lambda step, c: script[step] if step < len(script) else STUTTER)


def _mix(seed: int, step: int) -> int:
    x = (seed * 1000003 + step) & 0xFFFFFFFFFFFFFFFF
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & 0xFFFFFFFFFFFFFFFF
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def seeded_random(seed: int) -> SchedulerPolicy:
    """Pseudorandom but deterministic: the choice is a hash of (seed, step)
    reduced by the current pool size, hence a pure function of the trace."""

    def decide(t: Trace) -> int:
        return _mix(seed, len(t.configs) - 1) % len(t.curr.threads)

    return SchedulerPolicy(f"seeded-random({seed})", decide,
                           lambda step, c: _mix(seed, step) % len(c.threads))


# ---------------------------------------------------------------------------
# exact policy evaluation


def evaluate_policy(prog: Expr, policy: SchedulerPolicy, budget: int,
                    f: Callable, heap=(), check_termination: bool = True) -> Fraction:
    """Exact E[f(first thread's value)] after ``budget`` steps under a policy.

    Requires termination within the budget (checked up front by default).
    """
    t = initial_trace([prog], heap)
    if check_termination and not machine.terminates_within(policy.decide, t, budget):
        raise ScheduleError(
            f"program does not terminate within {budget} steps under {policy.name}")

    total = Fraction(0)
    stack = [(t, budget, Fraction(1))]
    while stack:
        (cur, k, w) = stack.pop()
        c = cur.curr
        if is_terminated(c):
            total += w * as_rational(f(to_val(c.threads[0])))
            continue
        if k == 0:
            raise ScheduleError("first thread is not a value at the horizon")
        for (_, t2, p) in machine.trace_step_ival(policy.decide, cur).entries:
            if p > 0:
                stack.append((t2, k - 1, w * p))
    return total


# ---------------------------------------------------------------------------
# scheduler-extremal expectations by backward induction


@dataclass
class ExtremalResult:
    lo: Fraction
    hi: Fraction
    budget: int
    explored_states: int
    policy_lo: dict = field(repr=False, default_factory=dict)
    policy_hi: dict = field(repr=False, default_factory=dict)


def enabled_threads(c: Config) -> list:
    return [i for (i, e) in enumerate(c.threads)
            if not is_value(e) and outcomes(e, c.state) is not None]


def extremal_expectation(prog: Expr, budget: int, f: Callable, heap=()) -> ExtremalResult:
    """Min and max over all deterministic schedulers of the expected value.

    Fails loudly if any scheduler can exhaust the budget without the first
    thread reaching a value (including deadlock: no enabled thread).
    """
    import sys
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 8 * budget + 10000))
    memo: dict = {}

    def value(c: Config, k: int):
        if is_terminated(c):
            v = as_rational(f(to_val(c.threads[0])))
            return (v, v, None, None)
        key = (c, k)
        hit = memo.get(key)
        if hit is not None:
            return hit
        enabled = enabled_threads(c)
        if not enabled:
            raise ScheduleError(f"deadlock: no thread can step in {c}")
        if k == 0:
            raise ScheduleError(
                "budget insufficient: an adversary reaches the horizon unterminated")
        best = None
        for i in enabled:
            lo_i = Fraction(0)
            hi_i = Fraction(0)
            for (_, c2, p) in config_step(c, i).entries:
                if p == 0:
                    continue
                (lo2, hi2, _, _) = value(c2, k - 1)
                lo_i += p * lo2
                hi_i += p * hi2
            if best is None:
                best = [lo_i, hi_i, i, i]
            else:
                if lo_i < best[0]:
                    best[0], best[2] = lo_i, i
                if hi_i > best[1]:
                    best[1], best[3] = hi_i, i
        out = tuple(best)
        memo[key] = out
        return out

    t0 = initial_trace([prog], heap)
    (lo, hi, _, _) = value(t0.curr, budget)
    policy_lo = {}
    policy_hi = {}
    for ((c, k), (_, _, ilo, ihi)) in memo.items():
        policy_lo[(c, k)] = ilo
        policy_hi[(c, k)] = ihi
    return ExtremalResult(lo, hi, budget, len(memo), policy_lo, policy_hi)


def extract_policy(result: ExtremalResult, direction: str) -> SchedulerPolicy:
    """The memoryless adversary recorded during backward induction; replays
    the extremum exactly under ``evaluate_policy`` with the same budget."""
    table = result.policy_lo if direction == "lo" else result.policy_hi

    def choice(steps_used: int, c: Config) -> int:
        i = table.get((c, result.budget - steps_used))
        return STUTTER if i is None else i

    def decide(t: Trace) -> int:
        return choice(len(t.configs) - 1, t.curr)

    return SchedulerPolicy(f"extremal-{direction}", decide, choice)


# ---------------------------------------------------------------------------
# brute-force enumeration of history-dependent scheduler decision trees


@dataclass
class BruteForceResult:
    lo: Fraction
    hi: Fraction
    nodes: int


def brute_force_extrema(prog: Expr, budget: int, f: Callable, heap=(),
                        allow_stutters: int = 0,
                        node_limit: int = 2 * 10 ** 6) -> BruteForceResult:
    """Game-tree recursion over full traces, no memoization.

    Every deterministic history-dependent scheduler is a choice function
    on this tree, so its min/max is the extremum over all of them.  With
    ``allow_stutters`` > 0 the adversary may also spend that many explicit
    stutter moves (each consuming budget), which lets the suite check that
    excluding stutters is harmless.
    """
    nodes = 0

    def go(t: Trace, k: int, stutters: int):
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise ScheduleError(f"decision tree exceeds {node_limit} nodes")
        c = t.curr
        if is_terminated(c):
            v = as_rational(f(to_val(c.threads[0])))
            return (v, v)
        enabled = enabled_threads(c)
        if not enabled:
            raise ScheduleError(f"deadlock: no thread can step in {c}")
        if k == 0:
            raise ScheduleError("budget insufficient under brute force")
        lo = hi = None
        for i in enabled:
            lo_i = Fraction(0)
            hi_i = Fraction(0)
            for (_, c2, p) in config_step(c, i).entries:
                if p == 0:
                    continue
                (lo2, hi2) = go(t.extend(c2), k - 1, stutters)
                lo_i += p * lo2
                hi_i += p * hi2
            lo = lo_i if lo is None else min(lo, lo_i)
            hi = hi_i if hi is None else max(hi, hi_i)
        if stutters > 0:
            (lo2, hi2) = go(t.extend(c), k - 1, stutters - 1)
            lo = min(lo, lo2)
            hi = max(hi, hi2)
        return (lo, hi)

    t0 = initial_trace([prog], heap)
    (lo, hi) = go(t0, budget, allow_stutters)
    return BruteForceResult(lo, hi, nodes)


# ---------------------------------------------------------------------------
# Monte-Carlo estimation


@dataclass
class MonteCarloResult:
    trials: int
    mean: float
    variance: float
    ci_lo: float
    ci_hi: float
    seed: int

    def contains(self, exact) -> bool:
        return self.ci_lo <= float(exact) <= self.ci_hi


def _run_trials(prog, policy, budget, f, heap, seed, lo, hi):
    c0 = machine.initial_config([prog], heap)
    total = Fraction(0)
    totalsq = Fraction(0)
    for trial in range(lo, hi):
        rng = random.Random(_mix(seed, trial))
        c = machine.sample_run(c0, policy.decide_quick, budget, rng)
        if not is_terminated(c):
            raise ScheduleError(f"trial {trial} unterminated after {budget} steps")
        x = as_rational(f(to_val(c.threads[0])))
        total += x
        totalsq += x * x
    return total, totalsq


def _mc_chunk(args):
    (prog, policy_name, policy_args, budget, f, heap, seed, lo, hi) = args
    policy = _POLICY_BUILDERS[policy_name](*policy_args)
    return _run_trials(prog, policy, budget, f, heap, seed, lo, hi)


_POLICY_BUILDERS = {
    "round-robin": lambda: round_robin(),
    "seeded-random": seeded_random,
    "fixed-script": fixed_script,
}


def _policy_spec(policy: SchedulerPolicy):
    """Picklable reconstruction recipe for the built-in policies."""
    if policy.name == "round-robin":
        return ("round-robin", ())
    if policy.name.startswith("seeded-random("):
        return ("seeded-random", (int(policy.name[14:-1]),))
    if policy.name.startswith("script"):
        import ast
        return ("fixed-script", (tuple(ast.literal_eval(policy.name[6:])),))
    return None


def default_workers() -> int:
    import os
    raw = os.environ.get("IVALBENCH_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def monte_carlo(prog: Expr, policy: SchedulerPolicy, budget: int, f: Callable,
                trials: int, seed: int, heap=(), workers: Optional[int] = None) -> MonteCarloResult:
    """Sample mean/variance and a 3-sigma (99.7%) normal interval.

    Each trial runs on its own deterministic (seed, trial) sub-seed and
    sample sums are accumulated exactly, so the result is identical no
    matter how trials are chunked across workers.  A path that fails to
    terminate within the budget is an error, not a silent truncation.
    """
    if workers is None:
        workers = default_workers()
    spec = _policy_spec(policy) if workers > 1 else None
    if spec is not None and workers > 1 and trials >= 2 * workers:
        import concurrent.futures
        bounds = [trials * k // workers for k in range(workers + 1)]
        jobs = [(prog, spec[0], spec[1], budget, f, tuple(heap), seed, bounds[k], bounds[k + 1])
                for k in range(workers)]
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_mc_chunk, jobs))
        total = sum((t for (t, _) in parts), Fraction(0))
        totalsq = sum((q for (_, q) in parts), Fraction(0))
    else:
        # single worker, or a policy without a picklable recipe
        total, totalsq = _run_trials(prog, policy, budget, f, tuple(heap),
                                     seed, 0, trials)

    mean = float(total / trials)
    variance = max(float(totalsq / trials) - mean * mean, 0.0)
    sigma_mean = math.sqrt(variance / trials)
    return MonteCarloResult(trials, mean, variance,
                            mean - 3 * sigma_mean, mean + 3 * sigma_mean, seed)


# ---------------------------------------------------------------------------
# the soundness sandwich, checked empirically


@dataclass
class SandwichReport:
    spec_min: Fraction
    mdp_lo: Fraction
    mdp_hi: Fraction
    spec_max: Fraction
    explored_states: int

    @property
    def passed(self) -> bool:
        return self.spec_min <= self.mdp_lo and self.mdp_hi <= self.spec_max


def soundness_sandwich_check(prog: Expr, spec, f: Callable, g: Callable,
                             budget: int, heap=()) -> SandwichReport:
    """Check that the scheduler range of E[f; program] lies inside the
    extrema of g over the monadic specification.  ``spec`` may be a
    ProcessSet or a computation term."""
    from ivalbench import comp, ndset

    if isinstance(spec, ndset.ProcessSet):
        smin, smax = ndset.ex_min(g, spec), ndset.ex_max(g, spec)
    else:
        smin, smax = comp.ex_min(g, spec), comp.ex_max(g, spec)
    res = extremal_expectation(prog, budget, f, heap)
    return SandwichReport(smin, res.lo, res.hi, smax, res.explored_states)
