"""Small-step operational semantics: threads, heaps, configurations, traces.

Per-thread reduction is deterministic except for ``flip``, which yields a
two-entry valuation (true with n1/n2, false with the remainder; entries
with probability zero are kept).  The leftmost redex under the
call-by-value evaluation-context discipline is reduced; an irreducible
non-value makes the thread *stuck right now* -- stuckness is re-evaluated
against the current heap on every scheduling, which is what lets ``wait``
block and later resume.

A configuration is a nonempty thread pool plus a heap; stepping thread
``i`` replaces its expression, applies the heap effect, and appends any
forked expression to the pool.  Scheduling a value, a stuck thread, or an
out-of-range index is a stutter: the configuration repeats with
probability one.  A configuration has terminated when the first thread is
a value; nothing can change that thread afterwards, so termination is
absorbing.

``sample_run`` is a light path for Monte-Carlo work: it follows a single
trace, sampling flip outcomes, instead of building trace valuations.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from ivalbench import ival, lang
from ivalbench.ival import IndexedValuation
from ivalbench.lang import (
    Alloc, App, Cas, Expr, Faa, Flip, Fork, If, Let, Lit, Load, Pair, Prim,
    Rec, Store, Val, Var, VBool, VClosure, VInt, VLoc, VPair, Wait,
    is_value, of_val, subst, to_val,
)


# ---------------------------------------------------------------------------
# states, configurations, traces


@dataclass(frozen=True, slots=True)
class State:
    heap: tuple = ()  # sorted (loc, Val) pairs
    next_loc: int = 0

    def __post_init__(self):
        locs = [l for (l, _) in self.heap]
        if locs != sorted(set(locs)):
            raise ValueError("heap must be sorted with distinct locations")
        if locs and locs[-1] >= self.next_loc:
            raise ValueError("allocation counter must exceed every location")

    def lookup(self, loc: int) -> Optional[Val]:
        for (l, v) in self.heap:
            if l == loc:
                return v
        return None

    def store(self, loc: int, val: Val) -> "State":
        cells = tuple((l, val if l == loc else v) for (l, v) in self.heap)
        return State(cells, self.next_loc)

    def alloc(self, val: Val):
        loc = self.next_loc
        return State(self.heap + ((loc, val),), loc + 1), loc


@dataclass(frozen=True, slots=True)
class Config:
    threads: tuple
    state: State

    def __post_init__(self):
        if not self.threads:
            raise ValueError("thread pool must be nonempty")


@dataclass(frozen=True, slots=True)
class Trace:
    configs: tuple

    def __post_init__(self):
        if not self.configs:
            raise ValueError("trace must be nonempty")

    @property
    def curr(self) -> Config:
        return self.configs[-1]

    def extend(self, c: Config) -> "Trace":
        return Trace(self.configs + (c,))


def initial_config(exprs, heap=(), next_loc: Optional[int] = None) -> Config:
    cells = tuple(sorted(heap))
    if next_loc is None:
        next_loc = max((l for (l, _) in cells), default=-1) + 1
    return Config(tuple(exprs), State(cells, next_loc))


def initial_trace(exprs, heap=(), next_loc: Optional[int] = None) -> Trace:
    return Trace((initial_config(exprs, heap, next_loc),))


# ---------------------------------------------------------------------------
# per-thread reduction


def val_eq(a: Val, b: Val) -> Optional[bool]:
    """Structural equality on closure-free values; None when undecidable."""
    if isinstance(a, VClosure) or isinstance(b, VClosure):
        return None
    if type(a) is not type(b):
        return False
    if isinstance(a, VPair):
        left = val_eq(a.fst, b.fst)
        if left is None:
            return None
        if not left:
            return False
        return val_eq(a.snd, b.snd)
    return a == b


_ONE = Fraction(1)
_TRUE_LIT = Lit(lang.TRUE)
_FALSE_LIT = Lit(lang.FALSE)


def outcomes(e: Expr, s: State):
    """Step outcomes of one thread: ``None`` if ``e`` is a value or is
    stuck in ``s``, else a list of (prob, expr, state, spawned)."""
    t = type(e)
    if t is Lit or t is Rec or t is Var:
        return None  # a value, or an open term with no rule

    def wrap(res, rebuild):
        if res is None:
            return None
        return [(p, rebuild(e2), s2, sp) for (p, e2, s2, sp) in res]

    if t is Pair:
        a, b = e.fst, e.snd
        if not is_value(a):
            return wrap(outcomes(a, s), lambda a2: Pair(a2, b))
        if not is_value(b):
            return wrap(outcomes(b, s), lambda b2: Pair(a, b2))
        return None  # a pair of values is itself a value
    if t is App:
        f, a = e.fn, e.arg
        if not is_value(f):
            return wrap(outcomes(f, s), lambda f2: App(f2, a))
        if not is_value(a):
            return wrap(outcomes(a, s), lambda a2: App(f, a2))
        if type(f) is Rec:
            body = subst(f.body, f.fname, f)
            return [(_ONE, subst(body, f.xname, a), s, ())]
        return None
    if t is Let:
        b = e.bound
        if not is_value(b):
            x, body = e.name, e.body
            return wrap(outcomes(b, s), lambda b2: Let(x, b2, body))
        return [(_ONE, subst(e.body, e.name, b), s, ())]
    if t is If:
        c = e.cond
        if not is_value(c):
            tt, ff = e.then, e.els
            return wrap(outcomes(c, s), lambda c2: If(c2, tt, ff))
        cv = to_val(c)
        if isinstance(cv, VBool):
            return [(_ONE, e.then if cv.b else e.els, s, ())]
        return None
    if t is Flip:
        a, b = e.num, e.den
        if not is_value(a):
            return wrap(outcomes(a, s), lambda a2: Flip(a2, b))
        if not is_value(b):
            return wrap(outcomes(b, s), lambda b2: Flip(a, b2))
        av, bv = to_val(a), to_val(b)
        if not (isinstance(av, VInt) and isinstance(bv, VInt)) or bv.n == 0:
            return None
        p = Fraction(av.n, bv.n)
        if not 0 <= p <= 1:
            return None  # side condition fails: no transition
        return [(p, _TRUE_LIT, s, ()), (1 - p, _FALSE_LIT, s, ())]
    if t is Fork:
        return [(_ONE, lang.unit, s, (e.body,))]
    if t is Alloc:
        a = e.init
        if not is_value(a):
            return wrap(outcomes(a, s), Alloc)
        s2, loc = s.alloc(to_val(a))
        return [(_ONE, Lit(VLoc(loc)), s2, ())]
    if t is Load:
        r = e.ref
        if not is_value(r):
            return wrap(outcomes(r, s), Load)
        rv = to_val(r)
        if not isinstance(rv, VLoc):
            return None
        cur = s.lookup(rv.loc)
        return None if cur is None else [(_ONE, of_val(cur), s, ())]
    if t is Store:
        r, v = e.ref, e.value
        if not is_value(r):
            return wrap(outcomes(r, s), lambda r2: Store(r2, v))
        if not is_value(v):
            return wrap(outcomes(v, s), lambda v2: Store(r, v2))
        rv = to_val(r)
        if not isinstance(rv, VLoc) or s.lookup(rv.loc) is None:
            return None
        return [(_ONE, lang.unit, s.store(rv.loc, to_val(v)), ())]
    if t is Faa:
        r, d = e.ref, e.delta
        if not is_value(r):
            return wrap(outcomes(r, s), lambda r2: Faa(r2, d))
        if not is_value(d):
            return wrap(outcomes(d, s), lambda d2: Faa(r, d2))
        rv, dv = to_val(r), to_val(d)
        if not (isinstance(rv, VLoc) and isinstance(dv, VInt)):
            return None
        cur = s.lookup(rv.loc)
        if not isinstance(cur, VInt):
            return None
        return [(_ONE, Lit(cur), s.store(rv.loc, VInt(cur.n + dv.n)), ())]
    if t is Cas:
        r, x, n = e.ref, e.expected, e.new
        if not is_value(r):
            return wrap(outcomes(r, s), lambda r2: Cas(r2, x, n))
        if not is_value(x):
            return wrap(outcomes(x, s), lambda x2: Cas(r, x2, n))
        if not is_value(n):
            return wrap(outcomes(n, s), lambda n2: Cas(r, x, n2))
        rv = to_val(r)
        if not isinstance(rv, VLoc):
            return None
        cur = s.lookup(rv.loc)
        if cur is None:
            return None
        eq = val_eq(cur, to_val(x))
        if eq is None:
            return None
        if eq:
            return [(_ONE, _TRUE_LIT, s.store(rv.loc, to_val(n)), ())]
        return [(_ONE, _FALSE_LIT, s, ())]
    if t is Wait:
        r, v = e.ref, e.value
        if not is_value(r):
            return wrap(outcomes(r, s), lambda r2: Wait(r2, v))
        if not is_value(v):
            return wrap(outcomes(v, s), lambda v2: Wait(r, v2))
        rv = to_val(r)
        if not isinstance(rv, VLoc):
            return None
        cur = s.lookup(rv.loc)
        if cur is None or val_eq(cur, to_val(v)) is not True:
            return None  # blocked until the cell holds the value
        return [(_ONE, lang.unit, s, ())]
    if t is Prim:
        op, args = e.op, e.args
        for (k, a) in enumerate(args):
            if not is_value(a):
                def rebuild(a2, k=k):
                    return Prim(op, args[:k] + (a2,) + args[k + 1:])
                return wrap(outcomes(a, s), rebuild)
        res = apply_prim(op, tuple(to_val(a) for a in args))
        return None if res is None else [(_ONE, of_val(res), s, ())]
    raise TypeError(f"not an expression: {e!r}")


def apply_prim(op: str, vals: tuple) -> Optional[Val]:
    match op, vals:
        case ("min", (VInt(n=a), VInt(n=b))):
            return VInt(min(a, b))
        case ("+", (VInt(n=a), VInt(n=b))):
            return VInt(a + b)
        case ("-", (VInt(n=a), VInt(n=b))):
            return VInt(a - b)
        case ("*", (VInt(n=a), VInt(n=b))):
            return VInt(a * b)
        case ("pow", (VInt(n=a), VInt(n=b))):
            return VInt(a ** b) if b >= 0 else None
        case ("mod", (VInt(n=a), VInt(n=b))):
            return VInt(a % b) if b != 0 else None
        case ("=", (a, b)):
            eq = val_eq(a, b)
            return None if eq is None else VBool(eq)
        case ("<", (VInt(n=a), VInt(n=b))):
            return VBool(a < b)
        case ("<=", (VInt(n=a), VInt(n=b))):
            return VBool(a <= b)
        case ("not", (VBool(b=a),)):
            return VBool(not a)
        case ("and", (VBool(b=a), VBool(b=b))):
            return VBool(a and b)
        case ("or", (VBool(b=a), VBool(b=b))):
            return VBool(a or b)
        case ("fst", (VPair(fst=a),)):
            return a
        case ("snd", (VPair(snd=b),)):
            return b
    return None


def thread_step(e: Expr, s: State) -> IndexedValuation:
    """Per-thread reduction as a valuation over optional step results.

    Values and stuck expressions yield the single ``None`` marker entry.
    """
    res = outcomes(e, s)
    if res is None:
        return ival.ret(None)
    return IndexedValuation(tuple(
        (k, (e2, s2, sp), p) for (k, (p, e2, s2, sp)) in enumerate(res)))


def can_step(e: Expr, s: State) -> bool:
    return outcomes(e, s) is not None


def config_step(c: Config, i: int) -> IndexedValuation:
    """Step thread ``i``; stutter (same configuration, probability one)
    when the index is out of range or the thread cannot reduce."""
    if not 0 <= i < len(c.threads):
        return ival.ret(c)
    res = outcomes(c.threads[i], c.state)
    if res is None:
        return ival.ret(c)
    entries = []
    for (k, (p, e2, s2, spawned)) in enumerate(res):
        threads = c.threads[:i] + (e2,) + c.threads[i + 1:] + tuple(spawned)
        entries.append((k, Config(threads, s2), p))
    return IndexedValuation(tuple(entries))


# ---------------------------------------------------------------------------
# traces


def trace_step_ival(decide: Callable[[Trace], int], t: Trace) -> IndexedValuation:
    """One scheduler-driven step, as a valuation over extended traces."""
    i = decide(t)
    return ival.map_values(t.extend, config_step(t.curr, i))


def trace_step_ival_n(decide: Callable[[Trace], int], t: Trace, n: int) -> IndexedValuation:
    """Step ``n`` times and project the first thread's expression.

    Computed iteratively (one bind per step); this matches the recursive
    bind-chain definition up to index relabelling by monad associativity.
    """
    cur = ival.ret(t)
    for _ in range(n):
        cur = ival.bind(cur, lambda t2: trace_step_ival(decide, t2))
    return ival.map_values(lambda tr: tr.curr.threads[0], cur)


def is_terminated(c: Config) -> bool:
    return is_value(c.threads[0])


def terminates_within(decide: Callable[[Trace], int], t: Trace, n: int) -> bool:
    """Do all positive-probability n-step extensions terminate?

    Termination is absorbing (the first thread stays a value), so a
    terminated current configuration settles the whole subtree.
    """
    stack = [(t, n)]
    while stack:
        (cur, k) = stack.pop()
        if is_terminated(cur.curr):
            continue
        if k == 0:
            return False
        for (_, t2, p) in trace_step_ival(decide, cur).entries:
            if p > 0:
                stack.append((t2, k - 1))
    return True


# ---------------------------------------------------------------------------
# sampling (Monte-Carlo fast path)


def sample_run(c: Config, decide_quick: Callable[[int, Config], int],
               budget: int, rng: random.Random) -> Config:
    """Follow one sampled trace until termination or budget exhaustion."""
    for step in range(budget):
        if is_terminated(c):
            return c
        i = decide_quick(step, c)
        if not 0 <= i < len(c.threads):
            continue
        res = outcomes(c.threads[i], c.state)
        if res is None:
            continue
        if len(res) == 1:
            (_, e2, s2, spawned) = res[0]
        else:
            r = rng.random()
            acc = 0.0
            chosen = res[-1]
            for cand in res:
                acc += float(cand[0])
                if r < acc:
                    chosen = cand
                    break
            (_, e2, s2, spawned) = chosen
        threads = c.threads[:i] + (e2,) + c.threads[i + 1:] + tuple(spawned)
        c = Config(threads, s2)
    return c


# ---------------------------------------------------------------------------
# evaluation-context decompositions (for the uniqueness invariant)


def is_redex(e: Expr) -> bool:
    """Structurally ready to attempt a top-level reduction (possibly stuck)."""
    match e:
        case Fork():
            return True
        case App(fn=f, arg=a) | Store(ref=f, value=a) | Faa(ref=f, delta=a) \
                | Wait(ref=f, value=a) | Flip(num=f, den=a):
            return is_value(f) and is_value(a)
        case Let(bound=b) | If(cond=b) | Alloc(init=b) | Load(ref=b):
            return is_value(b)
        case Cas(ref=r, expected=x, new=n):
            return is_value(r) and is_value(x) and is_value(n)
        case Prim(args=args):
            return all(is_value(a) for a in args)
    return False


def decompositions(e: Expr) -> list:
    """All (path, redex) splits of ``e`` along the evaluation-context
    grammar.  The semantics is deterministic exactly because closed
    non-value expressions admit exactly one."""
    out = []

    def walk(e: Expr, path: tuple):
        if is_redex(e):
            out.append((path, e))
            return  # a redex is never transparent to further context search
        match e:
            case Pair(fst=a, snd=b):
                if not is_value(a):
                    walk(a, path + ("pair-l",))
                elif not is_value(b):
                    walk(b, path + ("pair-r",))
            case App(fn=f, arg=a):
                if not is_value(f):
                    walk(f, path + ("app-l",))
                elif not is_value(a):
                    walk(a, path + ("app-r",))
            case Let(bound=b):
                if not is_value(b):
                    walk(b, path + ("let",))
            case If(cond=c):
                if not is_value(c):
                    walk(c, path + ("if",))
            case Flip(num=a, den=b):
                if not is_value(a):
                    walk(a, path + ("flip-l",))
                elif not is_value(b):
                    walk(b, path + ("flip-r",))
            case Alloc(init=a):
                if not is_value(a):
                    walk(a, path + ("alloc",))
            case Load(ref=a):
                if not is_value(a):
                    walk(a, path + ("load",))
            case Store(ref=a, value=b):
                if not is_value(a):
                    walk(a, path + ("store-l",))
                elif not is_value(b):
                    walk(b, path + ("store-r",))
            case Faa(ref=a, delta=b):
                if not is_value(a):
                    walk(a, path + ("faa-l",))
                elif not is_value(b):
                    walk(b, path + ("faa-r",))
            case Cas(ref=a, expected=b, new=c):
                if not is_value(a):
                    walk(a, path + ("cas-1",))
                elif not is_value(b):
                    walk(b, path + ("cas-2",))
                elif not is_value(c):
                    walk(c, path + ("cas-3",))
            case Wait(ref=a, value=b):
                if not is_value(a):
                    walk(a, path + ("wait-l",))
                elif not is_value(b):
                    walk(b, path + ("wait-r",))
            case Prim(args=args):
                for (k, a) in enumerate(args):
                    if not is_value(a):
                        walk(a, path + (f"prim-{k}",))
                        break

    walk(e, ())
    return out
