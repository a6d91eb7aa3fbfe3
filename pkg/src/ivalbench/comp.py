"""Term-level nondeterministic probabilistic computations.

Explicit ``ProcessSet`` values are fine at law-suite scale, but the member
count of an n-fold ``bind`` grows like ``c ** (2 ** n)``: every adaptive
resolution of the nondeterminism is one member.  The bundled counter and
skip-list specifications need expectation extrema at depths where
materializing the set is hopeless, so computations are also represented as
terms (ret / union / pchoice / bind / literal set), and extrema are
computed by structural recursion:

* ``ex_min(f, ret v) = f(v)``
* ``ex_min(f, union)`` is the min over the parts,
* ``ex_min(f, pchoice(a, p, b)) = p * ex_min(f, a) + (1-p) * ex_min(f, b)``
* ``ex_min(f, bind(a, F)) = min over members m of a of
  sum over support indices i of m of prob(i) * ex_min(f, F(value(i)))``

The bind rule is exact for per-index selection semantics: a selection picks
one continuation member independently for every support index, expectation
is linear with nonnegative coefficients, so the inner optimum splits into
independent per-index optima.  ``materialize`` produces the explicit set,
and the test suite checks the two routes agree on random small terms; the
recursion only ever materializes *sources* of binds, which the bundled
models keep shallow.

Sharing matters: builders memoize their recursive calls so equal subterms
are the same object, and extrema memoize on object identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

from ivalbench import ival, ndset
from ivalbench.ival import as_rational
from ivalbench.ndset import ProcessSet

Value = Any


class Comp:
    """Base class of computation terms."""


@dataclass(frozen=True)
class Ret(Comp):
    value: Value


@dataclass(frozen=True, eq=False)
class Union(Comp):
    parts: tuple


@dataclass(frozen=True, eq=False)
class PChoice(Comp):
    left: Comp
    p: Fraction
    right: Comp


@dataclass(frozen=True, eq=False)
class Bind(Comp):
    source: Comp
    cont: Callable[[Value], Comp]


@dataclass(frozen=True, eq=False)
class Lift(Comp):
    pset: ProcessSet


def ret(v: Value) -> Comp:
    return Ret(v)


def union(*parts: Comp) -> Comp:
    if not parts:
        raise ValueError("union of no alternatives")
    return Union(tuple(parts))


def pchoice(left: Comp, p, right: Comp) -> Comp:
    p = as_rational(p)
    if not 0 <= p <= 1:
        raise ValueError(f"choice weight {p} outside [0, 1]")
    return PChoice(left, p, right)


def bind(source: Comp, cont: Callable[[Value], Comp]) -> Comp:
    return Bind(source, cont)


def lift(pset: ProcessSet) -> Comp:
    return Lift(pset)


def materialize(c: Comp, dedup: bool = False) -> ProcessSet:
    """Evaluate the term to an explicit ProcessSet.

    With ``dedup=True``, ``equiv``-equal members are merged after every
    operation; this changes nothing up to set equivalence but can shrink
    intermediate sets dramatically.
    """
    post = ndset.dedup if dedup else (lambda s: s)
    match c:
        case Ret(value=v):
            return ndset.ret(v)
        case Union(parts=parts):
            return post(ndset.union_all(materialize(x, dedup) for x in parts))
        case PChoice(left=l, p=p, right=r):
            return post(ndset.pchoice(materialize(l, dedup), p, materialize(r, dedup)))
        case Bind(source=s, cont=k):
            src = materialize(s, dedup)
            cache: dict = {}

            def f(v):
                key = ival.value_key(v)
                if key not in cache:
                    cache[key] = materialize(k(v), dedup)
                return cache[key]

            return post(ndset.bind(src, f))
        case Lift(pset=ps):
            return post(ps)
    raise TypeError(f"not a computation term: {c!r}")


def _extremum(f, c: Comp, pick, memo: dict) -> Fraction:
    # Memo entries pin the node: ids may be reused once a node is collected.
    key = id(c)
    if key in memo:
        return memo[key][1]
    match c:
        case Ret(value=v):
            out = as_rational(f(v))
        case Union(parts=parts):
            out = pick(_extremum(f, x, pick, memo) for x in parts)
        case PChoice(left=l, p=p, right=r):
            out = p * _extremum(f, l, pick, memo) + (1 - p) * _extremum(f, r, pick, memo)
        case Bind(source=s, cont=k):
            src = materialize(s, dedup=True)
            sub: dict = {}

            def val(v):
                vk = ival.value_key(v)
                if vk not in sub:
                    sub[vk] = _extremum(f, k(v), pick, memo)
                return sub[vk]

            out = pick(
                sum((p * val(v) for (_, v, p) in m.entries if p > 0), Fraction(0))
                for m in src.members
            )
        case Lift(pset=ps):
            out = pick(ival.expected_value(f, m) for m in ps.members)
        case _:
            raise TypeError(f"not a computation term: {c!r}")
    memo[key] = (c, out)
    return out


def ex_min(f: Callable[[Value], Fraction], c: Comp) -> Fraction:
    return _extremum(f, c, min, {})


def ex_max(f: Callable[[Value], Fraction], c: Comp) -> Fraction:
    return _extremum(f, c, max, {})


def extrema(f: Callable[[Value], Fraction], c: Comp):
    return ex_min(f, c), ex_max(f, c)
