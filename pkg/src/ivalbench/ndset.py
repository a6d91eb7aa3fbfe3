"""Finite nonempty sets of indexed valuations (nondeterminism over chance).

A ``ProcessSet`` is a finite nonempty sequence of indexed valuations; each
member is one way the scheduler could resolve all nondeterministic choices.
Duplicates are permitted structurally and irrelevant semantically; ``dedup``
merges ``equiv``-equal members when callers want to keep sizes down.

``bind`` enumerates *per-index* selection functions: for each member and
each assignment of one continuation member to every index in its indicial
support, one composite member is produced.  Selecting per index rather than
per value is the whole point of indices: later nondeterminism may be
resolved differently on the basis of a probabilistic choice that is not
observable in the value.

The coarse order ``subset_p`` ("every bounded function's maximal
expectation is dominated") is decided by exact convex-hull membership of
collapsed distributions: for finite sets, ``a subset_p b`` holds iff every
member's distribution is a convex combination of the distributions of
``b``'s members.  Soundness of that reduction is a finite-dimensional
separating-hyperplane argument: expectations are linear in the
distribution, so domination for all (bounded) functions is exactly
membership in the closed convex hull, and the hull of finitely many points
needs no closure.  When the LP says no, its dual certificate *is* a
function whose maximal expectation violates the domination, which the
property suite uses as an independent falsifier.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Optional

from ivalbench import ival, lp
from ivalbench.ival import IndexedValuation, as_rational, value_key

Value = Any


@dataclass(frozen=True)
class ProcessSet:
    """Finite nonempty set of indexed valuations."""

    members: tuple

    def __post_init__(self):
        if not self.members:
            raise ValueError("process set must be nonempty")
        for m in self.members:
            if not isinstance(m, IndexedValuation):
                raise TypeError(f"member {m!r} is not an IndexedValuation")

    def __repr__(self):
        return "PSet{" + ", ".join(repr(m) for m in self.members) + "}"


def ret(v: Value) -> ProcessSet:
    """Unit: the singleton set containing ``ival.ret(v)``."""
    return ProcessSet((ival.ret(v),))


def lift(member: IndexedValuation, *more: IndexedValuation) -> ProcessSet:
    return ProcessSet((member,) + more)


def union(a: ProcessSet, b: ProcessSet) -> ProcessSet:
    """Nondeterministic choice: set union (concatenation of members)."""
    return ProcessSet(a.members + b.members)


def union_all(sets) -> ProcessSet:
    members = ()
    for s in sets:
        members += s.members
    return ProcessSet(members)


def pchoice(a: ProcessSet, p, b: ProcessSet) -> ProcessSet:
    """Pairwise probabilistic choice of members."""
    p = as_rational(p)
    if not 0 <= p <= 1:
        raise ValueError(f"choice weight {p} outside [0, 1]")
    return ProcessSet(tuple(
        ival.pchoice(x, p, y) for x in a.members for y in b.members
    ))


def bind(a: ProcessSet, f: Callable[[Value], ProcessSet]) -> ProcessSet:
    """Per-index selection bind.

    For each member and each selection assigning one member of ``f(value)``
    to every index in the member's indicial support, produce the composite
    valuation with dependent-pair indices and product probabilities.
    Beware the member count: it is sum over members of the product of
    continuation sizes over the support.
    """
    out = []
    for m in a.members:
        supp = [(i, v, p) for (i, v, p) in m.entries if p > 0]
        conts = [f(v).members for (_, v, _) in supp]
        for selection in itertools.product(*conts):
            entries = []
            for ((i, _, p), chosen) in zip(supp, selection):
                for (j, w, q) in chosen.entries:
                    if q == 0:
                        continue
                    entries.append(((i, j), w, p * q))
            out.append(IndexedValuation(tuple(entries)))
    return ProcessSet(tuple(out))


def dedup(a: ProcessSet) -> ProcessSet:
    """Merge ``equiv``-equal members, keeping first representatives."""
    seen = {}
    for m in a.members:
        seen.setdefault(m.canonical(), m)
    return ProcessSet(tuple(seen.values()))


def subset(a: ProcessSet, b: ProcessSet) -> bool:
    """Every member of ``a`` is ``equiv`` to some member of ``b``."""
    canons = {m.canonical() for m in b.members}
    return all(m.canonical() in canons for m in a.members)


def equiv(a: ProcessSet, b: ProcessSet) -> bool:
    """Mutual ``subset``."""
    return subset(a, b) and subset(b, a)


def ex_min(f: Callable[[Value], Fraction], a: ProcessSet) -> Fraction:
    """Minimal expected value of ``f`` over the members (attained: finite)."""
    return min(ival.expected_value(f, m) for m in a.members)


def ex_max(f: Callable[[Value], Fraction], a: ProcessSet) -> Fraction:
    """Maximal expected value of ``f`` over the members."""
    return max(ival.expected_value(f, m) for m in a.members)


def joint_support(a: ProcessSet) -> tuple:
    """Union of member supports, value-ordered."""
    seen: dict = {}
    for m in a.members:
        for v in ival.support(m):
            seen.setdefault(value_key(v), v)
    return tuple(sorted(seen.values(), key=value_key))


def bounded_on_support(f: Callable[[Value], Fraction], a: ProcessSet) -> Fraction:
    """The bound max |f(v)| over the support (always exists at finite scale)."""
    return max(abs(as_rational(f(v))) for v in joint_support(a))


@dataclass
class SubsetPCertificate:
    """Per-member evidence for a ``subset_p`` decision.

    For a positive decision, ``weights`` gives the convex combination of
    ``b``'s members reproducing the member's distribution.  For a negative
    one, ``separating`` maps support values to the coefficients of a
    function whose maximal expectation is strictly larger on ``a``.
    """

    member_index: int
    weights: Optional[list] = None
    separating: Optional[list] = None  # list of (value, coefficient)


def subset_p_certified(a: ProcessSet, b: ProcessSet):
    """Decide ``a subset_p b`` with certificates; see module docstring."""
    values = joint_support(union(a, b))
    coords = {value_key(v): d for (d, v) in enumerate(values)}
    dim = len(values)

    def vec(m: IndexedValuation) -> list:
        out = [Fraction(0)] * dim
        for (v, p) in ival.to_distribution(m).weights:
            out[coords[value_key(v)]] = p
        return out

    generators = [vec(m) for m in b.members]
    certs = []
    verdict = True
    for (k, m) in enumerate(a.members):
        res = lp.convex_hull_membership(vec(m), generators)
        if res.feasible:
            certs.append(SubsetPCertificate(k, weights=res.solution))
        else:
            sep = [(values[d], res.certificate[d]) for d in range(dim)
                   if res.certificate[d] != 0]
            certs.append(SubsetPCertificate(k, separating=sep))
            verdict = False
    return verdict, certs


def subset_p(a: ProcessSet, b: ProcessSet) -> bool:
    """``a subset_p b``: maximal expectations dominated for every function."""
    verdict, _ = subset_p_certified(a, b)
    return verdict


def separating_function(cert: SubsetPCertificate) -> Callable[[Value], Fraction]:
    """Turn a negative certificate into the falsifying expectation function."""
    table = {value_key(v): c for (v, c) in cert.separating or []}

    def f(v: Value) -> Fraction:
        return table.get(value_key(v), Fraction(0))

    return f
