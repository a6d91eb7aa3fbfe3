"""Textual derivation scripts for coupling constructions.

A script is one s-expression naming constructor rules:

    d ::= (ret <val> <val> <pred>)
        | (pchoice <rat> <d> <d>)
        | (bind <d> (case ((<val> <val>) <d>) ...) [(else-rhs (<val> <pset>) ...)])
        | (equiv <d> <ival> <pset>)
        | (conseq <d> <pred>)
        | (trivial <ival> <pset>)

    <ival> ::= (ival (<val> <rat>) ...)          probabilities sum to 1
    <pset> ::= (pset <ival> ...)
    <pred> ::= (pred-true) | (pred-eq) | (pred-expr <bexpr>)
    <bexpr>::= #t | #f | (and <bexpr> <bexpr>) | (or <bexpr> <bexpr>)
             | (not <bexpr>) | (= x <val>) | (= y <val>) | (= x y)
    <val>  ::= integer | #t | #f | (tuple <val> ...)
    <rat>  ::= integer | num/den

Evaluating a script yields a checked derivation; the CLI turns the
checker's verdict into a report.
"""

from __future__ import annotations

from fractions import Fraction

from ivalbench import coupling, ival, ndset, sexpr
from ivalbench.ival import value_key
from ivalbench.sexpr import Symbol


class ScriptError(Exception):
    pass


def parse_rational(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, Symbol) and "/" in s.name:
        num, den = s.name.split("/", 1)
        try:
            return Fraction(int(num), int(den))
        except ValueError:
            pass
    raise ScriptError(f"expected a rational, got {s!r}")


def parse_value(s):
    if isinstance(s, (bool, int)):
        return s
    if isinstance(s, list) and s and s[0] == Symbol("tuple"):
        return tuple(parse_value(x) for x in s[1:])
    raise ScriptError(f"expected a value, got {s!r}")


def parse_ival(s) -> ival.IndexedValuation:
    if not (isinstance(s, list) and s and s[0] == Symbol("ival")):
        raise ScriptError(f"expected (ival ...), got {s!r}")
    entries = []
    for (k, item) in enumerate(s[1:]):
        if not (isinstance(item, list) and len(item) == 2):
            raise ScriptError(f"expected (value prob), got {item!r}")
        entries.append((k, parse_value(item[0]), parse_rational(item[1])))
    return ival.IndexedValuation(tuple(entries))


def parse_pset(s) -> ndset.ProcessSet:
    if not (isinstance(s, list) and s and s[0] == Symbol("pset")):
        raise ScriptError(f"expected (pset ...), got {s!r}")
    return ndset.ProcessSet(tuple(parse_ival(x) for x in s[1:]))


def parse_bexpr(s):
    if isinstance(s, bool):
        return lambda x, y: s
    if not (isinstance(s, list) and s):
        raise ScriptError(f"expected a boolean expression, got {s!r}")
    head = s[0]
    if head == Symbol("and"):
        a, b = parse_bexpr(s[1]), parse_bexpr(s[2])
        return lambda x, y: a(x, y) and b(x, y)
    if head == Symbol("or"):
        a, b = parse_bexpr(s[1]), parse_bexpr(s[2])
        return lambda x, y: a(x, y) or b(x, y)
    if head == Symbol("not"):
        a = parse_bexpr(s[1])
        return lambda x, y: not a(x, y)
    if head == Symbol("="):
        sides = []
        for side in s[1:3]:
            if side == Symbol("x"):
                sides.append(lambda x, y: x)
            elif side == Symbol("y"):
                sides.append(lambda x, y: y)
            else:
                v = parse_value(side)
                sides.append(lambda x, y, v=v: v)
        a, b = sides
        return lambda x, y: value_key(a(x, y)) == value_key(b(x, y))
    raise ScriptError(f"unknown boolean form {s!r}")


def parse_pred(s):
    if not (isinstance(s, list) and s):
        raise ScriptError(f"expected a predicate form, got {s!r}")
    head = s[0]
    if head == Symbol("pred-true"):
        return (lambda x, y: True), "TRUE"
    if head == Symbol("pred-eq"):
        return (lambda x, y: value_key(x) == value_key(y)), "x=y"
    if head == Symbol("pred-expr"):
        return parse_bexpr(s[1]), sexpr.write(s[1])
    raise ScriptError(f"unknown predicate form {s!r}")


def eval_script(s) -> coupling.Derivation:
    if not (isinstance(s, list) and s and isinstance(s[0], Symbol)):
        raise ScriptError(f"expected a derivation form, got {s!r}")
    rule = s[0].name
    if rule == "ret":
        a, b = parse_value(s[1]), parse_value(s[2])
        pred, name = parse_pred(s[3])
        return coupling.couple_ret(a, b, pred, name)
    if rule == "pchoice":
        p = parse_rational(s[1])
        return coupling.couple_pchoice(eval_script(s[2]), eval_script(s[3]), p)
    if rule == "bind":
        d1 = eval_script(s[1])
        cases = {}
        if not (isinstance(s[2], list) and s[2] and s[2][0] == Symbol("case")):
            raise ScriptError("bind expects a (case ...) block")
        for item in s[2][1:]:
            if not (isinstance(item, list) and len(item) == 2
                    and isinstance(item[0], list) and len(item[0]) == 2):
                raise ScriptError(f"case entry must be ((x y) derivation), got {item!r}")
            (pair_s, sub_s) = item
            pair = (parse_value(pair_s[0]), parse_value(pair_s[1]))
            cases[value_key(pair)] = eval_script(sub_s)
        rhs_else = {}
        if len(s) > 3:
            if not (isinstance(s[3], list) and s[3] and s[3][0] == Symbol("else-rhs")):
                raise ScriptError("bind's optional third block is (else-rhs ...)")
            for item in s[3][1:]:
                if not (isinstance(item, list) and len(item) == 2):
                    raise ScriptError(f"else-rhs entry must be (value pset), got {item!r}")
                (vy, ps) = item
                rhs_else[value_key(parse_value(vy))] = parse_pset(ps)

        def k(x, y):
            key = value_key((x, y))
            if key not in cases:
                raise coupling.CouplingError(f"no case for support pair {(x, y)!r}")
            return cases[key]

        def rhs_cont(y):
            got = rhs_else.get(value_key(y))
            if got is None:
                raise coupling.CouplingError(f"no else-rhs entry for {y!r}")
            return got

        return coupling.couple_bind(d1, k, rhs_cont=rhs_cont if rhs_else else None)
    if rule == "equiv":
        return coupling.couple_equiv(eval_script(s[1]), parse_ival(s[2]),
                                     parse_pset(s[3]))
    if rule == "conseq":
        d = eval_script(s[1])
        pred, name = parse_pred(s[2])
        return coupling.couple_conseq(d, pred, name)
    if rule == "trivial":
        return coupling.couple_trivial(parse_ival(s[1]), parse_pset(s[2]))
    raise ScriptError(f"unknown rule {rule!r}")


def load_script(text: str) -> coupling.Derivation:
    return eval_script(sexpr.read(text))
