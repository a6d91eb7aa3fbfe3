"""Syntax of the concurrent probabilistic language.

Values are unit, integers, booleans, heap locations, pairs, and recursive
closures.  Expressions add variables, application, let-sequencing,
conditionals, the biased coin ``flip``, heap primitives (``alloc`` /
``load`` / ``store`` / ``faa`` / ``cas``), ``wait`` (block until a cell
holds a given value -- the join primitive), ``fork``, and arithmetic /
comparison / pair primitives.

Concrete syntax is s-expressions, one form per constructor:

    e ::= n | #t | #f | () | x | (loc n)
        | (rec (f x) e) | (lam (x) e) | (e e ...)
        | (let (x e) e) | (seq e e ...) | (if e e e)
        | (flip e e) | (fork e)
        | (alloc e) | (load e) | (store e e) | (faa e e)
        | (cas e e e) | (wait e e)
        | (pair e e) | (fst e) | (snd e)
        | (min e e) | (mod e e) | (pow e e) | (+ e e) | (- e e) | (* e e)
        | (= e e) | (< e e) | (<= e e) | (not e) | (and e e) | (or e e)

``lam`` is sugar for a ``rec`` whose self-name is ``_``; ``seq`` is sugar
for ``let`` with binder ``_``.  The printer emits the canonical forms, so
print-then-parse is the identity on ASTs and printing is idempotent on
text.  Runtime-only values (pairs, closures) print as their constructor
expressions.
"""

from __future__ import annotations

from dataclasses import dataclass

from ivalbench import sexpr
from ivalbench.sexpr import Symbol


# ---------------------------------------------------------------------------
# values


class Val:
    pass


@dataclass(frozen=True, slots=True)
class VUnit(Val):
    def __repr__(self):
        return "()"


@dataclass(frozen=True, slots=True)
class VInt(Val):
    n: int

    def __repr__(self):
        return str(self.n)


@dataclass(frozen=True, slots=True)
class VBool(Val):
    b: bool

    def __repr__(self):
        return "#t" if self.b else "#f"


@dataclass(frozen=True, slots=True)
class VLoc(Val):
    loc: int

    def __repr__(self):
        return f"loc:{self.loc}"


@dataclass(frozen=True, slots=True)
class VPair(Val):
    fst: Val
    snd: Val

    def __repr__(self):
        return f"({self.fst!r}, {self.snd!r})"


@dataclass(frozen=True, slots=True)
class VClosure(Val):
    fname: str
    xname: str
    body: "Expr"

    def __repr__(self):
        return f"<rec {self.fname} {self.xname}>"


UNIT = VUnit()
TRUE = VBool(True)
FALSE = VBool(False)


# ---------------------------------------------------------------------------
# expressions


class Expr:
    pass


RESERVED = frozenset([
    "lam", "rec", "let", "seq", "if", "flip", "fork", "alloc", "load",
    "store", "faa", "cas", "wait", "pair", "loc", "fst", "snd", "min",
    "mod", "pow", "not", "and", "or", "+", "-", "*", "=", "<", "<=",
])

PRIM_OPS = frozenset([
    "min", "mod", "pow", "+", "-", "*", "=", "<", "<=", "not", "and",
    "or", "fst", "snd",
])

PRIM_ARITY = {op: (1 if op in ("not", "fst", "snd") else 2) for op in PRIM_OPS}


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if self.name in RESERVED:
            raise ValueError(f"variable name {self.name!r} is reserved")


@dataclass(frozen=True, slots=True)
class Lit(Expr):
    value: Val


@dataclass(frozen=True, slots=True)
class Pair(Expr):
    fst: Expr
    snd: Expr


@dataclass(frozen=True, slots=True)
class Rec(Expr):
    fname: str
    xname: str
    body: Expr


@dataclass(frozen=True, slots=True)
class App(Expr):
    fn: Expr
    arg: Expr


@dataclass(frozen=True, slots=True)
class Let(Expr):
    name: str
    bound: Expr
    body: Expr


@dataclass(frozen=True, slots=True)
class If(Expr):
    cond: Expr
    then: Expr
    els: Expr


@dataclass(frozen=True, slots=True)
class Flip(Expr):
    num: Expr
    den: Expr


@dataclass(frozen=True, slots=True)
class Fork(Expr):
    body: Expr


@dataclass(frozen=True, slots=True)
class Alloc(Expr):
    init: Expr


@dataclass(frozen=True, slots=True)
class Load(Expr):
    ref: Expr


@dataclass(frozen=True, slots=True)
class Store(Expr):
    ref: Expr
    value: Expr


@dataclass(frozen=True, slots=True)
class Faa(Expr):
    ref: Expr
    delta: Expr


@dataclass(frozen=True, slots=True)
class Cas(Expr):
    ref: Expr
    expected: Expr
    new: Expr


@dataclass(frozen=True, slots=True)
class Wait(Expr):
    ref: Expr
    value: Expr


@dataclass(frozen=True, slots=True)
class Prim(Expr):
    op: str
    args: tuple

    def __post_init__(self):
        if self.op not in PRIM_OPS:
            raise ValueError(f"unknown primitive {self.op!r}")
        if len(self.args) != PRIM_ARITY[self.op]:
            raise ValueError(f"{self.op} expects {PRIM_ARITY[self.op]} arguments")


def seq(*exprs: Expr) -> Expr:
    """Right-nested sequencing with throwaway binders."""
    if not exprs:
        raise ValueError("empty sequence")
    out = exprs[-1]
    for e in reversed(exprs[:-1]):
        out = Let("_", e, out)
    return out


def lam(x: str, body: Expr) -> Expr:
    return Rec("_", x, body)


def num(n: int) -> Expr:
    return Lit(VInt(n))


def boolean(b: bool) -> Expr:
    return Lit(TRUE if b else FALSE)


unit = Lit(UNIT)


# ---------------------------------------------------------------------------
# value <-> expression


def is_value(e: Expr) -> bool:
    t = type(e)
    if t is Lit or t is Rec:
        return True
    if t is Pair:
        return is_value(e.fst) and is_value(e.snd)
    return False


def to_val(e: Expr) -> Val:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Rec):
        return VClosure(e.fname, e.xname, e.body)
    if isinstance(e, Pair):
        return VPair(to_val(e.fst), to_val(e.snd))
    raise ValueError(f"not a value: {e!r}")


def of_val(v: Val) -> Expr:
    if isinstance(v, VClosure):
        return Rec(v.fname, v.xname, v.body)
    return Lit(v)


# ---------------------------------------------------------------------------
# substitution (values are closed, so no capture is possible)


def subst(e: Expr, name: str, replacement: Expr) -> Expr:
    if name == "_":
        return e
    t = type(e)
    if t is Var:
        return replacement if e.name == name else e
    if t is Lit:
        return e
    if t is Pair:
        return Pair(subst(e.fst, name, replacement), subst(e.snd, name, replacement))
    if t is Rec:
        if name == e.fname or name == e.xname:
            return e
        return Rec(e.fname, e.xname, subst(e.body, name, replacement))
    if t is App:
        return App(subst(e.fn, name, replacement), subst(e.arg, name, replacement))
    if t is Let:
        body = e.body if e.name == name else subst(e.body, name, replacement)
        return Let(e.name, subst(e.bound, name, replacement), body)
    if t is If:
        return If(subst(e.cond, name, replacement), subst(e.then, name, replacement),
                  subst(e.els, name, replacement))
    if t is Flip:
        return Flip(subst(e.num, name, replacement), subst(e.den, name, replacement))
    if t is Fork:
        return Fork(subst(e.body, name, replacement))
    if t is Alloc:
        return Alloc(subst(e.init, name, replacement))
    if t is Load:
        return Load(subst(e.ref, name, replacement))
    if t is Store:
        return Store(subst(e.ref, name, replacement), subst(e.value, name, replacement))
    if t is Faa:
        return Faa(subst(e.ref, name, replacement), subst(e.delta, name, replacement))
    if t is Cas:
        return Cas(subst(e.ref, name, replacement), subst(e.expected, name, replacement),
                   subst(e.new, name, replacement))
    if t is Wait:
        return Wait(subst(e.ref, name, replacement), subst(e.value, name, replacement))
    if t is Prim:
        return Prim(e.op, tuple(subst(a, name, replacement) for a in e.args))
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# parser


def parse(text: str) -> Expr:
    """Parse one program; errors carry line:column positions."""
    return from_sexpr(sexpr.read(text))


def from_sexpr(s) -> Expr:
    if isinstance(s, bool):
        return boolean(s)
    if isinstance(s, int):
        return num(s)
    if isinstance(s, Symbol):
        if s.name in RESERVED:
            raise sexpr.SexprError(f"reserved word {s.name!r} used as a variable")
        return Var(s.name)
    if not isinstance(s, list):
        raise sexpr.SexprError(f"cannot parse {s!r}")
    if not s:
        return unit
    head = s[0]
    if isinstance(head, Symbol):
        kw = head.name
        if kw == "loc":
            expect(s, 2, kw)
            if not isinstance(s[1], int):
                raise sexpr.SexprError("loc expects an integer literal")
            return Lit(VLoc(s[1]))
        if kw == "rec":
            expect(s, 3, kw)
            binder = s[1]
            if (not isinstance(binder, list) or len(binder) != 2
                    or not all(isinstance(b, Symbol) for b in binder)):
                raise sexpr.SexprError("rec expects a (self arg) binder list")
            return Rec(binder[0].name, binder[1].name, from_sexpr(s[2]))
        if kw == "lam":
            expect(s, 3, kw)
            binder = s[1]
            if (not isinstance(binder, list) or len(binder) != 1
                    or not isinstance(binder[0], Symbol)):
                raise sexpr.SexprError("lam expects an (arg) binder list")
            return Rec("_", binder[0].name, from_sexpr(s[2]))
        if kw == "let":
            expect(s, 3, kw)
            binder = s[1]
            if (not isinstance(binder, list) or len(binder) != 2
                    or not isinstance(binder[0], Symbol)):
                raise sexpr.SexprError("let expects an (x e) binder list")
            return Let(binder[0].name, from_sexpr(binder[1]), from_sexpr(s[2]))
        if kw == "seq":
            if len(s) < 3:
                raise sexpr.SexprError("seq expects at least two expressions")
            return seq(*[from_sexpr(x) for x in s[1:]])
        if kw == "if":
            expect(s, 4, kw)
            return If(from_sexpr(s[1]), from_sexpr(s[2]), from_sexpr(s[3]))
        if kw == "flip":
            expect(s, 3, kw)
            return Flip(from_sexpr(s[1]), from_sexpr(s[2]))
        if kw == "fork":
            expect(s, 2, kw)
            return Fork(from_sexpr(s[1]))
        if kw == "alloc":
            expect(s, 2, kw)
            return Alloc(from_sexpr(s[1]))
        if kw == "load":
            expect(s, 2, kw)
            return Load(from_sexpr(s[1]))
        if kw == "store":
            expect(s, 3, kw)
            return Store(from_sexpr(s[1]), from_sexpr(s[2]))
        if kw == "faa":
            expect(s, 3, kw)
            return Faa(from_sexpr(s[1]), from_sexpr(s[2]))
        if kw == "cas":
            expect(s, 4, kw)
            return Cas(from_sexpr(s[1]), from_sexpr(s[2]), from_sexpr(s[3]))
        if kw == "wait":
            expect(s, 3, kw)
            return Wait(from_sexpr(s[1]), from_sexpr(s[2]))
        if kw == "pair":
            expect(s, 3, kw)
            return Pair(from_sexpr(s[1]), from_sexpr(s[2]))
        if kw in PRIM_OPS:
            expect(s, 1 + PRIM_ARITY[kw], kw)
            return Prim(kw, tuple(from_sexpr(x) for x in s[1:]))
    # application, n-ary sugar for left-nested binary application
    if len(s) < 2:
        raise sexpr.SexprError(f"cannot parse application {s!r}")
    out = from_sexpr(s[0])
    for arg in s[1:]:
        out = App(out, from_sexpr(arg))
    return out


def expect(s: list, n: int, kw: str) -> None:
    if len(s) != n:
        raise sexpr.SexprError(f"{kw} expects {n - 1} argument(s), got {len(s) - 1}")


# ---------------------------------------------------------------------------
# printer


def to_sexpr(e: Expr):
    match e:
        case Var(name=n):
            return Symbol(n)
        case Lit(value=v):
            return val_to_sexpr(v)
        case Pair(fst=a, snd=b):
            return [Symbol("pair"), to_sexpr(a), to_sexpr(b)]
        case Rec(fname=f, xname=x, body=b):
            return [Symbol("rec"), [Symbol(f), Symbol(x)], to_sexpr(b)]
        case App():
            parts = []
            cur = e
            while isinstance(cur, App):
                parts.append(to_sexpr(cur.arg))
                cur = cur.fn
            parts.append(to_sexpr(cur))
            return list(reversed(parts))
        case Let(name=n, bound=b, body=body):
            if n == "_":
                parts = [to_sexpr(b)]
                cur = body
                while isinstance(cur, Let) and cur.name == "_":
                    parts.append(to_sexpr(cur.bound))
                    cur = cur.body
                parts.append(to_sexpr(cur))
                return [Symbol("seq")] + parts
            return [Symbol("let"), [Symbol(n), to_sexpr(b)], to_sexpr(body)]
        case If(cond=c, then=t, els=f):
            return [Symbol("if"), to_sexpr(c), to_sexpr(t), to_sexpr(f)]
        case Flip(num=a, den=b):
            return [Symbol("flip"), to_sexpr(a), to_sexpr(b)]
        case Fork(body=b):
            return [Symbol("fork"), to_sexpr(b)]
        case Alloc(init=a):
            return [Symbol("alloc"), to_sexpr(a)]
        case Load(ref=a):
            return [Symbol("load"), to_sexpr(a)]
        case Store(ref=a, value=b):
            return [Symbol("store"), to_sexpr(a), to_sexpr(b)]
        case Faa(ref=a, delta=b):
            return [Symbol("faa"), to_sexpr(a), to_sexpr(b)]
        case Cas(ref=a, expected=b, new=c):
            return [Symbol("cas"), to_sexpr(a), to_sexpr(b), to_sexpr(c)]
        case Wait(ref=a, value=b):
            return [Symbol("wait"), to_sexpr(a), to_sexpr(b)]
        case Prim(op=op, args=args):
            return [Symbol(op)] + [to_sexpr(a) for a in args]
    raise TypeError(f"not an expression: {e!r}")


def val_to_sexpr(v: Val):
    match v:
        case VUnit():
            return []
        case VInt(n=n):
            return n
        case VBool(b=b):
            return b
        case VLoc(loc=l):
            return [Symbol("loc"), l]
        case VPair(fst=a, snd=b):
            return [Symbol("pair"), val_to_sexpr(a), val_to_sexpr(b)]
        case VClosure(fname=f, xname=x, body=b):
            return [Symbol("rec"), [Symbol(f), Symbol(x)], to_sexpr(b)]
    raise TypeError(f"not a value: {v!r}")


def unparse(e: Expr) -> str:
    return sexpr.write(to_sexpr(e))


# ---------------------------------------------------------------------------
# random source ASTs (parser round-trip fodder)


def gen_expr(rng, depth: int = 4) -> Expr:
    """A random closed-ish source AST; used for print/parse round trips."""
    names = ["x", "y", "z", "acc", "n1"]
    if depth <= 0:
        leaf = rng.choice(["int", "bool", "unit", "var"])
        if leaf == "int":
            return num(rng.randint(-20, 20))
        if leaf == "bool":
            return boolean(rng.random() < 0.5)
        if leaf == "unit":
            return unit
        return Var(rng.choice(names))
    d = depth - 1
    form = rng.choice([
        "leaf", "pair", "rec", "app", "let", "seq", "if", "flip", "fork",
        "alloc", "load", "store", "faa", "cas", "wait", "prim1", "prim2",
    ])
    if form == "leaf":
        return gen_expr(rng, 0)
    if form == "pair":
        return Pair(gen_expr(rng, d), gen_expr(rng, d))
    if form == "rec":
        if rng.random() < 0.3:
            return Rec("_", rng.choice(names), gen_expr(rng, d))
        return Rec("f", rng.choice(names), gen_expr(rng, d))
    if form == "app":
        e = gen_expr(rng, d)
        for _ in range(rng.randint(1, 2)):
            e = App(e, gen_expr(rng, d))
        return e
    if form == "let":
        return Let(rng.choice(names), gen_expr(rng, d), gen_expr(rng, d))
    if form == "seq":
        return seq(*[gen_expr(rng, d) for _ in range(rng.randint(2, 3))])
    if form == "if":
        return If(gen_expr(rng, d), gen_expr(rng, d), gen_expr(rng, d))
    if form == "flip":
        return Flip(gen_expr(rng, d), gen_expr(rng, d))
    if form == "fork":
        return Fork(gen_expr(rng, d))
    if form == "alloc":
        return Alloc(gen_expr(rng, d))
    if form == "load":
        return Load(gen_expr(rng, d))
    if form == "store":
        return Store(gen_expr(rng, d), gen_expr(rng, d))
    if form == "faa":
        return Faa(gen_expr(rng, d), gen_expr(rng, d))
    if form == "cas":
        return Cas(gen_expr(rng, d), gen_expr(rng, d), gen_expr(rng, d))
    if form == "wait":
        return Wait(gen_expr(rng, d), gen_expr(rng, d))
    if form == "prim1":
        op = rng.choice(["not", "fst", "snd"])
        return Prim(op, (gen_expr(rng, d),))
    op = rng.choice(["min", "mod", "pow", "+", "-", "*", "=", "<", "<=", "and", "or"])
    return Prim(op, (gen_expr(rng, d), gen_expr(rng, d)))
