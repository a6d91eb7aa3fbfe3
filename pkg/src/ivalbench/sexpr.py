"""Minimal s-expression reader and printer.

Atoms are integers, the booleans ``#t``/``#f``, and symbols; ``()`` reads
as the empty list.  Comments run from ``;`` to end of line.  Positions are
tracked so parse errors can point at the offending input.
"""

from __future__ import annotations

from dataclasses import dataclass


class SexprError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Symbol:
    name: str

    def __repr__(self):
        return self.name


_DELIMS = "()' \t\r\n;"


class Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, msg: str) -> SexprError:
        return SexprError(msg, self.line, self.col)

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self):
        c = self.text[self.pos]
        self.pos += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c

    def skip_blank(self):
        while self.pos < len(self.text):
            c = self.peek()
            if c in " \t\r\n":
                self.advance()
            elif c == ";":
                while self.pos < len(self.text) and self.peek() != "\n":
                    self.advance()
            else:
                return

    def read(self):
        self.skip_blank()
        if self.pos >= len(self.text):
            raise self.error("unexpected end of input")
        c = self.peek()
        if c == "(":
            self.advance()
            items = []
            while True:
                self.skip_blank()
                if self.pos >= len(self.text):
                    raise self.error("unterminated list")
                if self.peek() == ")":
                    self.advance()
                    return items
                items.append(self.read())
        if c == ")":
            raise self.error("unexpected ')'")
        return self.read_atom()

    def read_atom(self):
        start = self.pos
        while self.pos < len(self.text) and self.peek() not in _DELIMS:
            self.advance()
        token = self.text[start:self.pos]
        if not token:
            raise self.error("empty atom")
        if token == "#t":
            return True
        if token == "#f":
            return False
        try:
            return int(token)
        except ValueError:
            pass
        return Symbol(token)

    def at_end(self) -> bool:
        self.skip_blank()
        return self.pos >= len(self.text)


def read(text: str):
    """Read exactly one s-expression."""
    r = Reader(text)
    out = r.read()
    if not r.at_end():
        raise r.error("trailing input after expression")
    return out


def read_all(text: str) -> list:
    r = Reader(text)
    out = []
    while not r.at_end():
        out.append(r.read())
    return out


def write(obj) -> str:
    if obj is True:
        return "#t"
    if obj is False:
        return "#f"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, Symbol):
        return obj.name
    if isinstance(obj, (list, tuple)):
        return "(" + " ".join(write(x) for x in obj) + ")"
    raise TypeError(f"cannot render {obj!r} as an s-expression")
