"""Small text language for Young functions.

Grammar::

    expr  := NAME [ "(" [ arg ("," arg)* ] ")" ]
    arg   := [ NAME "=" ] ( expr | NUMBER | "inf" | pair )
    pair  := "(" value "," value ")"

Constructors: ``pow(p[, scale])``, ``expm1([scale])``, ``knee(k)``, ``id``,
``cut(expr, b[, at_b])``, ``dilate(expr, a)``, ``piecewise((u,v), ...)``.

The parser returns the Young function objects directly; they are frozen
dataclasses, so ``parse(format_expr(f)) == f`` is a structural comparison.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

from .young import (
    CutOff,
    Dilated,
    ExpMinusOne,
    Identity,
    LinearAboveKnee,
    Piecewise,
    Power,
    YoungFunction,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<punct>[(),=])
    """,
    re.VERBOSE,
)


class DSLError(ValueError):
    def __init__(self, message: str, text: str, start: int, end: int | None = None):
        self.message = message
        self.text = text
        self.start = start
        self.end = end if end is not None else start + 1
        super().__init__(str(self))

    def __str__(self):
        width = max(1, self.end - self.start)
        caret = " " * self.start + "^" * width
        return f"{self.message} at column {self.start + 1}\n  {self.text}\n  {caret}"


@dataclass
class _Tok:
    kind: str
    text: str
    start: int
    end: int


@dataclass
class _Arg:
    key: str | None
    value: object
    start: int
    end: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), m.start(), m.end()))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text), len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok.text != text:
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise DSLError(f"expected {text!r}, found {found}", self.text, tok.start, tok.end)
        return self.take()

    def error(self, msg, tok_or_start, end=None):
        if isinstance(tok_or_start, _Tok):
            raise DSLError(msg, self.text, tok_or_start.start, tok_or_start.end)
        raise DSLError(msg, self.text, tok_or_start, end)

    # grammar ---------------------------------------------------------------

    def parse(self) -> YoungFunction:
        expr = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            self.error(f"unexpected trailing input {tok.text!r}", tok)
        if not isinstance(expr, YoungFunction):
            self.error("expected a function expression", 0, len(self.text))
        return expr

    def expr(self):
        tok = self.peek()
        if tok.kind != "name":
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            self.error(f"expected a function name, found {found}", tok)
        self.take()
        args: list[_Arg] = []
        end = tok.end
        if self.peek().text == "(":
            self.take()
            if self.peek().text != ")":
                args.append(self.arg())
                while self.peek().text == ",":
                    self.take()
                    args.append(self.arg())
            end = self.expect(")").end
        return self.build(tok, args, end)

    def arg(self) -> _Arg:
        key = None
        start = self.peek().start
        if self.peek().kind == "name" and self.peek(1).text == "=":
            key = self.take().text
            self.take()
        value, end = self.value()
        return _Arg(key, value, start, end)

    def value(self):
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return float(tok.text), tok.end
        if tok.kind == "name" and tok.text == "inf":
            self.take()
            return math.inf, tok.end
        if tok.text == "(":
            self.take()
            a, _ = self.value()
            self.expect(",")
            b, _ = self.value()
            end = self.expect(")").end
            return (a, b), end
        if tok.kind == "name":
            start = tok.start
            e = self.expr()
            return e, self.toks[self.i - 1].end if self.i else start
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        self.error(f"expected a value, found {found}", tok)

    # constructors ------------------------------------------------------------

    def build(self, name_tok: _Tok, args: list[_Arg], end: int) -> YoungFunction:
        name = name_tok.text
        sig = _SIGNATURES.get(name)
        if sig is None:
            self.error(f"unknown function {name!r}", name_tok)
        if name == "piecewise":
            return self.build_piecewise(name_tok, args, end)
        params, required = sig
        bound: dict[str, _Arg] = {}
        positional = True
        for k, arg in enumerate(args):
            if arg.key is None:
                if not positional:
                    self.error("positional argument after keyword argument", arg.start, arg.end)
                if k >= len(params):
                    self.error(f"{name} takes at most {len(params)} arguments", arg.start, arg.end)
                bound[params[k]] = arg
            else:
                positional = False
                if arg.key not in params:
                    self.error(f"{name} has no parameter {arg.key!r}", arg.start, arg.end)
                if arg.key in bound:
                    self.error(f"parameter {arg.key!r} given twice", arg.start, arg.end)
                bound[arg.key] = arg
        missing = [p for p in params[:required] if p not in bound]
        if missing:
            self.error(f"{name} is missing argument {missing[0]!r}", name_tok.start, end)

        def num(key, default=None, allow_inf=False):
            arg = bound.get(key)
            if arg is None:
                return default
            if not isinstance(arg.value, float):
                self.error(f"{key} must be a number", arg.start, arg.end)
            if math.isinf(arg.value) and not allow_inf:
                self.error(f"{key} must be finite", arg.start, arg.end)
            return arg.value

        def func(key):
            arg = bound[key]
            if not isinstance(arg.value, YoungFunction):
                self.error(f"{key} must be a function expression", arg.start, arg.end)
            return arg.value

        def domain(cond, key, msg):
            if not cond:
                arg = bound.get(key)
                if arg is not None:
                    self.error(msg, arg.start, arg.end)
                self.error(msg, name_tok.start, end)

        try:
            if name == "pow":
                p, scale = num("p"), num("scale", 1.0)
                domain(p >= 1.0, "p", f"pow needs p >= 1, got {p:g}")
                domain(scale > 0.0, "scale", "scale must be > 0")
                return Power(p, scale)
            if name == "expm1":
                scale = num("scale", 1.0)
                domain(scale > 0.0, "scale", "scale must be > 0")
                return ExpMinusOne(scale)
            if name == "knee":
                k = num("k")
                domain(k >= 0.0, "k", "knee must be >= 0")
                return LinearAboveKnee(k)
            if name == "id":
                return Identity()
            if name == "cut":
                inner, b = func("expr"), num("b")
                at_b = num("at_b", math.inf, allow_inf=True)
                domain(b > 0.0, "b", "cut-off point must be > 0")
                return CutOff(inner, b, at_b)
            if name == "dilate":
                inner, a = func("expr"), num("a")
                domain(a > 0.0, "a", "dilation factor must be > 0")
                return Dilated(inner, a)
        except DSLError:
            raise
        except ValueError as exc:
            self.error(str(exc), name_tok.start, end)
        raise AssertionError(name)

    def build_piecewise(self, name_tok, args, end):
        pts = []
        for arg in args:
            if arg.key is not None or not isinstance(arg.value, tuple):
                self.error("piecewise takes (u, value) pairs", arg.start, arg.end)
            pts.append(arg.value)
        if not pts:
            self.error("piecewise needs at least one point", name_tok.start, end)
        xs = [p[0] for p in pts]
        for k in range(1, len(xs)):
            if not xs[k] > xs[k - 1]:
                self.error("piecewise breakpoints must be strictly increasing", args[k].start, args[k].end)
        ys = [p[1] for p in pts]
        for k in range(1, len(ys)):
            if ys[k] < ys[k - 1]:
                self.error("piecewise values must be non-decreasing", args[k].start, args[k].end)
        try:
            return Piecewise(tuple(pts))
        except ValueError as exc:
            self.error(str(exc), name_tok.start, end)


# name -> (parameter names, number required)
_SIGNATURES = {
    "pow": (("p", "scale"), 1),
    "expm1": (("scale",), 0),
    "knee": (("k",), 1),
    "id": ((), 0),
    "cut": (("expr", "b", "at_b"), 2),
    "dilate": (("expr", "a"), 2),
    "piecewise": ((), 0),
}


def parse(text: str) -> YoungFunction:
    return _Parser(text).parse()


def _num(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_expr(phi: YoungFunction) -> str:
    """Canonical text for a Young function built from the DSL constructors."""
    if isinstance(phi, Power):
        return f"pow({_num(phi.p)})" if phi.scale == 1.0 else f"pow({_num(phi.p)},{_num(phi.scale)})"
    if isinstance(phi, ExpMinusOne):
        return "expm1()" if phi.scale == 1.0 else f"expm1({_num(phi.scale)})"
    if isinstance(phi, LinearAboveKnee):
        return f"knee({_num(phi.knee)})"
    if isinstance(phi, Identity):
        return "id"
    if isinstance(phi, CutOff):
        return f"cut({format_expr(phi.inner)},{_num(phi.b)},{_num(phi.value_at_b)})"
    if isinstance(phi, Dilated):
        return f"dilate({format_expr(phi.inner)},{_num(phi.a)})"
    if isinstance(phi, Piecewise):
        return "piecewise(" + ",".join(f"({_num(u)},{_num(v)})" for u, v in phi.points) + ")"
    raise TypeError(f"no textual form for {type(phi).__name__}")


def read_fixture(path: str | Path) -> list[YoungFunction]:
    """One expression per line; blank lines and ``#`` comments are skipped."""
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(parse(line))
        except DSLError as exc:
            raise DSLError(f"{path}:{lineno}: {exc.message}", exc.text, exc.start, exc.end) from None
    return out
