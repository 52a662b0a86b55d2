"""Expression grammar for real-valued defining functions on C^N.

Grammar (tokens are bit-exact; whitespace separates freely):

    expr   := ['-'] term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' integer)?
    atom   := number | ident | func '(' expr ')' | '(' expr ')'
    func   := re | im | abs2 | conj | log
    ident  := z1..z9 | parameter name
    number := decimal literal, optional trailing 'i'

Complex constants are written as sums, e.g. ``1+2i``.  The parsed tree is a
small immutable AST; defining functions pair a tree with a dimension and a
full set of parameter bindings and are validated to be real-valued by a
deterministic random probe.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass, field

import numpy as np

FUNCTIONS = ("re", "im", "abs2", "conj", "log")

MAX_VARS = 9


class ParseError(ValueError):
    """Syntax or validation error; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class NonRealExpressionError(ValueError):
    pass


class EvalDomainError(ArithmeticError):
    """log of zero or division by zero during evaluation."""


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Var:
    index: int  # 0-based; z1 -> 0


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    a: object
    b: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Neg:
    a: object


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = _re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?i?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""",
    _re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        if tok[0] != "eof":
            self.i += 1
        return tok

    def _eof_position(self):
        # report the last consumed token's offset, not end-of-string
        return self.tokens[max(self.i - 1, 0)][2]

    def expect(self, text: str):
        kind, val, pos = self.next()
        if val != text:
            if kind == "eof":
                raise ParseError(f"expected {text!r}, found end of input", self._eof_position())
            raise ParseError(f"expected {text!r}, found {val!r}", pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {val!r}", pos)
        return node

    def expr(self):
        kind, val, pos = self.peek()
        negate = False
        if val == "-":
            self.next()
            negate = True
        node = self.term()
        if negate:
            node = Neg(node)
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        node = self.atom()
        if self.peek()[1] == "^":
            self.next()
            node = Pow(node, self.integer())
        return node

    def integer(self):
        sign = 1
        if self.peek()[1] == "-":
            self.next()
            sign = -1
        kind, val, pos = self.next()
        if kind != "num" or not _re.fullmatch(r"\d+", val):
            where = self._eof_position() if kind == "eof" else pos
            raise ParseError("exponent must be an integer", where)
        return sign * int(val)

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            if val.endswith("i"):
                return Num(complex(0.0, float(val[:-1])))
            return Num(complex(float(val), 0.0))
        if kind == "ident":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if _re.fullmatch(r"z[0-9]+", val):
                idx = int(val[1:])
                if not 1 <= idx <= MAX_VARS:
                    raise ParseError(f"variable {val!r} out of range z1..z{MAX_VARS}", pos)
                return Var(idx - 1)
            return Param(val)
        if val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        where = self._eof_position() if kind == "eof" else pos
        what = "end of input" if kind == "eof" else repr(val)
        raise ParseError(f"expected a value, found {what}", where)


def parse(text: str):
    """Parse ``text`` to an expression tree. Raises ParseError with offset."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printing (minimal parentheses, round-trips through parse())

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_num(v: complex) -> str:
    if v.imag == 0.0:
        r = v.real
        if r < 0:
            return f"(0-{_fmt_pos(-r)})"
        return _fmt_pos(r)
    if v.real == 0.0:
        if v.imag < 0:
            return f"(0-{_fmt_pos(-v.imag)}i)"
        return _fmt_pos(v.imag) + "i"
    re_s = _fmt_num(complex(v.real, 0.0))
    op = "+" if v.imag > 0 else "-"
    return f"({re_s}{op}{_fmt_pos(abs(v.imag))}i)"


def _fmt_pos(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0
    s = repr(x)
    if s.endswith(".0"):
        s = s[:-2]
    return s


def to_string(node, _parent_prec: int = 0) -> str:
    if isinstance(node, Num):
        s = _fmt_num(node.value)
        return s
    if isinstance(node, Var):
        return f"z{node.index + 1}"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Neg):
        # leading minus binds a whole term, so the operand prints at term level
        inner = to_string(node.a, 2)
        return f"-{inner}" if _parent_prec == 0 else f"(-{inner})"
    if isinstance(node, Call):
        return f"{node.fn}({to_string(node.arg, 0)})"
    if isinstance(node, Pow):
        base = to_string(node.base, 3)
        if isinstance(node.base, Pow):
            # the grammar allows a single '^' per factor
            base = f"({base})"
        if node.exponent < 0:
            # negative exponents don't fit the integer token; print as division
            return f"(1/{base}^{-node.exponent})"
        return f"{base}^{node.exponent}"
    if isinstance(node, BinOp):
        prec = _PREC[node.op]
        left = to_string(node.a, prec)
        # the grammar is left-associative, so a bare right operand at equal
        # precedence would reassociate; parenthesize it
        right = to_string(node.b, prec + 1)
        s = f"{left}{node.op}{right}"
        if prec < _parent_prec:
            s = f"({s})"
        return s
    raise TypeError(f"unknown node {node!r}")


# ---------------------------------------------------------------------------
# Tree utilities


def free_names(node) -> tuple[set[int], set[str]]:
    """Return (variable indices, parameter names) appearing in the tree."""
    vs: set[int] = set()
    ps: set[str] = set()

    def walk(n):
        if isinstance(n, Var):
            vs.add(n.index)
        elif isinstance(n, Param):
            ps.add(n.name)
        elif isinstance(n, BinOp):
            walk(n.a)
            walk(n.b)
        elif isinstance(n, (Neg, Pow)):
            walk(n.a if isinstance(n, Neg) else n.base)
        elif isinstance(n, Call):
            walk(n.arg)

    walk(node)
    return vs, ps


def substitute(node, bindings: dict):
    """Replace parameters by numeric literals."""
    if isinstance(node, Param):
        if node.name in bindings:
            return Num(complex(bindings[node.name]))
        return node
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.a, bindings), substitute(node.b, bindings))
    if isinstance(node, Neg):
        return Neg(substitute(node.a, bindings))
    if isinstance(node, Pow):
        return Pow(substitute(node.base, bindings), node.exponent)
    if isinstance(node, Call):
        return Call(node.fn, substitute(node.arg, bindings))
    return node


def eval_tree(node, z, params: dict | None = None) -> complex:
    """Reference recursive evaluator (used by tests and the reality probe)."""
    params = params or {}
    z = np.asarray(z, dtype=np.complex128)

    def ev(n) -> complex:
        if isinstance(n, Num):
            return n.value
        if isinstance(n, Var):
            return complex(z[n.index])
        if isinstance(n, Param):
            try:
                return complex(params[n.name])
            except KeyError:
                raise KeyError(f"unbound parameter {n.name!r}") from None
        if isinstance(n, Neg):
            return -ev(n.a)
        if isinstance(n, Pow):
            b = ev(n.base)
            if n.exponent < 0 and b == 0:
                raise EvalDomainError("zero raised to a negative power")
            return b ** n.exponent
        if isinstance(n, BinOp):
            a, b = ev(n.a), ev(n.b)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            if b == 0:
                raise EvalDomainError("division by zero")
            return a / b
        if isinstance(n, Call):
            v = ev(n.arg)
            if n.fn == "re":
                return complex(v.real, 0.0)
            if n.fn == "im":
                return complex(v.imag, 0.0)
            if n.fn == "abs2":
                return complex(v.real * v.real + v.imag * v.imag, 0.0)
            if n.fn == "conj":
                return v.conjugate()
            if v == 0:
                raise EvalDomainError("log of zero")
            return complex(np.log(v))
        raise TypeError(f"unknown node {n!r}")

    return ev(node)


# ---------------------------------------------------------------------------
# Defining functions


@dataclass(frozen=True, eq=False)
class DefiningFunction:
    """A real-valued defining function rho on C^N.

    ``tree`` has all parameters bound through ``params``; ``dimension`` is the
    number of complex variables N (the hypersurface M = {rho = 0} then has CR
    dimension N-1).
    """

    dimension: int
    tree: object
    params: dict = field(default_factory=dict)
    source: str = ""

    def __post_init__(self):
        vs, ps = free_names(self.tree)
        if vs and max(vs) >= self.dimension:
            raise ValueError(
                f"expression uses z{max(vs) + 1} but dimension is {self.dimension}"
            )
        missing = ps - set(self.params)
        if missing:
            raise ValueError(f"unbound parameters: {sorted(missing)}")
        for name in self.params:
            if name in FUNCTIONS or _re.fullmatch(r"z[0-9]+", name):
                raise ValueError(f"reserved identifier used as parameter: {name!r}")

    @property
    def bound_tree(self):
        return substitute(self.tree, self.params)

    def __call__(self, z) -> float:
        v = eval_tree(self.tree, z, self.params)
        return float(v.real)

    def describe(self) -> str:
        return to_string(self.tree)


def _reality_probe(fn: DefiningFunction, n_probe: int = 32, tol: float = 1e-10):
    rng = np.random.Generator(np.random.Philox(key=0x5EED_0F_9E0))
    worst = 0.0
    for _ in range(n_probe):
        z = rng.standard_normal(fn.dimension) + 1j * rng.standard_normal(fn.dimension)
        z *= 0.8
        try:
            v = eval_tree(fn.tree, z, fn.params)
        except EvalDomainError:
            continue
        worst = max(worst, abs(v.imag) / max(1.0, abs(v)))
    if worst > tol:
        raise NonRealExpressionError(
            f"expression is not real-valued (worst relative imaginary part {worst:.3e})"
        )


def defining_function(
    text_or_tree,
    dimension: int | None = None,
    params: dict | None = None,
    check_real: bool = True,
) -> DefiningFunction:
    """Build and validate a DefiningFunction from source text or a tree."""
    tree = parse(text_or_tree) if isinstance(text_or_tree, str) else text_or_tree
    source = text_or_tree if isinstance(text_or_tree, str) else to_string(text_or_tree)
    vs, _ = free_names(tree)
    if dimension is None:
        if not vs:
            raise ValueError("cannot infer dimension: no variables present")
        dimension = max(vs) + 1
    fn = DefiningFunction(dimension, tree, dict(params or {}), source)
    if check_real:
        _reality_probe(fn)
    return fn
