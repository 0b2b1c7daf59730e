"""A small expression language for test functions, plus builtin families.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := number | var | func '(' args ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)``. Variables are ``x`` in one dimension and ``x1``, ``x2`` in two.
Unary minus applied directly to a number literal is folded into the literal.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParseError",
    "EvalDomainError",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "parse",
    "evaluate",
    "unparse",
    "FamilySpec",
    "family_to_ast",
]

FUNCTIONS = {
    "abs": 1,
    "ln": 1,
    "exp": 1,
    "sin": 1,
    "cos": 1,
    "pow": 2,
    "step": 1,
    "min": 2,
    "max": 2,
}


class ParseError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvalDomainError(ValueError):
    """Raised when an expression is evaluated outside its real domain."""

    def __init__(self, message, point):
        super().__init__(f"{message} at point {point}")
        self.point = point


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


_TOKEN = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),])|(?P<ws>\s+)"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def variables_for(dim):
    if dim == 1:
        return ("x",)
    if dim == 2:
        return ("x1", "x2")
    raise ValueError(f"unsupported dimension {dim}")


class _Parser:
    def __init__(self, text, dim):
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = variables_for(dim)
        self.dim = dim

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            operand = self.factor()
            if isinstance(operand, Num):
                return Num(-operand.value)
            return Neg(operand)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            value = float(text)
            if not math.isfinite(value):
                raise ParseError(f"number {text} overflows", pos)
            return Num(value)
        if kind == "name":
            if text in FUNCTIONS:
                return self.call(text, pos)
            if text in self.variables:
                return Var(text)
            if text in ("x", "x1", "x2"):
                raise ParseError(f"variable {text!r} not valid in dimension {self.dim}", pos)
            raise ParseError(f"unknown identifier {text!r}", pos)
        if (kind, text) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", pos)

    def call(self, name, pos):
        self.expect("(")
        args = [self.expr()]
        while self.peek()[:2] == ("op", ","):
            self.take()
            args.append(self.expr())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ParseError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", pos
            )
        return Call(name, tuple(args))


def parse(text, dim=1):
    """Parse ``text`` into an AST for functions of ``dim`` variables."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    p = _Parser(text, dim)
    node = p.expr()
    kind, tok, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {tok!r}", pos)
    return node


def _fmt_number(v):
    s = repr(float(v))
    if s in ("inf", "-inf", "nan"):
        raise ValueError(f"cannot print non-finite literal {s}")
    return f"({s})" if s.startswith("-") else s


def unparse(node):
    """Fully parenthesized canonical text; ``parse(unparse(a)) == a``."""
    if isinstance(node, Num):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{unparse(node.operand)})"
    if isinstance(node, BinOp):
        return f"({unparse(node.left)}{node.op}{unparse(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({','.join(unparse(a) for a in node.args)})"
    raise TypeError(f"not an AST node: {node!r}")


def _fail(mask, points, message):
    idx = int(np.flatnonzero(mask)[0])
    pt = points[idx]
    raise EvalDomainError(message, tuple(float(c) for c in pt))


def evaluate(node, points):
    """Evaluate ``node`` at one point or at an ``(N, n)`` array of points.

    Returns a float for a single point and an array otherwise. Raises
    :class:`EvalDomainError` naming the first offending point.
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim <= 1
    if single:
        pts = pts.reshape(1, -1)
    out = _eval(node, pts)
    out = np.broadcast_to(out, (len(pts),)).astype(float)
    return float(out[0]) if single else out


def _eval(node, pts):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        names = variables_for(pts.shape[1])
        if node.name not in names:
            raise ValueError(f"variable {node.name!r} does not match point dimension {pts.shape[1]}")
        return pts[:, names.index(node.name)]
    if isinstance(node, Neg):
        return -_eval(node.operand, pts)
    if isinstance(node, BinOp):
        a = np.broadcast_to(_eval(node.left, pts), (len(pts),))
        b = np.broadcast_to(_eval(node.right, pts), (len(pts),))
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            zero = b == 0
            if zero.any():
                _fail(zero, pts, "division by zero")
            return a / b
        return _power(a, b, pts)
    if isinstance(node, Call):
        args = [np.broadcast_to(_eval(a, pts), (len(pts),)) for a in node.args]
        name = node.name
        if name == "pow":
            return _power(args[0], args[1], pts)
        if name == "min":
            return np.minimum(*args)
        if name == "max":
            return np.maximum(*args)
        (t,) = args
        if name == "ln":
            bad = ~(t > 0)
            if bad.any():
                _fail(bad, pts, "ln of nonpositive value")
            return np.log(t)
        if name == "step":
            return np.where(t >= 0, 1.0, 0.0)
        return {"abs": np.abs, "exp": np.exp, "sin": np.sin, "cos": np.cos}[name](t)
    raise TypeError(f"not an AST node: {node!r}")


def _power(a, b, pts):
    bad = (a == 0) & (b < 0)
    if bad.any():
        _fail(bad, pts, "zero raised to a negative power")
    bad = (a < 0) & (b != np.round(b))
    if bad.any():
        _fail(bad, pts, "negative base with non-integer exponent")
    with np.errstate(over="ignore"):
        return np.power(a, b)


@dataclass(frozen=True)
class FamilySpec:
    """A builtin test-function family.

    ``power``: ``|x - point|**(-beta)``; ``indicator``: 1 on the closed box
    ``bounds``; ``oscillatory``: ``sin(k * x)`` in the first coordinate;
    ``constant``: ``c``.
    """

    name: str
    params: dict

    def __post_init__(self):
        p = self.params
        if self.name == "power":
            beta = float(p.get("beta", float("nan")))
            if not math.isfinite(beta):
                raise ValueError("power family needs a finite beta")
        elif self.name == "indicator":
            for a, b in p["bounds"]:
                if not a < b:
                    raise ValueError(f"indicator box ({a}, {b}) is degenerate")
        elif self.name == "oscillatory":
            float(p["k"])
        elif self.name == "constant":
            float(p["c"])
        else:
            raise ValueError(f"unknown family {self.name!r}")

    @classmethod
    def power(cls, beta, point=0.0):
        return cls("power", {"beta": float(beta), "point": tuple(np.atleast_1d(point).astype(float))})

    @classmethod
    def indicator(cls, *bounds):
        if len(bounds) == 2 and np.isscalar(bounds[0]):
            bounds = ((bounds[0], bounds[1]),)
        return cls("indicator", {"bounds": tuple((float(a), float(b)) for a, b in bounds)})

    @classmethod
    def oscillatory(cls, k):
        return cls("oscillatory", {"k": float(k)})

    @classmethod
    def constant(cls, c):
        return cls("constant", {"c": float(c)})

    @property
    def singular_points(self):
        if self.name == "power" and self.params["beta"] > 0:
            return [tuple(float(c) for c in np.atleast_1d(self.params.get("point", 0.0)))]
        return []

    def check_domain(self, domain):
        if self.name == "power" and not domain.contains(np.array(self.params["point"]), closed=True)[0]:
            raise ValueError("power family singular point must lie in the closure of the domain")

    def __call__(self, points):
        """Closed-form values at an ``(N, n)`` array of points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = pts.shape[1]
        p = self.params
        if self.name == "constant":
            return np.full(len(pts), p["c"])
        if self.name == "oscillatory":
            return np.sin(p["k"] * pts[:, 0])
        if self.name == "indicator":
            out = np.ones(len(pts))
            for axis, (a, b) in enumerate(p["bounds"]):
                x = pts[:, axis]
                out = out * np.where(x - a >= 0, 1.0, 0.0) * np.where(b - x >= 0, 1.0, 0.0)
            return out
        s = _point(p, n)
        if n == 1:
            return np.power(np.abs(pts[:, 0] - s[0]), -p["beta"])
        r2 = np.power(pts[:, 0] - s[0], 2.0) + np.power(pts[:, 1] - s[1], 2.0)
        return np.power(r2, -p["beta"] / 2)


def _point(params, n):
    s = tuple(params.get("point", (0.0,) * n))
    if len(s) == 1 and n == 2:
        s = s * 2
    if len(s) != n:
        raise ValueError("power family point has wrong dimension")
    return s


def family_to_ast(spec, dim=1):
    """An AST computing the family with the same arithmetic as its closed form."""
    p = spec.params
    names = variables_for(dim)
    if spec.name == "constant":
        return Num(p["c"])
    if spec.name == "oscillatory":
        return Call("sin", (BinOp("*", Num(p["k"]), Var(names[0])),))
    if spec.name == "indicator":
        if len(p["bounds"]) != dim:
            raise ValueError("indicator box has wrong dimension")
        node = Num(1.0)
        for name, (a, b) in zip(names, p["bounds"]):
            lower = Call("step", (BinOp("-", Var(name), Num(a)),))
            upper = Call("step", (BinOp("-", Num(b), Var(name)),))
            node = BinOp("*", BinOp("*", node, lower), upper)
        return node
    s = _point(p, dim)
    if dim == 1:
        dist = Call("abs", (BinOp("-", Var(names[0]), Num(s[0])),))
        return BinOp("^", dist, Num(-p["beta"]))
    r2 = BinOp(
        "+",
        BinOp("^", BinOp("-", Var(names[0]), Num(s[0])), Num(2.0)),
        BinOp("^", BinOp("-", Var(names[1]), Num(s[1])), Num(2.0)),
    )
    return BinOp("^", r2, Num(-p["beta"] / 2))
