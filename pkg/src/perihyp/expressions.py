"""Coefficient-expression language with forward-mode differentiation.

Grammar: real literals, declared variables, binary + - * / ^ (with ^ right
associative and binding tighter than unary minus), unary -, and the
functions sin, cos, exp, ln, tanh, abs.  Evaluation is numpy-vectorized;
partial derivatives come from dual numbers and are exact to roundoff.
"""

import math
import re
from dataclasses import dataclass

import numpy as np


class ExprError(ValueError):
    """Syntax or domain error in a coefficient expression."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


_FUNCTIONS = ("sin", "cos", "exp", "ln", "tanh", "abs")

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


@dataclass(frozen=True)
class Expr:
    """Parsed expression over a fixed tuple of variable names."""

    node: tuple
    variables: tuple

    def __call__(self, *args):
        return eval_expr(self, dict(zip(self.variables, args)))

    def __str__(self):
        return _pretty(self.node)


def tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            bad = len(src) - len(stripped)
            raise ExprError(f"unexpected character {src[bad]!r}", bad)
        if m.group("num") is not None:
            tokens.append(("num", float(m.group("num")), m.start("num")))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            op = m.group("op")
            tokens.append(("op", "^" if op == "**" else op, m.start("op")))
        pos = m.end()
    tokens.append(("end", None, len(src)))
    return tokens


class _Parser:
    """Recursive descent with precedence ^ > unary - > * / > + -."""

    def __init__(self, tokens, variables):
        self.tokens = tokens
        self.variables = variables
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ExprError(f"expected {op!r}", pos)

    def parse(self):
        node = self.sum()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ExprError("trailing input", pos)
        return node

    def sum(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                node = (val, node, rhs)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.unary()
                node = (val, node, rhs)
            else:
                return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.next()
            # right associative; exponent may carry its own unary minus
            exponent = self.unary_pow()
            return ("^", base, exponent)
        return base

    def unary_pow(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return ("neg", self.unary_pow())
        return self.power()

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return ("const", val)
        if kind == "name":
            if val in _FUNCTIONS:
                self.expect_op("(")
                arg = self.sum()
                self.expect_op(")")
                return (val, arg)
            if val not in self.variables:
                raise ExprError(f"undeclared variable {val!r}", pos)
            return ("var", val)
        if kind == "op" and val == "(":
            node = self.sum()
            self.expect_op(")")
            return node
        raise ExprError("expected a value", pos)


def parse_expr(src: str, variables) -> Expr:
    """Parse src over the declared variable names."""
    if not src or not src.strip():
        raise ExprError("empty expression", 0)
    variables = tuple(variables)
    parser = _Parser(tokenize(src), variables)
    return Expr(parser.parse(), variables)


class Dual:
    """Value plus a vector of first partials, numpy-broadcastable."""

    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = val
        self.grad = grad  # tuple of arrays/scalars, one per tracked variable


def _domain_check(ok, message, node):
    if not np.all(ok):
        raise ExprError(f"{message} in {_pretty(node)}")


def _eval(node, point, wrt):
    kind = node[0]
    if kind == "const":
        return Dual(node[1], tuple(0.0 for _ in wrt))
    if kind == "var":
        name = node[1]
        grad = tuple(1.0 if name == w else 0.0 for w in wrt)
        return Dual(point[name], grad)
    if kind == "neg":
        a = _eval(node[1], point, wrt)
        return Dual(-a.val, tuple(-g for g in a.grad))
    if kind in ("+", "-", "*", "/", "^"):
        a = _eval(node[1], point, wrt)
        b = _eval(node[2], point, wrt)
        if kind == "+":
            return Dual(a.val + b.val, tuple(ga + gb for ga, gb in zip(a.grad, b.grad)))
        if kind == "-":
            return Dual(a.val - b.val, tuple(ga - gb for ga, gb in zip(a.grad, b.grad)))
        if kind == "*":
            return Dual(
                a.val * b.val,
                tuple(ga * b.val + a.val * gb for ga, gb in zip(a.grad, b.grad)),
            )
        if kind == "/":
            _domain_check(b.val != 0, "division by zero", node)
            inv = 1.0 / b.val
            val = a.val * inv
            return Dual(val, tuple((ga - val * gb) * inv for ga, gb in zip(a.grad, b.grad)))
        # power
        if node[2][0] == "const" and float(node[2][1]).is_integer():
            n = float(node[2][1])
            val = a.val**n
            dval = n * a.val ** (n - 1) if n != 0 else np.zeros_like(np.asarray(a.val, float))
            return Dual(val, tuple(dval * ga for ga in a.grad))
        has_grad = any(np.any(np.asarray(g) != 0) for g in b.grad)
        if has_grad or np.any(np.asarray(a.val) < 0):
            _domain_check(a.val > 0, "power with non-positive base", node)
            val = a.val**b.val
            ln_a = np.log(a.val)
            return Dual(
                val,
                tuple(
                    val * (gb * ln_a + b.val * ga / a.val)
                    for ga, gb in zip(a.grad, b.grad)
                ),
            )
        val = a.val**b.val
        _domain_check(np.isfinite(val), "power out of domain", node)
        dval = np.where(a.val != 0, b.val * val / np.where(a.val != 0, a.val, 1.0), 0.0)
        return Dual(val, tuple(dval * ga for ga in a.grad))
    a = _eval(node[1], point, wrt)
    if kind == "sin":
        return Dual(np.sin(a.val), tuple(np.cos(a.val) * g for g in a.grad))
    if kind == "cos":
        return Dual(np.cos(a.val), tuple(-np.sin(a.val) * g for g in a.grad))
    if kind == "exp":
        val = np.exp(a.val)
        return Dual(val, tuple(val * g for g in a.grad))
    if kind == "ln":
        _domain_check(a.val > 0, "ln of non-positive value", node)
        return Dual(np.log(a.val), tuple(g / a.val for g in a.grad))
    if kind == "tanh":
        val = np.tanh(a.val)
        sech2 = 1.0 - val * val
        return Dual(val, tuple(sech2 * g for g in a.grad))
    if kind == "abs":
        return Dual(np.abs(a.val), tuple(np.sign(a.val) * g for g in a.grad))
    raise ExprError(f"unknown node {kind!r}")


def eval_expr(expr: Expr, point: dict):
    """Evaluate without derivatives; point binds every declared variable."""
    return _eval(expr.node, point, ()).val


def eval_partials(expr: Expr, point: dict, wrt=None):
    """Return (value, {name: partial}) for the requested variable subset."""
    if wrt is None:
        wrt = expr.variables
    missing = [v for v in expr.variables if v not in point]
    if missing:
        raise ExprError(f"unbound variables {missing}")
    wrt = tuple(wrt)
    dual = _eval(expr.node, point, wrt)
    shape = np.broadcast(*point.values()).shape if point else ()
    grads = {}
    for name, g in zip(wrt, dual.grad):
        grads[name] = np.broadcast_to(np.asarray(g, dtype=float), shape).copy() if shape else float(g)
    val = np.broadcast_to(np.asarray(dual.val, dtype=float), shape).copy() if shape else float(dual.val)
    return val, grads


def _pretty(node) -> str:
    kind = node[0]
    if kind == "const":
        return repr(node[1])
    if kind == "var":
        return node[1]
    if kind == "neg":
        return f"(-{_pretty(node[1])})"
    if kind in ("+", "-", "*", "/", "^"):
        return f"({_pretty(node[1])} {kind} {_pretty(node[2])})"
    return f"{kind}({_pretty(node[1])})"


def pretty_print(expr: Expr) -> str:
    return _pretty(expr.node)


def constant_expr(value: float, variables) -> Expr:
    return Expr(("const", float(value)), tuple(variables))
