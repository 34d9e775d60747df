"""Expression DSL: parsing, rendering, and evaluation.

Grammar (round-trippable: render(parse(t)) reparses to an equal AST):

    expr    := term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := unary ('^' factor)?
    unary   := '-' unary | atom
    atom    := NUMBER | 'w' | 'pi' | 'gamma' | 'e' | NAME '(' args ')'
             | '(' expr ')'

Special call forms: sum(i=1..inf, body), int(x=a..b, body[, singular=s]),
set(...), stream(...), dist(...), world(...), proc(...), plus library
functions (floor, ceil, sqrt, log, log2, sin, cos, arctan, numerosity,
proportion, value, average, ev, ev_quantile, mean, variance, shell,
normalized, spatial_average, survival, survival_at_omega).

Parse errors carry source positions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional

from .scalar import ExactScalar, scalar
from .core import (
    ScaleOverflow,
    SymbolicHyperreal,
    ceil_of,
    expfloor_of,
    floor_of,
    monomial,
    osc_atom,
    arctan_tail_atom,
)
from .value import Hyperreal, as_hyperreal, omega
from . import intsets
from . import streams as streams_mod
from . import distributions as dist_mod
from . import worlds as worlds_mod
from . import survival as surv_mod
from .series import (
    SeriesExpr,
    generator_term,
    geometric_term,
    indicator_term,
    lin_comb,
    poly_term,
    sum_to_infinity,
    hyperfinite_sum,
)
from .integrals import (
    Bound,
    FuncExpr,
    constant_integrand,
    cos_integrand,
    exp_integrand,
    integrate,
    lin_integrand,
    log_integrand,
    over_one_plus_x2,
    poly_integrand,
    power_integrand,
    sin_integrand,
)


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str):
        super().__init__("%s at position %d: %s" % (message, pos, text[max(0, pos - 10):pos + 10]))
        self.pos = pos


# --------------------------------------------------------------------------
# tokens


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<dots>\.\.)|(?P<op>[-+*/^(),={}\[\]:]))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    value: Any
    pos: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ParseError("unrecognized character %r" % text[pos], pos, text)
        if m.group("num") is not None:
            raw = m.group("num")
            val = Fraction(raw) if "." not in raw else Fraction(raw)
            out.append(Token("num", val, m.start("num")))
        elif m.group("name") is not None:
            out.append(Token("name", m.group("name"), m.start("name")))
        elif m.group("dots") is not None:
            out.append(Token("..", "..", m.start("dots")))
        else:
            out.append(Token(m.group("op"), m.group("op"), m.start("op")))
        pos = m.end()
    out.append(Token("end", None, len(text)))
    return out


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Word:
    name: str


@dataclass(frozen=True)
class Bin:
    op: str
    left: Any
    right: Any


@dataclass(frozen=True)
class Neg:
    arg: Any


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class Binding:
    var: str
    lo: Any
    hi: Any  # Word("inf") for the infinite bound


@dataclass(frozen=True)
class KeyVal:
    key: Any
    value: Any


@dataclass(frozen=True)
class Seq:
    items: tuple
    brace: str  # "{}" or "[]"


_SPECIAL_CALLS = {"sum", "int", "set", "stream", "dist", "world", "proc"}


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise ParseError("expected %r, found %r" % (kind, self.tok.value), self.tok.pos, self.text)
        return self.advance()

    # ---- grammar

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError("trailing input", self.tok.pos, self.text)
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind in ("*", "/"):
            op = self.advance().kind
            node = Bin(op, node, self.factor())
        return node

    def factor(self):
        node = self.unary()
        if self.tok.kind == "^":
            self.advance()
            node = Bin("^", node, self.factor())
        return node

    def unary(self):
        if self.tok.kind == "-":
            self.advance()
            return Neg(self.unary())
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(t.value)
        if t.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "name":
            self.advance()
            if self.tok.kind == "(":
                return self.call(t.value)
            return Word(t.value)
        raise ParseError("unexpected token %r" % (t.value,), t.pos, self.text)

    def call(self, name: str) -> Call:
        self.expect("(")
        args: list = []
        word_mode = name in _SPECIAL_CALLS
        while self.tok.kind != ")":
            args.append(self.argument(word_mode))
            if self.tok.kind == ",":
                self.advance()
            elif self.tok.kind != ")" and not word_mode:
                raise ParseError("expected ',' or ')'", self.tok.pos, self.text)
        self.expect(")")
        return Call(name, tuple(args))

    def argument(self, word_mode: bool):
        # name=... : binding (with ..) or keyword value
        if self.tok.kind == "name" and self.tokens[self.i + 1].kind == "=":
            var = self.advance().value
            self.advance()  # '='
            lo = self.value_item(word_mode)
            if self.tok.kind == "..":
                self.advance()
                hi = self.value_item(word_mode)
                return Binding(var, lo, hi)
            return KeyVal(Word(var), lo)
        return self.value_item(word_mode)

    def value_item(self, word_mode: bool):
        if self.tok.kind == "{":
            return self.braced("}")
        if self.tok.kind == "[":
            return self.braced("]")
        if word_mode and self.tok.kind == "name":
            nxt = self.tokens[self.i + 1]
            if nxt.kind == "(":
                name = self.advance().value
                return self.call(name)
            if nxt.kind not in ("^", "*", "/", "+", "-", ".."):
                return Word(self.advance().value)
        node = self.expr()
        if self.tok.kind == ":":
            self.advance()
            return KeyVal(node, self.expr())
        return node

    def braced(self, closer: str):
        opener = self.advance()
        items = []
        while self.tok.kind != closer:
            node = self.expr()
            if self.tok.kind == ":":
                self.advance()
                node = KeyVal(node, self.expr())
            items.append(node)
            if self.tok.kind == ",":
                self.advance()
        self.expect(closer)
        return Seq(tuple(items), "{}" if closer == "}" else "[]")


def parse(text: str):
    return Parser(text).parse()


# --------------------------------------------------------------------------
# AST rendering (round-trip surface)


def render_ast(node) -> str:
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Word):
        return node.name
    if isinstance(node, Neg):
        return "-%s" % _wrap(node.arg, 25)
    if isinstance(node, Bin):
        prec = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}[node.op]
        left = _wrap(node.left, prec if node.op != "^" else prec + 1)
        right = _wrap(node.right, prec + (1 if node.op in ("-", "/") else 0)
                      - (1 if node.op == "^" else 0))
        return "%s %s %s" % (left, node.op, right) if node.op in ("+", "-") else (
            "%s%s%s" % (left, node.op, right)
        )
    if isinstance(node, Call):
        return "%s(%s)" % (node.name, ", ".join(render_ast(a) for a in node.args))
    if isinstance(node, Binding):
        return "%s=%s..%s" % (node.var, render_ast(node.lo), render_ast(node.hi))
    if isinstance(node, KeyVal):
        return "%s:%s" % (render_ast(node.key), render_ast(node.value))
    if isinstance(node, Seq):
        inner = ", ".join(render_ast(x) for x in node.items)
        return "{%s}" % inner if node.brace == "{}" else "[%s]" % inner
    raise TypeError("not an AST node: %r" % (node,))


def _prec_of(node) -> int:
    if isinstance(node, Bin):
        return {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}[node.op]
    if isinstance(node, Neg):
        return 15
    return 100


def _wrap(node, minimum: int) -> str:
    text = render_ast(node)
    if _prec_of(node) < minimum:
        return "(%s)" % text
    return text


# --------------------------------------------------------------------------
# evaluation


class EvalError(ValueError):
    pass


def evaluate(node, env: dict | None = None):
    """Evaluate an AST to a domain object (Hyperreal, set, stream, ...)."""
    env = env or {}
    return _eval(node, env)


def _eval(node, env: dict):
    if isinstance(node, Num):
        return from_fraction(node.value)
    if isinstance(node, Word):
        name = node.name
        if name in env:
            return env[name]
        if name == "w":
            return omega()
        if name == "pi":
            return as_hyperreal(ExactScalar.pi())
        if name == "gamma":
            return as_hyperreal(ExactScalar.euler_gamma())
        if name == "e":
            return as_hyperreal(ExactScalar.e_const())
        raise EvalError("unknown identifier %r" % name)
    if isinstance(node, Neg):
        return -_eval(node.arg, env)
    if isinstance(node, Bin):
        return _eval_bin(node, env)
    if isinstance(node, Call):
        return _eval_call(node, env)
    raise EvalError("cannot evaluate %r here" % (node,))


def from_fraction(q: Fraction) -> Hyperreal:
    return as_hyperreal(q)


def _eval_bin(node: Bin, env: dict):
    if node.op == "^":
        return _power(_eval(node.left, env), node.right, env)
    a = _eval(node.left, env)
    b = _eval(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    raise AssertionError(node.op)


def _power(base: Hyperreal, exp_node, env: dict) -> Hyperreal:
    exp = _eval(exp_node, env)
    if not isinstance(exp, Hyperreal) or not isinstance(base, Hyperreal):
        raise EvalError("power needs numeric operands")
    # constant rational exponent
    if exp.symbolic is not None and exp.symbolic.is_constant():
        c = exp.symbolic.constant_value()
        if c.is_rational:
            return base.pow_rational(c.as_fraction())
    # rational base, hyperreal exponent: r^(a*w+b) or r^(affine - floor atom)
    if base.symbolic is not None and base.symbolic.is_constant():
        c = base.symbolic.constant_value()
        if c.is_rational and exp.symbolic is not None:
            r = c.as_fraction()
            if r > 0:
                got = _rational_power_hyper(r, exp.symbolic)
                if got is not None:
                    return got
    raise EvalError("unsupported power")


def _rational_power_hyper(r: Fraction, expo: SymbolicHyperreal) -> Hyperreal | None:
    from .core import _affine_of, UNIT

    atoms = expo.atom_terms
    if not atoms:
        try:
            a, b = _affine_of(expo)
        except ScaleOverflow:
            return None
        if r == 1:
            return as_hyperreal(1)
        if b.denominator != 1:
            return None
        coeff = scalar(r ** b.numerator)
        if a == 0:
            return as_hyperreal(coeff)
        return Hyperreal(
            symbolic=SymbolicHyperreal.from_term(coeff, monomial(ExactScalar.log(r) * scalar(a), 0, 0))
        )
    if len(atoms) == 1:
        t = atoms[0]
        if t.atom.kind == "floor" and t.monomial.is_unit and t.coeff == scalar(-1):
            rest = SymbolicHyperreal(dict(expo.terms))
            try:
                a, b = _affine_of(rest)
            except ScaleOverflow:
                return None
            if b.denominator != 1 or r <= 1:
                return None
            head = _rational_power_hyper(r, rest)
            if head is None:
                return None
            tailv = Hyperreal(symbolic=expfloor_of(r, t.atom.argument))
            return head * tailv
    return None


# ---- call evaluation


def _eval_call(node: Call, env: dict):
    name = node.name
    if name == "sum":
        return _eval_sum(node, env)
    if name == "int":
        return _eval_int(node, env)
    if name == "set":
        return _eval_set(node.args[0] if node.args else None)
    if name == "stream":
        return _eval_stream(node, env)
    if name == "dist":
        return _eval_dist(node, env)
    if name == "world":
        return _eval_world(node, env)
    if name == "proc":
        return _eval_proc(node, env)
    fn = _FUNCTIONS.get(name)
    if fn is None:
        raise EvalError("unknown function %r" % name)
    args = [_eval_domain(a, env) for a in node.args]
    return fn(*args)


def _eval_domain(node, env: dict):
    """Evaluate an argument that may be a sub-DSL object or an expression."""
    if isinstance(node, Call) and node.name in _SPECIAL_CALLS:
        return _eval_call(node, env)
    if isinstance(node, Seq):
        return node
    if isinstance(node, Word) and node.name in _SET_WORDS:
        return _eval_set(node)
    return _eval(node, env)


def _as_scalar(h) -> ExactScalar:
    if isinstance(h, Hyperreal):
        if h.symbolic is None or not h.symbolic.is_constant():
            raise EvalError("expected a finite constant")
        return h.symbolic.constant_value()
    if isinstance(h, ExactScalar):
        return h
    return scalar(h)


def _as_fraction(h) -> Fraction:
    return _as_scalar(h).as_fraction()


# ---- sum / int


def _eval_sum(node: Call, env: dict):
    if len(node.args) != 2 or not isinstance(node.args[0], Binding):
        raise EvalError("sum needs the form sum(i=a..inf, body)")
    binding, body = node.args
    lo = _as_fraction(_eval(binding.lo, env))
    if lo.denominator != 1:
        raise EvalError("sum lower bound must be an integer")
    series = series_from_ast(body, binding.var, env)
    if isinstance(binding.hi, Word) and binding.hi.name == "inf":
        return hyperfinite_sum(series, int(lo), omega())
    hi = _eval(binding.hi, env)
    return hyperfinite_sum(series, int(lo), hi)


def _eval_int(node: Call, env: dict):
    if not node.args or not isinstance(node.args[0], Binding):
        raise EvalError("int needs the form int(x=a..b, body[, singular=s])")
    binding = node.args[0]
    body = node.args[1] if len(node.args) > 1 else None
    singular = None
    for extra in node.args[2:]:
        if isinstance(extra, KeyVal) and isinstance(extra.key, Word) and extra.key.name == "singular":
            singular = _as_fraction(_eval(extra.value, env))
        else:
            raise EvalError("unsupported int(...) option")
    f = func_from_ast(body, binding.var, env)
    lo = _int_bound(binding.lo, env, singular, side=+1)
    hi = _int_bound(binding.hi, env, singular, side=-1)
    return integrate(f, lo, hi)


def _int_bound(node, env: dict, singular: Fraction | None, side: int) -> Bound:
    if isinstance(node, Word) and node.name == "inf":
        return Bound.plus_omega()
    if isinstance(node, Neg) and isinstance(node.arg, Word) and node.arg.name == "inf":
        return Bound.minus_omega()
    v = _eval(node, env)
    if isinstance(v, Hyperreal) and v.symbolic is not None and not v.symbolic.is_constant():
        from .core import _affine_of

        a, b = _affine_of(v.symbolic)
        return Bound.omega_affine(a, b)
    q = _as_fraction(v)
    if singular is not None and q == singular:
        return Bound.above_singular(q) if side > 0 else Bound.below_singular(q)
    return Bound.real(q)


# ---- series/function bodies from ASTs


def series_from_ast(node, var: str, env: dict) -> SeriesExpr:
    got = _series_translate(node, var, env)
    if got is not None:
        return got

    def fn(i: int) -> Fraction:
        local = dict(env)
        local[var] = as_hyperreal(i)
        v = _eval(node, local)
        return _as_fraction(v)

    return generator_term(fn, render_ast(node))


def _series_translate(node, var: str, env: dict) -> SeriesExpr | None:
    # polynomial / geometric shapes recognized structurally
    try:
        poly = _poly_in_var(node, var, env)
        if poly is not None:
            return poly_term(*poly)
    except EvalError:
        pass
    if isinstance(node, Bin) and node.op == "^":
        base = _try_const(node.left, env)
        if base is not None and _is_var_affine(node.right, var):
            a, b = _var_affine(node.right, var)
            r = base ** a.denominator if a.denominator == 1 else None
            if a.denominator == 1:
                ratio = base ** a.numerator
                return geometric_term(ratio, base ** b.numerator if b.denominator == 1 else Fraction(1))
    if isinstance(node, Bin) and node.op == "*":
        left = _series_translate(node.left, var, env)
        right = _series_translate(node.right, var, env)
        if left is not None and right is not None:
            merged = _series_product(left, right)
            if merged is not None:
                return merged
    if isinstance(node, Bin) and node.op in ("+", "-"):
        left = _series_translate(node.left, var, env)
        right = _series_translate(node.right, var, env)
        if left is not None and right is not None:
            w = 1 if node.op == "+" else -1
            return lin_comb((1, left), (w, right))
    if isinstance(node, Neg):
        inner = _series_translate(node.arg, var, env)
        if inner is not None:
            return lin_comb((-1, inner))
    if isinstance(node, Call) and node.name == "indicator":
        if len(node.args) == 2:
            x = _eval_set(node.args[0])
            inner = _series_translate(node.args[1], var, env)
            if inner is not None:
                return indicator_term(x, inner)
        if len(node.args) == 1:
            return indicator_term(_eval_set(node.args[0]))
    return None


def _series_product(a: SeriesExpr, b: SeriesExpr) -> SeriesExpr | None:
    def mul_poly(c1, c2):
        out = [Fraction(0)] * (len(c1) + len(c2) - 1)
        for i, x in enumerate(c1):
            for j, y in enumerate(c2):
                out[i + j] += x * y
        return tuple(out)

    if a.kind == "poly" and b.kind == "poly":
        return poly_term(*mul_poly(a.coeffs, b.coeffs))
    if a.kind == "poly" and b.kind == "geom":
        return SeriesExpr("geom", coeffs=mul_poly(a.coeffs, b.coeffs), ratio=b.ratio)
    if a.kind == "geom" and b.kind == "poly":
        return _series_product(b, a)
    if a.kind == "geom" and b.kind == "geom":
        return SeriesExpr("geom", coeffs=mul_poly(a.coeffs, b.coeffs), ratio=a.ratio * b.ratio)
    return None


def _poly_in_var(node, var: str, env: dict) -> tuple | None:
    if isinstance(node, Num):
        return (node.value,)
    if isinstance(node, Word):
        if node.name == var:
            return (Fraction(0), Fraction(1))
        c = _try_const(node, env)
        return None if c is None else (c,)
    if isinstance(node, Neg):
        inner = _poly_in_var(node.arg, var, env)
        return None if inner is None else tuple(-c for c in inner)
    if isinstance(node, Bin):
        if node.op in ("+", "-"):
            a = _poly_in_var(node.left, var, env)
            b = _poly_in_var(node.right, var, env)
            if a is None or b is None:
                return None
            n = max(len(a), len(b))
            a = a + (Fraction(0),) * (n - len(a))
            b = b + (Fraction(0),) * (n - len(b))
            s = 1 if node.op == "+" else -1
            return tuple(x + s * y for x, y in zip(a, b))
        if node.op == "*":
            a = _poly_in_var(node.left, var, env)
            b = _poly_in_var(node.right, var, env)
            if a is None or b is None:
                return None
            out = [Fraction(0)] * (len(a) + len(b) - 1)
            for i, x in enumerate(a):
                for j, y in enumerate(b):
                    out[i + j] += x * y
            return tuple(out)
        if node.op == "/":
            a = _poly_in_var(node.left, var, env)
            c = _try_const(node.right, env)
            if a is None or c in (None, 0):
                return None
            return tuple(x / c for x in a)
        if node.op == "^":
            a = _poly_in_var(node.left, var, env)
            c = _try_const(node.right, env)
            if a is None or c is None or c.denominator != 1 or c < 0:
                return None
            out = (Fraction(1),)
            base = a
            for _ in range(c.numerator):
                res = [Fraction(0)] * (len(out) + len(base) - 1)
                for i, x in enumerate(out):
                    for j, y in enumerate(base):
                        res[i + j] += x * y
                out = tuple(res)
            return out
    return None


def _try_const(node, env: dict) -> Fraction | None:
    try:
        v = _eval(node, env)
        return _as_fraction(v)
    except (EvalError, ScaleOverflow, Exception):
        return None


def _is_var_affine(node, var: str) -> bool:
    try:
        _var_affine(node, var)
        return True
    except EvalError:
        return False


def _var_affine(node, var: str) -> tuple[Fraction, Fraction]:
    poly = _poly_in_var(node, var, {})
    if poly is None or len(poly) > 2:
        raise EvalError("not affine in %s" % var)
    b = poly[0] if poly else Fraction(0)
    a = poly[1] if len(poly) > 1 else Fraction(0)
    return a, b


def func_from_ast(node, var: str, env: dict) -> FuncExpr:
    got = _func_translate(node, var, env)
    if got is not None:
        return got

    import math as _math

    def fn(x: float) -> float:
        return _float_eval(node, var, x, env)

    from .integrals import quad_integrand

    return quad_integrand(fn, render_ast(node))


def _func_translate(node, var: str, env: dict) -> FuncExpr | None:
    poly = _poly_in_var(node, var, env)
    if poly is not None:
        return poly_integrand(*poly)
    if isinstance(node, Bin):
        if node.op == "/":
            num = _poly_in_var(node.left, var, env)
            if num is not None:
                den = node.right
                # poly / (1 + x^2)
                dp = _poly_in_var(den, var, env)
                if dp == (Fraction(1), Fraction(0), Fraction(1)):
                    return over_one_plus_x2(*num)
                # c / (affine)^p and c / x
                got = _power_shape(den, var, env)
                if got is None:
                    try:
                        got = (_var_affine(den, var), Fraction(1))
                    except EvalError:
                        got = None
                if got is not None and len(num) == 1:
                    base, p = got
                    a, b = base
                    if a == 1:
                        return power_integrand(-p, shift=-b, orient=1, scale=num[0])
                    if a == -1:
                        return power_integrand(-p, shift=b, orient=-1, scale=num[0])
            left = _func_translate(node.left, var, env)
            c = _try_const(node.right, env)
            if left is not None and c not in (None, 0):
                return lin_integrand((Fraction(1) / c, left))
        if node.op == "*":
            c = _try_const(node.left, env)
            right = _func_translate(node.right, var, env)
            if c is not None and right is not None:
                return lin_integrand((c, right))
            c = _try_const(node.right, env)
            left = _func_translate(node.left, var, env)
            if c is not None and left is not None:
                return lin_integrand((c, left))
            pl = _poly_in_var(node.left, var, env)
            if pl is not None and right is not None:
                from .integrals import poly_times

                try:
                    return poly_times(pl, right)
                except Exception:
                    return None
        if node.op in ("+", "-"):
            left = _func_translate(node.left, var, env)
            right = _func_translate(node.right, var, env)
            if left is not None and right is not None:
                return lin_integrand((1, left), (1 if node.op == "+" else -1, right))
        if node.op == "^":
            got = _power_shape(node, var, env)
            if got is not None:
                (a, b), p = got
                if a == 1:
                    return power_integrand(p, shift=-b, orient=1)
                if a == -1:
                    return power_integrand(p, shift=b, orient=-1)
    if isinstance(node, Neg):
        inner = _func_translate(node.arg, var, env)
        if inner is not None:
            return lin_integrand((-1, inner))
    if isinstance(node, Call) and len(node.args) == 1:
        argvar = node.args[0]
        if isinstance(argvar, Word) and argvar.name == var:
            if node.name == "sin":
                return sin_integrand()
            if node.name == "cos":
                return cos_integrand()
            if node.name == "log":
                return log_integrand()
        if node.name == "exp":
            try:
                a, b = _var_affine(node.args[0], var)
            except EvalError:
                return None
            if b == 0:
                return exp_integrand(a)
    return None


def _power_shape(node, var: str, env: dict):
    """(affine base (a, b), exponent p) for base^p with affine base."""
    if isinstance(node, Call) and node.name == "sqrt" and len(node.args) == 1:
        try:
            return _var_affine(node.args[0], var), Fraction(1, 2)
        except EvalError:
            return None
    if not (isinstance(node, Bin) and node.op == "^"):
        return None
    p = _try_const(node.right, env)
    if p is None:
        # allow (expr)^(num/num) literal fractions
        try:
            pv = _eval(node.right, {})
            p = _as_fraction(pv)
        except Exception:
            return None
    try:
        a, b = _var_affine(node.left, var)
    except EvalError:
        return None
    if a not in (1, -1):
        return None
    return (a, b), p


def _float_eval(node, var: str, x: float, env: dict) -> float:
    import math as _m

    if isinstance(node, Num):
        return float(node.value)
    if isinstance(node, Word):
        if node.name == var:
            return x
        v = _eval(node, env)
        return float(_as_scalar(v))
    if isinstance(node, Neg):
        return -_float_eval(node.arg, var, x, env)
    if isinstance(node, Bin):
        a = _float_eval(node.left, var, x, env)
        b = _float_eval(node.right, var, x, env)
        return {"+": a + b, "-": a - b, "*": a * b, "/": a / b if b else _m.inf,
                "^": a ** b}[node.op]
    if isinstance(node, Call) and len(node.args) == 1:
        v = _float_eval(node.args[0], var, x, env)
        table = {"sin": _m.sin, "cos": _m.cos, "log": _m.log, "exp": _m.exp,
                 "sqrt": _m.sqrt, "arctan": _m.atan, "floor": _m.floor,
                 "ceil": _m.ceil}
        if node.name in table:
            return table[node.name](v)
    raise EvalError("cannot evaluate %r numerically" % (node,))


# ---- sub-DSLs


_SET_WORDS = {"evens", "odds", "squares", "positives", "integers", "empty"}


def _eval_set(node) -> intsets.IntegerSetExpr:
    if node is None:
        raise EvalError("set(...) needs an argument")
    if isinstance(node, Word):
        w = node.name
        if w == "evens":
            return intsets.evens()
        if w == "odds":
            return intsets.odds()
        if w == "squares":
            return intsets.squares()
        if w == "positives":
            return intsets.positives()
        if w == "integers":
            return intsets.all_integers()
        if w == "empty":
            return intsets.empty_set()
        raise EvalError("unknown set %r" % w)
    if isinstance(node, Call):
        name, args = node.name, node.args
        if name == "ap" and len(args) == 2:
            return intsets.arithmetic(int(_lit(args[0])), int(_lit(args[1])))
        if name == "powers" and len(args) == 1:
            return intsets.power_image(int(_lit(args[0])))
        if name == "geometric":
            base = int(_lit(args[0]))
            start = int(_lit(args[1])) if len(args) > 1 else 1
            return intsets.geometric_image(base, start)
        if name == "finite":
            items = args[0].items if isinstance(args[0], Seq) else args
            return intsets.finite_set(int(_lit(a)) for a in items)
        if name == "union":
            return intsets.union(_eval_set(args[0]), _eval_set(args[1]))
        if name in ("inter", "intersect"):
            return intsets.intersect(_eval_set(args[0]), _eval_set(args[1]))
        if name == "diff":
            return intsets.difference(_eval_set(args[0]), _eval_set(args[1]))
        if name == "complement":
            return intsets.complement(_eval_set(args[0]))
        if name == "set":
            return _eval_set(args[0])
    raise EvalError("bad set expression %r" % (node,))


def _lit(node) -> Fraction:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg) and isinstance(node.arg, Num):
        return -node.arg.value
    if isinstance(node, Bin) and node.op == "/":
        return _lit(node.left) / _lit(node.right)
    raise EvalError("expected a literal, found %r" % (node,))


def _eval_stream(node: Call, env: dict) -> streams_mod.UtilityStream:
    args = node.args
    if not args:
        raise EvalError("stream(...) needs a form")
    head = args[0]
    if isinstance(head, Word):
        w = head.name
        if w == "const":
            return streams_mod.constant_stream(_lit(args[1]))
        if w == "geom":
            return streams_mod.geometric_stream(_lit(args[1]), _lit(args[2]))
        if w == "poly":
            return streams_mod.arithmetic_stream(*(_lit(a) for a in args[1:]))
        if w == "indicator":
            return streams_mod.indicator_stream(_eval_set(args[1]))
        if w == "overlay":
            base = _eval_stream_arg(args[1], env)
            changes = {}
            if isinstance(args[2], Seq):
                for kv in args[2].items:
                    changes[int(_lit(kv.key))] = _lit(kv.value)
            return base.with_overlay(changes)
        if w == "delay":
            base = _eval_stream_arg(args[1], env)
            k = int(_lit(args[2])) if len(args) > 2 else 1
            return base.delayed(k)
        if w == "scale":
            return streams_mod.scale_stream(_eval_stream_arg(args[1], env), _lit(args[2]))
        if w == "addconst":
            return streams_mod.add_constant(_eval_stream_arg(args[1], env), _lit(args[2]))
        if w == "dyson":
            return streams_mod.dyson_stream(int(_lit(args[1])) if len(args) > 1 else 1)
    raise EvalError("bad stream form %r" % (head,))


def _eval_stream_arg(node, env: dict):
    if isinstance(node, Call) and node.name == "stream":
        return _eval_stream(node, env)
    got = _eval_domain(node, env)
    if isinstance(got, streams_mod.UtilityStream):
        return got
    raise EvalError("expected a stream")


def _eval_dist(node: Call, env: dict) -> dist_mod.DiscreteDistribution:
    args = node.args
    head = args[0] if args else None
    if isinstance(head, Word):
        if head.name == "stpetersburg":
            return dist_mod.st_petersburg()
        if head.name == "cauchy":
            return "cauchy"  # handled by mean/variance wrappers
        if head.name == "powerlevels":
            return dist_mod.power_level_distribution(_lit(args[1]))
        if head.name == "table":
            table = {}
            rest = args[1:]
            if len(rest) == 1 and isinstance(rest[0], Seq):
                rest = rest[0].items
            for kv in rest:
                if not isinstance(kv, KeyVal):
                    raise EvalError("dist(table u:p, ...) expects utility:probability pairs")
                table[int(_lit(kv.key))] = _lit(kv.value)
            return dist_mod.table_distribution(table)
    raise EvalError("bad dist form %r" % (head,))


def _eval_world(node: Call, env: dict) -> worlds_mod.SpatialDensity:
    args = node.args
    if not args or not isinstance(args[0], Word):
        raise EvalError("world(cube|sphere, rho=..., deltas=[r:c, ...])")
    geometry = args[0].name
    rho = constant_integrand(0)
    deltas = []
    for a in args[1:]:
        if isinstance(a, KeyVal) and isinstance(a.key, Word):
            if a.key.name == "rho":
                if isinstance(a.value, Num):
                    rho = constant_integrand(a.value.value)
                else:
                    rho = func_from_ast(a.value, "r", env)
            elif a.key.name == "deltas":
                for kv in a.value.items:
                    deltas.append((_lit(kv.key), _lit(kv.value)))
            else:
                raise EvalError("unknown world option %r" % a.key.name)
    return worlds_mod.SpatialDensity(geometry, rho, tuple((Fraction(r), scalar(c)) for r, c in deltas))


def _eval_proc(node: Call, env: dict) -> surv_mod.HazardProcess:
    args = node.args
    if not args or not isinstance(args[0], Word):
        raise EvalError("proc(flips|decay|harmonic key=value ...)")
    kind = args[0].name
    opts = {"base": Fraction(2), "rate": Fraction(1), "start": Fraction(0)}
    for a in args[1:]:
        if isinstance(a, KeyVal) and isinstance(a.key, Word) and a.key.name in opts:
            opts[a.key.name] = _lit(a.value)
        else:
            raise EvalError("bad proc option %r" % (a,))
    if kind == "flips":
        return surv_mod.flips(opts["base"], opts["rate"], opts["start"])
    if kind == "decay":
        return surv_mod.decay(opts["rate"], opts["start"])
    if kind == "harmonic":
        return surv_mod.harmonic(opts["rate"], opts["start"])
    raise EvalError("unknown process kind %r" % kind)


# ---- function table


def _fn_floor(h: Hyperreal) -> Hyperreal:
    if h.symbolic is None:
        raise EvalError("floor needs a symbolic argument")
    return Hyperreal(symbolic=floor_of(h.symbolic))


def _fn_ceil(h: Hyperreal) -> Hyperreal:
    if h.symbolic is None:
        raise EvalError("ceil needs a symbolic argument")
    return Hyperreal(symbolic=ceil_of(h.symbolic))


def _fn_sqrt(h: Hyperreal) -> Hyperreal:
    return h.pow_rational(Fraction(1, 2))


def _fn_log(h: Hyperreal):
    if not isinstance(h, Hyperreal) or h.symbolic is None:
        raise EvalError("log needs a symbolic argument")
    sym = h.symbolic
    if sym.is_constant():
        c = sym.constant_value()
        if c.is_rational:
            return as_hyperreal(ExactScalar.log(c.as_fraction()))
        raise EvalError("log of a non-rational constant")
    if sym.atom_terms or len(sym.terms) != 1:
        raise EvalError("log outside the scale")
    ((mono, coeff),) = sym.terms.items()
    if not mono.exp_rate.is_zero or not mono.log_power.is_zero:
        raise EvalError("log outside the scale")
    p = mono.power
    out = SymbolicHyperreal.from_term(p, monomial(0, 0, 1))
    if coeff.is_rational and coeff.as_fraction() > 0:
        if coeff.as_fraction() != 1:
            out = out + SymbolicHyperreal.real(ExactScalar.log(coeff.as_fraction()))
        return Hyperreal(symbolic=out)
    raise EvalError("log of a non-rational coefficient")


def _fn_log2(h: Hyperreal):
    base = _fn_log(h)
    return base * as_hyperreal(ExactScalar.log(2).reciprocal())


def _fn_trig(name):
    def fn(h: Hyperreal):
        if h.symbolic is None:
            raise EvalError("%s needs a symbolic argument" % name)
        from .core import _affine_of

        a, b = _affine_of(h.symbolic)
        if a == 0:
            raise EvalError("%s of a constant is outside the exact fragment" % name)
        return Hyperreal(symbolic=osc_atom(name, a, b))

    return fn


def _fn_arctan(h: Hyperreal):
    if h.symbolic is None:
        raise EvalError("arctan needs a symbolic argument")
    from .core import _affine_of

    a, b = _affine_of(h.symbolic)
    if a > 0:
        return Hyperreal(symbolic=arctan_tail_atom(a, b))
    if a < 0:
        return -Hyperreal(symbolic=arctan_tail_atom(-a, -b))
    raise EvalError("arctan of a constant is outside the exact fragment")


def _fn_mean(d):
    if d == "cauchy":
        return dist_mod.moments_of_cauchy()[0]
    return dist_mod.expected_value_by_levels(d)


def _fn_variance(d):
    if d == "cauchy":
        return dist_mod.moments_of_cauchy()[1]
    raise EvalError("variance implemented for dist(cauchy)")


_FUNCTIONS = {
    "floor": _fn_floor,
    "ceil": _fn_ceil,
    "sqrt": _fn_sqrt,
    "log": _fn_log,
    "log2": _fn_log2,
    "sin": _fn_trig("sin"),
    "cos": _fn_trig("cos"),
    "arctan": _fn_arctan,
    "numerosity": intsets.numerosity,
    "proportion": intsets.proportion,
    "value": streams_mod.value_of,
    "average": streams_mod.average_of,
    "ev": lambda d: dist_mod.expected_value_by_levels(d),
    "ev_quantile": lambda d: dist_mod.expected_value_by_quantile(d),
    "mean": _fn_mean,
    "variance": _fn_variance,
    "shell": worlds_mod.shell_integral_value,
    "normalized": worlds_mod.normalized_value,
    "spatial_average": worlds_mod.spatial_average,
    "survival": lambda p, t: as_hyperreal(surv_mod.survival_function(p, _as_fraction(t))),
    "survival_at_omega": surv_mod.survival_at_omega,
}


def load_definitions(text: str) -> dict:
    """Line-oriented definition files: `name = <DSL expression>` per line,
    '#' comments."""
    env: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("definition line needs 'name = expr'", 0, raw)
        name, body = line.split("=", 1)
        name = name.strip()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise ParseError("bad definition name %r" % name, 0, raw)
        env[name] = evaluate(parse(body.strip()), env)
    return env
