"""Hyperdefinite integrals via a transferred fundamental theorem of calculus.

Integrands form a small term tree (powers with shifts, logs, exponentials,
sin/cos, rational pieces over 1+x^2, products with polynomials, linear
combinations, and a numeric fallback).  Each shape has a tabled
antiderivative that differentiates back to it under a finite rule table;
integrals evaluate antiderivatives at hyperreal bounds with exact
expansions (log(1/w) = -log(w), arctan at w as a tail atom below pi/2,
sin/cos at infinite bounds as strict oscillation atoms).

Improper integrals use the canonical bound w; singular endpoints use
s +/- 1/w.  When a bound evaluation leaves the growth scale, the integral
falls back to an adaptive-quadrature sequence (double precision,
quarantined from certificates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .scalar import ExactScalar, UnsupportedScalar, scalar
from .core import (
    ScaleOverflow,
    SymbolicHyperreal,
    arctan_tail_atom,
    monomial,
    osc_atom,
)
from .value import Hyperreal, PeriodicForm, RationalForm, omega

SYM_ZERO = SymbolicHyperreal.zero()


class NotExact(ArithmeticError):
    """Bound evaluation left the exact fragment; quadrature fallback applies."""


class NonIntegrable(ValueError):
    """A singularity sits inside the integration interval (or at an
    undeclared endpoint)."""


# --------------------------------------------------------------------------
# integrand terms


@dataclass(frozen=True)
class FuncExpr:
    """Integrand node.  kinds: poly | power | log | xlog | exp | polyexp |
    sin | cos | poly1px2 | arctan | log1px2 | lin | quad."""

    kind: str
    coeffs: tuple = ()  # polynomial coefficients, exact Fractions
    p: Fraction | None = None  # power exponent
    shift: Fraction = Fraction(0)  # (x - shift) or (shift - x)
    orient: int = 1  # +1: (x - shift); -1: (shift - x)
    c: Fraction | None = None  # exponential rate
    scale: ExactScalar = ExactScalar.rational(1)
    parts: tuple = ()
    fn: Callable[[float], float] | None = None
    label: str = ""

    # ---- pointwise evaluation (for quadrature and audits)

    def value_at(self, x: float) -> float:
        k = self.kind
        s = float(self.scale)
        if k == "poly":
            return _poly_float(self.coeffs, x)
        if k == "power":
            base = (x - float(self.shift)) * self.orient
            return s * base ** float(self.p)
        if k == "log":
            base = (x - float(self.shift)) * self.orient
            return s * math.log(base)
        if k == "xlog":
            base = (x - float(self.shift)) * self.orient
            return s * base * math.log(base)
        if k == "exp":
            return s * math.exp(float(self.c) * x)
        if k == "polyexp":
            return _poly_float(self.coeffs, x) * math.exp(float(self.c) * x)
        if k == "sin":
            return s * math.sin(x)
        if k == "cos":
            return s * math.cos(x)
        if k == "poly1px2":
            return _poly_float(self.coeffs, x) / (1.0 + x * x)
        if k == "arctan":
            return s * math.atan(x)
        if k == "log1px2":
            return s * math.log(1.0 + x * x)
        if k == "lin":
            return sum(float(w) * part.value_at(x) for w, part in self.parts)
        if k == "quad":
            return self.fn(x)
        raise AssertionError(k)

    def parity(self) -> str:
        """"even", "odd", or "none" about x = 0."""
        k = self.kind
        if k == "poly":
            return _poly_parity(self.coeffs)
        if k == "poly1px2":
            return _poly_parity(self.coeffs)
        if k == "sin":
            return "odd"
        if k == "cos":
            return "even"
        if k == "arctan":
            return "odd"
        if k == "log1px2":
            return "even"
        if k == "power" and self.shift == 0 and self.p is not None and self.p.denominator == 1:
            return "even" if self.p.numerator % 2 == 0 else "odd"
        if k == "lin":
            ps = {part.parity() for _, part in self.parts}
            return ps.pop() if len(ps) == 1 else "none"
        return "none"


def _poly_float(coeffs: tuple, x: float) -> float:
    total = 0.0
    for c in reversed(coeffs):
        total = total * x + float(c)
    return total


def _poly_parity(coeffs: tuple) -> str:
    evens = all(c == 0 for j, c in enumerate(coeffs) if j % 2 == 1)
    odds = all(c == 0 for j, c in enumerate(coeffs) if j % 2 == 0)
    if evens and odds:
        return "even"
    if evens:
        return "even"
    if odds:
        return "odd"
    return "none"


# ---- constructors


def poly_integrand(*coeffs) -> FuncExpr:
    return FuncExpr("poly", coeffs=tuple(Fraction(c) for c in coeffs))


def constant_integrand(c) -> FuncExpr:
    return poly_integrand(c)


def power_integrand(p, shift=0, orient=1, scale=1) -> FuncExpr:
    return FuncExpr(
        "power", p=Fraction(p), shift=Fraction(shift), orient=orient, scale=scalar(scale)
    )


def log_integrand(shift=0, orient=1, scale=1) -> FuncExpr:
    return FuncExpr("log", shift=Fraction(shift), orient=orient, scale=scalar(scale))


def exp_integrand(c, scale=1) -> FuncExpr:
    return FuncExpr("exp", c=Fraction(c), scale=scalar(scale))


def sin_integrand(scale=1) -> FuncExpr:
    return FuncExpr("sin", scale=scalar(scale))


def cos_integrand(scale=1) -> FuncExpr:
    return FuncExpr("cos", scale=scalar(scale))


def over_one_plus_x2(*poly_coeffs) -> FuncExpr:
    """poly(x) / (1 + x^2)."""
    return FuncExpr("poly1px2", coeffs=tuple(Fraction(c) for c in poly_coeffs))


def lin_integrand(*parts) -> FuncExpr:
    return FuncExpr("lin", parts=tuple((scalar(w), p) for w, p in parts))


def quad_integrand(fn, label="numeric") -> FuncExpr:
    return FuncExpr("quad", fn=fn, label=label)


def scale_integrand(w, f: FuncExpr) -> FuncExpr:
    return lin_integrand((w, f))


def poly_times(poly_coeffs: tuple, f: FuncExpr) -> FuncExpr:
    """poly(x) * f(x) for the product shapes the table knows."""
    coeffs = tuple(Fraction(c) for c in poly_coeffs)
    if f.kind == "poly":
        return poly_integrand(*_poly_mul(coeffs, f.coeffs))
    if f.kind == "exp":
        if not f.scale.is_rational:
            raise NotExact("polynomial times exponential with symbolic scale")
        s = f.scale.as_fraction()
        return FuncExpr("polyexp", coeffs=tuple(s * q for q in coeffs), c=f.c)
    if f.kind == "polyexp":
        return FuncExpr("polyexp", coeffs=_poly_mul(coeffs, f.coeffs), c=f.c)
    if f.kind == "poly1px2":
        return over_one_plus_x2(*_poly_mul(coeffs, f.coeffs))
    if f.kind == "lin":
        return lin_integrand(*((w, poly_times(coeffs, p)) for w, p in f.parts))
    raise NotExact("unsupported product shape: poly * %s" % f.kind)


def _poly_mul(a: tuple, b: tuple) -> tuple:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


# --------------------------------------------------------------------------
# the antiderivative table and its derivative audit


def antiderivative(f: FuncExpr) -> FuncExpr:
    k = f.kind
    if k == "poly":
        return poly_integrand(0, *(c / (j + 1) for j, c in enumerate(f.coeffs)))
    if k == "power":
        if f.p == -1:
            return FuncExpr("log", shift=f.shift, orient=f.orient,
                            scale=f.scale * f.orient)
        q = f.p + 1
        return FuncExpr("power", p=q, shift=f.shift, orient=f.orient,
                        scale=f.scale * f.orient / scalar(q))
    if k == "log":
        # d/dx [o*(x-s)log(o(x-s)) - x] = log(o(x-s))   (o = orient)
        return lin_integrand(
            (f.scale * f.orient, FuncExpr("xlog", shift=f.shift, orient=f.orient)),
            (-f.scale, poly_integrand(0, 1)),
        )
    if k == "exp":
        return FuncExpr("exp", c=f.c, scale=f.scale / scalar(f.c))
    if k == "polyexp":
        # e^{cx} * Q(x) with Q = sum_k (-1)^k poly^(k) / c^(k+1)
        q = [Fraction(0)] * len(f.coeffs)
        deriv = list(f.coeffs)
        sign = 1
        power = Fraction(f.c)
        while any(deriv):
            for j, v in enumerate(deriv):
                q[j] += sign * v / power
            deriv = [deriv[j] * j for j in range(1, len(deriv))]
            sign = -sign
            power *= f.c
        return FuncExpr("polyexp", coeffs=tuple(q), c=f.c)
    if k == "sin":
        return FuncExpr("cos", scale=-f.scale)
    if k == "cos":
        return FuncExpr("sin", scale=f.scale)
    if k == "poly1px2":
        quot, a, b = _divide_by_1px2(f.coeffs)
        parts = []
        if any(quot):
            parts.append((scalar(1), antiderivative(poly_integrand(*quot))))
        if a:
            parts.append((scalar(a), FuncExpr("arctan")))
        if b:
            parts.append((scalar(b) / 2, FuncExpr("log1px2")))
        return lin_integrand(*parts) if parts else poly_integrand(0)
    if k == "lin":
        return lin_integrand(*((w, antiderivative(p)) for w, p in f.parts))
    raise NotExact("no tabled antiderivative for %s" % k)


def _divide_by_1px2(coeffs: tuple) -> tuple[tuple, Fraction, Fraction]:
    """poly = quot*(1+x^2) + (a + b*x); returns (quot, a, b)."""
    n = len(coeffs)
    quot = [Fraction(0)] * max(0, n - 2)
    work = list(coeffs)
    for j in range(len(work) - 1, 1, -1):
        c = work[j]
        if c:
            quot[j - 2] += c
            work[j] -= c
            work[j - 2] -= c
    a = work[0] if work else Fraction(0)
    b = work[1] if len(work) > 1 else Fraction(0)
    return tuple(quot), a, b


def differentiate(f: FuncExpr) -> FuncExpr:
    """Symbolic derivative over the node set (used to audit the table)."""
    k = f.kind
    if k == "poly":
        return poly_integrand(*(f.coeffs[j] * j for j in range(1, len(f.coeffs)))) \
            if len(f.coeffs) > 1 else poly_integrand(0)
    if k == "power":
        return FuncExpr("power", p=f.p - 1, shift=f.shift, orient=f.orient,
                        scale=f.scale * f.p * f.orient)
    if k == "log":
        return FuncExpr("power", p=Fraction(-1), shift=f.shift, orient=f.orient,
                        scale=f.scale * f.orient)
    if k == "xlog":
        # d/dx (o(x-s))log(o(x-s)) = o*log(o(x-s)) + o
        return lin_integrand(
            (f.scale * f.orient, FuncExpr("log", shift=f.shift, orient=f.orient)),
            (f.scale * f.orient, poly_integrand(1)),
        )
    if k == "exp":
        return FuncExpr("exp", c=f.c, scale=f.scale * scalar(f.c))
    if k == "polyexp":
        dpoly = tuple(f.coeffs[j] * j for j in range(1, len(f.coeffs)))
        merged = list(dpoly) + [Fraction(0)] * (len(f.coeffs) - len(dpoly))
        for j, v in enumerate(f.coeffs):
            merged[j] += f.c * v
        return FuncExpr("polyexp", coeffs=tuple(merged), c=f.c)
    if k == "sin":
        return FuncExpr("cos", scale=f.scale)
    if k == "cos":
        return FuncExpr("sin", scale=-f.scale)
    if k == "arctan":
        return FuncExpr("poly1px2", coeffs=(f.scale.as_fraction(),))
    if k == "log1px2":
        return FuncExpr("poly1px2", coeffs=(Fraction(0), 2 * f.scale.as_fraction()))
    if k == "lin":
        return lin_integrand(*((w, differentiate(p)) for w, p in f.parts))
    raise NotExact("no derivative rule for %s" % k)


# --------------------------------------------------------------------------
# bounds


@dataclass(frozen=True)
class Bound:
    """Integration endpoint.  kinds: real | infinite (u*w + v, u != 0) |
    singular (s -/+ 1/w, approaching the singular point s from side)."""

    kind: str
    value: Fraction = Fraction(0)  # real endpoint, or singular point s
    u: Fraction = Fraction(0)  # infinite: u*w + v
    v: Fraction = Fraction(0)
    side: int = 0  # singular: +1 means s + 1/w, -1 means s - 1/w

    @staticmethod
    def real(q) -> "Bound":
        return Bound("real", value=Fraction(q))

    @staticmethod
    def plus_omega() -> "Bound":
        return Bound("infinite", u=Fraction(1))

    @staticmethod
    def minus_omega() -> "Bound":
        return Bound("infinite", u=Fraction(-1))

    @staticmethod
    def omega_affine(u, v=0) -> "Bound":
        u = Fraction(u)
        if u == 0:
            return Bound.real(v)
        return Bound("infinite", u=u, v=Fraction(v))

    @staticmethod
    def above_singular(s) -> "Bound":
        return Bound("singular", value=Fraction(s), side=+1)

    @staticmethod
    def below_singular(s) -> "Bound":
        return Bound("singular", value=Fraction(s), side=-1)

    def element(self, n: int) -> Fraction:
        if self.kind == "real":
            return self.value
        if self.kind == "infinite":
            return self.u * n + self.v
        return self.value + Fraction(self.side, n)


# ---- antiderivative evaluation at bounds


def eval_bound(f: FuncExpr, b: Bound) -> SymbolicHyperreal:
    """Exact value of the antiderivative node at the bound; raises NotExact
    when the result leaves the growth scale."""
    k = f.kind
    if k == "lin":
        out = SYM_ZERO
        for w, part in f.parts:
            out = out + SymbolicHyperreal.real(w) * eval_bound(part, b)
        return out
    if k == "poly":
        x = _bound_sym(b)
        out = SYM_ZERO
        for j, c in enumerate(f.coeffs):
            if c:
                out = out + SymbolicHyperreal.real(scalar(c)) * x.pow_rational(j)
        return out
    if k == "power":
        arg, knd = _shift_arg(f, b)
        p = f.p
        if knd == "zero":
            if p > 0:
                return SYM_ZERO
            raise NonIntegrable("power bound lands on its singularity")
        if knd in ("exact",):
            try:
                return SymbolicHyperreal.real(f.scale) * arg.pow_rational(p)
            except (ScaleOverflow, UnsupportedScalar):
                raise NotExact("power at bound not exact")
        raise NotExact("power at bound not exact")
    if k == "log":
        return SymbolicHyperreal.real(f.scale) * _log_of(f, b)
    if k == "xlog":
        arg, knd = _shift_arg(f, b)
        if knd != "exact":
            raise NotExact("xlog bound")
        return SymbolicHyperreal.real(f.scale) * arg * _log_of(f, b)
    if k == "exp":
        return SymbolicHyperreal.real(f.scale) * _exp_at(f.c, b)
    if k == "polyexp":
        e = _exp_at(f.c, b)
        x = _bound_sym(b)
        out = SYM_ZERO
        for j, c in enumerate(f.coeffs):
            if c:
                out = out + SymbolicHyperreal.real(scalar(c)) * x.pow_rational(j) * e
        return out
    if k in ("sin", "cos"):
        if b.kind == "real":
            if b.value == 0:
                base = SYM_ZERO if k == "sin" else SymbolicHyperreal.real(1)
                return SymbolicHyperreal.real(f.scale) * base
            raise NotExact("%s at nonzero real bound" % k)
        if b.kind == "infinite":
            return SymbolicHyperreal.real(f.scale) * osc_atom(k, b.u, b.v)
        raise NotExact("%s near a singularity" % k)
    if k == "arctan":
        return SymbolicHyperreal.real(f.scale) * _arctan_at(b)
    if k == "log1px2":
        if b.kind == "real":
            q = 1 + b.value ** 2
            return SymbolicHyperreal.real(f.scale * ExactScalar.log(q))
        raise NotExact("log(1+x^2) at infinite bound")
    raise NotExact("no bound rule for %s" % k)


def _bound_sym(b: Bound) -> SymbolicHyperreal:
    if b.kind == "real":
        return SymbolicHyperreal.real(scalar(b.value))
    if b.kind == "infinite":
        return SymbolicHyperreal.omega() * scalar(b.u) + scalar(b.v)
    inv = SymbolicHyperreal.from_term(scalar(b.side), monomial(0, -1, 0))
    return SymbolicHyperreal.real(scalar(b.value)) + inv


def _shift_arg(f: FuncExpr, b: Bound) -> tuple[SymbolicHyperreal, str]:
    """(x - shift) or (shift - x) at the bound, tagged exact/zero."""
    x = _bound_sym(b)
    arg = (x - scalar(f.shift)) * f.orient
    if arg.is_zero:
        return arg, "zero"
    return arg, "exact"


def _log_of(f: FuncExpr, b: Bound) -> SymbolicHyperreal:
    arg, knd = _shift_arg(f, b)
    if knd == "zero":
        raise NonIntegrable("log bound lands on its singularity")
    if b.kind == "real":
        q = (b.value - f.shift) * f.orient
        if q <= 0:
            raise NonIntegrable("log of a nonpositive argument")
        return SymbolicHyperreal.real(ExactScalar.log(q))
    if b.kind == "infinite":
        u = b.u * f.orient
        v = (b.v - f.shift) * f.orient
        if u <= 0:
            raise NonIntegrable("log argument negative at the infinite bound")
        if v != 0:
            raise NotExact("log of a shifted infinite bound")
        out = SymbolicHyperreal.from_term(1, monomial(0, 0, 1))
        if u != 1:
            out = out + SymbolicHyperreal.real(ExactScalar.log(u))
        return out
    # singular offset: log((s ± 1/w - shift) * orient)
    if b.value == f.shift and b.side * f.orient > 0:
        return -SymbolicHyperreal.from_term(1, monomial(0, 0, 1))
    q = (b.value - f.shift) * f.orient
    if q > 0:
        raise NotExact("log near a foreign singularity")
    raise NonIntegrable("log of a nonpositive argument")


def _exp_at(c: Fraction, b: Bound) -> SymbolicHyperreal:
    if b.kind == "real":
        return SymbolicHyperreal.real(ExactScalar.e_power(c * b.value))
    if b.kind == "infinite":
        coeff = ExactScalar.e_power(c * b.v) if b.v else scalar(1)
        return SymbolicHyperreal.from_term(coeff, monomial(scalar(c * b.u), 0, 0))
    raise NotExact("exponential at a singular offset")


def _arctan_at(b: Bound) -> SymbolicHyperreal:
    if b.kind == "real":
        table = {
            Fraction(0): SYM_ZERO,
            Fraction(1): SymbolicHyperreal.real(ExactScalar.pi() / 4),
            Fraction(-1): SymbolicHyperreal.real(-(ExactScalar.pi() / 4)),
        }
        got = table.get(b.value)
        if got is None:
            raise NotExact("arctan at a general real bound")
        return got
    if b.kind == "infinite":
        if b.u > 0:
            return arctan_tail_atom(b.u, b.v)
        return -arctan_tail_atom(-b.u, -b.v)
    raise NotExact("arctan at a singular offset")


# --------------------------------------------------------------------------
# singularity bookkeeping


def _singularities(f: FuncExpr) -> set[Fraction]:
    k = f.kind
    if k == "power" and f.p < 0:
        return {f.shift}
    if k in ("log", "xlog"):
        return {f.shift}
    if k == "lin":
        out: set[Fraction] = set()
        for _, p in f.parts:
            out |= _singularities(p)
        return out
    return set()


def _check_interval(f: FuncExpr, lo: Bound, hi: Bound) -> None:
    sings = _singularities(f)
    if not sings:
        return
    lo1, hi1 = lo.element(1), hi.element(1)
    lo2, hi2 = lo.element(7), hi.element(7)
    for s in sings:
        for a, b in ((lo1, hi1), (lo2, hi2)):
            if a < s < b:
                raise NonIntegrable("undeclared singularity at %s inside the interval" % s)
        if (lo.kind == "real" and lo.value == s) or (hi.kind == "real" and hi.value == s):
            raise NonIntegrable(
                "singularity at %s must be integrated with a singular bound" % s
            )


# --------------------------------------------------------------------------
# the integral operations


def integrate(f: FuncExpr, lo: Bound, hi: Bound) -> Hyperreal:
    """Hyperdefinite integral: element n is the definite integral over
    [lo_n, hi_n]; symbolic F(hi) - F(lo) when the table covers it."""
    _check_interval(f, lo, hi)

    def gen(n: int):
        return _element_integral(f, lo.element(n), hi.element(n))

    try:
        anti = antiderivative(f)
        sym = eval_bound(anti, hi) - eval_bound(anti, lo)
        return Hyperreal(symbolic=sym, generator=gen)
    except NotExact:
        return Hyperreal(generator=gen)


def _element_integral(f: FuncExpr, a: Fraction, b: Fraction) -> float | Fraction:
    try:
        anti = antiderivative(f)
        va = eval_bound(anti, Bound.real(a))
        vb = eval_bound(anti, Bound.real(b))
        diff = vb - va
        exact = diff.eval_exact(1)
        if exact is not None and diff.is_constant():
            c = diff.constant_value()
            if c.is_rational:
                return c.as_fraction()
        if diff.is_constant():
            return float(diff.constant_value())
    except (NotExact, NonIntegrable, UnsupportedScalar, ScaleOverflow):
        pass
    from scipy import integrate as _si

    val, _err = _si.quad(f.value_at, float(a), float(b), limit=200)
    return val


def hyperdefinite_integral(f: FuncExpr, a, b) -> Hyperreal:
    """Integral with hyperreal bounds given as reals or affine multiples of w."""
    return integrate(f, _as_bound(a), _as_bound(b))


def _as_bound(x) -> Bound:
    if isinstance(x, Bound):
        return x
    if isinstance(x, (int, Fraction)):
        return Bound.real(x)
    if isinstance(x, Hyperreal):
        if x.symbolic is None:
            raise ValueError("integration bounds must be symbolic")
        from .core import _affine_of

        u, v = (Fraction(0), Fraction(0))
        a, b = _affine_of(x.symbolic)
        return Bound.omega_affine(a, b)
    raise TypeError("cannot use %r as an integration bound" % (x,))


def integrate_to_infinity(f: FuncExpr, a=0) -> Hyperreal:
    return integrate(f, _as_bound(a), Bound.plus_omega())


def integrate_from_minus_infinity(f: FuncExpr, b=0) -> Hyperreal:
    return integrate(f, Bound.minus_omega(), _as_bound(b))


def integrate_to_singular(f: FuncExpr, a, s) -> Hyperreal:
    """Integral from a up to a singular point s, read as bound s - 1/w."""
    return integrate(f, _as_bound(a), Bound.below_singular(s))


def integrate_from_singular(f: FuncExpr, s, b) -> Hyperreal:
    """Integral from a singular point s, read as bound s + 1/w."""
    return integrate(f, Bound.above_singular(s), _as_bound(b))


def integrate_improper(f: FuncExpr, singular_at_zero: bool = True) -> Hyperreal:
    """Both-ends improper integral from a singular 0 out to infinity."""
    return integrate(f, Bound.above_singular(0), Bound.plus_omega())


def integrate_symmetric(f: FuncExpr) -> Hyperreal:
    """Two-sided integral -w..w; odd integrands vanish element-wise."""
    parity = f.parity()
    if parity == "odd":
        return Hyperreal(symbolic=SYM_ZERO, generator=lambda n: Fraction(0))
    if parity == "even":
        return integrate(f, Bound.real(0), Bound.plus_omega()) * 2
    return integrate(f, Bound.minus_omega(), Bound.plus_omega())
