"""Hyperfinite sums: partial-sum sequences with exact closed-form recognition.

A series term is a tree over integer-argument building blocks: polynomials
in the index, geometric powers, their products, indicator-gated subterms,
and linear combinations, with a raw-generator fallback.  The recognizer
produces partial-sum closed forms (Faulhaber for polynomials, A(n)*r^n + C
for polynomial-geometric products, counting forms for indicators) and
verifies each candidate against brute-force partial sums on 64 indices
before attaching it as a certificate.

Infinite sums are the hyperfinite sums with upper bound w; evaluation
replaces no limits, so divergent series get fine-grained infinite values
and convergent ones keep their infinitesimal discrepancies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .scalar import ExactScalar, UnsupportedScalar, scalar
from .core import (
    GrowthMonomial,
    ScaleOverflow,
    SymbolicHyperreal,
    UNIT,
    monomial,
)
from .intsets import IntegerSetExpr
from .value import (
    Hyperreal,
    PeriodicForm,
    RationalForm,
    as_hyperreal,
    expand_pcf,
    omega,
)

SYM_OMEGA = SymbolicHyperreal.omega()


# --------------------------------------------------------------------------
# series terms


@dataclass(frozen=True)
class SeriesExpr:
    """Summand f(i).  kinds: poly | geom (poly * ratio^i) | indicator |
    lincomb | gen."""

    kind: str
    coeffs: tuple = ()  # poly coefficients c0 + c1*i + ..., exact Fractions
    ratio: Fraction | None = None
    set_expr: IntegerSetExpr | None = None
    inner: Optional["SeriesExpr"] = None
    parts: tuple = ()  # ((ExactScalar, SeriesExpr), ...)
    fn: Callable[[int], Fraction] | None = None
    label: str = ""

    def term(self, i: int) -> Fraction | ExactScalar:
        k = self.kind
        if k == "poly":
            return _poly_at(self.coeffs, i)
        if k == "geom":
            return _poly_at(self.coeffs, i) * self.ratio ** i
        if k == "indicator":
            if self.set_expr.contains(i):
                return self.inner.term(i)
            return Fraction(0)
        if k == "lincomb":
            total: Fraction | ExactScalar = Fraction(0)
            for w, part in self.parts:
                total = w * part.term(i) + total
            return total
        if k == "gen":
            return self.fn(i)
        raise AssertionError(k)


def _poly_at(coeffs: tuple, i: int) -> Fraction:
    total = Fraction(0)
    for j, c in enumerate(coeffs):
        total += c * Fraction(i) ** j
    return total


def poly_term(*coeffs) -> SeriesExpr:
    """Polynomial summand c0 + c1*i + c2*i^2 + ..."""
    return SeriesExpr("poly", coeffs=tuple(Fraction(c) for c in coeffs))


def const_term(c) -> SeriesExpr:
    return poly_term(c)


def geometric_term(ratio, *poly_coeffs) -> SeriesExpr:
    """poly(i) * ratio^i; defaults to 1 * ratio^i."""
    coeffs = tuple(Fraction(c) for c in poly_coeffs) or (Fraction(1),)
    r = Fraction(ratio)
    if r == 1:
        return SeriesExpr("poly", coeffs=coeffs)
    if r == 0:
        raise ValueError("geometric ratio must be nonzero")
    return SeriesExpr("geom", coeffs=coeffs, ratio=r)


def indicator_term(set_expr: IntegerSetExpr, inner: SeriesExpr | None = None) -> SeriesExpr:
    return SeriesExpr("indicator", set_expr=set_expr, inner=inner or poly_term(1))


def lin_comb(*parts) -> SeriesExpr:
    return SeriesExpr(
        "lincomb", parts=tuple((scalar(w), p) for w, p in parts)
    )


def generator_term(fn: Callable[[int], Fraction], label: str = "generator") -> SeriesExpr:
    return SeriesExpr("gen", fn=fn, label=label)


def alternating_identity() -> SeriesExpr:
    """i * (-1)^(i-1), the badly behaved 1 - 2 + 3 - 4 + ... summand."""
    return geometric_term(-1, 0, -1)


# --------------------------------------------------------------------------
# closed forms for partial sums  F(n) = sum_{i=1}^n f(i)


@dataclass(frozen=True)
class ClosedPartialSum:
    """Partial-sum certificate: a periodic closed form in the upper bound,
    with an optional single symbolic (atom-bearing forms like floor(w/2))."""

    pcf: PeriodicForm
    symbolic: SymbolicHyperreal | None = None
    exact_from: int = 1


def _faulhaber(coeffs: tuple) -> SymbolicHyperreal:
    """Sum_{i=1}^n poly(i) as an exact polynomial in w via Newton
    interpolation through brute-force points."""
    deg = len(coeffs)
    xs = list(range(0, deg + 2))
    ys = []
    run = Fraction(0)
    points = {0: Fraction(0)}
    for i in range(1, deg + 2):
        run += _poly_at(coeffs, i)
        points[i] = run
    ys = [points[x] for x in xs]
    # Newton divided differences
    table = list(ys)
    for level in range(1, len(xs)):
        for i in range(len(xs) - 1, level - 1, -1):
            table[i] = (table[i] - table[i - 1]) / (xs[i] - xs[i - level])
    # expand into monomial coefficients
    poly = [Fraction(0)] * (deg + 2)
    basis = [Fraction(1)]  # product (x - x0)...(x - x_{k-1})
    for k in range(len(xs)):
        for j, b in enumerate(basis):
            poly[j] += table[k] * b
        new = [Fraction(0)] * (len(basis) + 1)
        for j, b in enumerate(basis):
            new[j] -= b * xs[k]
            new[j + 1] += b
        basis = new
    out = SymbolicHyperreal.zero()
    for j, c in enumerate(poly):
        if c:
            out = out + SymbolicHyperreal.from_term(scalar(c), monomial(0, j, 0))
    return out


def _poly_geom_closed(coeffs: tuple, r: Fraction) -> PeriodicForm:
    """Sum_{i=1}^n poly(i) r^i = A(n) r^n + C with deg A = deg poly, exact."""
    deg = len(coeffs) - 1
    # solve r*A(n) - A(n-1) = r*poly(n) for A's coefficients
    m = deg + 1
    rows = []
    rhs = []
    for k in range(m):  # match coefficient of n^k
        row = [Fraction(0)] * m
        for j in range(k, m):
            row[j] += (
                (r if j == k else Fraction(0))
                - Fraction(math.comb(j, k)) * (-1) ** (j - k)
            )
        rows.append(row)
        rhs.append(r * (coeffs[k] if k < len(coeffs) else Fraction(0)))
    a = _solve_linear(rows, rhs)
    s1 = _poly_at(coeffs, 1) * r
    c = s1 - _poly_at(tuple(a), 1) * r
    return _exp_poly_pcf(tuple(a), r, c)


def _exp_poly_pcf(a_coeffs: tuple, r: Fraction, c: Fraction) -> PeriodicForm:
    """A(w) * r^w + C as a periodic form (splitting parity for negative r)."""
    a_poly = SymbolicHyperreal.zero()
    mono_r = monomial(ExactScalar.log(abs(r)) if abs(r) != 1 else 0, 0, 0)
    for j, coef in enumerate(a_coeffs):
        if coef:
            a_poly = a_poly + SymbolicHyperreal.from_term(
                scalar(coef), monomial(ExactScalar.log(abs(r)) if abs(r) != 1 else 0, j, 0)
            )
    const = SymbolicHyperreal.real(scalar(c))
    if r > 0:
        return PeriodicForm.constant(RationalForm.of(a_poly + const))
    even = a_poly + const
    odd = -a_poly + const
    return PeriodicForm(2, (RationalForm.of(even), RationalForm.of(odd)))


def _solve_linear(rows: list, rhs: list) -> list:
    """Exact Gaussian elimination over Q."""
    n = len(rows)
    m = [list(row) + [rhs[i]] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next(i for i in range(col, n) if m[i][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        inv = Fraction(1) / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col]
                m[i] = [v - f * w for v, w in zip(m[i], m[col])]
    return [m[i][n] for i in range(n)]


def closed_form_partial_sum(f: SeriesExpr) -> ClosedPartialSum | None:
    """Recognize F(n) = sum_{i=1}^n f(i); verified exactly on n = 1..64
    before being returned.  Absence is a valid answer."""
    got = _closed_unverified(f)
    if got is None:
        return None
    run = Fraction(0)
    for n in range(1, 65):
        t = f.term(n)
        if isinstance(t, ExactScalar):
            if not t.is_rational:
                return None
            t = t.as_fraction()
        run += t
        if n >= got.exact_from:
            v = got.pcf.eval_exact(n)
            if v is None or v != run:
                raise AssertionError(
                    "closed form failed its audit at n=%d: %s != %s" % (n, v, run)
                )
    return got


def _closed_unverified(f: SeriesExpr) -> ClosedPartialSum | None:
    k = f.kind
    if k == "poly":
        sym = _faulhaber(f.coeffs)
        return ClosedPartialSum(expand_pcf(sym), sym)
    if k == "geom":
        pcf = _poly_geom_closed(f.coeffs, f.ratio)
        sym = None
        if pcf.modulus == 1 and pcf.classes[0].is_polynomial:
            sym = pcf.classes[0].num
        return ClosedPartialSum(pcf, sym)
    if k == "indicator":
        return _closed_indicator(f)
    if k == "lincomb":
        total_pcf = None
        total_sym = SymbolicHyperreal.zero()
        sym_ok = True
        exact_from = 1
        for w, part in f.parts:
            got = _closed_unverified(part)
            if got is None:
                return None
            wf = RationalForm.of(SymbolicHyperreal.real(w))
            scaled = got.pcf.map(lambda c, wf=wf: c.mul(wf))
            total_pcf = scaled if total_pcf is None else total_pcf.zip_with(
                scaled, lambda a, b: a.add(b)
            )
            exact_from = max(exact_from, got.exact_from)
            if got.symbolic is not None and sym_ok:
                total_sym = total_sym + SymbolicHyperreal.real(w) * got.symbolic
            else:
                sym_ok = False
        return ClosedPartialSum(
            total_pcf, total_sym if sym_ok else None, exact_from
        )
    return None


def _closed_indicator(f: SeriesExpr) -> ClosedPartialSum | None:
    x = f.set_expr
    inner = f.inner
    if inner.kind == "poly" and tuple(inner.coeffs) == (Fraction(1),):
        got = x.count_symbolic()
        if got is None:
            return None
        sym, thr = got
        pcf = expand_pcf(sym)
        if thr > 1:
            pcf = PeriodicForm(pcf.modulus, pcf.classes, max(pcf.threshold, thr))
        return ClosedPartialSum(pcf, sym if thr <= 1 else None, thr)
    if x.kind == "ap" and inner.kind in ("poly", "geom"):
        return _closed_ap_inner(x.a, x.d, inner)
    return None


def _closed_ap_inner(a: int, d: int, inner: SeriesExpr) -> ClosedPartialSum | None:
    """Sum over i in {a, a+d, ...}, i <= n of inner(i), via the substitution
    i = a + k*d and the count K(n) = floor((n-a)/d)."""
    # g(K) = sum_{k=0}^{K} inner(a + k*d), a closed form in K
    sub_coeffs = _compose_poly(inner.coeffs, a, d)
    if inner.kind == "poly":
        g_sym = _faulhaber(sub_coeffs)  # sum_{k=1}^{K}; add k=0 term
        g_sym = g_sym + SymbolicHyperreal.real(scalar(_poly_at(sub_coeffs, 0)))
        classes = []
        for r_cls in range(d):
            # on n ≡ r (mod d), for n >= a: K = (n - a - ((r - a) % d)) / d
            off = (r_cls - a) % d
            k_of_n = (
                SYM_OMEGA - (a + off)
            ) / d
            form = _subst_poly(g_sym, k_of_n)
            classes.append(RationalForm.of(form))
        return ClosedPartialSum(
            PeriodicForm(d, tuple(classes), threshold=max(1, a)), None, max(1, a)
        )
    if inner.kind == "geom":
        r = inner.ratio
        rd = r ** d
        if rd == 1:
            return None
        # inner(a + kd) = poly_k(k) * r^a * rd^k
        geo = geometric_term(rd, *sub_coeffs)
        got = _closed_unverified(geo)
        if got is None or got.pcf.modulus != 1:
            return None
        base_form = got.pcf.classes[0]
        if not base_form.is_polynomial:
            return None
        gK = base_form.num + SymbolicHyperreal.real(scalar(_poly_at(sub_coeffs, 0)))
        classes = []
        for r_cls in range(d):
            off = (r_cls - a) % d
            k_of_n = (SYM_OMEGA - (a + off)) / d
            try:
                form = _subst_exp_poly(gK, k_of_n, rd)
            except (ScaleOverflow, UnsupportedScalar):
                return None
            classes.append(RationalForm.of(form * scalar(r ** a)))
        return ClosedPartialSum(
            PeriodicForm(d, tuple(classes), threshold=max(1, a)), None, max(1, a)
        )
    return None


def _compose_poly(coeffs: tuple, a: int, d: int) -> tuple:
    """poly(a + d*k) expanded as a polynomial in k."""
    out = [Fraction(0)] * len(coeffs)
    for j, c in enumerate(coeffs):
        # (a + d k)^j
        for t in range(j + 1):
            out[t] += c * math.comb(j, t) * Fraction(a) ** (j - t) * Fraction(d) ** t
    return tuple(out)


def _subst_poly(sym: SymbolicHyperreal, target: SymbolicHyperreal) -> SymbolicHyperreal:
    """Substitute w -> target into a pure polynomial symbolic."""
    out = SymbolicHyperreal.zero()
    for mono, coeff in sym.terms.items():
        if mono.is_unit:
            out = out + SymbolicHyperreal.real(coeff)
            continue
        if not (mono.exp_rate.is_zero and mono.log_power.is_zero and mono.power.is_integer):
            raise ScaleOverflow("not a polynomial")
        k = mono.power.as_fraction().numerator
        out = out + SymbolicHyperreal.real(coeff) * target.pow_rational(k)
    return out


def _subst_exp_poly(sym: SymbolicHyperreal, target: SymbolicHyperreal, rd: Fraction) -> SymbolicHyperreal:
    """Substitute w -> target into A(w)*rd^w + C where target is affine with
    rational slope; rd^target must stay exact."""
    a, b = _affine_parts(target)
    out = SymbolicHyperreal.zero()
    for mono, coeff in sym.terms.items():
        exp_part = SymbolicHyperreal.real(1)
        if not mono.exp_rate.is_zero:
            r_of = mono.exp_rate.as_log_rational()
            if r_of is None:
                raise ScaleOverflow("non-geometric exponent")
            # r_of^(a*w + b)
            coeff_scalar = _rational_power(r_of, b)
            exp_part = SymbolicHyperreal.from_term(
                coeff_scalar, monomial(ExactScalar.log(r_of) * scalar(a), 0, 0)
            )
        poly_part = SymbolicHyperreal.real(1)
        if not mono.power.is_zero:
            k = mono.power.as_fraction().numerator
            poly_part = target.pow_rational(k)
        out = out + SymbolicHyperreal.real(coeff) * exp_part * poly_part
    return out


def _affine_parts(v: SymbolicHyperreal) -> tuple[Fraction, Fraction]:
    a = b = Fraction(0)
    for mono, coeff in v.terms.items():
        if mono.is_unit:
            b = coeff.as_fraction()
        elif mono == monomial(0, 1, 0):
            a = coeff.as_fraction()
        else:
            raise ScaleOverflow("bound substitution needs an affine target")
    return a, b


def _rational_power(r: Fraction, q: Fraction) -> ExactScalar:
    if q.denominator == 1:
        return scalar(r ** q.numerator)
    return scalar(r).pow(q)  # raises UnsupportedScalar when irrational


# --------------------------------------------------------------------------
# hyperfinite sums


def hyperfinite_sum(f: SeriesExpr, a: int, b: Hyperreal) -> Hyperreal:
    """Element-wise sum from a to the n-th element of b's canonical sequence;
    empty when the bound falls below a."""
    b = as_hyperreal(b)
    _require_integer_bound(b)
    prefix: dict[int, Fraction | ExactScalar] = {a - 1: Fraction(0)}
    state = {"top": a - 1, "value": Fraction(0)}

    def partial(m: int):
        if m < a:
            return Fraction(0)
        if m > state["top"]:
            run = state["value"]
            for i in range(state["top"] + 1, m + 1):
                run = run + f.term(i)
            state["top"], state["value"] = m, run
            prefix[m] = run
            return run
        got = prefix.get(m)
        if got is None:
            run = Fraction(0)
            for i in range(a, m + 1):
                run = run + f.term(i)
            prefix[m] = run
            got = run
        return got

    def gen(n: int):
        bn = b.element(n)
        bi = int(bn)
        if bi != bn:
            raise ValueError("sum bound is not integer-valued at n=%d" % n)
        v = partial(bi)
        return v.as_fraction() if isinstance(v, ExactScalar) and v.is_rational else v

    closed = closed_form_partial_sum(f)
    if closed is None:
        return Hyperreal(generator=gen)
    low_adjust = Fraction(0)
    exact_from = closed.exact_from
    if a > 1:
        v = closed.pcf.eval_exact(max(a - 1, exact_from))
        # F(a-1) constant shift; evaluate honestly below threshold by brute force
        run = Fraction(0)
        for i in range(1, a):
            t = f.term(i)
            run += t.as_fraction() if isinstance(t, ExactScalar) else t
        low_adjust = run
    elif a < 1:
        run = Fraction(0)
        for i in range(a, 1):
            t = f.term(i)
            run += t.as_fraction() if isinstance(t, ExactScalar) else t
        low_adjust = -run
    shift = RationalForm.of(SymbolicHyperreal.real(scalar(-low_adjust)))
    pcf = closed.pcf.map(lambda c: c.add(shift))
    pcf = PeriodicForm(pcf.modulus, pcf.classes, max(pcf.threshold, exact_from, a))
    symbolic = None
    if closed.symbolic is not None and a <= 1 and exact_from <= 1:
        symbolic = closed.symbolic - scalar(low_adjust)
    if b.symbolic is not None and b.symbolic == SYM_OMEGA:
        if symbolic is not None:
            return Hyperreal(symbolic=symbolic, generator=gen)
        from .render import render_form

        hint = render_form(pcf.classes[0]) if pcf.modulus == 1 else None
        return Hyperreal(generator=gen, pcf=pcf, display_hint=hint)
    return _sum_at_bound(pcf, symbolic, b, gen)


def _sum_at_bound(pcf, symbolic, b: Hyperreal, gen) -> Hyperreal:
    """Compose a partial-sum closed form with an affine integer bound."""
    if b.symbolic is None or b.symbolic.atom_terms:
        return Hyperreal(generator=gen)
    try:
        u, w0 = _affine_parts(b.symbolic)
    except ScaleOverflow:
        return Hyperreal(generator=gen)
    if u.denominator != 1 or w0.denominator != 1 or u <= 0:
        return Hyperreal(generator=gen)
    u, w0 = u.numerator, w0.numerator
    m = pcf.modulus
    classes = []
    try:
        for r in range(m):
            src = pcf.classes[(u * r + w0) % m]
            num = _subst_any(src.num, u, w0)
            den = _subst_any(src.den, u, w0)
            classes.append(RationalForm.of(num, den))
    except (ScaleOverflow, UnsupportedScalar):
        return Hyperreal(generator=gen)
    out_pcf = PeriodicForm(m, tuple(classes), max(1, -(-(pcf.threshold - w0) // u)))
    sym = None
    if symbolic is not None:
        try:
            sym = _subst_any(symbolic, u, w0)
        except (ScaleOverflow, UnsupportedScalar):
            sym = None
    if sym is not None and out_pcf.threshold <= 1:
        return Hyperreal(symbolic=sym, generator=gen)
    return Hyperreal(generator=gen, pcf=out_pcf)


def _subst_any(sym: SymbolicHyperreal, u: int, w0: int) -> SymbolicHyperreal:
    from .value import _substitute_affine

    return _substitute_affine(sym, u, w0)


def _require_integer_bound(b: Hyperreal) -> None:
    if b.symbolic is not None:
        if not b.symbolic.is_integer_sequence():
            raise ValueError("sum bound must have an integer canonical sequence")
        return
    for n in (1, 2, 3, 5, 8, 13):
        v = b.element(n)
        if Fraction(v).denominator != 1:
            raise ValueError("sum bound must have an integer canonical sequence")


def sum_to_infinity(f: SeriesExpr, a: int = 1) -> Hyperreal:
    """sum_{i=a}^inf f(i), read as the hyperfinite sum with bound w."""
    return hyperfinite_sum(f, a, omega())


def sum_delta(f: SeriesExpr, modifications: dict[int, Fraction], a: int = 1) -> Hyperreal:
    """The sum with finitely many terms adjusted additively; the difference
    from the unmodified sum is certified eventually constant."""
    base = sum_to_infinity(f, a) if a == 1 else hyperfinite_sum(f, a, omega())
    mods = {int(i): Fraction(v) for i, v in modifications.items()}
    if not mods:
        return base
    if any(i < a for i in mods):
        raise ValueError("modification index below the lower bound")
    total = sum(mods.values(), Fraction(0))
    threshold = max(mods) + 1

    def gen(n: int):
        v = base.element(n)
        bump = sum((dv for i, dv in mods.items() if i <= n), Fraction(0))
        return v + bump

    pcf = base.effective_pcf()
    if pcf is not None:
        shift = RationalForm.of(SymbolicHyperreal.real(scalar(total)))
        pcf = PeriodicForm(
            pcf.modulus,
            tuple(c.add(shift) for c in pcf.classes),
            max(pcf.threshold, threshold),
        )
    out = Hyperreal(generator=gen, pcf=pcf)
    return out.with_link(base, scalar(total), threshold)
