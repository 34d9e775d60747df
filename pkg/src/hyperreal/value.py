"""Hyperreal values and their four-valued comparison semantics.

A Hyperreal carries a symbolic closed form, a lazy canonical sequence, or
both linked by a certificate.  Determinacy certificates stand in for the
free ultrafilter: a claim is determinately true when its witnessing index
set is certified cofinite, determinately false when finite, indeterminate
when both the set and its complement are certified infinite, and otherwise
unknown at the scanned horizon.

The workhorse certificate is the periodic closed form (PCF): a modulus m
and one rational form num(w)/den(w) per residue class, valid from some
threshold on.  Rational-linear floor atoms expand into PCFs exactly, which
turns questions like floor(w/2) vs w/2 into per-class sign computations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence, Union

from .scalar import ONE, ZERO, ExactScalar, PrecisionExceeded, UnsupportedScalar, scalar
from .core import (
    LOG_MON,
    OMEGA_MON,
    UNIT,
    Atom,
    AtomTerm,
    FloorUndecided,
    GrowthMonomial,
    ScaleOverflow,
    SymbolicHyperreal,
    _affine_of,
    _coerce_sym,
    _mono_sort_key,
    floor_of,
)
from . import truth
from .truth import Certificate, Comparison, TruthValue

DEFAULT_HORIZON = 10_000

SYM_ZERO = SymbolicHyperreal.zero()
SYM_ONE = SymbolicHyperreal.real(1)


class Uncertified(ArithmeticError):
    """No certificate supports a determinate answer for this query."""

    def __init__(self, message: str, horizon: int | None = None):
        super().__init__(message)
        self.horizon = horizon


# --------------------------------------------------------------------------
# rational forms and periodic closed forms


@dataclass(frozen=True)
class RationalForm:
    """num/den with atom-free den normalized to positive leading sign."""

    num: SymbolicHyperreal
    den: SymbolicHyperreal

    @staticmethod
    def of(num, den=None) -> "RationalForm":
        num = _coerce_sym(num)
        den = SYM_ONE if den is None else _coerce_sym(den)
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        if den.atom_terms:
            raise ScaleOverflow("atom-bearing denominator")
        lead = den.leading()
        if lead is not None and lead[1].sign() < 0:
            num, den = -num, -den
        return RationalForm(num, den)

    @property
    def is_polynomial(self) -> bool:
        return self.den == SYM_ONE

    def add(self, other: "RationalForm") -> "RationalForm":
        if self.den == other.den:
            return RationalForm.of(self.num + other.num, self.den)
        return RationalForm.of(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def neg(self) -> "RationalForm":
        return RationalForm(-self.num, self.den)

    def sub(self, other: "RationalForm") -> "RationalForm":
        return self.add(other.neg())

    def mul(self, other: "RationalForm") -> "RationalForm":
        return RationalForm.of(self.num * other.num, self.den * other.den)

    def reciprocal(self) -> "RationalForm":
        if self.num.atom_terms:
            raise ScaleOverflow("reciprocal of atom-bearing numerator")
        if self.num.is_zero:
            raise ZeroDivisionError
        return RationalForm.of(self.den, self.num)

    def eval_exact(self, n: int) -> Fraction | None:
        nu = self.num.eval_exact(n)
        de = self.den.eval_exact(n)
        if nu is None or de is None or de == 0:
            return None
        return nu / de

    def eval_float(self, n: int) -> float:
        return self.num.eval_float(n) / self.den.eval_float(n)


@dataclass(frozen=True)
class PeriodicForm:
    """Closed form per residue class: classes[r] is valid for n ≡ r (mod
    modulus), n >= threshold.  modulus 1 is a plain closed form."""

    modulus: int
    classes: tuple[RationalForm, ...]
    threshold: int = 1

    @staticmethod
    def constant(form: RationalForm, threshold: int = 1) -> "PeriodicForm":
        return PeriodicForm(1, (form,), threshold)

    def class_of(self, n: int) -> RationalForm:
        return self.classes[n % self.modulus]

    def with_modulus(self, m: int) -> "PeriodicForm":
        if m == self.modulus:
            return self
        assert m % self.modulus == 0
        return PeriodicForm(
            m, tuple(self.classes[r % self.modulus] for r in range(m)), self.threshold
        )

    def zip_with(self, other: "PeriodicForm", op) -> "PeriodicForm":
        m = math.lcm(self.modulus, other.modulus)
        a, b = self.with_modulus(m), other.with_modulus(m)
        return PeriodicForm(
            m,
            tuple(op(x, y) for x, y in zip(a.classes, b.classes)),
            max(self.threshold, other.threshold),
        )

    def map(self, op) -> "PeriodicForm":
        return PeriodicForm(self.modulus, tuple(op(c) for c in self.classes), self.threshold)

    def eval_exact(self, n: int) -> Fraction | None:
        return self.class_of(n).eval_exact(n)

    def substitute_index_shift(self, k: int) -> "PeriodicForm":
        """Form of n -> value(n - k) given this form of n -> value(n)."""
        shifted = []
        for r in range(self.modulus):
            src = self.classes[(r - k) % self.modulus]
            shifted.append(RationalForm.of(
                _substitute_affine(src.num, 1, -k), _substitute_affine(src.den, 1, -k)))
        return PeriodicForm(self.modulus, tuple(shifted), self.threshold + k)


def expand_pcf(sym: SymbolicHyperreal) -> PeriodicForm:
    """Expand rational-linear floor atoms into per-class linear forms; other
    atoms stay in the class forms (handled later by enclosures)."""
    linear: list[tuple[AtomTerm, Fraction, Fraction]] = []
    rest_atoms: list[AtomTerm] = []
    modulus = 1
    for t in sym.atom_terms:
        ab = _linear_arg(t.atom) if t.atom.kind == "floor" else None
        if ab is not None and t.coeff.is_rational:
            a, b = ab
            linear.append((t, a, b))
            modulus = math.lcm(modulus, a.denominator)
        else:
            rest_atoms.append(t)
    base = SymbolicHyperreal(dict(sym.terms), tuple(rest_atoms))
    if not linear:
        return PeriodicForm.constant(RationalForm.of(base))
    classes = []
    for r in range(modulus):
        form = base
        for t, a, b in linear:
            offset = Fraction(math.floor(a * r + b)) - a * r
            lin = SymbolicHyperreal({OMEGA_MON: scalar(a), UNIT: scalar(offset)})
            form = form + SymbolicHyperreal.from_term(t.coeff, t.monomial) * lin
        classes.append(RationalForm.of(form))
    return PeriodicForm(modulus, tuple(classes))


def _linear_arg(atom: Atom) -> tuple[Fraction, Fraction] | None:
    try:
        a, b = _affine_of(atom.argument)
    except (ScaleOverflow, UnsupportedScalar):
        return None
    return (a, b) if a != 0 else None


def _substitute_affine(sym: SymbolicHyperreal, u: int, w: int) -> SymbolicHyperreal:
    """Substitute w_var -> u*w_var + w into a polynomial/linear-floor value."""
    out = SYM_ZERO
    target = SymbolicHyperreal({OMEGA_MON: scalar(u), UNIT: scalar(w)})
    for mono, coeff in sym.terms.items():
        if mono.is_unit:
            out = out + SymbolicHyperreal.real(coeff)
            continue
        if mono.exp_rate.is_zero and mono.log_power.is_zero and mono.power.is_integer:
            k = mono.power.as_fraction().numerator
            if k >= 0:
                out = out + SymbolicHyperreal.real(coeff) * target.pow_rational(k)
                continue
        if mono.log_power.is_zero and mono.power.is_zero:
            r = mono.exp_rate.as_log_rational()
            if r is not None:
                head = coeff * scalar(r ** w)
                out = out + SymbolicHyperreal.from_term(
                    head, GrowthMonomial(mono.exp_rate * scalar(u), ZERO, ZERO))
                continue
        raise ScaleOverflow("cannot substitute into %r" % mono)
    for t in sym.atom_terms:
        if t.atom.kind != "floor" or not t.monomial.is_unit:
            raise ScaleOverflow("cannot substitute into atom term")
        arg = _substitute_affine(t.atom.argument, u, w)
        out = out + SymbolicHyperreal.from_term(t.coeff, UNIT) * floor_of(arg)
    return out


# --------------------------------------------------------------------------
# enclosure certificates


@dataclass(frozen=True)
class Enclosure:
    lo: SymbolicHyperreal
    hi: SymbolicHyperreal
    lo_open: bool = False
    hi_open: bool = False
    threshold: int = 1


# --------------------------------------------------------------------------
# eventual sign of atom-free symbolic values

_SIGN_CACHE: dict = {}


def eventual_sign(sym: SymbolicHyperreal) -> tuple[int, int]:
    """(sign, threshold): sign of the canonical sequence for all n >= threshold.

    The sign equals the sign of the leading coefficient; the threshold is
    located by an exponential scan with rigorous interval evaluation.
    """
    if sym.atom_terms:
        raise ScaleOverflow("eventual_sign of atom-bearing value")
    if sym.is_zero:
        return 0, 1
    cached = _SIGN_CACHE.get(sym)
    if cached is not None:
        return cached
    lead_mono, lead_coeff = sym.leading()
    s = lead_coeff.sign()
    last_bad = 0
    first_good_after = None
    for n in _scan_indices():
        if _sign_at(sym, n) == s:
            if first_good_after is None:
                first_good_after = n
        else:
            last_bad = n
            first_good_after = None
    if last_bad >= _scan_indices()[-1]:
        raise Uncertified("sign of %r did not stabilize in scan" % sym)
    if last_bad == 0:
        threshold = 1
    elif first_good_after is not None and first_good_after > last_bad + 1:
        threshold = _refine_threshold(sym, s, last_bad, first_good_after)
    else:
        threshold = last_bad + 1
    result = (s, threshold)
    if len(_SIGN_CACHE) < 100_000:
        _SIGN_CACHE[sym] = result
    return result


def _refine_threshold(sym: SymbolicHyperreal, s: int, lo: int, hi: int) -> int:
    """Geometric bisection for the last sign crossing inside (lo, hi]."""
    while hi > lo + 1 and hi > lo * 21 // 20:
        mid = math.isqrt(lo) * math.isqrt(hi)
        if mid <= lo or mid >= hi:
            mid = (lo + hi) // 2
        if _sign_at(sym, mid) == s:
            hi = mid
        else:
            lo = mid
    return hi


@lru_cache(maxsize=1)
def _scan_indices() -> tuple[int, ...]:
    small = list(range(1, 33))
    big = [2 ** k for k in range(6, 41, 2)]
    huge = [10 ** k for k in (15, 20, 25, 30, 40, 50, 70, 100, 150, 200, 300)]
    return tuple(small + big + huge)


def _sign_at(sym: SymbolicHyperreal, n: int) -> int | None:
    if n <= 4096:
        v = sym.eval_exact(n)
        if v is not None:
            return 0 if v == 0 else (1 if v > 0 else -1)
    if n <= 2 ** 40:
        from mpmath import iv

        for dps in (30, 80):
            old = iv.dps
            try:
                iv.dps = dps
                box = sym.eval_interval(n)
            finally:
                iv.dps = old
            if box is None:
                break
            if box > 0:
                return 1
            if box < 0:
                return -1
        else:
            return None  # straddles zero at this precision: a mismatch
    return _sign_logspace(sym, float(n))


def _sign_logspace(sym: SymbolicHyperreal, n: float) -> int | None:
    """Sign at astronomically large n: compare the log-magnitudes of the
    positive-coefficient and negative-coefficient sides."""
    pos: list[float] = []
    neg: list[float] = []
    for mono, coeff in sym.terms.items():
        c = float(coeff)
        if c == 0.0:
            continue
        mag = mono.log_float(n) + math.log(abs(c))
        (pos if c > 0 else neg).append(mag)
    lp = _logsum(pos)
    ln_ = _logsum(neg)
    if lp == ln_ == -math.inf:
        return 0
    if math.isinf(lp) and lp > 0 and not (math.isinf(ln_) and ln_ > 0):
        return 1
    if math.isinf(ln_) and ln_ > 0 and not (math.isinf(lp) and lp > 0):
        return -1
    if lp > ln_ + 1e-6:
        return 1
    if ln_ > lp + 1e-6:
        return -1
    return None


def _logsum(vals: list[float]) -> float:
    if not vals:
        return -math.inf
    m = max(vals)
    if math.isinf(m):
        return m
    return m + math.log(sum(math.exp(v - m) for v in vals))


def monomial_bounds(sym: SymbolicHyperreal) -> tuple[SymbolicHyperreal, SymbolicHyperreal, int]:
    """Single-term lo/hi with (c/2)*m <= sym <= (2c)*m eventually, for
    atom-free sym with positive leading coefficient."""
    mono, coeff = sym.leading()
    lead = SymbolicHyperreal.from_term(coeff, mono)
    half = lead * Fraction(1, 2)
    twice = lead * 2
    _, t1 = eventual_sign(sym - half)
    _, t2 = eventual_sign(twice - sym)
    return half, twice, max(t1, t2)


# --------------------------------------------------------------------------
# the Hyperreal value


GeneratorFn = Callable[[int], Union[Fraction, int, float]]


class Hyperreal:
    """A hyperreal number: symbolic, sequence-backed, or linked.

    Values are immutable; the element cache fills idempotently, so instances
    are safe to share across threads without locking.
    """

    __slots__ = (
        "symbolic",
        "_generator",
        "pcf",
        "enclosure_cert",
        "link",
        "_cache",
        "_pcf_done",
        "display_hint",
    )

    def __init__(
        self,
        symbolic: SymbolicHyperreal | None = None,
        generator: GeneratorFn | None = None,
        pcf: PeriodicForm | None = None,
        enclosure: Enclosure | None = None,
        link: tuple["Hyperreal", ExactScalar, int] | None = None,
        display_hint: str | None = None,
    ):
        if symbolic is None and generator is None:
            raise ValueError("a Hyperreal needs a symbolic form or a generator")
        self.symbolic = symbolic
        self._generator = generator
        self.pcf = pcf
        self.enclosure_cert = enclosure
        self.link = link
        self._cache: dict[int, Fraction | float] = {}
        self._pcf_done = pcf is not None
        self.display_hint = display_hint

    # ---- variants ----------------------------------------------------------

    @property
    def variant(self) -> str:
        if self.symbolic is not None and self._generator is None:
            return "symbolic"
        if self.symbolic is not None:
            return "linked"
        return "sequence"

    @property
    def is_symbolic(self) -> bool:
        return self.symbolic is not None

    # ---- canonical sequence --------------------------------------------------

    def element(self, n: int) -> Fraction | float:
        """Canonical-sequence element at index n >= 1 (exact when possible)."""
        if n < 1:
            raise IndexError("indices are 1-based")
        got = self._cache.get(n)
        if got is None:
            if self._generator is not None:
                got = self._generator(n)
            else:
                exact = self.symbolic.eval_exact(n)
                got = exact if exact is not None else self.symbolic.eval_float(n)
            self._cache[n] = got
        return got

    def prefix(self, k: int) -> list:
        return [self.element(n) for n in range(1, k + 1)]

    # ---- certificates ----------------------------------------------------------

    def effective_pcf(self) -> PeriodicForm | None:
        if not self._pcf_done:
            pcf = None
            if self.symbolic is not None:
                try:
                    pcf = expand_pcf(self.symbolic)
                except (ScaleOverflow, UnsupportedScalar, PrecisionExceeded):
                    pcf = None
            self.pcf = pcf
            self._pcf_done = True
        return self.pcf

    def effective_enclosure(self) -> Enclosure | None:
        if self.enclosure_cert is not None:
            return self.enclosure_cert
        if self.symbolic is not None:
            try:
                lo, hi, lo_open, hi_open, thr = self.symbolic.enclosure()
            except (ScaleOverflow, UnsupportedScalar):
                return None
            return Enclosure(lo, hi, lo_open, hi_open, thr)
        return None

    def audit_link(self, indices: Iterable[int]) -> bool:
        """Check generator-vs-closed-form agreement at the given indices."""
        if self.symbolic is None or self._generator is None:
            return True
        for n in indices:
            mine = self._generator(n)
            sym = self.symbolic.eval_exact(n)
            if sym is None:
                continue
            if Fraction(mine) != sym:
                return False
        return True

    # ---- arithmetic ----------------------------------------------------------

    def __add__(self, other) -> "Hyperreal":
        other = as_hyperreal(other)
        sym = None
        if self.symbolic is not None and other.symbolic is not None:
            try:
                sym = self.symbolic + other.symbolic
            except (ScaleOverflow, UnsupportedScalar):
                sym = None
        gen = _combine_gen(self, other, lambda a, b: a + b)
        if sym is not None:
            return Hyperreal(symbolic=sym, generator=gen if self._generator or other._generator else None)
        pcf = _combine_pcf(self, other, lambda a, b: a.add(b))
        encl = _combine_encl_add(self, other)
        return Hyperreal(generator=gen, pcf=pcf, enclosure=encl)

    __radd__ = __add__

    def __neg__(self) -> "Hyperreal":
        sym = -self.symbolic if self.symbolic is not None else None
        gen = (lambda n, g=self.element: -g(n)) if self._generator else None
        if sym is not None:
            return Hyperreal(symbolic=sym, generator=gen)
        pcf = self.effective_pcf()
        encl = self.effective_enclosure()
        return Hyperreal(
            generator=lambda n, g=self.element: -g(n),
            pcf=pcf.map(RationalForm.neg) if pcf else None,
            enclosure=Enclosure(-encl.hi, -encl.lo, encl.hi_open, encl.lo_open, encl.threshold)
            if encl
            else None,
        )

    def __sub__(self, other) -> "Hyperreal":
        return self + (-as_hyperreal(other))

    def __rsub__(self, other) -> "Hyperreal":
        return as_hyperreal(other) + (-self)

    def __mul__(self, other) -> "Hyperreal":
        other = as_hyperreal(other)
        sym = None
        if self.symbolic is not None and other.symbolic is not None:
            try:
                sym = self.symbolic * other.symbolic
            except (ScaleOverflow, UnsupportedScalar):
                sym = None
        gen = _combine_gen(self, other, lambda a, b: a * b)
        if sym is not None:
            return Hyperreal(symbolic=sym, generator=gen if self._generator or other._generator else None)
        pcf = _combine_pcf(self, other, lambda a, b: a.mul(b))
        encl = _combine_encl_mul(self, other)
        return Hyperreal(generator=gen, pcf=pcf, enclosure=encl)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Hyperreal":
        return self * as_hyperreal(other).reciprocal()

    def __rtruediv__(self, other) -> "Hyperreal":
        return as_hyperreal(other) * self.reciprocal()

    def reciprocal(self) -> "Hyperreal":
        zero_cmp = compare(self, ZERO_H)
        if zero_cmp.outcome == "equal":
            raise ZeroDivisionError("reciprocal of zero")
        if zero_cmp.outcome == "indeterminate" and "equal" in zero_cmp.candidates:
            raise ZeroDivisionError("reciprocal of a possibly-zero value")
        if self.symbolic is not None:
            try:
                return Hyperreal(symbolic=self.symbolic.reciprocal())
            except (ScaleOverflow, UnsupportedScalar):
                pass
        gen = lambda n, g=self.element: _invert_elem(g(n))
        pcf = self.effective_pcf()
        if pcf is not None:
            try:
                return Hyperreal(generator=gen, pcf=pcf.map(RationalForm.reciprocal))
            except (ScaleOverflow, ZeroDivisionError):
                pass
        encl = self.effective_enclosure()
        if encl is not None:
            try:
                lo_s, lo_t = eventual_sign(encl.lo)
                if lo_s > 0:
                    blo, bhi, bthr = monomial_bounds(encl.lo)
                    alo, ahi, athr = monomial_bounds(encl.hi)
                    return Hyperreal(
                        generator=gen,
                        enclosure=Enclosure(
                            ahi.reciprocal(), blo.reciprocal(), False, False,
                            max(encl.threshold, lo_t, bthr, athr)),
                    )
            except (ScaleOverflow, UnsupportedScalar, Uncertified):
                pass
        return Hyperreal(generator=gen)

    def pow_rational(self, q) -> "Hyperreal":
        q = Fraction(q)
        if self.symbolic is not None:
            try:
                return Hyperreal(symbolic=self.symbolic.pow_rational(q))
            except (ScaleOverflow, UnsupportedScalar):
                pass
        if q.denominator == 1 and q >= 0:
            out = ONE_H
            for _ in range(q.numerator):
                out = out * self
            return out
        gen = lambda n, g=self.element: float(g(n)) ** float(q)
        return Hyperreal(generator=gen)

    def abs_(self) -> "Hyperreal":
        if self.symbolic is not None and not self.symbolic.atom_terms:
            s, _ = eventual_sign(self.symbolic)
            return -self if s < 0 else self
        pcf = self.effective_pcf()
        if pcf is not None:
            def flip(form: RationalForm) -> RationalForm:
                if form.num.is_zero:
                    return form
                if form.num.atom_terms:
                    raise ScaleOverflow("abs of atom-bearing class")
                s, _ = eventual_sign(form.num)
                return form.neg() if s < 0 else form
            try:
                return Hyperreal(
                    generator=lambda n, g=self.element: abs(g(n)),
                    pcf=pcf.map(flip),
                )
            except (ScaleOverflow, Uncertified):
                pass
        return Hyperreal(generator=lambda n, g=self.element: abs(g(n)))

    # ---- misc ------------------------------------------------------------------

    def with_link(self, base: "Hyperreal", offset: ExactScalar, threshold: int) -> "Hyperreal":
        out = Hyperreal(
            symbolic=self.symbolic,
            generator=self._generator,
            pcf=self.pcf,
            enclosure=self.enclosure_cert,
            link=(base, offset, threshold),
        )
        out._pcf_done = self._pcf_done
        return out

    def __repr__(self) -> str:
        from .render import render_value

        return "Hyperreal(%s)" % render_value(self)


def _invert_elem(v):
    if isinstance(v, Fraction) and v != 0:
        return Fraction(1) / v
    if isinstance(v, int) and v != 0:
        return Fraction(1, v)
    return 1.0 / v if v else math.inf


def _combine_gen(a: Hyperreal, b: Hyperreal, op) -> GeneratorFn:
    return lambda n: op(a.element(n), b.element(n))


def _combine_pcf(a: Hyperreal, b: Hyperreal, op) -> PeriodicForm | None:
    pa, pb = a.effective_pcf(), b.effective_pcf()
    if pa is None or pb is None:
        return None
    try:
        return pa.zip_with(pb, op)
    except (ScaleOverflow, UnsupportedScalar, ZeroDivisionError):
        return None


def _combine_encl_add(a: Hyperreal, b: Hyperreal) -> Enclosure | None:
    ea, eb = a.effective_enclosure(), b.effective_enclosure()
    if ea is None or eb is None:
        return None
    try:
        return Enclosure(
            ea.lo + eb.lo,
            ea.hi + eb.hi,
            ea.lo_open or eb.lo_open,
            ea.hi_open or eb.hi_open,
            max(ea.threshold, eb.threshold),
        )
    except (ScaleOverflow, UnsupportedScalar):
        return None


def _combine_encl_mul(a: Hyperreal, b: Hyperreal) -> Enclosure | None:
    ea, eb = a.effective_enclosure(), b.effective_enclosure()
    if ea is None or eb is None:
        return None
    try:
        # only the positive-cone case; enough for sizes, probabilities, areas
        for e in (ea, eb):
            if e.lo.atom_terms:
                return None
            s, _ = eventual_sign(e.lo)
            if s < 0 or (s == 0 and not e.lo.is_zero):
                return None
        thr = max(ea.threshold, eb.threshold)
        for e in (ea, eb):
            if not e.lo.is_zero:
                thr = max(thr, eventual_sign(e.lo)[1])
        return Enclosure(
            ea.lo * eb.lo,
            ea.hi * eb.hi,
            ea.lo_open or eb.lo_open,
            ea.hi_open or eb.hi_open,
            thr,
        )
    except (ScaleOverflow, UnsupportedScalar, Uncertified):
        return None


# --------------------------------------------------------------------------
# constructors


def from_real(x) -> Hyperreal:
    return Hyperreal(symbolic=SymbolicHyperreal.real(scalar(x) if not isinstance(x, ExactScalar) else x))


def omega() -> Hyperreal:
    return Hyperreal(symbolic=SymbolicHyperreal.omega())


def as_hyperreal(x) -> Hyperreal:
    if isinstance(x, Hyperreal):
        return x
    if isinstance(x, (int, Fraction, ExactScalar)):
        return from_real(x)
    if isinstance(x, SymbolicHyperreal):
        return Hyperreal(symbolic=x)
    raise TypeError("cannot interpret %r as a Hyperreal" % (x,))


ZERO_H = Hyperreal(symbolic=SYM_ZERO)
ONE_H = Hyperreal(symbolic=SYM_ONE)


# --------------------------------------------------------------------------
# comparison


def compare(x, y, horizon: int = DEFAULT_HORIZON) -> Comparison:
    """Four-valued order comparison of two hyperreals."""
    x, y = as_hyperreal(x), as_hyperreal(y)
    if x is y:
        return truth.determinate("equal", truth.cofinite(1, "identical value"))
    link = _link_difference(x, y)
    if link is not None:
        offset, thr = link
        if offset.is_zero:
            return truth.determinate("equal", truth.cofinite(thr, "eventually identical"))
        out = "greater" if offset.sign() > 0 else "less"
        return truth.determinate(out, truth.cofinite(thr, "eventually-constant difference"))
    if x.symbolic is not None and y.symbolic is not None:
        try:
            return _compare_symbolic(x.symbolic - y.symbolic, horizon)
        except (ScaleOverflow, UnsupportedScalar, PrecisionExceeded):
            pass
    px, py = x.effective_pcf(), y.effective_pcf()
    if px is not None and py is not None:
        try:
            diff = px.zip_with(py, lambda a, b: a.sub(b))
            return _compare_pcf(diff, horizon)
        except (ScaleOverflow, UnsupportedScalar, PrecisionExceeded):
            pass
    got = _compare_enclosures(x, y)
    if got is not None:
        return got
    return _scan_unknown(x, y, horizon)


def _link_difference(x: Hyperreal, y: Hyperreal) -> tuple[ExactScalar, int] | None:
    if x.link is not None:
        base, off, thr = x.link
        if base is y:
            return off, thr
        if y.link is not None and y.link[0] is base:
            return off - y.link[1], max(thr, y.link[2])
    if y.link is not None and y.link[0] is x:
        return -y.link[1], y.link[2]
    return None


def _compare_symbolic(d: SymbolicHyperreal, horizon: int) -> Comparison:
    if d.is_zero:
        return truth.determinate("equal", truth.cofinite(1, "exact cancellation"))
    return _compare_pcf(expand_pcf(d), horizon)


def _compare_pcf(diff: PeriodicForm, horizon: int) -> Comparison:
    verdicts: list[tuple[str, int] | None] = []
    for form in diff.classes:
        verdicts.append(_class_sign(form, horizon))
    if any(v is None for v in verdicts):
        return truth.unknown_order(horizon)
    outcomes = {}
    threshold = diff.threshold
    labels = []
    for v in verdicts:
        rels, thr = v
        labels.append("|".join(sorted(rels)))
        threshold = max(threshold, thr)
        for r in rels:
            outcomes[r] = True
    rels = set(outcomes)
    if len(rels) == 1:
        rel = rels.pop()
        if diff.modulus == 1:
            cert = truth.cofinite(threshold, "leading-term sign")
        else:
            cert = truth.partition(diff.modulus, tuple(labels), threshold)
        return truth.determinate(rel, cert)
    cert = truth.partition(diff.modulus, tuple(labels), threshold)
    return truth.indeterminate_order(rels, cert)


def _class_sign(form: RationalForm, horizon: int) -> tuple[set[str], int] | None:
    """Relations {less|equal|greater} the class difference realizes cofinally,
    with a validity threshold; None when unknown."""
    num = form.num
    if num.is_zero:
        return {"equal"}, 1
    if not num.atom_terms:
        try:
            s, thr = eventual_sign(num)
        except (Uncertified, PrecisionExceeded):
            return None
        return ({"greater"} if s > 0 else {"less"}), thr
    return _atom_sign(num, horizon)


def _atom_sign(num: SymbolicHyperreal, horizon: int) -> tuple[set[str], int] | None:
    try:
        lo, hi, lo_open, hi_open, thr = num.enclosure()
    except (ScaleOverflow, UnsupportedScalar):
        return None
    try:
        if not lo.is_zero:
            s, t = eventual_sign(lo)
            if s > 0:
                return {"greater"}, max(thr, t)
        elif lo_open:
            return {"greater"}, thr
        if not hi.is_zero:
            s, t = eventual_sign(hi)
            if s < 0:
                return {"less"}, max(thr, t)
        elif hi_open:
            return {"less"}, thr
    except (Uncertified, PrecisionExceeded):
        return None
    # enclosure straddles zero: certify indeterminacy for known shapes
    got = _floor_gap_pattern(num)
    if got is not None:
        return got
    got = _osc_pattern(num)
    if got is not None:
        return got
    return None


def _floor_gap_pattern(num: SymbolicHyperreal) -> tuple[set[str], int] | None:
    """num == c*m*(floor(g) - g) for a power-law g: zero is attained on an
    infinite index family (g integer there) and missed on another, so the
    comparison is certifiably indeterminate between equal and one side."""
    if len(num.atom_terms) != 1:
        return None
    t = num.atom_terms[0]
    if t.atom.kind != "floor":
        return None
    g = t.atom.argument
    rest = SymbolicHyperreal(dict(num.terms))
    if rest != -(SymbolicHyperreal.from_term(t.coeff, t.monomial) * g):
        return None
    if not _power_law_attains_integers(g):
        return None
    side = "less" if t.coeff.sign() > 0 else "greater"
    return {"equal", side}, 1


def _power_law_attains_integers(g: SymbolicHyperreal) -> bool:
    if g.atom_terms or len(g.terms) != 1:
        return False
    ((mono, coeff),) = g.terms.items()
    if not coeff.is_rational or coeff.as_fraction() <= 0:
        return False
    if not (mono.exp_rate.is_zero and mono.log_power.is_zero):
        return False
    p = mono.power
    if not p.is_rational:
        return False
    pf = p.as_fraction()
    # c*n^(u/v): integer exactly on n = (den(c)*k)^v, non-integer off perfect
    # v-th powers (u/v not an integer) or off multiples of den(c)
    return pf > 0 and (pf.denominator > 1 or coeff.as_fraction().denominator > 1)


def _osc_pattern(num: SymbolicHyperreal) -> tuple[set[str], int] | None:
    """num == c*osc + r with rational r, |r| < |c|: sin/cos at rational-affine
    integer arguments is equidistributed enough to take both signs cofinally
    and, being transcendental there, never equals -r/c exactly."""
    if len(num.atom_terms) != 1:
        return None
    t = num.atom_terms[0]
    if t.atom.kind != "osc" or not t.monomial.is_unit or not t.coeff.is_rational:
        return None
    rest = SymbolicHyperreal(dict(num.terms))
    if not rest.is_constant():
        return None
    r = rest.constant_value()
    if not r.is_rational:
        return None
    if abs(r.as_fraction()) >= abs(t.coeff.as_fraction()):
        return None
    return {"less", "greater"}, 1


def _compare_enclosures(x: Hyperreal, y: Hyperreal) -> Comparison | None:
    ex, ey = x.effective_enclosure(), y.effective_enclosure()
    if ex is None or ey is None:
        return None
    thr = max(ex.threshold, ey.threshold)
    # x > y when lo(x) - hi(y) is eventually nonnegative with strictness
    for a, b, rel in ((ex.lo, ey.hi, "greater"), (ey.lo, ex.hi, "less")):
        try:
            d = a - b
        except (ScaleOverflow, UnsupportedScalar):
            continue
        got = _atom_sign(d, DEFAULT_HORIZON) if d.atom_terms else None
        if d.atom_terms:
            if got is not None and got[0] == {"greater"}:
                return truth.determinate(rel, truth.cofinite(max(thr, got[1]), "enclosure separation"))
            continue
        if d.is_zero:
            strict = (ex.lo_open or ey.hi_open) if rel == "greater" else (ey.lo_open or ex.hi_open)
            if strict:
                return truth.determinate(rel, truth.cofinite(thr, "enclosure separation (strict bound)"))
            continue
        try:
            s, t = eventual_sign(d)
        except (Uncertified, PrecisionExceeded):
            continue
        if s > 0:
            return truth.determinate(rel, truth.cofinite(max(thr, t), "enclosure separation"))
    return None


def _scan_unknown(x: Hyperreal, y: Hyperreal, horizon: int) -> Comparison:
    # no certificate applies; scanning is reported, never promoted
    return truth.unknown_order(horizon)


# --------------------------------------------------------------------------
# classification, finiteness, shadow


CLASSES = ("infinitesimal", "finite", "lesser-infinite", "infinite")


def classify(x, horizon: int = DEFAULT_HORIZON) -> str:
    """Magnitude class: infinitesimal | finite | lesser-infinite | infinite.

    Raises Uncertified for values without a supporting certificate.
    """
    x = as_hyperreal(x)
    pcf = x.effective_pcf()
    cats = set()
    if pcf is not None:
        try:
            for form in pcf.classes:
                cats.add(_classify_form(form))
        except Uncertified:
            cats = set()
        if cats:
            return _merge_categories(cats, horizon)
    encl = x.effective_enclosure()
    if encl is not None:
        cat = _classify_enclosure(encl)
        if cat is not None:
            return cat
    raise Uncertified("no certificate classifies this value", horizon)


def _merge_categories(cats: set, horizon: int) -> str:
    if cats == {"zero"}:
        return "finite"
    cats.discard("zero")
    if len(cats) == 1:
        return cats.pop()
    raise Uncertified("classification differs across residue classes", horizon)


def _classify_form(form: RationalForm) -> str:
    num, den = form.num, form.den
    if num.is_zero:
        return "zero"
    dm = UNIT if den == SYM_ONE else den.leading()[0]
    if num.atom_terms:
        got = _enclosure_category(num, dm)
        if got is None:
            raise Uncertified("atom enclosure does not pin a class")
        return got
    return _mono_category(num.leading()[0].mul(dm.inverse()))


def _mono_category(m: GrowthMonomial) -> str:
    cu = m.cmp(UNIT)
    if cu < 0:
        return "infinitesimal"
    if cu == 0:
        return "finite"
    return "lesser-infinite" if m.cmp(OMEGA_MON) < 0 else "infinite"


def _classify_enclosure(encl: Enclosure) -> str | None:
    return _pair_category(_bound_category(encl.lo), _bound_category(encl.hi))


def _enclosure_category(num: SymbolicHyperreal, dm: GrowthMonomial) -> str | None:
    try:
        lo, hi, *_ = num.enclosure()
    except (ScaleOverflow, UnsupportedScalar):
        return None
    return _pair_category(_bound_category(lo, dm), _bound_category(hi, dm))


def _pair_category(a, b) -> str | None:
    if a is None or b is None:
        return None
    (cat_l, sign_l), (cat_h, sign_h) = a, b
    if cat_l == cat_h and sign_l == sign_h and sign_l != 0:
        return cat_l
    cats = {cat_l, cat_h}
    if cats <= {"infinitesimal", "zero"} and cats != {"zero"}:
        return "infinitesimal" if "zero" not in cats else None
    return None


def _bound_category(sym: SymbolicHyperreal, dm: GrowthMonomial = UNIT) -> tuple[str, int] | None:
    if sym.atom_terms:
        try:
            lo, hi, *_ = sym.enclosure()
        except (ScaleOverflow, UnsupportedScalar):
            return None
        a, b = _bound_category(lo, dm), _bound_category(hi, dm)
        if a is not None and a == b:
            return a
        return None
    if sym.is_zero:
        return ("zero", 0)
    mono, coeff = sym.leading()
    try:
        s = coeff.sign()
    except PrecisionExceeded:
        return None
    return (_mono_category(mono.mul(dm.inverse())), s)


def is_finite(x, horizon: int = DEFAULT_HORIZON) -> TruthValue:
    try:
        cat = classify(x, horizon)
    except Uncertified as e:
        return TruthValue.unknown(e.horizon or horizon)
    if cat in ("finite", "infinitesimal"):
        return TruthValue.true(truth.cofinite(1, "magnitude class %s" % cat))
    return TruthValue.false(truth.cofinite(1, "magnitude class %s" % cat))


def is_infinitesimal(x, horizon: int = DEFAULT_HORIZON) -> TruthValue:
    try:
        cat = classify(x, horizon)
    except Uncertified as e:
        return TruthValue.unknown(e.horizon or horizon)
    if cat == "infinitesimal":
        return TruthValue.true(truth.cofinite(1, "magnitude class infinitesimal"))
    return TruthValue.false(truth.cofinite(1, "magnitude class %s" % cat))


class ShadowUndefined(ArithmeticError):
    pass


def shadow(x) -> Hyperreal:
    """Nearest-real rounding: drop infinitesimal terms, exact real for the
    unit-scale part, keep infinite terms unchanged.

    Footnote semantics st(x - [x]) + [x]; realized here as scale-term
    truncation, with finite atoms of infinitesimal enclosure width replaced
    by their standard part.
    """
    x = as_hyperreal(x)
    if x.symbolic is not None:
        return Hyperreal(symbolic=_shadow_symbolic(x.symbolic))
    pcf = x.effective_pcf()
    if pcf is not None:
        outs = set()
        try:
            for form in pcf.classes:
                outs.add(_shadow_form(form))
        except (ScaleOverflow, UnsupportedScalar, ShadowUndefined, Uncertified):
            outs = set()
        if len(outs) == 1:
            return Hyperreal(symbolic=outs.pop())
    encl = x.effective_enclosure()
    if encl is not None:
        lo = _shadow_symbolic(encl.lo)
        hi = _shadow_symbolic(encl.hi)
        if lo == hi:
            return Hyperreal(symbolic=lo)
    raise ShadowUndefined("shadow needs a certificate pinning the standard part")


def _shadow_symbolic(sym: SymbolicHyperreal) -> SymbolicHyperreal:
    out = SYM_ZERO
    for mono, coeff in sym.terms.items():
        c = mono.cmp(UNIT)
        if c > 0:
            out = out + SymbolicHyperreal.from_term(coeff, mono)
        elif c == 0:
            out = out + SymbolicHyperreal.real(coeff)
    for t in sym.atom_terms:
        piece = SymbolicHyperreal({}, (t,))
        lo, hi, *_rest = piece.enclosure()
        lo_cat, hi_cat = _bound_category(lo), _bound_category(hi)
        if lo_cat is None or hi_cat is None:
            raise ShadowUndefined("atom enclosure unresolved")
        if lo_cat[0] in ("infinitesimal", "zero") and hi_cat[0] in ("infinitesimal", "zero"):
            continue
        if lo_cat[0] in ("lesser-infinite", "infinite") and lo_cat == hi_cat:
            out = out + piece
            continue
        slo, shi = _shadow_symbolic(lo), _shadow_symbolic(hi)
        if slo == shi:
            out = out + slo
            continue
        raise ShadowUndefined("finite atom with real-width enclosure has no shadow")
    return out


def _shadow_form(form: RationalForm) -> SymbolicHyperreal:
    if form.is_polynomial:
        return _shadow_symbolic(form.num)
    num, den = form.num, form.den
    if num.atom_terms:
        raise ShadowUndefined("fraction with atom-bearing numerator")
    if num.is_zero:
        return SYM_ZERO
    # leading-order division: num/den = r + (num - r*den)/den with the
    # remainder a strictly smaller scale
    nm, nc = num.leading()
    dm, dc = den.leading()
    ratio_mono = nm.mul(dm.inverse())
    cat = _mono_category(ratio_mono)
    if cat == "infinitesimal":
        return SYM_ZERO
    r = SymbolicHyperreal.from_term(nc / dc, ratio_mono)
    rem = num - r * den
    if rem.is_zero:
        return _shadow_symbolic(r)
    check = _mono_category(rem.leading()[0].mul(dm.inverse()))
    if cat == "finite" and check == "infinitesimal":
        return _shadow_symbolic(r)
    if cat in ("lesser-infinite", "infinite"):
        rest = _shadow_form(RationalForm.of(rem, den))
        return _shadow_symbolic(r) + rest
    raise ShadowUndefined("fraction shadow not resolved")


# --------------------------------------------------------------------------
# membership case split


def membership_case_split(
    x,
    candidates: Sequence,
    modulus: int | None = None,
    horizon: int = DEFAULT_HORIZON,
) -> TruthValue:
    """Is x determinately a member of the candidate set?  True when every
    residue class eventually follows some candidate's canonical sequence;
    indeterminate when classes split between matching and certified
    non-matching; unknown when no partition is found."""
    x = as_hyperreal(x)
    cands = [as_hyperreal(c) for c in candidates]
    pcf = x.effective_pcf()
    if pcf is None:
        return TruthValue.unknown(horizon)
    m = pcf.modulus if modulus is None else math.lcm(pcf.modulus, modulus)
    pcf = pcf.with_modulus(m)
    cand_forms = []
    for c in cands:
        cp = c.effective_pcf()
        if cp is None:
            return TruthValue.unknown(horizon)
        cand_forms.append(cp.with_modulus(m))
    labels = []
    matched = missed = 0
    for r in range(m):
        hit = False
        for cp in cand_forms:
            diff = pcf.classes[r].sub(cp.classes[r])
            if diff.num.is_zero:
                hit = True
                break
        labels.append("member" if hit else "off-candidate")
        if hit:
            matched += 1
        else:
            missed += 1
    cert = truth.partition(m, tuple(labels), pcf.threshold)
    if missed == 0:
        return TruthValue.true(cert)
    if matched == 0:
        return TruthValue.false(cert)
    return TruthValue.indeterminate(cert)
