"""Symbolic hyperreal values on the growth scale e^(c*w) * w^p * log(w)^q.

A symbolic value is a finite linear combination of growth monomials plus a
finite list of *atom terms*: scalar * monomial * atom, where an atom is an
exactly-tracked but scale-external quantity (floor/ceiling of an argument,
a bounded oscillation like cos(w), an asymptotic tail like arctan(w), or a
geometric power of a floor).  Every atom carries a rigorous enclosure whose
bounds are atom-free symbolic values, plus an exact canonical-sequence
evaluator where integer arithmetic permits one.

Substituting w -> n in a symbolic value reproduces its defining real
sequence; eval_exact returns a Fraction whenever the value at that index is
rational, and eval_float always answers (double precision, quarantined from
certificates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Callable, Optional, Union

from .scalar import (
    ONE,
    ZERO,
    ExactScalar,
    PrecisionExceeded,
    UnsupportedScalar,
    scalar,
)

Number = Union[int, Fraction, ExactScalar]


class ScaleOverflow(ArithmeticError):
    """Result would leave the supported growth scale; use a sequence form."""


class FloorUndecided(ArithmeticError):
    """Exact floor of an atom argument could not be pinned down."""


# --------------------------------------------------------------------------
# growth monomials


@dataclass(frozen=True)
class GrowthMonomial:
    """One factor e^(c*w) * w^p * log(w)^q; totally ordered by lex (c, p, q)."""

    exp_rate: ExactScalar
    power: ExactScalar
    log_power: ExactScalar

    def cmp(self, other: "GrowthMonomial") -> int:
        for a, b in (
            (self.exp_rate, other.exp_rate),
            (self.power, other.power),
            (self.log_power, other.log_power),
        ):
            c = a.compare(b)
            if c:
                return c
        return 0

    def mul(self, other: "GrowthMonomial") -> "GrowthMonomial":
        return GrowthMonomial(
            self.exp_rate + other.exp_rate,
            self.power + other.power,
            self.log_power + other.log_power,
        )

    def inverse(self) -> "GrowthMonomial":
        return GrowthMonomial(-self.exp_rate, -self.power, -self.log_power)

    def pow(self, q: Fraction) -> "GrowthMonomial":
        qs = scalar(q)
        return GrowthMonomial(self.exp_rate * qs, self.power * qs, self.log_power * qs)

    @property
    def is_unit(self) -> bool:
        return self.exp_rate.is_zero and self.power.is_zero and self.log_power.is_zero

    def is_integer_valued(self) -> bool:
        """True when the canonical sequence n -> value is integer for n >= 1."""
        if not self.log_power.is_zero:
            return False
        if not (self.power.is_integer and self.power.as_fraction() >= 0):
            return False
        r = self.exp_rate.as_log_rational()
        return r is not None and r.denominator == 1 and r >= 1

    def eval_exact(self, n: int) -> Fraction | None:
        out = Fraction(1)
        if not self.exp_rate.is_zero:
            r = self.exp_rate.as_log_rational()
            if r is None:
                return None
            out *= r ** n
        if not self.power.is_zero:
            if not self.power.is_integer:
                return None
            out *= Fraction(n) ** self.power.as_fraction().numerator
        if not self.log_power.is_zero:
            if n == 1 and self.log_power > ZERO:
                return Fraction(0)
            return None
        return out

    def eval_float(self, n: int) -> float:
        out = 1.0
        if not self.exp_rate.is_zero:
            out *= math.exp(float(self.exp_rate) * n)
        if not self.power.is_zero:
            out *= float(n) ** float(self.power)
        if not self.log_power.is_zero:
            out *= math.log(n) ** float(self.log_power) if n > 1 else 0.0
        return out

    def log_float(self, n: float) -> float:
        """log of the monomial at real argument n (n >= 2), for order audits."""
        return (
            float(self.exp_rate) * n
            + float(self.power) * math.log(n)
            + float(self.log_power) * math.log(math.log(n))
        )


UNIT = GrowthMonomial(ZERO, ZERO, ZERO)
OMEGA_MON = GrowthMonomial(ZERO, ONE, ZERO)
LOG_MON = GrowthMonomial(ZERO, ZERO, ONE)


def monomial(c: Number = 0, p: Number = 0, q: Number = 0) -> GrowthMonomial:
    return GrowthMonomial(scalar(c), scalar(p), scalar(q))


def _mono_sort_key(m: GrowthMonomial):
    return cmp_to_key(GrowthMonomial.cmp)(m)


# --------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class Atom:
    """Exactly-tracked quantity outside the growth scale.

    kinds:
      floor    -- floor(argument); enclosure (argument-1, argument]
      expfloor -- base**(-floor(argument)); argument affine in w
      osc      -- func(a*n + b) with func in {sin, cos}; enclosure (-1, 1)
      tail     -- arctan evaluated along an affine bound; enclosure
                  (pi/2 - c/w, pi/2)
    """

    kind: str
    argument: Optional["SymbolicHyperreal"] = None
    base: Fraction | None = None  # expfloor
    func: str | None = None  # osc: "sin" | "cos"
    affine: tuple[Fraction, Fraction] | None = None  # osc/tail argument a*n+b

    def sort_text(self) -> str:
        arg = _structural_text(self.argument) if self.argument is not None else ""
        return "%s|%s|%s|%s|%s" % (self.kind, self.base, self.func, self.affine, arg)

    def enclosure(self) -> tuple["SymbolicHyperreal", "SymbolicHyperreal", bool, bool, int]:
        """(lo, hi, lo_open, hi_open, threshold); bounds are atom-free."""
        if self.kind == "floor":
            return self.argument - 1, self.argument, True, False, 1
        if self.kind == "expfloor":
            # value = base**(-floor(g)) in [base**-g, base**(1-g)); widen the
            # constant offset of g to the enclosing integers to keep the
            # bound coefficients rational
            a, b = _affine_of(self.argument)
            mono = GrowthMonomial(ExactScalar.log(self.base) * scalar(-a), ZERO, ZERO)
            lo = SymbolicHyperreal.from_term(Fraction(self.base) ** (-math.ceil(b)), mono)
            hi = SymbolicHyperreal.from_term(Fraction(self.base) ** (1 - math.floor(b)), mono)
            return lo, hi, False, True, 1
        if self.kind == "osc":
            one = SymbolicHyperreal.real(1)
            return -one, one, True, True, 1
        if self.kind == "tail":
            a, b = self.affine
            pi_half = SymbolicHyperreal.real(ExactScalar.pi() / 2)
            if b == 0:
                c, threshold = Fraction(1) / a, 1
            else:
                c, threshold = Fraction(2) / a, max(1, math.ceil(abs(2 * b / a)))
            lo = pi_half - SymbolicHyperreal.from_term(scalar(c), OMEGA_MON.inverse())
            return lo, pi_half, True, True, threshold
        raise AssertionError(self.kind)

    def eval_exact(self, n: int) -> Fraction | None:
        if self.kind == "floor":
            try:
                return Fraction(_floor_eval(self.argument, n))
            except FloorUndecided:
                return None
        if self.kind == "expfloor":
            try:
                k = _floor_eval(self.argument, n)
            except FloorUndecided:
                return None
            return Fraction(self.base) ** (-k)
        return None

    def eval_float(self, n: int) -> float:
        if self.kind in ("floor", "expfloor"):
            v = self.eval_exact(n)
            if v is not None:
                return float(v)
            x = self.argument.eval_float(n)
            k = math.floor(x)
            return k if self.kind == "floor" else float(self.base) ** (-k)
        a, b = self.affine
        x = float(a) * n + float(b)
        if self.kind == "osc":
            return math.sin(x) if self.func == "sin" else math.cos(x)
        return math.atan(x)


def _log_scalar(r: Fraction) -> ExactScalar:
    return ExactScalar.log(r)


def _exp_scalar_of(s: ExactScalar) -> ExactScalar:
    """exp of a scalar when it stays in the fragment (rational + log parts)."""
    r = s.as_log_rational()
    if r is not None:
        return ExactScalar.rational(r)
    if s.is_rational:
        return ExactScalar.e_power(s.as_fraction())
    raise UnsupportedScalar("exp(%s) not in fragment" % s)


def _affine_of(v: "SymbolicHyperreal") -> tuple[Fraction, Fraction]:
    """Decompose an atom-free value as a*w + b with rational a, b."""
    if v.atom_terms:
        raise ScaleOverflow("not affine: %s" % render_core(v))
    a = b = Fraction(0)
    for mono, coeff in v.terms.items():
        if mono.is_unit:
            b = coeff.as_fraction()
        elif mono == OMEGA_MON:
            a = coeff.as_fraction()
        else:
            raise ScaleOverflow("not affine: %s" % render_core(v))
    return a, b


# ---- exact floor evaluation ------------------------------------------------


def _int_floor_root(x: Fraction, v: int) -> tuple[int, bool]:
    """(floor(x ** (1/v)), exact?) for x >= 0."""
    if x < 0:
        raise ValueError
    k = int(float(x) ** (1.0 / v)) if x > 0 else 0
    while Fraction(k + 1) ** v <= x:
        k += 1
    while k > 0 and Fraction(k) ** v > x:
        k -= 1
    return k, Fraction(k) ** v == x


def _floor_eval(arg: "SymbolicHyperreal", n: int) -> int:
    """Exact floor of arg's canonical sequence at n."""
    v = arg.eval_exact(n)
    if v is not None:
        return math.floor(v)
    if not arg.atom_terms and len(arg.terms) == 1:
        ((mono, coeff),) = arg.terms.items()
        # c * w^(u/v) with rational c
        if (
            coeff.is_rational
            and mono.exp_rate.is_zero
            and mono.log_power.is_zero
            and not mono.power.is_zero
        ):
            p = mono.power
            if p.is_rational:
                pf = p.as_fraction()
                c = coeff.as_fraction()
                if pf > 0:
                    x = abs(c) ** pf.denominator * Fraction(n) ** pf.numerator
                    k, exact = _int_floor_root(x, pf.denominator)
                    return k if c > 0 else (-k if exact else -k - 1)
        # s * log(w) with s = q / log(p)  ->  exact integer log
        if mono.exp_rate.is_zero and mono.power.is_zero and mono.log_power == ONE:
            got = _floor_rational_log(coeff, n)
            if got is not None:
                return got
    # interval fallback: sound unless the value sits exactly on an integer
    from mpmath import iv

    for dps in (30, 60, 120, 240):
        old = iv.dps
        try:
            iv.dps = dps
            box = arg.eval_interval(n)
        finally:
            iv.dps = old
        if box is not None:
            lo = math.floor(float(box.a))
            hi = math.floor(float(box.b))
            if lo == hi:
                return lo
    raise FloorUndecided("floor(%s) at n=%d" % (render_core(arg), n))


def _floor_rational_log(coeff: ExactScalar, n: int) -> int | None:
    """floor(coeff * log n) when coeff = q * log(p)**-1, via integer powers."""
    terms = coeff._terms
    if len(terms) != 1:
        return None
    ((mono, q),) = terms.items()
    if len(mono) != 1:
        return None
    (sym, e) = mono[0]
    if sym[0] != "log" or e != -1:
        return None
    p = sym[1]
    if n == 1:
        return 0
    # floor(q * log_p(n)): k <= q log_p n  iff  p^(k*qd) <= n^qn (q = qn/qd > 0)
    if q <= 0:
        return None
    est = int(float(q) * math.log(n) / math.log(p))
    k = est
    while Fraction(p) ** ((k + 1) * q.denominator) <= Fraction(n) ** q.numerator:
        k += 1
    while Fraction(p) ** (k * q.denominator) > Fraction(n) ** q.numerator:
        k -= 1
    return k


# --------------------------------------------------------------------------
# atom terms and symbolic values


@dataclass(frozen=True)
class AtomTerm:
    coeff: ExactScalar
    monomial: GrowthMonomial
    atom: Atom


class SymbolicHyperreal:
    """Canonical finite combination of growth-scale terms and atom terms."""

    __slots__ = ("terms", "atom_terms", "_hash")

    def __init__(self, terms: dict, atom_terms: tuple = ()):  # internal; use helpers
        clean = {m: c for m, c in terms.items() if not c.is_zero}
        extra, atoms = _normalize_atoms(atom_terms)
        for m, c in extra.items():
            if m in clean:
                s = clean[m] + c
                if s.is_zero:
                    del clean[m]
                else:
                    clean[m] = s
            elif not c.is_zero:
                clean[m] = c
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "atom_terms", atoms)
        object.__setattr__(
            self,
            "_hash",
            hash(
                (
                    frozenset(clean.items()),
                    tuple((t.coeff, t.monomial, t.atom.kind, t.atom.sort_text()) for t in atoms),
                )
            ),
        )

    def __setattr__(self, *a):  # pragma: no cover
        raise AttributeError("SymbolicHyperreal is immutable")

    # ---- constructors

    @staticmethod
    def zero() -> "SymbolicHyperreal":
        return SymbolicHyperreal({})

    @staticmethod
    def real(x: Number) -> "SymbolicHyperreal":
        return SymbolicHyperreal({UNIT: scalar(x)})

    @staticmethod
    def omega() -> "SymbolicHyperreal":
        return SymbolicHyperreal({OMEGA_MON: ONE})

    @staticmethod
    def from_term(coeff: Number, mono: GrowthMonomial) -> "SymbolicHyperreal":
        return SymbolicHyperreal({mono: scalar(coeff)})

    @staticmethod
    def from_atom(atom: Atom, coeff: Number = 1, mono: GrowthMonomial = UNIT) -> "SymbolicHyperreal":
        return SymbolicHyperreal({}, (AtomTerm(scalar(coeff), mono, atom),))

    # ---- structure

    @property
    def is_zero(self) -> bool:
        return not self.terms and not self.atom_terms

    @property
    def is_atom_free(self) -> bool:
        return not self.atom_terms

    def is_constant(self) -> bool:
        return not self.atom_terms and all(m.is_unit for m in self.terms)

    def constant_value(self) -> ExactScalar:
        if not self.is_constant():
            raise ScaleOverflow("not a constant: %s" % render_core(self))
        return self.terms.get(UNIT, ZERO)

    def sorted_terms(self) -> list[tuple[GrowthMonomial, ExactScalar]]:
        return sorted(self.terms.items(), key=lambda kv: _mono_sort_key(kv[0]), reverse=True)

    def leading(self) -> tuple[GrowthMonomial, ExactScalar] | None:
        """Leading (largest-scale) plain term; None for zero.  Atom-free only."""
        if self.atom_terms:
            raise ScaleOverflow("leading term of atom-bearing value")
        if not self.terms:
            return None
        return self.sorted_terms()[0]

    def is_integer_sequence(self) -> bool:
        """Certified integer-valued at every index n >= 1."""
        for mono, coeff in self.terms.items():
            if not (coeff.is_integer and mono.is_integer_valued()):
                return False
        for at in self.atom_terms:
            if at.atom.kind != "floor":
                return False
            if not (at.coeff.is_integer and at.monomial.is_integer_valued()):
                return False
        return True

    # ---- arithmetic

    def __add__(self, other) -> "SymbolicHyperreal":
        other = _coerce_sym(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, ZERO) + c
        return SymbolicHyperreal(terms, self.atom_terms + other.atom_terms)

    __radd__ = __add__

    def __neg__(self) -> "SymbolicHyperreal":
        return SymbolicHyperreal(
            {m: -c for m, c in self.terms.items()},
            tuple(AtomTerm(-t.coeff, t.monomial, t.atom) for t in self.atom_terms),
        )

    def __sub__(self, other) -> "SymbolicHyperreal":
        return self + (-_coerce_sym(other))

    def __rsub__(self, other) -> "SymbolicHyperreal":
        return _coerce_sym(other) + (-self)

    def __mul__(self, other) -> "SymbolicHyperreal":
        other = _coerce_sym(other)
        if self.atom_terms and other.atom_terms:
            raise ScaleOverflow("product of two atom-bearing values")
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1.mul(m2)
                terms[m] = terms.get(m, ZERO) + c1 * c2
        atoms = []
        for plain, al in ((other, self.atom_terms), (self, other.atom_terms)):
            for t in al:
                for m2, c2 in plain.terms.items():
                    atoms.append(AtomTerm(t.coeff * c2, t.monomial.mul(m2), t.atom))
        return SymbolicHyperreal(terms, tuple(atoms))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "SymbolicHyperreal":
        return self * _coerce_sym(other).reciprocal()

    def reciprocal(self) -> "SymbolicHyperreal":
        if self.atom_terms or len(self.terms) != 1:
            raise ScaleOverflow("reciprocal of non-monomial value: %s" % render_core(self))
        ((mono, coeff),) = self.terms.items()
        return SymbolicHyperreal({mono.inverse(): coeff.reciprocal()})

    def pow_rational(self, q) -> "SymbolicHyperreal":
        q = Fraction(q)
        if q.denominator == 1:
            n = q.numerator
            if n == 0:
                return SymbolicHyperreal.real(1)
            base = self if n > 0 else self.reciprocal()
            out = SymbolicHyperreal.real(1)
            for _ in range(abs(n)):
                out = out * base
            return out
        if self.atom_terms or len(self.terms) != 1:
            raise ScaleOverflow("rational power of non-monomial value")
        ((mono, coeff),) = self.terms.items()
        return SymbolicHyperreal({mono.pow(q): coeff.pow(q)})

    # ---- evaluation

    def eval_exact(self, n: int) -> Fraction | None:
        total = Fraction(0)
        for mono, coeff in self.terms.items():
            if not coeff.is_rational:
                return None
            mv = mono.eval_exact(n)
            if mv is None:
                return None
            total += coeff.as_fraction() * mv
        for t in self.atom_terms:
            if not t.coeff.is_rational:
                return None
            mv = t.monomial.eval_exact(n)
            av = t.atom.eval_exact(n)
            if mv is None or av is None:
                return None
            total += t.coeff.as_fraction() * mv * av
        return total

    def eval_float(self, n: int) -> float:
        exact = self.eval_exact(n)
        if exact is not None:
            return float(exact)
        total = 0.0
        for mono, coeff in self.terms.items():
            total += float(coeff) * mono.eval_float(n)
        for t in self.atom_terms:
            total += float(t.coeff) * t.monomial.eval_float(n) * t.atom.eval_float(n)
        return total

    def eval_interval(self, n: int):
        """mpmath.iv enclosure of the value at index n (atom-free only)."""
        from mpmath import iv

        if self.atom_terms:
            return None
        total = iv.mpf(0)
        for mono, coeff in self.terms.items():
            part = coeff.interval(iv.dps)
            if not mono.exp_rate.is_zero:
                part *= iv.exp(mono.exp_rate.interval(iv.dps) * n)
            if not mono.power.is_zero:
                part *= iv.exp(mono.power.interval(iv.dps) * iv.log(n))
            if not mono.log_power.is_zero:
                if n == 1:
                    return None
                part *= iv.exp(mono.log_power.interval(iv.dps) * iv.log(iv.log(n)))
            total += part
        return total

    # ---- enclosure across atoms

    def enclosure(self) -> tuple["SymbolicHyperreal", "SymbolicHyperreal", bool, bool, int]:
        """(lo, hi, lo_open, hi_open, threshold) with atom-free symbolic bounds.

        Valid for all indices n >= threshold; monomial factors are positive
        there, so each atom contributes its own bound oriented by the sign
        of its coefficient.
        """
        base = SymbolicHyperreal(dict(self.terms))
        lo, hi = base, base
        lo_open = hi_open = False
        threshold = 1
        for t in self.atom_terms:
            a_lo, a_hi, a_lo_open, a_hi_open, a_thr = t.atom.enclosure()
            threshold = max(threshold, a_thr)
            factor = SymbolicHyperreal.from_term(t.coeff, t.monomial)
            sign = t.coeff.sign()
            if sign >= 0:
                lo = lo + factor * a_lo
                hi = hi + factor * a_hi
                lo_open = lo_open or a_lo_open
                hi_open = hi_open or a_hi_open
            else:
                lo = lo + factor * a_hi
                hi = hi + factor * a_lo
                lo_open = lo_open or a_hi_open
                hi_open = hi_open or a_lo_open
            if not t.monomial.is_unit:
                # monomial positivity needs n >= 2 when log factors appear
                if not t.monomial.log_power.is_zero:
                    threshold = max(threshold, 2)
        return lo, hi, lo_open, hi_open, threshold

    # ---- dunder plumbing

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolicHyperreal):
            return NotImplemented
        return self.terms == other.terms and self.atom_terms == other.atom_terms

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "SymbolicHyperreal(%s)" % render_core(self)


def _coerce_sym(x) -> SymbolicHyperreal:
    if isinstance(x, SymbolicHyperreal):
        return x
    if isinstance(x, (int, Fraction, ExactScalar)):
        return SymbolicHyperreal.real(x)
    raise TypeError("cannot coerce %r" % (x,))


def _normalize_atoms(atom_terms) -> tuple[dict, tuple]:
    """Merge identical atoms, drop zeros, and apply the exact pair rule
    a*floor(g) - a*floor(-g) = a*2g (valid when 2g is an integer sequence)."""
    merged: dict = {}
    for t in atom_terms:
        key = (t.monomial, t.atom.kind, t.atom.sort_text())
        if key in merged:
            old = merged[key]
            merged[key] = AtomTerm(old.coeff + t.coeff, old.monomial, old.atom)
        else:
            merged[key] = t
    live = [t for t in merged.values() if not t.coeff.is_zero]
    extra: dict = {}
    used = [False] * len(live)
    for i, t in enumerate(live):
        if used[i] or t.atom.kind != "floor":
            continue
        for j in range(i + 1, len(live)):
            u = live[j]
            if used[j] or u.atom.kind != "floor" or u.monomial != t.monomial:
                continue
            if u.coeff != -t.coeff:
                continue
            if u.atom.argument != -t.atom.argument:
                continue
            double = t.atom.argument + t.atom.argument
            if not double.is_integer_sequence():
                continue
            used[i] = used[j] = True
            contrib = SymbolicHyperreal.from_term(t.coeff, t.monomial) * double
            for m, c in contrib.terms.items():
                extra[m] = extra.get(m, ZERO) + c
            break
    rest = [t for i, t in enumerate(live) if not used[i]]
    rest.sort(key=lambda t: (_mono_sort_key(t.monomial), t.atom.kind, t.atom.sort_text()))
    rest.reverse()
    return extra, tuple(rest)


# --------------------------------------------------------------------------
# floor / ceiling constructors


def floor_of(v: SymbolicHyperreal) -> SymbolicHyperreal:
    """Exact floor: integer-sequence parts pass through, rational constants
    fold, and what remains becomes a floor atom."""
    v = _coerce_sym(v)
    int_terms: dict = {}
    rest_terms: dict = {}
    int_atoms: list = []
    rest_atoms: list = []
    for mono, coeff in v.terms.items():
        if coeff.is_integer and mono.is_integer_valued():
            int_terms[mono] = coeff
        else:
            rest_terms[mono] = coeff
    for t in v.atom_terms:
        if t.atom.kind == "floor" and t.coeff.is_integer and t.monomial.is_integer_valued():
            int_atoms.append(t)
        else:
            rest_atoms.append(t)
    int_part = SymbolicHyperreal(int_terms, tuple(int_atoms))
    rest = SymbolicHyperreal(rest_terms, tuple(rest_atoms))
    if rest.is_zero:
        return int_part
    if rest.is_constant():
        c = rest.constant_value()
        if c.is_rational:
            return int_part + SymbolicHyperreal.real(math.floor(c.as_fraction()))
        folded = _floor_constant(c)
        if folded is not None:
            return int_part + SymbolicHyperreal.real(folded)
    return int_part + SymbolicHyperreal.from_atom(Atom("floor", argument=rest))


def ceil_of(v: SymbolicHyperreal) -> SymbolicHyperreal:
    """Exact ceiling via ceil(x) = -floor(-x)."""
    return -floor_of(-_coerce_sym(v))


def _floor_constant(c: ExactScalar) -> int | None:
    for dps in (30, 60, 120, 240):
        box = c.interval(dps)
        lo = math.floor(float(box.a))
        hi = math.floor(float(box.b))
        if lo == hi:
            return lo
    return None


def floor_atom_linear(a: Fraction, b: Fraction) -> SymbolicHyperreal:
    """floor(a*w + b) canonicalized."""
    arg = SymbolicHyperreal({OMEGA_MON: scalar(a), UNIT: scalar(b)})
    return floor_of(arg)


def expfloor_of(base: Fraction, arg: SymbolicHyperreal) -> SymbolicHyperreal:
    """base**(-floor(arg)) for base > 1 and affine arg; the integer-sequence
    part of arg moves into the growth scale, leaving at most one atom."""
    base = Fraction(base)
    if base <= 1:
        raise ValueError("expfloor base must exceed 1")
    fl = floor_of(arg)
    plain = SymbolicHyperreal(dict(fl.terms))
    atoms = fl.atom_terms
    if len(atoms) > 1 or (atoms and (atoms[0].coeff != ONE or not atoms[0].monomial.is_unit)):
        raise ScaleOverflow("expfloor of a compound floor")
    a, b = _affine_of(plain)  # integer a, b after extraction
    scale_mono = GrowthMonomial(ExactScalar.log(base) * scalar(-a), ZERO, ZERO)
    head_coeff = scalar(base ** (-b.numerator)) if b else ONE
    if not atoms:
        return SymbolicHyperreal.from_term(head_coeff, scale_mono)
    residual = atoms[0].atom.argument
    _affine_of(residual)  # enclosure soundness needs an affine residual
    atom = Atom("expfloor", argument=residual, base=base)
    return SymbolicHyperreal({}, (AtomTerm(head_coeff, scale_mono, atom),))


def osc_atom(func: str, a: Fraction, b: Fraction = Fraction(0)) -> SymbolicHyperreal:
    """func(a*w + b) as a bounded-oscillation atom (strict enclosure, since
    a*n + b never hits a multiple of pi/2 exactly for rational a, b != 0*n+0)."""
    return SymbolicHyperreal.from_atom(Atom("osc", func=func, affine=(Fraction(a), Fraction(b))))


def arctan_tail_atom(a: Fraction, b: Fraction = Fraction(0)) -> SymbolicHyperreal:
    """arctan(a*w + b) for a > 0, carried exactly with an infinitesimal-width
    enclosure below pi/2."""
    return SymbolicHyperreal.from_atom(Atom("tail", affine=(Fraction(a), Fraction(b))))


# --------------------------------------------------------------------------
# structural text: deterministic identity strings for sort keys and errors
# (the pretty renderer lives in render.py)


def _structural_text(v: "SymbolicHyperreal") -> str:
    parts = []
    for mono, coeff in v.sorted_terms():
        parts.append("%s:%s,%s,%s" % (coeff, mono.exp_rate, mono.power, mono.log_power))
    for t in v.atom_terms:
        parts.append("%s:%s,%s,%s:[%s]" % (
            t.coeff, t.monomial.exp_rate, t.monomial.power, t.monomial.log_power,
            t.atom.sort_text()))
    return ";".join(parts) or "0"


def render_core(v: SymbolicHyperreal | None) -> str:
    from .render import render_symbolic

    if v is None:
        return "?"
    return render_symbolic(v)
