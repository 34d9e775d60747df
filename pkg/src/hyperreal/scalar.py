"""Exact coefficient arithmetic: rationals extended by a fixed constant vocabulary.

A scalar is a finite rational linear combination of *constant monomials*,
where a constant monomial is a product of named constants (pi, e, gamma,
log p for prime p) raised to rational exponents, with at most two distinct
constants per monomial.  Distinct canonical monomials are treated as
linearly independent over Q, which makes structural equality coincide with
value equality on this fragment.

Logs of rationals reduce to logs of primes (log(a/b) = sum of prime logs),
so log(6) and log(2)+log(3) are the same scalar.

Comparisons that are not structurally decidable fall back to directed
interval arithmetic (mpmath.iv) at doubling precision, capped at 256
digits.  Hitting the cap raises PrecisionExceeded; callers surface
"unknown" rather than guessing.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Union

import mpmath
from mpmath import iv

RationalLike = Union[int, Fraction]

#: interval-comparison precision ladder, in decimal digits
_PRECISIONS = (16, 32, 64, 128, 256)

# symbol encoding: ("pi",), ("e",), ("gamma",), ("log", p) for prime p
_PI = ("pi",)
_E = ("e",)
_GAMMA = ("gamma",)


class PrecisionExceeded(ArithmeticError):
    """A transcendental comparison stayed undecided at the precision cap."""


class UnsupportedScalar(ArithmeticError):
    """Operation would leave the supported constant fragment."""


def _factorize(n: int) -> dict[int, int]:
    """Prime factorization of a positive integer."""
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _fraction_root(x: Fraction, k: int) -> Fraction | None:
    """Exact k-th root of a nonnegative rational, or None if irrational."""
    if x < 0:
        return None
    if x == 0:
        return Fraction(0)
    num = _int_root(x.numerator, k)
    den = _int_root(x.denominator, k)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _int_root(n: int, k: int) -> int | None:
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** k == n:
            return cand
    return None


def _mono_mul(a: tuple, b: tuple) -> tuple:
    exps: dict = {}
    for sym, e in a:
        exps[sym] = exps.get(sym, Fraction(0)) + e
    for sym, e in b:
        exps[sym] = exps.get(sym, Fraction(0)) + e
    mono = tuple(sorted((s, e) for s, e in exps.items() if e != 0))
    if len(mono) > 2:
        raise UnsupportedScalar(
            "constant product of more than two distinct constants: %r" % (mono,)
        )
    return mono


def _sym_interval(sym: tuple):
    if sym == _PI:
        return iv.pi
    if sym == _E:
        return iv.e
    if sym == _GAMMA:
        return iv.euler
    if sym[0] == "log":
        return iv.log(sym[1])
    raise UnsupportedScalar("unknown constant %r" % (sym,))


def _sym_float(sym: tuple) -> float:
    if sym == _PI:
        return math.pi
    if sym == _E:
        return math.e
    if sym == _GAMMA:
        return 0.5772156649015328606
    if sym[0] == "log":
        return math.log(sym[1])
    raise UnsupportedScalar("unknown constant %r" % (sym,))


def _sym_text(sym: tuple) -> str:
    if sym[0] == "log":
        return "log(%d)" % sym[1]
    return sym[0]


class ExactScalar:
    """Immutable exact number from the supported constant fragment.

    Internally a canonical map {constant monomial: Fraction}; the empty
    monomial carries the rational part.  All arithmetic is exact; anything
    that would leave the fragment raises UnsupportedScalar.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: dict | RationalLike = 0):
        if isinstance(terms, (int, Fraction)):
            q = Fraction(terms)
            terms = {(): q} if q else {}
        clean = {m: Fraction(c) for m, c in terms.items() if c != 0}
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_hash", hash(frozenset(clean.items())))

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("ExactScalar is immutable")

    # ---- constructors -------------------------------------------------

    @staticmethod
    def rational(q: RationalLike) -> "ExactScalar":
        return ExactScalar(Fraction(q))

    @staticmethod
    def pi() -> "ExactScalar":
        return ExactScalar({((_PI, Fraction(1)),): Fraction(1)})

    @staticmethod
    def e_const() -> "ExactScalar":
        return ExactScalar({((_E, Fraction(1)),): Fraction(1)})

    @staticmethod
    def euler_gamma() -> "ExactScalar":
        return ExactScalar({((_GAMMA, Fraction(1)),): Fraction(1)})

    @staticmethod
    def e_power(q: RationalLike) -> "ExactScalar":
        """e**q for rational q."""
        q = Fraction(q)
        if q == 0:
            return ExactScalar(1)
        return ExactScalar({((_E, q),): Fraction(1)})

    @staticmethod
    def log(r: RationalLike) -> "ExactScalar":
        """log of a positive rational, reduced to prime logs."""
        r = Fraction(r)
        if r <= 0:
            raise UnsupportedScalar("log of nonpositive rational")
        terms: dict = {}
        for n, sign in ((r.numerator, 1), (r.denominator, -1)):
            for p, mult in _factorize(n).items():
                key = ((("log", p), Fraction(1)),)
                terms[key] = terms.get(key, Fraction(0)) + sign * mult
        return ExactScalar(terms)

    # ---- inspection ----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_rational(self) -> bool:
        return all(m == () for m in self._terms)

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise UnsupportedScalar("not a rational: %s" % self)
        return self._terms.get((), Fraction(0))

    @property
    def is_integer(self) -> bool:
        return self.is_rational and self.as_fraction().denominator == 1

    def rational_part(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def as_log_rational(self) -> Fraction | None:
        """If self == log(r) for rational r > 0 with integer prime exponents,
        return r; else None.  Zero maps to r = 1."""
        num = 1
        den = 1
        for mono, coeff in self._terms.items():
            if len(mono) != 1:
                return None
            (sym, exp) = mono[0]
            if sym[0] != "log" or exp != 1 or coeff.denominator != 1:
                return None
            p = sym[1]
            if coeff > 0:
                num *= p ** coeff.numerator
            else:
                den *= p ** (-coeff.numerator)
        return Fraction(num, den)

    # ---- arithmetic -----------------------------------------------------

    def __add__(self, other) -> "ExactScalar":
        other = _coerce(other)
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, Fraction(0)) + c
        return ExactScalar(terms)

    __radd__ = __add__

    def __neg__(self) -> "ExactScalar":
        return ExactScalar({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "ExactScalar":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "ExactScalar":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "ExactScalar":
        other = _coerce(other)
        terms: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                terms[m] = terms.get(m, Fraction(0)) + c1 * c2
        return ExactScalar(terms)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExactScalar":
        other = _coerce(other)
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "ExactScalar":
        return _coerce(other) * self.reciprocal()

    def reciprocal(self) -> "ExactScalar":
        """Exact inverse; defined for nonzero rationals and single-monomial
        scalars (e.g. 1/pi, 1/log(2))."""
        if self.is_zero:
            raise ZeroDivisionError("reciprocal of zero scalar")
        if len(self._terms) != 1:
            raise UnsupportedScalar("reciprocal of a multi-term scalar: %s" % self)
        ((mono, coeff),) = self._terms.items()
        inv_mono = tuple((sym, -e) for sym, e in mono)
        return ExactScalar({inv_mono: Fraction(1) / coeff})

    def pow(self, q: RationalLike) -> "ExactScalar":
        """self**q for rational q; exact or UnsupportedScalar."""
        q = Fraction(q)
        if q == 0:
            return ExactScalar(1)
        if q.denominator == 1:
            n = q.numerator
            base = self if n > 0 else self.reciprocal()
            out = ExactScalar(1)
            for _ in range(abs(n)):
                out = out * base
            return out
        if len(self._terms) != 1:
            raise UnsupportedScalar("rational power of multi-term scalar")
        ((mono, coeff),) = self._terms.items()
        if coeff < 0:
            raise UnsupportedScalar("rational power of negative scalar")
        root = _fraction_root(coeff ** abs(q.numerator), q.denominator)
        if root is None:
            raise UnsupportedScalar("%s**%s is not in the fragment" % (self, q))
        if q < 0:
            root = Fraction(1) / root
        new_mono = tuple((sym, e * q) for sym, e in mono)
        return ExactScalar({new_mono: root})

    def __abs__(self) -> "ExactScalar":
        return -self if self.sign() < 0 else self

    # ---- comparison ------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ExactScalar(other)
        if not isinstance(other, ExactScalar):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return self._hash

    def sign(self) -> int:
        """-1, 0 or +1; raises PrecisionExceeded when undecidable."""
        if self.is_zero:
            return 0
        if self.is_rational:
            return 1 if self.as_fraction() > 0 else -1
        for dps in _PRECISIONS:
            box = self.interval(dps)
            if box > 0:
                return 1
            if box < 0:
                return -1
        raise PrecisionExceeded("sign of %s undecided at 256 digits" % self)

    def compare(self, other) -> int:
        """Total-order comparison: -1, 0, +1."""
        d = self - _coerce(other)
        return d.sign()

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    # ---- numeric views ----------------------------------------------------

    def interval(self, dps: int = 32):
        """Rigorous enclosure as an mpmath.iv interval at dps digits."""
        old = iv.dps
        try:
            iv.dps = dps
            total = iv.mpf(0)
            for mono, coeff in self._terms.items():
                part = iv.mpf(coeff.numerator) / coeff.denominator
                for sym, e in mono:
                    base = _sym_interval(sym)
                    if e == 1:
                        part *= base
                    elif e == -1:
                        part /= base
                    else:
                        part *= iv.exp(iv.log(base) * iv.mpf(e.numerator) / e.denominator)
                total += part
            return total
        finally:
            iv.dps = old

    def __float__(self) -> float:
        total = 0.0
        for mono, coeff in self._terms.items():
            part = float(coeff)
            for sym, e in mono:
                part *= _sym_float(sym) ** float(e)
            total += part
        return total

    # ---- rendering ---------------------------------------------------------

    def __str__(self) -> str:
        return render_scalar(self)

    def __repr__(self) -> str:
        return "ExactScalar(%s)" % render_scalar(self)


def _coerce(x) -> ExactScalar:
    if isinstance(x, ExactScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactScalar(x)
    raise TypeError("cannot coerce %r to ExactScalar" % (x,))


def scalar(x: RationalLike | ExactScalar) -> ExactScalar:
    """Public coercion helper."""
    return _coerce(x)


def _exp_text(sym: tuple, e: Fraction) -> str:
    base = _sym_text(sym)
    if e == 1:
        return base
    if e.denominator == 1:
        return "%s^%d" % (base, e.numerator)
    return "%s^(%s)" % (base, e)


def render_scalar(s: ExactScalar) -> str:
    """Canonical text like "4/3*pi", "2/pi", "log(2)", "-1/2"."""
    if s.is_zero:
        return "0"
    parts = []
    for mono, coeff in sorted(s._terms.items(), key=lambda kv: (kv[0] != (), kv[0])):
        pos = [(sym, e) for sym, e in mono if e > 0]
        neg = [(sym, -e) for sym, e in mono if e < 0]
        a = abs(coeff)
        factors = []
        if a != 1 or not pos:
            factors.append(str(a))
        factors += [_exp_text(sym, e) for sym, e in pos]
        text = "*".join(factors)
        for sym, e in neg:
            text += "/" + _exp_text(sym, e)
        parts.append(("-" if coeff < 0 else "+", text))
    sign0, text0 = parts[0]
    out = ("-" if sign0 == "-" else "") + text0
    for sign, text in parts[1:]:
        out += " %s %s" % (sign, text)
    return out


ZERO = ExactScalar(0)
ONE = ExactScalar(1)
