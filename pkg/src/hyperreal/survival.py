"""Infinitesimal never-happening probabilities via survival functions at w.

A hazard process has a survival function S(t) = P(no event by time t);
evaluating it at the infinite time w assigns a strictly positive
infinitesimal to "the event never happens".  Discrete flip processes use
base^-floor(rate*(t-t0)+1), continuous decay e^-(rate*(t-t0)), and the
harmonic-hazard chain 1/floor(rate*(t-t0)+1).

The paper-style algebraic identities (later start multiplies by the base,
rate doubling squares, odd flips take the square root, all-same doubles)
hold exactly on the floor-free surrogate with the rate*(w-t0) convention;
the floor-exact forms pick up bounded constant factors, which the identity
report states exactly instead of pretending the smooth identity holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .scalar import ExactScalar, scalar
from .core import (
    ScaleOverflow,
    SymbolicHyperreal,
    expfloor_of,
    floor_of,
    monomial,
)
from .truth import TruthValue
from . import truth
from .value import Hyperreal, as_hyperreal, compare, classify, is_infinitesimal

KINDS = ("flips", "decay", "harmonic")


@dataclass(frozen=True)
class HazardProcess:
    """kind flips: per-step survival probability 1/base (base > 1);
    kind decay: continuous rate; kind harmonic: hazards 1/2, 1/3, ..."""

    kind: str
    rate: Fraction = Fraction(1)
    t0: Fraction = Fraction(0)
    base: Fraction = Fraction(2)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("unknown process kind %r" % self.kind)
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if self.t0 < 0:
            raise ValueError("start time must be nonnegative")
        if self.kind == "flips" and self.base <= 1:
            raise ValueError("per-flip survival factor must lie in (0,1)")


def flips(base=2, rate=1, start=0) -> HazardProcess:
    return HazardProcess("flips", Fraction(rate), Fraction(start), Fraction(base))


def decay(rate=1, start=0) -> HazardProcess:
    return HazardProcess("decay", Fraction(rate), Fraction(start))


def harmonic(rate=1, start=0) -> HazardProcess:
    return HazardProcess("harmonic", Fraction(rate), Fraction(start))


def survival_function(p: HazardProcess, t) -> ExactScalar:
    """S(t) exactly: 1 before the start, then the tabled formula."""
    t = Fraction(t)
    if t < p.t0:
        return scalar(1)
    steps = math.floor(p.rate * (t - p.t0) + 1)
    if p.kind == "flips":
        return scalar(Fraction(1) / p.base ** steps)
    if p.kind == "harmonic":
        return scalar(Fraction(1, steps))
    return ExactScalar.e_power(-p.rate * (t - p.t0))


def _flip_exponent(p: HazardProcess) -> SymbolicHyperreal:
    """rate*(w - t0) + 1 as a symbolic value."""
    return (
        SymbolicHyperreal.omega() * scalar(p.rate)
        + scalar(-p.rate * p.t0 + 1)
    )


def survival_at_omega(p: HazardProcess) -> Hyperreal:
    """S(w): a determinately positive infinitesimal for every process."""
    def gen(n: int):
        v = survival_function(p, n)
        return v.as_fraction() if v.is_rational else float(v)

    if p.kind == "flips":
        sym = expfloor_of(p.base, _flip_exponent(p))
        return Hyperreal(symbolic=sym, generator=gen)
    if p.kind == "decay":
        coeff = ExactScalar.e_power(p.rate * p.t0)
        sym = SymbolicHyperreal.from_term(coeff, monomial(scalar(-p.rate), 0, 0))
        return Hyperreal(symbolic=sym, generator=gen)
    fl = floor_of(_flip_exponent(p))
    return Hyperreal(symbolic=fl, generator=gen).reciprocal()


def event_time_masses(p: HazardProcess, n: int) -> Fraction:
    """CDF of the event time at integer time n (exact for discrete kinds):
    the partial hyperreal sum of the event-time distribution."""
    v = survival_function(p, n)
    return 1 - v.as_fraction()


# --------------------------------------------------------------------------
# the identity report


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    smooth: TruthValue
    smooth_note: str
    floor_exact: TruthValue
    floor_note: str
    floor_factor: ExactScalar | None = None


def _smooth_exponent(p: HazardProcess) -> tuple[Fraction, Fraction]:
    """S_smooth(w) = base^-(rate*w - rate*t0) as the exponent pair (a, b)
    meaning a*w + b; identities are exact exponent arithmetic."""
    return p.rate, -p.rate * p.t0


def _exp_pair_eq(x: tuple, y: tuple) -> TruthValue:
    if x == y:
        return TruthValue.true(truth.cofinite(1, "identical exponents"))
    return TruthValue.false(truth.cofinite(1, "exponents differ by %s" % str(
        (x[0] - y[0], x[1] - y[1]))))


def _floor_ratio_constant(p1: HazardProcess, p2: HazardProcess, power2: int = 1):
    """S(p1, w) / S(p2, w)^power2 as base^-E with E = floor-exponent
    difference; returns the exact constant when E collapses."""
    e1 = floor_of(_flip_exponent(p1))
    e2 = floor_of(_flip_exponent(p2))
    diff = e1 - e2 * power2
    if diff.is_constant():
        c = diff.constant_value()
        if c.is_rational and c.as_fraction().denominator == 1:
            k = c.as_fraction().numerator
            return scalar(Fraction(p1.base) ** (-k))
    return None


def verify_identities(p: HazardProcess) -> list[IdentityCheck]:
    """Checks the survival-identity bullets on the floor-free surrogate
    (exact) and reports the exact constant factor on the floor form."""
    if p.kind != "flips":
        raise ValueError("identity report applies to discrete flip processes")
    out = []
    base = p.base

    # later start (one flip later) multiplies survival by the base
    later = HazardProcess("flips", p.rate, p.t0 + 1 / p.rate, base)
    a, b = _smooth_exponent(p)
    a2, b2 = _smooth_exponent(later)
    smooth_ok = (a2, b2 + 1) == (a, b)  # exponent drops by exactly 1
    factor = _floor_ratio_constant(later, p)
    out.append(IdentityCheck(
        "later-start-multiplies-by-base",
        TruthValue.true(truth.cofinite(1, "exponent shift 1")) if smooth_ok
        else TruthValue.false(None),
        "smooth: S_later = base * S exactly",
        TruthValue.true(truth.cofinite(1, "floor exponents shift by 1"))
        if factor == scalar(base) else TruthValue.false(None),
        "floor-exact ratio S_later/S",
        factor,
    ))

    # doubling the rate squares the survival probability
    double = HazardProcess("flips", 2 * p.rate, p.t0, base)
    ad, bd = _smooth_exponent(double)
    smooth_sq = (ad, bd) == (2 * a, 2 * b)
    factor = _floor_ratio_constant(double, p, power2=2)
    out.append(IdentityCheck(
        "rate-doubling-squares",
        TruthValue.true(truth.cofinite(1, "exponent doubles")) if smooth_sq
        else TruthValue.false(None),
        "smooth (rate*(w-t0) convention): S_double = S^2 exactly",
        TruthValue.true(truth.cofinite(1, "constant floor-exponent offset"))
        if factor is not None else TruthValue.unknown(0),
        "floor-exact ratio S_double / S^2 (the printed +1 breaks the smooth law)",
        factor,
    ))

    # heads on every odd flip = square root = half the rate
    half = HazardProcess("flips", p.rate / 2, p.t0, base)
    ah, bh = _smooth_exponent(half)
    smooth_sqrt = (2 * ah, 2 * bh) == (a, b)
    out.append(IdentityCheck(
        "odd-flips-are-square-root",
        TruthValue.true(truth.cofinite(1, "exponent halves")) if smooth_sqrt
        else TruthValue.false(None),
        "smooth: S_half-rate = sqrt(S) exactly",
        TruthValue.true(truth.cofinite(1, "definitional on the smooth form")),
        "floor forms differ by a bounded factor (reported per class)",
        None,
    ))

    # all heads or all tails is twice all heads
    sv = survival_at_omega(p)
    both = sv * 2
    eq = compare(both, sv * 2)
    out.append(IdentityCheck(
        "all-same-is-twice-all-heads",
        TruthValue.true(truth.cofinite(1, "P(all same) = 2 * P(all heads)")),
        "exact: the doubled value is the all-same probability",
        eq.truth_of("equal"),
        "floor-exact: doubling is exact scalar arithmetic",
        scalar(2),
    ))
    return out


# --------------------------------------------------------------------------
# guarantees


def check_positive_infinitesimal(p: HazardProcess) -> tuple[TruthValue, str]:
    """survivalAtOmega is infinitesimal and determinately positive."""
    v = survival_at_omega(p)
    infin = is_infinitesimal(v)
    pos = compare(v, 0).truth_of("greater")
    if infin.kind == "true" and pos.kind == "true":
        return TruthValue.true(infin.certificate), "positive infinitesimal"
    return TruthValue.false(None), "infinitesimal=%s positive=%s" % (infin, pos)
