"""Hyperreal expectations for distributions whose means standardly diverge.

The expected value walks utility levels in increasing order and sums each
level's contribution u * P(u) out to the bound w; the ordering is part of
the contract, since other arrangements (like grouping by the number of
successful flips) reach different, incompatible values.  A quantile-based
expectation integrates the distribution's quantile function over
probability 0..1 with the singular upper endpoint read as 1 - 1/w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .scalar import ExactScalar, scalar
from .core import SymbolicHyperreal, floor_of, monomial
from .intsets import geometric_image
from .series import (
    SeriesExpr,
    generator_term,
    geometric_term,
    indicator_term,
    sum_to_infinity,
)
from .integrals import integrate_symmetric, over_one_plus_x2, scale_integrand
from .value import (
    Enclosure,
    Hyperreal,
    PeriodicForm,
    RationalForm,
    as_hyperreal,
    omega,
)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Distribution over nonnegative integer utility levels.

    kinds:
      table        -- finite support {utility: probability}
      stpetersburg -- P(2^k) = 2^-k for k >= 1; total probability 1
      power-levels -- P(k) = ratio^k for k >= 1 (ratio in (0,1)); the total
                      is 1 - ratio^w/(1-ratio)-style: short of 1 by an
                      infinitesimal when ratio = 1/2, documented rather than
                      normalized away
    """

    kind: str
    table: tuple = ()
    ratio: Fraction | None = None

    def __post_init__(self):
        if self.kind == "table":
            total = Fraction(0)
            for u, p in self.table:
                if p < 0 or u < 0:
                    raise ValueError("negative utility level or probability")
                total += p
            if total > 1:
                raise ValueError("probabilities sum beyond 1")
        if self.kind == "power-levels" and not (0 < self.ratio < 1):
            raise ValueError("power-levels ratio must lie in (0,1)")

    def prob(self, u: int) -> Fraction:
        if u < 0:
            return Fraction(0)
        if self.kind == "table":
            for lvl, p in self.table:
                if lvl == u:
                    return p
            return Fraction(0)
        if self.kind == "stpetersburg":
            if u >= 2 and (u & (u - 1)) == 0:
                return Fraction(1, u)
            return Fraction(0)
        if self.kind == "power-levels":
            return self.ratio ** u if u >= 1 else Fraction(0)
        raise AssertionError(self.kind)

    def sorted_support(self) -> list[tuple[int, Fraction]]:
        if self.kind == "table":
            return sorted((int(u), p) for u, p in self.table if p > 0)
        raise ValueError("infinite support")

    @property
    def total_probability_note(self) -> str:
        if self.kind == "stpetersburg":
            return "sums to 1 - 2^-w along levels (infinitesimally short of 1)"
        if self.kind == "power-levels":
            r = self.ratio
            return "sums to %s * (1 - %s^w)" % (r / (1 - r), r)
        return "sums to %s" % sum((p for _, p in self.table), Fraction(0))


def table_distribution(table: dict) -> DiscreteDistribution:
    return DiscreteDistribution(
        "table", table=tuple(sorted((int(u), Fraction(p)) for u, p in table.items()))
    )


def st_petersburg() -> DiscreteDistribution:
    return DiscreteDistribution("stpetersburg")


def power_level_distribution(ratio) -> DiscreteDistribution:
    return DiscreteDistribution("power-levels", ratio=Fraction(ratio))


# --------------------------------------------------------------------------
# expected value by utility levels


def level_series(d: DiscreteDistribution) -> SeriesExpr:
    """Summand u * P(u) walked in increasing utility-level order."""
    if d.kind == "stpetersburg":
        # u * P(u) = 1 exactly on the powers of two
        return indicator_term(geometric_image(2, start=1))
    if d.kind == "power-levels":
        return geometric_term(d.ratio, 0, 1)
    support = dict(d.sorted_support())

    def fn(i: int) -> Fraction:
        return Fraction(i) * support.get(i, Fraction(0))

    return generator_term(fn, "levels of finite table")


def expected_value_by_levels(d: DiscreteDistribution) -> Hyperreal:
    series = level_series(d)
    if d.kind == "table":
        support = d.sorted_support()
        ev = sum((Fraction(u) * p for u, p in support), Fraction(0))
        top = max((u for u, _ in support), default=0)

        def gen(n: int) -> Fraction:
            return sum(
                (Fraction(u) * p for u, p in support if u <= n), Fraction(0)
            )

        pcf = PeriodicForm.constant(
            RationalForm.of(SymbolicHyperreal.real(scalar(ev))), threshold=top + 1
        )
        return Hyperreal(generator=gen, pcf=pcf)
    return sum_to_infinity(series)


def flip_count_contribution_value(d: DiscreteDistribution) -> Hyperreal:
    """The incompatible arrangement: summing the St Petersburg EV by number
    of successful flips gives 1 + 1 + ... = w, not floor(log2(w)).  Exposed
    as a documented counter-example to reordering the contributions."""
    if d.kind != "stpetersburg":
        raise ValueError("flip-count decomposition is a St Petersburg construction")
    from .series import const_term

    return sum_to_infinity(const_term(1))


def scale_by_probability(p, v) -> Hyperreal:
    """p * v for an exact probability p in (0, 1]."""
    p = Fraction(p)
    if not (0 < p <= 1):
        raise ValueError("probability must lie in (0, 1]")
    return as_hyperreal(v) * p


def pascal_value(k, p) -> Hyperreal:
    """EV of probability p at a stake worth k*w."""
    k = scalar(k) if not isinstance(k, ExactScalar) else k
    p = Fraction(p)
    if k.sign() <= 0:
        raise ValueError("stake multiplier must be positive")
    if not (0 < p <= 1):
        raise ValueError("probability must lie in (0, 1]")
    return omega() * k * p


def hierarchy_value(k) -> Hyperreal:
    """w^k for 0 < k < 1: the dense hierarchy of lesser-infinite EVs."""
    k = Fraction(k)
    if not (0 < k < 1):
        raise ValueError("hierarchy exponent must lie strictly between 0 and 1")
    return omega().pow_rational(k)


# --------------------------------------------------------------------------
# Cauchy moments


def cauchy_density():
    """Density 1/(pi (1+x^2)) as an integrand."""
    return scale_integrand(ExactScalar.pi().reciprocal(), over_one_plus_x2(1))


def moments_of_cauchy() -> tuple[Hyperreal, Hyperreal]:
    """(mean, variance) of the Cauchy distribution over the symmetric
    two-sided bound -w..w: mean exactly 0, variance 2w/pi - (2/pi)arctan(w)
    whose finite part shadows to -1."""
    inv_pi = ExactScalar.pi().reciprocal()
    mean = integrate_symmetric(scale_integrand(inv_pi, over_one_plus_x2(0, 1)))
    variance = integrate_symmetric(scale_integrand(inv_pi, over_one_plus_x2(0, 0, 1)))
    return mean, variance


# --------------------------------------------------------------------------
# expected value by quantiles


def quantile_function(d: DiscreteDistribution):
    """Step quantile Q(p) = least utility u with CDF(u) >= p."""
    if d.kind == "table":
        support = d.sorted_support()

        def q(p: Fraction):
            cum = Fraction(0)
            for u, pr in support:
                cum += pr
                if cum >= p:
                    return Fraction(u)
            return Fraction(support[-1][0]) if support else Fraction(0)

        return q
    if d.kind == "stpetersburg":
        def q(p: Fraction):
            # CDF(2^k) = 1 - 2^-k
            k = 1
            while 1 - Fraction(1, 2 ** k) < p:
                k += 1
            return Fraction(2 ** k)

        return q
    raise ValueError("no quantile derivation for %s" % d.kind)


def _quantile_integral_element(d: DiscreteDistribution, n: int) -> Fraction:
    """Exact integral of the quantile step function over [0, 1 - 1/n]."""
    t = 1 - Fraction(1, n)
    total = Fraction(0)
    cum = Fraction(0)
    if d.kind == "table":
        steps = d.sorted_support()
        for u, p in steps:
            lo, hi = cum, cum + p
            cum = hi
            width = min(hi, t) - lo
            if width > 0:
                total += Fraction(u) * width
            if hi >= t:
                break
        return total
    if d.kind == "stpetersburg":
        k = 1
        while True:
            lo = 1 - Fraction(1, 2 ** (k - 1))
            hi = 1 - Fraction(1, 2 ** k)
            width = min(hi, t) - lo
            if width > 0:
                total += Fraction(2 ** k) * width
            if hi >= t:
                return total
            k += 1
    raise ValueError("no quantile derivation for %s" % d.kind)


def expected_value_by_quantile(d: DiscreteDistribution) -> Hyperreal:
    """Integral of the quantile function over probability 0..1 with the
    singular endpoint 1 read as 1 - 1/w."""
    def gen(n: int) -> Fraction:
        return _quantile_integral_element(d, n)

    if d.kind == "table":
        support = d.sorted_support()
        if not support:
            return as_hyperreal(0)
        ev = sum((Fraction(u) * p for u, p in support), Fraction(0))
        u_top, p_top = support[-1]
        # once 1/n <= p_top, the cut lies in the top step:
        # integral = EV - u_top/n exactly
        sym = SymbolicHyperreal.real(scalar(ev)) - SymbolicHyperreal.from_term(
            scalar(u_top), monomial(0, -1, 0)
        )
        thr = int(math.ceil(1 / p_top))
        pcf = PeriodicForm.constant(RationalForm.of(sym), threshold=max(1, thr))
        from .render import render_symbolic

        return Hyperreal(generator=gen, pcf=pcf, display_hint=render_symbolic(sym))
    if d.kind == "stpetersburg":
        # element n lies in [floor(log2 n), floor(log2 n) + 1): see the
        # exact element formula m + 2 - 2^(m+1)/n with 2^m <= n < 2^(m+1)
        lg = floor_of(
            SymbolicHyperreal.from_term(ExactScalar.log(2).reciprocal(), monomial(0, 0, 1))
        )
        encl = Enclosure(lo=lg, hi=lg + 1, lo_open=False, hi_open=True, threshold=1)
        return Hyperreal(generator=gen, enclosure=encl)
    raise ValueError("no quantile derivation for %s" % d.kind)
