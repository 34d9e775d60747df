"""Infinite utility streams: hyperreal values, averages, and order audits.

A stream's value is the hyperfinite sum of its utilities out to w, so
doubling all utilities doubles the value, adding c to every period adds
c*w, and changing one period by c changes the value by exactly c.  The
determinate part of the induced order coincides with the overtaking
criterion; stream pairs whose partial sums cross cofinally come back
indeterminate, and raw-generator streams without certificates come back
unknown at the horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .scalar import ExactScalar, scalar
from .core import SymbolicHyperreal, floor_of, monomial
from .intsets import IntegerSetExpr, geometric_image
from .series import (
    SeriesExpr,
    const_term,
    generator_term,
    geometric_term,
    indicator_term,
    lin_comb,
    poly_term,
    sum_delta,
    sum_to_infinity,
)
from .truth import Certificate, Comparison, TruthValue
from . import truth
from .value import (
    DEFAULT_HORIZON,
    Enclosure,
    Hyperreal,
    compare,
    omega,
)


@dataclass(frozen=True)
class UtilityStream:
    """Stream of exact utilities: a base term (closed-form capable) plus a
    finite overlay of replacements, optionally delayed by k neutral periods."""

    base: SeriesExpr
    overlay: tuple = ()  # ((index, value), ...) replacements
    delay: int = 0
    label: str = ""

    def utility(self, i: int) -> Fraction:
        if i < 1:
            raise IndexError("stream times are 1-based")
        for idx, v in self.overlay:
            if idx == i:
                return v
        j = i - self.delay
        if j < 1:
            return Fraction(0)
        t = self.base.term(j)
        return t.as_fraction() if isinstance(t, ExactScalar) else t

    def with_overlay(self, changes: dict) -> "UtilityStream":
        merged = {idx: v for idx, v in self.overlay}
        merged.update({int(i): Fraction(v) for i, v in changes.items()})
        return UtilityStream(self.base, tuple(sorted(merged.items())), self.delay, self.label)

    def delayed(self, k: int = 1) -> "UtilityStream":
        if self.overlay:
            shifted = tuple((i + k, v) for i, v in self.overlay)
            return UtilityStream(self.base, shifted, self.delay + k, self.label)
        return UtilityStream(self.base, (), self.delay + k, self.label)


def constant_stream(c) -> UtilityStream:
    return UtilityStream(const_term(c), label="const %s" % c)


def arithmetic_stream(*coeffs) -> UtilityStream:
    """Utilities given by a polynomial in the time index."""
    return UtilityStream(poly_term(*coeffs), label="poly")


def geometric_stream(first, ratio) -> UtilityStream:
    """first, first*ratio, first*ratio^2, ...  (e.g. 1, 2, 4, ...)."""
    first, ratio = Fraction(first), Fraction(ratio)
    return UtilityStream(
        geometric_term(ratio, first / ratio), label="geom %s %s" % (first, ratio)
    )


def indicator_stream(x: IntegerSetExpr) -> UtilityStream:
    return UtilityStream(indicator_term(x), label="indicator")


def generator_stream(fn: Callable[[int], Fraction], label="generator") -> UtilityStream:
    return UtilityStream(generator_term(fn, label), label=label)


def scale_stream(s: UtilityStream, m) -> UtilityStream:
    m = Fraction(m)
    scaled_overlay = tuple((i, v * m) for i, v in s.overlay)
    return UtilityStream(lin_comb((m, s.base)), scaled_overlay, s.delay, s.label)


def add_constant(s: UtilityStream, c) -> UtilityStream:
    """Add c to every period (overlayed periods included)."""
    c = Fraction(c)
    if s.delay or s.overlay:
        return generator_stream(lambda i: s.utility(i) + c, label="shifted")
    return UtilityStream(lin_comb((1, s.base), (c, const_term(1))), (), 0, s.label)


# --------------------------------------------------------------------------
# valuation


def value_of(s: UtilityStream) -> Hyperreal:
    """Hyperreal sum of the stream's utilities."""
    base_sum = sum_to_infinity(s.base)
    if s.delay:
        base_sum = _delayed_value(s, base_sum)
    if not s.overlay:
        return base_sum
    deltas = {}
    for idx, v in s.overlay:
        j = idx - s.delay
        old = Fraction(0)
        if j >= 1:
            t = s.base.term(j)
            old = t.as_fraction() if isinstance(t, ExactScalar) else t
        deltas[idx] = Fraction(v) - old
    return _apply_deltas(base_sum, deltas)


def _apply_deltas(base_sum: Hyperreal, deltas: dict) -> Hyperreal:
    from .value import PeriodicForm, RationalForm

    deltas = {i: v for i, v in deltas.items() if v != 0}
    if not deltas:
        return base_sum
    total = sum(deltas.values(), Fraction(0))
    threshold = max(deltas) + 1

    def gen(n: int):
        bump = sum((v for i, v in deltas.items() if i <= n), Fraction(0))
        return base_sum.element(n) + bump

    pcf = base_sum.effective_pcf()
    if pcf is not None:
        shift = RationalForm.of(SymbolicHyperreal.real(scalar(total)))
        pcf = PeriodicForm(
            pcf.modulus,
            tuple(c.add(shift) for c in pcf.classes),
            max(pcf.threshold, threshold),
        )
    out = Hyperreal(generator=gen, pcf=pcf)
    return out.with_link(base_sum, scalar(total), threshold)


def _delayed_value(s: UtilityStream, base_sum: Hyperreal) -> Hyperreal:
    k = s.delay

    def gen(n: int):
        if n <= k:
            return Fraction(0)
        return base_sum.element(n - k)

    pcf = base_sum.effective_pcf()
    if pcf is not None:
        try:
            pcf = pcf.substitute_index_shift(k)
        except Exception:
            pcf = None
    return Hyperreal(generator=gen, pcf=pcf)


def average_of(s: UtilityStream) -> Hyperreal:
    """value / w: the hyperreal average utility per period."""
    return value_of(s) / omega()


# --------------------------------------------------------------------------
# order audits


def overtaking_compare(x: UtilityStream, y: UtilityStream, horizon: int = DEFAULT_HORIZON) -> Comparison:
    """Partial-sum dominance order; determinate verdicts carry the witness
    threshold T in their certificate."""
    return compare(value_of(x), value_of(y), horizon)


def audit_strong_pareto(x: UtilityStream, y: UtilityStream, horizon: int = DEFAULT_HORIZON) -> TruthValue:
    """When x >= y pointwise is certifiable (shared base with overlay-only
    differences, or a closed-form difference with certified sign), assert
    that the value comparison comes out determinately greater."""
    cert = _pointwise_geq(x, y, horizon)
    if cert is None:
        return TruthValue.unknown(horizon)
    weak, strict_seen = cert
    if not strict_seen:
        return TruthValue.unknown(horizon)
    cmpv = compare(value_of(x), value_of(y), horizon)
    if cmpv.outcome == "greater":
        return TruthValue.true(cmpv.certificate)
    if cmpv.outcome == "unknown":
        return TruthValue.unknown(horizon)
    return TruthValue.false(cmpv.certificate)


def _pointwise_geq(x: UtilityStream, y: UtilityStream, horizon: int):
    if x.base == y.base and x.delay == y.delay:
        strict = False
        for i in sorted(set(dict(x.overlay)) | set(dict(y.overlay))):
            if x.utility(i) < y.utility(i):
                return None
            if x.utility(i) > y.utility(i):
                strict = True
        return True, strict
    # closed-form difference with certified eventual sign, plus scanned prefix
    try:
        from .series import closed_form_partial_sum

        dser = lin_comb((1, x.base), (-1, y.base))
        strict = False
        limit = 512
        for i in range(1, limit + 1):
            if x.utility(i) < y.utility(i):
                return None
            if x.utility(i) > y.utility(i):
                strict = True
        got = closed_form_partial_sum(dser)
        if got is None:
            return None
        # nondecreasing certified partial sums => pointwise >= beyond audit
        diffs = [got.pcf.eval_exact(n) for n in range(max(got.exact_from, 2), 66)]
        if any(b is not None and a is not None and b < a for a, b in zip(diffs, diffs[1:])):
            return None
        return True, strict
    except Exception:
        return None


def audit_finite_anonymity(s: UtilityStream, permutation: dict) -> TruthValue:
    """Reordering finitely many periods leaves the value determinately
    unchanged; infinite-support permutations are rejected."""
    perm = {int(a): int(b) for a, b in permutation.items()}
    moved = {a for a, b in perm.items() if a != b}
    if not moved:
        return TruthValue.true(truth.cofinite(1, "identity permutation"))
    if set(perm.keys()) != set(perm.values()):
        raise ValueError("not a permutation: domain and image differ")
    if max(moved) > 10_000:
        raise ValueError("permutation support too large to certify as finite")
    permuted = s.with_overlay({a: s.utility(perm[a]) for a in perm})
    v0, v1 = value_of(s), value_of(permuted)
    threshold = max(moved) + 1
    got = compare(v1, v0)
    if got.outcome == "equal":
        return TruthValue.true(
            truth.cofinite(threshold, "partial sums identical beyond the moved block")
        )
    if got.outcome == "unknown":
        # certify directly: partial sums agree once all moved indices passed
        for n in range(threshold, threshold + 64):
            if v0.element(n) != v1.element(n):
                return TruthValue.false(truth.finite_support(n, "partial sums differ"))
        return TruthValue.true(
            truth.cofinite(threshold, "partial sums identical beyond the moved block")
        )
    return TruthValue.false(got.certificate)


# --------------------------------------------------------------------------
# the sparse-activity stream


def dyson_stream(active_length: int = 1) -> UtilityStream:
    """Utility 1 during the k-th activity block starting at time 2^k
    (k >= 0), 0 during the exponentially growing gaps."""
    if active_length < 1:
        raise ValueError("active_length must be positive")
    if active_length == 1:
        return UtilityStream(
            indicator_term(geometric_image(2, start=0)), label="dyson 1"
        )

    def active(i: int) -> Fraction:
        k = i.bit_length() - 1
        for kk in range(max(0, k - active_length.bit_length() - 1), k + 1):
            start = 2 ** kk
            if start <= i < start + active_length:
                return Fraction(1)
        return Fraction(0)

    return UtilityStream(generator_term(active, "dyson %d" % active_length),
                         label="dyson %d" % active_length)


def dyson_value(active_length: int = 1) -> Hyperreal:
    """Value of the sparse stream, with an enclosure certificate pinning it
    between floor(log2(w)) + 1 and active_length * (floor(log2(w)) + 1)."""
    s = dyson_stream(active_length)
    v = value_of(s)
    if active_length == 1:
        return v
    lg1 = floor_of(
        SymbolicHyperreal.from_term(ExactScalar.log(2).reciprocal(), monomial(0, 0, 1))
    ) + 1
    encl = Enclosure(lo=lg1, hi=lg1 * active_length, lo_open=False, hi_open=False)
    return Hyperreal(generator=v.element, enclosure=encl)
