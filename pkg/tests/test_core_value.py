"""Hyperreal core semantics: order, atoms, classification, shadow."""

import math
import random
from fractions import Fraction

import pytest

from hyperreal.scalar import ExactScalar, scalar
from hyperreal.core import (
    GrowthMonomial,
    ScaleOverflow,
    SymbolicHyperreal as S,
    ceil_of,
    floor_of,
    monomial,
    osc_atom,
    arctan_tail_atom,
    expfloor_of,
)
from hyperreal.value import (
    Hyperreal,
    ShadowUndefined,
    Uncertified,
    as_hyperreal,
    classify,
    compare,
    eventual_sign,
    expand_pcf,
    from_real,
    is_finite,
    membership_case_split,
    omega,
    shadow,
)

W = S.omega()


def H(sym):
    return Hyperreal(symbolic=sym)


# --------------------------------------------------------------------------
# construction basics


def test_from_real_and_omega():
    assert from_real(0).symbolic.is_zero
    assert from_real(7).symbolic == S.real(7)
    assert compare(from_real(ExactScalar.pi()), omega()).outcome == "less"
    assert omega().element(5) == 5
    assert compare(omega() - omega(), 0).outcome == "equal"
    assert compare(omega() / 2, omega()).outcome == "less"


def test_canonical_sequence_reproduces_values():
    x = W * W / 2 + W / 2  # triangular numbers
    for n in range(1, 20):
        assert x.eval_exact(n) == Fraction(n * (n + 1), 2)
    y = S.real(1) - S.from_term(1, monomial(ExactScalar.log(Fraction(1, 2))))
    for n in range(1, 10):
        assert y.eval_exact(n) == 1 - Fraction(1, 2 ** n)


# --------------------------------------------------------------------------
# monomial order vs asymptotics


def test_monomial_order_matches_asymptotics_spot_checks():
    rng = random.Random(3)
    made = 0
    while made < 200:
        m1 = monomial(
            Fraction(rng.randint(-2, 2), rng.randint(1, 3)),
            Fraction(rng.randint(-4, 4), rng.randint(1, 3)),
            Fraction(rng.randint(-2, 2)),
        )
        m2 = monomial(
            Fraction(rng.randint(-2, 2), rng.randint(1, 3)),
            Fraction(rng.randint(-4, 4), rng.randint(1, 3)),
            Fraction(rng.randint(-2, 2)),
        )
        c = m1.cmp(m2)
        if c == 0:
            continue
        lo, hi = (m1, m2) if c < 0 else (m2, m1)
        # the smaller monomial's log-magnitude must fall below at 1e12
        assert lo.log_float(1e12) < hi.log_float(1e12) + 1e-6
        made += 1


def test_field_laws_random_atom_free():
    rng = random.Random(5)

    def rand_value():
        out = S.zero()
        for _ in range(rng.randint(1, 3)):
            mono = monomial(
                Fraction(0) if rng.random() < 0.7 else ExactScalar.log(2) * rng.randint(-1, 1),
                Fraction(rng.randint(-3, 3), rng.randint(1, 2)),
                Fraction(rng.randint(0, 1)),
            )
            out = out + S.from_term(Fraction(rng.randint(-5, 5), rng.randint(1, 4)), mono)
        return out

    for _ in range(250):
        a, b, c = rand_value(), rand_value(), rand_value()
        assert a + b == b + a
        assert (a + b) + c == a + (b + c)
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c


# --------------------------------------------------------------------------
# order soundness


def _check_order_certificate(x, y):
    got = compare(x, y)
    assert got.outcome in ("greater", "less")
    n0 = got.certificate.threshold
    if n0 > 10 ** 6:
        return  # astronomically late crossings are spot-checked elsewhere
    sign = 1 if got.outcome == "greater" else -1
    xs = x if isinstance(x, Hyperreal) else H(x)
    ys = y if isinstance(y, Hyperreal) else H(y)
    for n in range(n0, n0 + 1000):
        dx = xs.element(n)
        dy = ys.element(n)
        assert sign * (dx - dy) > 0, (n, dx, dy)


def test_order_soundness_certificates():
    _check_order_certificate(H(W * 2), H(W))
    _check_order_certificate(H(W), H(W - 5))
    _check_order_certificate(H(W * W - W * 100), H(W * 50))
    _check_order_certificate(H(W.pow_rational(Fraction(1, 2))), H(S.real(1000)))


def test_determinate_verdicts_on_goldens():
    assert compare(2 * omega(), omega()).outcome == "greater"
    lg = H(floor_of(S.from_term(ExactScalar.log(2).reciprocal(), monomial(0, 0, 1))))
    got = compare(lg, omega() * Fraction(1, 1000))
    assert got.outcome == "less"
    assert compare(lg, from_real(10 ** 9)).outcome == "greater"


# --------------------------------------------------------------------------
# atoms: floor / ceiling / oscillation


def test_floor_ceil_pair_rule():
    assert floor_of(W / 2) + ceil_of(W / 2) == W
    assert floor_of(W / 2) - floor_of(W / 2) == S.zero()
    assert ceil_of(W - W.pow_rational(Fraction(1, 2))) == W - floor_of(
        W.pow_rational(Fraction(1, 2))
    )


def test_floor_extraction_and_constant_folding():
    assert floor_of(W + 1) == W + 1
    assert floor_of(S.real(Fraction(7, 2))) == S.real(3)
    assert floor_of(S.real(ExactScalar.pi())) == S.real(3)
    got = floor_of(W / 2 + 3)
    assert got == floor_of(W / 2) + 3


def test_floor_sequences_exact():
    fl = floor_of(W / 2)
    for n in range(1, 50):
        assert fl.eval_exact(n) == n // 2
    sq = floor_of(W.pow_rational(Fraction(1, 2)))
    for n in range(1, 200):
        assert sq.eval_exact(n) == math.isqrt(n)
    lg = floor_of(S.from_term(ExactScalar.log(2).reciprocal(), monomial(0, 0, 1)))
    for n in range(1, 200):
        assert lg.eval_exact(n) == n.bit_length() - 1


def test_floor_half_indeterminate():
    got = compare(H(floor_of(W / 2)), H(W / 2))
    assert got.outcome == "indeterminate"
    assert set(got.candidates) == {"equal", "less"}
    assert got.certificate.modulus == 2


def test_floor_sqrt_indeterminate_with_attainment():
    sq = W.pow_rational(Fraction(1, 2))
    got = compare(H(floor_of(sq)), H(sq))
    assert got.outcome == "indeterminate"
    assert set(got.candidates) == {"equal", "less"}


def test_osc_enclosure_strict():
    v = H(W + 1 - osc_atom("cos", 1))
    assert compare(v, omega()).outcome == "greater"
    assert compare(v, omega() + 2).outcome == "less"
    mid = compare(v, omega() + 1)
    assert mid.outcome == "indeterminate"
    assert set(mid.candidates) == {"greater", "less"}


def test_osc_enclosure_soundness_to_horizon():
    v = H(W + 1 - osc_atom("cos", 1))
    lo, hi, lo_open, hi_open, thr = v.symbolic.enclosure()
    assert lo == W and hi == W + 2
    for n in range(1, 10_001):
        e = v.element(n)
        assert n < e < n + 2


def test_expfloor_value_and_enclosure():
    v = expfloor_of(Fraction(2), W / 2)  # 2^-floor(w/2)
    h = H(v)
    for n in range(1, 40):
        assert h.element(n) == Fraction(1, 2** (n // 2))
    assert classify(h) == "infinitesimal"
    assert compare(h, 0).outcome == "greater"


def test_atom_times_atom_overflows():
    with pytest.raises(ScaleOverflow):
        _ = floor_of(W / 2) * floor_of(W / 2)


# --------------------------------------------------------------------------
# classification and shadow


def test_classify_goldens():
    assert classify(omega()) == "infinite"
    assert classify(omega().reciprocal()) == "infinitesimal"
    assert classify(from_real(5)) == "finite"
    assert classify(from_real(0)) == "finite"
    assert classify(omega().pow_rational(Fraction(1, 2))) == "lesser-infinite"
    lg = H(floor_of(S.from_term(ExactScalar.log(2).reciprocal(), monomial(0, 0, 1))))
    assert classify(lg) == "lesser-infinite"
    assert is_finite(omega()).kind == "false"
    assert is_finite(from_real(3)).kind == "true"


def test_classify_uncertified_raw_sequence():
    raw = Hyperreal(generator=lambda n: Fraction(n % 3))
    with pytest.raises(Uncertified):
        classify(raw)


def test_shadow_goldens():
    two_pow = S.from_term(1, monomial(ExactScalar.log(Fraction(1, 2))))
    assert shadow(H(S.real(1) - two_pow)).symbolic == S.real(1)
    assert shadow(omega() + omega().reciprocal()).symbolic == W
    assert shadow((omega() - 1) / omega()).symbolic == S.real(1)
    assert shadow(H(floor_of(W / 2))).symbolic == floor_of(W / 2)


def test_shadow_idempotent_random():
    rng = random.Random(9)
    for _ in range(300):
        terms = S.zero()
        for _ in range(rng.randint(1, 4)):
            mono = monomial(0, Fraction(rng.randint(-3, 3), rng.randint(1, 2)), 0)
            terms = terms + S.from_term(Fraction(rng.randint(-9, 9)), mono)
        s1 = shadow(H(terms))
        s2 = shadow(s1)
        assert s1.symbolic == s2.symbolic


def test_shadow_of_tail_atom():
    # finite atom with infinitesimal width collapses to its standard part
    v = H(arctan_tail_atom(1))
    assert shadow(v).symbolic == S.real(ExactScalar.pi() / 2)


def test_shadow_undefined_for_real_width_atom():
    with pytest.raises(ShadowUndefined):
        shadow(H(osc_atom("cos", 1)))


def test_shadow_minus_value_is_infinitesimal():
    vals = [
        H(S.real(1) - S.from_term(1, monomial(ExactScalar.log(Fraction(1, 2))))),
        (omega() - 1) / omega(),
        H(S.real(Fraction(5, 3)) + S.from_term(3, monomial(0, -2, 0))),
    ]
    for v in vals:
        d = shadow(v) - v
        got = classify(d)
        assert got in ("infinitesimal", "finite")
        if got == "finite":
            assert compare(d, 0).outcome == "equal"


# --------------------------------------------------------------------------
# reciprocal preconditions


def test_reciprocal_of_possibly_zero_rejected():
    osc = H(osc_atom("cos", 1))
    with pytest.raises(ZeroDivisionError):
        from_real(1) / H(floor_of(W / 2) - W / 2 + Fraction(0))
    with pytest.raises(ZeroDivisionError):
        from_real(0).reciprocal()


def test_certificates_machine_checkable():
    got = compare(2 * omega(), omega())
    n0 = got.certificate.threshold
    for n in range(n0, n0 + 100):
        assert 2 * n > n
    ind = compare(H(floor_of(W / 2)), H(W / 2))
    m = ind.certificate.modulus
    assert m == 2
    fl = floor_of(W / 2)
    for n in range(1, 200):
        if n % 2 == 0:
            assert fl.eval_exact(n) == Fraction(n, 2)
        else:
            assert fl.eval_exact(n) < Fraction(n, 2)
