"""Canonical text and JSON rendering of hyperreal values.

Plain text uses "w" for the canonical infinite bound (a flag switches to
the Greek letter), with terms in decreasing scale order: "w^2/2 + w/2",
"1 - 2^-w", "floor(w/2)", "2*log(w)".  Rendering is deterministic, so
golden tests can compare byte-for-byte.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .scalar import ExactScalar, render_scalar
from .core import Atom, AtomTerm, GrowthMonomial, SymbolicHyperreal, UNIT
from .value import Hyperreal, RationalForm


def _frac_text(q: Fraction) -> str:
    return str(q)


def _exp_coeff_texts(c: ExactScalar, w: str) -> str | None:
    """Text for the factor e^(c*w), preferring base^exponent sugar."""
    r = c.as_log_rational()
    if r is not None:
        if r.numerator == 1 and r.denominator > 1:
            return "%d^-%s" % (r.denominator, w)
        if r.denominator == 1:
            return "%d^%s" % (r.numerator, w)
        return "(%s)^%s" % (r, w)
    # q * log(p): base-p power with scaled exponent
    terms = c._terms
    if len(terms) == 1:
        ((mono, q),) = terms.items()
        if len(mono) == 1 and mono[0][0][0] == "log" and mono[0][1] == 1:
            p = mono[0][0][1]
            return "%d^(%s)" % (p, _scaled_w(q, w))
    if c.is_rational:
        return "e^(%s)" % _scaled_w(c.as_fraction(), w)
    return "e^((%s)*%s)" % (render_scalar(c), w)


def _scaled_w(q: Fraction, w: str) -> str:
    sign = "-" if q < 0 else ""
    q = abs(q)
    if q == 1:
        return sign + w
    if q.numerator == 1:
        return "%s%s/%d" % (sign, w, q.denominator)
    if q.denominator == 1:
        return "%s%d*%s" % (sign, q.numerator, w)
    return "%s%d*%s/%d" % (sign, q.numerator, w, q.denominator)


def _power_text(base: str, p: ExactScalar) -> str | None:
    if p.is_zero:
        return None
    f = p.as_fraction() if p.is_rational else None
    if f == 1:
        return base
    if f is not None and f.denominator == 1:
        return "%s^%d" % (base, f.numerator)
    if f is not None:
        return "%s^(%s)" % (base, f)
    return "%s^(%s)" % (base, render_scalar(p))


def _mono_factors(mono: GrowthMonomial, w: str) -> list[str]:
    out = []
    if not mono.exp_rate.is_zero:
        out.append(_exp_coeff_texts(mono.exp_rate, w))
    t = _power_text(w, mono.power)
    if t:
        out.append(t)
    t = _power_text("log(%s)" % w, mono.log_power)
    if t:
        out.append(t)
    return out


def _atom_text(atom: Atom, w: str, ceil_view: bool) -> str:
    if atom.kind == "floor":
        arg = atom.argument
        if ceil_view:
            arg = -arg
        inner = _log_base_sugar(arg, w) or render_symbolic(arg, w)
        return ("ceil(%s)" if ceil_view else "floor(%s)") % inner
    if atom.kind == "expfloor":
        inner = render_symbolic(atom.argument, w)
        base = atom.base
        base_txt = str(base) if base.denominator == 1 else "(%s)" % base
        return "%s^-floor(%s)" % (base_txt, inner)
    if atom.kind == "osc":
        a, b = atom.affine
        return "%s(%s)" % (atom.func, _affine_text(a, b, w))
    if atom.kind == "tail":
        a, b = atom.affine
        return "arctan(%s)" % _affine_text(a, b, w)
    raise AssertionError(atom.kind)


def _log_base_sugar(arg: SymbolicHyperreal, w: str) -> str | None:
    """log(w)/log(p) displays as logp(w)."""
    if arg.atom_terms or len(arg.terms) != 1:
        return None
    ((mono, coeff),) = arg.terms.items()
    if not (mono.exp_rate.is_zero and mono.power.is_zero and mono.log_power == ExactScalar.rational(1)):
        return None
    terms = coeff._terms
    if len(terms) != 1:
        return None
    ((cmono, q),) = terms.items()
    if len(cmono) == 1 and cmono[0][0][0] == "log" and cmono[0][1] == -1 and q == 1:
        return None if False else "log%d(%s)" % (cmono[0][0][1], w)
    return None


def _affine_text(a: Fraction, b: Fraction, w: str) -> str:
    parts = []
    if a:
        parts.append(_scaled_w(a, w))
    if b or not a:
        if parts:
            parts.append(("+ %s" % b) if b > 0 else ("- %s" % (-b)))
        else:
            parts.append(str(b))
    return " ".join(parts)


def _term_text(coeff: ExactScalar, factors: list[str]) -> tuple[str, str]:
    """(sign, body) with the rational part folded as a leading/trailing
    fraction: (1/2, [w^2]) -> "w^2/2"."""
    sign = "-" if coeff.sign() < 0 else "+"
    c = abs(coeff)
    if c.is_rational:
        f = c.as_fraction()
        body_parts = []
        if f.numerator != 1 or not factors:
            body_parts.append(str(f.numerator))
        body_parts += factors
        body = "*".join(body_parts)
        if f.denominator != 1:
            body += "/%d" % f.denominator
        return sign, body
    ctext = render_scalar(c)
    if len(c._terms) > 1:
        ctext = "(%s)" % ctext
    return sign, "*".join([ctext] + factors) if factors else ctext


def render_symbolic(v: SymbolicHyperreal, w: str = "w") -> str:
    if v.is_zero:
        return "0"
    rendered: list[tuple[str, str]] = []
    for mono, coeff in v.sorted_terms():
        rendered.append(_term_text(coeff, _mono_factors(mono, w)))
    for t in v.atom_terms:
        ceil_view = False
        coeff = t.coeff
        if t.atom.kind == "floor":
            try:
                lead = t.atom.argument.leading()
            except Exception:
                lead = None
            if coeff.sign() < 0 and lead is not None and lead[1].sign() < 0:
                ceil_view = True
                coeff = -coeff
        factors = _mono_factors(t.monomial, w) + [_atom_text(t.atom, w, ceil_view)]
        rendered.append(_term_text(coeff, factors))
    sign0, body0 = rendered[0]
    out = ("-" if sign0 == "-" else "") + body0
    for sign, body in rendered[1:]:
        out += " %s %s" % (sign, body)
    return out


def render_form(form: RationalForm, w: str = "w") -> str:
    num = render_symbolic(form.num, w)
    if form.is_polynomial:
        return num
    den = render_symbolic(form.den, w)
    if len(form.num.terms) + len(form.num.atom_terms) > 1:
        num = "(%s)" % num
    return "%s/(%s)" % (num, den)


def render_value(h: Hyperreal, w: str = "w") -> str:
    if h.display_hint is not None:
        return h.display_hint
    if h.symbolic is not None:
        return render_symbolic(h.symbolic, w)
    pcf = h.effective_pcf()
    if pcf is not None:
        if pcf.modulus == 1:
            return render_form(pcf.classes[0], w)
        cases = ", ".join(
            "%d: %s" % (r, render_form(f, w)) for r, f in enumerate(pcf.classes)
        )
        return "cases(n mod %d){%s}" % (pcf.modulus, cases)
    encl = h.effective_enclosure()
    if encl is not None:
        return "sequence in %s%s, %s%s" % (
            "(" if encl.lo_open else "[",
            render_symbolic(encl.lo, w),
            render_symbolic(encl.hi, w),
            ")" if encl.hi_open else "]",
        )
    return "sequence(...)"


def determinacy_tag(h: Hyperreal) -> str:
    if h.symbolic is not None:
        return "exact" if not h.symbolic.atom_terms else "atom-bounded"
    if h.effective_pcf() is not None or h.effective_enclosure() is not None or h.link:
        return "certified"
    return "uncertified"


def _mono_json(mono: GrowthMonomial, coeff: ExactScalar) -> dict:
    return {
        "c": render_scalar(mono.exp_rate),
        "p": render_scalar(mono.power),
        "q": render_scalar(mono.log_power),
        "coeff": render_scalar(coeff),
    }


def value_json(h: Hyperreal, prefix: int = 0, w: str = "w") -> dict:
    out: dict = {
        "kind": h.variant,
        "determinacy": determinacy_tag(h),
        "text": render_value(h, w),
        "terms": [],
        "atoms": [],
    }
    if h.symbolic is not None:
        out["terms"] = [_mono_json(m, c) for m, c in h.symbolic.sorted_terms()]
        for t in h.symbolic.atom_terms:
            lo, hi, lo_open, hi_open, thr = t.atom.enclosure()
            out["atoms"].append(
                {
                    "kind": t.atom.kind,
                    "coeff": render_scalar(t.coeff),
                    "monomial": _mono_json(t.monomial, t.coeff),
                    "text": _atom_text(t.atom, w, False),
                    "enclosure": {
                        "lo": render_symbolic(lo, w),
                        "hi": render_symbolic(hi, w),
                        "lo_open": lo_open,
                        "hi_open": hi_open,
                    },
                }
            )
    encl = h.effective_enclosure()
    if h.symbolic is None and encl is not None:
        out["enclosure"] = {
            "lo": render_symbolic(encl.lo, w),
            "hi": render_symbolic(encl.hi, w),
            "lo_open": encl.lo_open,
            "hi_open": encl.hi_open,
        }
    if prefix:
        out["sequence_prefix"] = [
            str(v) if isinstance(v, Fraction) else v for v in h.prefix(prefix)
        ]
    return out


def value_json_text(h: Hyperreal, prefix: int = 0, w: str = "w") -> str:
    return json.dumps(value_json(h, prefix, w), indent=2, sort_keys=True)
