"""Structured integer sets and their hyperreal sizes.

A set expression pairs a structural description (finite set, arithmetic
progression, power/geometric image, boolean combination, complement within
the positives) with the membership predicate it induces.  Its *numerosity*
is the hyperreal carried by the counting sequence n -> |X ∩ [1, n]| (or
|X ∩ [-n, n]| for the all-integers span), with an exact closed form
attached whenever the structure supports one.

Constructors audit structure against predicate on an index prefix
(AUDIT_DEPTH, default 10^4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .scalar import ExactScalar, scalar
from .core import LOG_MON, SymbolicHyperreal, ceil_of, floor_of
from .truth import TruthValue
from . import truth
from .value import (
    DEFAULT_HORIZON,
    Hyperreal,
    PeriodicForm,
    RationalForm,
    compare,
    expand_pcf,
)

AUDIT_DEPTH = 10_000

SYM_OMEGA = SymbolicHyperreal.omega()


class OverlapError(ValueError):
    """Parts passed as a partition overlap."""


@dataclass(frozen=True)
class IntegerSetExpr:
    """Structural description of a set of integers (positive span unless
    kind == "all-integers")."""

    kind: str
    a: int = 0
    d: int = 0
    power: int = 0
    base: int = 0
    start: int = 0
    elements: frozenset = frozenset()
    left: Optional["IntegerSetExpr"] = None
    right: Optional["IntegerSetExpr"] = None

    @property
    def span(self) -> str:
        return "all-integers" if self.kind == "all-integers" else "positives"

    # ---- membership ---------------------------------------------------------

    def contains(self, i: int) -> bool:
        k = self.kind
        if k == "all-integers":
            return True
        if i < 1:
            return False
        if k == "positives":
            return True
        if k == "empty":
            return False
        if k == "finite":
            return i in self.elements
        if k == "ap":
            return i >= self.a and (i - self.a) % self.d == 0
        if k == "power-image":
            r = round(i ** (1.0 / self.power))
            return any((r + t) >= 1 and (r + t) ** self.power == i for t in (-1, 0, 1))
        if k == "geom-image":
            v = self.base ** self.start
            while v < i:
                v *= self.base
            return v == i
        if k == "union":
            return self.left.contains(i) or self.right.contains(i)
        if k == "inter":
            return self.left.contains(i) and self.right.contains(i)
        if k == "diff":
            return self.left.contains(i) and not self.right.contains(i)
        if k == "complement":
            return not self.left.contains(i)
        raise AssertionError(k)

    # ---- exact counting -------------------------------------------------------

    def count_to(self, n: int) -> int:
        """|X ∩ [1, n]| exactly (|X ∩ [-n, n]| for the all-integers span)."""
        if n < 1:
            return 0
        k = self.kind
        if k == "all-integers":
            return 2 * n + 1
        if k == "positives":
            return n
        if k == "empty":
            return 0
        if k == "finite":
            return sum(1 for e in self.elements if 1 <= e <= n)
        if k == "ap":
            return 0 if n < self.a else (n - self.a) // self.d + 1
        if k == "power-image":
            # largest k >= 1 with k^power <= n
            r = int(n ** (1.0 / self.power))
            while (r + 1) ** self.power <= n:
                r += 1
            while r >= 1 and r ** self.power > n:
                r -= 1
            return max(0, r)
        if k == "geom-image":
            count, v = 0, self.base ** self.start
            while v <= n:
                count += 1
                v *= self.base
            return count
        if k == "union":
            return (
                self.left.count_to(n)
                + self.right.count_to(n)
                - intersect(self.left, self.right).count_to(n)
            )
        if k == "inter":
            got = _ap_intersection(self.left, self.right)
            if got is not None:
                return got.count_to(n)
            return self._scan_count(n)
        if k == "diff":
            return self.left.count_to(n) - intersect(self.left, self.right).count_to(n)
        if k == "complement":
            return n - self.left.count_to(n)
        raise AssertionError(k)

    def _scan_count(self, n: int) -> int:
        return sum(1 for i in range(1, n + 1) if self.contains(i))

    # ---- closed forms ------------------------------------------------------------

    def count_symbolic(self) -> tuple[SymbolicHyperreal, int] | None:
        """(symbolic counting form, threshold) when the structure permits;
        threshold 1 means exact at every index."""
        k = self.kind
        if k == "all-integers":
            return SYM_OMEGA * 2 + 1, 1
        if k == "positives":
            return SYM_OMEGA, 1
        if k == "empty":
            return SymbolicHyperreal.zero(), 1
        if k == "finite":
            total = len([e for e in self.elements if e >= 1])
            thr = max([e for e in self.elements if e >= 1], default=0) + 1
            return SymbolicHyperreal.real(total), thr
        if k == "ap":
            a, d = self.a, self.d
            if a % d == 0:
                sym = floor_of(SYM_OMEGA / d) - (a // d) + 1
            elif (a - 1) % d == 0:
                sym = ceil_of(SYM_OMEGA / d) - ((a - 1) // d)
            else:
                sym = floor_of((SYM_OMEGA - a) / d) + 1
            return sym, max(1, a - d + 1)
        if k == "power-image":
            return floor_of(SYM_OMEGA.pow_rational(Fraction(1, self.power))), 1
        if k == "geom-image":
            log_base = SymbolicHyperreal.from_term(
                ExactScalar.log(self.base).reciprocal(), LOG_MON
            )
            return floor_of(log_base) + (1 - self.start), 1
        if k == "inter":
            got = _ap_intersection(self.left, self.right)
            if got is not None and got is not self:
                return got.count_symbolic()
            return None
        if k == "union":
            lg = self.left.count_symbolic()
            rg = self.right.count_symbolic()
            ig = intersect(self.left, self.right).count_symbolic()
            if lg and rg and ig:
                return lg[0] + rg[0] - ig[0], max(lg[1], rg[1], ig[1])
            return None
        if k == "diff":
            lg = self.left.count_symbolic()
            ig = intersect(self.left, self.right).count_symbolic()
            if lg and ig:
                return lg[0] - ig[0], max(lg[1], ig[1])
            return None
        if k == "complement":
            lg = self.left.count_symbolic()
            if lg:
                return SYM_OMEGA - lg[0], lg[1]
            return None
        return None

    def __repr__(self) -> str:
        return "IntegerSetExpr(%s)" % describe_set(self)


def describe_set(x: IntegerSetExpr) -> str:
    k = x.kind
    if k == "ap":
        if (x.a, x.d) == (2, 2):
            return "evens"
        if (x.a, x.d) == (1, 2):
            return "odds"
        return "ap %d %d" % (x.a, x.d)
    if k == "power-image":
        return "squares" if x.power == 2 else "powers %d" % x.power
    if k == "geom-image":
        return "geometric %d from %d" % (x.base, x.start)
    if k == "finite":
        return "finite{%s}" % ",".join(str(e) for e in sorted(x.elements))
    if k in ("union", "inter", "diff"):
        return "%s(%s, %s)" % (k, describe_set(x.left), describe_set(x.right))
    if k == "complement":
        return "complement(%s)" % describe_set(x.left)
    return k


# --------------------------------------------------------------------------
# constructors (with construction-time audit)


def _audited(x: IntegerSetExpr, depth: int | None = None) -> IntegerSetExpr:
    depth = AUDIT_DEPTH if depth is None else depth
    sym = x.count_symbolic()
    if sym is not None:
        form, thr = sym
        running = 0
        limit = min(depth, 2000) if x.kind in ("union", "inter", "diff") else depth
        for n in range(1, limit + 1):
            running += 1 if x.contains(n) else 0
            if n >= thr:
                v = form.eval_exact(n)
                if v is not None and v != running:
                    raise ValueError(
                        "structure/predicate mismatch for %s at n=%d: %s != %s"
                        % (describe_set(x), n, v, running)
                    )
    return x


def finite_set(elements) -> IntegerSetExpr:
    els = frozenset(int(e) for e in elements)
    if not els:
        return IntegerSetExpr("empty")
    return _audited(IntegerSetExpr("finite", elements=els))


def empty_set() -> IntegerSetExpr:
    return IntegerSetExpr("empty")


def positives() -> IntegerSetExpr:
    return IntegerSetExpr("positives")


def all_integers() -> IntegerSetExpr:
    return IntegerSetExpr("all-integers")


def arithmetic(a: int, d: int) -> IntegerSetExpr:
    if d < 1 or a < 1:
        raise ValueError("arithmetic progression needs a >= 1, d >= 1")
    return _audited(IntegerSetExpr("ap", a=a, d=d))


def evens() -> IntegerSetExpr:
    return arithmetic(2, 2)


def odds() -> IntegerSetExpr:
    return arithmetic(1, 2)


def squares() -> IntegerSetExpr:
    return power_image(2)


def power_image(power: int) -> IntegerSetExpr:
    if power < 2:
        raise ValueError("power image needs exponent >= 2 (use arithmetic for linear)")
    return _audited(IntegerSetExpr("power-image", power=power))


def geometric_image(base: int, start: int = 1) -> IntegerSetExpr:
    if base < 2 or start < 0:
        raise ValueError("geometric image needs base >= 2, start >= 0")
    return _audited(IntegerSetExpr("geom-image", base=base, start=start))


def union(x: IntegerSetExpr, y: IntegerSetExpr) -> IntegerSetExpr:
    return _audited(IntegerSetExpr("union", left=x, right=y))


def intersect(x: IntegerSetExpr, y: IntegerSetExpr) -> IntegerSetExpr:
    got = _ap_intersection_nodes(x, y)
    if got is not None:
        return got
    return IntegerSetExpr("inter", left=x, right=y)


def difference(x: IntegerSetExpr, y: IntegerSetExpr) -> IntegerSetExpr:
    return _audited(IntegerSetExpr("diff", left=x, right=y))


def complement(x: IntegerSetExpr) -> IntegerSetExpr:
    return _audited(IntegerSetExpr("complement", left=x))


def _ap_intersection_nodes(x: IntegerSetExpr, y: IntegerSetExpr) -> IntegerSetExpr | None:
    if x.kind == "positives":
        return y if y.span == "positives" else None
    if y.kind == "positives":
        return x if x.span == "positives" else None
    if x.kind == "finite" or y.kind == "finite":
        fin, other = (x, y) if x.kind == "finite" else (y, x)
        kept = frozenset(e for e in fin.elements if other.contains(e))
        return finite_set(kept) if kept else IntegerSetExpr("empty")
    if "empty" in (x.kind, y.kind):
        return IntegerSetExpr("empty")
    if x.kind == "ap" and y.kind == "ap":
        return _crt_ap(x, y)
    return None


def _ap_intersection(x: IntegerSetExpr, y: IntegerSetExpr) -> IntegerSetExpr | None:
    return _ap_intersection_nodes(x, y)


def _crt_ap(x: IntegerSetExpr, y: IntegerSetExpr) -> IntegerSetExpr:
    g = math.gcd(x.d, y.d)
    if (y.a - x.a) % g != 0:
        return IntegerSetExpr("empty")
    lcm = x.d // g * y.d
    # find the least common element by stepping the sparser progression
    v = max(x.a, y.a)
    v += (-(v - x.a)) % x.d
    while (v - y.a) % y.d != 0:
        v += x.d
    return IntegerSetExpr("ap", a=v, d=lcm)


# --------------------------------------------------------------------------
# numerosity, proportion, partition additivity


def numerosity(x: IntegerSetExpr) -> Hyperreal:
    """Hyperreal size: the counting sequence with its closed form attached."""
    cache: dict[int, int] = {0: 0}

    def gen(n: int):
        got = cache.get(n)
        if got is None:
            base = max(k for k in cache if k <= n)
            running = cache[base]
            if x.kind in ("ap", "power-image", "geom-image", "finite", "positives",
                          "all-integers", "empty", "complement", "diff", "union"):
                running = x.count_to(n)
            else:
                for i in range(base + 1, n + 1):
                    running += 1 if x.contains(i) else 0
            cache[n] = running
            got = running
        return Fraction(got)

    sym = x.count_symbolic()
    if sym is None:
        return Hyperreal(generator=gen)
    form, thr = sym
    if thr <= 1:
        return Hyperreal(symbolic=form, generator=gen)
    pcf = expand_pcf(form)
    pcf = PeriodicForm(pcf.modulus, pcf.classes, max(pcf.threshold, thr))
    from .render import render_symbolic

    return Hyperreal(generator=gen, pcf=pcf, display_hint=render_symbolic(form))


def proportion(x: IntegerSetExpr, y: IntegerSetExpr) -> Hyperreal:
    """numerosity(x ∩ y) / numerosity(y)."""
    ny = numerosity(y)
    zero = compare(ny, 0)
    if zero.outcome == "equal":
        raise ZeroDivisionError("proportion within an empty set")
    return numerosity(intersect(x, y)) / ny


def structurally_disjoint(x: IntegerSetExpr, y: IntegerSetExpr) -> bool:
    """Certified disjointness (sound, incomplete)."""
    if "empty" in (x.kind, y.kind):
        return True
    if x.kind == "finite":
        return all(not y.contains(e) for e in x.elements)
    if y.kind == "finite":
        return all(not x.contains(e) for e in y.elements)
    if x.kind == "ap" and y.kind == "ap":
        return _crt_ap(x, y).kind == "empty"
    if y.kind == "complement" and y.left == x:
        return True
    if x.kind == "complement" and x.left == y:
        return True
    if y.kind == "diff" and y.right == x:
        return True
    if x.kind == "diff" and x.right == y:
        return True
    if x.kind == "diff" and structurally_disjoint(x.left, y):
        return True
    if y.kind == "diff" and structurally_disjoint(y.left, x):
        return True
    return False


def _structural_cover(parts: list[IntegerSetExpr], whole: IntegerSetExpr) -> bool:
    """Certified: the disjoint union of parts is exactly the whole."""
    parts = [p for p in parts if p.kind != "empty"]
    if len(parts) == 1:
        return parts[0] == whole
    if len(parts) == 2:
        a, b = parts
        if whole.kind == "positives":
            if b.kind == "complement" and b.left == a:
                return True
            if a.kind == "complement" and a.left == b:
                return True
        if b.kind == "diff" and b.left == whole and b.right == a:
            return True
        if a.kind == "diff" and a.left == whole and a.right == b:
            return True
    if all(p.kind == "ap" for p in parts) and whole.kind in ("positives", "ap"):
        d = parts[0].d
        if all(p.d == d for p in parts) and len(parts) >= 1:
            residues = sorted(p.a for p in parts)
            if whole.kind == "positives" and residues == list(range(1, d + 1)):
                return True
            if whole.kind == "ap":
                covered = sorted((p.a - whole.a) % whole.d for p in parts if p.d == d)
                if d % whole.d == 0 and covered == list(
                    range(0, d, whole.d))[: len(parts)] and len(parts) == d // whole.d:
                    return all((p.a - whole.a) % whole.d == 0 for p in parts)
    return False


def verify_partition_additivity(
    parts: list[IntegerSetExpr],
    whole: IntegerSetExpr,
    horizon: int = AUDIT_DEPTH,
) -> TruthValue:
    """Determinately-true when the counting identity sum(parts) == whole is
    certified to hold at every index."""
    for i, p in enumerate(parts):
        for q in parts[i + 1:]:
            if not structurally_disjoint(p, q):
                for n in range(1, horizon + 1):
                    if p.contains(n) and q.contains(n):
                        raise OverlapError(
                            "parts overlap at %d: %s vs %s"
                            % (n, describe_set(p), describe_set(q))
                        )
                return TruthValue.unknown(horizon)
    counts = [numerosity(p) for p in parts]
    total = counts[0]
    for c in counts[1:]:
        total = total + c
    whole_count = numerosity(whole)
    eq = compare(total, whole_count, horizon)
    if eq.outcome == "equal":
        return TruthValue.true(eq.certificate)
    if eq.is_determinate or eq.outcome == "indeterminate":
        return TruthValue.false(eq.certificate)
    # no symbolic route: certify structurally, audit element-wise
    if _structural_cover(list(parts), whole):
        for n in range(1, min(horizon, 2000) + 1):
            if sum(p.count_to(n) for p in parts) != whole.count_to(n):
                return TruthValue.false(truth.finite_support(n, "count mismatch"))
        return TruthValue.true(
            truth.cofinite(1, "structural partition; element-wise identity")
        )
    for n in range(1, min(horizon, 2000) + 1):
        if sum(p.count_to(n) for p in parts) != whole.count_to(n):
            return TruthValue.false(truth.finite_support(n, "count mismatch"))
    return TruthValue.unknown(horizon)
