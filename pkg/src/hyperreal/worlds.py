"""Utility spread over infinite space, valued by expanding-shell integration.

A world is a radial average utility density together with a reference
geometry (cube or sphere); its value is the hyperreal integral of density
times the shell surface factor from 0 out to w, plus any finite point
deltas.  Normalizing by the unit reference volume makes the two geometries
agree (constant density rho gives rho*w^3 either way), and dividing by w^3
gives a spatial average that finite changes nudge by infinitesimals.

A privileged origin is assumed; that is a documented model limitation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .scalar import ExactScalar, scalar
from .core import SymbolicHyperreal, monomial
from .integrals import (
    Bound,
    FuncExpr,
    integrate,
    poly_integrand,
    poly_times,
    scale_integrand,
)
from .value import Hyperreal, PeriodicForm, RationalForm, as_hyperreal, omega

GEOMETRIES = ("cube", "sphere")


@dataclass(frozen=True)
class SpatialDensity:
    """Radial average density with a reference geometry and finite deltas."""

    geometry: str
    rho: FuncExpr
    deltas: tuple = ()  # ((radius, amount), ...)

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ValueError("geometry must be cube or sphere")

    def surface_integrand(self) -> FuncExpr:
        """density * surface factor: 24 r^2 for cubes, 4 pi r^2 for spheres
        (the derivative of the reference volume, by construction)."""
        shell = poly_times((0, 0, Fraction(4)), self.rho)
        if self.geometry == "cube":
            return poly_times((Fraction(6),), shell)
        return scale_integrand(ExactScalar.pi(), shell)

    def unit_volume(self) -> ExactScalar:
        if self.geometry == "cube":
            return scalar(8)
        return ExactScalar.pi() * Fraction(4, 3)


def world(geometry: str, rho: FuncExpr, deltas=()) -> SpatialDensity:
    return SpatialDensity(geometry, rho, tuple((Fraction(r), scalar(c)) for r, c in deltas))


def constant_world(geometry: str, rho, deltas=()) -> SpatialDensity:
    return world(geometry, poly_integrand(rho), deltas)


def shell_integral_value(d: SpatialDensity) -> Hyperreal:
    """Total utility: expanding-shell integral plus the exact finite deltas."""
    base = integrate(d.surface_integrand(), Bound.real(0), Bound.plus_omega())
    if not d.deltas:
        return base
    total = ExactScalar.rational(0)
    for _, amount in d.deltas:
        total = total + amount
    max_r = max(r for r, _ in d.deltas)

    def delta_gen(n: int):
        got = ExactScalar.rational(0)
        for r, amount in d.deltas:
            if r <= n:
                got = got + amount
        return got.as_fraction() if got.is_rational else got

    pcf = PeriodicForm.constant(
        RationalForm.of(SymbolicHyperreal.real(total)), threshold=int(max_r) + 1
    )
    bump = Hyperreal(generator=delta_gen, pcf=pcf)
    return base + bump


def normalized_value(d: SpatialDensity) -> Hyperreal:
    """Shell integral divided by the unit reference volume; geometry-free
    for constant densities."""
    return shell_integral_value(d) / as_hyperreal(d.unit_volume())


def spatial_average(d: SpatialDensity) -> Hyperreal:
    """Average utility across all space: normalized value / w^3."""
    return normalized_value(d) / omega().pow_rational(3)


def region_sequence_value(v: Callable[[int], Fraction]) -> Hyperreal:
    """Directly supplied region totals: the value carried by the sequence
    v(R_1), v(R_2), ... of utilities within radius n.  A polynomial closed
    form is recognized (and verified on 64 indices) when one fits."""
    def gen(n: int):
        return v(n)

    sym = _recognize_polynomial(v)
    if sym is not None:
        return Hyperreal(symbolic=sym, generator=gen)
    return Hyperreal(generator=gen)


def _recognize_polynomial(v, max_degree: int = 8):
    try:
        pts = [Fraction(v(n)) for n in range(1, max_degree + 3)]
    except Exception:
        return None
    # Newton forward differences: a polynomial of degree d has constant
    # d-th differences
    rows = [pts]
    while len(rows[-1]) > 1:
        last = rows[-1]
        rows.append([b - a for a, b in zip(last, last[1:])])
        if all(x == 0 for x in rows[-1]):
            break
    if not all(x == 0 for x in rows[-1]):
        return None
    degree = len(rows) - 2
    coeffs = _interpolate(list(range(1, degree + 2)), pts[: degree + 1])
    sym = SymbolicHyperreal.zero()
    for j, c in enumerate(coeffs):
        if c:
            sym = sym + SymbolicHyperreal.from_term(scalar(c), monomial(0, j, 0))
    for n in range(1, 65):
        if sym.eval_exact(n) != Fraction(v(n)):
            return None
    return sym


def _interpolate(xs, ys):
    table = list(ys)
    n = len(xs)
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            table[i] = (table[i] - table[i - 1]) / (xs[i] - xs[i - level])
    poly = [Fraction(0)] * n
    basis = [Fraction(1)]
    for k in range(n):
        for j, b in enumerate(basis):
            poly[j] += table[k] * b
        new = [Fraction(0)] * (len(basis) + 1)
        for j, b in enumerate(basis):
            new[j] -= b * xs[k]
            new[j + 1] += b
        basis = new
    return poly
