"""Four-valued verdicts with machine-checkable certificates.

A claim about a hyperreal holds on a *large* set of indices.  Cofinite
witness sets lie in every free ultrafilter, finite ones in none, and
both-ways-infinite ones in some but not all; the three determinate verdicts
mirror that trichotomy exactly, and unknown(horizon) records that scanning
stopped without a certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Certificate:
    """Why a determinate or indeterminate verdict is safe to report."""

    kind: str
    #: index from which the witnessing behaviour holds everywhere
    threshold: int = 1
    #: modulus of a periodic case split, when kind == "partition"
    modulus: int | None = None
    #: per-residue outcome labels for partition certificates
    classes: tuple[str, ...] = ()
    note: str = ""

    def describe(self) -> str:
        if self.kind == "partition":
            body = ", ".join(
                "n=%d mod %d: %s" % (r, self.modulus, out)
                for r, out in enumerate(self.classes)
            )
            return "periodic case split (%s) from n=%d" % (body, self.threshold)
        text = "%s from n=%d" % (self.kind, self.threshold)
        return text + (" (%s)" % self.note if self.note else "")


def cofinite(threshold: int, note: str = "") -> Certificate:
    return Certificate("cofinite", threshold=threshold, note=note)


def finite_support(bound: int, note: str = "") -> Certificate:
    return Certificate("finite-support", threshold=bound, note=note)


def partition(modulus: int, classes: tuple[str, ...], threshold: int = 1) -> Certificate:
    return Certificate("partition", threshold=threshold, modulus=modulus, classes=classes)


def declared_oscillation(note: str) -> Certificate:
    return Certificate("declared-oscillation", note=note)


@dataclass(frozen=True)
class TruthValue:
    """determinately-true | determinately-false | indeterminate | unknown(h)."""

    kind: str  # "true" | "false" | "indeterminate" | "unknown"
    horizon: int | None = None
    certificate: Certificate | None = field(default=None, compare=False)

    @staticmethod
    def true(cert: Certificate | None = None) -> "TruthValue":
        return TruthValue("true", certificate=cert)

    @staticmethod
    def false(cert: Certificate | None = None) -> "TruthValue":
        return TruthValue("false", certificate=cert)

    @staticmethod
    def indeterminate(cert: Certificate | None = None) -> "TruthValue":
        return TruthValue("indeterminate", certificate=cert)

    @staticmethod
    def unknown(horizon: int) -> "TruthValue":
        return TruthValue("unknown", horizon=horizon)

    @property
    def is_determinate(self) -> bool:
        return self.kind in ("true", "false")

    def __bool__(self) -> bool:
        raise TypeError(
            "TruthValue is not a bool; test .kind explicitly (got %s)" % self.kind
        )

    def __str__(self) -> str:
        if self.kind == "true":
            return "determinately-true"
        if self.kind == "false":
            return "determinately-false"
        if self.kind == "unknown":
            return "unknown(horizon=%s)" % self.horizon
        return self.kind


#: the three order relations a comparison can settle on
RELATIONS = ("less", "equal", "greater")


@dataclass(frozen=True)
class Comparison:
    """Outcome of comparing two hyperreals.

    outcome is one of "less"/"equal"/"greater" (determinate, certified),
    "indeterminate" (relation depends on the ultrafilter; candidates lists
    the relations that occur on infinite index sets), or "unknown".
    """

    outcome: str
    candidates: tuple[str, ...] = ()
    certificate: Certificate | None = field(default=None, compare=False)
    horizon: int | None = None

    @property
    def is_determinate(self) -> bool:
        return self.outcome in RELATIONS

    def truth_of(self, relation: str) -> TruthValue:
        """TruthValue of the claim "x <relation> y" (relation may be a
        single relation or a set like "less-or-equal" via '|' joins)."""
        wanted = set(relation.split("|"))
        if not wanted <= set(RELATIONS):
            raise ValueError("bad relation %r" % relation)
        if self.outcome == "unknown":
            return TruthValue.unknown(self.horizon or 0)
        if self.is_determinate:
            holds = self.outcome in wanted
            return (
                TruthValue.true(self.certificate)
                if holds
                else TruthValue.false(self.certificate)
            )
        possible = set(self.candidates)
        if possible <= wanted:
            return TruthValue.true(self.certificate)
        if not (possible & wanted):
            return TruthValue.false(self.certificate)
        return TruthValue.indeterminate(self.certificate)

    def __str__(self) -> str:
        if self.outcome == "indeterminate":
            return "indeterminate{%s}" % ",".join(self.candidates)
        if self.outcome == "unknown":
            return "unknown(horizon=%s)" % self.horizon
        return self.outcome


def determinate(outcome: str, cert: Certificate) -> Comparison:
    return Comparison(outcome, certificate=cert)


def indeterminate_order(candidates, cert: Certificate) -> Comparison:
    return Comparison("indeterminate", candidates=tuple(sorted(set(candidates))), certificate=cert)


def unknown_order(horizon: int) -> Comparison:
    return Comparison("unknown", horizon=horizon)
