"""Majority-vote imputation of missing gender and school-location values.

The reference side is built from rows where the target value is present:
per normalized key, a value histogram reduced to winner statistics. The
fill side walks rows whose target is missing and fills the winner only
when the evidence clears configurable support and dominance gates; a bare
argmax would happily mislabel unisex names, so a supermajority is
required. Existing values are never overwritten, every skipped row is
accounted for in the report, and ambiguous keys are surfaced with their
full histograms instead of being guessed at.

School names often carry a gender marker (e.g. a boys'/girls' keyword);
an optional hint derived from those keywords can confirm or veto a
name-based fill, but never fills on its own.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Mapping

from .normalize import NormalizationProfile, normalize, normalized_key
from .records import Dataset, Gender


@dataclass(frozen=True)
class ReferenceEntry:
    """Winner statistics for one key. ``winning_value`` is None on a tie."""

    winning_value: str | None
    winner_count: int
    total_count: int
    distinct_values: int
    histogram: Mapping[str, int]

    @property
    def ambiguous(self) -> bool:
        return self.winning_value is None


@dataclass(frozen=True)
class ReferenceTable:
    key_field: str
    target_field: str
    entries: Mapping[str, ReferenceEntry]

    def get(self, key: str) -> ReferenceEntry | None:
        return self.entries.get(key)


@dataclass(frozen=True)
class ImputationPolicy:
    """Gates a fill must clear, plus the optional school-name hint.

    ``dominance`` is the minimum winner share of observations, in
    (0.5, 1.0]; ``min_support`` the minimum number of observations.
    ``school_gender_keywords`` maps a keyword found in school names to a
    gender code ("M"/"F"); the longest matching keyword decides.
    """

    min_support: int = 2
    dominance: float = 0.9
    use_school_hint: bool = False
    school_gender_keywords: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not (0.5 < self.dominance <= 1.0):
            raise ValueError(f"dominance must be in (0.5, 1.0], got {self.dominance}")
        if self.min_support < 1:
            raise ValueError(f"min_support must be >= 1, got {self.min_support}")


@dataclass(frozen=True)
class Conflict:
    key: str
    histogram: Mapping[str, int]
    reason: str  # "tie" | "dominance" | "multi_location" | "hint_veto"


@dataclass
class ImputationReport:
    target_field: str
    initial_missing: int = 0
    filled_count: int = 0
    skipped_ambiguous: int = 0
    skipped_low_support: int = 0
    still_missing: int = 0
    untouched_existing: int = 0
    conflicts: list[Conflict] = field(default_factory=list)
    hint_warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "target_field": self.target_field,
            "initial_missing": self.initial_missing,
            "filled_count": self.filled_count,
            "skipped_ambiguous": self.skipped_ambiguous,
            "skipped_low_support": self.skipped_low_support,
            "still_missing": self.still_missing,
            "untouched_existing": self.untouched_existing,
            "conflicts": [
                {"key": c.key, "histogram": dict(c.histogram), "reason": c.reason}
                for c in self.conflicts
            ],
            "hint_warnings": list(self.hint_warnings),
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("ensure_ascii", False)
        kwargs.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kwargs)


def _target_value(record, target_field: str, profile) -> str:
    if target_field == "gender":
        return record.gender.value
    if target_field == "province":
        return normalize(record.province, profile)
    raise ValueError(f"unsupported target field {target_field!r}")


def build_reference(
    dataset: Dataset,
    key_field: str,
    target_field: str,
    profile: NormalizationProfile | None = None,
) -> ReferenceTable:
    """Histogram target values per normalized key, reduced to winner stats.

    Only rows with the target present contribute; rows whose key field is
    empty are skipped (nothing to key on). A tied histogram has no winner
    and the entry is marked ambiguous.
    """
    if target_field not in ("gender", "province"):
        raise ValueError(f"unsupported target field {target_field!r}")
    hist: dict[str, Counter] = {}
    for rec in dataset.records:
        value = _target_value(rec, target_field, profile)
        if value == "":
            continue
        key = normalized_key(getattr(rec, key_field), profile)
        if key == "":
            continue
        hist.setdefault(key, Counter())[value] += 1
    entries = {}
    for key, counter in hist.items():
        top = max(counter.values())
        winners = [v for v, c in counter.items() if c == top]
        entries[key] = ReferenceEntry(
            winning_value=winners[0] if len(winners) == 1 else None,
            winner_count=top,
            total_count=sum(counter.values()),
            distinct_values=len(counter),
            histogram=dict(counter),
        )
    return ReferenceTable(key_field=key_field, target_field=target_field, entries=entries)


def _hint_for(school_name: str, policy: ImputationPolicy,
              profile: NormalizationProfile | None) -> tuple[Gender | None, bool]:
    """Match gender keywords inside a school name.

    Returns (hint, ambiguous): the longest matching keyword decides; if
    both genders match with equal-length keywords the hint is None and
    ``ambiguous`` is True so callers can log a warning.
    """
    if not policy.school_gender_keywords or not school_name:
        return None, False
    key = normalized_key(school_name, profile)
    best: dict[str, int] = {}
    for keyword, code in policy.school_gender_keywords.items():
        kw = normalized_key(keyword, profile)
        if kw and kw in key:
            best[code] = max(best.get(code, 0), len(kw))
    if not best:
        return None, False
    if len(best) == 1:
        code = next(iter(best))
        return Gender(code), False
    if best["M"] > best["F"]:
        return Gender.MALE, False
    if best["F"] > best["M"]:
        return Gender.FEMALE, False
    return None, True


def school_gender_hint(
    high_school: str,
    policy: ImputationPolicy,
    profile: NormalizationProfile | None = None,
) -> Gender | None:
    """Gender suggested by keywords in a school name, or None.

    Equal-length contradictory keywords cancel out to None; during
    imputation that case additionally emits a report warning.
    """
    hint, _ = _hint_for(high_school, policy, profile)
    return hint


def impute_gender(
    dataset: Dataset,
    ref: ReferenceTable,
    policy: ImputationPolicy | None = None,
    profile: NormalizationProfile | None = None,
) -> tuple[Dataset, ImputationReport]:
    """Fill missing gender from the per-first-name reference.

    A row is filled only when its key has an unambiguous winner with
    ``total_count >= min_support`` and winner share ``>= dominance``.
    With ``use_school_hint``, a school-name hint that contradicts the
    winner vetoes the fill. Rows with existing gender are never modified.
    """
    policy = policy or ImputationPolicy()
    report = ImputationReport(target_field="gender")
    out = []
    for rec in dataset.records:
        if rec.gender is not Gender.MISSING:
            report.untouched_existing += 1
            out.append(rec)
            continue
        report.initial_missing += 1
        key = normalized_key(rec.first_name, profile)
        entry = ref.get(key) if key else None
        if entry is None:
            report.still_missing += 1
            out.append(rec)
            continue
        if entry.total_count < policy.min_support:
            report.skipped_low_support += 1
            out.append(rec)
            continue
        if entry.ambiguous:
            report.skipped_ambiguous += 1
            report.conflicts.append(Conflict(key, entry.histogram, "tie"))
            out.append(rec)
            continue
        if entry.winner_count / entry.total_count < policy.dominance:
            report.skipped_ambiguous += 1
            report.conflicts.append(Conflict(key, entry.histogram, "dominance"))
            out.append(rec)
            continue
        winner = Gender(entry.winning_value)
        if policy.use_school_hint:
            hint, ambiguous_kw = _hint_for(rec.high_school, policy, profile)
            if ambiguous_kw:
                report.hint_warnings.append(
                    f"row {rec.id}: contradictory equal-length gender keywords in "
                    f"school name {rec.high_school!r}"
                )
            if hint is not None and hint is not winner:
                report.skipped_ambiguous += 1
                report.conflicts.append(Conflict(key, entry.histogram, "hint_veto"))
                out.append(rec)
                continue
        report.filled_count += 1
        out.append(replace(rec, gender=winner))
    return dataset.with_records(out), report


def impute_location(
    dataset: Dataset,
    ref: ReferenceTable,
    policy: ImputationPolicy | None = None,
    profile: NormalizationProfile | None = None,
) -> tuple[Dataset, ImputationReport]:
    """Fill missing province from the per-school reference.

    Stricter than the gender rule: a school key observed in two or more
    distinct provinces is never filled (same-name schools exist in
    different provinces and no vote can settle which one is meant); such
    keys are reported as conflicts with their histograms.
    """
    policy = policy or ImputationPolicy()
    report = ImputationReport(target_field="province")
    out = []
    for rec in dataset.records:
        if rec.province != "":
            report.untouched_existing += 1
            out.append(rec)
            continue
        report.initial_missing += 1
        key = normalized_key(rec.high_school, profile)
        entry = ref.get(key) if key else None
        if entry is None:
            report.still_missing += 1
            out.append(rec)
            continue
        if entry.distinct_values >= 2:
            report.skipped_ambiguous += 1
            report.conflicts.append(Conflict(key, entry.histogram, "multi_location"))
            out.append(rec)
            continue
        if entry.total_count < policy.min_support:
            report.skipped_low_support += 1
            out.append(rec)
            continue
        report.filled_count += 1
        out.append(replace(rec, province=entry.winning_value))
    return dataset.with_records(out), report
