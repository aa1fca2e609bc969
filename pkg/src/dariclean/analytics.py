"""Frequency tables over name keys, top-n rankings and re-ranking reports.

A table counts one of the four name fields under a chosen keying:

* ``raw`` - the cell exactly as stored,
* ``builtin_trim`` - the display normalization pipeline (clean,
  substitute, spreadsheet trim), which still splits spellings that differ
  by a single stray internal space,
* ``stripped`` - the space-free :func:`~dariclean.normalize.normalized_key`,
  which unifies all spacing variants of a name.

Tables carry per-key spelling counts and (gender, province) group counts,
so they can be sliced for gender- or province-wise top-n lists and merged
associatively: building per-chunk tables in parallel and merging them is
bit-identical to one sequential pass.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from .errors import UnknownFieldError
from .normalize import NormalizationProfile, normalize, normalized_key
from .records import Dataset, Gender

NAME_FIELDS = ("first_name", "family_name", "father_name", "grandfather_name")
KEYINGS = ("raw", "builtin_trim", "stripped")


def _keyer(keying: str, profile: NormalizationProfile | None) -> Callable[[str], str]:
    if keying == "raw":
        return lambda s: s
    if keying == "builtin_trim":
        return lambda s: normalize(s, profile)
    if keying == "stripped":
        return lambda s: normalized_key(s, profile)
    raise UnknownFieldError(f"unknown keying {keying!r}; expected one of {KEYINGS}")


@dataclass
class KeyStats:
    """Per-key tallies: raw spellings and (gender, province) groups."""

    spellings: Counter = field(default_factory=Counter)
    groups: Counter = field(default_factory=Counter)  # (gender code, province) -> n

    @property
    def count(self) -> int:
        return sum(self.spellings.values())

    @property
    def display(self) -> str:
        """Most frequent raw spelling; ties resolved lexicographically."""
        top = max(self.spellings.values())
        return min(s for s, n in self.spellings.items() if n == top)

    def by_gender(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for (g, _), n in self.groups.items():
            out[g] = out.get(g, 0) + n
        return out

    def by_province(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for (_, p), n in self.groups.items():
            out[p] = out.get(p, 0) + n
        return out

    def merged(self, other: "KeyStats") -> "KeyStats":
        return KeyStats(
            spellings=self.spellings + other.spellings,
            groups=self.groups + other.groups,
        )


@dataclass
class FrequencyTable:
    field_name: str
    keying: str
    entries: dict[str, KeyStats] = field(default_factory=dict)
    missing_count: int = 0

    @property
    def total(self) -> int:
        return sum(st.count for st in self.entries.values())

    def merge(self, other: "FrequencyTable") -> "FrequencyTable":
        if (self.field_name, self.keying) != (other.field_name, other.keying):
            raise ValueError("cannot merge tables over different fields or keyings")
        entries = {k: KeyStats(Counter(v.spellings), Counter(v.groups)) for k, v in self.entries.items()}
        for k, st in other.entries.items():
            entries[k] = entries[k].merged(st) if k in entries else KeyStats(Counter(st.spellings), Counter(st.groups))
        return FrequencyTable(
            field_name=self.field_name,
            keying=self.keying,
            entries=entries,
            missing_count=self.missing_count + other.missing_count,
        )


def _build_chunk(
    records, field_name: str, key_of: Callable[[str], str], profile: NormalizationProfile | None
) -> FrequencyTable:
    table = FrequencyTable(field_name=field_name, keying="", entries={}, missing_count=0)
    for rec in records:
        raw = getattr(rec, field_name)
        if raw == "":
            table.missing_count += 1
            continue
        key = key_of(raw)
        if key == "":
            table.missing_count += 1
            continue
        st = table.entries.get(key)
        if st is None:
            st = table.entries[key] = KeyStats()
        st.spellings[raw] += 1
        gender = getattr(rec, "gender", Gender.MISSING)
        gender_code = gender.value if isinstance(gender, Gender) else ""
        province = normalize(getattr(rec, "province", ""), profile)
        st.groups[(gender_code, province)] += 1
    return table


def build_frequency_table(
    dataset: Dataset,
    field_name: str,
    keying: str = "stripped",
    profile: NormalizationProfile | None = None,
    jobs: int = 1,
) -> FrequencyTable:
    """Count distinct keys of one name field across the dataset.

    MISSING (empty) values are excluded from the entries and tallied in
    ``missing_count``. With ``jobs > 1`` the dataset is split into chunks
    counted concurrently and merged; the result is identical to the
    sequential build.
    """
    if field_name not in NAME_FIELDS:
        raise UnknownFieldError(
            f"unknown field {field_name!r}; expected one of {NAME_FIELDS}"
        )
    key_of = _keyer(keying, profile)
    records = dataset.records
    if jobs <= 1 or len(records) < 2 * jobs:
        table = _build_chunk(records, field_name, key_of, profile)
    else:
        size = (len(records) + jobs - 1) // jobs
        chunks = [records[i : i + size] for i in range(0, len(records), size)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda c: _build_chunk(c, field_name, key_of, profile), chunks))
        table = parts[0]
        for part in parts[1:]:
            part.keying = table.keying
            table = table.merge(part)
    table.keying = keying
    return table


def _group_count(st: KeyStats, gender: str | None, province: str | None,
                 profile: NormalizationProfile | None) -> int:
    if gender is None and province is None:
        return st.count
    want_p = normalized_key(province, profile) if province is not None else None
    n = 0
    for (g, p), c in st.groups.items():
        if gender is not None and g != gender:
            continue
        if want_p is not None and normalized_key(p, profile) != want_p:
            continue
        n += c
    return n


def top_n(
    table: FrequencyTable,
    n: int,
    gender: str | None = None,
    province: str | None = None,
    profile: NormalizationProfile | None = None,
) -> list[tuple[str, int]]:
    """Top-n (display spelling, count) pairs, optionally sliced by
    gender ("M"/"F") and/or province.

    Ordered by descending count; ties broken by ascending key order so the
    ranking is deterministic and invariant under input row permutation.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ranked = []
    for key, st in table.entries.items():
        c = _group_count(st, gender, province, profile)
        if c > 0:
            ranked.append((key, st.display, c))
    ranked.sort(key=lambda t: (-t[2], t[0]))
    return [(display, c) for _, display, c in ranked[:n]]


def _fold(
    table: FrequencyTable, profile: NormalizationProfile | None
) -> dict[str, tuple[str, int, str]]:
    """Group a table's keys by their stripped form.

    Each group is represented by its heaviest member key (ties broken
    lexicographically): that is the row which stood for the name in the
    table's own ranking before variants were merged. Returns
    folded_key -> (representative key, representative count, display).
    """
    groups: dict[str, tuple[str, int, str]] = {}
    for key, st in table.entries.items():
        fk = normalized_key(key, profile)
        cur = groups.get(fk)
        if cur is None or st.count > cur[1] or (st.count == cur[1] and key < cur[0]):
            groups[fk] = (key, st.count, st.display)
    return groups


def _fold_ranks(groups: dict[str, tuple[str, int, str]]) -> dict[str, int]:
    order = sorted(groups, key=lambda fk: (-groups[fk][1], fk))
    return {fk: i + 1 for i, fk in enumerate(order)}


@dataclass(frozen=True)
class RankShift:
    key: str
    display: str
    before_count: int
    after_count: int
    before_rank: int | None
    after_rank: int | None
    entered_top_n: bool
    left_top_n: bool

    @property
    def count_delta(self) -> int:
        return self.after_count - self.before_count

    @property
    def rank_delta(self) -> int | None:
        if self.before_rank is None or self.after_rank is None:
            return None
        return self.before_rank - self.after_rank  # positive = moved up


@dataclass(frozen=True)
class RankShiftReport:
    n: int
    shifts: tuple[RankShift, ...]

    def for_key(self, key: str) -> RankShift:
        for s in self.shifts:
            if s.key == key:
                return s
        raise KeyError(key)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "shifts": [
                {
                    "key": s.key,
                    "display": s.display,
                    "before_count": s.before_count,
                    "after_count": s.after_count,
                    "count_delta": s.count_delta,
                    "before_rank": s.before_rank,
                    "after_rank": s.after_rank,
                    "rank_delta": s.rank_delta,
                    "entered_top_n": s.entered_top_n,
                    "left_top_n": s.left_top_n,
                }
                for s in self.shifts
            ],
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("ensure_ascii", False)
        kwargs.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kwargs)


def compare_rankings(
    before: FrequencyTable,
    after: FrequencyTable,
    n: int,
    profile: NormalizationProfile | None = None,
) -> RankShiftReport:
    """Count and rank deltas between two tables over the same field.

    The tables usually differ in keying (builtin_trim before, stripped
    after), so both key sets are folded onto their stripped form and each
    fold group is represented by its heaviest member: the count that name
    actually had in its own table's ranking. The delta then measures what
    merging spelling variants gained, and rank changes show names
    overtaking one another. Keys entering or leaving the top-n are flagged.
    """
    if before.field_name != after.field_name:
        raise ValueError("tables compare different fields")
    gb = _fold(before, profile)
    ga = _fold(after, profile)
    ranks_before = _fold_ranks(gb)
    ranks_after = _fold_ranks(ga)
    top_before = {k for k, r in ranks_before.items() if r <= n}
    top_after = {k for k, r in ranks_after.items() if r <= n}
    shifts = []
    for key in sorted(set(gb) | set(ga)):
        b = gb.get(key)
        a = ga.get(key)
        shifts.append(
            RankShift(
                key=key,
                display=(a or b)[2],
                before_count=b[1] if b else 0,
                after_count=a[1] if a else 0,
                before_rank=ranks_before.get(key),
                after_rank=ranks_after.get(key),
                entered_top_n=key in top_after and key not in top_before,
                left_top_n=key in top_before and key not in top_after,
            )
        )
    shifts.sort(key=lambda s: (s.after_rank if s.after_rank is not None else 10**9, s.key))
    return RankShiftReport(n=n, shifts=tuple(shifts))
