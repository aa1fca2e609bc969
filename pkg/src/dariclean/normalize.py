"""Codepoint-level cleansing and canonicalization of Persian/Dari strings.

Registry exports mix the plain space (U+0020) with the no-break space
(U+00A0), carry stray control characters, and spell the letter Yeh with
either the Arabic (U+064A) or the Farsi (U+06CC) codepoint, so visually
identical names compare unequal. The operations here repair that in
stages:

* :func:`clean` drops nonprinting codepoints and unifies space variants,
* :func:`substitute` maps confusable codepoints onto one canonical form,
* :func:`trim_builtin` is the classic spreadsheet trim (strips the ends,
  collapses runs of two or more internal spaces, but cannot remove a
  single stray internal space),
* :func:`strip_all_spaces` removes every space outright,
* :func:`tailored_trim` restores the canonical spaced spelling via a
  lexicon lookup on the space-stripped key,
* :func:`normalized_key` derives the space-free join/aggregation key the
  rest of the toolkit matches on.

All operations are pure functions on codepoints; profiles and lexicons
are immutable after construction, so everything here is safe to call
from any number of threads.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import AmbiguousKeyError

ZWNJ = 0x200C  # zero-width non-joiner, joins control in Persian orthography

# Control codes commonly found in legacy registry exports. 129, 141, 143,
# 144 and 157 are Windows-1252 leftovers with no Unicode meaning; they are
# kept in the default set because they do occur in the wild.
DEFAULT_NONPRINTING = frozenset(range(0, 32)) | frozenset({127, 129, 141, 143, 144, 157})

DEFAULT_SPACES = frozenset({0x20, 0xA0})  # plain space, no-break space

# Arabic Yeh -> Farsi Yeh. The single unification every Dari dataset needs.
DEFAULT_SUBSTITUTIONS = {0x064A: 0x06CC}

# Opt-in extension: Arabic Kaf -> Farsi Keheh. Not part of the defaults.
KAF_UNIFICATION = {0x0643: 0x06A9}

_MULTISPACE_RE = re.compile("  +")


def _resolve_chains(mapping: Mapping[int, int]) -> dict[int, int]:
    """Follow substitution chains to their terminal codepoint.

    Resolving a -> b, b -> c into a -> c, b -> c makes a single
    translate pass idempotent. Cycles are rejected.
    """
    resolved: dict[int, int] = {}
    for src in mapping:
        seen = {src}
        dst = mapping[src]
        while dst in mapping:
            if dst in seen:
                raise ValueError(f"substitution cycle through U+{dst:04X}")
            seen.add(dst)
            dst = mapping[dst]
        resolved[src] = dst
    return resolved


@dataclass(frozen=True)
class NormalizationProfile:
    """Character classes and substitution maps driving the cleansing ops.

    ``join_control_policy`` controls whether U+200C (ZWNJ) survives into
    normalized keys: ``"strip"`` (default) removes it so spelling variants
    unify, ``"keep"`` retains it. Display-form operations never touch ZWNJ.
    """

    nonprinting_set: frozenset[int] = DEFAULT_NONPRINTING
    space_set: frozenset[int] = DEFAULT_SPACES
    substitution_map: Mapping[int, int] = field(
        default_factory=lambda: dict(DEFAULT_SUBSTITUTIONS)
    )
    join_control_policy: str = "strip"

    def __post_init__(self):
        if self.join_control_policy not in ("strip", "keep"):
            raise ValueError(
                f"join_control_policy must be 'strip' or 'keep', got {self.join_control_policy!r}"
            )
        overlap = self.nonprinting_set & self.space_set
        if overlap:
            raise ValueError(f"nonprinting_set and space_set overlap: {sorted(overlap)}")
        bad = set(self.substitution_map) & self.nonprinting_set
        if bad:
            raise ValueError(f"substitution keys inside nonprinting_set: {sorted(bad)}")
        resolved = _resolve_chains(self.substitution_map)
        # Precomputed str.translate tables; cached on the frozen instance.
        object.__setattr__(
            self,
            "_clean_table",
            {cp: None for cp in self.nonprinting_set} | {cp: 0x20 for cp in self.space_set},
        )
        object.__setattr__(
            self, "_substitute_table", {src: chr(dst) for src, dst in resolved.items()}
        )
        object.__setattr__(
            self, "_strip_table", {cp: None for cp in self.space_set | {0x20}}
        )

    def with_substitutions(self, extra: Mapping[int, int]) -> "NormalizationProfile":
        """Return a new profile with additional substitution rules."""
        merged = dict(self.substitution_map)
        merged.update(extra)
        return NormalizationProfile(
            nonprinting_set=self.nonprinting_set,
            space_set=self.space_set,
            substitution_map=merged,
            join_control_policy=self.join_control_policy,
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> "NormalizationProfile":
        """Load a profile from JSON: codepoint lists as integers,
        substitutions as ``[source, target]`` integer pairs."""
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(
            nonprinting_set=frozenset(raw.get("nonprinting", DEFAULT_NONPRINTING)),
            space_set=frozenset(raw.get("spaces", DEFAULT_SPACES)),
            substitution_map={int(a): int(b) for a, b in raw.get("substitutions", [[0x064A, 0x06CC]])},
            join_control_policy=raw.get("join_control_policy", "strip"),
        )


DEFAULT_PROFILE = NormalizationProfile()


def clean(text: str, profile: NormalizationProfile | None = None) -> str:
    """Remove nonprinting codepoints and unify space variants to U+0020."""
    p = profile or DEFAULT_PROFILE
    return text.translate(p._clean_table)


def substitute(text: str, profile: NormalizationProfile | None = None) -> str:
    """Replace each mapped codepoint by its canonical counterpart."""
    p = profile or DEFAULT_PROFILE
    return text.translate(p._substitute_table)


def trim_builtin(text: str) -> str:
    """Spreadsheet-style trim on U+0020 only.

    Strips leading/trailing spaces and collapses internal runs of two or
    more to a single space. A single internal space is preserved, so a
    lone stray space inside a name survives this function by design.
    Run :func:`clean` first so space variants are already U+0020.
    """
    return _MULTISPACE_RE.sub(" ", text).strip(" ")


def strip_all_spaces(text: str, profile: NormalizationProfile | None = None) -> str:
    """Remove every configured space codepoint (and U+0020) from ``text``."""
    p = profile or DEFAULT_PROFILE
    return text.translate(p._strip_table)


def normalize(text: str, profile: NormalizationProfile | None = None) -> str:
    """Display-form pipeline: clean, substitute, then built-in trim."""
    p = profile or DEFAULT_PROFILE
    return trim_builtin(substitute(clean(text, p), p))


def normalized_key(text: str, profile: NormalizationProfile | None = None) -> str:
    """Space-free canonical key: clean, substitute, strip all spaces.

    ZWNJ is removed or kept per the profile's ``join_control_policy``.
    This is the join/aggregation key used by analytics, imputation,
    linkage and entity tagging.
    """
    p = profile or DEFAULT_PROFILE
    out = strip_all_spaces(substitute(clean(text, p), p), p)
    if p.join_control_policy == "strip":
        out = out.replace(chr(ZWNJ), "")
    return out


@dataclass(frozen=True)
class Lexicon:
    """Space-stripped key -> canonical spaced spelling, one spelling per key.

    Keys are ``normalized_key`` forms; the canonical spelling is a clean,
    already-normalized display form whose key round-trips to the entry key.
    Two different canonical spellings claiming the same key are rejected at
    build time (:class:`AmbiguousKeyError`), so lookups are unambiguous.
    """

    entries: Mapping[str, str]

    @classmethod
    def from_canonicals(
        cls, spellings: Iterable[str], profile: NormalizationProfile | None = None
    ) -> "Lexicon":
        """Build from trusted canonical spellings, deriving each key."""
        p = profile or DEFAULT_PROFILE
        entries: dict[str, str] = {}
        for raw in spellings:
            canonical = normalize(raw, p)
            key = normalized_key(canonical, p)
            if not key:
                continue
            existing = entries.get(key)
            if existing is not None and existing != canonical:
                raise AmbiguousKeyError(
                    f"key {key!r} claimed by both {existing!r} and {canonical!r}"
                )
            entries[key] = canonical
        return cls(entries=entries)

    @classmethod
    def from_csv_file(
        cls, path: str | Path, profile: NormalizationProfile | None = None
    ) -> "Lexicon":
        """Load a two-column UTF-8 CSV of (key, canonical spelling)."""
        p = profile or DEFAULT_PROFILE
        entries: dict[str, str] = {}
        with open(path, encoding="utf-8-sig", newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
                key, canonical = row
                derived = normalized_key(canonical, p)
                if derived != key:
                    raise ValueError(
                        f"{path}:{lineno}: key {key!r} does not match canonical spelling "
                        f"{canonical!r} (derived key {derived!r})"
                    )
                existing = entries.get(key)
                if existing is not None and existing != canonical:
                    raise AmbiguousKeyError(
                        f"{path}:{lineno}: key {key!r} claimed by both "
                        f"{existing!r} and {canonical!r}"
                    )
                entries[key] = canonical
        return cls(entries=entries)


def tailored_trim(
    text: str, lexicon: Lexicon, profile: NormalizationProfile | None = None
) -> str:
    """Canonicalize spacing via the lexicon, repairing what trim cannot.

    The space-stripped key of ``text`` is looked up; on a hit the canonical
    spaced spelling is returned, which restores a single misplaced space
    and re-splits wrongly joined words. Unknown keys fall back to the
    plain :func:`normalize` pipeline.
    """
    p = profile or DEFAULT_PROFILE
    hit = lexicon.entries.get(normalized_key(text, p))
    if hit is not None:
        return hit
    return normalize(text, p)
