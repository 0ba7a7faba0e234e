"""Covariate universes, variable subsets, and dictionaries.

A :class:`Universe` fixes an ordered list of covariate names. A
:class:`VarSet` is one subset of those covariates, stored as a bit mask
keyed by universe index (index 0 is the least significant bit). A
:class:`Dictionary` is a deduplicated family of VarSets kept in canonical
order: ascending by the integer value of the mask. Canonical order makes
dictionary equality a positional comparison and keeps every serialized
form bit-stable across runs.

All types are immutable; operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import (
    DuplicateVariable,
    EnumerationTooLarge,
    UniverseTooLarge,
    UnknownVariable,
    ParseError,
)

#: Hard cap on universe size; masks live in a single 64-bit word.
MAX_UNIVERSE = 64

#: Default cap on the number of entries any full enumeration may produce.
DEFAULT_MAX_ENUM = 2 ** 20


@dataclass(frozen=True, slots=True)
class Universe:
    """An ordered, immutable set of covariate names with stable indices."""

    names: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def full_mask(self) -> int:
        """Mask with one bit set per covariate."""
        return (1 << len(self.names)) - 1

    def index(self, name: str) -> int:
        """Return the stable index of ``name``.

        Raises
        ------
        UnknownVariable
            If the universe has no covariate called ``name``.
        """
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariable(f"unknown variable {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.names


def make_universe(names: Iterable[str]) -> Universe:
    """Build a :class:`Universe` from an ordered list of names.

    Parameters
    ----------
    names
        Covariate names, each a non-empty string. Order is preserved and
        determines every index used by masks and canonical forms.

    Raises
    ------
    DuplicateVariable
        If a name repeats (exact string comparison).
    UniverseTooLarge
        If more than 64 names are given.
    """
    frozen = tuple(names)
    for n in frozen:
        if not isinstance(n, str) or not n:
            raise ParseError(f"invalid variable name {n!r}")
    if len(frozen) > MAX_UNIVERSE:
        raise UniverseTooLarge(f"{len(frozen)} covariates exceed the cap of {MAX_UNIVERSE}")
    seen = set()
    for n in frozen:
        if n in seen:
            raise DuplicateVariable(f"duplicate variable {n!r}")
        seen.add(n)
    return Universe(frozen)


@dataclass(frozen=True, slots=True)
class VarSet:
    """One subset of a universe's covariates, as a bit mask."""

    universe: Universe
    mask: int

    def __post_init__(self) -> None:
        if self.mask < 0 or self.mask >> self.universe.size:
            raise UnknownVariable(
                f"mask {self.mask:#x} has bits outside the {self.universe.size}-covariate universe"
            )

    @classmethod
    def of_names(cls, universe: Universe, names: Iterable[str]) -> "VarSet":
        """Build from covariate names.

        Raises
        ------
        UnknownVariable
            If any name is not in ``universe``.
        """
        mask = 0
        for n in names:
            mask |= 1 << universe.index(n)
        return cls(universe, mask)

    @classmethod
    def of_indices(cls, universe: Universe, indices: Iterable[int]) -> "VarSet":
        mask = 0
        for i in indices:
            mask |= 1 << i
        return cls(universe, mask)

    @classmethod
    def empty(cls, universe: Universe) -> "VarSet":
        return cls(universe, 0)

    @classmethod
    def full(cls, universe: Universe) -> "VarSet":
        return cls(universe, universe.full_mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __iter__(self) -> Iterator[str]:
        """Yield member names in universe index order."""
        for i, n in enumerate(self.universe.names):
            if self.mask >> i & 1:
                yield n

    def __contains__(self, name: str) -> bool:
        return bool(self.mask >> self.universe.index(name) & 1)

    def names(self) -> tuple[str, ...]:
        return tuple(self)

    def union(self, other: "VarSet") -> "VarSet":
        return VarSet(self.universe, self.mask | other.mask)

    def intersection(self, other: "VarSet") -> "VarSet":
        return VarSet(self.universe, self.mask & other.mask)

    def difference(self, other: "VarSet") -> "VarSet":
        return VarSet(self.universe, self.mask & ~other.mask)

    def complement(self) -> "VarSet":
        return VarSet(self.universe, self.universe.full_mask & ~self.mask)

    def issubset(self, other: "VarSet") -> bool:
        return self.mask & ~other.mask == 0

    def __le__(self, other: "VarSet") -> bool:
        return self.issubset(other)

    def to_text(self) -> str:
        """Brace form, members in universe index order: ``{A,B}``; empty is ``{}``."""
        return "{" + ",".join(self) + "}"

    def __repr__(self) -> str:
        return f"VarSet({self.to_text()})"


@dataclass(frozen=True, slots=True)
class Dictionary:
    """A family of VarSets in canonical order.

    Entries are deduplicated and sorted ascending by mask value. The empty
    family (no permissible model at all) is distinct from the one-entry
    family containing only the empty VarSet (only the empty model).
    """

    universe: Universe
    entries: tuple[VarSet, ...] = field(default=())

    @classmethod
    def from_masks(cls, universe: Universe, masks: Iterable[int]) -> "Dictionary":
        ordered = sorted(set(masks))
        return cls(universe, tuple(VarSet(universe, m) for m in ordered))

    @classmethod
    def from_varsets(cls, universe: Universe, varsets: Iterable[VarSet]) -> "Dictionary":
        return cls.from_masks(universe, (v.mask for v in varsets))

    def masks(self) -> tuple[int, ...]:
        return tuple(v.mask for v in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[VarSet]:
        return iter(self.entries)

    def __contains__(self, v: VarSet) -> bool:
        return v.mask in set(self.masks())

    def union(self, other: "Dictionary") -> "Dictionary":
        return Dictionary.from_masks(self.universe, set(self.masks()) | set(other.masks()))

    def intersection(self, other: "Dictionary") -> "Dictionary":
        return Dictionary.from_masks(self.universe, set(self.masks()) & set(other.masks()))

    def difference(self, other: "Dictionary") -> "Dictionary":
        return Dictionary.from_masks(self.universe, set(self.masks()) - set(other.masks()))

    def to_text(self) -> str:
        """One entry per line in canonical order, brace form per entry."""
        return "\n".join(v.to_text() for v in self.entries)

    def to_json_obj(self) -> list[list[str]]:
        """Array-of-arrays of names, canonical order."""
        return [list(v) for v in self.entries]

    @classmethod
    def from_text(cls, universe: Universe, text: str) -> "Dictionary":
        """Parse the line-per-entry brace form produced by :meth:`to_text`.

        Blank lines and ``#`` comment lines are skipped.

        Raises
        ------
        ParseError
            If a line is not a brace-delimited name list.
        UnknownVariable
            If an entry names a covariate outside ``universe``.
        """
        masks = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            masks.append(parse_braced_names(universe, line, where=f"line {lineno}").mask)
        return cls.from_masks(universe, masks)

    @classmethod
    def from_json_obj(cls, universe: Universe, obj: list[list[str]]) -> "Dictionary":
        return cls.from_varsets(universe, (VarSet.of_names(universe, e) for e in obj))

    def __repr__(self) -> str:
        return f"Dictionary({len(self.entries)} entries)"


def parse_braced_names(universe: Universe, text: str, where: str = "") -> VarSet:
    """Parse one ``{A,B}`` group into a VarSet. ``{}`` is the empty set."""
    s = text.strip()
    ctx = f" at {where}" if where else ""
    if not (s.startswith("{") and s.endswith("}")):
        raise ParseError(f"expected a brace-delimited set{ctx}, got {text!r}")
    inner = s[1:-1].strip()
    if not inner:
        return VarSet.empty(universe)
    names = [p.strip() for p in inner.split(",")]
    if any(not n for n in names):
        raise ParseError(f"empty name in set{ctx}: {text!r}")
    return VarSet.of_names(universe, names)


@dataclass(frozen=True, slots=True)
class ConstraintSet:
    """The allowed selection counts of a unit rule."""

    counts: frozenset[int]

    def __post_init__(self) -> None:
        if not self.counts:
            raise ParseError("constraint set must be non-empty")
        for c in self.counts:
            if not isinstance(c, int) or isinstance(c, bool) or c < 0:
                raise ParseError(f"constraint counts must be non-negative integers, got {c!r}")

    @classmethod
    def of(cls, *counts: int) -> "ConstraintSet":
        return cls(frozenset(counts))

    @classmethod
    def closed_range(cls, lo: int, hi: int) -> "ConstraintSet":
        """Counts ``lo`` through ``hi`` inclusive."""
        if hi < lo:
            raise ParseError(f"empty count range {lo}..{hi}")
        return cls(frozenset(range(lo, hi + 1)))

    @property
    def max(self) -> int:
        return max(self.counts)

    def __contains__(self, c: int) -> bool:
        return c in self.counts

    def to_text(self) -> str:
        return "{" + ",".join(str(c) for c in sorted(self.counts)) + "}"

    def __repr__(self) -> str:
        return f"ConstraintSet({self.to_text()})"


def powerset(u: Universe, max_entries: int = DEFAULT_MAX_ENUM) -> Dictionary:
    """Every subset of the universe, as a Dictionary.

    Parameters
    ----------
    u
        The universe to enumerate.
    max_entries
        Enumeration cap; the result has ``2**u.size`` entries and that
        number must not exceed this cap.

    Raises
    ------
    EnumerationTooLarge
        If ``2**u.size`` exceeds ``max_entries``.
    """
    require_enumerable(u, max_entries)
    return Dictionary(u, tuple(VarSet(u, m) for m in range(1 << u.size)))


def require_enumerable(u: Universe, max_entries: int = DEFAULT_MAX_ENUM) -> None:
    """Raise unless a full enumeration over ``u`` fits under the cap."""
    if u.size > 63 or (1 << u.size) > max_entries:
        raise EnumerationTooLarge(
            f"2^{u.size} subsets exceed the enumeration cap of {max_entries}"
        )


def dictionary_support(d: Dictionary) -> VarSet:
    """Union of all entries; the empty VarSet for the empty Dictionary."""
    mask = 0
    for v in d.entries:
        mask |= v.mask
    return VarSet(d.universe, mask)
