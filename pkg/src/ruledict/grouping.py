"""Grouping structures and their relationship to selection dictionaries.

A grouping structure is a family of non-empty covariate groups covering
the universe. Penalised estimators built from groups can only realise
certain selection patterns; this module checks whether a dictionary is
exactly the pattern family of a grouping (for the latent overlapping
style), whether a weaker necessary condition holds (for the plain
overlapping style), synthesises a grouping from a dictionary when one
exists, and produces the equivalent selection rule for the classical
group penalties.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .core import (
    DEFAULT_MAX_ENUM,
    ConstraintSet,
    Dictionary,
    Universe,
    VarSet,
    parse_braced_names,
)
from .errors import (
    EnumerationTooLarge,
    IncompatibleGrouping,
    InvalidGrouping,
    SynthesisFailure,
    UseClosureInstead,
)
from .rules import And, RuleExpr, Unit, UnitRule


@dataclass(frozen=True)
class GroupingStructure:
    """Non-empty groups of covariates whose union is the whole universe."""

    universe: Universe
    groups: tuple[VarSet, ...]

    def __post_init__(self):
        if not self.groups:
            raise InvalidGrouping("a grouping needs at least one group")
        seen = set()
        union = 0
        for g in self.groups:
            if g.universe is not self.universe and g.universe != self.universe:
                raise InvalidGrouping("group universe differs from the grouping's")
            if g.mask == 0:
                raise InvalidGrouping("groups must be non-empty")
            if g.mask in seen:
                raise InvalidGrouping(f"duplicate group {g.to_text()}")
            seen.add(g.mask)
            union |= g.mask
        if union != self.universe.full_mask:
            missing = VarSet(self.universe, self.universe.full_mask & ~union)
            raise InvalidGrouping(f"groups do not cover {missing.to_text()}")

    @classmethod
    def of_names(cls, u: Universe, groups) -> "GroupingStructure":
        return cls(u, tuple(VarSet.of_names(u, names) for names in groups))

    def masks(self) -> tuple[int, ...]:
        return tuple(g.mask for g in self.groups)

    def is_disjoint(self) -> bool:
        total = 0
        for g in self.groups:
            if total & g.mask:
                return False
            total |= g.mask
        return True

    def to_text(self) -> str:
        return "\n".join(g.to_text() for g in self.groups)

    def to_json_obj(self) -> list[list[str]]:
        return [list(g) for g in self.groups]

    @classmethod
    def from_text(cls, u: Universe, text: str) -> "GroupingStructure":
        groups = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            groups.append(parse_braced_names(u, line, "grouping entry"))
        return cls(u, tuple(groups))

    @classmethod
    def from_json_obj(cls, u: Universe, obj) -> "GroupingStructure":
        if not isinstance(obj, list):
            raise InvalidGrouping("grouping JSON must be an array of name arrays")
        groups = []
        for entry in obj:
            if not isinstance(entry, list):
                raise InvalidGrouping("grouping JSON must be an array of name arrays")
            groups.append(VarSet.of_names(u, entry))
        return cls(u, tuple(groups))


class Method(enum.Enum):
    """Penalised selection methods with a known pattern family."""

    LASSO = "lasso"
    ADAPTIVE_LASSO = "adaptive-lasso"
    GROUP_LASSO = "group-lasso"
    EXCLUSIVE_GROUP_LASSO = "exclusive-group-lasso"
    LATENT_OVERLAPPING_GROUP_LASSO = "latent-overlapping-group-lasso"

    @property
    def display_name(self) -> str:
        return _METHOD_DISPLAY[self]

    @property
    def penalty_description(self) -> str:
        return _METHOD_PENALTY[self]


_METHOD_DISPLAY = {
    Method.LASSO: "Lasso",
    Method.ADAPTIVE_LASSO: "Adaptive Lasso",
    Method.GROUP_LASSO: "Group Lasso",
    Method.EXCLUSIVE_GROUP_LASSO: "Exclusive Group Lasso",
    Method.LATENT_OVERLAPPING_GROUP_LASSO: "Latent Overlapping Group Lasso",
}

_METHOD_PENALTY = {
    Method.LASSO: "sum of absolute coefficients",
    Method.ADAPTIVE_LASSO: "weighted sum of absolute coefficients",
    Method.GROUP_LASSO: "sum of euclidean norms over disjoint groups",
    Method.EXCLUSIVE_GROUP_LASSO: "sum of squared l1 norms over disjoint groups",
    Method.LATENT_OVERLAPPING_GROUP_LASSO: "infimum over latent decompositions of group norms",
}


def union_closure(g: GroupingStructure, max_entries: int = DEFAULT_MAX_ENUM) -> Dictionary:
    """All unions of subfamilies of the groups, including the empty union.

    Computed as a fixpoint: start from the empty set, keep OR-ing in
    groups until nothing new appears. Equivalent to enumerating the 2^m
    subfamilies but bounded by the number of distinct unions.
    """
    u = g.universe
    reached = {0}
    frontier = [0]
    while frontier:
        base = frontier.pop()
        for gm in g.masks():
            m = base | gm
            if m not in reached:
                if len(reached) >= max_entries:
                    raise EnumerationTooLarge(
                        f"union closure exceeds {max_entries} entries"
                    )
                reached.add(m)
                frontier.append(m)
    return Dictionary.from_masks(u, reached)


@dataclass(frozen=True)
class CongruenceReport:
    """Outcome of comparing a dictionary against a grouping's pattern family.

    ``missing`` holds dictionary entries the family cannot produce;
    ``extra`` holds family members outside the dictionary. The two
    optional families record the compared sets for the overlapping
    check, which compares complements rather than the closure itself.
    """

    congruent: bool
    missing: Dictionary
    extra: Dictionary
    rule_family: Dictionary | None = field(default=None)
    method_family: Dictionary | None = field(default=None)


def check_log_congruence(
    d: Dictionary, g: GroupingStructure, max_entries: int = DEFAULT_MAX_ENUM
) -> CongruenceReport:
    """Does the latent overlapping grouping realise exactly ``d``?

    The realisable patterns of the latent overlapping penalty are the
    unions of groups, so this is an equality test against the union
    closure.
    """
    closure = union_closure(g, max_entries)
    missing = d.difference(closure)
    extra = closure.difference(d)
    return CongruenceReport(
        congruent=not missing.entries and not extra.entries,
        missing=missing,
        extra=extra,
    )


def check_ogl_necessary(
    d: Dictionary, g: GroupingStructure, max_entries: int = DEFAULT_MAX_ENUM
) -> CongruenceReport:
    """Necessary condition for the plain overlapping penalty to realise ``d``.

    The zero patterns of that penalty are unions of groups, so the
    nonzero patterns are complements of such unions. The full universe
    is realisable regardless (take the empty union, or penalise
    nothing), so it is set aside on both sides before comparing.
    """
    u = g.universe
    closure = union_closure(g, max_entries)
    comp_masks = {u.full_mask & ~m for m in closure.masks()}
    rule_family = Dictionary.from_masks(u, (m for m in d.masks() if m != u.full_mask))
    method_family = Dictionary.from_masks(u, (m for m in comp_masks if m != u.full_mask))
    missing = rule_family.difference(method_family)
    extra = method_family.difference(rule_family)
    return CongruenceReport(
        congruent=not missing.entries and not extra.entries,
        missing=missing,
        extra=extra,
        rule_family=rule_family,
        method_family=method_family,
    )


def _irreducible_generators(d: Dictionary) -> list[int]:
    """Entries that are not unions of strictly smaller entries of ``d``."""
    masks = [m for m in d.masks() if m != 0]
    out = []
    for m in masks:
        union = 0
        for other in masks:
            if other != m and (other & ~m) == 0:
                union |= other
        if union != m:
            out.append(m)
    return out


def synthesize_log_grouping(d: Dictionary) -> GroupingStructure:
    """Build a grouping whose union closure is exactly ``d``, if one exists.

    One exists iff ``d`` contains the empty set and the full universe
    and is closed under pairwise unions. On failure the raised error
    says which condition broke, with a witness pair for closure.
    """
    u = d.universe
    masks = set(d.masks())
    if 0 not in masks:
        raise SynthesisFailure(
            "dictionary lacks the empty set", reason="missing-empty-set"
        )
    if u.full_mask not in masks:
        raise SynthesisFailure(
            "dictionary lacks the full universe", reason="missing-full-set"
        )
    ordered = sorted(masks)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            if (a | b) not in masks:
                raise SynthesisFailure(
                    f"not closed under union: "
                    f"{VarSet(u, a).to_text()} with {VarSet(u, b).to_text()}",
                    reason="not-union-closed",
                    witness=(VarSet(u, a), VarSet(u, b)),
                )
    groups = _irreducible_generators(d)
    g = GroupingStructure(u, tuple(VarSet(u, m) for m in sorted(groups)))
    report = check_log_congruence(d, g, max_entries=max(len(masks) + 1, 2))
    if not report.congruent:
        raise SynthesisFailure(
            "generators do not close back to the dictionary", reason="not-union-closed"
        )
    return g


def check_compatibility(method: Method, g: GroupingStructure) -> bool:
    """Can this method be driven by this grouping at all?

    The lasso variants need singleton groups; the disjoint group
    penalties need a partition; the latent overlapping penalty accepts
    any grouping.
    """
    if method in (Method.LASSO, Method.ADAPTIVE_LASSO):
        return all(len(grp) == 1 for grp in g.groups)
    if method in (Method.GROUP_LASSO, Method.EXCLUSIVE_GROUP_LASSO):
        return g.is_disjoint()
    return True


def method_rule(method: Method, g: GroupingStructure) -> RuleExpr:
    """Selection rule whose dictionary matches the method's pattern family.

    Raises
    ------
    IncompatibleGrouping
        The grouping fails :func:`check_compatibility` for the method.
    UseClosureInstead
        The latent overlapping family is not a conjunction of per-group
        count rules; compute :func:`union_closure` directly.
    """
    if method is Method.LATENT_OVERLAPPING_GROUP_LASSO:
        raise UseClosureInstead(
            "the latent overlapping pattern family is the union closure of the "
            "groups, not a per-group count rule"
        )
    if not check_compatibility(method, g):
        raise IncompatibleGrouping(
            f"{method.display_name} cannot use grouping:\n{g.to_text()}"
        )
    u = g.universe
    if method in (Method.LASSO, Method.ADAPTIVE_LASSO):
        return Unit(UnitRule(VarSet.full(u), ConstraintSet.closed_range(0, u.size)))
    if method is Method.GROUP_LASSO:
        units = [
            Unit(UnitRule(grp, ConstraintSet.of(0, len(grp)))) for grp in g.groups
        ]
    else:  # exclusive group lasso
        units = [
            Unit(UnitRule(grp, ConstraintSet.closed_range(1, len(grp))))
            for grp in g.groups
        ]
    expr = units[0]
    for unit in units[1:]:
        expr = And(expr, unit)
    return expr
