"""Core data model: instances, bundles, allocations, witnesses.

All sizes are exact `fractions.Fraction` values in (0, 1] with a unit bin
capacity. Exact arithmetic is mandatory: the classification thresholds
1/3, 1/2 and 2/3 carry strict/non-strict boundaries that floating point
would misclassify.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidAllocationError, InvalidSizeError, InvalidWitnessError

Bundle = frozenset[int]

ZERO = Fraction(0)
ONE = Fraction(1)
ONE_THIRD = Fraction(1, 3)
ONE_HALF = Fraction(1, 2)
TWO_THIRDS = Fraction(2, 3)


class Scheme(enum.Enum):
    """Item classification schemes.

    COVER_CARDINAL: large when size >= 2/3, medium when 1/3 < size < 2/3.
    HALF_THIRD:     large when size > 1/2,  medium when 1/3 < size <= 1/2.
    Small is everything else (size <= 1/3) in both schemes.
    """

    COVER_CARDINAL = "cover-cardinal"
    HALF_THIRD = "half-third"


class ItemClass(enum.Enum):
    LARGE = "large"
    MEDIUM = "medium"
    SMALL = "small"


def classify_item(size: Fraction, scheme: Scheme) -> ItemClass:
    """Classify a single size under the given scheme; boundaries are exact."""
    if not ZERO < size <= ONE:
        raise InvalidSizeError(f"size {size} outside (0, 1]")
    if scheme is Scheme.COVER_CARDINAL:
        if size >= TWO_THIRDS:
            return ItemClass.LARGE
        if size > ONE_THIRD:
            return ItemClass.MEDIUM
        return ItemClass.SMALL
    if size > ONE_HALF:
        return ItemClass.LARGE
    if size > ONE_THIRD:
        return ItemClass.MEDIUM
    return ItemClass.SMALL


@dataclass(frozen=True)
class Instance:
    """n agents, m items, agent-specific exact sizes, unit bin capacity."""

    sizes: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if not self.sizes:
            raise InvalidSizeError("instance needs at least one agent")
        m = len(self.sizes[0])
        if m == 0:
            raise InvalidSizeError("instance needs at least one item")
        for row in self.sizes:
            if len(row) != m:
                raise InvalidSizeError("ragged size matrix")
            for s in row:
                if not isinstance(s, Fraction):
                    raise InvalidSizeError(f"size {s!r} is not a Fraction")
                if not ZERO < s <= ONE:
                    raise InvalidSizeError(f"size {s} outside (0, 1]")

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def m(self) -> int:
        return len(self.sizes[0])

    @property
    def items(self) -> range:
        return range(self.m)

    def size(self, agent: int, item: int) -> Fraction:
        return self.sizes[agent][item]

    def row(self, agent: int) -> tuple[Fraction, ...]:
        return self.sizes[agent]

    @staticmethod
    def from_rows(rows: Iterable[Sequence[Fraction | int | str]]) -> "Instance":
        return Instance(
            tuple(tuple(Fraction(s) for s in row) for row in rows)
        )


def bundle_size(instance: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    """Exact total size of a bundle in the agent's sizes."""
    row = instance.sizes[agent]
    return sum((row[e] for e in bundle), start=ZERO)


def is_ido(instance: Instance) -> bool:
    """True iff every agent's size row is non-increasing in item index."""
    return all(
        all(row[j] >= row[j + 1] for j in range(instance.m - 1))
        for row in instance.sizes
    )


@dataclass(frozen=True)
class Allocation:
    """One bundle per agent; bundles are pairwise disjoint."""

    bundles: tuple[Bundle, ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for b in self.bundles:
            if seen & b:
                raise InvalidAllocationError("bundles are not pairwise disjoint")
            seen |= b

    @property
    def n(self) -> int:
        return len(self.bundles)

    def assigned_items(self) -> frozenset[int]:
        out: set[int] = set()
        for b in self.bundles:
            out |= b
        return frozenset(out)

    def is_partition_of(self, m: int) -> bool:
        return self.assigned_items() == frozenset(range(m))

    def require_partition_of(self, m: int) -> None:
        if not self.is_partition_of(m):
            raise InvalidAllocationError(
                "allocation does not cover the full item set"
            )


@dataclass(frozen=True)
class BinPartition:
    """A split of one parent bundle into bins, with per-bin totals.

    The totals are stated for one specific agent and always recompute
    exactly from the instance; bins jointly partition the parent bundle.
    """

    bins: tuple[Bundle, ...]
    per_bin_total: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.bins) != len(self.per_bin_total):
            raise InvalidWitnessError("bin/total length mismatch")
        seen: set[int] = set()
        for b in self.bins:
            if seen & b:
                raise InvalidWitnessError("bins overlap")
            seen |= b

    def parent(self) -> Bundle:
        out: set[int] = set()
        for b in self.bins:
            out |= b
        return frozenset(out)

    @staticmethod
    def from_bins(
        instance: Instance, agent: int, bins: Sequence[Iterable[int]]
    ) -> "BinPartition":
        frozen = tuple(frozenset(b) for b in bins)
        totals = tuple(bundle_size(instance, agent, b) for b in frozen)
        return BinPartition(frozen, totals)


@dataclass(frozen=True)
class MmsCertificate:
    """An agent's maximin-share value plus the witnessing n-partition.

    model "covering": every witness part covers at least kappa bins.
    model "packing":  every witness part packs into at most kappa bins.
    """

    kappa: int
    witness: tuple[Bundle, ...]
    model: str = "covering"

    def __post_init__(self) -> None:
        if self.kappa < 0:
            raise InvalidWitnessError("kappa must be non-negative")
        if self.model not in ("covering", "packing"):
            raise InvalidWitnessError(f"unknown model {self.model!r}")
        seen: set[int] = set()
        for part in self.witness:
            if seen & part:
                raise InvalidWitnessError("witness parts overlap")
            seen |= part


def require_witness_partition(
    witness: Sequence[Bundle], m: int, what: str = "witness"
) -> None:
    """Check that the given parts exactly partition the item set [0, m)."""
    seen: set[int] = set()
    for part in witness:
        if seen & part:
            raise InvalidWitnessError(f"{what} parts overlap")
        seen |= part
    if seen != set(range(m)):
        raise InvalidWitnessError(f"{what} does not partition the item set")
