"""Ordinal cover solver: round-robin plus a per-agent bin construction.

Round-robin over an IDO instance hands agent i the items i, i+n, i+2n, ...
(0-based). Each agent then turns her bundle into covered bins: large items
and pairs of medium items are first fused into "synthesized" items, all of
size above 1/2, and the bins are covered with small items in an order that
guarantees at least ceil(3/4 * kappa - 7/4) covered bins.

Classification here is the half/third scheme: large above 1/2, medium in
(1/3, 1/2], small at most 1/3.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ContractViolationError, TheoremViolationError
from .model import (
    ONE,
    ONE_THIRD,
    TWO_THIRDS,
    ZERO,
    Allocation,
    BinPartition,
    Bundle,
    Instance,
    ItemClass,
    Scheme,
    classify_item,
    is_ido,
)

THREE_QUARTERS_SLOPE = Fraction(3, 4)
ORDINAL_COVER_OFFSET = Fraction(7, 4)


def ordinal_cover_bound(kappa: int) -> int:
    """The guaranteed number of covered bins: ceil(3/4 * kappa - 7/4)."""
    value = THREE_QUARTERS_SLOPE * kappa - ORDINAL_COVER_OFFSET
    return -(-value.numerator // value.denominator)


def round_robin(instance: Instance) -> Allocation:
    """Picking order allocation on an IDO instance: agent i takes i, i+n, ..."""
    if not is_ido(instance):
        raise ContractViolationError("round robin requires an IDO instance")
    n = instance.n
    bundles = [frozenset(range(i, instance.m, n)) for i in range(n)]
    return Allocation(tuple(bundles))


@dataclass(frozen=True)
class SynthesizedItem:
    """One or more original items acting as a single unit of size > 1/2."""

    ids: tuple[int, ...]
    size: Fraction


@dataclass(frozen=True)
class SynthesizedSet:
    items: tuple[SynthesizedItem, ...]  # descending size


def synthesize(instance: Instance, agent: int, bundle: Bundle) -> SynthesizedSet:
    """Fuse the bundle's large and medium items into units above 1/2.

    Larges stand alone. Mediums are merged two at a time, always the two
    largest remaining. A lone leftover medium joins the set directly when
    it plus the smallest unit reach 1 together; otherwise it melts into
    that smallest unit.
    """
    row = instance.sizes[agent]
    larges: list[int] = []
    mediums: list[int] = []
    for e in sorted(bundle):
        cls = classify_item(row[e], Scheme.HALF_THIRD)
        if cls is ItemClass.LARGE:
            larges.append(e)
        elif cls is ItemClass.MEDIUM:
            mediums.append(e)
    units = [SynthesizedItem((e,), row[e]) for e in larges]
    mediums.sort(key=lambda e: (-row[e], e))
    while len(mediums) >= 2:
        a, b = mediums.pop(0), mediums.pop(0)
        units.append(SynthesizedItem(tuple(sorted((a, b))), row[a] + row[b]))
    if mediums:
        last = mediums[0]
        if not units:
            units.append(SynthesizedItem((last,), row[last]))
        else:
            smallest = min(units, key=lambda u: (u.size, u.ids))
            if row[last] + smallest.size >= ONE:
                units.append(SynthesizedItem((last,), row[last]))
            else:
                units.remove(smallest)
                units.append(
                    SynthesizedItem(
                        tuple(sorted(smallest.ids + (last,))),
                        smallest.size + row[last],
                    )
                )
    units.sort(key=lambda u: (-u.size, u.ids))
    return SynthesizedSet(tuple(units))


class _Bin:
    __slots__ = ("items", "total")

    def __init__(self) -> None:
        self.items: set[int] = set()
        self.total: Fraction = ZERO

    def add_unit(self, unit: SynthesizedItem) -> None:
        self.items.update(unit.ids)
        self.total += unit.size

    def add_small(self, item: int, size: Fraction) -> None:
        self.items.add(item)
        self.total += size


def _fill_until_covered(b: _Bin, smalls: list[tuple[int, Fraction]]) -> None:
    # smalls descending; consumed from the front
    while b.total < ONE and smalls:
        item, size = smalls.pop(0)
        b.add_small(item, size)


def cover_construct(
    instance: Instance, agent: int, bundle: Bundle, kappa: int
) -> tuple[int, BinPartition]:
    """Cover bins inside a round-robin bundle; guarantee the ordinal bound.

    With z = ceil(3/4 * kappa - 7/4) and k synthesized units: when the
    bound is vacuous (z <= 0) or k is small, every unit opens a bin and is
    topped up to 1 with smalls. Otherwise: cover k - z bins two units
    each (smallest first); pair off remaining units of size <= 2/3; open
    one bin per leftover unit and cover them with smalls in ascending unit
    size starting from the second smallest, the smallest unit's bin last;
    finally greedy small-only bins. Uncovered remnants join the last
    covered bin so the result partitions the bundle.
    """
    row = instance.sizes[agent]
    synth = synthesize(instance, agent, bundle)
    units = list(synth.items)
    k = len(units)
    smalls = sorted(
        (
            (e, row[e])
            for e in bundle
            if classify_item(row[e], Scheme.HALF_THIRD) is ItemClass.SMALL
        ),
        key=lambda pair: (-pair[1], pair[0]),
    )
    z = ordinal_cover_bound(kappa)
    bins: list[_Bin] = []

    use_case_one = z <= 0 or Fraction(k) <= THREE_QUARTERS_SLOPE * kappa - Fraction(1, 2)
    if use_case_one:
        for unit in units:
            b = _Bin()
            b.add_unit(unit)
            bins.append(b)
        for b in bins:
            _fill_until_covered(b, smalls)
    else:
        step_one = min(k - z, k // 2)
        pool = list(units)
        for _ in range(step_one):
            b = _Bin()
            b.add_unit(pool.pop())
            b.add_unit(pool.pop())
            bins.append(b)
        while (
            len([u for u in pool if u.size <= TWO_THIRDS]) >= 2
        ):
            b = _Bin()
            b.add_unit(pool.pop())
            b.add_unit(pool.pop())
            bins.append(b)
        # pool now holds the l largest units; at most the last one is <= 2/3
        if len(pool) >= 2:
            assert pool[-2].size > TWO_THIRDS
            assert pool[-1].size >= ONE_THIRD
        solo_bins = [(_Bin(), u) for u in pool]
        for b, u in solo_bins:
            b.add_unit(u)
        fill_order = list(range(len(pool) - 2, -1, -1)) + (
            [len(pool) - 1] if pool else []
        )
        for idx in fill_order:
            _fill_until_covered(solo_bins[idx][0], smalls)
        bins.extend(b for b, _ in solo_bins)
    # greedy small-only bins
    while smalls:
        b = _Bin()
        _fill_until_covered(b, smalls)
        bins.append(b)
        if b.total < ONE:
            break

    covered = [b for b in bins if b.total >= ONE]
    uncovered = [b for b in bins if b.total < ONE]
    leftover: set[int] = set()
    for b in uncovered:
        leftover |= b.items
    if covered:
        if leftover:
            covered[-1].items |= leftover
            covered[-1].total += sum((row[e] for e in leftover), start=ZERO)
        final = [b.items for b in covered]
    else:
        final = [set(bundle)] if bundle else []
    count = len(covered)
    if z > 0 and count < z:
        raise TheoremViolationError(
            f"covered {count} bins, guarantee demands {z} (kappa={kappa})"
        )
    return count, BinPartition.from_bins(instance, agent, final)


@dataclass(frozen=True)
class CoverOrdinalResult:
    allocation: Allocation
    covered: tuple[int, ...]
    witnesses: tuple[BinPartition, ...]
    bounds: tuple[int, ...]


def run_cover_ordinal(
    instance: Instance, kappas: Sequence[int]
) -> CoverOrdinalResult:
    """Round-robin the IDO instance, then build each agent's covered bins."""
    if len(kappas) != instance.n:
        raise ContractViolationError("need one kappa per agent")
    allocation = round_robin(instance)
    covered: list[int] = []
    witnesses: list[BinPartition] = []
    for agent, bundle in enumerate(allocation.bundles):
        count, witness = cover_construct(instance, agent, bundle, kappas[agent])
        covered.append(count)
        witnesses.append(witness)
    bounds = tuple(ordinal_cover_bound(k) for k in kappas)
    return CoverOrdinalResult(allocation, tuple(covered), tuple(witnesses), bounds)
