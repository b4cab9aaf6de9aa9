"""Ordinal pack solver: bag initialization/filling plus per-agent packing.

The allocator walks n fixed columns (column j holds items j, j+n, j+2n,
... of the IDO order). Each round seeds a bag with the column's prefix of
items that some remaining agent still classifies large-or-medium, then
keeps adding the globally smallest remaining item while some agent finds
her bag share small enough and still has unallocated small items. That
agent leaves with the bag.

Each agent then packs her bundle into unit bins: the instance-wide
large/medium items split into the 2k smallest (pairable) and the rest,
driving a near-balanced pairing; smalls are poured in and rebalanced so
the final bin count stays within floor(4/3 * kappa + 4/3).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ContractViolationError, TheoremViolationError
from .model import (
    ONE,
    TWO_THIRDS,
    ZERO,
    Allocation,
    BinPartition,
    Bundle,
    Instance,
    ItemClass,
    Scheme,
    classify_item,
    bundle_size,
    is_ido,
)
from .oracles import max_disjoint_pairs

FOUR_THIRDS = Fraction(4, 3)


def ordinal_pack_bound(kappa: int) -> int:
    """The guaranteed bin budget: floor(4/3 * kappa + 4/3)."""
    value = FOUR_THIRDS * kappa + FOUR_THIRDS
    return value.numerator // value.denominator


@dataclass(frozen=True)
class PackRound:
    owner: int
    items: tuple[int, ...]  # in the order they entered the bag
    phases: tuple[str, ...]  # "init" or "fill", aligned with items


@dataclass(frozen=True)
class PackOrdinalResult:
    allocation: Allocation
    rounds: tuple[PackRound, ...]


def run_pack_ordinal(instance: Instance) -> PackOrdinalResult:
    """Allocate all items through n rounds of bag initialization and filling."""
    if not is_ido(instance):
        raise ContractViolationError("pack solver requires an IDO instance")
    n, m = instance.n, instance.m
    shares = [bundle_size(instance, i, range(m)) / n for i in range(n)]
    small_for = [
        [
            classify_item(instance.sizes[i][e], Scheme.HALF_THIRD) is ItemClass.SMALL
            for e in range(m)
        ]
        for i in range(n)
    ]
    remaining_agents: list[int] = list(range(n))
    unallocated: set[int] = set(range(m))
    bundles: list[frozenset[int]] = [frozenset()] * n
    rounds: list[PackRound] = []

    for column in range(n):
        bag: list[int] = []
        phases: list[str] = []
        bag_total = [ZERO] * n
        owner: int | None = None

        t = column
        while t < m and t in unallocated:
            qualifiers = [i for i in remaining_agents if not small_for[i][t]]
            if not qualifiers:
                break
            bag.append(t)
            phases.append("init")
            unallocated.discard(t)
            for i in range(n):
                bag_total[i] += instance.sizes[i][t]
            owner = qualifiers[0]
            t += n

        while True:
            chosen = None
            for i in remaining_agents:
                if bag_total[i] <= shares[i] and any(
                    small_for[i][e] for e in unallocated
                ):
                    chosen = i
                    break
            if chosen is None:
                break
            owner = chosen
            item = max(unallocated)
            bag.append(item)
            phases.append("fill")
            unallocated.discard(item)
            for i in range(n):
                bag_total[i] += instance.sizes[i][item]

        if owner is None:
            owner = remaining_agents[0]
        bundles[owner] = frozenset(bag)
        remaining_agents.remove(owner)
        rounds.append(PackRound(owner, tuple(bag), tuple(phases)))

    if unallocated:
        raise TheoremViolationError("items left unallocated after the final round")
    allocation = Allocation(tuple(bundles))
    allocation.require_partition_of(m)
    return PackOrdinalResult(allocation, tuple(rounds))


@dataclass(frozen=True)
class HSplit:
    """Instance-wide split of an agent's large/medium items.

    k comes from the maximum disjoint pairing; hstar holds the 2k smallest
    of those items (they pair up within unit bins), hprime the rest. The
    packing cost of the whole large/medium set is len(hstar+hprime) - k.
    """

    k: int
    hstar: frozenset[int]
    hprime: frozenset[int]


def split_large_medium(instance: Instance, agent: int) -> HSplit:
    row = instance.sizes[agent]
    heavy = [
        e
        for e in range(instance.m)
        if classify_item(row[e], Scheme.HALF_THIRD) is not ItemClass.SMALL
    ]
    ordered = sorted(heavy, key=lambda e: (row[e], -e))
    k = max_disjoint_pairs([row[e] for e in ordered])
    return HSplit(k, frozenset(ordered[: 2 * k]), frozenset(ordered[2 * k :]))


class _Bin:
    __slots__ = ("items", "total")

    def __init__(self) -> None:
        self.items: set[int] = set()
        self.total: Fraction = ZERO

    def add(self, item: int, size: Fraction) -> None:
        self.items.add(item)
        self.total += size

    def remove(self, item: int, size: Fraction) -> None:
        self.items.discard(item)
        self.total -= size


def _pack_heavy(
    row: Sequence[Fraction], hprime_items: list[int], hstar_items: list[int]
) -> list[_Bin]:
    """Unit bins for a bundle's large/medium items.

    hprime items go solo. hstar items, descending: the largest solo, then
    second with last, third with second-to-last, and so on; if some pair
    overflows, a smallest-with-largest-feasible sweep takes over.
    """
    bins: list[_Bin] = []
    for e in hprime_items:
        b = _Bin()
        b.add(e, row[e])
        bins.append(b)
    t = len(hstar_items)
    if t == 0:
        return bins
    desc = sorted(hstar_items, key=lambda e: (-row[e], e))
    candidate: list[set[int]] = [{desc[0]}]
    lo, hi = 1, t - 1
    feasible = True
    while lo < hi:
        if row[desc[lo]] + row[desc[hi]] > ONE:
            feasible = False
            break
        candidate.append({desc[lo], desc[hi]})
        lo += 1
        hi -= 1
    if lo == hi:
        candidate.append({desc[lo]})
    if not feasible:
        asc = list(reversed(desc))
        candidate = []
        lo, hi = 0, t - 1
        while lo < hi:
            if row[asc[lo]] + row[asc[hi]] <= ONE:
                candidate.append({asc[lo], asc[hi]})
                lo += 1
            else:
                candidate.append({asc[hi]})
            hi -= 1
        if lo == hi:
            candidate.append({asc[lo]})
        if len(candidate) > (t - 1 + 1) // 2 + 1:
            raise TheoremViolationError(
                "pair sweep exceeded the guaranteed heavy-bin count"
            )
    for group in candidate:
        b = _Bin()
        for e in group:
            b.add(e, row[e])
        bins.append(b)
    return bins


def _merge_bins(bins: list[_Bin]) -> list[_Bin]:
    """First-fit merge of whole bins; sums stay at most 1."""
    merged: list[_Bin] = []
    for b in bins:
        if not b.items:
            continue
        for target in merged:
            if target.total + b.total <= ONE:
                target.items |= b.items
                target.total += b.total
                break
        else:
            merged.append(b)
    return merged


def pack_construct(
    instance: Instance, agent: int, bundle: Bundle, kappa: int
) -> tuple[int, BinPartition]:
    """Pack a bundle into unit bins within the ordinal budget.

    Heavy items are packed via `_pack_heavy` into at most kappa + 2 bins
    (padded with empties); smalls are added ascending to the first bin not
    yet past 1; bins past 1 then donate their largest small to bins still
    under 2/3; each bin still past 1 finally sheds its largest small, and
    the shed smalls go three per extra bin. A closing first-fit merge
    removes fragmentation. Every final total is at most 1 and the bin
    count at most floor(4/3 * kappa + 4/3).
    """
    row = instance.sizes[agent]
    items = sorted(bundle)
    if not items:
        return 0, BinPartition((), ())
    split = split_large_medium(instance, agent)
    hprime_items = [e for e in items if e in split.hprime]
    hstar_items = [e for e in items if e in split.hstar]
    smalls = [
        e
        for e in items
        if classify_item(row[e], Scheme.HALF_THIRD) is ItemClass.SMALL
    ]

    bins = _pack_heavy(row, hprime_items, hstar_items)
    if len(bins) > kappa + 2:
        raise TheoremViolationError(
            f"heavy items needed {len(bins)} bins, budget is kappa + 2 = {kappa + 2}"
        )
    while len(bins) < kappa + 2:
        bins.append(_Bin())

    # Step B: pour smalls (ascending size) into the first bin not past 1.
    for e in sorted(smalls, key=lambda x: (row[x], -x)):
        target = next((b for b in bins if b.total <= ONE), None)
        if target is None:
            raise TheoremViolationError("all bins past 1 while smalls remain")
        target.add(e, row[e])

    def largest_small(b: _Bin) -> int | None:
        inside = [e for e in b.items if e in set(smalls)]
        if not inside:
            return None
        return max(inside, key=lambda e: (row[e], -e))

    # Step C: rebalance from overfull bins into underfull ones.
    while True:
        receiver = next((b for b in bins if b.total <= TWO_THIRDS), None)
        donor = next(
            (b for b in bins if b.total > ONE and largest_small(b) is not None),
            None,
        )
        if receiver is None or donor is None:
            break
        moved = largest_small(donor)
        donor.remove(moved, row[moved])
        receiver.add(moved, row[moved])

    over = [b for b in bins if b.total > ONE]
    if over and len(over) > max(kappa - 4, 0):
        raise TheoremViolationError(
            f"{len(over)} bins past 1 before the shedding step, "
            f"budget allows {max(kappa - 4, 0)}"
        )

    # Step D: overfull bins shed their largest small; shed smalls go 3 per bin.
    shed: list[int] = []
    for b in over:
        e = largest_small(b)
        if e is None or b.total - row[e] > ONE:
            raise TheoremViolationError("overfull bin cannot shed back to 1")
        b.remove(e, row[e])
        shed.append(e)
    for start in range(0, len(shed), 3):
        b = _Bin()
        for e in shed[start : start + 3]:
            b.add(e, row[e])
        bins.append(b)

    bins = _merge_bins(bins)
    budget = ordinal_pack_bound(kappa)
    if len(bins) > budget:
        raise TheoremViolationError(
            f"witness uses {len(bins)} bins, budget is {budget} (kappa={kappa})"
        )
    for b in bins:
        if b.total > ONE:
            raise TheoremViolationError("final bin total exceeds 1")
    return len(bins), BinPartition.from_bins(instance, agent, [b.items for b in bins])


def check_trace_invariants(instance: Instance, result: PackOrdinalResult) -> None:
    """Assert the allocator's bag-share invariants from a recorded run.

    For every owner whose last bag item was small for her, the bag without
    that item stays within her proportional share; and whenever an agent
    still had unallocated smalls after an earlier round, that round's
    bundle exceeded her share. Raises on any violation.
    """
    n, m = instance.n, instance.m
    result.allocation.require_partition_of(m)
    shares = [bundle_size(instance, i, range(m)) / n for i in range(n)]
    small_for = [
        [
            classify_item(instance.sizes[i][e], Scheme.HALF_THIRD) is ItemClass.SMALL
            for e in range(m)
        ]
        for i in range(n)
    ]
    unallocated = set(range(m))
    remaining_after: list[frozenset[int]] = []
    owners: list[int] = []
    for rnd in result.rounds:
        unallocated -= set(rnd.items)
        remaining_after.append(frozenset(unallocated))
        owners.append(rnd.owner)
    if unallocated:
        raise TheoremViolationError("trace does not allocate every item")

    for rnd in result.rounds:
        if not rnd.items:
            continue
        last = rnd.items[-1]
        if small_for[rnd.owner][last]:
            without = bundle_size(instance, rnd.owner, set(rnd.items) - {last})
            if without > shares[rnd.owner]:
                raise TheoremViolationError(
                    "bag exceeded the owner's share before its final small item"
                )

    for earlier, rnd in enumerate(result.rounds):
        for later in range(earlier + 1, len(result.rounds)):
            agent = owners[later]
            if any(small_for[agent][e] for e in remaining_after[earlier]):
                if bundle_size(instance, agent, rnd.items) <= shares[agent]:
                    raise TheoremViolationError(
                        "an earlier bundle fit a later agent's share while her "
                        "smalls were still unallocated"
                    )


@dataclass(frozen=True)
class PackSolveResult:
    allocation: Allocation
    bins_used: tuple[int, ...]
    witnesses: tuple[BinPartition, ...]
    bounds: tuple[int, ...]
    rounds: tuple[PackRound, ...]


def run_pack_ordinal_with_witnesses(
    instance: Instance, kappas: Sequence[int]
) -> PackSolveResult:
    """Allocate, then build each agent's packing witness within her budget."""
    if len(kappas) != instance.n:
        raise ContractViolationError("need one kappa per agent")
    result = run_pack_ordinal(instance)
    used: list[int] = []
    witnesses: list[BinPartition] = []
    for agent, bundle in enumerate(result.allocation.bundles):
        count, witness = pack_construct(instance, agent, bundle, kappas[agent])
        used.append(count)
        witnesses.append(witness)
    bounds = tuple(ordinal_pack_bound(k) for k in kappas)
    return PackSolveResult(
        result.allocation, tuple(used), tuple(witnesses), bounds, result.rounds
    )
