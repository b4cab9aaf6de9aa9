"""Cardinal cover solver: every agent gets kappa_i bins, each at least 2/3 full.

Round structure: a divider (the remaining agent holding the most large and
medium items) lays the remaining items out in a boustrophedon arrangement,
packs each column's large/medium items into at most kappa bins of total at
most 1, then tops every bin up to 2/3 with small items. Parts are handed
out through a maximum-cardinality envy-free matching, so an agent only
keeps a part she can herself split into kappa_l bins of 2/3.

Classification and bin feasibility use per-agent scaled sizes (every MMS
group rescaled to total exactly 1); the arrangement follows the common
pre-scale IDO order. Final witnesses are stated in the instance's own
sizes, which dominate the scaled ones, so the 2/3 guarantee carries over.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    AlgorithmStuckError,
    ContractViolationError,
    InvalidWitnessError,
    LemmaViolationError,
)
from .matching import BipartiteGraph, max_cardinality_envy_free_matching
from .model import (
    ONE,
    TWO_THIRDS,
    ZERO,
    Allocation,
    BinPartition,
    Bundle,
    Instance,
    ItemClass,
    MmsCertificate,
    Scheme,
    classify_item,
    is_ido,
)
from .oracles import _feasible_pack, _integerize, rescale_exact_cover


@dataclass(frozen=True)
class Arrangement:
    """Boustrophedon layout: column j holds the j-th, (2w-j+1)-th, (2w+j)-th,
    ... largest items (1-based), so column loads differ by at most one."""

    width: int
    columns: tuple[tuple[int, ...], ...]

    def item_set(self) -> frozenset[int]:
        out: set[int] = set()
        for col in self.columns:
            out |= set(col)
        return frozenset(out)


def build_arrangement(items_by_desc_size: Sequence[int], width: int) -> Arrangement:
    if width <= 0:
        raise ContractViolationError("arrangement width must be positive")
    columns: list[list[int]] = [[] for _ in range(width)]
    for rank, item in enumerate(items_by_desc_size):
        block, pos = divmod(rank, width)
        col = pos if block % 2 == 0 else width - 1 - pos
        columns[col].append(item)
    return Arrangement(width, tuple(tuple(c) for c in columns))


@dataclass(frozen=True)
class ScaledCoverCertificate:
    """Per-agent input to the solver: kappa, rescaled sizes, unit groups."""

    kappa: int
    scaled: tuple[Fraction, ...]
    groups: tuple[Bundle, ...]


def prepare_scaled_certificates(
    instance: Instance, certificates: Sequence[MmsCertificate]
) -> tuple[ScaledCoverCertificate, ...]:
    """Rescale each agent's sizes along her covering MMS witness.

    kappa = 0 agents keep their original sizes and carry no groups; they
    are satisfied by any bundle.
    """
    if len(certificates) != instance.n:
        raise InvalidWitnessError("need one certificate per agent")
    out = []
    for agent, cert in enumerate(certificates):
        if cert.kappa == 0:
            out.append(ScaledCoverCertificate(0, instance.sizes[agent], ()))
            continue
        scaled, groups = rescale_exact_cover(
            instance, agent, cert.witness, cert.kappa
        )
        out.append(ScaledCoverCertificate(cert.kappa, scaled, groups))
    return tuple(out)


@dataclass(frozen=True)
class RefinedFH:
    """Large-plus-solo-medium items (F) and the paired mediums (H).

    H holds the 2p smallest mediums (p = number of groups carrying two
    mediums), ordered by descending scaled size: the fixed point of the
    swap procedure that always prefers pairing smaller mediums.
    """

    f_items: frozenset[int]
    h_items: tuple[int, ...]


def refined_fh(
    scaled: Sequence[Fraction],
    groups: Sequence[Bundle],
    kappa: int,
    n: int,
) -> RefinedFH:
    """Derive the refined F/H split from exactly-covered witness groups.

    Validates the group structure (total exactly 1; at most one large or
    at most two mediums per group) and the pairing feasibility condition:
    any two H items whose ranks sum past |H| must fit in one bin together.
    """
    pair_groups = 0
    all_mediums: list[int] = []
    larges: list[int] = []
    for group in groups:
        total = sum((scaled[e] for e in group), start=ZERO)
        if total != ONE:
            raise InvalidWitnessError(f"group total {total} != 1 after rescaling")
        g_larges = [e for e in group if classify_item(scaled[e], Scheme.COVER_CARDINAL) is ItemClass.LARGE]
        g_mediums = [e for e in group if classify_item(scaled[e], Scheme.COVER_CARDINAL) is ItemClass.MEDIUM]
        if len(g_larges) > 1 or len(g_mediums) > 2 or (g_larges and g_mediums):
            raise InvalidWitnessError("group holds more than one large or two mediums")
        if len(g_mediums) == 2:
            pair_groups += 1
        all_mediums.extend(g_mediums)
        larges.extend(g_larges)
    all_mediums.sort(key=lambda e: (scaled[e], e))
    h_set = all_mediums[: 2 * pair_groups]
    f_items = frozenset(larges) | frozenset(all_mediums[2 * pair_groups :])
    h_items = tuple(sorted(h_set, key=lambda e: (-scaled[e], e)))
    if len(f_items) + len(h_items) // 2 > kappa * n:
        raise InvalidWitnessError("F/H counting bound violated")
    size = len(h_items)
    for r in range(size // 2):
        if scaled[h_items[r]] + scaled[h_items[size - 1 - r]] > ONE:
            raise InvalidWitnessError("paired mediums cannot share a bin")
    return RefinedFH(f_items, h_items)


@dataclass(frozen=True)
class PartProposal:
    """A proposed part: its items plus the divider's kappa-bin witness."""

    items: Bundle
    bins: tuple[Bundle, ...]


def pack_column(
    scaled: Sequence[Fraction],
    f_col: Sequence[int],
    h_col: Sequence[int],
    kappa: int,
    exact_cap: int = 16,
) -> list[set[int]] | None:
    """Pack a column's F/H items into at most kappa bins of total <= 1.

    F items go solo. H items (descending size) are paired largest with
    smallest; if some pair overflows, the largest one or two H items are
    packed solo first and the rest re-paired. When all three schemes fail,
    an exact search over the column stands in (the round only needs *some*
    split into at most kappa unit bins). Returns None when even that fails.
    """
    bins: list[set[int]] = [{e} for e in f_col]
    t = len(h_col)
    for solo_count in range(min(2, t) + 1):
        h_bins: list[set[int]] = [{h_col[s]} for s in range(solo_count)]
        rest = list(h_col[solo_count:])
        lo, hi = 0, len(rest) - 1
        feasible = True
        while lo < hi:
            if scaled[rest[lo]] + scaled[rest[hi]] > ONE:
                feasible = False
                break
            h_bins.append({rest[lo], rest[hi]})
            lo += 1
            hi -= 1
        if lo == hi:
            h_bins.append({rest[lo]})
        if feasible and len(bins) + len(h_bins) <= kappa:
            return bins + h_bins
    every = list(f_col) + list(h_col)
    if 0 < len(every) <= exact_cap and kappa > 0:
        ordered = sorted(every, key=lambda e: (-scaled[e], e))
        ints, scale = _integerize([scaled[e] for e in ordered])
        assign = _feasible_pack(ints, kappa, scale)
        if assign is not None:
            packed: list[set[int]] = [set() for _ in range(kappa)]
            for item, b in zip(ordered, assign):
                packed[b].add(item)
            return [b for b in packed if b]
    if not every:
        return []
    return None


def _pack_balanced(
    scaled: Sequence[Fraction], items: Sequence[int], kappa: int
) -> list[set[int]]:
    """Spread items over exactly kappa bins, largest first to the emptiest bin.

    Fallback for columns whose large/medium items cannot fit in kappa unit
    bins: bins may overshoot 1, which wastes mass but never hurts the
    2/3-per-bin goal.
    """
    bins: list[set[int]] = [set() for _ in range(kappa)]
    totals: list[Fraction] = [ZERO] * kappa
    for e in sorted(items, key=lambda x: (-scaled[x], x)):
        b = min(range(kappa), key=lambda i: (totals[i], i))
        bins[b].add(e)
        totals[b] += scaled[e]
    return bins


class _SmallPool:
    """Unassigned small items in descending scaled size, consumed in order."""

    def __init__(self, items: list[int]):
        self._items = items
        self._pos = 0

    def take(self) -> int | None:
        if self._pos == len(self._items):
            return None
        item = self._items[self._pos]
        self._pos += 1
        return item


def _fill_to_threshold(
    scaled: Sequence[Fraction],
    bins: list[set[int]],
    pool: _SmallPool,
    threshold: Fraction = TWO_THIRDS,
) -> bool:
    """Top each bin up to `threshold` with items from the pool."""
    for b in bins:
        total = sum((scaled[e] for e in b), start=ZERO)
        while total < threshold:
            item = pool.take()
            if item is None:
                return False
            b.add(item)
            total += scaled[item]
    return True


def create_parts(
    instance: Instance,
    divider_cert: ScaledCoverCertificate,
    divider_fh: RefinedFH,
    arrangement: Arrangement,
    remaining_items: frozenset[int],
    absorb_all: bool = False,
) -> list[PartProposal]:
    """Build one part per arrangement column for the divider.

    Each part carries the column's F/H items packed into exactly kappa
    bins (padded with empty bins), every bin topped up to at least 2/3
    with small items drawn from a shared pool. With `absorb_all` the
    single part additionally swallows every remaining item (final round).
    """
    scaled = divider_cert.scaled
    kappa = divider_cert.kappa
    f_set, h_list = divider_fh.f_items, divider_fh.h_items
    smalls = sorted(
        (
            e
            for e in remaining_items
            if classify_item(scaled[e], Scheme.COVER_CARDINAL) is ItemClass.SMALL
        ),
        key=lambda e: (-scaled[e], e),
    )
    pool = _SmallPool(smalls)
    parts: list[PartProposal] = []
    used: set[int] = set()
    for column in arrangement.columns:
        f_col = sorted((e for e in column if e in f_set), key=lambda e: (-scaled[e], e))
        h_col = [e for e in h_list if e in set(column)]
        bins = pack_column(scaled, f_col, h_col, kappa)
        if bins is None:
            # Unit bins are a means, not the goal: overshooting bins still
            # reach 2/3, so balance the column across exactly kappa bins.
            bins = _pack_balanced(scaled, f_col + h_col, kappa)
        while len(bins) < kappa:
            bins.append(set())
        if not _fill_to_threshold(scaled, bins, pool):
            raise LemmaViolationError(
                "small items exhausted before every bin reached 2/3"
            )
        items = set()
        for b in bins:
            items |= b
        used |= items
        parts.append(PartProposal(frozenset(items), tuple(frozenset(b) for b in bins)))
    if absorb_all:
        leftovers = set(remaining_items) - used
        if leftovers:
            only = parts[0]
            bins = [set(b) for b in only.bins]
            if bins:
                bins[-1] |= leftovers
            else:
                bins = [leftovers]
            parts[0] = PartProposal(
                frozenset(only.items | leftovers),
                tuple(frozenset(b) for b in bins),
            )
    return parts


def _constructive_fill(
    cert: ScaledCoverCertificate,
    fh: RefinedFH,
    part_items: Bundle,
) -> list[set[int]] | None:
    """The agent's own attempt to split a part into kappa bins of 2/3.

    Mirrors the divider's construction from this agent's perspective;
    None when the part does not satisfy her.
    """
    scaled = cert.scaled
    if cert.kappa == 0:
        return [set(part_items)] if part_items else []
    part_total = sum((scaled[e] for e in part_items), start=ZERO)
    if part_total < TWO_THIRDS * cert.kappa:
        return None
    f_col = sorted(
        (e for e in part_items if e in fh.f_items), key=lambda e: (-scaled[e], e)
    )
    h_col = [e for e in fh.h_items if e in part_items]
    bins = pack_column(scaled, f_col, h_col, cert.kappa)
    if bins is None:
        bins = _pack_balanced(scaled, f_col + h_col, cert.kappa)
    while len(bins) < cert.kappa:
        bins.append(set())
    smalls = sorted(
        (
            e
            for e in part_items
            if classify_item(scaled[e], Scheme.COVER_CARDINAL) is ItemClass.SMALL
        ),
        key=lambda e: (-scaled[e], e),
    )
    if not _fill_to_threshold(scaled, bins, _SmallPool(smalls)):
        return None
    # Part items her fill did not need still belong to the bundle.
    spare = set(part_items)
    for b in bins:
        spare -= b
    if spare:
        bins[-1] |= spare
    return bins


def edge_predicate(
    cert: ScaledCoverCertificate,
    fh: RefinedFH,
    part_items: Bundle,
    mode: str = "constructive",
    exact_cap: int = 20,
) -> bool:
    """Is the agent satisfied with this part (kappa bins, each >= 2/3)?

    constructive: run the Lemma-2-style fill from her perspective.
    exact: exhaustive search for a kappa-partition with all totals >= 2/3
    (small parts only; used for oracle cross-checks).
    """
    if cert.kappa == 0:
        return True
    if mode == "constructive":
        return _constructive_fill(cert, fh, part_items) is not None
    if mode != "exact":
        raise ContractViolationError(f"unknown edge predicate mode {mode!r}")
    items = sorted(part_items)
    if len(items) > exact_cap:
        from .errors import CapacityExceededError

        raise CapacityExceededError(
            f"part of {len(items)} items exceeds exact predicate cap {exact_cap}"
        )
    scaled = cert.scaled
    total = sum((scaled[e] for e in items), start=ZERO)
    if total < TWO_THIRDS * cert.kappa:
        return False
    ordered = sorted(items, key=lambda e: (-scaled[e], e))
    values = [scaled[e] for e in ordered] + [TWO_THIRDS]
    ints, scale = _integerize(values)
    need = ints[-1]
    from .oracles import _feasible_cover

    return _feasible_cover(ints[:-1], cert.kappa, need) is not None


@dataclass(frozen=True)
class RoundRecord:
    divider: int
    width: int
    arrangement: Arrangement
    matched: tuple[tuple[int, int], ...]  # (agent, column index)


@dataclass(frozen=True)
class CoverCardinalResult:
    allocation: Allocation
    witnesses: tuple[BinPartition, ...]
    rounds: tuple[RoundRecord, ...]


def run_cover_cardinal(
    instance: Instance,
    scaled_certificates: Sequence[ScaledCoverCertificate],
) -> CoverCardinalResult:
    """Allocate all items so each agent can fill kappa_i bins to 2/3.

    Requires an IDO instance and per-agent scaled certificates. Witness
    bin totals are reported in the instance's own sizes.
    """
    if not is_ido(instance):
        raise ContractViolationError("cardinal cover solver requires an IDO instance")
    n, m = instance.n, instance.m
    if len(scaled_certificates) != n:
        raise ContractViolationError("need one scaled certificate per agent")
    fh: list[RefinedFH] = []
    for cert in scaled_certificates:
        if cert.kappa == 0:
            fh.append(RefinedFH(frozenset(), ()))
        else:
            fh.append(refined_fh(cert.scaled, cert.groups, cert.kappa, n))

    remaining_agents: list[int] = list(range(n))
    remaining_items: set[int] = set(range(m))
    bundles: list[set[int]] = [set() for _ in range(n)]
    witness_bins: list[list[set[int]]] = [[] for _ in range(n)]
    rounds: list[RoundRecord] = []

    while remaining_agents:
        active = [i for i in remaining_agents if scaled_certificates[i].kappa > 0]
        if not active:
            sink = remaining_agents[0]
            if remaining_items:
                bundles[sink] = set(remaining_items)
                witness_bins[sink] = [set(remaining_items)]
            remaining_items.clear()
            remaining_agents.clear()
            break

        width = len(remaining_agents)

        def lm_count(agent: int) -> int:
            scaled = scaled_certificates[agent].scaled
            return sum(
                1
                for e in remaining_items
                if classify_item(scaled[e], Scheme.COVER_CARDINAL)
                is not ItemClass.SMALL
            )

        divider = min(active, key=lambda i: (-lm_count(i), i))
        # The column layout follows the divider's scaled order: her F items
        # are exactly the top-ranked remaining items there, then H, then
        # smalls, which is what the column-packing argument needs.
        divider_scaled = scaled_certificates[divider].scaled
        arrangement = build_arrangement(
            sorted(remaining_items, key=lambda e: (-divider_scaled[e], e)), width
        )
        parts = create_parts(
            instance,
            scaled_certificates[divider],
            fh[divider],
            arrangement,
            frozenset(remaining_items),
            absorb_all=(width == 1),
        )

        fills: dict[tuple[int, int], list[set[int]]] = {}
        edges: list[tuple[int, int]] = []
        for agent in remaining_agents:
            for j, part in enumerate(parts):
                fill = _constructive_fill(
                    scaled_certificates[agent], fh[agent], part.items
                )
                if fill is not None:
                    fills[(agent, j)] = fill
                    edges.append((agent, j))
        if any((divider, j) not in fills for j in range(width)):
            raise AlgorithmStuckError("divider rejects one of her own parts")

        graph = BipartiteGraph.build(list(remaining_agents), range(width), edges)
        matching = max_cardinality_envy_free_matching(graph)
        if not matching:
            raise AlgorithmStuckError("empty envy-free matching in a round")
        if divider not in matching:
            raise AlgorithmStuckError("divider left unmatched in her own round")

        for agent, j in matching.items():
            bundles[agent] = set(parts[j].items)
            witness_bins[agent] = fills[(agent, j)]
            remaining_items -= parts[j].items
        remaining_agents = [a for a in remaining_agents if a not in matching]
        rounds.append(
            RoundRecord(divider, width, arrangement, tuple(sorted(matching.items())))
        )

        if not remaining_agents and remaining_items:
            # Final round matched everyone: leftovers ride with the divider.
            bundles[divider] |= remaining_items
            if witness_bins[divider]:
                witness_bins[divider][-1] |= remaining_items
            else:
                witness_bins[divider] = [set(remaining_items)]
            remaining_items.clear()

    allocation = Allocation(tuple(frozenset(b) for b in bundles))
    allocation.require_partition_of(m)
    witnesses = tuple(
        BinPartition.from_bins(instance, agent, witness_bins[agent])
        for agent in range(n)
    )
    return CoverCardinalResult(allocation, witnesses, tuple(rounds))
