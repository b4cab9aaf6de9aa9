"""Exact oracles: covering value, packing cost, maximin shares, rescaling.

Everything here is exponential-time exact search gated behind explicit size
caps. The approximation solvers never call these oracles; they consume the
resulting certificates as inputs. Internally sizes are scaled to integers
over the lcm of denominators so all arithmetic is exact and fast; results
are converted back to Fractions at the boundary.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

from .errors import (
    CapacityExceededError,
    ContractViolationError,
    InvalidWitnessError,
)
from .model import (
    ONE,
    ZERO,
    BinPartition,
    Bundle,
    Instance,
    MmsCertificate,
    require_witness_partition,
)

DEFAULT_BUNDLE_CAP = 20
DEFAULT_MMS_ITEM_CAP = 12
DEFAULT_MMS_AGENT_CAP = 4


def _integerize(values: Sequence[Fraction]) -> tuple[list[int], int]:
    scale = 1
    for f in values:
        scale = lcm(scale, f.denominator)
    return [int(f * scale) for f in values], scale


def _check_items(instance: Instance, agent: int, bundle) -> list[int]:
    if not 0 <= agent < instance.n:
        raise ContractViolationError(f"agent index {agent} out of range")
    items = sorted(set(bundle))
    if items and not (0 <= items[0] and items[-1] < instance.m):
        raise ContractViolationError("item index out of range")
    return items


def _feasible_cover(sizes: list[int], tau: int, need: int) -> list[int] | None:
    """Assign every size to one of tau bins so each bin reaches `need`.

    Sizes must be non-increasing. Returns per-item bin indices, or None.
    Once all bins are satisfied, remaining items are dumped into the last
    bin so the assignment always partitions the input.
    """
    count = len(sizes)
    suffix = [0] * (count + 1)
    for i in range(count - 1, -1, -1):
        suffix[i] = suffix[i + 1] + sizes[i]
    if suffix[0] < tau * need:
        return None
    totals = [0] * tau
    assign = [-1] * count
    failed: set[tuple] = set()

    def rec(idx: int, deficit: int) -> bool:
        if deficit == 0:
            for j in range(idx, count):
                assign[j] = tau - 1
            return True
        if idx == count or suffix[idx] < deficit:
            return False
        key = (idx, tuple(sorted(min(t, need) for t in totals)))
        if key in failed:
            return False
        s = sizes[idx]
        seen: set[int] = set()
        for b in range(tau):
            t = totals[b]
            # Assigning to an already-satisfied bin only wastes the item.
            if t >= need or t in seen:
                continue
            seen.add(t)
            totals[b] = t + s
            assign[idx] = b
            if rec(idx + 1, deficit - min(s, need - t)):
                return True
            totals[b] = t
        assign[idx] = -1
        failed.add(key)
        return False

    return assign if rec(0, tau * need) else None


def _feasible_pack(sizes: list[int], tau: int, cap: int) -> list[int] | None:
    """Assign every size to one of tau bins with each bin total <= cap."""
    count = len(sizes)
    suffix = [0] * (count + 1)
    for i in range(count - 1, -1, -1):
        suffix[i] = suffix[i + 1] + sizes[i]
    totals = [0] * tau
    assign = [-1] * count
    failed: set[tuple] = set()

    def rec(idx: int, slack: int) -> bool:
        if idx == count:
            return True
        if suffix[idx] > slack:
            return False
        key = (idx, tuple(sorted(totals)))
        if key in failed:
            return False
        s = sizes[idx]
        seen: set[int] = set()
        for b in range(tau):
            t = totals[b]
            if t + s > cap or t in seen:
                continue
            seen.add(t)
            totals[b] = t + s
            assign[idx] = b
            if rec(idx + 1, slack - s):
                return True
            totals[b] = t
        assign[idx] = -1
        failed.add(key)
        return False

    return assign if rec(0, tau * cap) else None


def _bins_from_assignment(
    items: list[int], assign: list[int], tau: int
) -> list[set[int]]:
    bins: list[set[int]] = [set() for _ in range(tau)]
    for item, b in zip(items, assign):
        bins[b].add(item)
    return bins


def _ordered_desc(instance: Instance, agent: int, items: list[int]) -> list[int]:
    row = instance.sizes[agent]
    return sorted(items, key=lambda e: (-row[e], e))


def covering_value(
    instance: Instance,
    agent: int,
    bundle,
    cap: int = DEFAULT_BUNDLE_CAP,
) -> tuple[int, BinPartition]:
    """Maximum number of unit bins the bundle can cover, with a witness.

    The witness partitions the bundle: each of the tau bins totals >= 1,
    leftovers land in the last bin. When tau = 0 the whole bundle sits in
    a single throwaway bin (no bins at all if the bundle is empty).
    """
    items = _check_items(instance, agent, bundle)
    if len(items) > cap:
        raise CapacityExceededError(
            f"bundle of {len(items)} items exceeds exact-search cap {cap}"
        )
    if not items:
        return 0, BinPartition((), ())
    ordered = _ordered_desc(instance, agent, items)
    ints, scale = _integerize([instance.sizes[agent][e] for e in ordered])
    upper = sum(ints) // scale
    for tau in range(upper, 0, -1):
        assign = _feasible_cover(ints, tau, scale)
        if assign is not None:
            bins = _bins_from_assignment(ordered, assign, tau)
            return tau, BinPartition.from_bins(instance, agent, bins)
    return 0, BinPartition.from_bins(instance, agent, [set(items)])


def covering_partition(
    instance: Instance,
    agent: int,
    bundle,
    tau: int,
    cap: int = DEFAULT_BUNDLE_CAP,
) -> BinPartition | None:
    """A partition of the bundle into exactly tau bins, each totalling >= 1.

    None when infeasible. tau = 0 yields the throwaway-bin convention of
    `covering_value`.
    """
    items = _check_items(instance, agent, bundle)
    if len(items) > cap:
        raise CapacityExceededError(
            f"bundle of {len(items)} items exceeds exact-search cap {cap}"
        )
    if tau == 0:
        bins = [set(items)] if items else []
        return BinPartition.from_bins(instance, agent, bins)
    ordered = _ordered_desc(instance, agent, items)
    ints, scale = _integerize([instance.sizes[agent][e] for e in ordered])
    assign = _feasible_cover(ints, tau, scale)
    if assign is None:
        return None
    bins = _bins_from_assignment(ordered, assign, tau)
    return BinPartition.from_bins(instance, agent, bins)


def packing_cost(
    instance: Instance,
    agent: int,
    bundle,
    cap: int = DEFAULT_BUNDLE_CAP,
) -> tuple[int, BinPartition]:
    """Minimum number of unit bins that pack the bundle, with a witness."""
    items = _check_items(instance, agent, bundle)
    if len(items) > cap:
        raise CapacityExceededError(
            f"bundle of {len(items)} items exceeds exact-search cap {cap}"
        )
    if not items:
        return 0, BinPartition((), ())
    ordered = _ordered_desc(instance, agent, items)
    ints, scale = _integerize([instance.sizes[agent][e] for e in ordered])
    total = sum(ints)
    lower = -(-total // scale)
    # First-fit decreasing gives the upper end of the scan.
    ffd: list[int] = []
    for s in ints:
        for i, t in enumerate(ffd):
            if t + s <= scale:
                ffd[i] = t + s
                break
        else:
            ffd.append(s)
    for tau in range(lower, len(ffd) + 1):
        assign = _feasible_pack(ints, tau, scale)
        if assign is not None:
            bins = _bins_from_assignment(ordered, assign, tau)
            return tau, BinPartition.from_bins(instance, agent, bins)
    raise AssertionError("first-fit-decreasing bound was not feasible")


def max_disjoint_pairs(sorted_sizes: Sequence[Fraction]) -> int:
    """Maximum number of disjoint pairs with pair sum <= 1.

    Input must be sorted (either direction), sizes in (0, 1]. The sweep
    pairs each smallest size with the largest size it still fits beside.
    When every size additionally exceeds 1/3, no bin holds three items,
    so the result also fixes the packing cost of the list as len - k.
    """
    sizes = list(sorted_sizes)
    asc = all(sizes[i] <= sizes[i + 1] for i in range(len(sizes) - 1))
    desc = all(sizes[i] >= sizes[i + 1] for i in range(len(sizes) - 1))
    if not (asc or desc):
        raise ContractViolationError("input sizes are not sorted")
    for s in sizes:
        if not ZERO < s <= ONE:
            raise ContractViolationError(f"size {s} outside (0, 1]")
    if desc and not asc:
        sizes.reverse()
    lo, hi, pairs = 0, len(sizes) - 1, 0
    while lo < hi:
        if sizes[lo] + sizes[hi] <= ONE:
            pairs += 1
            lo += 1
        hi -= 1
    return pairs


def _cover_table(ints: list[int], scale: int) -> list[int]:
    m = len(ints)
    size = 1 << m
    tot = [0] * size
    value = [0] * size
    for mask in range(1, size):
        low = mask & -mask
        tot[mask] = tot[mask ^ low] + ints[low.bit_length() - 1]
    for mask in range(1, size):
        t = tot[mask]
        if t < scale:
            continue
        if t < 2 * scale:
            value[mask] = 1
            continue
        low = mask & -mask
        best = value[mask ^ low]
        upper = t // scale
        sub = mask
        while sub:
            if sub & low and tot[sub] >= scale:
                cand = 1 + value[mask ^ sub]
                if cand > best:
                    best = cand
                    if best == upper:
                        break
            sub = (sub - 1) & mask
        value[mask] = best
    return value


def _pack_table(ints: list[int], scale: int) -> list[int]:
    m = len(ints)
    size = 1 << m
    tot = [0] * size
    cost = [0] * size
    for mask in range(1, size):
        low = mask & -mask
        tot[mask] = tot[mask ^ low] + ints[low.bit_length() - 1]
    big = m + 1
    for mask in range(1, size):
        t = tot[mask]
        if t <= scale:
            cost[mask] = 1
            continue
        low = mask & -mask
        lower = -(-t // scale)
        best = big
        sub = mask
        while sub:
            if sub & low and tot[sub] <= scale:
                cand = 1 + cost[mask ^ sub]
                if cand < best:
                    best = cand
                    if best == lower:
                        break
            sub = (sub - 1) & mask
        cost[mask] = best
    return cost


def _check_mms_caps(instance: Instance, item_cap: int, agent_cap: int) -> None:
    if instance.m > item_cap:
        raise CapacityExceededError(
            f"{instance.m} items exceeds exact MMS item cap {item_cap}"
        )
    if instance.n > agent_cap:
        raise CapacityExceededError(
            f"{instance.n} agents exceeds exact MMS agent cap {agent_cap}"
        )


def _witness_from_masks(masks: list[int], n: int, m: int) -> tuple[Bundle, ...]:
    parts = []
    for mask in masks:
        parts.append(frozenset(i for i in range(m) if mask >> i & 1))
    while len(parts) < n:
        parts.append(frozenset())
    return tuple(parts)


def mms_cover(
    instance: Instance,
    agent: int,
    item_cap: int = DEFAULT_MMS_ITEM_CAP,
    agent_cap: int = DEFAULT_MMS_AGENT_CAP,
) -> MmsCertificate:
    """Exact covering maximin share: max over n-partitions of the min part value.

    Deterministic: among maximizing partitions, returns the first one in
    restricted-growth-string order (item 0 in part 0, each new part opened
    only after all earlier ones), which is the lexicographically smallest
    witness.
    """
    _check_mms_caps(instance, item_cap, agent_cap)
    n, m = instance.n, instance.m
    _check_items(instance, agent, range(m))
    ints, scale = _integerize(list(instance.sizes[agent]))
    full = (1 << m) - 1
    kappa_ub = sum(ints) // (n * scale)
    if kappa_ub == 0:
        return MmsCertificate(0, _witness_from_masks([full], n, m), "covering")
    value = _cover_table(ints, scale)
    parts = [0] * n
    best_val = -1
    best_parts: list[int] | None = None
    done = False

    def rec(idx: int, used: int, assigned: int) -> None:
        nonlocal best_val, best_parts, done
        if done:
            return
        rem = full ^ assigned
        bound = min(value[p | rem] for p in parts)
        if bound <= best_val:
            return
        if idx == m:
            best_val = bound
            best_parts = parts.copy()
            if best_val == kappa_ub:
                done = True
            return
        bit = 1 << idx
        limit = min(used + 1, n)
        for j in range(limit):
            parts[j] |= bit
            rec(idx + 1, used + (1 if j == used else 0), assigned | bit)
            parts[j] ^= bit
            if done:
                return

    rec(0, 0, 0)
    assert best_parts is not None
    return MmsCertificate(best_val, _witness_from_masks(best_parts, n, m), "covering")


def mms_pack(
    instance: Instance,
    agent: int,
    item_cap: int = DEFAULT_MMS_ITEM_CAP,
    agent_cap: int = DEFAULT_MMS_AGENT_CAP,
) -> MmsCertificate:
    """Exact packing maximin share: min over n-partitions of the max part cost.

    Same determinism rule as `mms_cover`.
    """
    _check_mms_caps(instance, item_cap, agent_cap)
    n, m = instance.n, instance.m
    _check_items(instance, agent, range(m))
    ints, scale = _integerize(list(instance.sizes[agent]))
    full = (1 << m) - 1
    cost = _pack_table(ints, scale)
    kappa_lb = max(1, -(-sum(ints) // (n * scale)))
    parts = [0] * n
    best_val = cost[full] + 1
    best_parts: list[int] | None = None
    done = False

    def rec(idx: int, used: int, cur_max: int) -> None:
        nonlocal best_val, best_parts, done
        if done:
            return
        if cur_max >= best_val:
            return
        if idx == m:
            best_val = cur_max
            best_parts = parts.copy()
            if best_val == kappa_lb:
                done = True
            return
        bit = 1 << idx
        limit = min(used + 1, n)
        for j in range(limit):
            parts[j] |= bit
            rec(
                idx + 1,
                used + (1 if j == used else 0),
                max(cur_max, cost[parts[j]]),
            )
            parts[j] ^= bit
            if done:
                return

    rec(0, 0, 0)
    assert best_parts is not None
    return MmsCertificate(best_val, _witness_from_masks(best_parts, n, m), "packing")


def rescale_exact_cover(
    instance: Instance,
    agent: int,
    witness: Sequence[Bundle],
    kappa: int,
    cap: int = DEFAULT_BUNDLE_CAP,
) -> tuple[tuple[Fraction, ...], tuple[Bundle, ...]]:
    """Scale the agent's sizes so every covering group sums to exactly 1.

    Each witness part is split into exactly kappa bins of total >= 1
    (leftovers inside the last bin); each such bin is a scaling group and
    its items are divided by the group total. Returns the scaled size row
    together with the n*kappa groups. Scaled sizes never exceed the
    originals, and every group sums to exactly 1 afterwards.
    """
    require_witness_partition(witness, instance.m, "MMS witness")
    if kappa < 1:
        raise InvalidWitnessError("rescaling requires kappa >= 1")
    row = list(instance.sizes[agent])
    groups: list[Bundle] = []
    for part in witness:
        partition = covering_partition(instance, agent, part, kappa, cap=cap)
        if partition is None:
            raise InvalidWitnessError(
                f"witness part cannot cover {kappa} bins for agent {agent}"
            )
        for group, total in zip(partition.bins, partition.per_bin_total):
            if total < ONE:
                raise InvalidWitnessError("scaling group with total < 1")
            for e in group:
                row[e] = row[e] / total
            groups.append(group)
    return tuple(row), tuple(groups)
