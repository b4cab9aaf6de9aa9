"""Reduction to identical-ordering (IDO) instances and the lift back.

An IDO instance is one where every agent's size row is non-increasing in
the item index, so all agents agree on the item order. Solving the IDO
instance and lifting the allocation back preserves per-agent guarantees:
the covering lift only ever hands an agent items at least as large as the
IDO items she held, and the packing lift only items at most as large.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidAllocationError
from .model import Allocation, Bundle, Instance


@dataclass(frozen=True)
class IdoReduction:
    """IDO twin of an instance plus per-agent rank-to-original-id maps."""

    ido_instance: Instance
    # permutation[i][r] = original id of agent i's r-th largest item
    permutations: tuple[tuple[int, ...], ...]


def to_ido(instance: Instance) -> IdoReduction:
    """Sort each agent's sizes descending; ties break on smaller item id."""
    perms = []
    rows = []
    for row in instance.sizes:
        order = sorted(range(instance.m), key=lambda e: (-row[e], e))
        perms.append(tuple(order))
        rows.append(tuple(row[e] for e in order))
    return IdoReduction(Instance(tuple(rows)), tuple(perms))


def _owner_of_rank(allocation: Allocation, m: int) -> list[int]:
    owner = [-1] * m
    for agent, bundle in enumerate(allocation.bundles):
        for rank in bundle:
            if not 0 <= rank < m or owner[rank] != -1:
                raise InvalidAllocationError("IDO allocation is not a partition")
            owner[rank] = agent
    if any(o == -1 for o in owner):
        raise InvalidAllocationError("IDO allocation is not a partition")
    return owner


def lift_allocation_cover(
    original: Instance, reduction: IdoReduction, ido_allocation: Allocation
) -> Allocation:
    """Lift an IDO allocation back to the original instance (goods).

    IDO ranks are processed largest first; the agent owning rank r picks
    her largest-size remaining original item (ties: smallest id). Each
    pick is at least as large as her IDO item of that rank, so her lifted
    bundle dominates her IDO bundle component-wise and covering values
    never decrease.
    """
    m = original.m
    owner = _owner_of_rank(ido_allocation, m)
    remaining: set[int] = set(range(m))
    bundles: list[set[int]] = [set() for _ in range(original.n)]
    for rank in range(m):
        agent = owner[rank]
        row = original.sizes[agent]
        pick = min(remaining, key=lambda e: (-row[e], e))
        bundles[agent].add(pick)
        remaining.remove(pick)
    return Allocation(tuple(frozenset(b) for b in bundles))


def lift_allocation_pack(
    original: Instance, reduction: IdoReduction, ido_allocation: Allocation
) -> Allocation:
    """Lift an IDO allocation back to the original instance (chores).

    IDO ranks are processed smallest first (descending rank index); the
    owner picks her smallest-size remaining original item. Each pick is
    at most her IDO item of that rank, so packing costs never increase.
    """
    m = original.m
    owner = _owner_of_rank(ido_allocation, m)
    remaining: set[int] = set(range(m))
    bundles: list[set[int]] = [set() for _ in range(original.n)]
    for rank in range(m - 1, -1, -1):
        agent = owner[rank]
        row = original.sizes[agent]
        pick = min(remaining, key=lambda e: (row[e], e))
        bundles[agent].add(pick)
        remaining.remove(pick)
    return Allocation(tuple(frozenset(b) for b in bundles))


def sorted_sizes(instance: Instance, agent: int, bundle: Bundle) -> list:
    """The agent's sizes of a bundle, sorted descending (for dominance checks)."""
    row = instance.sizes[agent]
    return sorted((row[e] for e in bundle), reverse=True)


def lift_bin_partition(
    original: Instance,
    ido_instance: Instance,
    agent: int,
    ido_bundle: Bundle,
    lifted_bundle: Bundle,
    ido_bins: tuple[Bundle, ...],
) -> list[set[int]]:
    """Carry a witness bin structure from an IDO bundle to its lifted bundle.

    Items are matched by descending-size rank (IDO sizes on one side, the
    agent's original sizes on the other). Under the covering lift every
    matched original item is at least as large, so bin totals only grow;
    under the packing lift they only shrink.
    """
    if len(ido_bundle) != len(lifted_bundle):
        raise InvalidAllocationError("bundle size mismatch in witness lift")
    ido_row = ido_instance.sizes[agent]
    orig_row = original.sizes[agent]
    ido_order = sorted(ido_bundle, key=lambda e: (-ido_row[e], e))
    lifted_order = sorted(lifted_bundle, key=lambda e: (-orig_row[e], e))
    mapping = dict(zip(ido_order, lifted_order))
    return [{mapping[e] for e in b} for b in ido_bins]
