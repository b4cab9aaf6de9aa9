"""End-to-end solve pipelines: reduce to IDO, certify, solve, lift back.

Each solver runs on the IDO twin of the input instance; allocations and
witness bin structures are then lifted to original item ids. Maximin
shares are invariant under the reduction (each agent's size multiset is
unchanged), so certificates computed either way carry the same kappas.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .cover_cardinal import (
    CoverCardinalResult,
    prepare_scaled_certificates,
    run_cover_cardinal,
)
from .cover_ordinal import CoverOrdinalResult, ordinal_cover_bound, run_cover_ordinal
from .errors import ContractViolationError
from .ido import (
    IdoReduction,
    lift_allocation_cover,
    lift_allocation_pack,
    lift_bin_partition,
    to_ido,
)
from .model import Allocation, BinPartition, Instance, MmsCertificate
from .oracles import (
    DEFAULT_MMS_AGENT_CAP,
    DEFAULT_MMS_ITEM_CAP,
    mms_cover,
    mms_pack,
)
from .pack_ordinal import (
    PackSolveResult,
    ordinal_pack_bound,
    run_pack_ordinal_with_witnesses,
)


def _map_certificates_to_ido(
    reduction: IdoReduction, certificates: Sequence[MmsCertificate]
) -> list[MmsCertificate]:
    mapped = []
    for agent, cert in enumerate(certificates):
        rank_of = {orig: rank for rank, orig in enumerate(reduction.permutations[agent])}
        witness = tuple(
            frozenset(rank_of[e] for e in part) for part in cert.witness
        )
        mapped.append(MmsCertificate(cert.kappa, witness, cert.model))
    return mapped


def _lift_witnesses(
    original: Instance,
    reduction: IdoReduction,
    ido_allocation: Allocation,
    lifted_allocation: Allocation,
    ido_witnesses: Sequence[BinPartition],
) -> tuple[BinPartition, ...]:
    out = []
    for agent in range(original.n):
        bins = lift_bin_partition(
            original,
            reduction.ido_instance,
            agent,
            ido_allocation.bundles[agent],
            lifted_allocation.bundles[agent],
            ido_witnesses[agent].bins,
        )
        out.append(BinPartition.from_bins(original, agent, bins))
    return tuple(out)


@dataclass(frozen=True)
class CoverCardinalSolve:
    allocation: Allocation
    witnesses: tuple[BinPartition, ...]
    kappas: tuple[int, ...]
    reduction: IdoReduction
    ido_result: CoverCardinalResult


def solve_cover_cardinal(
    instance: Instance,
    certificates: Sequence[MmsCertificate] | None = None,
    item_cap: int = DEFAULT_MMS_ITEM_CAP,
    agent_cap: int = DEFAULT_MMS_AGENT_CAP,
) -> CoverCardinalSolve:
    """Full cardinal-cover pipeline; certificates computed when not given."""
    reduction = to_ido(instance)
    ido = reduction.ido_instance
    if certificates is None:
        ido_certs = [mms_cover(ido, i, item_cap, agent_cap) for i in range(ido.n)]
    else:
        if len(certificates) != instance.n:
            raise ContractViolationError("need one certificate per agent")
        ido_certs = _map_certificates_to_ido(reduction, certificates)
    scaled = prepare_scaled_certificates(ido, ido_certs)
    result = run_cover_cardinal(ido, scaled)
    lifted = lift_allocation_cover(instance, reduction, result.allocation)
    witnesses = _lift_witnesses(
        instance, reduction, result.allocation, lifted, result.witnesses
    )
    kappas = tuple(c.kappa for c in ido_certs)
    return CoverCardinalSolve(lifted, witnesses, kappas, reduction, result)


@dataclass(frozen=True)
class CoverOrdinalSolve:
    allocation: Allocation
    covered: tuple[int, ...]
    witnesses: tuple[BinPartition, ...]
    kappas: tuple[int, ...]
    bounds: tuple[int, ...]
    reduction: IdoReduction
    ido_result: CoverOrdinalResult


def solve_cover_ordinal(
    instance: Instance,
    kappas: Sequence[int] | None = None,
    item_cap: int = DEFAULT_MMS_ITEM_CAP,
    agent_cap: int = DEFAULT_MMS_AGENT_CAP,
) -> CoverOrdinalSolve:
    """Full ordinal-cover pipeline (round robin plus bin construction)."""
    reduction = to_ido(instance)
    ido = reduction.ido_instance
    if kappas is None:
        kappas = [mms_cover(ido, i, item_cap, agent_cap).kappa for i in range(ido.n)]
    result = run_cover_ordinal(ido, kappas)
    lifted = lift_allocation_cover(instance, reduction, result.allocation)
    witnesses = _lift_witnesses(
        instance, reduction, result.allocation, lifted, result.witnesses
    )
    return CoverOrdinalSolve(
        lifted,
        result.covered,
        witnesses,
        tuple(kappas),
        tuple(ordinal_cover_bound(k) for k in kappas),
        reduction,
        result,
    )


@dataclass(frozen=True)
class PackOrdinalSolve:
    allocation: Allocation
    bins_used: tuple[int, ...]
    witnesses: tuple[BinPartition, ...]
    kappas: tuple[int, ...]
    bounds: tuple[int, ...]
    reduction: IdoReduction
    ido_result: PackSolveResult


def solve_pack_ordinal(
    instance: Instance,
    kappas: Sequence[int] | None = None,
    item_cap: int = DEFAULT_MMS_ITEM_CAP,
    agent_cap: int = DEFAULT_MMS_AGENT_CAP,
) -> PackOrdinalSolve:
    """Full ordinal-pack pipeline (bag rounds plus packing witnesses)."""
    reduction = to_ido(instance)
    ido = reduction.ido_instance
    if kappas is None:
        kappas = [mms_pack(ido, i, item_cap, agent_cap).kappa for i in range(ido.n)]
    result = run_pack_ordinal_with_witnesses(ido, kappas)
    lifted = lift_allocation_pack(instance, reduction, result.allocation)
    witnesses = _lift_witnesses(
        instance, reduction, result.allocation, lifted, result.witnesses
    )
    return PackOrdinalSolve(
        lifted,
        result.bins_used,
        witnesses,
        tuple(kappas),
        tuple(ordinal_pack_bound(k) for k in kappas),
        reduction,
        result,
    )
