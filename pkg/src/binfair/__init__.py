"""Maximin-share fair allocation under bin-covering and bin-packing valuations.

Exact rational oracles certify per-agent maximin shares; three solvers
then allocate indivisible items with provable guarantees: a cardinal cover
solver (kappa bins per agent, each at least 2/3 full), an ordinal cover
solver (at least ceil(3/4 kappa - 7/4) covered bins), and an ordinal pack
solver (at most floor(4/3 kappa + 4/3) bins, none overfull).
"""
from .model import (
    Allocation,
    BinPartition,
    Bundle,
    Instance,
    ItemClass,
    MmsCertificate,
    Scheme,
    bundle_size,
    classify_item,
    is_ido,
)
from .oracles import (
    covering_value,
    max_disjoint_pairs,
    mms_cover,
    mms_pack,
    packing_cost,
    rescale_exact_cover,
)
from .pipeline import solve_cover_cardinal, solve_cover_ordinal, solve_pack_ordinal

__all__ = [
    "Allocation",
    "BinPartition",
    "Bundle",
    "Instance",
    "ItemClass",
    "MmsCertificate",
    "Scheme",
    "bundle_size",
    "classify_item",
    "covering_value",
    "is_ido",
    "max_disjoint_pairs",
    "mms_cover",
    "mms_pack",
    "packing_cost",
    "rescale_exact_cover",
    "solve_cover_cardinal",
    "solve_cover_ordinal",
    "solve_pack_ordinal",
]
