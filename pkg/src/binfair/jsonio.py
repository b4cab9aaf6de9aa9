"""JSON wire formats: instances, certificates, solutions, reports.

Sizes travel as "numerator/denominator" strings so round-trips are exact.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .errors import ContractViolationError
from .model import Allocation, BinPartition, Instance, MmsCertificate
from .verify import ReportRow


def fraction_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    return {
        "n": instance.n,
        "m": instance.m,
        "sizes": [[fraction_str(s) for s in row] for row in instance.sizes],
    }


def instance_from_dict(data: dict[str, Any]) -> Instance:
    try:
        sizes = tuple(tuple(Fraction(s) for s in row) for row in data["sizes"])
        instance = Instance(sizes)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ContractViolationError(f"malformed instance JSON: {exc}") from exc
    if instance.n != data.get("n", instance.n) or instance.m != data.get(
        "m", instance.m
    ):
        raise ContractViolationError("instance JSON dimensions are inconsistent")
    return instance


def certificates_to_dict(
    certificates: Sequence[MmsCertificate],
) -> dict[str, Any]:
    return {
        "model": certificates[0].model if certificates else "covering",
        "kappa": [c.kappa for c in certificates],
        "witness": [[sorted(part) for part in c.witness] for c in certificates],
    }


def certificates_from_dict(data: dict[str, Any]) -> list[MmsCertificate]:
    try:
        model = data.get("model", "covering")
        kappas = data["kappa"]
        witnesses = data["witness"]
        return [
            MmsCertificate(
                int(k),
                tuple(frozenset(int(e) for e in part) for part in parts),
                model,
            )
            for k, parts in zip(kappas, witnesses, strict=True)
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractViolationError(f"malformed certificate JSON: {exc}") from exc


def _witness_to_dict(witness: BinPartition) -> dict[str, Any]:
    return {
        "bins": [sorted(b) for b in witness.bins],
        "totals": [fraction_str(t) for t in witness.per_bin_total],
    }


def witnesses_from_dict(
    instance: Instance, data: Sequence[dict[str, Any]]
) -> list[BinPartition]:
    out = []
    try:
        for agent, w in enumerate(data):
            bins = [frozenset(int(e) for e in b) for b in w["bins"]]
            out.append(BinPartition.from_bins(instance, agent, bins))
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractViolationError(f"malformed witness JSON: {exc}") from exc
    return out


def solution_to_dict(
    algorithm: str,
    allocation: Allocation,
    kappas: Sequence[int],
    witnesses: Sequence[BinPartition],
    extra: dict[str, Any] | None = None,
) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "algorithm": algorithm,
        "kappa": list(kappas),
        "bundles": [sorted(b) for b in allocation.bundles],
        "witnesses": [_witness_to_dict(w) for w in witnesses],
    }
    if extra:
        payload.update(extra)
    return payload


def allocation_from_dict(data: dict[str, Any]) -> Allocation:
    try:
        return Allocation(
            tuple(frozenset(int(e) for e in b) for b in data["bundles"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractViolationError(f"malformed allocation JSON: {exc}") from exc


def report_to_dict(rows: Sequence[ReportRow]) -> dict[str, Any]:
    return {
        "verdict": "pass" if all(r.passed for r in rows) else "fail",
        "rows": [
            {
                "instance_id": r.instance_id,
                "model": r.model,
                "agent": r.agent,
                "kappa": r.kappa,
                "achieved": r.achieved,
                "bound": r.bound,
                "pass": r.passed,
                "witness_checksum": r.witness_checksum,
                "method": r.method,
                "note": r.note,
            }
            for r in rows
        ],
    }


def load_json(path: str | Path) -> Any:
    with open(path) as fh:
        return json.load(fh)


def dump_json(path: str | Path, payload: Any) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
