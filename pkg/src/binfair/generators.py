"""Seed-deterministic instance generators, including the lone-divider fixture.

The lone-divider fixture is a 20-agent, 180-item identical-agent instance
whose items come in 60 triples {2/3 - eps, 1/3 - eps, 2*eps}, each triple
summing to exactly 1. Every agent's maximin share is 3 by construction
(60 unit triples split into 20 parts of 3), and the matching certificates
ship with the instance since the exact oracle cannot touch this scale.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ContractViolationError, InvalidSizeError
from .model import Bundle, Instance, MmsCertificate

LONE_DIVIDER_AGENTS = 20
LONE_DIVIDER_KAPPA = 3
LONE_DIVIDER_GROUPS = LONE_DIVIDER_AGENTS * LONE_DIVIDER_KAPPA


@dataclass(frozen=True)
class GeneratorSpec:
    """Which family to draw from, plus its knobs. Generation is
    deterministic in (family, n, m, seed and the family parameters)."""

    family: str  # "uniform-rational" | "lone-divider" | "identical-agents"
    n: int = LONE_DIVIDER_AGENTS
    m: int = 0
    seed: int = 0
    denominator: int = 12
    epsilon: Fraction = Fraction(1, 100)
    sizes: tuple[Fraction, ...] = field(default_factory=tuple)


def uniform_rational(n: int, m: int, denominator: int, seed: int) -> Instance:
    """Sizes k/D with k uniform in 1..D, one independent draw per cell."""
    if denominator <= 0:
        raise ContractViolationError("denominator must be positive")
    if n <= 0 or m <= 0:
        raise ContractViolationError("n and m must be positive")
    rng = random.Random(seed)
    rows = tuple(
        tuple(Fraction(rng.randint(1, denominator), denominator) for _ in range(m))
        for _ in range(n)
    )
    return Instance(rows)


def identical_agents(sizes: tuple[Fraction, ...], n: int) -> Instance:
    if n <= 0:
        raise ContractViolationError("n must be positive")
    if not sizes:
        raise ContractViolationError("need at least one size")
    row = tuple(Fraction(s) for s in sizes)
    return Instance(tuple(row for _ in range(n)))


def lone_divider_fixture(
    epsilon: Fraction = Fraction(1, 100),
) -> tuple[Instance, list[MmsCertificate]]:
    """The 20-agent fixture plus its by-construction covering certificates.

    Items 0..59 have size 2/3 - eps, 60..119 have 1/3 - eps, 120..179 have
    2*eps; group g = {g, 60+g, 120+g} sums to exactly 1; agent witnesses
    bundle three consecutive groups per part. Requires 0 < eps < 1/9 so
    the three size classes stay positive and strictly ordered.
    """
    epsilon = Fraction(epsilon)
    if not Fraction(0) < epsilon < Fraction(1, 9):
        raise InvalidSizeError("epsilon must lie in (0, 1/9)")
    large = Fraction(2, 3) - epsilon
    medium = Fraction(1, 3) - epsilon
    tiny = 2 * epsilon
    row = (
        (large,) * LONE_DIVIDER_GROUPS
        + (medium,) * LONE_DIVIDER_GROUPS
        + (tiny,) * LONE_DIVIDER_GROUPS
    )
    instance = Instance(tuple(row for _ in range(LONE_DIVIDER_AGENTS)))
    parts: list[Bundle] = []
    for p in range(LONE_DIVIDER_AGENTS):
        items: set[int] = set()
        for g in range(LONE_DIVIDER_KAPPA * p, LONE_DIVIDER_KAPPA * (p + 1)):
            items |= {g, LONE_DIVIDER_GROUPS + g, 2 * LONE_DIVIDER_GROUPS + g}
        parts.append(frozenset(items))
    witness = tuple(parts)
    certificates = [
        MmsCertificate(LONE_DIVIDER_KAPPA, witness, "covering")
        for _ in range(LONE_DIVIDER_AGENTS)
    ]
    return instance, certificates


def generate(spec: GeneratorSpec) -> Instance:
    if spec.family == "uniform-rational":
        return uniform_rational(spec.n, spec.m, spec.denominator, spec.seed)
    if spec.family == "lone-divider":
        return lone_divider_fixture(spec.epsilon)[0]
    if spec.family == "identical-agents":
        return identical_agents(spec.sizes, spec.n)
    raise ContractViolationError(f"unknown generator family {spec.family!r}")
