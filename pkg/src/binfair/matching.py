"""Bipartite maximum matching and envy-free matching on the agent side.

An envy-free matching is one where every unmatched agent has no edge to
any matched part. The maximum-cardinality one is obtained from a maximum
matching by discarding every pair whose agent is reachable from some
unmatched agent along alternating paths (non-matching edge out of an
agent, matching edge back out of a part).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable


@dataclass(frozen=True)
class BipartiteGraph:
    agent_ids: tuple[Hashable, ...]
    part_ids: tuple[Hashable, ...]
    edges: frozenset[tuple[Hashable, Hashable]]

    def __post_init__(self) -> None:
        agents, parts = set(self.agent_ids), set(self.part_ids)
        for a, p in self.edges:
            if a not in agents or p not in parts:
                raise ValueError(f"edge ({a!r}, {p!r}) references unknown vertex")

    @staticmethod
    def build(
        agent_ids: Iterable[Hashable],
        part_ids: Iterable[Hashable],
        edges: Iterable[tuple[Hashable, Hashable]],
    ) -> "BipartiteGraph":
        return BipartiteGraph(tuple(agent_ids), tuple(part_ids), frozenset(edges))

    def neighbours(self, agent: Hashable) -> list[Hashable]:
        order = {p: i for i, p in enumerate(self.part_ids)}
        return sorted((p for a, p in self.edges if a == agent), key=order.get)


def maximum_matching(graph: BipartiteGraph) -> dict[Hashable, Hashable]:
    """Maximum-cardinality matching via augmenting paths.

    Deterministic for a fixed vertex ordering: agents are processed in
    declaration order and each agent scans parts in declaration order.
    """
    adjacency = {a: graph.neighbours(a) for a in graph.agent_ids}
    match_part: dict[Hashable, Hashable] = {}

    def augment(agent: Hashable, visited: set[Hashable]) -> bool:
        for part in adjacency[agent]:
            if part in visited:
                continue
            visited.add(part)
            if part not in match_part or augment(match_part[part], visited):
                match_part[part] = agent
                return True
        return False

    for agent in graph.agent_ids:
        augment(agent, set())
    return {agent: part for part, agent in match_part.items()}


def max_cardinality_envy_free_matching(
    graph: BipartiteGraph,
) -> dict[Hashable, Hashable]:
    """Largest matching in which no unmatched agent sees a matched part.

    Starting from a maximum matching, agents reachable from unmatched
    agents by alternating paths lose their pairs; what remains is the
    maximum-cardinality envy-free matching. It is non-empty whenever some
    agent is adjacent to every part.
    """
    matching = maximum_matching(graph)
    part_owner = {part: agent for agent, part in matching.items()}
    adjacency = {a: graph.neighbours(a) for a in graph.agent_ids}

    reachable: set[Hashable] = set()
    queue = deque(a for a in graph.agent_ids if a not in matching)
    seen_agents = set(queue)
    while queue:
        agent = queue.popleft()
        for part in adjacency[agent]:
            owner = part_owner.get(part)
            if owner is not None and owner not in seen_agents:
                seen_agents.add(owner)
                reachable.add(owner)
                queue.append(owner)

    return {a: p for a, p in matching.items() if a not in reachable}


def is_envy_free(graph: BipartiteGraph, matching: dict[Hashable, Hashable]) -> bool:
    """Direct-scan check of the envy-free matching definition."""
    matched_parts = set(matching.values())
    if len(matched_parts) != len(matching):
        return False
    for agent in graph.agent_ids:
        if agent in matching:
            continue
        for part in graph.neighbours(agent):
            if part in matched_parts:
                return False
    return True
