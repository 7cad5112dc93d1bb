"""Multi-hop question answering over a synthetic relation graph.

A fixed graph connects every entity through every relation to one target
entity. Questions compose k relations ("Who is the instructor of the
teacher of Bob?"); relations are the skills, so the sampling distribution
is defined over them. Answers are computed by following edges from the
start entity through the first (innermost) relation outward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wordlists import ENTITY_NAMES, RELATION_NAMES

__all__ = ["RelationGraph", "gen_relation_graph", "follow_relations", "gen_multihop_qa"]


@dataclass(frozen=True)
class RelationGraph:
    """Functional relation graph: one target per (entity, relation)."""

    num_entities: int
    num_relations: int
    edges: np.ndarray          # shape (num_entities, num_relations) -> entity
    entity_names: list[str]
    relation_names: list[str]

    def __post_init__(self):
        if self.edges.shape != (self.num_entities, self.num_relations):
            raise ValueError("edge table shape mismatch")
        if self.edges.min() < 0 or self.edges.max() >= self.num_entities:
            raise ValueError("edge target out of range")

    def fact(self, entity: int, relation: int) -> str:
        target = self.edges[entity, relation]
        return (
            f"The {self.relation_names[relation]} of {self.entity_names[entity]} "
            f"is {self.entity_names[target]}."
        )


def gen_relation_graph(
    num_entities: int,
    num_relations: int = 20,
    rng: np.random.Generator | None = None,
    *,
    allow_self_loops: bool = True,
) -> RelationGraph:
    """Random graph where each entity points to a uniform target per relation."""
    if num_entities < 2:
        raise ValueError(f"need at least two entities, got {num_entities}")
    if num_entities > len(ENTITY_NAMES):
        raise ValueError(f"only {len(ENTITY_NAMES)} bundled entity names available")
    if num_relations > len(RELATION_NAMES):
        raise ValueError(f"only {len(RELATION_NAMES)} bundled relation names available")
    if rng is None:
        rng = np.random.default_rng(0)
    edges = rng.integers(0, num_entities, size=(num_entities, num_relations))
    if not allow_self_loops:
        for e in range(num_entities):
            for rel in range(num_relations):
                while edges[e, rel] == e:
                    edges[e, rel] = rng.integers(0, num_entities)
    return RelationGraph(
        num_entities=num_entities,
        num_relations=num_relations,
        edges=edges.astype(np.int64),
        entity_names=ENTITY_NAMES[:num_entities],
        relation_names=RELATION_NAMES[:num_relations],
    )


def follow_relations(graph: RelationGraph, start: int, relations) -> int:
    """Walk the graph from start through the relations in order."""
    node = start
    for rel in relations:
        node = int(graph.edges[node, rel])
    return node


def _render_question(graph: RelationGraph, start: int, relations) -> str:
    inner = graph.entity_names[start]
    for rel in relations:
        inner = f"the {graph.relation_names[rel]} of {inner}"
    return f"Who is {inner}?\nAnswer:"


def gen_multihop_qa(
    graph: RelationGraph,
    k: int,
    dist,
    n: int,
    rng: np.random.Generator,
    *,
    include_facts: bool = False,
    fact_ratio: float = 0.0,
) -> list[dict]:
    """Generate n records: k-hop questions, optionally mixed with 1-hop facts.

    Start entities are uniform; the k relations are i.i.d. from ``dist``
    (which must cover the graph's relations). ``fact_ratio`` is the fraction
    of emitted records that are plain 1-hop fact statements.
    """
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if dist.d != graph.num_relations:
        raise ValueError(
            f"distribution must cover the {graph.num_relations} relations, got d={dist.d}"
        )
    if not 0.0 <= fact_ratio <= 1.0:
        raise ValueError(f"fact_ratio must lie in [0, 1], got {fact_ratio}")
    records = []
    for _ in range(n):
        start = int(rng.integers(0, graph.num_entities))
        if fact_ratio > 0.0 and rng.random() < fact_ratio:
            rel = int(dist.sample(rng))
            target = int(graph.edges[start, rel])
            records.append(
                {
                    "task": "qa_fact",
                    "prompt": f"The {graph.relation_names[rel]} of "
                              f"{graph.entity_names[start]} is",
                    "answer": graph.entity_names[target],
                    "skills": [rel],
                    "meta": {"start": start, "target": target},
                }
            )
            continue
        rels = [int(i) for i in np.atleast_1d(dist.sample(rng, size=k))]
        answer = follow_relations(graph, start, rels)
        path = [start]
        for rel in rels:
            path.append(int(graph.edges[path[-1], rel]))
        meta = {"start": start, "path": path, "relations": rels}
        if include_facts:
            meta["facts"] = [graph.fact(path[i], rels[i]) for i in range(k)]
        records.append(
            {
                "task": "multihop_qa",
                "prompt": _render_question(graph, start, rels),
                "answer": graph.entity_names[answer],
                "skills": rels,
                "meta": meta,
            }
        )
    return records
