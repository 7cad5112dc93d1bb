"""Synthetic compositional-reasoning dataset generators.

Four tasks share one record format: multi-step arithmetic, state tracking
on the 120-element permutation group, multi-hop QA over a relation graph,
and grade-school-math dependency DAGs. Every generator takes a pluggable
skill distribution and is deterministic given (config, seed).
"""

from .arithmetic import eval_arithmetic, gen_arithmetic, tokenize_expression
from .gsm import GsmGenerationError, eval_dag, gen_gsm
from .qa import RelationGraph, follow_relations, gen_multihop_qa, gen_relation_graph
from .records import read_jsonl, skill_histogram, write_dataset, write_jsonl
from .s5 import (
    S5_SIZE,
    PermutationS5,
    all_permutations,
    gen_state_tracking,
    perm_rank,
    s5_compose,
    s5_identity,
    s5_inverse,
)

__all__ = [
    "eval_arithmetic",
    "gen_arithmetic",
    "tokenize_expression",
    "GsmGenerationError",
    "eval_dag",
    "gen_gsm",
    "RelationGraph",
    "follow_relations",
    "gen_multihop_qa",
    "gen_relation_graph",
    "read_jsonl",
    "skill_histogram",
    "write_dataset",
    "write_jsonl",
    "S5_SIZE",
    "PermutationS5",
    "all_permutations",
    "gen_state_tracking",
    "perm_rank",
    "s5_compose",
    "s5_identity",
    "s5_inverse",
]
