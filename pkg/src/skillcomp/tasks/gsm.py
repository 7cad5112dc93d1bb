"""Synthetic grade-school math problems over a layered dependency DAG.

Each problem is a DAG of count variables: leaves are literals sampled from
the number distribution (numbers are the skills), internal nodes apply
+, -, * or exact division to two earlier variables, and the query asks for
the final variable. With a prime modulus every operation wraps into
[0, p); without one, any intermediate outside [0, value_cap] or inexact
division rejects the draw and resamples (which upsamples small numbers, so
the realized histogram is emitted alongside the dataset).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wordlists import ITEM_NAMES, PLACE_NAMES

__all__ = ["GsmGenerationError", "GsmProblem", "eval_dag", "gen_gsm"]

GSM_OPS = ("+", "-", "*", "/")
ALLOWED_OP_COUNTS = range(2, 9)


class GsmGenerationError(RuntimeError):
    """Rejection budget exhausted while sampling a valid problem."""

    def __init__(self, attempts: int, num_ops: int, modulus: int | None):
        super().__init__(
            f"no valid problem after {attempts} attempts "
            f"(num_ops={num_ops}, modulus={modulus})"
        )
        self.attempts = attempts
        self.num_ops = num_ops
        self.modulus = modulus


@dataclass
class GsmProblem:
    """One generated problem with its dependency DAG and rendered text."""

    nodes: list          # ["leaf", value] or [op, arg_a, arg_b, value]
    query: int
    answer: int
    modulus: int | None
    problem: str
    solution: str
    leaf_skills: list[int]


def _apply_op(op: str, va: int, vb: int, modulus: int | None, value_cap: int):
    """Result of va op vb, or None when the combination is invalid."""
    if op == "/":
        if vb == 0 or va % vb != 0:
            return None
        return va // vb
    if op == "+":
        raw = va + vb
    elif op == "-":
        raw = va - vb
    else:
        raw = va * vb
    if modulus is not None:
        return raw % modulus
    if raw < 0 or raw > value_cap:
        return None
    return raw


def eval_dag(nodes: list, query: int, modulus: int | None = None) -> int:
    """Re-evaluate a serialized DAG bottom-up (stored values are ignored)."""
    values: list[int] = []
    for node in nodes:
        if node[0] == "leaf":
            values.append(int(node[1]))
        else:
            op, a, b = node[0], int(node[1]), int(node[2])
            va, vb = values[a], values[b]
            if op == "+":
                raw = va + vb
            elif op == "-":
                raw = va - vb
            elif op == "*":
                raw = va * vb
            else:
                raw = va // vb
            if modulus is not None and op != "/":
                raw %= modulus
            values.append(raw)
    return values[query]


def _build_dag(dist, num_ops: int, modulus: int | None, value_cap: int, rng, arg_tries: int = 40):
    """One attempt at a valid DAG; returns (nodes, values, skills) or None."""
    skills = np.atleast_1d(dist.sample(rng, size=num_ops + 1))
    offset = 0 if modulus is not None else 1
    values = [int(s) + offset for s in skills]
    nodes: list = [["leaf", v] for v in values]
    for _ in range(num_ops):
        placed = False
        for _ in range(arg_tries):
            op = GSM_OPS[rng.integers(0, len(GSM_OPS))]
            a = int(rng.integers(0, len(nodes)))
            b = int(rng.integers(0, len(nodes)))
            val = _apply_op(op, values[a], values[b], modulus, value_cap)
            if val is None:
                continue
            raw = {"+": values[a] + values[b], "-": values[a] - values[b],
                   "*": values[a] * values[b], "/": val}[op]
            nodes.append([op, a, b, val, int(raw != val)])
            values.append(val)
            placed = True
            break
        if not placed:
            return None
    return nodes, values, [int(s) for s in skills]


def _render(nodes, values, query, modulus, names, place, multi_hop, rng):
    sentences = [f"We are in {place}."]
    if modulus is not None:
        sentences.append(f"All counts wrap around at {modulus}.")
    for i, node in enumerate(nodes):
        if node[0] == "leaf":
            sentences.append(f"There are {node[1]} {names[i]}.")
        else:
            op, a, b = node[0], node[1], node[2]
            phrase = {
                "+": f"the sum of {names[a]} and {names[b]}",
                "-": f"the number of {names[a]} minus the number of {names[b]}",
                "*": f"the product of {names[a]} and {names[b]}",
                "/": f"the quotient of {names[a]} and {names[b]}",
            }[op]
            sentences.append(f"The number of {names[i]} is {phrase}.")
    sentences.append(f"What is the number of {names[query]}?")
    problem = " ".join(sentences)

    # solution covers only the ancestors of the query, bottom-up
    needed: set[int] = set()
    stack = [query]
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        if nodes[i][0] != "leaf":
            stack.extend([nodes[i][1], nodes[i][2]])
    leaf_steps = []
    op_steps = []
    for i in sorted(needed):
        node = nodes[i]
        if node[0] == "leaf":
            leaf_steps.append(f"We know the {names[i]} is {node[1]}.")
            continue
        op, a, b, val, wrapped = node
        va, vb = values[a], values[b]
        verb = {
            "+": f"Adding {va} and {vb} gives",
            "-": f"Subtracting {vb} from {va} gives",
            "*": f"Multiplying {va} by {vb} gives",
            "/": f"Splitting {va} evenly into {vb} parts gives",
        }[op]
        wrap_note = f" after wrapping at {modulus}" if wrapped else ""
        op_steps.append(f"{verb} {val}{wrap_note}, which is the {names[i]}.")
    if multi_hop:
        merged = []
        i = 0
        while i < len(op_steps):
            if i + 1 < len(op_steps) and rng.random() < 0.5:
                nxt = op_steps[i + 1]
                merged.append(op_steps[i][:-1] + ", and " + nxt[0].lower() + nxt[1:])
                i += 2
            else:
                merged.append(op_steps[i])
                i += 1
        op_steps = merged
    solution = " ".join(leaf_steps + op_steps) + f" Answer: #### {values[query]}"
    return problem, solution


def gen_gsm(
    dist,
    n: int,
    rng: np.random.Generator,
    *,
    num_ops: int | tuple[int, int] = (2, 8),
    modulus: int | None = 211,
    multi_hop_template: bool = False,
    value_cap: int = 1000,
    max_rejects: int = 1000,
) -> list[dict]:
    """Generate n problem records with leaves drawn from ``dist``.

    Skill index i denotes the number i when a modulus is set (so the
    distribution must have d = modulus) and the number i + 1 otherwise.
    ``num_ops`` may be a fixed count or an inclusive range inside 2..8.
    ``multi_hop_template`` randomly combines two adjacent solution steps.
    """
    if isinstance(num_ops, int):
        lo = hi = num_ops
    else:
        lo, hi = num_ops
    if lo not in ALLOWED_OP_COUNTS or hi not in ALLOWED_OP_COUNTS or lo > hi:
        raise ValueError(f"operation count must lie within 2..8, got {num_ops}")
    if modulus is not None:
        if modulus < 2 or any(modulus % f == 0 for f in range(2, int(modulus**0.5) + 1)):
            raise ValueError(f"modulus must be prime, got {modulus}")
        if dist.d != modulus:
            raise ValueError(f"distribution must cover numbers 0..{modulus - 1}, got d={dist.d}")

    records = []
    for _ in range(n):
        ops_count = int(rng.integers(lo, hi + 1))
        built = None
        attempts = 0
        while built is None:
            attempts += 1
            if attempts > max_rejects:
                raise GsmGenerationError(attempts - 1, ops_count, modulus)
            built = _build_dag(dist, ops_count, modulus, value_cap, rng)
        nodes, values, skills = built
        query = len(nodes) - 1
        name_ids = rng.choice(len(ITEM_NAMES), size=len(nodes), replace=False)
        names = [ITEM_NAMES[int(i)] for i in name_ids]
        place = PLACE_NAMES[int(rng.integers(0, len(PLACE_NAMES)))]
        problem, solution = _render(
            nodes, values, query, modulus, names, place, multi_hop_template, rng
        )
        records.append(
            {
                "task": "gsm",
                "prompt": problem,
                "answer": str(values[query]),
                "skills": skills,
                "meta": {
                    "nodes": nodes,
                    "query": query,
                    "modulus": modulus,
                    "num_ops": ops_count,
                    "rejected_attempts": attempts - 1,
                    "solution": solution,
                },
            }
        )
    return records
