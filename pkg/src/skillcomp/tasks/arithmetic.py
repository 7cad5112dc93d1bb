"""Multi-step arithmetic without chain of thought.

An expression is an alternating literal/operator sequence over {+, -, *};
multiplication binds tighter, same-precedence operators evaluate left to
right. Each operand is a skill, so a power-law operand distribution with a
shuffled rank map changes only occurrence frequencies, never values.
"""

from __future__ import annotations

import numpy as np

__all__ = ["OPERATORS", "tokenize_expression", "eval_arithmetic", "gen_arithmetic"]

OPERATORS = ("+", "-", "*")


def tokenize_expression(text: str) -> list:
    """Split an expression string into int literals and operator tokens."""
    tokens: list = []
    for part in text.split():
        if part in OPERATORS:
            tokens.append(part)
        else:
            tokens.append(int(part))
    return tokens


def eval_arithmetic(tokens) -> int:
    """Exact integer evaluation with * before +/-, left to right otherwise."""
    if isinstance(tokens, str):
        tokens = tokenize_expression(tokens)
    tokens = list(tokens)
    if len(tokens) % 2 == 0 or not tokens:
        raise ValueError("expression must alternate literal, operator, literal, ...")
    for i, tok in enumerate(tokens):
        if i % 2 == 0 and not isinstance(tok, (int, np.integer)):
            raise ValueError(f"expected literal at position {i}, got {tok!r}")
        if i % 2 == 1 and tok not in OPERATORS:
            raise ValueError(f"expected operator at position {i}, got {tok!r}")
    # multiplication pass
    reduced: list = [tokens[0]]
    for op, lit in zip(tokens[1::2], tokens[2::2]):
        if op == "*":
            reduced[-1] = reduced[-1] * lit
        else:
            reduced.extend([op, lit])
    # additive pass, left to right
    value = reduced[0]
    for op, lit in zip(reduced[1::2], reduced[2::2]):
        value = value + lit if op == "+" else value - lit
    return int(value)


def gen_arithmetic(
    dist,
    n: int,
    rng: np.random.Generator,
    *,
    num_ops: int = 4,
    operand_range: tuple[int, int] = (1, 50),
) -> list[dict]:
    """Generate n expression records with operands drawn from ``dist``.

    Skill index i stands for the operand value operand_range[0] + i, so the
    distribution must have d = hi - lo + 1. Operators are uniform over
    {+, -, *}. Prompts and labels follow the boxed-answer format with the
    answer preceded by a single space.
    """
    lo, hi = operand_range
    if hi < lo:
        raise ValueError(f"empty operand range {operand_range}")
    if dist.d != hi - lo + 1:
        raise ValueError(f"distribution must have d={hi - lo + 1} for range {operand_range}")
    if num_ops < 1:
        raise ValueError(f"need num_ops >= 1, got {num_ops}")
    records = []
    for _ in range(n):
        idx = np.atleast_1d(dist.sample(rng, size=num_ops + 1))
        operands = [int(lo + i) for i in idx]
        ops = [OPERATORS[j] for j in rng.integers(0, len(OPERATORS), size=num_ops)]
        tokens: list = [operands[0]]
        for op, operand in zip(ops, operands[1:]):
            tokens.extend([op, operand])
        value = eval_arithmetic(tokens)
        expr = " ".join(str(t) for t in tokens)
        records.append(
            {
                "task": "arithmetic",
                "prompt": f"User: Calculate {expr}.\nAssistant:\\boxed{{",
                "answer": str(value),
                "skills": [int(i) for i in idx],
                "meta": {
                    "label": f" {value}}}",
                    "expression": expr,
                    "num_ops": num_ops,
                },
            }
        )
    return records
