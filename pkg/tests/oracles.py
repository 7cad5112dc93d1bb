"""Independent oracle implementations used to check the package.

Everything here deliberately avoids the code paths under test: population
quantities come from explicit probability-weighted enumeration over all d^k
index sequences, gradients from central finite differences, eigenvectors
from numpy's dense solver, arithmetic from Python's own parser, and graph /
DAG answers from second traversal implementations.
"""

from __future__ import annotations

import itertools

import numpy as np


def enumerate_population(w, wstar, p, k):
    """Loss and gradient by brute force over all d^k weighted sequences."""
    w = np.asarray(w, dtype=np.float64)
    wstar = np.asarray(wstar, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    d = len(w)
    seqs = np.array(list(itertools.product(range(d), repeat=k)), dtype=np.int64)
    probs = np.prod(p[seqs], axis=1)
    f = np.prod(w[seqs], axis=1)
    y = np.prod(wstar[seqs], axis=1)
    loss = float(np.sum(probs * 0.5 * (f - y) ** 2))
    grad = np.zeros(d)
    for t in range(k):
        others = [j for j in range(k) if j != t]
        loo = np.prod(w[seqs[:, others]], axis=1) if others else np.ones(len(seqs))
        np.add.at(grad, seqs[:, t], probs * (f - y) * loo)
    return loss, grad


def enumerate_bin_loss(w, wstar, p, k, skill_idx):
    """Population loss conditioned on all k indices lying in one skill set."""
    skill_idx = np.asarray(skill_idx)
    p_cond = np.zeros(len(w))
    p_cond[skill_idx] = np.asarray(p, dtype=np.float64)[skill_idx]
    p_cond /= p_cond.sum()
    loss = 0.0
    for seq in itertools.product(skill_idx, repeat=k):
        prob = float(np.prod(p_cond[list(seq)]))
        f = float(np.prod(np.asarray(w)[list(seq)]))
        y = float(np.prod(np.asarray(wstar)[list(seq)]))
        loss += prob * 0.5 * (f - y) ** 2
    return loss


def enumerate_tail_gradient_norm(w, wstar, p, k, tail_idx, ctx_idx):
    """Exact E||per-sample grad|| when one uniform position is a tail skill
    and the rest come from the renormalized context skills."""
    w = np.asarray(w, dtype=np.float64)
    wstar = np.asarray(wstar, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    p_tail = {int(i): p[i] / p[tail_idx].sum() for i in tail_idx}
    p_ctx = {int(i): p[i] / p[ctx_idx].sum() for i in ctx_idx}
    total = 0.0
    for pos in range(k):
        for tail in tail_idx:
            for ctx in itertools.product(ctx_idx, repeat=k - 1):
                seq = list(ctx[:pos]) + [int(tail)] + list(ctx[pos:])
                prob = (1.0 / k) * p_tail[int(tail)] * float(
                    np.prod([p_ctx[int(c)] for c in ctx])
                )
                f = float(np.prod(w[seq]))
                y = float(np.prod(wstar[seq]))
                grad = {}
                for t, i in enumerate(seq):
                    loo = float(np.prod([w[j] for tt, j in enumerate(seq) if tt != t]))
                    grad[i] = grad.get(i, 0.0) + (f - y) * loo
                total += prob * float(np.sqrt(sum(g * g for g in grad.values())))
    return total


def central_difference_gradient(fn, w, h=1e-5):
    """Coordinate-wise central finite differences of a scalar function."""
    w = np.asarray(w, dtype=np.float64)
    grad = np.empty_like(w)
    for i in range(len(w)):
        hi = w.copy()
        lo = w.copy()
        hi[i] += h
        lo[i] -= h
        grad[i] = (fn(hi) - fn(lo)) / (2.0 * h)
    return grad


def top2_by_eigh(diffs):
    """Top-2 principal directions and variance fractions via numpy eigh."""
    x = np.asarray(diffs, dtype=np.float64)
    x = x - x.mean(axis=0)
    cov = x.T @ x / x.shape[0]
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    total = vals.sum()
    frac = vals[order[:2]] / total if total > 0 else np.zeros(2)
    return vecs[:, order[0]], vecs[:, order[1]], frac


def python_eval_arithmetic(expr: str) -> int:
    """Evaluate via Python's own parser (same precedence rules)."""
    return int(eval(expr, {"__builtins__": {}}, {}))


def traverse_by_name(graph, start_name: str, relation_names: list[str]) -> str:
    """Second traversal implementation, keyed by names instead of indices."""
    table = {}
    for e, ename in enumerate(graph.entity_names):
        for r, rname in enumerate(graph.relation_names):
            table[(ename, rname)] = graph.entity_names[int(graph.edges[e, r])]
    node = start_name
    for rname in relation_names:
        node = table[(node, rname)]
    return node


def eval_dag_recursive(nodes, query: int, modulus=None) -> int:
    """Second DAG evaluator: recursive with memoization."""
    memo: dict[int, int] = {}

    def value(i: int) -> int:
        if i in memo:
            return memo[i]
        node = nodes[i]
        if node[0] == "leaf":
            out = int(node[1])
        else:
            op = node[0]
            a, b = value(int(node[1])), value(int(node[2]))
            if op == "+":
                out = a + b
            elif op == "-":
                out = a - b
            elif op == "*":
                out = a * b
            else:
                out = a // b
            if modulus is not None and op != "/":
                out %= modulus
        memo[i] = out
        return out

    return value(query)


def binomial_band(p: float, n: int, sigmas: float = 5.0) -> float:
    """Half-width of the +/- sigmas band for an empirical frequency."""
    return sigmas * np.sqrt(p * (1.0 - p) / n)
