import itertools

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def brute_multilinear(table, x):
    """Literal sum over all subsets; the reference for multilinear values."""
    m = len(x)
    total = 0.0
    for mask in range(1 << m):
        p = 1.0
        for i in range(m):
            p *= x[i] if (mask >> i) & 1 else (1.0 - x[i])
        total += table[mask] * p
    return total


def cut_table(weights: np.ndarray) -> np.ndarray:
    """Value table of a weighted graph cut: nonnegative, submodular, non-monotone."""
    m = weights.shape[0]
    table = np.zeros(1 << m)
    for mask in range(1 << m):
        inside = [(mask >> i) & 1 for i in range(m)]
        total = 0.0
        for i in range(m):
            for j in range(i + 1, m):
                if inside[i] != inside[j]:
                    total += weights[i, j]
        table[mask] = total
    return table


def exhaustive_submodularity_ok(table, m, tol=1e-9):
    """Literal check of f(A+i) - f(A) >= f(B+i) - f(B) over every A <= B."""
    for b_mask in range(1 << m):
        a_sub = b_mask
        while True:
            for i in range(m):
                bit = 1 << i
                if b_mask & bit:
                    continue
                lhs = table[a_sub | bit] - table[a_sub]
                rhs = table[b_mask | bit] - table[b_mask]
                if lhs < rhs - tol:
                    return False
            if a_sub == 0:
                break
            a_sub = (a_sub - 1) & b_mask
    return True


def vertex_pairs_diameter(vertices):
    """Max squared distance over explicit vertex pairs."""
    best = 0.0
    for x, y in itertools.product(vertices, repeat=2):
        best = max(best, float(np.sum((np.asarray(x) - np.asarray(y)) ** 2)))
    return best
