"""Independent brute-force oracles used to freeze expected values in tests."""

import itertools
import math

import numpy as np


def dag_descendants(edges, v):
    out, frontier = set(), {v}
    while frontier:
        nxt = {c for (p, c) in edges if p in frontier} - out
        out |= nxt
        frontier = nxt
    return out


def simple_paths(nodes, edges, a, b):
    nbrs = {n: set() for n in nodes}
    for p, c in edges:
        nbrs[p].add(c)
        nbrs[c].add(p)

    def walk(path):
        last = path[-1]
        if last == b:
            yield list(path)
            return
        for n in sorted(nbrs[last]):
            if n not in path:
                path.append(n)
                yield from walk(path)
                path.pop()

    yield from walk([a])


def path_active(path, edges, s):
    for i in range(1, len(path) - 1):
        prev, v, nxt = path[i - 1], path[i], path[i + 1]
        collider = (prev, v) in edges and (nxt, v) in edges
        if collider:
            if v not in s and not (dag_descendants(edges, v) & s):
                return False
        elif v in s:
            return False
    return True


def brute_d_separated(nodes, edges, a, b, s):
    s = set(s)
    edges = set(edges)
    return not any(path_active(p, edges, s) for p in simple_paths(nodes, edges, a, b))


def upper_triangular_dags(k):
    """All DAGs on nodes 0..k-1 consistent with the order 0 < 1 < ... < k-1.

    Every DAG on k labelled nodes is isomorphic to one of these, so looping
    over them and over all queries covers every DAG up to relabelling.
    """
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    for mask in range(1 << len(pairs)):
        yield [pairs[t] for t in range(len(pairs)) if mask >> t & 1]


def naive_hsic(a, b, sa, sb):
    """Biased HSIC by the double-sum definition (no matrix algebra)."""
    n = len(a)
    K = [[math.exp(-((a[i] - a[j]) ** 2) / (2 * sa * sa)) for j in range(n)] for i in range(n)]
    L = [[math.exp(-((b[i] - b[j]) ** 2) / (2 * sb * sb)) for j in range(n)] for i in range(n)]
    t1 = sum(K[i][j] * L[i][j] for i in range(n) for j in range(n)) / n**2
    t2 = (sum(map(sum, K)) / n**2) * (sum(map(sum, L)) / n**2)
    t3 = sum(sum(K[i]) * sum(L[i]) for i in range(n)) / n**3
    return t1 + t2 - 2 * t3


def exhaustive_perm_pvalue(a, b, sa, sb):
    obs = naive_hsic(a, b, sa, sb)
    count = total = 0
    for perm in itertools.permutations(range(len(b))):
        total += 1
        stat = naive_hsic(a, [b[i] for i in perm], sa, sb)
        if stat >= obs - 1e-9 * abs(obs):
            count += 1
    return count / total


def median_pairwise(x):
    x = np.asarray(x, dtype=float)
    d = np.abs(x[:, None] - x[None, :])
    return float(np.median(d[np.triu_indices(len(x), 1)]))
