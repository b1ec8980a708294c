"""Pure-Python/numpy versions of the compiled kernels in ``_ckernels.pyx``.

Both backends must return bit-identical results; ``tests/test_kernels.py``
runs them side by side.
"""

import numpy as np


def soft_weight_matrix(losses, gamma):
    ratio = gamma / (gamma + 1.0)
    lo = ratio * ratio
    hi = gamma * gamma
    out = np.empty_like(losses, dtype=np.float64)
    with np.errstate(divide="ignore"):
        mid = 1.0 / np.sqrt(losses) - 1.0 / gamma
    out[...] = np.where(losses <= lo, 1.0, np.where(losses >= hi, 0.0, mid))
    return out


def greedy_modularity(adjacency):
    """Greedy agglomeration of singleton communities by modularity gain.

    Works on integer edge counts so ties are exact: the gain of merging ``i``
    and ``j`` is ``S_ij / (2 m^2)`` with ``S_ij = 2m * M_ij - K_i * K_j``,
    where ``M_ij`` counts edges between the two communities and ``K`` holds
    degree sums. The lexicographically smallest ``(i, j)`` wins a tie.

    Returns ``(labels, q_num)`` with modularity ``q_num / (4 m^2)``.
    """
    a = np.asarray(adjacency)
    n = a.shape[0]
    M = (a != 0).astype(np.int64)
    np.fill_diagonal(M, 0)
    K = M.sum(axis=1)
    two_m = int(K.sum())
    if two_m == 0:
        raise ValueError("modularity is undefined on an edgeless graph")
    active = np.ones(n, dtype=bool)
    owner = np.arange(n)
    total = -int(np.dot(K, K))
    sentinel = np.iinfo(np.int64).min
    upper = np.triu(np.ones((n, n), dtype=bool), 1)

    while True:
        S = two_m * M - np.outer(K, K)
        valid = upper & active[:, None] & active[None, :]
        S = np.where(valid, S, sentinel)
        flat = int(np.argmax(S))
        i, j = divmod(flat, n)
        s = int(S[i, j])
        if s <= 0:
            break
        total += 2 * s
        M[i, :] += M[j, :]
        M[:, i] += M[:, j]
        M[i, i] = 0
        M[j, :] = 0
        M[:, j] = 0
        K[i] += K[j]
        K[j] = 0
        active[j] = False
        owner[owner == j] = i

    # relabel in order of first appearance
    first = {}
    dense = np.array([first.setdefault(c, len(first)) for c in owner.tolist()], dtype=np.int64)
    return dense, total
