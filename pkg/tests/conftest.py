"""Shared builders for the test suite."""

import numpy as np

from lumpkit import aggregation, markov


def fig_chain(c1, c2, d=1.0):
    """Six-state rate matrix with two blocks: four upstream states feeding two
    downstream targets (rates c1 and c2 per target), and a symmetric return
    rate d from each target to both of its feeders.

    States 0..3 form the first block (feeders g1, g2, g1', g2'), states 4..5
    the second (targets g, g'). g1 and g2 feed g; g1' and g2' feed g'.
    """
    q = np.zeros((6, 6))
    q[0, 4] = c1
    q[1, 4] = c2
    q[2, 5] = c1
    q[3, 5] = c2
    q[4, 0] = q[4, 1] = d
    q[5, 2] = q[5, 3] = d
    np.fill_diagonal(q, -q.sum(axis=1))
    return markov.RateMatrix.from_dense(q)


def fig_partition():
    return aggregation.Partition(((0, 1, 2, 3), (4, 5)))


def dense_expm(Q, t, terms=200):
    """Taylor-series matrix exponential, scaled and squared; independent of
    the uniformization path under test."""
    a = Q.dense() * t
    s = max(0, int(np.ceil(np.log2(max(1.0, np.abs(a).max())))) + 4)
    a = a / 2 ** s
    result = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, terms):
        term = term @ a / k
        result = result + term
    for _ in range(s):
        result = result @ result
    return result
