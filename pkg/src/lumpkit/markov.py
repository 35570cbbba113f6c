"""Finite DTMC/CTMC representations and basic analyses.

Matrices are stored sparsely (row-major adjacency lists); distributions are
dense vectors. All values are immutable after construction and every
operation is a pure function, so concurrent read access is safe.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import NotIrreducible, RateBoundViolated, SolverFailure

ROW_SUM_TOL = 1e-12
DEFAULT_RATE_SLACK = 1.05
POISSON_TERM_CAP = 10 ** 6


@dataclass(frozen=True)
class StateSpace:
    """Ordered list of opaque state keys with an index lookup."""

    states: tuple
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {key: i for i, key in enumerate(self.states)}
        if len(index) != len(self.states):
            raise ValueError("state keys must be pairwise distinct")
        object.__setattr__(self, "index", index)

    def __len__(self):
        return len(self.states)


class _SparseMatrix:
    """Square sparse matrix, rows stored as tuples of (col, value)."""

    def __init__(self, dim, rows):
        if dim <= 0:
            raise ValueError("dimension must be positive")
        if len(rows) != dim:
            raise ValueError("row count does not match dimension")
        self.dim = dim
        self.rows = tuple(tuple(row) for row in rows)
        self._validate()

    def _validate(self):
        raise NotImplementedError

    @classmethod
    def from_dense(cls, arr):
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("expected a square matrix")
        rows = [
            tuple((j, arr[i, j]) for j in range(arr.shape[1]) if arr[i, j] != 0.0)
            for i in range(arr.shape[0])
        ]
        return cls(arr.shape[0], rows)

    @classmethod
    def from_triplets(cls, dim, triplets):
        rows = [{} for _ in range(dim)]
        for r, c, v in triplets:
            rows[r][c] = rows[r].get(c, 0.0) + float(v)
        return cls(dim, [tuple(sorted(row.items())) for row in rows])

    def dense(self):
        arr = np.zeros((self.dim, self.dim))
        for i, row in enumerate(self.rows):
            for j, v in row:
                arr[i, j] = v
        return arr

    def entry(self, i, j):
        for c, v in self.rows[i]:
            if c == j:
                return v
        return 0.0

    def triplets(self):
        return [(i, j, v) for i, row in enumerate(self.rows) for j, v in row]

    def __eq__(self, other):
        return type(self) is type(other) and self.dim == other.dim and self.rows == other.rows

    def __hash__(self):
        return hash((type(self).__name__, self.dim, self.rows))


class StochasticMatrix(_SparseMatrix):
    """Row-stochastic transition matrix."""

    kind = "stochastic"

    def _validate(self):
        for i, row in enumerate(self.rows):
            total = 0.0
            for j, v in row:
                if not 0 <= j < self.dim:
                    raise ValueError(f"column {j} out of range")
                if v < 0:
                    raise ValueError(f"negative entry at ({i}, {j})")
                total += v
            if abs(total - 1.0) > ROW_SUM_TOL:
                raise ValueError(f"row {i} sums to {total!r}, expected 1")


class RateMatrix(_SparseMatrix):
    """CTMC generator: nonnegative off-diagonal, zero row sums."""

    kind = "rate"

    def _validate(self):
        for i, row in enumerate(self.rows):
            total = 0.0
            for j, v in row:
                if not 0 <= j < self.dim:
                    raise ValueError(f"column {j} out of range")
                if j != i and v < 0:
                    raise ValueError(f"negative off-diagonal entry at ({i}, {j})")
                total += v
            if abs(total) > ROW_SUM_TOL:
                raise ValueError(f"row {i} sums to {total!r}, expected 0")

    def exit_rates(self):
        """Per-state exit rates q_i = -Q(i, i)."""
        return np.array([-self.entry(i, i) for i in range(self.dim)])


class Distribution:
    """Probability vector over a state space."""

    def __init__(self, weights):
        arr = np.array(weights, dtype=float)
        if arr.ndim != 1:
            raise ValueError("weights must be a vector")
        if (arr < 0).any():
            raise ValueError("weights must be nonnegative")
        if abs(arr.sum() - 1.0) > ROW_SUM_TOL:
            raise ValueError(f"weights sum to {arr.sum()!r}, expected 1")
        arr.flags.writeable = False
        self.weights = arr

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    def __eq__(self, other):
        return isinstance(other, Distribution) and np.array_equal(self.weights, other.weights)

    @classmethod
    def point_mass(cls, dim, i):
        w = np.zeros(dim)
        w[i] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, dim):
        return cls(np.full(dim, 1.0 / dim))


@dataclass(frozen=True)
class ChainStructure:
    """Communicating-class decomposition of a chain."""

    communicating_classes: tuple  # tuple of frozensets of state indices
    closed_flags: tuple
    periods: tuple
    irreducible: bool


def classify(K) -> ChainStructure:
    """Communicating classes, closedness, and periods of a chain.

    Positive entries define the transition digraph; for rate matrices only
    off-diagonal entries count and every class reports period 1.
    """
    g = nx.DiGraph()
    g.add_nodes_from(range(K.dim))
    is_rate = isinstance(K, RateMatrix)
    for i, row in enumerate(K.rows):
        for j, v in row:
            if v > 0 and not (is_rate and i == j):
                g.add_edge(i, j)
    classes = sorted((frozenset(c) for c in nx.strongly_connected_components(g)),
                     key=min)
    closed = []
    periods = []
    for cls in classes:
        closed.append(all(j in cls for i in cls for j in g.successors(i)))
        if is_rate:
            periods.append(1)
        else:
            periods.append(_class_period(g, cls))
    irreducible = len(classes) == 1 and closed[0]
    return ChainStructure(tuple(classes), tuple(closed), tuple(periods), irreducible)


def _class_period(g, cls):
    """gcd of (level difference + 1) over edges in a BFS of the class subgraph."""
    root = min(cls)
    level = {root: 0}
    queue = [root]
    while queue:
        u = queue.pop(0)
        for v in g.successors(u):
            if v in cls and v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    period = 0
    for u in cls:
        for v in g.successors(u):
            if v in cls:
                period = math.gcd(period, level[u] + 1 - level[v])
    return period if period > 0 else 1


def stationary(K, tol=1e-10) -> Distribution:
    """Stationary distribution of an irreducible chain.

    Solves mu K = mu (stochastic) or mu K = 0 (rate) by replacing the
    normalization row and using an LU solve with partial pivoting.
    """
    structure = classify(K)
    if sum(structure.closed_flags) > 1:
        raise NotIrreducible("chain has more than one closed communicating class")
    dense = K.dense()
    if isinstance(K, StochasticMatrix):
        a = (dense - np.eye(K.dim)).T
    else:
        a = dense.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(K.dim)
    b[-1] = 1.0
    try:
        mu = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(str(exc)) from exc
    mu = np.where(np.abs(mu) < 1e-14, 0.0, mu)
    if (mu < 0).any():
        raise SolverFailure("stationary solve produced negative weights")
    mu = mu / mu.sum()
    if isinstance(K, StochasticMatrix):
        residual = np.max(np.abs(mu @ dense - mu))
    else:
        residual = np.max(np.abs(mu @ dense))
    if residual > tol:
        raise SolverFailure(f"stationary residual {residual:.3e} exceeds {tol:.3e}")
    return Distribution(mu)


def uniformize(Q: RateMatrix, r: float) -> StochasticMatrix:
    """Uniformized transition matrix M = I + Q/r, requiring r > max_i q_i."""
    qmax = float(Q.exit_rates().max()) if Q.dim else 0.0
    if r <= qmax:
        raise RateBoundViolated(f"r = {r!r} must exceed the maximal exit rate {qmax!r}")
    # I + Q/r is entrywise nonnegative under the strict rate bound; row sums
    # inherit the generator's zero-sum dust, which stays within tolerance
    m = np.eye(Q.dim) + Q.dense() / r
    return StochasticMatrix.from_dense(m)


def default_rate(Q: RateMatrix, slack=DEFAULT_RATE_SLACK) -> float:
    """Uniformization rate strictly above the exit-rate bound."""
    qmax = float(Q.exit_rates().max())
    if qmax == 0.0:
        return 1.0
    return slack * qmax


def transient(Q: RateMatrix, pi0: Distribution, t: float, tol: float = 1e-12) -> Distribution:
    """Transient solution pi0 e^{Qt} via the uniformized Poisson-weighted series."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if len(pi0) != Q.dim:
        raise ValueError("distribution length does not match matrix dimension")
    if t == 0.0:
        return pi0
    qmax = float(Q.exit_rates().max())
    if qmax == 0.0:
        return pi0
    r = default_rate(Q)
    m = uniformize(Q, r).dense()
    rt = r * t
    weight = math.exp(-rt)
    cumulative = weight
    v = pi0.weights.copy()
    acc = weight * v
    k = 0
    while cumulative < 1.0 - tol:
        k += 1
        if k > POISSON_TERM_CAP:
            break
        v = v @ m
        weight *= rt / k
        cumulative += weight
        acc += weight * v
    acc[acc < 0] = 0.0
    return Distribution(acc / acc.sum())


def evolve_discrete(P: StochasticMatrix, pi0: Distribution, n: int) -> Distribution:
    """pi0 P^n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    dense = P.dense()
    v = pi0.weights.copy()
    for _ in range(n):
        v = v @ dense
    v[v < 0] = 0.0
    return Distribution(v / v.sum())


def cesaro(P: StochasticMatrix, pi0: Distribution, n: int) -> Distribution:
    """Running average (1/n) sum_{k=1..n} pi0 P^k."""
    if n < 1:
        raise ValueError("n must be positive")
    dense = P.dense()
    v = pi0.weights.copy()
    acc = np.zeros_like(v)
    for _ in range(n):
        v = v @ dense
        acc += v
    acc /= n
    acc[acc < 0] = 0.0
    return Distribution(acc / acc.sum())


# --- serialization -----------------------------------------------------------

def chain_to_dict(space: StateSpace, K) -> dict:
    return {
        "states": list(space.states),
        "kind": K.kind,
        "triplets": [[r, c, v] for r, c, v in K.triplets()],
    }


def chain_from_dict(data: dict):
    space = StateSpace(tuple(data["states"]))
    cls = {"stochastic": StochasticMatrix, "rate": RateMatrix}[data["kind"]]
    matrix = cls.from_triplets(len(space), data["triplets"])
    return space, matrix


def save_chain(path, space: StateSpace, K, extra=None):
    data = chain_to_dict(space, K)
    if extra:
        data.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_chain(path):
    with open(path, encoding="utf-8") as fh:
        return chain_from_dict(json.load(fh))


def save_distribution(path, space: StateSpace, dist: Distribution):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for key, w in zip(space.states, dist.weights):
            writer.writerow([key, repr(float(w))])


def load_distribution(path, space: StateSpace) -> Distribution:
    weights = np.zeros(len(space))
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            key, value = row[0], float(row[1])
            weights[space.index[key]] = value
    return Distribution(weights)
