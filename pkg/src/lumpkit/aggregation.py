"""Measure-weighted lumping of Markov chains.

A partition of the state space together with one probability measure per
block defines a backward-looking aggregation condition: the measure-weighted
incoming mass into a target state, normalized by the target's own weight,
must be constant over each target block. When the condition holds, the
aggregated matrix over blocks is again stochastic (or a generator) and the
original chain's distribution can be recovered from the aggregated one.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import markov
from .errors import ConditionViolated, NotNested, TheoremViolated
from .markov import Distribution, RateMatrix, StochasticMatrix, classify, transient, uniformize

DEFAULT_CONDITION_TOL = 1e-9
RESPECT_TOL = 1e-12
ZERO_BLOCK_EPS = 1e-12


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty blocks of state indices covering the state space."""

    blocks: tuple  # tuple of tuples of state indices, each sorted
    block_of: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        blocks = tuple(tuple(sorted(b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        block_of = {}
        for bi, block in enumerate(blocks):
            if not block:
                raise ValueError("blocks must be nonempty")
            for s in block:
                if s in block_of:
                    raise ValueError(f"state {s} occurs in two blocks")
                block_of[s] = bi
        if set(block_of) != set(range(len(block_of))):
            raise ValueError("blocks must cover a contiguous index range")
        object.__setattr__(self, "block_of", block_of)

    @property
    def num_states(self):
        return len(self.block_of)

    def __len__(self):
        return len(self.blocks)

    @classmethod
    def singletons(cls, n):
        return cls(tuple((i,) for i in range(n)))


@dataclass(frozen=True)
class MeasureFamily:
    """One probability measure per block, strictly positive on its block."""

    alphas: tuple  # tuple of dicts state index -> weight

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(dict(a) for a in self.alphas))
        for i, alpha in enumerate(self.alphas):
            if not alpha:
                raise ValueError(f"measure {i} is empty")
            if any(w <= 0 for w in alpha.values()):
                raise ValueError(f"measure {i} has a nonpositive weight")
            total = sum(alpha.values())
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"measure {i} sums to {total!r}, expected 1")

    def check_compatible(self, part: Partition):
        for i, alpha in enumerate(self.alphas):
            if set(alpha) != set(part.blocks[i]):
                raise ValueError(f"measure {i} support does not match block {i}")


def uniform_measures(part: Partition) -> MeasureFamily:
    """alpha_i(s) = 1/|A_i| on each block."""
    return MeasureFamily(tuple({s: 1.0 / len(b) for s in b} for b in part.blocks))


@dataclass(frozen=True)
class DeltaTable:
    """Backward condition values per (source block, target state) and their
    per-(source block, target block) spread."""

    values: dict  # (block i, state s) -> value
    spread: dict  # (block i, block j) -> max - min over s in A_j

    @property
    def max_spread(self):
        return max(self.spread.values(), default=0.0)


def delta_table(K, part: Partition, alphas: MeasureFamily) -> DeltaTable:
    """Weighted incoming mass per target state, normalized by its own weight."""
    alphas.check_compatible(part)
    if part.num_states != K.dim:
        raise ValueError("partition does not cover the matrix dimension")
    accum = {}
    for s_prime, row in enumerate(K.rows):
        i = part.block_of[s_prime]
        w = alphas.alphas[i][s_prime]
        for s, v in row:
            accum[(i, s)] = accum.get((i, s), 0.0) + w * v
    values = {}
    spread = {}
    for i in range(len(part)):
        for j, block in enumerate(part.blocks):
            lo = hi = None
            for s in block:
                value = accum.get((i, s), 0.0) / alphas.alphas[j][s]
                values[(i, s)] = value
                lo = value if lo is None else min(lo, value)
                hi = value if hi is None else max(hi, value)
            spread[(i, j)] = hi - lo
    return DeltaTable(values, spread)


def check_condition(K, part: Partition, alphas: MeasureFamily,
                    tol: float = DEFAULT_CONDITION_TOL):
    """Does the backward condition hold at tolerance tol? Reports the residual."""
    table = delta_table(K, part, alphas)
    residual = table.max_spread
    return {"holds": residual <= tol, "residual": residual}


def check_cond3(K, part: Partition) -> bool:
    """Structural sufficient condition: between any two states of a target
    block, the multisets of incoming rates from each source block agree
    exactly (equivalently, a rate-preserving permutation of the source block
    exists)."""
    if part.num_states != K.dim:
        raise ValueError("partition does not cover the matrix dimension")
    columns = {}  # (source block, target state) -> {source state: value}
    for s_prime, row in enumerate(K.rows):
        i = part.block_of[s_prime]
        for s, v in row:
            columns.setdefault((i, s), {})[s_prime] = v
    for i, source in enumerate(part.blocks):
        size = len(source)
        for block in part.blocks:
            reference = None
            for s in block:
                col = columns.get((i, s), {})
                multiset = sorted(col.values()) + [0.0] * (size - len(col))
                if reference is None:
                    reference = multiset
                elif multiset != reference:
                    return False
    return True


@dataclass(frozen=True)
class AggregatedChain:
    partition: Partition
    measures: MeasureFamily
    matrix: object  # StochasticMatrix or RateMatrix over blocks
    residual: float


def aggregate(K, part: Partition, alphas: MeasureFamily,
              tol: float = DEFAULT_CONDITION_TOL) -> AggregatedChain:
    """Aggregated matrix over blocks; entry (i, j) averages the condition
    value over all representatives of block j to stay symmetric under float
    noise."""
    table = delta_table(K, part, alphas)
    residual = table.max_spread
    if residual > tol:
        raise ConditionViolated(residual, tol)
    m = len(part)
    dense = np.zeros((m, m))
    for i in range(m):
        for j, block in enumerate(part.blocks):
            dense[i, j] = sum(table.values[(i, s)] for s in block) / len(block)
    if isinstance(K, StochasticMatrix):
        dense[dense < 0] = 0.0
        dense /= dense.sum(axis=1, keepdims=True)
        matrix = StochasticMatrix.from_dense(dense)
    else:
        np.fill_diagonal(dense, 0.0)
        dense[dense < 0] = 0.0
        np.fill_diagonal(dense, -dense.sum(axis=1))
        matrix = RateMatrix.from_dense(dense)
    return AggregatedChain(part, alphas, matrix, residual)


def restrict(pi: Distribution, part: Partition) -> Distribution:
    """Project a distribution onto the block space by summing within blocks."""
    weights = np.array([sum(pi[s] for s in block) for block in part.blocks])
    return Distribution(weights / weights.sum())


def lift(pi_blocks: Distribution, part: Partition, alphas: MeasureFamily) -> Distribution:
    """De-aggregate a block distribution through the block measures."""
    alphas.check_compatible(part)
    weights = np.zeros(part.num_states)
    for i, block in enumerate(part.blocks):
        for s in block:
            weights[s] = pi_blocks[i] * alphas.alphas[i][s]
    return Distribution(weights)


def respects(pi: Distribution, part: Partition, alphas: MeasureFamily,
             tol: float = RESPECT_TOL):
    """Is the conditional distribution of pi on each positive-mass block equal
    to that block's measure?"""
    alphas.check_compatible(part)
    deviation = 0.0
    for i, block in enumerate(part.blocks):
        mass = sum(pi[s] for s in block)
        if mass <= 0.0:
            continue  # empty blocks impose no constraint
        for s in block:
            deviation = max(deviation, abs(pi[s] / mass - alphas.alphas[i][s]))
    return {"holds": bool(deviation <= tol), "deviation": float(deviation)}


@dataclass(frozen=True)
class NestedResult:
    refines: bool
    groups: Partition  # partition of fine-block indices by coarse block
    alpha_prime: MeasureFamily  # over fine-block indices


def nested(fine: Partition, coarse: Partition) -> NestedResult:
    """Group fine blocks by the coarse block containing them and attach the
    size-proportional measures that make the fine-block chain aggregate to
    the coarse-block chain."""
    if fine.num_states != coarse.num_states:
        raise ValueError("partitions cover different state spaces")
    group_of = {}
    for fi, block in enumerate(fine.blocks):
        targets = {coarse.block_of[s] for s in block}
        if len(targets) > 1:
            raise NotNested(f"fine block {fi} straddles coarse blocks {sorted(targets)}")
        group_of[fi] = targets.pop()
    groups = [[] for _ in range(len(coarse))]
    for fi, ci in group_of.items():
        groups[ci].append(fi)
    alphas = []
    for ci, members in enumerate(groups):
        size = len(coarse.blocks[ci])
        alphas.append({fi: len(fine.blocks[fi]) / size for fi in members})
    return NestedResult(True, Partition(tuple(tuple(g) for g in groups)),
                        MeasureFamily(tuple(alphas)))


def verify_commutation(Q: RateMatrix, part: Partition, alphas: MeasureFamily,
                       r: float, tol: float = DEFAULT_CONDITION_TOL) -> float:
    """Residual between aggregating the uniformized chain and uniformizing
    the aggregated generator; zero in exact arithmetic."""
    m = uniformize(Q, r)
    agg_m = aggregate(m, part, alphas, tol).matrix.dense()
    agg_q = aggregate(Q, part, alphas, tol).matrix.dense()
    other = np.eye(len(part)) + agg_q / r
    return float(np.max(np.abs(agg_m - other)))


def power_identity_residual(P: StochasticMatrix, part: Partition,
                            alphas: MeasureFamily, n: int,
                            tol: float = DEFAULT_CONDITION_TOL) -> float:
    """Residual of the n-step identity: the aggregated matrix power equals
    the condition value computed from the full n-step matrix."""
    if n < 1:
        raise ValueError("n must be positive")
    agg = aggregate(P, part, alphas, tol).matrix.dense()
    agg_n = np.linalg.matrix_power(agg, n)
    p_n = np.linalg.matrix_power(P.dense(), n)
    residual = 0.0
    for i, source in enumerate(part.blocks):
        for j, block in enumerate(part.blocks):
            for s in block:
                value = sum(alphas.alphas[i][sp] * p_n[sp, s] for sp in source)
                value /= alphas.alphas[j][s]
                residual = max(residual, abs(agg_n[i, j] - value))
    return residual


@dataclass(frozen=True)
class PreservationReport:
    original_irreducible: bool
    aggregated_irreducible: bool
    aperiodic_states_checked: int


def structural_preservation(K, agg: AggregatedChain) -> PreservationReport:
    """Assert that irreducibility and aperiodicity survive aggregation; a
    violation falsifies the implementation, not the model."""
    full = classify(K)
    block = classify(agg.matrix)
    if full.irreducible and not block.irreducible:
        raise TheoremViolated("aggregation of an irreducible chain is reducible")
    checked = 0
    for cls, period in zip(full.communicating_classes, full.periods):
        if period != 1:
            continue
        for s in cls:
            bi = agg.partition.block_of[s]
            for bcls, bperiod in zip(block.communicating_classes, block.periods):
                if bi in bcls and bperiod != 1:
                    raise TheoremViolated(
                        f"block {bi} of an aperiodic state has period {bperiod}")
            checked += 1
    return PreservationReport(full.irreducible, block.irreducible, checked)


def convergence_diagnostics(Q: RateMatrix, part: Partition, alphas: MeasureFamily,
                            pi0: Distribution, times,
                            tol: float = DEFAULT_CONDITION_TOL,
                            transient_tol: float = 1e-14):
    """Lumpability and invertibility deviations between the full chain and
    the aggregated chain, per time point."""
    agg = aggregate(Q, part, alphas, tol)
    pi0_blocks = restrict(pi0, part)
    series = []
    for t in times:
        x = transient(Q, pi0, t, transient_tol)
        y = transient(agg.matrix, pi0_blocks, t, transient_tol)
        dev_lump = max(abs(y[i] - sum(x[s] for s in block))
                       for i, block in enumerate(part.blocks))
        dev_inv = 0.0
        for i, block in enumerate(part.blocks):
            if y[i] <= ZERO_BLOCK_EPS:
                continue  # identity is vacuous on mass-free blocks
            for s in block:
                dev_inv = max(dev_inv, abs(x[s] - y[i] * alphas.alphas[i][s]))
        series.append((float(t), float(dev_lump), float(dev_inv)))
    return series


# --- serialization -----------------------------------------------------------

def partition_to_dict(part: Partition, space: markov.StateSpace) -> dict:
    return {"blocks": [[space.states[s] for s in block] for block in part.blocks]}


def partition_from_dict(data: dict, space: markov.StateSpace) -> Partition:
    return Partition(tuple(tuple(space.index[k] for k in block)
                           for block in data["blocks"]))


def save_partition(path, part: Partition, space):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(partition_to_dict(part, space), fh, indent=1)
        fh.write("\n")


def load_partition(path, space) -> Partition:
    with open(path, encoding="utf-8") as fh:
        return partition_from_dict(json.load(fh), space)


def measures_to_dict(alphas: MeasureFamily, space) -> dict:
    return {"alphas": [{space.states[s]: w for s, w in sorted(a.items())}
                       for a in alphas.alphas]}


def measures_from_dict(data: dict, space) -> MeasureFamily:
    return MeasureFamily(tuple({space.index[k]: float(w) for k, w in a.items()}
                               for a in data["alphas"]))


def save_measures(path, alphas: MeasureFamily, space):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(measures_to_dict(alphas, space), fh, indent=1)
        fh.write("\n")


def load_measures(path, space) -> MeasureFamily:
    with open(path, encoding="utf-8") as fh:
        return measures_from_dict(json.load(fh), space)


def save_diagnostics(path, series):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "dev_lump", "dev_inv"])
        for t, dev_lump, dev_inv in series:
            writer.writerow([repr(t), repr(dev_lump), repr(dev_inv)])
