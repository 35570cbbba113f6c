"""Builders, abstraction maps, and exact combinatorics for the two
desk-scale case studies: a scaffold binding two partners on independent
sites, and two-sided polymerization of two protein types.

All class sizes are computed in exact integer arithmetic; block measures
are the reciprocals of these sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

from .errors import InvalidArgs, InvalidCounts, NotPolymerComponent
from .rules import ReactionMixture, RewriteRule, RuleModel
from .sitegraph import (
    SiteGraph,
    connected_components,
    make_edge,
    make_mixture,
    node_type,
)


# --- case study 1: scaffold --------------------------------------------------

SCAFFOLD_INTERFACE = {"A": frozenset({"b"}), "B": frozenset({"a", "c"}),
                      "C": frozenset({"b"})}


@dataclass(frozen=True)
class ScaffoldParams:
    """Counts of A/B/C nodes and the four rule rates: c1 binds A-B, c2 binds
    B-C, c3 and c4 are the respective unbind rates."""

    n_a: int
    n_b: int
    n_c: int
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0

    def __post_init__(self):
        if min(self.n_a, self.n_b, self.n_c) < 1:
            raise ValueError("node counts must be positive")
        if min(self.c1, self.c2, self.c3, self.c4) < 0:
            raise ValueError("rates must be nonnegative")


def _pair_rule(name, left_nodes, interface, edge, rate, bind):
    free = SiteGraph(frozenset(left_nodes), interface, frozenset())
    bound = SiteGraph(frozenset(left_nodes), interface, frozenset({edge}))
    if bind:
        return RewriteRule(free, bound, rate, name)
    return RewriteRule(bound, free, rate, name)


def scaffold_model(p: ScaffoldParams) -> RuleModel:
    """Two reversible binding rules on the two independent sites of B."""
    ab_iface = {"A": frozenset({"b"}), "B": frozenset({"a"})}
    bc_iface = {"B": frozenset({"c"}), "C": frozenset({"b"})}
    ab_edge = make_edge("A", "b", "B", "a")
    bc_edge = make_edge("B", "c", "C", "b")
    rules = (
        _pair_rule("r1", {"A", "B"}, ab_iface, ab_edge, p.c1, bind=True),
        _pair_rule("r2", {"B", "C"}, bc_iface, bc_edge, p.c2, bind=True),
        _pair_rule("r3", {"A", "B"}, ab_iface, ab_edge, p.c3, bind=False),
        _pair_rule("r4", {"B", "C"}, bc_iface, bc_edge, p.c4, bind=False),
    )
    initial = make_mixture(SCAFFOLD_INTERFACE,
                           {"A": p.n_a, "B": p.n_b, "C": p.n_c})
    return RuleModel(rules, initial, dict(SCAFFOLD_INTERFACE))


def _scaffold_site_flags(mix: ReactionMixture):
    bound = mix.graph.bound_endpoints()
    for name in sorted(mix.graph.nodes):
        if node_type(name) == "B":
            yield (name, "a") in bound, (name, "c") in bound


def scaffold_phi1(mix: ReactionMixture):
    """(AB-only, BC-only, ABC) complex counts, read off each B's two sites."""
    m_ab = m_bc = m_abc = 0
    for a_bound, c_bound in _scaffold_site_flags(mix):
        if a_bound and c_bound:
            m_abc += 1
        elif a_bound:
            m_ab += 1
        elif c_bound:
            m_bc += 1
    return (m_ab, m_bc, m_abc)


def scaffold_phi2(mix: ReactionMixture):
    """(number of B bound on a, number of B bound on c)."""
    m_ab_star = m_star_bc = 0
    for a_bound, c_bound in _scaffold_site_flags(mix):
        m_ab_star += a_bound
        m_star_bc += c_bound
    return (m_ab_star, m_star_bc)


def scaffold_class_size_phi1(v, p: ScaffoldParams) -> int:
    """Number of mixtures with the given (AB, BC, ABC) counts."""
    m_ab, m_bc, m_abc = v
    m_a = p.n_a - m_ab - m_abc
    m_b = p.n_b - m_ab - m_bc - m_abc
    m_c = p.n_c - m_bc - m_abc
    if min(m_ab, m_bc, m_abc, m_a, m_b, m_c) < 0:
        raise InvalidCounts(f"counts {v} are infeasible for {p}")
    num = factorial(p.n_a) * factorial(p.n_b) * factorial(p.n_c)
    den = (factorial(m_ab) * factorial(m_bc) * factorial(m_abc)
           * factorial(m_a) * factorial(m_b) * factorial(m_c))
    return num // den


def scaffold_class_size_phi2(v, p: ScaffoldParams) -> int:
    """Number of mixtures with the given (bound-a, bound-c) counts; the two
    bond layers are chosen independently."""
    m_ab_star, m_star_bc = v
    if not (0 <= m_ab_star <= min(p.n_a, p.n_b)
            and 0 <= m_star_bc <= min(p.n_b, p.n_c)):
        raise InvalidCounts(f"counts {v} are infeasible for {p}")
    ab = comb(p.n_a, m_ab_star) * comb(p.n_b, m_ab_star) * factorial(m_ab_star)
    bc = comb(p.n_c, m_star_bc) * comb(p.n_b, m_star_bc) * factorial(m_star_bc)
    return ab * bc


def scaffold_state_counts(n: int):
    """(species-level, fragment-level) block counts at n copies of each node."""
    if n < 0:
        raise InvalidArgs("n must be nonnegative")
    return ((n + 1) * (n + 2) * (n + 3) // 6, (n + 1) ** 2)


# --- case study 2: two-sided polymerization ---------------------------------

POLYMER_INTERFACE = {"A": frozenset({"b", "r"}), "B": frozenset({"a", "l"})}


@dataclass(frozen=True)
class PolymerParams:
    """n copies of A and of B; rates for bind/unbind of the b-a bond and
    bind/unbind of the r-l bond."""

    n: int
    bind_ba: float = 1.0
    unbind_ba: float = 1.0
    bind_rl: float = 1.0
    unbind_rl: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if min(self.bind_ba, self.unbind_ba, self.bind_rl, self.unbind_rl) < 0:
            raise ValueError("rates must be nonnegative")


def polymer_model(p: PolymerParams) -> RuleModel:
    ba_iface = {"A": frozenset({"b"}), "B": frozenset({"a"})}
    rl_iface = {"A": frozenset({"r"}), "B": frozenset({"l"})}
    ba_edge = make_edge("A", "b", "B", "a")
    rl_edge = make_edge("A", "r", "B", "l")
    rules = (
        _pair_rule("bind_ba", {"A", "B"}, ba_iface, ba_edge, p.bind_ba, bind=True),
        _pair_rule("unbind_ba", {"A", "B"}, ba_iface, ba_edge, p.unbind_ba, bind=False),
        _pair_rule("bind_rl", {"A", "B"}, rl_iface, rl_edge, p.bind_rl, bind=True),
        _pair_rule("unbind_rl", {"A", "B"}, rl_iface, rl_edge, p.unbind_rl, bind=False),
    )
    initial = make_mixture(POLYMER_INTERFACE, {"A": p.n, "B": p.n})
    return RuleModel(rules, initial, dict(POLYMER_INTERFACE))


@dataclass(frozen=True)
class ComponentClass:
    """Shape of a polymer component.

    Chain kinds are named by their free end sites: ChainAB has free b and a
    (all internal bonds r-l), ChainBA has free l and r, ChainAA/ChainBB end
    in two nodes of the same type, and Ring has no free sites. length_index
    follows the sequential-choice counting convention: it is the number of
    majority-type nodes, so an isolated A is ChainAA with index 1.
    """

    kind: str  # ChainAB | ChainBA | ChainAA | ChainBB | Ring
    length_index: int


def polymer_classify(component: SiteGraph) -> ComponentClass:
    n_a = sum(1 for v in component.nodes if node_type(v) == "A")
    n_b = sum(1 for v in component.nodes if node_type(v) == "B")
    if n_a + n_b != len(component.nodes) or n_a + n_b == 0:
        raise NotPolymerComponent("component has non-polymer node types")
    bound = component.bound_endpoints()
    free = [(node_type(v), s)
            for v in sorted(component.nodes)
            for s in component.interface[v]
            if (v, s) not in bound]
    if not free:
        if n_a != n_b or len(component.edges) != 2 * n_a:
            raise NotPolymerComponent("ring shape mismatch")
        return ComponentClass("Ring", n_a)
    if len(free) != 2:
        raise NotPolymerComponent(f"component has {len(free)} free sites")
    free_sites = sorted(s for _, s in free)
    if free_sites == ["a", "b"]:
        kind, index = "ChainAB", n_a
    elif free_sites == ["l", "r"]:
        kind, index = "ChainBA", n_a
    elif free_sites == ["b", "r"]:
        kind, index = "ChainAA", n_a
    elif free_sites == ["a", "l"]:
        kind, index = "ChainBB", n_b
    else:
        raise NotPolymerComponent(f"free sites {free_sites} match no chain kind")
    return ComponentClass(kind, index)


def polymer_phi1(mix: ReactionMixture):
    """Sorted multiset of (kind, length index) over connected components."""
    counts = {}
    for component in connected_components(mix.graph):
        cls = polymer_classify(component)
        key = (cls.kind, cls.length_index)
        counts[key] = counts.get(key, 0) + 1
    return tuple(sorted(counts.items()))


def polymer_phi2(mix: ReactionMixture):
    """(number of r-l bonds, number of b-a bonds)."""
    m_rl = m_ba = 0
    for edge in mix.graph.edges:
        sites = {s for _, s in edge}
        if sites == {"r", "l"}:
            m_rl += 1
        else:
            m_ba += 1
    return (m_rl, m_ba)


def polymer_phi3(mix: ReactionMixture) -> int:
    """Total bond count."""
    return len(mix.graph.edges)


def polymer_count_f(kind: int, m_a: int, m_b: int, i: int) -> int:
    """Sequential-choice counts: f1 picks a chain with free b/a ends, f2 a
    same-type-ended chain, f3 a ring (divided by its rotational symmetry)."""
    if min(m_a, m_b) < 0 or i < 0:
        raise InvalidArgs("arguments must be nonnegative")
    if kind == 1:
        return comb(m_a, i) * comb(m_b, i) * factorial(i) ** 2
    if kind == 2:
        if i < 1:
            raise InvalidArgs("f2 requires i >= 1")
        return comb(m_a, i) * comb(m_b, i - 1) * factorial(i) * factorial(i - 1)
    if kind == 3:
        if i < 1:
            raise InvalidArgs("f3 requires i >= 1")
        return comb(m_a, i) * comb(m_b, i) * factorial(i) ** 2 // i
    raise InvalidArgs(f"unknown counting kind {kind}")


def polymer_class_size_phi2(m_rl: int, m_ba: int, n: int) -> int:
    if not (0 <= m_rl <= n and 0 <= m_ba <= n):
        raise InvalidArgs(f"bond counts ({m_rl}, {m_ba}) infeasible for n = {n}")
    return (comb(n, m_rl) ** 2 * factorial(m_rl)
            * comb(n, m_ba) ** 2 * factorial(m_ba))


def polymer_class_size_phi3(m: int, n: int) -> int:
    if not 0 <= m <= 2 * n:
        raise InvalidArgs(f"bond count {m} infeasible for n = {n}")
    return sum(polymer_class_size_phi2(i, m - i, n)
               for i in range(max(0, m - n), min(n, m) + 1))


def polymer_state_counts(n: int):
    """(per-bond-type, total-bond-count) block counts."""
    if n < 0:
        raise InvalidArgs("n must be nonnegative")
    return ((n + 1) ** 2, 2 * n + 1)


def partition_number(n: int) -> int:
    """Number of integer partitions of n, by dynamic programming."""
    if n < 0:
        raise InvalidArgs("n must be nonnegative")
    table = [1] + [0] * n
    for part in range(1, n + 1):
        for total in range(part, n + 1):
            table[total] += table[total - part]
    return table[n]
