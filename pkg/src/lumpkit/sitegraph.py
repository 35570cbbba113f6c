"""Site-graphs, reaction mixtures, renaming, embeddings, and canonical keys.

Nodes carry named sites; an edge connects a site of one node to a site of a
different node. Rule patterns use bare type names as nodes ("A"), while
mixtures use typed instances ("A#1"). In mixtures every site is bound at
most once, which makes "free site" well defined.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

from .errors import (
    NotConnected,
    RenamingIncomplete,
    UnsupportedPattern,
)

PERMUTATION_CAP = 10 ** 6
DEFAULT_NODE_CAP = 64


def make_edge(node1, site1, node2, site2):
    return frozenset(((node1, site1), (node2, site2)))


def node_type(name: str) -> str:
    """Type of a node name; instances are written "Type#index"."""
    return name.split("#", 1)[0]


def instance_index(name: str) -> int:
    return int(name.split("#", 1)[1])


def instance_name(type_name: str, index: int) -> str:
    return f"{type_name}#{index}"


@dataclass(frozen=True)
class SiteGraph:
    """Nodes with site interfaces and site-to-site edges."""

    nodes: frozenset
    interface: dict  # node -> frozenset of site names
    edges: frozenset  # frozenset of frozenset({(node, site), (node', site')})

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "interface",
                           {v: frozenset(s) for v, s in self.interface.items()})
        object.__setattr__(self, "edges", frozenset(frozenset(e) for e in self.edges))
        if set(self.interface) != set(self.nodes):
            raise ValueError("interface must be defined exactly on the node set")
        for edge in self.edges:
            if len(edge) != 2:
                raise ValueError("an edge joins two distinct (node, site) endpoints")
            (v1, s1), (v2, s2) = sorted(edge)
            if v1 == v2:
                raise ValueError("edge endpoints must lie on distinct nodes")
            for v, s in ((v1, s1), (v2, s2)):
                if v not in self.nodes or s not in self.interface[v]:
                    raise ValueError(f"edge endpoint ({v}, {s}) outside the interface")

    def __hash__(self):
        return hash((self.nodes, frozenset(self.interface.items()), self.edges))

    def __eq__(self, other):
        return (isinstance(other, SiteGraph)
                and self.nodes == other.nodes
                and self.interface == other.interface
                and self.edges == other.edges)

    def bound_endpoints(self):
        return {endpoint for edge in self.edges for endpoint in edge}

    def is_free(self, node, site) -> bool:
        return (node, site) not in self.bound_endpoints()

    def neighbors(self, node):
        """(site, other node, other site) triples for edges incident to node."""
        out = []
        for edge in self.edges:
            pair = sorted(edge)
            for (v, s), (w, t) in (pair, pair[::-1]):
                if v == node:
                    out.append((s, w, t))
        return out


def empty_graph() -> SiteGraph:
    return SiteGraph(frozenset(), {}, frozenset())


@dataclass(frozen=True)
class ReactionMixture:
    """A site-graph over typed node instances with per-type counts."""

    graph: SiteGraph
    counts: dict = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "counts", dict(self.counts))
        expected = {instance_name(t, j)
                    for t, n in self.counts.items() for j in range(1, n + 1)}
        if expected != set(self.graph.nodes):
            raise ValueError("node instances do not match the counts")
        seen = set()
        for edge in self.graph.edges:
            for endpoint in edge:
                if endpoint in seen:
                    raise ValueError(f"site {endpoint} bound twice")
                seen.add(endpoint)

    def __hash__(self):
        return hash(self.graph)


def make_mixture(interface_by_type, counts, edges=()) -> ReactionMixture:
    """Mixture with counts[t] instances of each type t, all sharing the
    model-wide interface."""
    nodes = []
    interface = {}
    for t, n in counts.items():
        for j in range(1, n + 1):
            name = instance_name(t, j)
            nodes.append(name)
            interface[name] = frozenset(interface_by_type[t])
    graph = SiteGraph(frozenset(nodes), interface, frozenset(edges))
    return ReactionMixture(graph, counts)


def connected_components(g: SiteGraph):
    """Components under site-graph reachability.

    A path may pass through a node only by entering and leaving on distinct
    sites; for components this coincides with plain edge reachability, since
    any two edges at a node necessarily use distinct sites (each site binds
    at most one edge within a component's mixture, and even without that, a
    path of length one connects the endpoints directly).
    """
    remaining = set(g.nodes)
    components = []
    adjacency = {v: set() for v in g.nodes}
    for edge in g.edges:
        (v1, _), (v2, _) = sorted(edge)
        adjacency[v1].add(v2)
        adjacency[v2].add(v1)
    for start in sorted(remaining):
        if start not in remaining:
            continue
        seen = {start}
        queue = [start]
        while queue:
            v = queue.pop(0)
            for w in adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        remaining -= seen
        sub_edges = frozenset(e for e in g.edges
                              if all(v in seen for v, _ in e))
        components.append(SiteGraph(frozenset(seen),
                                    {v: g.interface[v] for v in seen},
                                    sub_edges))
    return components


def is_subgraph(h: SiteGraph, g: SiteGraph) -> bool:
    """Containment of nodes, per-node interfaces, and edges."""
    if not h.nodes <= g.nodes:
        return False
    if any(not h.interface[v] <= g.interface[v] for v in h.nodes):
        return False
    return h.edges <= g.edges


def rename(g: SiteGraph, eta: dict) -> SiteGraph:
    """Transport a site-graph through an injective node renaming."""
    missing = g.nodes - set(eta)
    if missing:
        raise RenamingIncomplete(f"no image for nodes {sorted(missing)}")
    if len({eta[v] for v in g.nodes}) != len(g.nodes):
        raise ValueError("renaming must be injective")
    nodes = frozenset(eta[v] for v in g.nodes)
    interface = {eta[v]: g.interface[v] for v in g.nodes}
    edges = frozenset(frozenset((eta[v], s) for v, s in edge) for edge in g.edges)
    return SiteGraph(nodes, interface, edges)


def find_embeddings(pattern: SiteGraph, mix: ReactionMixture):
    """All embeddings of a one-node-per-type pattern into a mixture.

    An embedding maps each pattern node to an instance of its type so that
    every pattern edge is present in the mixture and every pattern site not
    bound within the pattern is free in the mixture (a site mentioned by a
    rule without a bond is a tested-free site). Results are ordered by
    instance index, following the sorted pattern node order.
    """
    pattern_nodes = sorted(pattern.nodes)
    types = [node_type(v) for v in pattern_nodes]
    if len(set(types)) != len(types):
        raise UnsupportedPattern("pattern mentions two nodes of the same type")
    candidates = []
    for t in types:
        count = mix.counts.get(t, 0)
        candidates.append([instance_name(t, j) for j in range(1, count + 1)])
    bound_in_pattern = pattern.bound_endpoints()
    mix_bound = mix.graph.bound_endpoints()
    embeddings = []
    for images in itertools.product(*candidates):
        eta = dict(zip(pattern_nodes, images))
        ok = True
        for edge in pattern.edges:
            image = frozenset((eta[v], s) for v, s in edge)
            if image not in mix.graph.edges:
                ok = False
                break
        if ok:
            for v in pattern_nodes:
                for s in pattern.interface[v]:
                    if (v, s) not in bound_in_pattern and (eta[v], s) in mix_bound:
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            embeddings.append(eta)
    return embeddings


def canonical_key(component: SiteGraph, node_cap: int = DEFAULT_NODE_CAP) -> str:
    """Canonical encoding of a connected component, invariant under
    type-preserving renaming of instances.

    Minimizes a serialized form over all type-consistent relabelings;
    exhaustive but exact, intended for desk-scale components.
    """
    if len(component.nodes) > node_cap:
        raise ValueError(f"component exceeds the node cap of {node_cap}")
    if len(component.nodes) > 1 and len(connected_components(component)) != 1:
        raise NotConnected("canonical keys require a connected component")
    by_type = {}
    for v in sorted(component.nodes):
        by_type.setdefault(node_type(v), []).append(v)
    combos = 1
    for names in by_type.values():
        for k in range(2, len(names) + 1):
            combos *= k
        if combos > PERMUTATION_CAP:
            raise ValueError("too many relabelings for canonicalization")
    types = sorted(by_type)
    best = None
    for perms in itertools.product(*(itertools.permutations(by_type[t]) for t in types)):
        relabel = {}
        for t, perm in zip(types, perms):
            for k, v in enumerate(perm, start=1):
                relabel[v] = instance_name(t, k)
        edges = sorted(
            tuple(sorted((relabel[v], s) for v, s in edge)) for edge in component.edges
        )
        encoding = (tuple((t, len(by_type[t])) for t in types), tuple(edges))
        if best is None or encoding < best:
            best = encoding
    header = ",".join(f"{t}:{n}" for t, n in best[0])
    body = ";".join(f"{v1}.{s1}-{v2}.{s2}" for (v1, s1), (v2, s2) in best[1])
    return header + ("|" + body if body else "")


def species_census(mix: ReactionMixture) -> Counter:
    """Multiset of canonical keys of the mixture's connected components."""
    return Counter(canonical_key(c) for c in connected_components(mix.graph))
