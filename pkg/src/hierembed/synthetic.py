"""Synthetic balanced-tree fixtures for desk-scale training and evaluation.

A balanced tree of given depth and branching plays the role of a ground
truth hierarchy: nodes are their own labels, direct edges are the training
pairs, and the ancestor relation is the dataset-wide entailment oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from hierembed.hierarchy import EntailmentPair, HierarchyTree


@dataclass
class SyntheticTree:
    """Balanced entailment tree with per-node depth tags."""

    graph: nx.DiGraph
    root: str

    @property
    def nodes(self) -> list[str]:
        return sorted(self.graph.nodes)

    def direct_pairs(self, kind: str = "box_to_box") -> list[EntailmentPair]:
        return [EntailmentPair(u, v, kind) for u, v in sorted(self.graph.edges)]

    def closure_pairs(self, kind: str = "box_to_box") -> list[EntailmentPair]:
        closure = nx.transitive_closure(self.graph)
        return [EntailmentPair(u, v, kind) for u, v in sorted(closure.edges)]

    def oracle(self):
        """Ancestor-relation oracle (transitive, dataset-wide)."""
        closure = nx.transitive_closure(self.graph)
        edges = set(closure.edges)

        def _oracle(parent: str, child: str) -> bool:
            return (parent, child) in edges

        return _oracle

    def descendants(self, node: str) -> set[str]:
        return nx.descendants(self.graph, node)

    def as_hierarchy_tree(self) -> HierarchyTree:
        """Label-level tree where every node is its own label."""
        g = nx.DiGraph()
        for u, v in self.graph.edges:
            g.add_edge(u, v, frequency=1, proportion=1.0)
        return HierarchyTree(graph=g)

    def depth_groups(self) -> dict[str, str]:
        depth = nx.shortest_path_length(self.graph, self.root)
        return {n: f"depth{depth[n]}" for n in self.graph.nodes}


def balanced_tree(depth: int = 3, branching: int = 3) -> SyntheticTree:
    """Balanced tree with `depth` levels below the root (40 nodes at 3/3)."""
    g = nx.DiGraph()
    root = "n0"
    g.add_node(root)
    frontier = [root]
    counter = 1
    for _ in range(depth):
        next_frontier = []
        for parent in frontier:
            for _ in range(branching):
                child = f"n{counter}"
                counter += 1
                g.add_edge(parent, child)
                next_frontier.append(child)
        frontier = next_frontier
    return SyntheticTree(graph=g, root=root)
