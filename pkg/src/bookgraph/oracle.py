#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
@desc: Naive ground truth for small graphs: triple-loop triangle listing on a
       networkx copy of the graph and a recheck of adjacency from coordinates
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Tuple

import networkx as nx

from bookgraph.graphcore import PAIRS, EdgeRef, TripartiteGraph
from bookgraph.lattice import ConstructionParams, in_ab_window, in_c_window
from bookgraph.utils import DEFAULT_ORACLE_CAP, RejectedInput, ResourceLimit


@dataclass
class TriangleList:
    triangles: List[Tuple[int, int, int]] = field(default_factory=list)
    counts: Dict[EdgeRef, int] = field(default_factory=dict)

    def __len__(self):
        return len(self.triangles)

    def is_consistent(self) -> bool:
        expected = Counter()
        for a, b, c in self.triangles:
            expected[EdgeRef('AB', a, b)] += 1
            expected[EdgeRef('BC', b, c)] += 1
            expected[EdgeRef('AC', a, c)] += 1
        positive = {e: v for e, v in self.counts.items() if v}
        return positive == dict(expected) and sum(self.counts.values()) == 3 * len(self.triangles)


class Discrepancy(NamedTuple):
    edge: EdgeRef
    stored: bool
    geometric: bool


def to_networkx(g: TripartiteGraph) -> nx.Graph:
    '''
    Vertices are (part, index) tuples. Edges are copied once from the stored
    adjacency; every later lookup goes through networkx.
    '''
    G = nx.Graph()
    for part, size in g.sizes.items():
        G.add_nodes_from(((part, i) for i in range(size)), part=part)
    for pair, (x, y, _) in PAIRS.items():
        G.add_edges_from(((x, int(i)), (y, int(j))) for i, j in g.edges(pair))
    return G


def brute_force_triangles(g: TripartiteGraph, cap: int = DEFAULT_ORACLE_CAP) -> TriangleList:
    nA, nB, nC = g.part_sizes
    work = nA * nB * nC
    if work > cap:
        raise ResourceLimit(f'oracle would scan {work} triples, above the cap {cap}', cap=cap, requested=work)
    G = to_networkx(g)
    out = TriangleList()
    for pair, (x, y, _) in PAIRS.items():
        for u, v in G.edges():
            if u[0] == y and v[0] == x:
                u, v = v, u
            if u[0] == x and v[0] == y:
                out.counts[EdgeRef(pair, u[1], v[1])] = 0
    for a in range(nA):
        for b in range(nB):
            if not G.has_edge(('A', a), ('B', b)):
                continue
            for c in range(nC):
                if G.has_edge(('A', a), ('C', c)) and G.has_edge(('B', b), ('C', c)):
                    out.triangles.append((a, b, c))
                    out.counts[EdgeRef('AB', a, b)] += 1
                    out.counts[EdgeRef('BC', b, c)] += 1
                    out.counts[EdgeRef('AC', a, c)] += 1
    out.triangles.sort()
    return out


def recheck_geometry(g: TripartiteGraph, params: ConstructionParams) -> List[Discrepancy]:
    '''
    Recomputes every potential edge from the coordinate tables and lists the
    pairs where the stored adjacency disagrees with the window rule.
    '''
    if g.coords is None:
        raise RejectedInput('geometry recheck needs coordinate tables')
    points = {part: [tuple(int(v) for v in row) for row in g.coords[part]] for part in g.sizes}
    found = []
    for pair, (x, y, _) in PAIRS.items():
        window = in_ab_window if pair == 'AB' else in_c_window
        stored = g.adjacency(pair)
        for i, p in enumerate(points[x]):
            for j, q in enumerate(points[y]):
                dist2 = sum((s - t) * (s - t) for s, t in zip(p, q))
                geometric = window(dist2, params)
                if bool(stored[i, j]) != geometric:
                    found.append(Discrepancy(EdgeRef(pair, i, j), bool(stored[i, j]), geometric))
    return found
