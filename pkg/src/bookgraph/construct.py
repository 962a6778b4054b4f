#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
@desc: Builds the lattice pre-construction and applies sparsification of C,
       pruning of uncovered edges and the A/B blow-up
"""

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import typer

from bookgraph.graphcore import PAIRS, SparsifySpec, TripartiteGraph
from bookgraph.lattice import ConstructionParams, LatticePoint, ab_window_mask, c_window_mask
from bookgraph.utils import (DEFAULT_PAIR_CAP, DEFAULT_PART_CAP, RejectedInput, ResourceLimit,
                             popcount)

# rows of the distance block are chosen so that rows * |Q| stays near this
_BLOCK_CELLS = 1 << 22


@dataclass(frozen=True)
class BlowUpSpec:
    multiplicity: int

    def __post_init__(self):
        if self.multiplicity < 1:
            raise RejectedInput(f'blow-up multiplicity must be at least 1, got {self.multiplicity}')


@dataclass
class GreedySelection:
    '''
    C-vertices in the order the greedy cover picked them, the number of newly
    covered A-B edges for each pick, and the coverage totals at the end.
    '''
    picks: List[int]
    gains: List[int]
    covered: int
    coverable: int

    @property
    def indices(self) -> frozenset:
        return frozenset(self.picks)


@dataclass
class PipelineResult:
    graph: Optional[TripartiteGraph]
    params: Optional[ConstructionParams]
    symmetric: bool = False
    sparsify: Optional[SparsifySpec] = None
    blowup: Optional[BlowUpSpec] = None
    pruned_edges: Dict[str, int] = field(default_factory=lambda: {pair: 0 for pair in PAIRS})
    ab_edges_initial: Optional[int] = None
    pruned: bool = False
    greedy: Optional[GreedySelection] = None
    # graph as it stood right before pruning; kept in memory only
    unpruned: Optional[TripartiteGraph] = None

    @property
    def N(self) -> Optional[int]:
        if self.graph is None:
            return None
        return self.graph.num_vertices

    def expected_missing(self) -> Dict[str, int]:
        '''
        Geometric edges absent from the final graph: the pruned ones, each
        replicated by the blow-up.
        '''
        m = self.blowup.multiplicity if self.blowup else 1
        return {'AB': self.pruned_edges['AB'] * m * m,
                'BC': self.pruned_edges['BC'] * m,
                'AC': self.pruned_edges['AC'] * m}

    def metadata(self) -> dict:
        return {
            'params': None if self.params is None else self.params.as_dict(),
            'symmetric': self.symmetric,
            'sparsify': None if self.sparsify is None else self.sparsify.as_dict(),
            'blowup': None if self.blowup is None else self.blowup.multiplicity,
            'pruned': self.pruned,
            'pruned_edges': dict(self.pruned_edges),
            'ab_edges_initial': self.ab_edges_initial,
            'part_sizes': None if self.graph is None else list(self.graph.part_sizes),
            'N': self.N,
        }

    @classmethod
    def from_metadata(cls, graph: Optional[TripartiteGraph], meta: dict) -> 'PipelineResult':
        params = meta.get('params')
        sparsify = meta.get('sparsify')
        blowup = meta.get('blowup')
        pruned_edges = {pair: 0 for pair in PAIRS}
        pruned_edges.update(meta.get('pruned_edges') or {})
        return cls(graph=graph,
                   params=None if params is None else ConstructionParams(params['r'], params['d'],
                                                                         coupled=params.get('coupled', False)),
                   symmetric=meta.get('symmetric', False),
                   sparsify=None if sparsify is None else SparsifySpec(**sparsify),
                   blowup=None if blowup is None else BlowUpSpec(blowup),
                   pruned_edges=pruned_edges,
                   ab_edges_initial=meta.get('ab_edges_initial'),
                   pruned=meta.get('pruned', False))


def lattice_points(lo: int, hi: int, d: int) -> np.ndarray:
    '''
    All points of {lo..hi}^d as an (k^d, d) array in lexicographic order.
    '''
    side = hi - lo + 1
    if side <= 0:
        return np.zeros((0, d), dtype=np.int64)
    grid = np.indices((side,) * d, dtype=np.int64).reshape(d, -1).T
    return np.ascontiguousarray(grid + lo)


def _window_adjacency(P: np.ndarray, Q: np.ndarray, window, threads: int) -> np.ndarray:
    out = np.zeros((len(P), len(Q)), dtype=bool)
    if not len(P) or not len(Q):
        return out
    q_norms = (Q * Q).sum(axis=1)
    step = max(1, _BLOCK_CELLS // len(Q))

    def run(start):
        block = P[start:start + step]
        dist2 = (block * block).sum(axis=1)[:, None] + q_norms[None, :] - 2 * (block @ Q.T)
        out[start:start + step] = window(dist2)

    starts = range(0, len(P), step)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, starts))
    else:
        for start in starts:
            run(start)
    return out


def build_preconstruction(params: ConstructionParams, symmetric: bool = False,
                          part_cap: int = DEFAULT_PART_CAP, pair_cap: int = DEFAULT_PAIR_CAP,
                          threads: int = 1) -> TripartiteGraph:
    '''
    A = B = [r]^d and C = {0..r+1}^d (C = [r]^d when symmetric). Edges join
    A-B pairs inside the A-B window and A-C, B-C pairs inside the C window.
    '''
    r, d = params.r, params.d
    n = r ** d
    nC = r ** d if symmetric else (r + 2) ** d
    for label, size in (('A/B', n), ('C', nC)):
        if size > part_cap:
            raise ResourceLimit(f'part {label} would have {size} vertices, above the cap {part_cap}',
                                cap=part_cap, requested=size)
    pairs = n * n + 2 * n * nC
    if pairs > pair_cap:
        raise ResourceLimit(f'{pairs} candidate pairs exceed the pair cap {pair_cap}',
                            cap=pair_cap, requested=pairs)

    A = lattice_points(1, r, d)
    C = A.copy() if symmetric else lattice_points(0, r + 1, d)
    g = TripartiteGraph(n, n, nC, coords={'A': A, 'B': A.copy(), 'C': C})
    ab_window = lambda dist2: ab_window_mask(dist2, params)
    c_window = lambda dist2: c_window_mask(dist2, params)
    g.set_adjacency('AB', _window_adjacency(A, A, ab_window, threads))
    ac = _window_adjacency(A, C, c_window, threads)
    g.set_adjacency('AC', ac)
    # B and A carry the same points
    g.set_adjacency('BC', ac)
    return g


def coupled_params(r: int) -> ConstructionParams:
    if r < 2 or r % 2:
        raise RejectedInput(f'the coupled preset needs an even r >= 2, got r={r}')
    return ConstructionParams(r, r ** 5, coupled=True)


def asymptotic_dimension(log_n: float) -> float:
    '''
    5 log n / log log n, the leading-order dimension for n = r^d with d = r^5.
    '''
    return 5.0 * log_n / math.log(log_n)


def default_target_size(d: int, nC: int) -> int:
    return max(1, round(2.0 ** (-d / 2) * nC))


def sparsify_random(g: TripartiteGraph, spec: SparsifySpec) -> frozenset:
    spec.validate(g.sizes['C'])
    rng = np.random.Generator(np.random.Philox(key=spec.seed % (1 << 128)))
    chosen = rng.choice(g.sizes['C'], size=spec.target_size, replace=False)
    return frozenset(int(c) for c in chosen)


def _initial_gains(ac: np.ndarray, ab: np.ndarray, bc: np.ndarray) -> np.ndarray:
    # gain[c] = sum over a~c, b~c of [a~b]
    nC = ac.shape[1]
    gains = np.zeros(nC, dtype=np.int64)
    ab64 = ab.astype(np.int64)
    step = max(1, _BLOCK_CELLS // max(1, ab.shape[1]))
    for start in range(0, nC, step):
        ca = ac[:, start:start + step].T.astype(np.int64)
        reach = ca @ ab64
        gains[start:start + step] = (reach * bc[:, start:start + step].T).sum(axis=1, dtype=np.int64)
    return gains


def sparsify_greedy(g: TripartiteGraph, budget: int) -> GreedySelection:
    '''
    Greedy maximum coverage over A-B edges: each round takes the C-vertex
    completing the most still-uncovered A-B edges to a triangle, lowest
    index first on ties. Stops at the budget or when nothing is left to
    cover. Gains only shrink as coverage grows, so stale heap keys are upper
    bounds and a popped vertex is taken once its refreshed gain still tops
    the heap.
    '''
    if budget < 1:
        raise RejectedInput('greedy budget must be at least 1')
    ab = g.adjacency('AB')
    ac = g.adjacency('AC')
    bc = g.adjacency('BC')
    rows_cb = g.rows('C', 'B')
    uncovered = g.rows('A', 'B').copy()
    coverable = int(((g.triangle_counts('AB') > 0) & ab).sum())

    def gain(c):
        a_idx = np.flatnonzero(ac[:, c])
        if not a_idx.size:
            return 0
        return int(popcount(uncovered[a_idx] & rows_cb[c][None, :]).sum())

    heap = [(-int(v), c) for c, v in enumerate(_initial_gains(ac, ab, bc))]
    heapq.heapify(heap)
    picks, gains = [], []
    while heap and len(picks) < budget:
        key, c = heapq.heappop(heap)
        fresh = gain(c)
        if fresh != -key:
            heapq.heappush(heap, (-fresh, c))
            continue
        if fresh == 0:
            break
        a_idx = np.flatnonzero(ac[:, c])
        uncovered[a_idx] &= ~rows_cb[c][None, :]
        picks.append(c)
        gains.append(fresh)
    return GreedySelection(picks=picks, gains=gains, covered=sum(gains), coverable=coverable)


def prune_uncovered(g: TripartiteGraph, threads: int = 1):
    '''
    Deletes every edge lying in no triangle, in one pass over the counts of
    the input graph. Returns the new graph and the removals per pair.
    '''
    pruned = g.copy()
    removed = {}
    for pair in PAIRS:
        adjacency = g.adjacency(pair)
        keep = adjacency & (g.triangle_counts(pair, threads=threads) > 0)
        removed[pair] = int(adjacency.sum() - keep.sum())
        pruned.set_adjacency(pair, keep)
    return pruned, removed


def blow_up(g: TripartiteGraph, spec: BlowUpSpec) -> TripartiteGraph:
    '''
    Copy k of vertex v in A or B gets index v * m + k. Copies inherit every
    edge of the original; C is left alone.
    '''
    m = spec.multiplicity
    coords = None
    if g.coords is not None:
        coords = {'A': np.repeat(g.coords['A'], m, axis=0),
                  'B': np.repeat(g.coords['B'], m, axis=0),
                  'C': g.coords['C'].copy()}
    out = TripartiteGraph(g.sizes['A'] * m, g.sizes['B'] * m, g.sizes['C'], coords=coords)
    out.set_adjacency('AB', np.kron(g.adjacency('AB'), np.ones((m, m), dtype=bool)))
    out.set_adjacency('AC', np.repeat(g.adjacency('AC'), m, axis=0))
    out.set_adjacency('BC', np.repeat(g.adjacency('BC'), m, axis=0))
    return out


def rounded_midpoint_witness(a, b, params: ConstructionParams, symmetric: bool = False) -> LatticePoint:
    '''
    Rounds the midpoint of a and b to a lattice point. Even gaps keep the
    exact midpoint; odd gaps move half a step, with the sign chosen so the
    running sum of x_i * delta_i * eps_i stays closest to zero. Works in
    doubled coordinates, where the midpoint is a + b.
    '''
    a = a if isinstance(a, LatticePoint) else LatticePoint(tuple(a))
    b = b if isinstance(b, LatticePoint) else LatticePoint(tuple(b))
    if a.d != b.d:
        raise RejectedInput(f'dimension mismatch: {a.d} vs {b.d}')
    lo, hi = (1, params.r) if symmetric else (0, params.r + 1)
    cross = 0
    coords = []
    for ai, bi in zip(a, b):
        x = bi - ai
        doubled = ai + bi
        if x % 2:
            eps = -1 if cross * x > 0 else 1
            cross += x * eps
            doubled += eps
        coords.append(min(max(doubled // 2, lo), hi))
    return LatticePoint(tuple(coords))


class Pipeline:

    def __init__(self, params: ConstructionParams, symmetric: bool = False,
                 sparsify_mode: Optional[str] = None, sparsify_size: Optional[int] = None,
                 seed: int = 0, prune: bool = True, blowup: Optional[int] = None,
                 threads: int = 1, part_cap: int = DEFAULT_PART_CAP, pair_cap: int = DEFAULT_PAIR_CAP,
                 verbose: bool = False):
        self.params = params
        self.symmetric = symmetric
        self.sparsify_mode = sparsify_mode
        self.sparsify_size = sparsify_size
        self.seed = seed
        self.prune = prune
        self.blowup = BlowUpSpec(blowup) if blowup is not None else None
        self.threads = threads
        self.part_cap = part_cap
        self.pair_cap = pair_cap
        self.verbose = verbose

    def _say(self, message):
        if self.verbose:
            typer.echo(typer.style(message, fg=typer.colors.GREEN))

    def run(self) -> PipelineResult:
        r, d = self.params.r, self.params.d
        self._say(f'Now building the pre-construction for r={r}, d={d}...')
        g = build_preconstruction(self.params, symmetric=self.symmetric, part_cap=self.part_cap,
                                  pair_cap=self.pair_cap, threads=self.threads)
        result = PipelineResult(graph=g, params=self.params, symmetric=self.symmetric,
                                blowup=self.blowup, ab_edges_initial=g.edge_count('AB'))

        if self.sparsify_mode is not None:
            size = self.sparsify_size or default_target_size(d, g.sizes['C'])
            spec = SparsifySpec(self.sparsify_mode, size, self.seed)
            spec.validate(g.sizes['C'])
            self._say(f'Now sparsifying C ({spec.mode}) from {g.sizes["C"]} to {size} vertices...')
            if spec.mode == 'random':
                keep = sparsify_random(g, spec)
            else:
                result.greedy = sparsify_greedy(g, size)
                keep = result.greedy.indices
            g = g.restrict_C(keep)
            result.sparsify = spec

        if self.prune:
            self._say('Now pruning edges outside every triangle...')
            result.unpruned = g
            result.pruned = True
            g, result.pruned_edges = prune_uncovered(g, threads=self.threads)

        if self.blowup is not None:
            self._say(f'Now blowing up A and B by {self.blowup.multiplicity}...')
            g = blow_up(g, self.blowup)

        result.graph = g
        return result


def run_pipeline(params: ConstructionParams, **options) -> PipelineResult:
    return Pipeline(params, **options).run()
