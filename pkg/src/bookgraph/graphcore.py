#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
@desc: Tripartite graph with cross-part bitset adjacency, edge edits,
       restriction of C and the text / binary graph formats
"""

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, NamedTuple, Optional

import numpy as np

from bookgraph.lattice import LatticePoint
from bookgraph.utils import (DEFAULT_PART_CAP, WORD, ParseError, RejectedInput, ResourceLimit, pack_rows, popcount,
                             unpack_rows, words_for)

PARTS = ('A', 'B', 'C')
# pair -> (first part, second part, third part)
PAIRS = {
    'AB': ('A', 'B', 'C'),
    'BC': ('B', 'C', 'A'),
    'AC': ('A', 'C', 'B'),
}

BINARY_MAGIC = b'BOOKGRF\x00'
BINARY_VERSION = 1
_HEADER = struct.Struct('<8sII4Q')


class EdgeRef(NamedTuple):
    pair: str
    i: int
    j: int


@dataclass(frozen=True)
class SparsifySpec:
    mode: str
    target_size: int
    seed: int = 0

    def validate(self, nC: int):
        if self.mode not in ('random', 'greedy'):
            raise RejectedInput(f'unknown sparsify mode "{self.mode}"')
        if not 1 <= self.target_size <= nC:
            raise RejectedInput(f'target size {self.target_size} must lie in [1, {nC}]')

    def as_dict(self) -> dict:
        return {'mode': self.mode, 'target_size': self.target_size, 'seed': self.seed}


class TripartiteGraph:
    '''
    Three vertex parts A, B, C indexed densely from 0. For every ordered pair
    of distinct parts (X, Y) the graph stores one bitset row per X-vertex
    marking its Y-neighbours; both directions are kept in step so that common
    neighbourhoods are a single AND of two rows.
    '''

    def __init__(self, nA: int, nB: int, nC: int, coords: Optional[Dict[str, np.ndarray]] = None):
        sizes = (int(nA), int(nB), int(nC))
        if min(sizes) < 0:
            raise RejectedInput(f'part sizes must be nonnegative, got {sizes}')
        self.sizes = dict(zip(PARTS, sizes))
        self.coords = _check_coords(self.sizes, coords)
        self._rows = {}
        for x in PARTS:
            for y in PARTS:
                if x != y:
                    self._rows[(x, y)] = np.zeros((self.sizes[x], words_for(self.sizes[y])), dtype=WORD)

    @property
    def part_sizes(self):
        return tuple(self.sizes[p] for p in PARTS)

    @property
    def num_vertices(self) -> int:
        return sum(self.part_sizes)

    @property
    def dimension(self) -> Optional[int]:
        if self.coords is None:
            return None
        return int(self.coords['A'].shape[1])

    def rows(self, src: str, dst: str) -> np.ndarray:
        return self._rows[(src, dst)]

    def point(self, part: str, i: int) -> LatticePoint:
        if self.coords is None:
            raise RejectedInput('graph has no coordinate tables')
        return LatticePoint(tuple(int(v) for v in self.coords[part][i]))

    def _locate(self, e: EdgeRef):
        if e.pair not in PAIRS:
            raise RejectedInput(f'unknown pair "{e.pair}"')
        x, y, _ = PAIRS[e.pair]
        if not (0 <= e.i < self.sizes[x] and 0 <= e.j < self.sizes[y]):
            raise RejectedInput(f'edge {tuple(e)} out of range for part sizes {self.part_sizes}')
        return x, y

    def _set(self, src, dst, i, j, value: bool):
        word, bit = divmod(j, 64)
        mask = np.uint64(1) << np.uint64(bit)
        row = self._rows[(src, dst)]
        if value:
            row[i, word] |= mask
        else:
            row[i, word] &= ~mask

    def has_edge(self, e: EdgeRef) -> bool:
        x, y = self._locate(e)
        word, bit = divmod(e.j, 64)
        return bool((int(self._rows[(x, y)][e.i, word]) >> bit) & 1)

    def add_edge(self, e: EdgeRef):
        x, y = self._locate(e)
        self._set(x, y, e.i, e.j, True)
        self._set(y, x, e.j, e.i, True)

    def remove_edges(self, edges) -> int:
        removed = 0
        for e in edges:
            e = EdgeRef(*e)
            if self.has_edge(e):
                x, y = self._locate(e)
                self._set(x, y, e.i, e.j, False)
                self._set(y, x, e.j, e.i, False)
                removed += 1
        return removed

    def adjacency(self, pair: str) -> np.ndarray:
        x, y, _ = PAIRS[pair]
        return unpack_rows(self._rows[(x, y)], self.sizes[y])

    def set_adjacency(self, pair: str, mask: np.ndarray):
        x, y, _ = PAIRS[pair]
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.sizes[x], self.sizes[y]):
            raise RejectedInput(f'{pair} mask has shape {mask.shape}, expected {(self.sizes[x], self.sizes[y])}')
        self._rows[(x, y)] = pack_rows(mask)
        self._rows[(y, x)] = pack_rows(mask.T)

    def set_edges(self, pair: str, ii, jj):
        '''
        Adds the edges (ii[k], jj[k]) of a pair straight into the bit rows,
        without building a dense matrix. Indices must already be in range.
        '''
        x, y, _ = PAIRS[pair]
        ii = np.asarray(ii, dtype=np.int64)
        jj = np.asarray(jj, dtype=np.int64)
        for src, dst, rows_idx, cols in ((x, y, ii, jj), (y, x, jj, ii)):
            if not cols.size:
                continue
            bits = np.left_shift(np.uint64(1), (cols % 64).astype(np.uint64))
            np.bitwise_or.at(self._rows[(src, dst)], (rows_idx, cols // 64), bits)

    def edge_count(self, pair: str) -> int:
        x, y, _ = PAIRS[pair]
        return int(popcount(self._rows[(x, y)]).sum())

    def edge_counts(self) -> Dict[str, int]:
        return {pair: self.edge_count(pair) for pair in PAIRS}

    def num_edges(self) -> int:
        return sum(self.edge_counts().values())

    def edges(self, pair: str) -> np.ndarray:
        '''
        All edges of a pair as an (m, 2) index array in row-major order.
        '''
        return np.argwhere(self.adjacency(pair))

    def triangle_counts(self, pair: str, threads: int = 1, chunk: int = 64) -> np.ndarray:
        '''
        counts[i, j] = number of third-part vertices adjacent to both i and j,
        for every edge (i, j) of the pair; zero where (i, j) is not an edge.
        '''
        x, y, z = PAIRS[pair]
        rows_xz = self._rows[(x, z)]
        rows_yz = self._rows[(y, z)]
        adjacency = self.adjacency(pair)
        counts = np.zeros((self.sizes[x], self.sizes[y]), dtype=np.int32)

        def run(start):
            for i in range(start, min(start + chunk, self.sizes[x])):
                hits = np.flatnonzero(adjacency[i])
                if hits.size:
                    counts[i, hits] = popcount(rows_xz[i][None, :] & rows_yz[hits])

        starts = range(0, self.sizes[x], chunk)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(run, starts))
        else:
            for start in starts:
                run(start)
        return counts

    def check_symmetry(self) -> bool:
        for pair, (x, y, _) in PAIRS.items():
            forward = unpack_rows(self._rows[(x, y)], self.sizes[y])
            backward = unpack_rows(self._rows[(y, x)], self.sizes[x])
            if not np.array_equal(forward, backward.T):
                return False
        return True

    def copy(self) -> 'TripartiteGraph':
        coords = None if self.coords is None else {p: c.copy() for p, c in self.coords.items()}
        g = TripartiteGraph(*self.part_sizes, coords=coords)
        g._rows = {key: rows.copy() for key, rows in self._rows.items()}
        return g

    def restrict_C(self, keep) -> 'TripartiteGraph':
        idx = np.array(sorted(set(int(c) for c in keep)), dtype=np.int64)
        if idx.size and (idx[0] < 0 or idx[-1] >= self.sizes['C']):
            raise RejectedInput(f'C indices must lie in [0, {self.sizes["C"]})')
        coords = None
        if self.coords is not None:
            coords = {'A': self.coords['A'].copy(), 'B': self.coords['B'].copy(),
                      'C': self.coords['C'][idx].copy()}
        g = TripartiteGraph(self.sizes['A'], self.sizes['B'], idx.size, coords=coords)
        g.set_adjacency('AB', self.adjacency('AB'))
        g.set_adjacency('BC', self.adjacency('BC')[:, idx])
        g.set_adjacency('AC', self.adjacency('AC')[:, idx])
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, TripartiteGraph) or self.part_sizes != other.part_sizes:
            return False
        if (self.coords is None) != (other.coords is None):
            return False
        if self.coords is not None:
            if any(not np.array_equal(self.coords[p], other.coords[p]) for p in PARTS):
                return False
        return all(np.array_equal(self._rows[key], other._rows[key]) for key in self._rows)

    def __repr__(self):
        counts = self.edge_counts()
        return f'TripartiteGraph(sizes={self.part_sizes}, edges={counts})'


def _check_coords(sizes, coords):
    if coords is None:
        return None
    missing = [p for p in PARTS if p not in coords]
    if missing:
        raise RejectedInput(f'coordinate tables missing for parts {missing}')
    tables = {}
    dims = set()
    for part in PARTS:
        table = np.asarray(coords[part], dtype=np.int64)
        if table.ndim != 2:
            raise RejectedInput(f'coordinate table for part {part} must be two-dimensional')
        if table.shape[0] != sizes[part]:
            raise RejectedInput(f'part {part} has {sizes[part]} vertices but {table.shape[0]} coordinate rows')
        dims.add(table.shape[1])
        tables[part] = table
    if len(dims) > 1:
        raise RejectedInput(f'coordinate tables disagree on dimension: {sorted(dims)}')
    return tables


def _allocate(sizes, coords, line=None) -> TripartiteGraph:
    try:
        return TripartiteGraph(*sizes, coords=coords)
    except RejectedInput as e:
        raise ParseError(e.message, line=line)
    except MemoryError:
        raise ResourceLimit(f'not enough memory for a graph with part sizes {tuple(sizes)}')


def new_tripartite(nA: int, nB: int, nC: int, coords=None) -> TripartiteGraph:
    return TripartiteGraph(nA, nB, nC, coords=coords)


def dumps_text(g: TripartiteGraph) -> str:
    lines = ['tripartite {} {} {}'.format(*g.part_sizes)]
    if g.coords is not None:
        d = g.dimension
        for part in PARTS:
            lines.append(f'coords {part} {d}')
            lines.extend(' '.join(str(int(v)) for v in row) for row in g.coords[part])
    for pair in PAIRS:
        lines.extend(f'{pair} {i} {j}' for i, j in g.edges(pair))
    return '\n'.join(lines) + '\n'


def loads_text(text: str) -> TripartiteGraph:
    lines = text.splitlines()
    if not lines:
        raise ParseError('empty graph file', line=1)
    header = lines[0].split()
    if len(header) != 4 or header[0] != 'tripartite':
        raise ParseError('expected header "tripartite nA nB nC"', line=1)
    try:
        sizes = [int(v) for v in header[1:]]
    except ValueError:
        raise ParseError('part sizes must be integers', line=1)
    if min(sizes) < 0:
        raise ParseError('part sizes must be nonnegative', line=1)
    if max(sizes) > DEFAULT_PART_CAP:
        raise ParseError(f'part sizes {sizes} exceed the cap {DEFAULT_PART_CAP}', line=1)
    sizes_by_part = dict(zip(PARTS, sizes))

    coords = {}
    edges = {pair: ([], []) for pair in PAIRS}
    pos = 1
    while pos < len(lines):
        lineno = pos + 1
        fields = lines[pos].split()
        pos += 1
        if not fields:
            continue
        if fields[0] == 'coords':
            if len(fields) != 3 or fields[1] not in PARTS:
                raise ParseError('expected "coords <part> <d>"', line=lineno)
            part = fields[1]
            try:
                d = int(fields[2])
            except ValueError:
                raise ParseError('dimension must be an integer', line=lineno)
            if d < 1:
                raise ParseError(f'dimension must be positive, got {d}', line=lineno)
            table = []
            for k in range(sizes_by_part[part]):
                if pos >= len(lines):
                    raise ParseError(f'coordinate block for {part} ends early', line=pos + 1)
                try:
                    row = [int(v) for v in lines[pos].split()]
                except ValueError:
                    raise ParseError('coordinates must be integers', line=pos + 1)
                if len(row) != d:
                    raise ParseError(f'expected {d} coordinates, got {len(row)}', line=pos + 1)
                table.append(row)
                pos += 1
            coords[part] = np.array(table, dtype=np.int64).reshape(sizes_by_part[part], d)
        elif fields[0] in PAIRS:
            if len(fields) != 3:
                raise ParseError('expected "<pair> <i> <j>"', line=lineno)
            x, y, _ = PAIRS[fields[0]]
            try:
                i, j = int(fields[1]), int(fields[2])
            except ValueError:
                raise ParseError('edge indices must be integers', line=lineno)
            if not (0 <= i < sizes_by_part[x] and 0 <= j < sizes_by_part[y]):
                raise ParseError(f'edge {fields[0]} {i} {j} out of range', line=lineno)
            edges[fields[0]][0].append(i)
            edges[fields[0]][1].append(j)
        else:
            raise ParseError(f'unexpected record "{fields[0]}"', line=lineno)

    if coords and len(coords) != len(PARTS):
        raise ParseError('coordinate blocks must cover all three parts', line=len(lines))
    g = _allocate(sizes, coords or None, line=len(lines))
    for pair, (ii, jj) in edges.items():
        g.set_edges(pair, ii, jj)
    return g


def dumps_binary(g: TripartiteGraph) -> bytes:
    has_coords = g.coords is not None
    d = g.dimension or 0
    chunks = [_HEADER.pack(BINARY_MAGIC, BINARY_VERSION, int(has_coords), *g.part_sizes, d)]
    if has_coords:
        chunks.extend(g.coords[p].astype('<i8').tobytes() for p in PARTS)
    for pair, (x, y, _) in PAIRS.items():
        chunks.append(g.rows(x, y).astype(WORD).tobytes())
    return b''.join(chunks)


def loads_binary(data: bytes) -> TripartiteGraph:
    if len(data) < _HEADER.size:
        raise ParseError('binary graph shorter than its header')
    magic, version, flags, nA, nB, nC, d = _HEADER.unpack_from(data, 0)
    if magic != BINARY_MAGIC:
        raise ParseError('bad magic in binary graph')
    if version != BINARY_VERSION:
        raise ParseError(f'unsupported binary graph version {version}')
    sizes = {'A': nA, 'B': nB, 'C': nC}
    if max(sizes.values()) > DEFAULT_PART_CAP:
        raise ParseError(f'part sizes {(nA, nB, nC)} exceed the cap {DEFAULT_PART_CAP}')
    if flags & 1 and d < 1:
        raise ParseError('binary graph has coordinates of dimension 0')
    # the payload length is fixed by the header; check it before allocating anything
    expected = _HEADER.size + sum(sizes[x] * words_for(sizes[y]) * 8 for x, y, _ in PAIRS.values())
    if flags & 1:
        expected += (nA + nB + nC) * d * 8
    if len(data) < expected:
        raise ParseError(f'binary graph truncated: header promises {expected} bytes, got {len(data)}')
    if len(data) > expected:
        raise ParseError(f'{len(data) - expected} trailing bytes after binary graph')
    offset = _HEADER.size

    def take(count, dtype):
        nonlocal offset
        if count == 0:
            return np.zeros(0, dtype=dtype)
        block = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
        offset += count * 8
        return block

    coords = None
    if flags & 1:
        coords = {p: take(sizes[p] * d, '<i8').reshape(sizes[p], d).astype(np.int64) for p in PARTS}
    g = _allocate((nA, nB, nC), coords)
    for pair, (x, y, _) in PAIRS.items():
        nwords = words_for(sizes[y])
        rows = take(sizes[x] * nwords, WORD).reshape(sizes[x], nwords)
        g.set_adjacency(pair, unpack_rows(rows, sizes[y]))
    return g


def save_graph(g: TripartiteGraph, path, binary: bool = False):
    path = Path(path)
    if binary:
        path.write_bytes(dumps_binary(g))
    else:
        path.write_text(dumps_text(g))


def load_graph(path) -> TripartiteGraph:
    data = Path(path).read_bytes()
    if data.startswith(BINARY_MAGIC):
        return loads_binary(data)
    try:
        text = data.decode('utf-8')
    except UnicodeDecodeError:
        raise ParseError('graph file is neither text nor a binary graph')
    return loads_text(text)
