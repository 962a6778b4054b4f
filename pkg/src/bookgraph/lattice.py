#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
@desc: Exact lattice geometry: squared distances, the two distance windows,
       ball volumes, lattice point counts and concentration bounds
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.special import gammaln

from bookgraph.utils import DEFAULT_LATTICE_CAP, RejectedInput, ResourceLimit

# ln of the largest finite double, rounded down
_LOG_FLOAT_MAX = 709.0
_SAMPLE_BLOCK = 4096


@dataclass(frozen=True)
class LatticePoint:
    coords: Tuple[int, ...]

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        if not coords:
            raise RejectedInput('a lattice point needs at least one coordinate')
        object.__setattr__(self, 'coords', coords)

    @property
    def d(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


@dataclass(frozen=True)
class ConstructionParams:
    '''
    Side length r and dimension d of the lattice construction. Window bounds
    are stored with denominators cleared: ab_window bounds 6*|a-b|^2 and
    c_window bounds 24*|c-a|^2, both around mu6 = 6*mu = (r^2-1)*d.
    '''
    r: int
    d: int
    coupled: bool = False
    mu6: int = field(init=False)
    ab_window: Tuple[int, int] = field(init=False)
    c_window: Tuple[int, int] = field(init=False)

    def __post_init__(self):
        if self.r < 1 or self.d < 1:
            raise RejectedInput(f'r and d must be positive, got r={self.r}, d={self.d}')
        if self.coupled and self.d != self.r ** 5:
            raise RejectedInput(f'coupled parameters need d = r^5, got r={self.r}, d={self.d}')
        mu6 = (self.r * self.r - 1) * self.d
        object.__setattr__(self, 'mu6', mu6)
        object.__setattr__(self, 'ab_window', (mu6 - 6 * self.d, mu6 + 6 * self.d))
        object.__setattr__(self, 'c_window', (mu6 - 48 * self.d, mu6 + 48 * self.d))

    @property
    def mu(self) -> Fraction:
        return Fraction(self.mu6, 6)

    @property
    def n(self) -> int:
        return self.r ** self.d

    @property
    def log_n(self) -> float:
        return self.d * math.log(self.r)

    def as_dict(self) -> dict:
        return {'r': self.r, 'd': self.d, 'coupled': self.coupled, 'mu6': self.mu6,
                'ab_window': list(self.ab_window), 'c_window': list(self.c_window)}


def squared_distance(u, v) -> int:
    u = u if isinstance(u, LatticePoint) else LatticePoint(tuple(u))
    v = v if isinstance(v, LatticePoint) else LatticePoint(tuple(v))
    if u.d != v.d:
        raise RejectedInput(f'dimension mismatch: {u.d} vs {v.d}')
    return sum((a - b) * (a - b) for a, b in zip(u.coords, v.coords))


def in_ab_window(dist2: int, params: ConstructionParams) -> bool:
    lo, hi = params.ab_window
    return lo <= 6 * dist2 <= hi


def in_c_window(dist2: int, params: ConstructionParams) -> bool:
    lo, hi = params.c_window
    return lo <= 24 * dist2 <= hi


def ab_window_mask(dist2: np.ndarray, params: ConstructionParams) -> np.ndarray:
    lo, hi = params.ab_window
    scaled = 6 * np.asarray(dist2, dtype=np.int64)
    return (scaled >= lo) & (scaled <= hi)


def c_window_mask(dist2: np.ndarray, params: ConstructionParams) -> np.ndarray:
    lo, hi = params.c_window
    scaled = 24 * np.asarray(dist2, dtype=np.int64)
    return (scaled >= lo) & (scaled <= hi)


def log_ball_volume_exact(d: int, radius: float) -> float:
    '''
    ln Vol(B_radius^(d)) = (d/2) ln(pi) + d ln(radius) - ln((d/2)!), d even.
    '''
    if d < 2 or d % 2:
        raise RejectedInput(f'exact ball volume is only provided for even d >= 2, got d={d}')
    if radius <= 0:
        raise RejectedInput('radius must be positive')
    half = d // 2
    return half * math.log(math.pi) + d * math.log(radius) - float(gammaln(half + 1))


def ball_volume_exact(d: int, radius: float) -> float:
    log_volume = log_ball_volume_exact(d, radius)
    if log_volume > _LOG_FLOAT_MAX:
        raise ResourceLimit(f'ball volume for d={d} overflows a double, use log_ball_volume_exact',
                            cap=_LOG_FLOAT_MAX, requested=log_volume)
    return math.exp(log_volume)


def log_ball_volume_upper(d: int, radius: float) -> float:
    '''
    ln of (2 pi e)^(d/2) * radius^d / d^(d/2).
    '''
    if d < 1:
        raise RejectedInput(f'dimension must be positive, got d={d}')
    if radius <= 0:
        raise RejectedInput('radius must be positive')
    return 0.5 * d * math.log(2 * math.pi * math.e) + d * math.log(radius) - 0.5 * d * math.log(d)


def ball_volume_upper(d: int, radius: float) -> float:
    log_volume = log_ball_volume_upper(d, radius)
    if log_volume > _LOG_FLOAT_MAX:
        raise ResourceLimit(f'ball volume bound for d={d} overflows a double, use log_ball_volume_upper',
                            cap=_LOG_FLOAT_MAX, requested=log_volume)
    return math.exp(log_volume)


@lru_cache(maxsize=None)
def _ball_count(budget: int, dims: int) -> int:
    if dims == 0 or budget == 0:
        return 1
    top = math.isqrt(budget)
    total = _ball_count(budget, dims - 1)
    for w in range(1, top + 1):
        total += 2 * _ball_count(budget - w * w, dims - 1)
    return total


def count_lattice_points_in_ball(d: int, radius_sq: int, cap: int = DEFAULT_LATTICE_CAP) -> int:
    '''
    Exact number of integer vectors w in Z^d with sum(w_i^2) <= radius_sq.
    Depth-first over coordinates, each level bounded by the squared budget
    left over; subproblems are memoized on (budget, remaining dims).
    '''
    if d < 1:
        raise RejectedInput(f'dimension must be positive, got d={d}')
    if radius_sq < 0:
        raise RejectedInput('radius_sq must be nonnegative')
    box = (2 * math.isqrt(radius_sq) + 1) ** d
    if box > cap:
        raise ResourceLimit(f'enumeration box {box} exceeds the lattice cap {cap}', cap=cap, requested=box)
    return _ball_count(int(radius_sq), int(d))


def hoeffding_tail(t: float, lip: float, n: int) -> float:
    return 2.0 * math.exp(-(t * t) / (2.0 * lip * lip * n))


def ab_edge_fraction_lower(r: int, d: int) -> float:
    '''
    Fraction of pairs in [r]^d x [r]^d guaranteed inside the A-B window.
    '''
    return 1.0 - hoeffding_tail(d, r * r, d)


def witness_fraction_lower(r: int, d: int) -> float:
    '''
    Fraction of the 2^d sign vectors guaranteed to give a triangle witness.
    '''
    return 1.0 - 2.0 * math.exp(-d / (15.0 * r * r))


def mean_squared_gap(r: int) -> Fraction:
    '''
    Exact E[(U - V)^2] for U, V independent and uniform on {1..r}.
    '''
    if r < 1:
        raise RejectedInput(f'r must be positive, got r={r}')
    total = sum((u - v) * (u - v) for u in range(1, r + 1) for v in range(1, r + 1))
    return Fraction(total, r * r)


def _block_generator(seed: int, block: int) -> np.random.Generator:
    key = seed % (1 << 128)
    return np.random.Generator(np.random.Philox(key=key, counter=block << 128))


def _sample_block(r: int, d: int, params: ConstructionParams, seed: int, block: int, size: int) -> int:
    rng = _block_generator(seed, block)
    u = rng.integers(1, r + 1, size=(size, d), dtype=np.int64)
    v = rng.integers(1, r + 1, size=(size, d), dtype=np.int64)
    dist2 = ((u - v) ** 2).sum(axis=1)
    return int((~ab_window_mask(dist2, params)).sum())


def sample_distance_concentration(r: int, d: int, trials: int, seed: int, threads: int = 1) -> float:
    '''
    Fraction of uniformly drawn pairs (U, V) on [r]^d whose squared distance
    falls outside mu +- d. Trials are cut into fixed blocks, each with its
    own Philox counter, so the result does not depend on the thread count.
    '''
    if trials < 1:
        raise RejectedInput('trials must be at least 1')
    params = ConstructionParams(r, d)
    blocks = [(k, min(_SAMPLE_BLOCK, trials - start))
              for k, start in enumerate(range(0, trials, _SAMPLE_BLOCK))]

    def run(job):
        k, size = job
        return _sample_block(r, d, params, seed, k, size)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outside = sum(pool.map(run, blocks))
    else:
        outside = sum(map(run, blocks))
    return outside / trials
