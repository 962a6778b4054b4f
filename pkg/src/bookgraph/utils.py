#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
@desc: Shared errors, key=value config parsing and packed bitset helpers
"""

from pathlib import Path

import numpy as np

DEFAULT_PART_CAP = 2 ** 20
DEFAULT_PAIR_CAP = 2 ** 34
DEFAULT_LATTICE_CAP = 10 ** 9
DEFAULT_ORACLE_CAP = 10 ** 10

# 64-bit little-endian words, the on-disk layout as well
WORD = np.dtype('<u8')

_POPCOUNT8 = np.array([bin(i).count('1') for i in range(256)], dtype=np.uint8)


class BookgraphError(Exception):
    def __init__(self, message):
        self.message = message
        super().__init__(self.message)


class RejectedInput(BookgraphError):
    pass


class ResourceLimit(BookgraphError):
    def __init__(self, message, cap=None, requested=None):
        self.cap = cap
        self.requested = requested
        super().__init__(message)


class ParseError(BookgraphError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class InvariantFailure(BookgraphError):
    def __init__(self, invariant, message):
        self.invariant = invariant
        super().__init__(f'{invariant}: {message}')


def words_for(nbits: int) -> int:
    return (nbits + 63) // 64


def pack_rows(mask: np.ndarray) -> np.ndarray:
    '''
    Packs a boolean (n, m) matrix into (n, ceil(m/64)) little-endian words.
    Bit j of row i lives in word j // 64 at position j % 64.
    '''
    mask = np.asarray(mask, dtype=bool)
    n, m = mask.shape
    nwords = words_for(m)
    if nwords == 0:
        return np.zeros((n, 0), dtype=WORD)
    packed = np.packbits(mask, axis=1, bitorder='little')
    buf = np.zeros((n, nwords * 8), dtype=np.uint8)
    buf[:, :packed.shape[1]] = packed
    return buf.view(WORD)


def unpack_rows(rows: np.ndarray, nbits: int) -> np.ndarray:
    n = rows.shape[0]
    if nbits == 0 or rows.shape[1] == 0:
        return np.zeros((n, nbits), dtype=bool)
    raw = np.ascontiguousarray(rows, dtype=WORD).view(np.uint8)
    bits = np.unpackbits(raw, axis=1, bitorder='little')
    return bits[:, :nbits].astype(bool)


def popcount(words: np.ndarray) -> np.ndarray:
    '''
    Number of set bits along the last axis of a word array.
    '''
    words = np.ascontiguousarray(words, dtype=WORD)
    if words.shape[-1] == 0:
        return np.zeros(words.shape[:-1], dtype=np.int64)
    return _POPCOUNT8[words.view(np.uint8)].sum(axis=-1, dtype=np.int64)


# key=value config file -> click option names per subcommand
CONFIG_KEYS = {
    'r': 'r',
    'd': 'd',
    'symmetric': 'symmetric',
    'sparsify.mode': None,
    'sparsify.size': None,
    'sparsify.seed': 'seed',
    'blowup.m': 'blowup',
    'prune': 'prune',
    'threads': 'threads',
    'caps.part': 'part_cap',
    'caps.pairs': 'pair_cap',
    'caps.oracle': 'oracle_cap',
}


def read_config(path) -> dict:
    '''
    Reads a plain key=value file. Blank lines and # comments are ignored.
    Returns the raw string values keyed by config key.
    '''
    values = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ParseError(f'expected key=value, got "{raw.strip()}"', line=lineno)
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in CONFIG_KEYS:
            raise ParseError(f'unknown config key "{key}"', line=lineno)
        values[key] = value
    return values


def config_to_options(values: dict) -> dict:
    '''
    Translates config keys into click option names. sparsify.mode and
    sparsify.size collapse into the single "mode:size" sparsify option.
    '''
    options = {}
    for key, value in values.items():
        name = CONFIG_KEYS[key]
        if name is not None:
            options[name] = value
    mode = values.get('sparsify.mode')
    size = values.get('sparsify.size')
    if mode is not None:
        options['sparsify'] = mode if size is None else f'{mode}:{size}'
    elif size is not None:
        options['sparsify'] = f'random:{size}'
    return options


def parse_sparsify(text):
    '''
    Parses "none", "random", "greedy", "random:SIZE" or "greedy:SIZE".
    Returns (mode, size) with mode None for no sparsification and size None
    for the default target size.
    '''
    if text is None:
        return None, None
    text = text.strip().lower()
    if text in ('', 'none'):
        return None, None
    mode, _, size = text.partition(':')
    if mode not in ('random', 'greedy'):
        raise RejectedInput(f'unknown sparsify mode "{mode}", use random or greedy')
    if not size:
        return mode, None
    try:
        value = int(size)
    except ValueError:
        raise RejectedInput(f'sparsify size "{size}" is not an integer')
    if value < 1:
        raise RejectedInput('sparsify size must be at least 1')
    return mode, value
