#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
@desc: Report documents (JSON, CSV, text), pipeline metadata sidecars and
       TSV edge export
"""

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import pandas as pd

from bookgraph import __version__
from bookgraph.analyze import BookReport
from bookgraph.graphcore import PAIRS, TripartiteGraph
from bookgraph.utils import ParseError

REPORT_SCHEMA = 'bookgraph.book_report/1'
META_SCHEMA = 'bookgraph.pipeline/1'
META_SUFFIX = '.meta.json'
HISTOGRAM_COLUMNS = ['pair', 'triangles', 'edges', 'r', 'd', 'seed', 'version']


def _stamp() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def meta_path(graph_path) -> Path:
    graph_path = Path(graph_path)
    return graph_path.with_name(graph_path.name + META_SUFFIX)


def metadata_document(metadata: dict, seed: Optional[int]) -> dict:
    doc = {'schema': META_SCHEMA, 'tool': 'bookgraph', 'version': __version__,
           'generated_at': _stamp(), 'seed': seed}
    doc.update(metadata)
    return doc


def read_metadata(graph_path) -> Optional[dict]:
    path = meta_path(graph_path)
    if not path.exists():
        return None
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f'metadata {path.name}: {e.msg}', line=e.lineno)


def report_document(report: BookReport, meta: Optional[dict] = None, seed: Optional[int] = None) -> dict:
    doc = {'schema': REPORT_SCHEMA, 'tool': 'bookgraph', 'version': __version__,
           'generated_at': _stamp(), 'seed': seed,
           'params': None if meta is None else meta.get('params')}
    doc.update(report.to_dict())
    return doc


def dumps_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + '\n'


def _run_params(meta: Optional[dict]):
    params = None if meta is None else meta.get('params')
    if not params:
        return None, None
    return params.get('r'), params.get('d')


def histogram_frame(report: BookReport, meta: Optional[dict] = None, seed: Optional[int] = None) -> pd.DataFrame:
    '''
    One row per (pair, triangle count). Every row also carries the run it
    came from: r, d, seed and the tool version.
    '''
    r, d = _run_params(meta)
    rows = [(pair, count, edges, r, d, seed, __version__)
            for pair, hist in report.pair_histograms.items()
            for count, edges in sorted(hist.items())]
    return pd.DataFrame.from_records(rows, columns=HISTOGRAM_COLUMNS)


def report_text(report: BookReport, meta: Optional[dict] = None, seed: Optional[int] = None) -> str:
    r, d = _run_params(meta)
    lines = [
        f'bookgraph        {__version__}',
        f'seed             {seed}',
        'params           none' if r is None else f'params           r={r} d={d}',
        f'vertices         {report.N}',
        f'edges            {report.num_edges} ' + ' '.join(f'{p}={report.edge_counts[p]}' for p in PAIRS),
        f'triangles        {report.triangles}',
        f'booksize         {report.booksize}' + ('' if report.argmax is None else
                                                  ' at {} {} {}'.format(*report.argmax)),
        f'min count        {report.min_count}',
        f'uncovered edges  {report.uncovered}',
        f'density ratio    {report.density_ratio:.6f}',
    ]
    for v in report.verdicts:
        status = 'n/a' if v.passed is None else ('pass' if v.passed else 'fail')
        lines.append(f'verdict {v.name:<28} {status:<5} actual={v.actual} bound={v.bound}')
    return '\n'.join(lines) + '\n'


def write_report(report: BookReport, path, fmt: str = 'json', meta: Optional[dict] = None,
                 seed: Optional[int] = None):
    path = Path(path)
    if fmt == 'json':
        path.write_text(dumps_json(report_document(report, meta=meta, seed=seed)))
    elif fmt == 'csv':
        histogram_frame(report, meta=meta, seed=seed).to_csv(path, index=False)
    else:
        path.write_text(report_text(report, meta=meta, seed=seed))


def edges_frame(g: TripartiteGraph) -> pd.DataFrame:
    '''
    One row per edge, vertices named "<part>:<index>", the layout networkx
    reads with from_pandas_edgelist(source="entry1", target="entry2").
    '''
    frames = []
    for pair, (x, y, _) in PAIRS.items():
        edges = g.edges(pair)
        frames.append(pd.DataFrame({'entry1': [f'{x}:{i}' for i in edges[:, 0]],
                                    'entry2': [f'{y}:{j}' for j in edges[:, 1]],
                                    'pair': [pair] * len(edges)}))
    return pd.concat(frames, ignore_index=True)


def export_tsv(g: TripartiteGraph, path):
    edges_frame(g).to_csv(path, sep='\t', index=False)
