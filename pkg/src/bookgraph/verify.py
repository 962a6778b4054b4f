#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
@desc: Bundled invariant checks run by the verify command. Hard checks fail
       the run; theorem verdicts are only reported.
"""

from dataclasses import dataclass
from typing import List

import numpy as np
import typer

from bookgraph.analyze import (EXACT_WITNESS_MAX_D, book_report, epsilon_witness_count,
                               identity_sweep, per_edge_counts, theorem1_verdict)
from bookgraph.construct import PipelineResult, prune_uncovered
from bookgraph.graphcore import PAIRS, EdgeRef
from bookgraph.oracle import brute_force_triangles, recheck_geometry
from bookgraph.utils import DEFAULT_ORACLE_CAP, InvariantFailure

PASS, FAIL, SKIPPED = 'pass', 'fail', 'skipped'


@dataclass
class CheckResult:
    name: str
    status: str
    detail: str = ''


class Verifier:

    def __init__(self, result: PipelineResult, epsilon_edges: int = 100, seed: int = 0,
                 oracle_cap: int = DEFAULT_ORACLE_CAP, threads: int = 1, verbose: bool = False):
        self.result = result
        self.graph = result.graph
        self.params = result.params
        self.epsilon_edges = epsilon_edges
        self.seed = seed
        self.oracle_cap = oracle_cap
        self.threads = threads
        self.verbose = verbose
        self.checks: List[CheckResult] = []
        self.verdicts = []
        self._oracle = None

    def _say(self, message):
        if self.verbose:
            typer.echo(typer.style(message, fg=typer.colors.GREEN))

    def _record(self, name, ok, detail=''):
        self.checks.append(CheckResult(name, PASS if ok else FAIL, detail))

    def _skip(self, name, detail):
        self.checks.append(CheckResult(name, SKIPPED, detail))

    def oracle(self):
        if self._oracle is None:
            self._oracle = brute_force_triangles(self.graph, cap=self.oracle_cap)
        return self._oracle

    def check_symmetry(self):
        self._record('adjacency_symmetry', self.graph.check_symmetry())

    def check_oracle_equivalence(self):
        truth = self.oracle()
        mismatches = 0
        for pair, (edges, values) in per_edge_counts(self.graph, threads=self.threads).items():
            for (i, j), value in zip(edges, values):
                if truth.counts.get(EdgeRef(pair, int(i), int(j))) != int(value):
                    mismatches += 1
        consistent = truth.is_consistent()
        self._record('oracle_equivalence', mismatches == 0 and consistent,
                     f'{len(truth)} triangles, {mismatches} per-edge mismatches')

    def check_geometry(self):
        if self.graph.coords is None or self.params is None:
            self._skip('recheck_geometry', 'graph has no coordinates or parameters')
            return
        found = recheck_geometry(self.graph, self.params)
        extra = [f for f in found if f.stored]
        missing = {pair: 0 for pair in PAIRS}
        for f in found:
            if not f.stored:
                missing[f.edge.pair] += 1
        expected = self.result.expected_missing()
        ok = not extra and missing == expected
        self._record('recheck_geometry', ok,
                     f'{len(extra)} stored edges outside their window, missing {missing}, expected {expected}')

    def check_identities(self):
        if self.graph.coords is None or self.params is None:
            self._skip('w_identities', 'graph has no coordinates or parameters')
            return
        sweep = identity_sweep(self.graph, self.params, self.oracle().triangles)
        self._record('w_identity_ab', not sweep.ab_failures,
                     f'{sweep.checked} triangles, largest sum w^2 = {sweep.max_w_ab}')
        self._record('w_identity_ac', not sweep.ac_failures,
                     f'{sweep.checked} triangles, largest sum w^2 = {sweep.max_w_ac}')
        self._record('w_norm_at_most_9d', not sweep.bound_violations,
                     f'{len(sweep.bound_violations)} triangles above {9 * self.params.d}')

    def check_epsilon_witnesses(self):
        if self.graph.coords is None or self.params is None:
            self._skip('epsilon_witness_implication', 'graph has no coordinates or parameters')
            return
        if self.params.d > EXACT_WITNESS_MAX_D:
            self._skip('epsilon_witness_implication', f'd > {EXACT_WITNESS_MAX_D}')
            return
        edges = self.graph.edges('AB')
        if not len(edges):
            self._skip('epsilon_witness_implication', 'no A-B edges')
            return
        rng = np.random.Generator(np.random.Philox(key=self.seed % (1 << 128)))
        take = min(self.epsilon_edges, len(edges))
        picked = np.sort(rng.choice(len(edges), size=take, replace=False))
        below = 0
        try:
            for k in picked:
                i, j = (int(v) for v in edges[k])
                witness = epsilon_witness_count(self.graph.point('A', i), self.graph.point('B', j), self.params)
                below += not witness.meets_lower_bound
        except InvariantFailure as e:
            self._record('epsilon_witness_implication', False, e.message)
            return
        self._record('epsilon_witness_implication', True,
                     f'{take} edges checked, {below} below the 2^d fraction bound (reported only)')

    def check_prune(self):
        g = self.graph
        once, removed = prune_uncovered(g, threads=self.threads)
        if self.result.pruned:
            self._record('prune_idempotence', sum(removed.values()) == 0, f'second pass removed {removed}')
            self._record('coverage_after_prune', book_report(g, threads=self.threads).uncovered == 0)
        else:
            twice, again = prune_uncovered(once, threads=self.threads)
            self._record('prune_idempotence', twice == once and sum(again.values()) == 0,
                         f'second pass removed {again}')
            self._skip('coverage_after_prune', 'pipeline ran without pruning')

        if self.result.pruned and self.result.unpruned is None:
            self._skip('triangle_preservation', 'unpruned graph not available')
            return
        before = self.result.unpruned if self.result.unpruned is not None else g
        after, _ = prune_uncovered(before, threads=self.threads)
        same = (brute_force_triangles(before, cap=self.oracle_cap).triangles
                == brute_force_triangles(after, cap=self.oracle_cap).triangles)
        self._record('triangle_preservation', same)

    def run(self) -> List[CheckResult]:
        self._say('Now checking adjacency symmetry...')
        self.check_symmetry()
        self._say('Now comparing bitset counts with the brute-force oracle...')
        self.check_oracle_equivalence()
        self._say('Now rechecking adjacency from coordinates...')
        self.check_geometry()
        self._say('Now sweeping the w-identities over every triangle...')
        self.check_identities()
        self._say('Now checking sign-vector witnesses...')
        self.check_epsilon_witnesses()
        self._say('Now checking pruning...')
        self.check_prune()
        if self.params is not None:
            self.verdicts = theorem1_verdict(self.result, book_report(self.graph, threads=self.threads))
        return self.checks

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if c.status == FAIL]
