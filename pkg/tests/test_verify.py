#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
The bundled checks of the verify command
"""

from bookgraph.construct import PipelineResult, run_pipeline
from bookgraph.graphcore import EdgeRef
from bookgraph.lattice import ConstructionParams
from bookgraph.verify import FAIL, PASS, SKIPPED, Verifier


def _statuses(verifier):
    return {c.name: c.status for c in verifier.checks}


def test_full_pipeline_passes():
    result = run_pipeline(ConstructionParams(2, 4), sparsify_mode='random', seed=3, blowup=2)
    verifier = Verifier(result, epsilon_edges=50, seed=3)
    verifier.run()
    assert verifier.failures == []
    statuses = _statuses(verifier)
    assert statuses['recheck_geometry'] == PASS
    assert statuses['coverage_after_prune'] == PASS
    assert statuses['epsilon_witness_implication'] == PASS
    assert len(verifier.verdicts) == 6


def test_unpruned_graph_passes(pre_r2_d2, params_r2_d2):
    verifier = Verifier(PipelineResult(graph=pre_r2_d2.copy(), params=params_r2_d2))
    verifier.run()
    assert verifier.failures == []
    assert _statuses(verifier)['coverage_after_prune'] == SKIPPED


def test_injected_fault_fails_geometry(pre_r2_d2, params_r2_d2):
    g = pre_r2_d2.copy()
    g.add_edge(EdgeRef('AC', 0, 15))
    verifier = Verifier(PipelineResult(graph=g, params=params_r2_d2))
    verifier.run()
    assert [c.name for c in verifier.failures] == ['recheck_geometry']


def test_graph_without_coords(k222):
    verifier = Verifier(PipelineResult(graph=k222, params=None))
    verifier.run()
    statuses = _statuses(verifier)
    assert statuses['oracle_equivalence'] == PASS
    assert statuses['w_identities'] == SKIPPED
    assert statuses['recheck_geometry'] == SKIPPED
    assert statuses['epsilon_witness_implication'] == SKIPPED
    assert verifier.failures == []
    assert verifier.verdicts == []


def test_asymmetric_rows_fail(k222):
    k222._rows[('B', 'A')][0, 0] = 0
    verifier = Verifier(PipelineResult(graph=k222, params=None))
    verifier.run()
    assert _statuses(verifier)['adjacency_symmetry'] == FAIL


def test_preservation_skipped_without_unpruned_graph():
    result = run_pipeline(ConstructionParams(2, 4), sparsify_mode='random', seed=3)
    reloaded = PipelineResult.from_metadata(result.graph.copy(), result.metadata())
    assert reloaded.pruned and reloaded.unpruned is None
    verifier = Verifier(reloaded, epsilon_edges=20, seed=3)
    verifier.run()
    statuses = _statuses(verifier)
    assert statuses['triangle_preservation'] == SKIPPED
    assert statuses['coverage_after_prune'] == PASS

    direct = Verifier(result, epsilon_edges=20, seed=3)
    direct.run()
    assert _statuses(direct)['triangle_preservation'] == PASS
