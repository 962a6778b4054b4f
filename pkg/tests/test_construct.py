#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Pre-construction, sparsification, pruning, blow-up and the pipeline
"""

import math

import numpy as np
import pytest

from bookgraph.analyze import book_report
from bookgraph.construct import (BlowUpSpec, Pipeline, PipelineResult, _initial_gains, asymptotic_dimension,
                                 blow_up, build_preconstruction, coupled_params, default_target_size,
                                 lattice_points, prune_uncovered, rounded_midpoint_witness,
                                 run_pipeline, sparsify_greedy, sparsify_random)
from bookgraph.graphcore import EdgeRef, SparsifySpec, TripartiteGraph
from bookgraph.lattice import ConstructionParams, LatticePoint, in_ab_window, in_c_window, squared_distance
from bookgraph.utils import RejectedInput, ResourceLimit


def test_lattice_points_order():
    assert lattice_points(1, 2, 2).tolist() == [[1, 1], [1, 2], [2, 1], [2, 2]]
    assert lattice_points(0, 3, 3).shape == (64, 3)
    assert lattice_points(2, 1, 3).shape == (0, 3)


def test_preconstruction_r2_d2(pre_r2_d2):
    assert pre_r2_d2.part_sizes == (4, 4, 16)
    assert pre_r2_d2.edge_count('AB') == 16
    assert int(pre_r2_d2.adjacency('AC')[0].sum()) == 11
    assert np.array_equal(pre_r2_d2.adjacency('AC'), pre_r2_d2.adjacency('BC'))
    assert pre_r2_d2.check_symmetry()


def test_preconstruction_r2_d4(pre_r2_d4):
    assert pre_r2_d4.part_sizes == (16, 16, 256)
    assert pre_r2_d4.dimension == 4


def test_preconstruction_symmetric(params_r2_d2):
    g = build_preconstruction(params_r2_d2, symmetric=True)
    assert g.part_sizes == (4, 4, 4)
    assert np.array_equal(g.coords['C'], g.coords['A'])


def test_preconstruction_threads(params_r2_d4, pre_r2_d4):
    assert build_preconstruction(params_r2_d4, threads=8) == pre_r2_d4


def test_preconstruction_caps():
    with pytest.raises(ResourceLimit) as info:
        build_preconstruction(ConstructionParams(3, 40))
    assert info.value.requested > info.value.cap
    with pytest.raises(ResourceLimit):
        build_preconstruction(ConstructionParams(2, 4), pair_cap=1000)


def test_coupled_preset():
    params = coupled_params(2)
    assert (params.r, params.d, params.coupled) == (2, 32, True)
    assert params.log_n == pytest.approx(32 * math.log(2))
    with pytest.raises(RejectedInput):
        coupled_params(3)
    log_n = 10.0
    assert asymptotic_dimension(log_n) == pytest.approx(50 / math.log(10))


def test_default_target_size():
    assert default_target_size(8, 4 ** 8) == 4096
    assert default_target_size(4, 256) == 64
    assert default_target_size(60, 10) == 1


def test_sparsify_random(pre_r2_d4):
    spec = SparsifySpec('random', 64, seed=11)
    keep = sparsify_random(pre_r2_d4, spec)
    assert len(keep) == 64
    assert all(0 <= c < 256 for c in keep)
    assert sparsify_random(pre_r2_d4, spec) == keep
    with pytest.raises(RejectedInput):
        sparsify_random(pre_r2_d4, SparsifySpec('random', 257))


def _cover_instance():
    # C0 covers ab(0,0), C1 covers both A-B edges, C2 covers ab(0,1)
    g = TripartiteGraph(1, 2, 3)
    g.set_adjacency('AB', [[True, True]])
    g.set_adjacency('AC', [[True, True, True]])
    g.set_adjacency('BC', [[True, True, False], [False, True, True]])
    return g


def test_sparsify_greedy_picks_best():
    sel = sparsify_greedy(_cover_instance(), 3)
    assert sel.picks == [1]
    assert sel.gains == [2]
    assert sel.covered == sel.coverable == 2


def test_sparsify_greedy_ties_take_lowest_index():
    g = _cover_instance()
    g.remove_edges([EdgeRef('BC', 0, 1), EdgeRef('BC', 1, 1)])
    sel = sparsify_greedy(g, 3)
    assert sel.picks == [0, 2]
    assert sparsify_greedy(g, 1).picks == [0]


def test_sparsify_greedy_on_lattice(pre_r2_d2):
    sel = sparsify_greedy(pre_r2_d2, 16)
    assert len(set(sel.picks)) == len(sel.picks)
    assert sel.gains == sorted(sel.gains, reverse=True)
    assert sum(sel.gains) == sel.covered == sel.coverable == 16
    with pytest.raises(RejectedInput):
        sparsify_greedy(pre_r2_d2, 0)


def test_sparsify_greedy_matches_recount(pre_r2_d4):
    sel = sparsify_greedy(pre_r2_d4, 8)
    ab = pre_r2_d4.adjacency('AB')
    ac = pre_r2_d4.adjacency('AC')
    bc = pre_r2_d4.adjacency('BC')
    covered = np.zeros_like(ab)
    for k, c in enumerate(sel.picks):
        completes = ab & np.outer(ac[:, c], bc[:, c])
        best = max(int((ab & np.outer(ac[:, o], bc[:, o]) & ~covered).sum())
                   for o in range(ac.shape[1]) if o not in sel.picks[:k])
        assert sel.gains[k] == int((completes & ~covered).sum()) == best
        covered |= completes
        kept = pre_r2_d4.restrict_C(sel.picks[:k + 1])
        assert int((kept.triangle_counts('AB') > 0).sum()) == sum(sel.gains[:k + 1]) == int(covered.sum())


def test_initial_gains_are_exact(pre_r2_d4):
    ab = pre_r2_d4.adjacency('AB')
    ac = pre_r2_d4.adjacency('AC')
    bc = pre_r2_d4.adjacency('BC')
    expected = [int((ab & np.outer(ac[:, c], bc[:, c])).sum()) for c in range(ac.shape[1])]
    gains = _initial_gains(ac, ab, bc)
    assert gains.dtype == np.int64
    assert gains.tolist() == expected


def test_prune_removes_uncovered():
    g = TripartiteGraph(2, 1, 1)
    for e in (('AB', 0, 0), ('BC', 0, 0), ('AC', 0, 0), ('AB', 1, 0)):
        g.add_edge(EdgeRef(*e))
    pruned, removed = prune_uncovered(g)
    assert removed == {'AB': 1, 'BC': 0, 'AC': 0}
    assert not pruned.has_edge(EdgeRef('AB', 1, 0))
    assert g.has_edge(EdgeRef('AB', 1, 0))
    again, removed = prune_uncovered(pruned)
    assert again == pruned and sum(removed.values()) == 0


def test_blow_up_arithmetic(pre_r2_d4):
    m = 3
    big = blow_up(pre_r2_d4, BlowUpSpec(m))
    assert big.part_sizes == (48, 48, 256)
    ab, ab_big = pre_r2_d4.triangle_counts('AB'), big.triangle_counts('AB')
    ac, ac_big = pre_r2_d4.triangle_counts('AC'), big.triangle_counts('AC')
    bc, bc_big = pre_r2_d4.triangle_counts('BC'), big.triangle_counts('BC')
    for a in range(16):
        for k in range(m):
            assert np.array_equal(ab_big[a * m + k], np.repeat(ab[a], m))
            assert np.array_equal(ac_big[a * m + k], m * ac[a])
            assert np.array_equal(bc_big[a * m + k], m * bc[a])
    assert big.coords['A'][5].tolist() == pre_r2_d4.coords['A'][1].tolist()
    with pytest.raises(RejectedInput):
        BlowUpSpec(0)
    with pytest.raises(RejectedInput):
        Pipeline(ConstructionParams(2, 2), blowup=0)


def test_blow_up_single_triangle(single_triangle):
    big = blow_up(single_triangle, BlowUpSpec(2))
    report = book_report(big)
    assert report.pair_histograms['AB'] == {1: 4}
    assert report.pair_histograms['AC'] == {2: 2}
    assert report.pair_histograms['BC'] == {2: 2}


def test_rounded_midpoint_witness():
    params = ConstructionParams(3, 2)
    assert rounded_midpoint_witness((1, 1), (2, 3), params) == LatticePoint((2, 2))
    assert rounded_midpoint_witness((1, 1), (3, 3), params) == LatticePoint((2, 2))
    # the second odd gap takes the opposite sign
    assert rounded_midpoint_witness((1, 1), (2, 2), params) == LatticePoint((2, 1))
    with pytest.raises(RejectedInput):
        rounded_midpoint_witness((1,), (1, 2), params)


def test_rounded_midpoint_clamps_to_c():
    params = ConstructionParams(2, 1)
    assert rounded_midpoint_witness((2,), (3,), params) == LatticePoint((3,))
    assert rounded_midpoint_witness((2,), (3,), params, symmetric=True) == LatticePoint((2,))
    assert rounded_midpoint_witness((0,), (-1,), params) == LatticePoint((0,))
    assert rounded_midpoint_witness((0,), (-1,), params, symmetric=True) == LatticePoint((1,))


@pytest.mark.parametrize('r, d', [(3, 3), (4, 3), (3, 4)])
def test_rounded_midpoint_lands_in_both_c_windows(r, d):
    params = ConstructionParams(r, d)
    points = lattice_points(1, r, d)
    checked = 0
    for a in points:
        for b in points:
            if not in_ab_window(squared_distance(a, b), params):
                continue
            c = rounded_midpoint_witness(a, b, params)
            # doubled offset 2c - (a + b) is the sign on odd gaps and 0 elsewhere
            offset = [2 * ci - ai - bi for ci, ai, bi in zip(c, a, b)]
            assert all(abs(e) == (bi - ai) % 2 for e, ai, bi in zip(offset, a, b))
            cross = sum((bi - ai) * e for e, ai, bi in zip(offset, a, b))
            assert abs(cross) <= r - 1
            assert in_c_window(squared_distance(c, a), params)
            assert in_c_window(squared_distance(c, b), params)
            checked += 1
    assert checked > 0


def test_pipeline_r2_d4_prune_and_blowup(params_r2_d4):
    result = Pipeline(params_r2_d4, sparsify_mode='random', seed=5, blowup=2).run()
    assert result.sparsify == SparsifySpec('random', 64, 5)
    assert result.pruned and result.unpruned is not None
    assert result.graph.part_sizes == (32, 32, 64)
    assert result.ab_edges_initial == build_preconstruction(params_r2_d4).edge_count('AB')
    expected = result.expected_missing()
    assert expected['AB'] == 4 * result.pruned_edges['AB']
    assert expected['AC'] == 2 * result.pruned_edges['AC']
    assert book_report(result.graph).uncovered == 0


def test_pipeline_greedy(params_r2_d4):
    result = run_pipeline(params_r2_d4, sparsify_mode='greedy', sparsify_size=8)
    assert len(result.greedy.picks) <= 8
    assert result.graph.sizes['C'] == len(result.greedy.picks)


def test_pipeline_is_deterministic(params_r2_d4):
    one = run_pipeline(params_r2_d4, sparsify_mode='random', seed=9, threads=1)
    many = run_pipeline(params_r2_d4, sparsify_mode='random', seed=9, threads=8)
    assert one.graph == many.graph
    assert one.metadata() == many.metadata()


def test_metadata_round_trip(params_r2_d4):
    result = run_pipeline(params_r2_d4, sparsify_mode='random', seed=2, blowup=3)
    back = PipelineResult.from_metadata(result.graph, result.metadata())
    assert back.params == result.params
    assert back.sparsify == result.sparsify
    assert back.blowup == result.blowup
    assert back.pruned_edges == result.pruned_edges
    assert back.expected_missing() == result.expected_missing()


def test_pipeline_r2_d8_coverage_after_prune():
    params = ConstructionParams(2, 8)
    result = run_pipeline(params, sparsify_mode='random', sparsify_size=4096, seed=1)
    assert result.graph.sizes['C'] == 4096
    assert book_report(result.graph).uncovered == 0
    _, removed = prune_uncovered(result.graph)
    assert sum(removed.values()) == 0
