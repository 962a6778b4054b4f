#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Per-edge statistics, the w-identities, sign-vector witnesses and verdicts
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from bookgraph.analyze import (EXACT_WITNESS_MAX_D, BookReport, ab_frame, ac_frame, book_report,
                               epsilon_witness_count, identity_sweep, per_edge_counts,
                               theorem1_verdict, triangles_on_edge, verify_w_identity_ab,
                               verify_w_identity_ac)
from bookgraph.construct import PipelineResult, coupled_params, run_pipeline
from bookgraph.graphcore import EdgeRef, TripartiteGraph
from bookgraph.lattice import ConstructionParams
from bookgraph.oracle import brute_force_triangles
from bookgraph.utils import RejectedInput, ResourceLimit

VERDICT_NAMES = ['uncovered_edges_zero', 'booksize_at_most_15_pow_d', 'ab_edges_lower_bound',
                 'e_ab_losses', 'vertex_count_bound', 'density_bound']


def test_k222_report(k222):
    report = book_report(k222)
    assert report.triangles == 8
    assert report.booksize == 2
    assert report.min_count == 2
    assert report.uncovered == 0
    assert report.histogram == {2: 12}
    assert report.argmax == EdgeRef('AB', 0, 0)
    assert report.density_ratio == pytest.approx(12 / 9)


def test_single_triangle_report(single_triangle):
    report = book_report(single_triangle)
    assert report.N == 3
    assert report.triangles == 1
    assert report.density_ratio == pytest.approx(4 / 3)
    assert report.to_dict()['histogram'] == {'1': 3}


def test_uncovered_edges_counted(k222):
    k222.remove_edges([EdgeRef('AC', 0, 0), EdgeRef('AC', 0, 1)])
    report = book_report(k222)
    # A0-B edges lost their triangles, A0-C edges are gone
    assert report.uncovered == 2
    assert report.pair_histograms['AB'] == {0: 2, 2: 2}


def test_triangles_on_edge(k222):
    assert triangles_on_edge(k222, EdgeRef('BC', 1, 0)) == 2
    k222.remove_edges([EdgeRef('BC', 1, 0)])
    with pytest.raises(RejectedInput):
        triangles_on_edge(k222, EdgeRef('BC', 1, 0))


def test_per_edge_counts_shape(pre_r2_d2):
    counts = per_edge_counts(pre_r2_d2)
    edges, values = counts['AB']
    assert edges.shape == (16, 2)
    assert values.shape == (16,)
    assert (values > 0).all()


def test_w_identity_examples():
    holds, w2 = verify_w_identity_ac((0, 0), (1, 0), (2, 1))
    assert holds and w2 == 1
    holds, w2 = verify_w_identity_ab((1, 1), (2, 3), (2, 2))
    assert holds
    frame = ab_frame((1, 1), (2, 3), (2, 2))
    assert frame.x == (1, 2) and frame.w == (1, 0) and w2 == 1
    frame = ac_frame((0, 0), (1, 0), (2, 1))
    assert frame.y == (1, 0) and frame.w == (0, 1)


def test_w_identities_on_arbitrary_points():
    rng = np.random.default_rng(4)
    for _ in range(200):
        a, b, c = (tuple(int(v) for v in rng.integers(-5, 6, size=5)) for _ in range(3))
        assert verify_w_identity_ab(a, b, c)[0]
        assert verify_w_identity_ac(a, c, b)[0]


def test_identity_sweep_r2_d4(pre_r2_d4, params_r2_d4):
    triangles = brute_force_triangles(pre_r2_d4).triangles
    sweep = identity_sweep(pre_r2_d4, params_r2_d4, triangles)
    assert sweep.checked == len(triangles) > 0
    assert sweep.ok
    assert max(sweep.max_w_ab, sweep.max_w_ac) <= 36


def test_identity_sweep_needs_coords(single_triangle, params_r2_d2):
    with pytest.raises(RejectedInput):
        identity_sweep(single_triangle, params_r2_d2, [(0, 0, 0)])


def test_epsilon_witness_zero_gap():
    params = ConstructionParams(2, 3)
    witness = epsilon_witness_count((1, 1, 1), (1, 1, 1), params)
    assert witness.ab_window
    assert witness.count == 8 and witness.fraction == 1.0


def test_epsilon_witness_none_accepted():
    witness = epsilon_witness_count((1,), (3,), ConstructionParams(3, 1))
    assert witness.count == 0
    assert not witness.ab_window


def test_epsilon_witness_modes():
    params = ConstructionParams(2, 6)
    a, b = (1, 1, 1, 2, 2, 2), (2, 2, 1, 1, 1, 2)
    exact = epsilon_witness_count(a, b, params)
    sampled = epsilon_witness_count(a, b, params, mode='sampled', trials=4000, seed=1)
    assert exact.total == 64 and exact.exact
    assert sampled.count is None and sampled.total == 4000
    assert abs(sampled.fraction - exact.fraction) < 0.05
    with pytest.raises(RejectedInput):
        epsilon_witness_count(a, b, params, mode='all')
    big = ConstructionParams(2, EXACT_WITNESS_MAX_D + 1)
    ones = (1,) * (EXACT_WITNESS_MAX_D + 1)
    with pytest.raises(ResourceLimit):
        epsilon_witness_count(ones, ones, big)


def test_epsilon_witness_implication_r2_d8():
    params = ConstructionParams(2, 8)
    result = run_pipeline(params, prune=False)
    g = result.graph
    edges = g.edges('AB')
    rng = np.random.default_rng(0)
    for k in rng.choice(len(edges), size=100, replace=False):
        i, j = (int(v) for v in edges[k])
        # raises InvariantFailure on any witness outside a C window
        witness = epsilon_witness_count(g.point('A', i), g.point('B', j), params)
        assert witness.ab_window and witness.total == 256


def test_verdicts_r2_d8():
    params = ConstructionParams(2, 8)
    result = run_pipeline(params, sparsify_mode='random', sparsify_size=4096, seed=1)
    verdicts = theorem1_verdict(result)
    assert [v.name for v in verdicts] == VERDICT_NAMES
    by_name = {v.name: v for v in verdicts}
    assert by_name['uncovered_edges_zero'].passed
    assert by_name['booksize_at_most_15_pow_d'].passed
    assert by_name['booksize_at_most_15_pow_d'].bound == pytest.approx(8 * math.log(15))
    assert all(v.actual is not None for v in verdicts)


def test_verdicts_log_space_for_coupled_params():
    result = PipelineResult(graph=None, params=coupled_params(2))
    verdicts = theorem1_verdict(result)
    assert [v.name for v in verdicts] == VERDICT_NAMES + ['fifteen_pow_d_within_final_bound']
    by_name = {v.name: v for v in verdicts}
    assert by_name['booksize_at_most_15_pow_d'].passed is None
    assert by_name['booksize_at_most_15_pow_d'].actual is None
    final = by_name['fifteen_pow_d_within_final_bound']
    assert final.actual == pytest.approx(32 * math.log(15))
    assert final.passed == (final.actual < final.bound)
    assert all(math.isfinite(v.bound) for v in verdicts if v.bound is not None)
    assert {v.name for v in verdicts if v.log_space} >= {'booksize_at_most_15_pow_d', 'vertex_count_bound'}


def test_report_dict_keys(k222):
    doc = book_report(k222).to_dict()
    assert set(doc) >= {'booksize', 'argmax', 'uncovered', 'histogram', 'density_ratio', 'verdicts'}
    assert isinstance(book_report(k222), BookReport)


def test_e_ab_losses_without_prune_counts_uncovered():
    result = run_pipeline(ConstructionParams(4, 3), sparsify_mode='random', sparsify_size=1, prune=False)
    report = book_report(result.graph)
    losses = {v.name: v for v in theorem1_verdict(result, report)}['e_ab_losses']
    uncovered_ab = report.pair_histograms['AB'].get(0, 0)
    assert uncovered_ab > 0
    assert losses.actual == uncovered_ab
    assert losses.passed == (uncovered_ab <= losses.bound)


def test_e_ab_losses_with_prune_counts_removed():
    result = run_pipeline(ConstructionParams(4, 3), sparsify_mode='random', sparsify_size=1)
    losses = {v.name: v for v in theorem1_verdict(result)}['e_ab_losses']
    assert losses.actual == result.pruned_edges['AB'] > 0


def test_book_report_invariant_under_part_permutation(pre_r2_d4):
    rng = np.random.default_rng(11)
    perm = {p: rng.permutation(n) for p, n in zip('ABC', pre_r2_d4.part_sizes)}
    shuffled = TripartiteGraph(*pre_r2_d4.part_sizes)
    for pair in ('AB', 'BC', 'AC'):
        x, y = pair
        shuffled.set_adjacency(pair, pre_r2_d4.adjacency(pair)[perm[x]][:, perm[y]])
    before, after = book_report(pre_r2_d4), book_report(shuffled)
    assert after.booksize == before.booksize
    assert after.histogram == before.histogram
    assert after.pair_histograms == before.pair_histograms
    assert after.uncovered == before.uncovered
    assert after.triangles == before.triangles
    assert after.density_ratio == before.density_ratio


def test_epsilon_witness_count_matches_enumeration():
    params = ConstructionParams(2, 8)
    d = params.d
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = tuple(int(v) for v in rng.integers(1, 3, size=d))
        b = tuple(int(v) for v in rng.integers(1, 3, size=d))
        x = [bi - ai for ai, bi in zip(a, b)]
        delta = [Fraction(1, 2) if xi % 2 else Fraction(1) for xi in x]
        expected = sum(1 for eps in itertools.product((1, -1), repeat=d)
                       if abs(sum(xi * di * ei for xi, di, ei in zip(x, delta, eps))) <= Fraction(3 * d, 4))
        witness = epsilon_witness_count(a, b, params)
        assert witness.total == 256
        assert witness.count == expected


def test_epsilon_witness_frame():
    params = ConstructionParams(3, 6)
    a, b = (1, 2, 3, 1, 2, 3), (2, 2, 1, 3, 3, 1)
    witness = epsilon_witness_count(a, b, params)
    frame = witness.frame
    assert frame is not None
    assert frame.x == tuple(bi - ai for ai, bi in zip(a, b))
    assert frame.w_norm_sq == frame.delta2_sum
    assert 2 * abs(frame.cross) <= 3 * params.d
    c = tuple(ai + (xi + wi) // 2 for ai, xi, wi in zip(a, frame.x, frame.w))
    assert all((xi + wi) % 2 == 0 for xi, wi in zip(frame.x, frame.w))
    holds, w2 = verify_w_identity_ab(a, b, c)
    assert holds and w2 == frame.delta2_sum
    assert ab_frame(a, b, c).w == frame.w
    assert epsilon_witness_count((1,), (3,), ConstructionParams(3, 1)).frame is None
