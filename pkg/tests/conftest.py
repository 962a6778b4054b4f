#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Shared graphs and parameter sets for the test modules
"""

import numpy as np
import pytest

from bookgraph.construct import build_preconstruction
from bookgraph.graphcore import EdgeRef, TripartiteGraph
from bookgraph.lattice import ConstructionParams


@pytest.fixture
def single_triangle():
    g = TripartiteGraph(1, 1, 1)
    g.add_edge(EdgeRef('AB', 0, 0))
    g.add_edge(EdgeRef('BC', 0, 0))
    g.add_edge(EdgeRef('AC', 0, 0))
    return g


@pytest.fixture
def k222():
    g = TripartiteGraph(2, 2, 2)
    for pair in ('AB', 'BC', 'AC'):
        g.set_adjacency(pair, np.ones((2, 2), dtype=bool))
    return g


@pytest.fixture(scope='session')
def params_r2_d2():
    return ConstructionParams(2, 2)


@pytest.fixture(scope='session')
def params_r2_d4():
    return ConstructionParams(2, 4)


@pytest.fixture(scope='session')
def pre_r2_d2(params_r2_d2):
    return build_preconstruction(params_r2_d2)


@pytest.fixture(scope='session')
def pre_r2_d4(params_r2_d4):
    return build_preconstruction(params_r2_d4)
