from __future__ import annotations

from pathlib import Path

import pytest

from kcn.graph import WeightedGraph

DATA = Path(__file__).parent / "data"


@pytest.fixture
def path3() -> WeightedGraph:
    """a - b - c with unit weights."""
    return WeightedGraph.from_edges([("a", "b", 1), ("b", "c", 1)])


@pytest.fixture
def cycle4() -> WeightedGraph:
    return WeightedGraph.from_edges(
        [("a", "b", 1), ("b", "c", 1), ("c", "d", 1), ("d", "a", 1)]
    )


@pytest.fixture
def star4() -> WeightedGraph:
    """Hub h with three unit-weight leaves."""
    return WeightedGraph.from_edges(
        [("h", "l1", 1), ("h", "l2", 1), ("h", "l3", 1)]
    )


@pytest.fixture
def unit_triangle() -> WeightedGraph:
    return WeightedGraph.from_edges(
        [("a", "b", 1), ("b", "c", 1), ("a", "c", 1)]
    )


@pytest.fixture
def weighted_triangle() -> WeightedGraph:
    """Triangle with weights 2, 1, 1 seen from node v."""
    return WeightedGraph.from_edges(
        [("v", "j", 2), ("v", "h", 1), ("j", "h", 1)]
    )


@pytest.fixture
def two_triangles() -> WeightedGraph:
    """Two unit triangles joined by the single bridge c - d."""
    return WeightedGraph.from_edges(
        [
            ("a", "b", 1),
            ("b", "c", 1),
            ("a", "c", 1),
            ("c", "d", 1),
            ("d", "e", 1),
            ("e", "f", 1),
            ("d", "f", 1),
        ]
    )
