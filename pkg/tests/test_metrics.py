import math
from itertools import product

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hhs.errors import DisconnectedGraphError, StructuralError
from hhs.fixtures import cycle_graph, grid_graph, path_graph, random_graph, tree_graph
from hhs.metrics import (WeightedGraph, all_pairs_distances, closest_point_projection, coarse_components,
                         coarse_intersection, coarse_intersection_diameter, convex_hull, four_point_delta,
                         gromov_product, neighborhood, quasiconvexity_constant, set_diameter, set_distance)

from .strategies import connected_graphs


def nx_graph(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    for u, v, w in g.edges:
        if not G.has_edge(u, v) or G[u][v]["weight"] > w:
            G.add_edge(u, v, weight=w)
    return G


def brute_delta(d):
    n = d.shape[0]
    best = 0.0
    for w in range(n):
        g = 0.5 * (d[:, [w]] + d[[w], :] - d)
        for x, y, z in product(range(n), repeat=3):
            best = max(best, min(g[x, y], g[y, z]) - g[x, z])
    return best


# values below come from an itertools brute force over networkx distances
@pytest.mark.parametrize("g, expected", [
    (grid_graph(3), 2.0),
    (cycle_graph(5), 0.5),
    (cycle_graph(6), 1.0),
    (path_graph(9), 0.0),
    (tree_graph(2, 3), 0.0),
])
def test_delta_known_values(g, expected):
    assert four_point_delta(g.distances()).delta == pytest.approx(expected)


def test_grid_delta_grows_linearly():
    assert [four_point_delta(grid_graph(n).distances()).delta for n in range(2, 6)] == [1.0, 2.0, 3.0, 4.0]


def test_small_graphs_are_degenerate():
    res = four_point_delta(path_graph(3).distances())
    assert res.delta == 0.0 and res.degenerate


def test_sampled_delta_is_labelled_lower_bound():
    d = grid_graph(6).distances()
    res = four_point_delta(d, exhaustive_limit=10, samples=20000, seed=3)
    assert not res.exact and res.to_dict()["lower_bound"]
    assert res.delta <= 5.0 + 1e-9
    again = four_point_delta(d, exhaustive_limit=10, samples=20000, seed=3)
    assert again.delta == res.delta and again.argmax == res.argmax


def test_workers_do_not_change_result():
    d = random_graph(25, 4).distances()
    one = four_point_delta(d, workers=1)
    four = four_point_delta(d, workers=4)
    assert one.delta == four.delta and one.argmax == four.argmax


@given(connected_graphs(max_n=9, weighted=True))
def test_delta_matches_brute_force(g):
    d = g.distances()
    assert four_point_delta(d).delta == pytest.approx(brute_delta(d), abs=1e-9)


@given(connected_graphs(max_n=14, weighted=True))
def test_distances_match_networkx(g):
    d = all_pairs_distances(g)
    ref = dict(nx.all_pairs_dijkstra_path_length(nx_graph(g)))
    for u in range(g.n):
        for v in range(g.n):
            assert d[u, v] == pytest.approx(ref[u][v])


@given(connected_graphs(min_n=3, max_n=10), st.data())
def test_gromov_product_bounds(g, data):
    d = g.distances()
    x, y, z = (data.draw(st.integers(0, g.n - 1)) for _ in range(3))
    p = gromov_product(d, x, y, z)
    assert 0 <= p <= min(d[x, z], d[y, z]) + 1e-9
    assert p == pytest.approx(gromov_product(d, y, x, z))


def test_disconnected_graph_names_vertices():
    g = WeightedGraph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    with pytest.raises(DisconnectedGraphError) as err:
        all_pairs_distances(g)
    assert "0" in str(err.value) and "2" in str(err.value)


@pytest.mark.parametrize("edges", [[(0, 0, 1.0)], [(0, 1, 0.0)], [(0, 5, 1.0)], [(0, 1, -2.0)]])
def test_bad_edges_are_structural(edges):
    with pytest.raises(StructuralError):
        WeightedGraph(2, edges)


def test_parallel_edges_keep_shortest():
    g = WeightedGraph(2, [(0, 1, 3.0), (1, 0, 1.5)])
    assert g.distances()[0, 1] == 1.5


def test_closest_point_projection_slack():
    d = path_graph(10).distances()
    assert closest_point_projection(d, [2, 3, 4, 8], 0) == [2, 3]
    assert closest_point_projection(d, [5], 0) == [5]
    with pytest.raises(ValueError):
        closest_point_projection(d, [], 0)


def test_quasiconvexity_modes_differ_on_cycle():
    g = cycle_graph(8)
    d = g.distances()
    Y = [0, 4]
    # opposite points: some geodesic runs along either half, both leave Y by 2
    assert quasiconvexity_constant(g, d, Y) == 2.0
    assert quasiconvexity_constant(g, d, Y, strict=True) == 2.0
    g2 = grid_graph(3)
    d2 = g2.distances()
    corners = [0, 2, 6]
    # along the boundary edges a geodesic stays within 1
    assert quasiconvexity_constant(g2, d2, corners) == 1.0
    assert quasiconvexity_constant(g2, d2, [0, 8], strict=True) == 2.0
    assert quasiconvexity_constant(g2, d2, [0, 8]) == 2.0


def test_convex_hull_of_grid_corners_is_everything():
    g = grid_graph(3)
    assert convex_hull(g, g.distances(), [0, 8]) == list(range(9))
    assert convex_hull(g, g.distances(), [0, 2]) == [0, 1, 2]


def test_set_helpers():
    d = path_graph(6).distances()
    assert set_distance(d, [0, 1], [4, 5]) == 3.0
    assert set_diameter(d, [1, 4]) == 3.0
    assert set_diameter(d, []) == 0.0
    assert neighborhood(d, [0], 2) == [0, 1, 2]


def test_coarse_intersection_of_grid_rows():
    g = grid_graph(5)
    d = g.distances()
    rows = [list(range(5 * r, 5 * r + 5)) for r in range(5)]
    assert coarse_intersection(d, rows[0], rows[2], 0).empty
    assert coarse_intersection_diameter(d, rows[0], rows[2], 0) is None
    # 1-neighbourhoods of rows 0 and 1 share rows 0 and 1
    ci = coarse_intersection(d, rows[0], rows[1], 1)
    assert sorted(ci.vertices) == rows[0] + rows[1]
    assert ci.diameter == 5.0


def test_coarse_components():
    d = path_graph(10).distances()
    assert coarse_components(d, [0, 1, 2, 6, 7], 1) == [[0, 1, 2], [6, 7]]
    assert coarse_components(d, [0, 1, 2, 6, 7], 4) == [[0, 1, 2, 6, 7]]


@given(connected_graphs(min_n=2, max_n=10), st.data())
def test_projection_points_are_near_optimal(g, data):
    d = g.distances()
    Y = data.draw(st.lists(st.integers(0, g.n - 1), min_size=1, unique=True))
    x = data.draw(st.integers(0, g.n - 1))
    proj = closest_point_projection(d, Y, x)
    best = min(d[x, y] for y in Y)
    assert proj and all(d[x, y] <= best + 1 + 1e-9 for y in proj)
    assert all(y in proj for y in Y if d[x, y] <= best + 1)


@given(connected_graphs(min_n=2, max_n=9), st.data())
def test_some_geodesic_constant_never_exceeds_strict(g, data):
    d = g.distances()
    Y = data.draw(st.lists(st.integers(0, g.n - 1), min_size=1, max_size=4, unique=True))
    assert quasiconvexity_constant(g, d, Y) <= quasiconvexity_constant(g, d, Y, strict=True) + 1e-9
