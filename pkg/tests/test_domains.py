from collections import deque

import numpy as np
import pytest

from latzeta import domains, walks


def bfs_ball_oracle(offsets, radius):
    """Independent BFS enumeration of a word-metric ball around the origin."""
    seen = {(0, 0): 0}
    queue = deque([(0, 0)])
    while queue:
        x, y = queue.popleft()
        if seen[(x, y)] == radius:
            continue
        for dx, dy in offsets:
            q = (x + dx, y + dy)
            if q not in seen:
                seen[q] = seen[(x, y)] + 1
                queue.append(q)
    return seen


class TestSquares:
    def test_single_vertex(self):
        dom = domains.build_domain("square", 1, walks.builtin_walk("lsrw"))
        assert dom.n == 1
        assert tuple(dom.vertices[0]) == (1, 1)

    def test_square_100_has_exact_count(self):
        dom = domains.build_domain("square", 100, walks.builtin_walk("king"))
        assert dom.n == 100 * 100

    def test_lexicographic_order(self):
        dom = domains.build_domain("square", 3, walks.builtin_walk("lsrw"))
        expected = [(x, y) for x in range(1, 4) for y in range(1, 4)]
        assert [tuple(v) for v in dom.vertices] == expected

    def test_index_is_bijection(self):
        dom = domains.build_domain("square", 7, walks.builtin_walk("king"))
        assert len(dom.index) == dom.n
        for i, v in enumerate(dom.vertices):
            assert dom.index_of(v) == i

    def test_radius_validation(self):
        with pytest.raises(domains.DomainError):
            domains.build_domain("square", 0, walks.builtin_walk("lsrw"))


class TestBalls:
    def test_l1_ball_count(self):
        # nearest-neighbour steps give the l1 ball: N = 2 R^2 + 2 R + 1
        dom = domains.build_domain("ball", 3, walks.builtin_walk("lsrw"))
        assert dom.n == 25

    @pytest.mark.parametrize("name,radius", [("lsrw", 4), ("king", 3), ("triangular", 4), ("knight", 3)])
    def test_matches_bfs_oracle(self, name, radius):
        walk = walks.builtin_walk(name)
        dom = domains.build_domain("ball", radius, walk)
        oracle = bfs_ball_oracle(dom.metric_offsets, radius)
        assert dom.n == len(oracle)
        assert {tuple(v) for v in dom.vertices} == set(oracle)

    def test_quadratic_growth_bracket(self):
        walk = walks.builtin_walk("lsrw")
        for radius in (5, 10, 20):
            dom = domains.build_domain("ball", radius, walk)
            assert 1.0 * radius**2 <= dom.n <= 3.0 * radius**2

    def test_annulus_containment(self):
        # layer vertices of a ball lie between radius R-W and R from center
        walk = walks.builtin_walk("lsrw")
        dom = domains.build_domain("ball", 12, walk, center=(0, 0))
        part = domains.boundary_layer(dom, 0.3)
        center_dist = bfs_ball_oracle(dom.metric_offsets, 12)
        for i in part.layer:
            d = center_dist[tuple(dom.vertices[i])]
            assert 12 - part.width <= d <= 12


class TestLayerPartition:
    def test_partition_is_exact(self):
        dom = domains.build_domain("square", 30, walks.builtin_walk("lsrw"))
        part = domains.boundary_layer(dom, 0.25)
        assert part.interior_count + part.layer_count == dom.n
        assert set(part.interior).isdisjoint(set(part.layer))

    def test_width_rule(self):
        dom = domains.build_domain("square", 100, walks.builtin_walk("lsrw"))
        part = domains.boundary_layer(dom, 0.25)
        assert part.width == int(np.floor(100**0.75))

    def test_interior_distances_exceed_width(self):
        dom = domains.build_domain("square", 25, walks.builtin_walk("king"))
        part = domains.boundary_layer(dom, 0.3)
        assert np.all(part.distances[part.interior] > part.width)
        assert np.all(part.distances[part.layer] <= part.width)

    def test_square_distance_oracle(self):
        # for nearest-neighbour metrics the distance to the complement of
        # {1..R}^2 is min(x, y, R+1-x, R+1-y)
        radius = 13
        dom = domains.build_domain("square", radius, walks.builtin_walk("lsrw"))
        dist = dom.boundary_distances()
        for i, (x, y) in enumerate(dom.vertices):
            assert dist[i] == min(x, y, radius + 1 - x, radius + 1 - y)

    def test_buffer_swallows_small_domain(self):
        dom = domains.build_domain("square", 10, walks.builtin_walk("lsrw"))
        part = domains.boundary_layer(dom, 0.01)
        assert part.interior_count == 0
        assert part.layer_count == dom.n

    def test_layer_count_formula_on_squares(self):
        # nearest-neighbour layer of width W strips W rings: |E| = N - (R-2W)^2
        walk = walks.builtin_walk("lsrw")
        for radius in (40, 80):
            dom = domains.build_domain("square", radius, walk)
            part = domains.boundary_layer(dom, 0.25)
            inner = max(radius - 2 * part.width, 0)
            assert part.layer_count == radius**2 - inner**2

    def test_scaling_against_r_times_w(self):
        walk = walks.builtin_walk("lsrw")
        ratios = []
        for radius in (20, 50, 100, 200):
            dom = domains.build_domain("square", radius, walk)
            part = domains.boundary_layer(dom, 0.25)
            ratios.append(part.layer_count / (radius * part.width))
        assert max(ratios) <= 4.0
        assert min(ratios) >= 1.0

    def test_eta_validation(self):
        dom = domains.build_domain("square", 5, walks.builtin_walk("lsrw"))
        for eta in (0.0, 0.5, -0.1, 0.9):
            with pytest.raises(domains.DomainError):
                domains.boundary_layer(dom, eta)

    def test_csv_export(self, tmp_path):
        dom = domains.build_domain("square", 4, walks.builtin_walk("lsrw"))
        part = domains.boundary_layer(dom, 0.25)
        out = tmp_path / "layer.csv"
        part.save_csv(out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "x,y,layer,distance_to_boundary"
        assert len(lines) == dom.n + 1


class TestPathDomain:
    def test_small_counts(self):
        assert domains.path_domain(2).n == 2
        assert domains.path_domain(100).n == 100

    def test_rejects_short(self):
        with pytest.raises(domains.DomainError):
            domains.path_domain(1)

    def test_vertices_on_axis(self):
        dom = domains.path_domain(5)
        assert [tuple(v) for v in dom.vertices] == [(i, 0) for i in range(1, 6)]
