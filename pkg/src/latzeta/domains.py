"""Finite vertex domains: squares, word-metric balls, and 1D intervals.

Domains carry an ordered vertex list with a point-to-index bijection and the
offsets generating the metric used for boundary-distance computations.
Squares enumerate {1..R}^2 lexicographically; balls are grown by
breadth-first search in the walk's step graph from a center vertex.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .walks import StepSet


class DomainError(ValueError):
    pass


def _metric_offsets(walk: StepSet) -> tuple:
    """Generators of the word metric: step offsets closed under negation."""
    offs = {(int(dx), int(dy)) for dx, dy, _ in walk.steps}
    offs |= {(-dx, -dy) for dx, dy in offs}
    return tuple(sorted(offs))


@dataclass(eq=False)
class Domain:
    """Finite ordered vertex set on the lattice."""

    kind: str  # "square" | "ball" | "path"
    radius: int
    vertices: np.ndarray  # (N, 2) int64, in index order
    metric_offsets: tuple
    center: tuple | None = None
    index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {
                (int(x), int(y)): i for i, (x, y) in enumerate(self.vertices)
            }

    @property
    def n(self) -> int:
        return len(self.vertices)

    def __len__(self) -> int:
        return self.n

    def index_of(self, point) -> int:
        """Index of a lattice point; raises KeyError when outside the domain."""
        return self.index[(int(point[0]), int(point[1]))]

    def __contains__(self, point) -> bool:
        return (int(point[0]), int(point[1])) in self.index

    def label(self) -> str:
        return f"{self.kind}({self.radius})"

    def boundary_distances(self) -> np.ndarray:
        """Word-metric distance of every vertex to the domain's complement.

        Multi-source BFS seeded at distance 1 on vertices with a step
        neighbour outside the domain.  A shortest path to the complement
        stays inside until its final hop, so in-domain BFS is exact.
        """
        dist = np.full(self.n, -1, dtype=np.int64)
        queue = deque()
        for i, (x, y) in enumerate(self.vertices):
            for dx, dy in self.metric_offsets:
                if (int(x) + dx, int(y) + dy) not in self.index:
                    dist[i] = 1
                    queue.append(i)
                    break
        while queue:
            i = queue.popleft()
            x, y = self.vertices[i]
            d = dist[i]
            for dx, dy in self.metric_offsets:
                j = self.index.get((int(x) + dx, int(y) + dy))
                if j is not None and dist[j] < 0:
                    dist[j] = d + 1
                    queue.append(j)
        return dist


def build_domain(shape: str, radius: int, walk: StepSet, center=(0, 0)) -> Domain:
    """Construct a domain for the given walk.

    ``shape`` is ``"square"`` (vertices {1..R}^2, lexicographic order) or
    ``"ball"`` (word-metric ball of radius R around ``center``).  Ball
    membership is decided by BFS in the step graph, so for walks whose step
    graph is locally disconnected (e.g. knight moves near nothing) only the
    center's component is included.
    """
    if radius < 1:
        raise DomainError(f"radius must be >= 1, got {radius}")
    offs = _metric_offsets(walk)
    if shape == "square":
        r = np.arange(1, radius + 1, dtype=np.int64)
        xs, ys = np.meshgrid(r, r, indexing="ij")
        vertices = np.column_stack([xs.ravel(), ys.ravel()])
        return Domain(kind="square", radius=radius, vertices=vertices, metric_offsets=offs)
    if shape == "ball":
        cx, cy = int(center[0]), int(center[1])
        seen = {(cx, cy): 0}
        queue = deque([(cx, cy)])
        while queue:
            x, y = queue.popleft()
            d = seen[(x, y)]
            if d == radius:
                continue
            for dx, dy in offs:
                q = (x + dx, y + dy)
                if q not in seen:
                    seen[q] = d + 1
                    queue.append(q)
        vertices = np.array(sorted(seen), dtype=np.int64)
        return Domain(
            kind="ball",
            radius=radius,
            vertices=vertices,
            metric_offsets=offs,
            center=(cx, cy),
        )
    raise DomainError(f"unknown shape {shape!r}; use 'square' or 'ball'")


def path_domain(radius: int) -> Domain:
    """Interval {1..R} on the integers with +/-1 steps, embedded on the x axis."""
    if radius < 2:
        raise DomainError(f"path length must be >= 2, got {radius}")
    xs = np.arange(1, radius + 1, dtype=np.int64)
    vertices = np.column_stack([xs, np.zeros_like(xs)])
    return Domain(
        kind="path",
        radius=radius,
        vertices=vertices,
        metric_offsets=((-1, 0), (1, 0)),
    )


@dataclass(eq=False)
class LayerPartition:
    """Interior / boundary-layer split at buffer width W = floor(R^(1-eta))."""

    eta: float
    width: int
    interior: np.ndarray  # indices with distance-to-complement > width
    layer: np.ndarray  # the rest
    distances: np.ndarray  # distance-to-complement per vertex
    domain: Domain

    @property
    def interior_count(self) -> int:
        return len(self.interior)

    @property
    def layer_count(self) -> int:
        return len(self.layer)

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "layer", "distance_to_boundary"])
            in_layer = np.zeros(self.domain.n, dtype=bool)
            in_layer[self.layer] = True
            for i, (x, y) in enumerate(self.domain.vertices):
                writer.writerow([int(x), int(y), int(in_layer[i]), int(self.distances[i])])


def boundary_layer(dom: Domain, eta: float) -> LayerPartition:
    """Split the domain into interior and boundary layer.

    The buffer width is floor(R^(1-eta)); interior vertices lie at word
    metric distance strictly greater than the width from the complement.
    """
    if not (0.0 < eta < 0.5):
        raise DomainError(f"eta must lie in (0, 1/2), got {eta}")
    width = int(np.floor(dom.radius ** (1.0 - eta)))
    dist = dom.boundary_distances()
    interior = np.flatnonzero(dist > width)
    layer = np.flatnonzero(dist <= width)
    return LayerPartition(
        eta=eta,
        width=width,
        interior=interior,
        layer=layer,
        distances=dist,
        domain=dom,
    )
