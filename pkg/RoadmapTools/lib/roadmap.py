"""
roadmap module
r-disk subgraphs over a fixed sample prefix with a persistent, detector-once edge cache
"""
import logging as log
import math
from dataclasses import dataclass
from enum import Enum
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree
from .. import DEFAULT_RESOLUTION


START, GOAL = 0, 1
BRUTE_FORCE_LIMIT = 512


class InfeasibleError(RuntimeError):
    """
    raised when no collision-free path connects start and goal on the searched roadmap
    """

    def __init__(self, message="roadmap admits no feasible path", trace=None):
        super().__init__(message)
        self.trace = trace


class EdgeStatus(Enum):
    UNKNOWN = "unknown"
    FREE = "free"
    BLOCKED = "blocked"


@dataclass(eq=False)
class Edge:
    u: int
    v: int
    length: float
    status: EdgeStatus = EdgeStatus.UNKNOWN
    measure: float = None
    evaluations: int = 0
    checks: int = 0

    @property
    def key(self):
        return (self.u, self.v)

    @property
    def w_l(self):
        return math.inf if self.status is EdgeStatus.BLOCKED else self.length

    @property
    def w_m(self):
        if self.status is EdgeStatus.FREE:
            return 0.0
        if self.status is EdgeStatus.BLOCKED:
            return math.inf
        if self.measure is None:
            raise RuntimeError(f"collision measure of edge {self.key} has not been computed")
        return self.measure

    def other(self, vertex):
        return self.v if vertex == self.u else self.u


def edge_key(a, b):
    return (a, b) if a < b else (b, a)


def build_samples(start, goal, halton_points):
    """
    vertex array with start and goal at indices 0 and 1, followed by the sequence points
    """
    start = np.asarray(start, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    return np.vstack([start[None, :], goal[None, :], np.asarray(halton_points, dtype=np.float64)])


class Roadmap:
    """
    the subgraph G(n, r) of the roadmap over `samples`; edge records, including evaluation results,
    outlive pruning and regrowth
    """

    def __init__(self, samples, n, r, resolution=DEFAULT_RESOLUTION, admit=None):
        self.samples = np.asarray(samples, dtype=np.float64)
        self.d = self.samples.shape[1]
        self.resolution = resolution
        self.active_n = 0
        self.radius = 0.0
        self.pruned = np.zeros(self.samples.shape[0], dtype=bool)
        self.adjacency = {}
        self.cache = {}
        self._index = None
        self._index_ids = np.zeros(0, dtype=np.int64)
        self._resize(n, r, admit)

    @property
    def num_samples(self):
        return self.samples.shape[0]

    @property
    def considered(self):
        """
        number of distinct edges that have been part of some subgraph
        """
        return len(self.cache)

    @property
    def num_edges(self):
        return sum(len(nbrs) for nbrs in self.adjacency.values()) // 2

    def edges(self):
        for a, nbrs in self.adjacency.items():
            for b, edge in nbrs.items():
                if a < b:
                    yield edge

    def edge(self, a, b):
        return self.adjacency[a][b]

    def alive(self):
        """
        ids of active, unpruned vertices
        """
        return self._index_ids

    def grow(self, new_n, new_r, admit=None):
        """
        densifies to G(new_n, new_r); new vertices failing `admit` are rejected on arrival
        """
        if new_n < self.active_n or new_r < self.radius:
            raise ValueError(
                f"cannot shrink roadmap from (n={self.active_n}, r={self.radius}) "
                f"to (n={new_n}, r={new_r})"
            )
        self._resize(new_n, new_r, admit)
        return self

    def rescale(self, new_n, new_r, admit=None):
        """
        like `grow`, but the radius may shrink; edges longer than `new_r` leave the subgraph
        while their cache records stay
        """
        if new_n < self.active_n:
            raise ValueError(f"cannot drop vertices: {new_n} < {self.active_n}")
        self._resize(new_n, new_r, admit)
        return self

    def _resize(self, new_n, new_r, admit):
        if not 1 <= new_n <= self.num_samples:
            raise ValueError(f"prefix size {new_n} outside [1, {self.num_samples}]")
        if not 0 < new_r <= math.sqrt(self.d) + 1e-12:
            raise ValueError(f"radius {new_r} outside (0, sqrt(d)]")

        if admit is not None:
            for i in range(max(self.active_n, 2), new_n):
                if not admit(self.samples[i]):
                    self.pruned[i] = True
        if new_r < self.radius:
            for a in list(self.adjacency):
                for b in [b for b, e in self.adjacency[a].items() if e.length > new_r]:
                    del self.adjacency[a][b]
        self.active_n = new_n
        self.radius = new_r
        self._reindex()

        ids = self._index_ids
        for a in ids:
            self.adjacency.setdefault(int(a), {})
        if len(ids) < 2:
            return
        points = self.samples[ids]
        if len(ids) < BRUTE_FORCE_LIMIT:
            dist = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
            i, j = np.nonzero(np.triu(dist <= new_r, k=1))
        else:
            pairs = self._index.query_pairs(new_r, output_type="ndarray")
            i, j = pairs[:, 0], pairs[:, 1]
        lengths = np.linalg.norm(points[i] - points[j], axis=1)

        added = 0
        for a, b, length in zip(ids[i].tolist(), ids[j].tolist(), lengths.tolist()):
            if b in self.adjacency[a]:
                continue
            key = edge_key(a, b)
            edge = self.cache.get(key)
            if edge is None:
                edge = Edge(key[0], key[1], length)
                self.cache[key] = edge
            self.adjacency[a][b] = edge
            self.adjacency[b][a] = edge
            added += 1
        log.debug(
            f"roadmap G(n={new_n}, r={new_r:.4f}): {len(ids)} vertices, {added} edges added, "
            f"{self.considered} considered so far"
        )

    def _reindex(self):
        mask = ~self.pruned[: self.active_n]
        self._index_ids = np.nonzero(mask)[0]
        self._index = cKDTree(self.samples[self._index_ids]) if len(self._index_ids) else None

    def vertices_within(self, q, radius):
        """
        ids of alive vertices at distance <= radius from q
        """
        if self._index is None:
            return []
        hits = self._index.query_ball_point(np.asarray(q, dtype=np.float64), radius)
        return self._index_ids[hits].tolist()

    def prune_outside(self, informed_test):
        """
        prunes every vertex except start and goal failing `informed_test`; returns the count
        """
        ids = self._index_ids[self._index_ids > GOAL]
        contains_many = getattr(informed_test, "contains_many", None)
        if contains_many is not None:
            keep = contains_many(self.samples[ids])
        else:
            keep = np.array([bool(informed_test(self.samples[i])) for i in ids], dtype=bool)
        doomed = ids[~keep].tolist()
        for a in doomed:
            self.pruned[a] = True
            for b in self.adjacency.pop(a, {}):
                self.adjacency[b].pop(a, None)
        if doomed:
            self._reindex()
        log.debug(f"pruned {len(doomed)} vertices, {len(self._index_ids)} remain")
        return len(doomed)

    def evaluate_edge(self, world, edge, belief=None):
        """
        collision checks `edge` unless its status is already known; the tested configurations
        are forwarded to `belief`
        """
        if edge.status is not EdgeStatus.UNKNOWN:
            return edge.status
        result = world.check_edge(self.samples[edge.u], self.samples[edge.v], self.resolution)
        edge.status = result.status
        edge.evaluations += 1
        edge.checks += len(result.configs)
        edge.measure = None
        if belief is not None:
            belief.apply_edge_results(self, edge, result)
        return edge.status

    def invalidate_measures(self):
        for edge in self.edges():
            edge.measure = None

    def remeasure(self, edges, belief):
        """
        recomputes the collision measure of the given unknown edges under `belief`
        """
        edges = [e for e in edges if e.status is EdgeStatus.UNKNOWN]
        if not edges:
            return 0
        u = self.samples[[e.u for e in edges]]
        v = self.samples[[e.v for e in edges]]
        for edge, measure in zip(edges, belief.edge_measures(u, v, self.resolution)):
            edge.measure = float(measure)
        return len(edges)

    def ensure_measures(self, belief):
        return self.remeasure(
            [e for e in self.edges() if e.measure is None and e.status is EdgeStatus.UNKNOWN], belief
        )

    def path_edges(self, path):
        return [self.adjacency[a][b] for a, b in zip(path[:-1], path[1:])]

    def path_length(self, path):
        return float(sum(e.length for e in self.path_edges(path)))

    def shortest_path_oracle(self, world):
        """
        evaluates every edge of the subgraph and returns the shortest collision-free
        start-goal path with its length
        """
        for edge in list(self.edges()):
            self.evaluate_edge(world, edge)
        free = [e for e in self.edges() if e.status is EdgeStatus.FREE]
        rows = [e.u for e in free] + [e.v for e in free]
        cols = [e.v for e in free] + [e.u for e in free]
        data = [e.length for e in free] * 2
        graph = csr_matrix((data, (rows, cols)), shape=(self.active_n, self.active_n))
        dist, predecessors = dijkstra(graph, directed=True, indices=START, return_predecessors=True)
        if self.active_n <= GOAL or not np.isfinite(dist[GOAL]):
            raise InfeasibleError("no collision-free path on the fully evaluated roadmap")
        path = [GOAL]
        while path[-1] != START:
            path.append(int(predecessors[path[-1]]))
        path.reverse()
        return path, float(dist[GOAL])

    def to_dict(self):
        return {
            "d": self.d,
            "active_n": self.active_n,
            "radius": self.radius,
            "samples": self.samples[: self.active_n].tolist(),
            "pruned": np.nonzero(self.pruned[: self.active_n])[0].tolist(),
            "edges": [
                [e.u, e.v, e.status.value]
                for e in sorted(self.cache.values(), key=lambda e: e.key)
                if e.status is not EdgeStatus.UNKNOWN
            ],
        }


def build_roadmap(samples, n, r, resolution=DEFAULT_RESOLUTION, admit=None):
    return Roadmap(samples, n, r, resolution=resolution, admit=admit)
