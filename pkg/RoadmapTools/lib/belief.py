"""
belief module
k-NN estimate of the probability that a configuration is collision-free, built from every
configuration the collision detector has tested
"""
import logging as log
import math
import numpy as np
from scipy.spatial import cKDTree
from .. import DEFAULT_K, DEFAULT_LAMBDA, DEFAULT_W_LAMBDA, DEFAULT_RESOLUTION, EPSILON_DIST
from .world import interpolate


REBUILD_THRESHOLD = 256


class ContradictoryEvidenceError(ValueError):
    """
    the same configuration was reported both free and in collision
    """


def affected_radius(edge_length, r_phi):
    """
    radius around each endpoint of an edge that covers every configuration within r_phi of it
    """
    if edge_length < 0:
        raise ValueError(f"negative edge length {edge_length}")
    return math.sqrt(edge_length**2 / 4 + r_phi**2)


class BeliefModel:
    """
    configuration space model: weighted k-NN average of the stored collision outcomes with
    additive smoothing towards the prior `lam` (probability of collision) of weight `w_lambda`

    `r_phi=None` ties the influence radius to the radius of the roadmap being searched
    (see `follow`); a `frozen` model never learns and always answers with the prior
    """

    def __init__(
        self,
        k=DEFAULT_K,
        lam=DEFAULT_LAMBDA,
        w_lambda=DEFAULT_W_LAMBDA,
        r_phi=None,
        epsilon_dist=EPSILON_DIST,
        frozen=False,
    ):
        if k < 1:
            raise ValueError(f"k must be at least 1, got {k}")
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"prior probability must lie in [0, 1], got {lam}")
        if w_lambda <= 0:
            raise ValueError(f"prior weight must be positive, got {w_lambda}")
        if r_phi is not None and r_phi <= 0:
            raise ValueError(f"influence radius must be positive, got {r_phi}")
        self.k = k
        self.lam = lam
        self.w_lambda = w_lambda
        self.follow_radius = r_phi is None
        self.r_phi = math.inf if r_phi is None else r_phi
        self.epsilon_dist = epsilon_dist
        self.frozen = frozen

        self._outcomes = {}
        self._tree = None
        self._tree_points = None
        self._tree_labels = None
        self._pending_points = []
        self._pending_labels = []

    def __len__(self):
        return len(self._outcomes)

    def follow(self, roadmap):
        """
        adopts the roadmap radius as influence radius; measures computed under the old radius
        are invalidated
        """
        if self.follow_radius and self.r_phi != roadmap.radius:
            log.debug(f"belief influence radius {self.r_phi} -> {roadmap.radius}")
            self.r_phi = roadmap.radius
            roadmap.invalidate_measures()

    def insert(self, q, in_collision):
        """
        stores the outcome for q; identical repeats are ignored
        """
        if self.frozen:
            return
        q = np.asarray(q, dtype=np.float64)
        key = tuple(q.tolist())
        label = 1 if in_collision else 0
        known = self._outcomes.get(key)
        if known is not None:
            if known != label:
                raise ContradictoryEvidenceError(
                    f"configuration {key} reported {'blocked' if known else 'free'} before, "
                    f"now {'blocked' if label else 'free'}"
                )
            return
        self._outcomes[key] = label
        self._pending_points.append(q)
        self._pending_labels.append(label)
        if len(self._pending_points) > REBUILD_THRESHOLD:
            self._rebuild()

    def _rebuild(self):
        points = np.array(list(self._outcomes.keys()), dtype=np.float64)
        self._tree_labels = np.array(list(self._outcomes.values()), dtype=np.float64)
        self._tree_points = points
        self._tree = cKDTree(points)
        self._pending_points = []
        self._pending_labels = []

    def _neighbours(self, queries):
        """
        distances and labels of up to k nearest stored points within r_phi; padding has
        infinite distance
        """
        m = queries.shape[0]
        bound = np.nextafter(self.r_phi, math.inf)
        dists = [np.full((m, 0), math.inf)]
        labels = [np.zeros((m, 0))]
        if self._tree is not None:
            k = min(self.k, self._tree_points.shape[0])
            dist, idx = self._tree.query(queries, k=k, distance_upper_bound=bound)
            dist = dist.reshape(m, k)
            idx = idx.reshape(m, k)
            found = idx < self._tree_points.shape[0]
            dists.append(dist)
            clamped = np.minimum(idx, len(self._tree_labels) - 1)
            labels.append(np.where(found, self._tree_labels[clamped], 0.0))
        if self._pending_points:
            pending = np.array(self._pending_points)
            dist = np.linalg.norm(queries[:, None, :] - pending[None, :, :], axis=2)
            dist[dist > self.r_phi] = math.inf
            dists.append(dist)
            labels.append(np.broadcast_to(np.array(self._pending_labels, dtype=np.float64), dist.shape))
        dist = np.concatenate(dists, axis=1)
        label = np.concatenate(labels, axis=1)
        if dist.shape[1] > self.k:
            nearest = np.argpartition(dist, self.k - 1, axis=1)[:, : self.k]
            dist = np.take_along_axis(dist, nearest, axis=1)
            label = np.take_along_axis(label, nearest, axis=1)
        return dist, label

    def prob_free_many(self, queries):
        """
        rho for each row of `queries`
        """
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        if self.frozen or not self._outcomes:
            return np.full(queries.shape[0], 1.0 - self.lam)
        dist, label = self._neighbours(queries)
        weights = np.where(np.isfinite(dist), 1.0 / np.maximum(dist, self.epsilon_dist), 0.0)
        p_collision = ((weights * label).sum(axis=1) + self.w_lambda * self.lam) / (
            weights.sum(axis=1) + self.w_lambda
        )
        return 1.0 - p_collision

    def prob_free(self, q):
        return float(self.prob_free_many(np.asarray(q, dtype=np.float64)[None, :])[0])

    def edge_measures(self, u, v, resolution=DEFAULT_RESOLUTION):
        """
        collision measures -sum(log rho) over the embedded configurations of the edges (u[i], v[i])
        """
        u = np.atleast_2d(u)
        v = np.atleast_2d(v)
        segments = [interpolate(a, b, resolution) for a, b in zip(u, v)]
        if not segments:
            return np.zeros(0)
        counts = np.array([s.shape[0] for s in segments])
        rho = self.prob_free_many(np.concatenate(segments, axis=0))
        offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
        return np.add.reduceat(-np.log(rho), offsets)

    def edge_measure(self, u, v, resolution=DEFAULT_RESOLUTION):
        return float(self.edge_measures(u, v, resolution)[0])

    def apply_edge_results(self, roadmap, edge, result):
        """
        ingests what the detector tested on `edge` and re-measures the unknown edges incident to
        vertices within the affected radius of either endpoint; returns how many were re-measured
        """
        if self.frozen:
            return 0
        for q, hit in zip(result.configs, result.in_collision):
            self.insert(q, bool(hit))
        radius = affected_radius(edge.length, self.r_phi)
        if math.isinf(radius):
            vertices = set(roadmap.alive().tolist())
        else:
            vertices = set(roadmap.vertices_within(roadmap.samples[edge.u], radius))
            vertices.update(roadmap.vertices_within(roadmap.samples[edge.v], radius))
        affected = {e for a in vertices for e in roadmap.adjacency.get(a, {}).values()}
        return roadmap.remeasure(affected, self)

    def to_dict(self):
        return {
            "k": self.k,
            "lambda": self.lam,
            "w_lambda": self.w_lambda,
            "r_phi": None if math.isinf(self.r_phi) else self.r_phi,
            "points": [list(q) for q in self._outcomes],
            "in_collision": list(self._outcomes.values()),
        }
