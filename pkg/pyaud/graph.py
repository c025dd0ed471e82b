# encoding: utf-8
"""DTW distances, mutual k-nearest-neighbor graphs and their components."""
import json
import logging
from collections import OrderedDict

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _csgraph_components
from scipy.spatial.distance import cdist

from pyaud.errors import (
    ConfigError,
    DimensionMismatch,
    EmptySequence,
    UnknownCluster,
)
from pyaud.frontend.matrixio import read_matrix, write_matrix
from pyaud.section import ConfigSection
from pyaud.workers import run_jobs

__all__ = [
    "ClusterConfig",
    "DistanceMatrix",
    "NeighborGraph",
    "Clustering",
    "dtw_distance",
    "pairwise_distances",
    "build_mutual_knn_graph",
    "connected_components",
    "cluster_medoid",
    "cluster_segments",
    "write_dot",
]

logger = logging.getLogger(__name__)


class ClusterConfig(ConfigSection):
    name = "cluster"
    defaults = {
        "knn_k": 5,
        "min_cluster_size": 3,
        # -1 disables the band
        "dtw_band": -1,
    }

    def validate(self):
        if self.knn_k < 0:
            raise ConfigError("knn_k must not be negative.")
        if self.min_cluster_size < 1:
            raise ConfigError("min_cluster_size must be at least 1.")

    @property
    def band(self):
        return None if self.dtw_band < 0 else self.dtw_band


def _as_frames(seq):
    frames = np.asarray(getattr(seq, "frames", seq), dtype=np.float64)
    if frames.ndim == 1:
        frames = frames.reshape(-1, 1)
    return frames


def dtw_distance(a, b, band=None):
    """Path length normalized DTW distance with Euclidean frame cost.

    Among paths of equal accumulated cost the shortest one is used for
    the normalization.
    """
    x = _as_frames(a)
    y = _as_frames(b)
    if len(x) == 0 or len(y) == 0:
        raise EmptySequence("DTW needs two non-empty sequences.")
    if x.shape[1] != y.shape[1]:
        msg = "Feature dimensions differ: {0} != {1}"
        raise DimensionMismatch(msg.format(x.shape[1], y.shape[1]))

    cost = cdist(x, y).tolist()
    n, m = len(x), len(y)
    width = None if band is None else max(int(band), abs(n - m))
    inf = float("inf")
    # (accumulated cost, path length) per cell, row 0 / column 0 are sentinels
    prev = [(0.0, 0)] + [(inf, 0)] * m
    for i in range(1, n + 1):
        row = [(inf, 0)] * (m + 1)
        lo, hi = 1, m
        if width is not None:
            lo, hi = max(1, i - width), min(m, i + width)
        crow = cost[i - 1]
        for j in range(lo, hi + 1):
            best = min(prev[j - 1], prev[j], row[j - 1])
            row[j] = (best[0] + crow[j - 1], best[1] + 1)
        prev = row
    total, length = prev[m]
    return total / length


class DistanceMatrix(object):
    """Symmetric matrix of non-negative distances with zero diagonal."""

    def __init__(self, d):
        super(DistanceMatrix, self).__init__()
        d = np.asarray(d, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ConfigError("A distance matrix must be square.")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ConfigError("Distances must be finite and non-negative.")
        if np.any(np.diag(d) != 0) or not np.array_equal(d, d.T):
            raise ConfigError("Distance matrix must be symmetric with zero diagonal.")
        self.d = d

    @property
    def n(self):
        return self.d.shape[0]

    def __getitem__(self, index):
        return self.d[index]

    def save(self, path):
        write_matrix(path, self.d)

    @classmethod
    def load(cls, path):
        d, _ = read_matrix(path)
        return cls(d)


def _distance_row(shared, i):
    frames, band = shared
    return [dtw_distance(frames[i], frames[j], band) for j in range(i + 1, len(frames))]


def pairwise_distances(segments, band=None, n_jobs=1):
    frames = [_as_frames(s) for s in segments]
    n = len(frames)
    d = np.zeros((n, n))
    rows = run_jobs(_distance_row, range(n), n_jobs, shared=(frames, band))
    for i, row in enumerate(rows):
        d[i, i + 1:] = row
        d[i + 1:, i] = row
    logger.debug("Computed %d DTW distances.", n * (n - 1) // 2)
    return DistanceMatrix(d)


class NeighborGraph(object):
    def __init__(self, n, edges=()):
        super(NeighborGraph, self).__init__()
        self.n = int(n)
        normalized = set()
        for i, j in edges:
            if i == j:
                raise ConfigError("Self loop on node {0}.".format(i))
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ConfigError("Edge ({0}, {1}) outside the graph.".format(i, j))
            normalized.add((min(i, j), max(i, j)))
        self.edges = frozenset(normalized)

    def adjacency(self):
        pairs = sorted(self.edges)
        rows = [i for i, _ in pairs]
        cols = [j for _, j in pairs]
        data = np.ones(len(pairs))
        return coo_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def __repr__(self):
        return "<NeighborGraph n: {0} edges: {1}>".format(self.n, len(self.edges))


def build_mutual_knn_graph(d, k):
    if k < 0:
        raise ConfigError("k must not be negative.")
    dist = d.d if isinstance(d, DistanceMatrix) else np.asarray(d, dtype=np.float64)
    n = dist.shape[0]
    k = min(int(k), max(n - 1, 0))
    knn = np.zeros((n, n), dtype=bool)
    if k > 0:
        for i in range(n):
            others = np.array([j for j in range(n) if j != i])
            # stable sort breaks ties toward the lower node index
            order = others[np.argsort(dist[i, others], kind="stable")]
            knn[i, order[:k]] = True
    mutual = np.triu(knn & knn.T, 1)
    edges = list(zip(*np.nonzero(mutual)))
    logger.debug("Mutual %d-NN graph: %d nodes, %d edges.", k, n, len(edges))
    return NeighborGraph(n, [(int(i), int(j)) for i, j in edges])


class Clustering(object):
    """Partition of nodes 0..n-1, cluster ids follow smallest member order."""

    def __init__(self, assignment):
        super(Clustering, self).__init__()
        self.assignment = [int(a) for a in assignment]
        clusters = OrderedDict()
        for node, cid in enumerate(self.assignment):
            clusters.setdefault(cid, []).append(node)
        self.clusters = clusters

    @property
    def n(self):
        return len(self.assignment)

    def __len__(self):
        return len(self.clusters)

    def members(self, cluster_id):
        try:
            return self.clusters[cluster_id]
        except KeyError:
            raise UnknownCluster("Unknown cluster: {0!r}".format(cluster_id))

    def split_by_size(self, min_size):
        """Return (kept cluster ids, reject pool of node indices)."""
        kept = []
        rejected = []
        for cid, members in self.clusters.items():
            if len(members) >= min_size:
                kept.append(cid)
            else:
                rejected.extend(members)
        if rejected:
            logger.info(
                "%d segments in clusters below %d members go to the reject pool.",
                len(rejected),
                min_size,
            )
        return kept, sorted(rejected)

    def to_dict(self, names=None):
        names = names or list(range(self.n))
        return OrderedDict(
            (str(cid), [names[m] for m in members])
            for cid, members in self.clusters.items()
        )

    def save(self, fileobj, names=None):
        json.dump(self.to_dict(names), fileobj, indent=2)

    @classmethod
    def load(cls, fileobj, names=None):
        """Read a clustering written by save, nodes given by name order."""
        data = json.load(fileobj)
        lookup = None if names is None else {name: i for i, name in enumerate(names)}
        pairs = []
        for cid, members in data.items():
            for m in members:
                pairs.append((m if lookup is None else lookup[m], int(cid)))
        pairs.sort()
        if [node for node, _ in pairs] != list(range(len(pairs))):
            raise ConfigError("Clustering does not cover nodes 0..n-1 exactly once.")
        return cls([cid for _, cid in pairs])

    def __repr__(self):
        return "<Clustering n: {0} clusters: {1}>".format(self.n, len(self))


def connected_components(g):
    if g.n == 0:
        return Clustering([])
    _, labels = _csgraph_components(g.adjacency(), directed=False)
    renumber = {}
    assignment = []
    for label in labels:
        if label not in renumber:
            renumber[label] = len(renumber)
        assignment.append(renumber[label])
    return Clustering(assignment)


def cluster_medoid(c, d, cluster_id):
    members = c.members(cluster_id)
    dist = d.d if isinstance(d, DistanceMatrix) else np.asarray(d)
    sums = dist[np.ix_(members, members)].sum(axis=1)
    return members[int(np.argmin(sums))]


def cluster_segments(features, cfg, n_jobs=1):
    """Distances, graph and clustering of a list of segment features."""
    d = pairwise_distances(features, cfg.band, n_jobs)
    g = build_mutual_knn_graph(d, cfg.knn_k)
    c = connected_components(g)
    logger.info("%d segments form %d clusters.", c.n, len(c))
    return d, g, c


def write_dot(fileobj, g, c, names=None):
    """GraphViz rendering, one subgraph per cluster."""
    names = names or [str(i) for i in range(g.n)]
    fileobj.write("graph clusters {\n")
    for cid, members in c.clusters.items():
        fileobj.write("  subgraph cluster_%d {\n" % cid)
        fileobj.write('    label="%d";\n' % cid)
        for m in members:
            fileobj.write('    n%d [label="%s"];\n' % (m, names[m]))
        fileobj.write("  }\n")
    for i, j in sorted(g.edges):
        fileobj.write("  n%d -- n%d;\n" % (i, j))
    fileobj.write("}\n")
