"""Metric primitives on finite weighted graphs.

Distances are exact shortest-path metrics (Dijkstra via scipy).  All
comparisons between real distances use the tolerance ``TOL``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import DisconnectedGraphError, StructuralError

TOL = 1e-9
EXHAUSTIVE_LIMIT = 60
SAMPLE_QUADRUPLES = 10**6


@dataclass
class WeightedGraph:
    n: int
    edges: list = field(default_factory=list)

    def __post_init__(self):
        self.n = int(self.n)
        clean = []
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise StructuralError(f"edge ({u}, {v}) references a vertex outside 0..{self.n - 1}")
            if u == v:
                raise StructuralError(f"self-loop at vertex {u}")
            if not w > 0:
                raise StructuralError(f"edge ({u}, {v}) has non-positive length {w}")
            clean.append((u, v, w))
        self.edges = clean
        self._dist = None

    def __eq__(self, other):
        return isinstance(other, WeightedGraph) and self.to_dict() == other.to_dict()

    def adjacency(self):
        """Sparse symmetric matrix keeping the shortest parallel edge."""
        best = {}
        for u, v, w in self.edges:
            key = (u, v) if u < v else (v, u)
            if key not in best or w < best[key]:
                best[key] = w
        if not best:
            return csr_matrix((self.n, self.n))
        rows, cols, vals = [], [], []
        for (u, v), w in best.items():
            rows += [u, v]
            cols += [v, u]
            vals += [w, w]
        return csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))

    def neighbors(self):
        nbrs = [dict() for _ in range(self.n)]
        for u, v, w in self.edges:
            if v not in nbrs[u] or w < nbrs[u][v]:
                nbrs[u][v] = w
                nbrs[v][u] = w
        return nbrs

    def distances(self):
        if self._dist is None:
            self._dist = all_pairs_distances(self)
        return self._dist

    def to_dict(self):
        return {"n": self.n, "edges": sorted([u, v, w] if u < v else [v, u, w] for u, v, w in self.edges)}

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(doc["n"], [tuple(e) for e in doc.get("edges", [])])
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            if isinstance(exc, StructuralError):
                raise
            raise StructuralError(f"malformed graph document: {exc}") from exc


def all_pairs_distances(g):
    """Exact shortest-path metric as an ``n×n`` array."""
    if g.n == 0:
        return np.zeros((0, 0))
    d = shortest_path(g.adjacency(), method="D", directed=False)
    bad = np.argwhere(~np.isfinite(d))
    if len(bad):
        u, v = (int(x) for x in bad[0])
        raise DisconnectedGraphError(u, v)
    return d


def gromov_product(d, x, y, z):
    """(x|y)_z = ½(d(x,z) + d(y,z) − d(x,y))."""
    return max(0.0, 0.5 * (d[x, z] + d[y, z] - d[x, y]))


@dataclass
class DeltaResult:
    delta: float
    degenerate: bool = False
    exact: bool = True
    quadruples: int = 0
    argmax: tuple = ()

    def to_dict(self):
        return {"delta": self.delta, "degenerate": self.degenerate, "exact": self.exact,
                "lower_bound": not self.exact, "quadruples": self.quadruples, "argmax": list(self.argmax)}


@numba.njit(cache=True, nogil=True)
def _delta_rows(d, ws):
    n = d.shape[0]
    best = 0.0
    bw = -1
    bx = -1
    by = -1
    bz = -1
    g = np.empty((n, n))
    for wi in range(ws.shape[0]):
        w = ws[wi]
        for a in range(n):
            for b in range(n):
                g[a, b] = 0.5 * (d[a, w] + d[b, w] - d[a, b])
        for x in range(n):
            for z in range(x + 1, n):
                gxz = g[x, z]
                for y in range(n):
                    m = g[x, y]
                    if g[y, z] < m:
                        m = g[y, z]
                    if m - gxz > best:
                        best = m - gxz
                        bw, bx, by, bz = w, x, y, z
    return best, bw, bx, by, bz


def four_point_delta(d, *, exhaustive_limit=EXHAUSTIVE_LIMIT, samples=SAMPLE_QUADRUPLES, seed=0, workers=1):
    """Four-point hyperbolicity constant.

    δ = max over quadruples of min((x|y)_w, (y|z)_w) − (x|z)_w.  Exact for
    ``n <= exhaustive_limit`` (pass ``None`` to always be exact); above that a
    seeded sample is drawn and the result is a lower bound.
    """
    d = np.ascontiguousarray(d, dtype=float)
    n = d.shape[0]
    if n < 4:
        return DeltaResult(0.0, degenerate=True, exact=True, quadruples=0)
    if exhaustive_limit is None or n <= exhaustive_limit:
        chunks = [c for c in np.array_split(np.arange(n, dtype=np.int64), max(1, int(workers))) if len(c)]
        if len(chunks) == 1:
            results = [_delta_rows(d, chunks[0])]
        else:
            with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
                results = list(pool.map(lambda c: _delta_rows(d, c), chunks))
        # chunks are ordered, ties resolved toward the earliest chunk
        best = max(results, key=lambda r: r[0])
        for r in results:
            if r[0] == best[0]:
                best = r
                break
        delta = float(best[0])
        arg = tuple(int(x) for x in best[1:]) if delta > 0 else ()
        return DeltaResult(delta if delta > TOL else 0.0, exact=True, quadruples=n**4, argmax=arg)
    rng = np.random.default_rng(seed)
    q = rng.integers(0, n, size=(int(samples), 4))
    x, y, z, w = q.T
    gxy = 0.5 * (d[x, w] + d[y, w] - d[x, y])
    gyz = 0.5 * (d[y, w] + d[z, w] - d[y, z])
    gxz = 0.5 * (d[x, w] + d[z, w] - d[x, z])
    vals = np.minimum(gxy, gyz) - gxz
    k = int(np.argmax(vals))
    delta = float(max(vals[k], 0.0))
    return DeltaResult(delta if delta > TOL else 0.0, exact=False, quadruples=int(samples),
                       argmax=(int(w[k]), int(x[k]), int(y[k]), int(z[k])))


def _as_set(Y):
    out = sorted({int(v) for v in Y})
    return out


def distance_to_set(d, Y):
    """Vector of d(v, Y) for every vertex v."""
    Y = _as_set(Y)
    if not Y:
        raise ValueError("empty vertex set")
    return d[:, Y].min(axis=1)


def set_distance(d, A, B):
    A, B = _as_set(A), _as_set(B)
    if not A or not B:
        raise ValueError("empty vertex set")
    return float(d[np.ix_(A, B)].min())


def set_diameter(d, A):
    A = _as_set(A)
    if not A:
        return 0.0
    return float(d[np.ix_(A, A)].max())


def neighborhood(d, Y, C):
    """Closed C-neighbourhood of Y."""
    dist = distance_to_set(d, Y)
    return [int(v) for v in np.flatnonzero(dist <= C + TOL)]


def closest_point_projection(d, Y, x):
    """All y in Y with d(x, y) <= d(x, Y) + 1."""
    Y = _as_set(Y)
    if not Y:
        raise ValueError("closest-point projection onto an empty set")
    row = d[x, Y]
    m = row.min()
    return [y for y, r in zip(Y, row) if r <= m + 1 + TOL]


def _interval_mask(d, a, b):
    return np.abs(d[a] + d[b] - d[a, b]) <= TOL


def _geodesic_dag(g, d, a, b, nbrs=None):
    """Vertices and directed edges of the union of all a→b geodesics, in distance order."""
    nbrs = nbrs if nbrs is not None else g.neighbors()
    inside = _interval_mask(d, a, b)
    verts = sorted(np.flatnonzero(inside), key=lambda v: (d[a, v], v))
    preds = {}
    for v in verts:
        preds[v] = [u for u, w in nbrs[v].items()
                    if inside[u] and abs(d[a, u] + w - d[a, v]) <= TOL]
    return verts, preds


def geodesic_minimax(g, d, a, b, cost, nbrs=None):
    """Smallest possible max of ``cost`` along an a→b geodesic (vertex sequence)."""
    verts, preds = _geodesic_dag(g, d, a, b, nbrs)
    best = {}
    for v in verts:
        if v == a:
            best[v] = cost[v]
            continue
        ps = [best[u] for u in preds[v] if u in best]
        if ps:
            best[v] = max(cost[v], min(ps))
    return float(best[b])


def geodesic_maximin_from(g, d, a, cost, nbrs=None):
    """For every b: the largest possible min of ``cost`` along an a→b geodesic."""
    nbrs = nbrs if nbrs is not None else g.neighbors()
    order = np.argsort(d[a], kind="stable")
    best = np.full(g.n, -np.inf)
    best[a] = cost[a]
    for v in order:
        if v == a:
            continue
        top = -np.inf
        for u, w in nbrs[v].items():
            if abs(d[a, u] + w - d[a, v]) <= TOL and best[u] > top:
                top = best[u]
        best[v] = min(cost[v], top)
    return best


def quasiconvexity_constant(g, d, Y, strict=False):
    """Smallest μ with geodesics between Y-points inside the μ-neighbourhood of Y.

    Default mode asks for *some* geodesic per pair; ``strict`` asks for every
    geodesic (every vertex of every geodesic interval).
    """
    Y = _as_set(Y)
    if not Y:
        raise ValueError("empty vertex set")
    dy = distance_to_set(d, Y)
    nbrs = g.neighbors()
    mu = 0.0
    for i, a in enumerate(Y):
        for b in Y[i + 1:]:
            if strict:
                val = float(dy[_interval_mask(d, a, b)].max())
            else:
                val = geodesic_minimax(g, d, a, b, dy, nbrs)
            mu = max(mu, val)
    return mu


def convex_hull(g, d, Y):
    """Vertices on at least one geodesic between two points of Y."""
    Y = _as_set(Y)
    mask = np.zeros(d.shape[0], dtype=bool)
    mask[Y] = True
    for i, a in enumerate(Y):
        for b in Y[i + 1:]:
            mask |= _interval_mask(d, a, b)
    return [int(v) for v in np.flatnonzero(mask)]


@dataclass
class CoarseIntersection:
    empty: bool
    diameter: float
    vertices: list

    def to_dict(self):
        return {"empty": self.empty, "diameter": None if self.empty else self.diameter,
                "size": len(self.vertices)}


def coarse_intersection(d, A, B, C):
    """The set N_C(A) ∩ N_C(B) together with its diameter."""
    if not _as_set(A) or not _as_set(B):
        raise ValueError("empty vertex set")
    mask = (distance_to_set(d, A) <= C + TOL) & (distance_to_set(d, B) <= C + TOL)
    verts = [int(v) for v in np.flatnonzero(mask)]
    if not verts:
        return CoarseIntersection(True, math.nan, [])
    return CoarseIntersection(False, set_diameter(d, verts), verts)


def coarse_intersection_diameter(d, A, B, C):
    """Diameter of N_C(A) ∩ N_C(B), or ``None`` when the intersection is empty."""
    ci = coarse_intersection(d, A, B, C)
    return None if ci.empty else ci.diameter


def coarse_components(d, verts, scale):
    """Components of ``verts`` under the relation d(u, v) <= scale."""
    verts = _as_set(verts)
    comps = []
    seen = set()
    for v in verts:
        if v in seen:
            continue
        comp = [v]
        seen.add(v)
        stack = [v]
        while stack:
            u = stack.pop()
            for w in verts:
                if w not in seen and d[u, w] <= scale + TOL:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps
