"""Combinatorial horoballs, nets, approximation graphs and cusped spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import NetError, StructuralError
from .metrics import TOL, WeightedGraph, all_pairs_distances, gromov_product


def default_depth(base_diameter):
    """⌈ln diam⌉ + 3, the level where the farthest pair crosses plus a margin."""
    return max(0, math.ceil(math.log(max(base_diameter, 1.0)))) + 3


@dataclass
class Horoball:
    base: WeightedGraph
    depth: int
    graph: WeightedGraph

    def vertex(self, v, level):
        return level * self.base.n + v

    def coords(self, idx):
        return idx % self.base.n, idx // self.base.n

    @property
    def levels(self):
        return np.repeat(np.arange(self.depth + 1), self.base.n)


def build_horoball(base, depth):
    """Horoball truncated at ``depth`` over a connected unit-length graph."""
    if depth < 1:
        raise ValueError("horoball depth must be at least 1")
    if any(abs(w - 1.0) > TOL for _, _, w in base.edges):
        raise StructuralError("horoball base must have unit edge lengths")
    if base.n == 0:
        raise StructuralError("horoball base is empty")
    all_pairs_distances(base)  # connectivity
    nb = base.n
    hedges = sorted({(min(u, v), max(u, v)) for u, v, _ in base.edges})
    edges = []
    for level in range(depth + 1):
        w = math.exp(-level)
        off = level * nb
        edges += [(off + u, off + v, w) for u, v in hedges]
        if level < depth:
            edges += [(off + v, off + nb + v, 1.0) for v in range(nb)]
    return Horoball(base, depth, WeightedGraph(nb * (depth + 1), edges))


def horoball_distance_estimate(d_base, n, m):
    """2·ln(d·e^{-max(n,m)} + 1) + |m − n|."""
    if n < 0 or m < 0:
        raise ValueError("horoball levels must be non-negative")
    return 2.0 * math.log(d_base * math.exp(-max(n, m)) + 1.0) + abs(m - n)


@dataclass
class FormulaReport:
    c_observed: float
    argmax: tuple
    depth: int
    adequate_depth: bool
    base_diameter: float

    def to_dict(self):
        return {"c_observed": self.c_observed, "argmax": [list(p) for p in self.argmax],
                "depth": self.depth, "adequate_depth": self.adequate_depth,
                "base_diameter": self.base_diameter}


def formula_matrix(h):
    """Distance-formula value for every vertex pair of ``h``."""
    db = all_pairs_distances(h.base)
    lv = h.levels
    idx = np.tile(np.arange(h.base.n), h.depth + 1)
    top = np.maximum.outer(lv, lv)
    return 2.0 * np.log(db[np.ix_(idx, idx)] * np.exp(-top) + 1.0) + np.abs(np.subtract.outer(lv, lv))


def verify_distance_formula(h, dist=None):
    """Largest deviation between true horoball distances and the closed formula."""
    dist = dist if dist is not None else all_pairs_distances(h.graph)
    db = all_pairs_distances(h.base)
    diam = float(db.max()) if db.size else 0.0
    dev = np.abs(dist - formula_matrix(h))
    k = int(np.argmax(dev))
    i, j = divmod(k, dev.shape[0])
    needed = max(0, math.ceil(math.log(max(diam, 1.0)))) + 2
    return FormulaReport(float(dev.max()), (h.coords(i), h.coords(j)), h.depth, h.depth >= needed, diam)


# -- nets and cusped spaces -----------------------------------------------------


def is_coarsely_connected(g, d, P, C):
    P = sorted(set(P))
    if len(P) <= 1:
        return True
    near = np.flatnonzero(d[:, P].min(axis=1) <= C + TOL)
    sub = g.adjacency()[near][:, near]
    _, labels = connected_components(sub, directed=False)
    pos = {int(v): i for i, v in enumerate(near)}
    return len({labels[pos[p]] for p in P}) == 1


def build_net_and_approximation_graph(g, P, C, d=None):
    """Greedy C-net of P (by increasing id) and its approximation graph.

    Returns ``(net, approx)`` with approx vertex ``i`` standing for ``net[i]``;
    net points are joined when their ambient distance is at most 2C.
    """
    d = d if d is not None else g.distances()
    P = sorted(set(int(v) for v in P))
    if not P:
        raise NetError("peripheral set is empty")
    net = []
    for v in P:
        if not net or d[v, net].min() > C + TOL:
            net.append(v)
    edges = [(i, j, 1.0) for i in range(len(net)) for j in range(i + 1, len(net))
             if d[net[i], net[j]] <= 2 * C + TOL]
    approx = WeightedGraph(len(net), edges)
    if len(net) > 1:
        ncomp, _ = connected_components(approx.adjacency(), directed=False)
        if ncomp > 1:
            raise NetError("net scale too coarse: approximation graph is disconnected")
    return net, approx


def check_net(d, P, net, C):
    """Net conditions: pairwise ≥ C apart, 2C-dense in P."""
    P = sorted(set(P))
    sep = all(d[a, b] >= C - TOL for i, a in enumerate(net) for b in net[i + 1:])
    dense = bool((d[np.ix_(P, net)].min(axis=1) <= 2 * C + TOL).all())
    return sep and dense


@dataclass
class PeripheralSystem:
    sets: list
    C: float = 1.0
    labels: list = None

    def __post_init__(self):
        self.sets = [sorted({int(v) for v in s}) for s in self.sets]
        if self.labels is None:
            self.labels = [f"P{i}" for i in range(len(self.sets))]

    def validate(self, g, d=None):
        d = d if d is not None else g.distances()
        for label, s in zip(self.labels, self.sets):
            if not s:
                raise StructuralError(f"peripheral {label} is empty")
            if max(s) >= g.n:
                raise StructuralError(f"peripheral {label} references vertices outside the graph")
            if not is_coarsely_connected(g, d, s, self.C):
                raise NetError(f"peripheral {label} is not {self.C}-coarsely connected")

    def to_dict(self):
        return {"sets": self.sets, "C": self.C, "labels": self.labels}


@dataclass
class CuspedSpace:
    ambient: WeightedGraph
    peripherals: PeripheralSystem
    nets: list
    horoballs: list
    graph: WeightedGraph
    offsets: list
    levels: list = field(default_factory=list)
    origin: list = field(default_factory=list)
    owner: list = field(default_factory=list)

    def horoball_vertex(self, p, net_index, level):
        return self.offsets[p] + level * len(self.nets[p]) + net_index

    def deep_point(self, p, x0, d_ambient=None):
        """Deepest vertex above the net point of peripheral ``p`` nearest to ``x0``."""
        d = d_ambient if d_ambient is not None else self.ambient.distances()
        net = self.nets[p]
        i = min(range(len(net)), key=lambda k: (d[x0, net[k]], net[k]))
        return self.horoball_vertex(p, i, self.horoballs[p].depth)

    def to_dict(self):
        doc = self.graph.to_dict()
        doc.update({"levels": self.levels, "origin": self.origin, "owner": self.owner,
                    "ambient_n": self.ambient.n, "peripherals": self.peripherals.to_dict(),
                    "nets": self.nets, "depths": [h.depth for h in self.horoballs]})
        return doc


def build_cusped_space(g, peripherals, depth=None):
    """Ambient graph with a truncated horoball glued over a net of each peripheral."""
    d = g.distances()
    peripherals.validate(g, d)
    edges = list(g.edges)
    n = g.n
    nets, balls, offsets = [], [], []
    levels = [-1] * g.n
    origin = list(range(g.n))
    owner = [-1] * g.n
    for p, s in enumerate(peripherals.sets):
        net, approx = build_net_and_approximation_graph(g, s, peripherals.C, d)
        if depth is None:
            diam = float(all_pairs_distances(approx).max()) if approx.n > 1 else 0.0
            dp = default_depth(diam)
        else:
            dp = int(depth)
        h = build_horoball(approx, dp)
        offsets.append(n)
        edges += [(n + u, n + v, w) for u, v, w in h.graph.edges]
        edges += [(v, n + i, 1.0) for i, v in enumerate(net)]
        levels += [int(lv) for lv in h.levels]
        origin += [net[i % len(net)] for i in range(h.graph.n)]
        owner += [p] * h.graph.n
        n += h.graph.n
        nets.append(net)
        balls.append(h)
    return CuspedSpace(g, peripherals, nets, balls, WeightedGraph(n, edges), offsets, levels, origin, owner)


@dataclass
class ProximityReport:
    rows: list
    monotone: bool
    tolerance: float
    deep_point: int

    def to_dict(self):
        return {"rows": self.rows, "monotone": self.monotone, "tolerance": self.tolerance,
                "deep_point": self.deep_point}


def boundary_proximity_profile(cs, p, x0, samples=None, tolerance=2.0, dist=None):
    """Gromov products (x | ξ)_{x0} for x in peripheral ``p``, ξ proxied by the deepest vertex.

    ``samples`` may be an explicit vertex list, an integer (evenly spaced by
    distance from x0) or ``None`` for every peripheral vertex.
    """
    dist = dist if dist is not None else cs.graph.distances()
    da = cs.ambient.distances()
    P = cs.peripherals.sets[p]
    if samples is None:
        xs = list(P)
    elif isinstance(samples, int):
        ordered = sorted(P, key=lambda v: (da[x0, v], v))
        idx = np.unique(np.linspace(0, len(ordered) - 1, max(1, samples)).round().astype(int))
        xs = [ordered[i] for i in idx]
    else:
        xs = list(samples)
    xi = cs.deep_point(p, x0, da)
    rows = sorted(({"x": int(x), "distance": float(da[x0, x]), "product": gromov_product(dist, x, xi, x0)}
                   for x in xs), key=lambda r: (r["distance"], r["x"]))
    running = -math.inf
    monotone = True
    for r in rows:
        if r["product"] < running - tolerance - TOL:
            monotone = False
        running = max(running, r["product"])
    return ProximityReport(rows, monotone, tolerance, xi)
