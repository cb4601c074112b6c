"""Deterministic fixture generators: graphs, signatures and realized models."""

from __future__ import annotations

import numpy as np

from .errors import StructuralError
from .metrics import WeightedGraph
from .signature import Domain, GroupActionSpec, HhsSignature


# -- graphs ---------------------------------------------------------------------


def path_graph(n):
    return WeightedGraph(n, [(i, i + 1, 1.0) for i in range(n - 1)])


def cycle_graph(n):
    return WeightedGraph(n, [(i, (i + 1) % n, 1.0) for i in range(n)])


def grid_graph(rows, cols=None):
    """Unit grid; vertex ``r * cols + c``."""
    cols = rows if cols is None else cols
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, 1.0))
            if r + 1 < rows:
                edges.append((v, v + cols, 1.0))
    return WeightedGraph(rows * cols, edges)


def random_graph(n, seed, extra=None):
    """Random spanning tree plus a random number of chords; always connected."""
    if n < 1:
        raise StructuralError("random graph needs at least one vertex")
    rng = np.random.default_rng(seed)
    edges = set()
    for v in range(1, n):
        edges.add((int(rng.integers(0, v)), v))
    k = int(rng.integers(0, n)) if extra is None else int(extra)
    for _ in range(k):
        a, b = (int(x) for x in rng.integers(0, n, 2))
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return WeightedGraph(n, [(a, b, 1.0) for a, b in sorted(edges)])


def tree_graph(depth, valence):
    """Rooted tree where every internal vertex has ``valence`` children; root is 0."""
    edges = []
    frontier = [0]
    n = 1
    for _ in range(depth):
        nxt = []
        for v in frontier:
            for _ in range(valence):
                edges.append((v, n, 1.0))
                nxt.append(n)
                n += 1
        frontier = nxt
    return WeightedGraph(n, edges)


def product_graph(g, h):
    """Cartesian product; vertex ``(a, b)`` is ``a * h.n + b``."""
    edges = []
    for a in range(g.n):
        edges += [(a * h.n + u, a * h.n + v, w) for u, v, w in h.edges]
    for b in range(h.n):
        edges += [(u * h.n + b, v * h.n + b, w) for u, v, w in g.edges]
    return WeightedGraph(g.n * h.n, edges)


class GluedFlats:
    """Two n×n grids sharing ``glue`` vertices of a side.

    Flat 1 is ``r * n + c``.  Flat 2's cell ``(r, c)`` with ``c == 0`` and
    ``r < glue`` is flat 1's ``(r, n - 1)``; other flat-2 cells get fresh ids.
    """

    def __init__(self, n, glue=1):
        if n < 2 or not 1 <= glue <= n:
            raise StructuralError("glued flats need n >= 2 and 1 <= glue <= n")
        self.n = n
        self.glue = glue
        ids2 = {}
        nxt = n * n
        for r in range(n):
            for c in range(n):
                if c == 0 and r < glue:
                    ids2[r, c] = r * n + (n - 1)
                else:
                    ids2[r, c] = nxt
                    nxt += 1
        self.ids2 = ids2
        self.size = nxt
        self.flat1 = list(range(n * n))
        self.flat2 = sorted(ids2.values())
        edges = set()
        for ident in (lambda r, c: r * n + c, lambda r, c: ids2[r, c]):
            for r in range(n):
                for c in range(n):
                    if c + 1 < n:
                        edges.add(tuple(sorted((ident(r, c), ident(r, c + 1)))))
                    if r + 1 < n:
                        edges.add(tuple(sorted((ident(r, c), ident(r + 1, c)))))
        self.graph = WeightedGraph(self.size, [(a, b, 1.0) for a, b in sorted(edges)])
        self.glue_locus = [r * n + (n - 1) for r in range(glue)]

    def coords(self, flat, v):
        """(row, col) of ambient vertex ``v`` inside ``flat`` (1 or 2), or None."""
        if flat == 1:
            return divmod(v, self.n) if v < self.n * self.n else None
        for rc, ident in self.ids2.items():
            if ident == v:
                return rc
        return None


# -- signatures -----------------------------------------------------------------


def rel_hyp_signature(k=2, peripheral_unbounded=False, action=None):
    """S ⊋ I_j ⊋ {A_j ⊥ B_j} for j = 1..k; S, A_j, B_j unbounded."""
    doms = [Domain(0, True, "S")]
    nest, orth = [], []
    for j in range(1, k + 1):
        i = len(doms)
        doms += [Domain(i, peripheral_unbounded, f"I{j}"), Domain(i + 1, True, f"A{j}"),
                 Domain(i + 2, True, f"B{j}")]
        nest += [(i, 0), (i + 1, i), (i + 2, i)]
        orth.append((i + 1, i + 2))
    return HhsSignature(doms, nest, orth, 0, 3, action)


def block_swap_action(k=2):
    """Generator cycling the k peripheral blocks of :func:`rel_hyp_signature`."""
    n = 1 + 3 * k
    g = list(range(n))
    for j in range(k):
        for t in range(3):
            g[1 + 3 * j + t] = 1 + 3 * ((j + 1) % k) + t
    return GroupActionSpec([g])


def product_signature(s_unbounded=False):
    """{S, A, B} with A, B ⊊ S and A ⊥ B."""
    return HhsSignature([Domain(0, s_unbounded, "S"), Domain(1, True, "A"), Domain(2, True, "B")],
                        [(1, 0), (2, 0)], [(1, 2)], 0, 2)


# -- realized models ------------------------------------------------------------


def cone_off(g, families):
    """``g`` plus a unit edge between every pair of vertices sharing a set in ``families``."""
    extra = set()
    for fam in families:
        fam = sorted(set(fam))
        extra |= {(a, b) for i, a in enumerate(fam) for b in fam[i + 1:]}
    have = {(min(u, v), max(u, v)) for u, v, _ in g.edges}
    return WeightedGraph(g.n, list(g.edges) + [(a, b, 1.0) for a, b in sorted(extra - have)])


def single_domain_model(g):
    from .model import RealizedModel

    sig = HhsSignature([Domain(0, True, "S")], complexity=1)
    return RealizedModel(sig, g, {0: g}, {0: [[x] for x in range(g.n)]}, {}, 1.0)


def product_of_trees_model(depth=2, valence=3, E=1.0):
    """T×T with A, B the tree factors and S the product with every fiber coned off.

    Vertex ``(a, b)`` is ``a * |T| + b``; π_A reads ``a`` and π_B reads ``b``.
    """
    from .model import RealizedModel

    t = tree_graph(depth, valence)
    k = t.n
    amb = product_graph(t, t)
    a_fibers = [[a * k + b for a in range(k)] for b in range(k)]
    b_fibers = [[a * k + b for b in range(k)] for a in range(k)]
    cs = cone_off(amb, a_fibers + b_fibers)
    proj = {0: [[x] for x in range(amb.n)],
            1: [[x // k] for x in range(amb.n)],
            2: [[x % k] for x in range(amb.n)]}
    rel = {(1, 0): a_fibers[0], (2, 0): b_fibers[0]}
    return RealizedModel(product_signature(), amb, {0: cs, 1: t, 2: t}, proj, rel, E)


def _subtree(t, v):
    kids = {v}
    for a, b, _ in sorted(t.edges):
        if a in kids:
            kids.add(b)
    return sorted(kids)


def product_model_mutation(kind, depth=2, valence=3):
    """Product model with one axiom deliberately broken.

    ``kind`` is one of lipschitz, onto, bgi, large_links, consistency,
    partial_realization or uniqueness.
    """
    m = product_of_trees_model(depth, valence)
    t = m.spaces[1]
    k = t.n
    leaves = [v for v in range(k) if len(t.neighbors()[v]) == 1]
    first, last = leaves[0], leaves[-1]
    proj = {w: [list(img) for img in table] for w, table in m.proj.items()}
    if kind == "lipschitz":
        proj[1][first * k + first] = [last]
        return m.replace(proj=proj)
    if kind == "onto":
        tail = WeightedGraph(k + 3, list(t.edges) + [(first, k, 1.0), (k, k + 1, 1.0), (k + 1, k + 2, 1.0)])
        return m.replace(spaces={**m.spaces, 1: tail})
    if kind == "bgi":
        star = [0] + sorted(t.neighbors()[0])
        rel = dict(m.rel_proj)
        rel[(1, 0)] = [a * k + first for a in star]
        return m.replace(rel_proj=rel)
    if kind == "large_links":
        proj[0][first * k + first] = [last * k + last]
        return m.replace(proj=proj)
    if kind == "consistency":
        sig = HhsSignature(list(m.sig.domains), [(1, 0), (2, 0)], [], 0, 2)
        rel = dict(m.rel_proj)
        rel[(1, 2)] = [last]
        rel[(2, 1)] = [last]
        return m.replace(sig=sig, rel_proj=rel)
    if kind == "partial_realization":
        branch = _subtree(t, sorted(t.neighbors()[0])[0])
        keep = [x for x in range(m.ambient.n) if not (x // k in branch and x % k in branch)]
        return _restrict(m, keep)
    if kind == "uniqueness":
        n = m.ambient.n
        g = WeightedGraph(n + 2, list(m.ambient.edges) + [(0, n, 1.0), (n, n + 1, 1.0)])
        for w in proj:
            proj[w] += [list(proj[w][0]), list(proj[w][0])]
        return m.replace(ambient=g, proj=proj)
    raise ValueError(f"unknown mutation {kind!r}")


def _restrict(m, keep):
    pos = {x: i for i, x in enumerate(keep)}
    edges = [(pos[u], pos[v], w) for u, v, w in m.ambient.edges if u in pos and v in pos]
    g = WeightedGraph(len(keep), edges)
    proj = {w: [m.proj[w][x] for x in keep] for w in m.proj}
    # S is an electrified copy of the ambient graph: restrict it alongside
    s_edges = [(pos[u], pos[v], w) for u, v, w in m.spaces[0].edges if u in pos and v in pos]
    proj[0] = [[pos[x]] for x in keep]
    rel = {key: sorted(pos[x] for x in pts if x in pos) if key[1] == 0 else pts
           for key, pts in m.rel_proj.items()}
    return m.replace(ambient=g, spaces={**m.spaces, 0: WeightedGraph(len(keep), s_edges)},
                     proj=proj, rel_proj=rel)


MUTATIONS = ("lipschitz", "onto", "bgi", "large_links", "consistency", "partial_realization")

MUTATION_TARGETS = {
    "lipschitz": ("projections", "lipschitz"),
    "onto": ("projections", "coarsely_onto"),
    "bgi": ("bounded_geodesic_image", "bounded_geodesic_image"),
    "large_links": ("large_links", "large_links"),
    "consistency": ("consistency", "consistency"),
    "partial_realization": ("partial_realization", "partial_realization"),
    "uniqueness": ("uniqueness", "uniqueness"),
}


def glued_flats_signature(k=2):
    """S above A_i (columns) and B_i (rows) of each flat; A_i ⊥ B_i; other pairs transverse."""
    doms = [Domain(0, True, "S")]
    nest, orth = [], []
    for i in range(1, k + 1):
        a, b = len(doms), len(doms) + 1
        doms += [Domain(a, True, f"A{i}"), Domain(b, True, f"B{i}")]
        nest += [(a, 0), (b, 0)]
        orth.append((a, b))
    return HhsSignature(doms, nest, orth, 0, 2)


def glued_flats_model(n=10, glue=1, E=2.0):
    """Two glued n×n flats; S is the ambient graph with each flat coned off.

    A point off a flat projects to that flat's coordinates through its closest
    points in the flat.
    """
    from .model import RealizedModel

    gf = GluedFlats(n, glue)
    amb = gf.graph
    d = amb.distances()
    flats = [gf.flat1, gf.flat2]
    coords = [{v: divmod(v, n) for v in gf.flat1}, {v: rc for rc, v in gf.ids2.items()}]
    path = path_graph(n)
    spaces = {0: cone_off(amb, flats)}
    proj = {0: [[x] for x in range(amb.n)]}
    for i, flat in enumerate(flats):
        a, b = 1 + 2 * i, 2 + 2 * i
        cols, rows = [], []
        for x in range(amb.n):
            row = d[x, flat]
            near = [v for v, r in zip(flat, row) if r <= row.min() + 1e-9]
            rows.append(sorted({coords[i][v][0] for v in near}))
            cols.append(sorted({coords[i][v][1] for v in near}))
        spaces[a], spaces[b] = path, path
        proj[a], proj[b] = cols, rows
    rel = {}
    for i, flat in enumerate(flats):
        for dom in (1 + 2 * i, 2 + 2 * i):
            rel[(dom, 0)] = list(flat)
            for j in range(len(flats)):
                if j != i:
                    for other in (1 + 2 * j, 2 + 2 * j):
                        rel[(dom, other)] = sorted({c for x in flat for c in proj[other][x]})
    model = RealizedModel(glued_flats_signature(2), amb, spaces, proj, rel, E)
    model.flats = flats
    model.glued = gf
    return model
