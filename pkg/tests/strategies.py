"""Hypothesis strategies for graphs and signatures."""

from hypothesis import strategies as st

from hhs.metrics import WeightedGraph
from hhs.signature import Domain, HhsSignature


@st.composite
def connected_graphs(draw, min_n=1, max_n=12, weighted=False):
    n = draw(st.integers(min_n, max_n))
    edges = []
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        w = draw(st.floats(0.25, 4.0)) if weighted else 1.0
        edges.append((u, v, w))
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n))
    for a, b in extra:
        if a != b:
            edges.append((a, b, draw(st.floats(0.25, 4.0)) if weighted else 1.0))
    return WeightedGraph(n, edges)


@st.composite
def signatures(draw, min_n=2, max_n=7):
    """Random signatures with a top element 0; relations are not guaranteed valid."""
    n = draw(st.integers(min_n, max_n))
    nest = []
    for v in range(1, n):
        parents = draw(st.lists(st.integers(0, v - 1), min_size=1, max_size=2, unique=True))
        nest += [(v, p) for p in parents]
    sig = HhsSignature([Domain(i, True) for i in range(n)], nest, (), 0, n)
    cand = [(a, b) for a in range(1, n) for b in range(a + 1, n) if not sig.comparable(a, b)]
    orth = draw(st.lists(st.sampled_from(cand), unique=True)) if cand else []
    flags = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return HhsSignature([Domain(i, flags[i] or i == 0) for i in range(n)], nest, orth, 0, n)
