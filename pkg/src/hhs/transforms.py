"""Structure-level transformations of signatures and realized models."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import CosetEmbeddingError, InconclusiveError, IsolationError, StructuralError
from .metrics import TOL, WeightedGraph, closest_point_projection, set_diameter
from .model import product_region
from .signature import Domain, HhsSignature

ISOLATION_LIMIT = 20


def electrify_maximal(m):
    """Ambient graph plus unit edges inside every non-maximal product region."""
    have = {(min(u, v), max(u, v)) for u, v, _ in m.ambient.edges}
    extra = set()
    for w in m.sig.ids:
        if w == m.sig.maximal:
            continue
        region = product_region(m, w).vertices
        extra |= {(a, b) for i, a in enumerate(region) for b in region[i + 1:]}
    return WeightedGraph(m.ambient.n, list(m.ambient.edges) + [(a, b, 1.0) for a, b in sorted(extra - have)])


@dataclass
class MaximizedReport:
    passed: bool
    witnesses: list
    exempt: list

    def to_dict(self):
        return {"passed": self.passed, "witnesses": self.witnesses, "exempt": self.exempt}


def check_maximized(sig, exempt=()):
    """Every domain has an unbounded domain nested in it and one orthogonal to it.

    The maximal domain is always exempt from the orthogonality half; ``exempt``
    lists further domains excused from it (for instance added coset domains).
    """
    skip = set(exempt) | {sig.maximal}
    witnesses = []
    for w in sig.ids:
        if not any(sig.is_unbounded(v) for v in sig.below(w)):
            witnesses.append({"domain": w, "missing": "nested"})
        if w not in skip and not any(sig.is_unbounded(v) for v in sig.orthogonal_to(w)):
            witnesses.append({"domain": w, "missing": "orthogonal"})
    return MaximizedReport(not witnesses, witnesses, sorted(skip))


# -- adding coset domains ---------------------------------------------------------


@dataclass
class CosetSpec:
    label: str
    vertices: list
    nested: list = None

    def __post_init__(self):
        self.vertices = sorted({int(v) for v in self.vertices})
        if not self.vertices:
            raise StructuralError(f"coset {self.label} is empty")

    def to_dict(self):
        doc = {"label": self.label, "vertices": self.vertices}
        if self.nested is not None:
            doc["nested"] = self.nested
        return doc

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["label"], doc["vertices"], doc.get("nested"))


def _large_projection(m, v, coset):
    """Largest diam π_U(F(Q)) over U ⊑ V."""
    return max(set_diameter(m.d_space(u), m.image(u, coset)) for u in m.sig.below(v))


def _region_spread(m, v, coset):
    """Largest distance from a point of the product region of V to the coset."""
    region = product_region(m, v).vertices
    if not region:
        return 0.0
    return float(m.d_ambient[np.ix_(region, coset)].min(axis=1).max())


def add_hyperbolically_embedded(m, cosets, B=None, tolerance=0.0, unbounded=False):
    """New signature with one domain per coset, nested into the maximal domain.

    ``V ⊑ Q`` when some ``U ⊑ V`` has ``diam π_U(F(Q)) > B``; the result is
    closed downward.  The product-region containment ``P_V ⊆ N_B(F(Q))`` is
    computed alongside and any disagreement raises
    :class:`CosetEmbeddingError` (measurements within ``tolerance`` of B are
    treated as borderline and do not count).
    """
    sig = m.sig
    B = 3 * m.E + 1 if B is None else float(B)
    if not cosets:
        raise StructuralError("no cosets given")
    for c in cosets:
        if c.vertices[-1] >= m.ambient.n:
            raise StructuralError(f"coset {c.label} references vertices outside the ambient graph")
        if len(c.vertices) == m.ambient.n:
            raise CosetEmbeddingError(f"coset {c.label} is the whole space; it would coincide with the maximal domain")
    old = [v for v in sig.ids if v != sig.maximal]
    base = sig.n
    rows = []
    nested_into = {}
    disagreements = []
    for k, c in enumerate(cosets):
        q = base + k
        direct = set()
        for v in old:
            diam = _large_projection(m, v, c.vertices)
            spread = _region_spread(m, v, c.vertices)
            by_diam = diam > B + TOL
            by_region = spread <= B + TOL
            declared = None if c.nested is None else v in c.nested
            test = by_diam if declared is None else declared
            if test:
                direct.add(v)
            borderline = abs(diam - B) <= tolerance or abs(spread - B) <= tolerance
            agree = by_diam == by_region
            if not agree and not borderline:
                disagreements.append([v, q])
            rows.append({"V": v, "Q": q, "coset": c.label, "projection_diameter": diam,
                         "region_distance": spread, "large_projection": by_diam,
                         "region_contained": by_region, "agree": agree, "borderline": borderline,
                         "declared": declared})
        closed = {u for v in direct for u in sig.below(v)}
        nested_into[q] = closed
        for r in rows:
            if r["Q"] == q:
                r["nested"] = r["V"] in closed
                r["closure_added"] = r["V"] in closed and r["V"] not in direct
    report = {"B": B, "tolerance": tolerance, "pairs": rows, "disagreements": disagreements,
              "margin": _margin(rows, B)}
    if disagreements:
        raise CosetEmbeddingError("coset family not hyperbolically embedded at this scale", report)
    domains = list(sig.domains) + [Domain(base + k, unbounded, c.label or f"Q{k + 1}")
                                   for k, c in enumerate(cosets)]
    nest = [(v, w) for v in sig.ids for w in sig.ids if v != w and sig.nested(v, w)]
    for q, inner in nested_into.items():
        nest.append((q, sig.maximal))
        nest += [(v, q) for v in sorted(inner)]
    probe = HhsSignature(domains, nest, sig.orth, sig.maximal, sig.complexity)
    complexity = max(sig.complexity, _chain_length(probe))
    out = HhsSignature(domains, nest, sig.orth, sig.maximal, complexity)
    report["beta"] = _betas(m, cosets, nested_into, base)
    return out, report


def _margin(rows, B):
    above = [r["projection_diameter"] for r in rows if r["large_projection"]]
    below = [r["projection_diameter"] for r in rows if not r["large_projection"]]
    return {"smallest_passing": min(above) if above else None,
            "largest_failing": max(below) if below else None, "B": B}


def _chain_length(sig):
    memo = {}

    def depth(v):
        if v not in memo:
            memo[v] = 1 + max((depth(u) for u in sig.below(v) if u != v), default=0)
        return memo[v]

    return max(depth(v) for v in sig.ids)


def _betas(m, cosets, nested_into, base):
    """Closest-point projections of ρ^V_S onto π_S(F(Q)) for old V not nested into Q."""
    sig = m.sig
    s = sig.maximal
    ds = m.d_space(s)
    out = []
    for k, c in enumerate(cosets):
        q = base + k
        target = m.image(s, c.vertices)
        for v in sig.ids:
            if v == s or v in nested_into[q]:
                continue
            rho = m.rel_proj[(v, s)]
            pts = sorted({y for r in rho for y in closest_point_projection(ds, target, r)})
            out.append({"V": v, "Q": q, "points": pts})
    return out


# -- isolated orthogonality -------------------------------------------------------


@dataclass
class IsolationResult:
    family: list
    witness: dict = field(default_factory=dict)
    candidates: list = field(default_factory=list)

    @property
    def found(self):
        return self.family is not None

    def to_dict(self):
        return {"found": self.found, "family": self.family, "witness": self.witness or None,
                "candidates": self.candidates}


def _orth_pairs(sig):
    return sorted((a, b) for a, b in sig.orth if a != b)


def _containers(sig, a, b):
    return sorted(i for i in sig.ids if i != sig.maximal and i not in (a, b)
                  and sig.nested(a, i) and sig.nested(b, i))


def verify_isolation(sig, family):
    """``None`` when ``family`` isolates orthogonality, otherwise a witness dict."""
    fam = sorted(set(family))
    if sig.maximal in fam:
        return {"condition": 1, "domain": sig.maximal}
    for a, b in _orth_pairs(sig):
        if not any(i != a and i != b and sig.nested(a, i) and sig.nested(b, i) for i in fam):
            return {"condition": 2, "pair": [a, b]}
    for i, j in combinations(fam, 2):
        shared = sorted(sig.below(i) & sig.below(j))
        if shared:
            return {"condition": 3, "domains": [i, j], "shared": shared[0]}
    return None


def detect_isolated_orthogonality(sig, limit=ISOLATION_LIMIT):
    """Smallest family isolating orthogonality, ties broken lexicographically.

    Raises :class:`InconclusiveError` when more than ``limit`` candidate
    containers would have to be searched.
    """
    pairs = _orth_pairs(sig)
    if not pairs:
        return IsolationResult([])
    options = []
    for a, b in pairs:
        cands = _containers(sig, a, b)
        if not cands:
            return IsolationResult(None, {"pair": [a, b], "reason": "no common container below the maximal domain"})
        options.append(cands)
    pool = sorted({c for opts in options for c in opts})
    if len(pool) > limit:
        raise InconclusiveError(f"isolation search needs {len(pool)} candidate domains, limit is {limit}")
    down = {c: sig.below(c) for c in pool}
    deepest = {"index": -1, "pair": None, "shared": None}

    def search(idx, chosen, budget, found):
        while idx < len(pairs) and any(c in chosen for c in options[idx]):
            idx += 1
        if idx == len(pairs):
            found.add(tuple(sorted(chosen)))
            return
        if budget == 0:
            return
        for c in options[idx]:
            clash = [x for x in chosen if down[c] & down[x]]
            if clash:
                if idx >= deepest["index"]:
                    deepest.update(index=idx, pair=list(pairs[idx]),
                                   shared=min(down[c] & down[clash[0]]))
                continue
            search(idx + 1, chosen | {c}, budget - 1, found)

    for size in range(1, len(pairs) + 1):
        found = set()
        search(0, frozenset(), size, found)
        if found:
            return IsolationResult(list(min(found, key=lambda s: (len(s), s))), candidates=pool)
    witness = {"pair": deepest["pair"] or list(pairs[0]), "shared": deepest["shared"],
               "reason": "every covering choice puts a domain under two containers"}
    return IsolationResult(None, witness, pool)


# -- cusp signatures -------------------------------------------------------------


@dataclass
class CuspSignature:
    maximal: int
    family: list
    labels: dict

    @property
    def index_set(self):
        return [self.maximal] + self.family

    def space_tag(self, i):
        return "electrified-ambient" if i == self.maximal else "horoball"

    def to_signature(self):
        ids = self.index_set
        doms = [Domain(k, True, self.labels.get(i, str(i))) for k, i in enumerate(ids)]
        return HhsSignature(doms, [(k, 0) for k in range(1, len(ids))], (), 0, 2 if len(ids) > 1 else 1)

    def to_dict(self):
        return {"index_set": self.index_set,
                "domains": [{"id": i, "label": self.labels.get(i, ""), "space": self.space_tag(i)}
                            for i in self.index_set],
                "nested": [[i, self.maximal] for i in self.family],
                "transverse": [list(p) for p in combinations(self.family, 2)],
                "orthogonal": []}


def build_cusp_signature(sig, family):
    """{S} ∪ 𝔦 with every I ⊊ S and the members of 𝔦 pairwise transverse."""
    fam = sorted(set(family))
    for i in fam:
        sig._check_id(i)
    witness = verify_isolation(sig, fam)
    if witness is not None:
        raise IsolationError(f"family {fam} does not isolate orthogonality: {witness}", witness)
    labels = {i: sig.label(i) for i in [sig.maximal] + fam}
    return CuspSignature(sig.maximal, fam, labels)
