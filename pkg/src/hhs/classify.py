"""Verdicts: relative-hyperbolicity certificates, boundary quotients, wideness and thickness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .boundary import (build_boundary_complex, components, eyries, invariant_components,
                       is_join, subcomplex, unbounded_closure)
from .errors import StructuralError
from .metrics import TOL, coarse_components, coarse_intersection, four_point_delta, gromov_product
from .signature import GroupActionSpec
from .transforms import detect_isolated_orthogonality

TRUST_NOTE = ("quasiconvexity of the stabilizers and the identification of each subset "
              "with a limit set are taken on trust")


# -- relative hyperbolicity on the boundary -------------------------------------


def _generators(sig, action):
    act = action if action is not None else sig.action
    if act is None:
        return []
    if not isinstance(act, GroupActionSpec):
        act = GroupActionSpec(act)
    return [list(g) for g in act.generators]


def translates(subset, gens):
    """Orbit of a domain subset under the group generated by ``gens``."""
    start = frozenset(subset)
    seen = {start}
    queue = [start]
    while queue:
        cur = queue.pop()
        for g in gens:
            img = frozenset(g[v] for v in cur)
            if img not in seen:
                seen.add(img)
                queue.append(img)
    return sorted(seen, key=lambda s: sorted(s))


def _check_downward(sig, bc, lam):
    cls = set(bc.classes)
    for q in lam:
        if q not in cls:
            raise StructuralError(f"domain {q} is not an unbounded domain")
        for v in bc.classes:
            if sig.nested(v, q) and v not in lam:
                raise StructuralError(f"subset {sorted(lam)} is not downward closed: missing {v}")


@dataclass
class BoundaryDecomposition:
    lambdas: list
    translates: list
    residual: list
    conditions: dict
    witnesses: dict
    certified: bool
    note: str = TRUST_NOTE

    def to_dict(self):
        return {"certified": self.certified, "lambdas": self.lambdas,
                "translates": [sorted(t) for t in self.translates], "residual": self.residual,
                "conditions": self.conditions, "witnesses": self.witnesses, "note": self.note}


def rel_hyp_boundary_check(sig, action, lambdas):
    """Check translates of the Λ's are equal or disjoint and the leftover classes are isolated."""
    bc = build_boundary_complex(sig, action)
    gens = _generators(sig, action)
    lams = [frozenset(l) for l in lambdas]
    for lam in lams:
        _check_downward(sig, bc, lam)
    orbit = []
    for lam in lams:
        for t in translates(lam, gens):
            if t not in orbit:
                orbit.append(t)
    witnesses = {}
    cond3 = True
    for a, b in combinations(orbit, 2):
        common = a & b
        if common:
            cond3 = False
            witnesses["3"] = {"translates": [sorted(a), sorted(b)], "domain": min(common)}
            break
    covered = set().union(*orbit) if orbit else set()
    residual = [c for c in bc.classes if c not in covered]
    cond4 = bool(residual)
    if not residual:
        witnesses["4"] = {"reason": "no residual classes"}
    for a, b in sorted(bc.edges):
        if a in residual or b in residual:
            cond4 = False
            witnesses["4"] = {"edge": [a, b]}
            break
    shapes = []
    for lam in lams:
        if not lam:
            shapes.append({"subset": [], "shape": "empty"})
            continue
        sub = subcomplex(bc, lam)
        rep = eyries(sig, lam)
        split = is_join(sub)
        shape = "join" if split else ("single-eyrie" if rep.valid and len(rep.eyries) == 1 else "other")
        shapes.append({"subset": sorted(lam), "shape": shape, "eyries": rep.eyries})
    conditions = {"1": {"status": "trusted", "shapes": shapes}, "2": {"status": "trusted"},
                  "3": {"status": "pass" if cond3 else "fail"}, "4": {"status": "pass" if cond4 else "fail"}}
    return BoundaryDecomposition([sorted(l) for l in lams], orbit, residual, conditions, witnesses,
                                 cond3 and cond4)


# -- the quotient ------------------------------------------------------------------


@dataclass
class QuotientComplex:
    nodes: list
    fiber: dict

    @property
    def peripheral_nodes(self):
        return [n for n in self.nodes if n["kind"] == "peripheral"]

    def fibers(self):
        out = {}
        for c, k in sorted(self.fiber.items()):
            out.setdefault(k, []).append(c)
        return out

    def to_dict(self):
        return {"nodes": self.nodes, "fiber": {str(c): k for c, k in sorted(self.fiber.items())}}


def quotient_boundary(bc, peripherals, labels=None):
    """Collapse each peripheral closure to one node; residual classes stay as they are."""
    closures = [sorted(set(p)) for p in peripherals]
    labels = labels or [f"xi_{i}" for i in range(len(closures))]
    cls = set(bc.classes)
    owner = {}
    for i, p in enumerate(closures):
        for c in p:
            if c not in cls:
                raise StructuralError(f"domain {c} is not a boundary class")
            if c in owner:
                raise StructuralError(f"peripheral closures overlap at class {c}")
            owner[c] = i
    nodes = [{"id": i, "kind": "peripheral", "label": labels[i], "classes": p} for i, p in enumerate(closures)]
    fiber = dict(owner)
    for c in bc.classes:
        if c not in owner:
            k = len(nodes)
            nodes.append({"id": k, "kind": "residual", "label": bc.labels.get(c, str(c)), "classes": [c]})
            fiber[c] = k
    return QuotientComplex(nodes, fiber)


@dataclass
class ConvergenceReport:
    delta: float
    basepoint: int
    sequences: list
    passed: bool

    def to_dict(self):
        return {"delta": self.delta, "basepoint": self.basepoint, "sequences": self.sequences,
                "passed": self.passed}


def marching_sequence(d, P, x0, avoid=()):
    """Points of P at distance ≈ 1, 2, 4, ... from x0, preferring points far from ``avoid``."""
    P = sorted(set(P))
    dist = d[x0, P]
    away = d[:, sorted(set(avoid))].min(axis=1) if len(avoid) else np.zeros(d.shape[0])
    top = float(dist.max())
    seq = []
    t = 1.0
    while t <= top + TOL:
        gap = np.abs(dist - t)
        best = gap.min()
        pick = min((v for v, g in zip(P, gap) if g <= best + TOL), key=lambda v: (-away[v], v))
        if not seq or pick != seq[-1]:
            seq.append(int(pick))
        t *= 2
    return seq


def verify_quotient_against_cusp(cs, qc=None, x0=0, delta=None, dist=None):
    """Gromov products of marching sequences with each peripheral's deep proxy.

    A sequence marching into P must have strictly increasing products with
    ξ_P; products with every other ξ_Q must stay below the coarse-intersection
    diameter of P and Q plus 2δ.
    """
    if qc is not None and len(qc.peripheral_nodes) != len(cs.peripherals.sets):
        raise StructuralError("quotient and cusped space disagree on the number of peripherals")
    dist = dist if dist is not None else cs.graph.distances()
    if delta is None:
        delta = four_point_delta(dist).delta
    da = cs.ambient.distances()
    sets = cs.peripherals.sets
    C = cs.peripherals.C
    deep = [cs.deep_point(p, x0, da) for p in range(len(sets))]
    rows = []
    ok = True
    for p, P in enumerate(sets):
        others = sorted({v for q, s in enumerate(sets) if q != p for v in s})
        seq = marching_sequence(da, P, x0, others)
        own = [gromov_product(dist, x, deep[p], x0) for x in seq]
        increasing = all(b > a + TOL for a, b in zip(own, own[1:]))
        monotone = all(b >= a - 2 * delta - TOL for a, b in zip(own, own[1:]))
        cross = []
        for q in range(len(sets)):
            if q == p:
                continue
            ci = coarse_intersection(da, P, sets[q], C)
            scale = 0.0 if ci.empty else ci.diameter
            vals = [gromov_product(dist, x, deep[q], x0) for x in seq]
            bound = scale + 2 * delta
            cross.append({"peripheral": q, "products": vals, "scale": scale, "bound": bound,
                          "bounded": bool(max(vals, default=0.0) <= bound + TOL)})
        good = increasing and all(c["bounded"] for c in cross)
        ok &= good
        rows.append({"peripheral": p, "sequence": seq, "distances": [float(da[x0, x]) for x in seq],
                     "products": own, "strictly_increasing": increasing, "monotone_within_2delta": monotone,
                     "others": cross, "passed": good})
    return ConvergenceReport(float(delta), int(x0), rows, ok)


# -- verdicts -----------------------------------------------------------------------


@dataclass
class Verdict:
    verdict: str
    evidence: dict = field(default_factory=dict)

    def to_dict(self):
        return {"verdict": self.verdict, "evidence": self.evidence}


def classify_geometry(sig, action=None, model=None):
    """Wide if the boundary is a join, then rel-hyp, then thick of order 1, else indeterminate.

    Every detector runs and its evidence is attached even when another verdict wins.
    """
    bc = build_boundary_complex(sig, action)
    split = is_join(bc)
    comps = components(bc)
    inv = [c for c in invariant_components(bc) if c.positive_dimensional]
    iso = detect_isolated_orthogonality(sig)
    evidence = {"join": None if split is None else [list(split[0]), list(split[1])],
                "components": [c.to_dict() for c in comps],
                "invariant_positive_components": [list(c.classes) for c in inv],
                "isolation": iso.to_dict()}
    rel = None
    if iso.found and iso.family:
        lams = [unbounded_closure(sig, i) for i in iso.family]
        rel = rel_hyp_boundary_check(sig, action, lams)
        evidence["rel_hyp"] = rel.to_dict()
        if model is not None:
            from .model import check_hqc, product_region

            evidence["hqc"] = {}
            for i in iso.family:
                region = product_region(model, i).vertices
                if region:
                    evidence["hqc"][str(i)] = check_hqc(model, region).to_dict()
    thick = split is None and len(comps) >= 2 and bool(inv)
    if split is not None:
        verdict = "wide"
    elif rel is not None and rel.certified:
        verdict = "rel-hyp-candidate"
        if thick:
            evidence["thickness_suppressed"] = "residual classes are isolated"
    elif thick:
        verdict = "thick-order-1-candidate"
    else:
        verdict = "indeterminate"
        if not bc.edges and len(bc.classes) >= 2:
            evidence["note"] = "hyperbolic-like: no orthogonality among unbounded domains"
    return Verdict(verdict, evidence)


def eyrie_wideness(sig, H_domains):
    rep = eyries(sig, H_domains)
    if not rep.valid:
        raise StructuralError(f"eyrie input is inconsistent, witness {list(rep.witness)}")
    return {"wide": len(rep.eyries) >= 2, "eyries": rep.eyries, "count": len(rep.eyries)}


# -- thickness ------------------------------------------------------------------------


@dataclass
class ThickParams:
    C: float = 1.0
    threshold: float = None
    tau: float = None

    def __post_init__(self):
        for name in ("C", "threshold", "tau"):
            val = getattr(self, name)
            if val is not None and val < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass
class ThickReport:
    cover_defect: float
    threshold: float
    chain_edges: list
    chain_connected: bool
    close_pairs: list
    certified: bool
    strong: dict = None

    def to_dict(self):
        doc = {"certified": self.certified, "cover_defect": self.cover_defect, "threshold": self.threshold,
               "chain_edges": self.chain_edges, "chain_connected": self.chain_connected,
               "close_pairs": self.close_pairs}
        if self.strong is not None:
            doc["strong"] = self.strong
        return doc


def thick_chain_audit(g, peripherals, params=None):
    """Coarse cover and thick chains at a finite scale.

    Two peripherals are chained when their C-neighbourhoods meet in a set of
    diameter at least ``threshold`` (default: half the ambient diameter).
    """
    params = params or ThickParams()
    d = g.distances()
    sets = [sorted(set(int(v) for v in p)) for p in peripherals]
    if not sets or any(not s for s in sets):
        raise ValueError("peripherals must be nonempty")
    C = params.C
    threshold = float(d.max()) / 2 if params.threshold is None else params.threshold
    union = sorted({v for s in sets for v in s})
    cover = float(d[:, union].min(axis=1).max())
    k = len(sets)
    edges = []
    inter = {}
    for i, j in combinations(range(k), 2):
        ci = coarse_intersection(d, sets[i], sets[j], C)
        if not ci.empty and ci.diameter >= threshold - TOL:
            edges.append([i, j, ci.diameter])
            inter[i, j] = ci
    adj = np.zeros((k, k))
    for i, j, _ in edges:
        adj[i, j] = adj[j, i] = 1
    ncomp, labels = connected_components(csr_matrix(adj), directed=False)
    hops = shortest_path(csr_matrix(adj), unweighted=True, directed=False)
    close = []
    for i, j in combinations(range(k), 2):
        gap = float(d[np.ix_(sets[i], sets[j])].min())
        if gap <= 3 * C + TOL:
            close.append({"pair": [i, j], "distance": gap, "connected": bool(labels[i] == labels[j]),
                          "chain_length": None if not math.isfinite(hops[i, j]) else int(hops[i, j])})
    connected = ncomp == 1
    certified = cover <= C + TOL and connected and all(c["connected"] for c in close)
    strong = None
    if params.tau is not None:
        tau = params.tau
        longest = max((c["chain_length"] or 0 for c in close), default=0)
        per_edge = []
        for (i, j), ci in sorted(inter.items()):
            parts = coarse_components(d, ci.vertices, tau)
            per_edge.append({"pair": [i, j], "pieces": len(parts)})
        strong = {"tau": tau, "longest_chain": longest,
                  "chains_short": all(c["chain_length"] is not None and c["chain_length"] <= tau for c in close),
                  "intersections_connected": all(e["pieces"] == 1 for e in per_edge), "per_edge": per_edge}
        strong["certified"] = certified and strong["chains_short"] and strong["intersections_connected"]
    return ThickReport(cover, threshold, edges, connected, close, certified, strong)


@dataclass
class MalnormalityReport:
    threshold: float
    flags: list
    exempt: list

    def to_dict(self):
        return {"threshold": self.threshold, "flags": self.flags, "exempt": self.exempt}


def malnormality_diagnostic(d, cosets, C=1.0, threshold=None):
    """Distinct cosets whose C-neighbourhoods overlap in a set wider than ``threshold``."""
    sets = [sorted(set(int(v) for v in c)) for c in cosets]
    if any(not s for s in sets):
        raise ValueError("cosets must be nonempty")
    threshold = float(d.max()) / 2 if threshold is None else threshold
    flags, exempt = [], []
    for i, j in combinations(range(len(sets)), 2):
        if sets[i] == sets[j]:
            exempt.append([i, j])
            continue
        ci = coarse_intersection(d, sets[i], sets[j], C)
        if not ci.empty and ci.diameter > threshold + TOL:
            flags.append({"pair": [i, j], "diameter": ci.diameter})
    return MalnormalityReport(threshold, flags, exempt)
