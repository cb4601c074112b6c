"""Realized finite models: a signature plus spaces, projections and relative projections.

Distances between projection images are set distances: ``d_W(A, B)`` is the
minimum of ``d_W(a, b)`` over ``a ∈ A, b ∈ B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product

import numpy as np

from .errors import StructuralError
from .metrics import (TOL, WeightedGraph, closest_point_projection, geodesic_maximin_from,
                      quasiconvexity_constant, set_diameter)
from .signature import AxiomCheck, HhsSignature, validate_signature

MAX_WITNESSES = 10
PR_FAMILY_LIMIT = 3

AXIOMS = (
    (1, "projections"),
    (2, "nesting"),
    (3, "orthogonality"),
    (4, "transversality"),
    (5, "finite_complexity"),
    (6, "containers"),
    (7, "uniqueness"),
    (8, "bounded_geodesic_image"),
    (9, "large_links"),
    (10, "consistency"),
    (11, "partial_realization"),
)


class RealizedModel:
    """Signature, ambient graph, per-domain graphs, projections and relative projections.

    ``proj[W][x]`` is the list of ``CW`` vertices that ambient vertex ``x``
    projects to; ``rel_proj[(V, W)]`` is ``ρ^V_W`` as a list of ``CW`` vertices.
    """

    def __init__(self, sig, ambient, spaces, proj, rel_proj, E):
        self.sig = sig
        self.ambient = ambient
        self.spaces = {int(k): v for k, v in spaces.items()}
        self.proj = {int(k): [sorted({int(a) for a in img}) for img in v] for k, v in proj.items()}
        self.rel_proj = {(int(k[0]), int(k[1])): sorted({int(a) for a in v}) for k, v in rel_proj.items()}
        self.E = float(E)
        self._check_structure()

    def _check_structure(self):
        missing = [w for w in self.sig.ids if w not in self.spaces or w not in self.proj]
        if missing:
            raise StructuralError(f"missing space or projection data for domains {missing}")
        for w in self.sig.ids:
            table = self.proj[w]
            if len(table) != self.ambient.n:
                raise StructuralError(f"projection of domain {w} has {len(table)} entries, "
                                      f"expected {self.ambient.n}")
            n = self.spaces[w].n
            for x, img in enumerate(table):
                if not img:
                    raise StructuralError(f"empty projection of vertex {x} to domain {w}")
                if img[-1] >= n or img[0] < 0:
                    raise StructuralError(f"projection of vertex {x} to domain {w} leaves the space")
        needed = self.required_rel_pairs()
        lacking = [p for p in needed if not self.rel_proj.get(p)]
        if lacking:
            raise StructuralError(f"missing relative projections for pairs {lacking}")
        for (v, w), pts in self.rel_proj.items():
            if w not in self.spaces or (pts and pts[-1] >= self.spaces[w].n):
                raise StructuralError(f"relative projection {(v, w)} leaves the space of {w}")

    def required_rel_pairs(self):
        sig = self.sig
        return [(v, w) for v in sig.ids for w in sig.ids
                if sig.properly_nested(v, w) or sig.transverse(v, w)]

    # -- cached geometry -------------------------------------------------

    @cached_property
    def d_ambient(self):
        return self.ambient.distances()

    def d_space(self, w):
        return self.spaces[w].distances()

    @cached_property
    def _to_space(self):
        """``[W]`` → array (ambient n × |CW|): distance from π_W(x) to each vertex of CW."""
        out = {}
        for w in self.sig.ids:
            dw = self.d_space(w)
            out[w] = np.array([dw[img].min(axis=0) for img in self.proj[w]])
        return out

    @cached_property
    def _pair(self):
        """``[W]`` → array (n × n) of d_W(π_W(x), π_W(y))."""
        out = {}
        for w in self.sig.ids:
            m = self._to_space[w]
            out[w] = np.stack([m[:, img].min(axis=1) for img in self.proj[w]], axis=1)
        return out

    def to_space(self, w):
        return self._to_space[w]

    def proj_distance(self, w):
        return self._pair[w]

    def dist_to_rho(self, v, w):
        """Vector over ambient x of d_W(π_W(x), ρ^V_W)."""
        return self._to_space[w][:, self.rel_proj[(v, w)]].min(axis=1)

    def image(self, w, Y=None):
        Y = range(self.ambient.n) if Y is None else Y
        return sorted({a for x in Y for a in self.proj[w][x]})

    # -- serialization ---------------------------------------------------

    def to_dict(self):
        return {
            "signature": self.sig.to_dict(),
            "ambient": self.ambient.to_dict(),
            "spaces": {str(w): self.spaces[w].to_dict() for w in sorted(self.spaces)},
            "proj": {str(w): self.proj[w] for w in sorted(self.proj)},
            "relproj": [[v, w, pts] for (v, w), pts in sorted(self.rel_proj.items())],
            "E": self.E,
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            sig = HhsSignature.from_dict(doc["signature"])
            ambient = WeightedGraph.from_dict(doc["ambient"])
            spaces = {int(k): WeightedGraph.from_dict(v) for k, v in doc["spaces"].items()}
            proj = {int(k): v for k, v in doc["proj"].items()}
            rel = {(int(v), int(w)): pts for v, w, pts in doc.get("relproj", [])}
            return cls(sig, ambient, spaces, proj, rel, doc["E"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, StructuralError):
                raise
            raise StructuralError(f"malformed model document: {exc}") from exc

    def replace(self, **changes):
        """Copy with some fields swapped (used to build mutated fixtures)."""
        fields = dict(sig=self.sig, ambient=self.ambient, spaces=self.spaces, proj=self.proj,
                      rel_proj=self.rel_proj, E=self.E)
        fields.update(changes)
        return RealizedModel(**fields)


# -- axiom verification -----------------------------------------------------------


@dataclass
class AxiomReport:
    checks: dict
    constants: dict
    E: float
    subchecks: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(c.passed for c in self.checks.values())

    def failed(self):
        return [name for name, c in self.checks.items() if not c.passed]

    def failed_subchecks(self):
        return sorted(k for k, v in self.subchecks.items() if not v)

    def to_dict(self):
        return {
            "ok": self.ok,
            "E": self.E,
            "axioms": [{"axiom": num, **self.checks[name].to_dict()} for num, name in AXIOMS],
            "subchecks": dict(sorted(self.subchecks.items())),
            "constants": self.constants,
        }


def _record(check, witness):
    check.passed = False
    if len(check.witnesses) < MAX_WITNESSES:
        check.witnesses.append(witness)


def _projections(m, check, constants, sub):
    E = m.E
    n = m.ambient.n
    dX = m.d_ambient
    coarse = lip = onto = 0.0
    ok_coarse = ok_lip = ok_onto = True
    off = ~np.eye(n, dtype=bool)
    for w in m.sig.ids:
        dw = m.d_space(w)
        for x, img in enumerate(m.proj[w]):
            diam = set_diameter(dw, img)
            coarse = max(coarse, diam)
            if diam > E + TOL:
                ok_coarse = False
                _record(check, {"kind": "coarse_map", "domain": w, "x": x, "diameter": diam})
        if n > 1:
            ratio = np.where(off, m.proj_distance(w) / (dX + 1.0), 0.0)
            k = float(ratio.max())
            lip = max(lip, k)
            if k > E + TOL:
                ok_lip = False
                x, y = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
                _record(check, {"kind": "lipschitz", "domain": w, "x": int(x), "y": int(y), "constant": k})
        gap = m.to_space(w).min(axis=0)
        far = float(gap.max())
        onto = max(onto, far)
        if far > E + TOL:
            ok_onto = False
            _record(check, {"kind": "onto", "domain": w, "vertex": int(np.argmax(gap)), "distance": far})
    constants.update(coarse_map=coarse, lipschitz=lip, coarse_onto=onto)
    sub.update(coarse_map=ok_coarse, lipschitz=ok_lip, coarsely_onto=ok_onto)


def _rho_diameters(m, check, nested):
    sig = m.sig
    for v, w in m.required_rel_pairs():
        if sig.properly_nested(v, w) != nested:
            continue
        diam = set_diameter(m.d_space(w), m.rel_proj[(v, w)])
        if diam > m.E + TOL:
            _record(check, {"rho": [v, w], "diameter": diam})


def _uniqueness(m, check, constants):
    n = m.ambient.n
    dX = m.d_ambient
    sep = np.zeros((n, n))
    for w in m.sig.ids:
        sep = np.maximum(sep, m.proj_distance(w))
    top = int(np.ceil(sep.max())) + 1 if n else 1
    profile = []
    for r in range(0, top + 1):
        mask = sep < r - TOL if r > 0 else sep <= TOL
        profile.append([r, float(dX[mask].max()) if mask.any() else 0.0])
    constants["uniqueness_profile"] = profile
    bad = (sep <= TOL) & (dX > m.E + TOL)
    if bad.any():
        for x, y in np.argwhere(bad)[:MAX_WITNESSES]:
            if x < y:
                _record(check, {"x": int(x), "y": int(y), "distance": float(dX[x, y])})


def _bgi(m, check, constants):
    sig = m.sig
    E = m.E
    margin = 0.0
    for v, w in m.required_rel_pairs():
        if not sig.properly_nested(v, w):
            continue
        gw = m.spaces[w]
        dw = m.d_space(w)
        cost = dw[:, m.rel_proj[(v, w)]].min(axis=1)
        dv = m.proj_distance(v)
        relevant = dv >= E - TOL
        if not relevant.any():
            continue
        sources = m.image(w)
        nbrs = gw.neighbors()
        need = np.full((gw.n, gw.n), -np.inf)
        for a in sources:
            need[a] = geodesic_maximin_from(gw, dw, a, cost, nbrs)
        # worst geodesic radius between the projection sets of x and y
        rowmax = np.stack([need[img].max(axis=0) for img in m.proj[w]])
        pairmax = np.stack([rowmax[:, img].max(axis=1) for img in m.proj[w]], axis=1)
        vals = np.where(relevant, pairmax, -np.inf)
        worst = float(vals.max())
        margin = max(margin, worst)
        if worst > E + TOL:
            for x, y in np.argwhere(vals > E + TOL)[:MAX_WITNESSES]:
                _record(check, {"V": v, "W": w, "x": int(x), "y": int(y), "radius": float(vals[x, y])})
    constants["bgi_radius"] = margin


def _min_cover(sig, w, big):
    if not big:
        return 0
    cands = [c for c in sorted(sig.below(w)) if c != w and any(sig.nested(u, c) for u in big)]
    for k in range(1, len(big) + 1):
        for combo in combinations(cands, k):
            if all(any(sig.nested(u, c) for c in combo) for u in big):
                return k
    return len(big)


def _large_links(m, check, constants):
    sig = m.sig
    E = m.E
    worst = -np.inf
    for w in sig.ids:
        inner = [u for u in sorted(sig.below(w)) if u != w]
        if not inner:
            continue
        code = np.zeros((m.ambient.n, m.ambient.n), dtype=np.int64)
        for i, u in enumerate(inner):
            code |= (m.proj_distance(u) > E + TOL).astype(np.int64) << i
        bound = E * m.proj_distance(w) + E
        need = np.zeros_like(bound)
        for c in np.unique(code):
            big = [u for i, u in enumerate(inner) if (int(c) >> i) & 1]
            need[code == c] = _min_cover(sig, w, big)
        excess = need - bound
        worst = max(worst, float(excess.max()))
        for x, y in np.argwhere(excess > TOL)[:MAX_WITNESSES]:
            _record(check, {"W": w, "x": int(x), "y": int(y), "needed": int(need[x, y]),
                            "allowed": float(bound[x, y])})
    constants["large_links_excess"] = 0.0 if worst == -np.inf else worst


def _consistency(m, check, constants):
    sig = m.sig
    E = m.E
    worst = 0.0
    for v, w in combinations(sig.ids, 2):
        if not sig.transverse(v, w):
            continue
        val = np.minimum(m.dist_to_rho(v, w), m.dist_to_rho(w, v))
        worst = max(worst, float(val.max()))
        for x in np.flatnonzero(val > E + TOL)[:MAX_WITNESSES]:
            _record(check, {"x": int(x), "V": v, "W": w, "value": float(val[x])})
    for u in sig.ids:
        for v in sig.ids:
            if u == v or not sig.nested(u, v):
                continue
            for w in sig.ids:
                if not (sig.properly_nested(v, w) or sig.transverse(v, w)) or sig.orthogonal(w, u):
                    continue
                val = _rho_distance(m, u, v, w)
                worst = max(worst, val)
                if val > E + TOL:
                    _record(check, {"U": u, "V": v, "W": w, "value": val})
    constants["consistency"] = worst


def _rho_distance(m, u, v, w):
    dw = m.d_space(w)
    return float(dw[np.ix_(m.rel_proj[(u, w)], m.rel_proj[(v, w)])].min())


def orthogonal_families(sig, limit=PR_FAMILY_LIMIT):
    fams = [(v,) for v in sig.ids]
    for k in range(2, limit + 1):
        for combo in combinations(sig.ids, k):
            if all(sig.orthogonal(a, b) for a, b in combinations(combo, 2)):
                fams.append(combo)
    return fams


def _side_conditions(m, family):
    """Vector over x: the largest of the ρ-distances the second realization clause asks for."""
    sig = m.sig
    out = np.zeros(m.ambient.n)
    for v in family:
        for w in sig.ids:
            if sig.properly_nested(v, w) or sig.transverse(w, v):
                out = np.maximum(out, m.dist_to_rho(v, w))
    return out


def _partial_realization(m, check, constants):
    E = m.E
    worst = 0.0
    for fam in orthogonal_families(m.sig):
        side = _side_conditions(m, fam)
        # targets are restricted to points already within E of the image; the rest
        # are failures of coarse surjectivity and are reported there
        mats, targets = [], []
        for v in fam:
            tv = m.to_space(v)
            reach = np.flatnonzero(tv.min(axis=0) <= E + TOL)
            mats.append(tv[:, reach])
            targets.append(reach)
        acc = side.reshape((-1,) + (1,) * len(fam))
        for i, mat in enumerate(mats):
            shape = [mat.shape[0]] + [1] * len(fam)
            shape[i + 1] = mat.shape[1]
            acc = np.maximum(acc, mat.reshape(shape))
        best = acc.min(axis=0)
        err = float(best.max()) if best.size else 0.0
        worst = max(worst, err)
        if err > E + TOL:
            for idx in np.argwhere(best > E + TOL)[:MAX_WITNESSES]:
                pts = [int(targets[i][j]) for i, j in enumerate(idx)]
                _record(check, {"family": list(fam), "points": pts, "error": float(best[tuple(idx)])})
    constants["realization_error"] = worst


def verify_axioms(m):
    """Check every axiom exhaustively and report the tightest constants observed."""
    sig_report = validate_signature(m.sig)
    checks = {name: AxiomCheck(name) for _, name in AXIOMS}
    for name in ("nesting", "orthogonality", "finite_complexity", "containers"):
        src = sig_report.checks[name]
        checks[name].passed = src.passed
        checks[name].witnesses = list(src.witnesses)
    constants, sub = {}, {}
    _projections(m, checks["projections"], constants, sub)
    _rho_diameters(m, checks["nesting"], nested=True)
    _rho_diameters(m, checks["transversality"], nested=False)
    _uniqueness(m, checks["uniqueness"], constants)
    _bgi(m, checks["bounded_geodesic_image"], constants)
    _large_links(m, checks["large_links"], constants)
    _consistency(m, checks["consistency"], constants)
    _partial_realization(m, checks["partial_realization"], constants)
    for name, c in checks.items():
        sub.setdefault(name, c.passed)
    sub["projections"] = checks["projections"].passed
    return AxiomReport(checks, constants, m.E, sub)


# -- product regions, gates, hierarchical quasiconvexity ---------------------------


@dataclass
class Region:
    vertices: list
    maximal: bool = False
    warning: str = ""

    def to_dict(self):
        doc = {"vertices": self.vertices, "maximal": self.maximal, "size": len(self.vertices)}
        if self.warning:
            doc["warning"] = self.warning
        return doc


def product_region(m, w):
    """Ambient points whose projections sit E-close to ρ^W_V for all V ⋔ W or W ⊊ V."""
    sig = m.sig
    sig._check_id(w)
    if w == sig.maximal:
        return Region(list(range(m.ambient.n)), maximal=True)
    ok = np.ones(m.ambient.n, dtype=bool)
    for v in sig.ids:
        if sig.transverse(v, w) or sig.properly_nested(w, v):
            ok &= m.dist_to_rho(w, v) <= m.E + TOL
    verts = [int(x) for x in np.flatnonzero(ok)]
    warning = "" if verts else "empty product region (partial realization cannot hold)"
    return Region(verts, warning=warning)


def _targets(m, Y, x):
    """Per domain: closest-point projection of π_W(x) onto π_W(Y)."""
    out = {}
    for w in m.sig.ids:
        img = m.image(w, Y)
        row = m.to_space(w)[x, img]
        lo = row.min()
        out[w] = [a for a, r in zip(img, row) if r <= lo + 1 + TOL]
    return out


@dataclass
class GateResult:
    vertices: list
    kappa: float

    def to_dict(self):
        return {"vertices": self.vertices, "kappa": self.kappa}


def gate(m, Y, x):
    """Points of Y whose projections best match the per-domain closest-point projections of x."""
    Y = sorted(set(int(y) for y in Y))
    if not Y:
        raise ValueError("gate onto an empty set")
    targets = _targets(m, Y, x)
    score = np.zeros(len(Y))
    for w, tgt in targets.items():
        score = np.maximum(score, m.to_space(w)[Y][:, tgt].min(axis=1))
    best = float(score.min())
    return GateResult([y for y, s in zip(Y, score) if s <= best + TOL], best)


@dataclass
class HqcResult:
    k0: float
    realization_defect: float
    profile: list
    per_domain: dict

    def to_dict(self):
        return {"k0": self.k0, "realization_defect": self.realization_defect,
                "profile": self.profile, "per_domain": self.per_domain}


def check_hqc(m, Y, radii=None):
    """Quasiconvexity of every projection image plus the realization profile r ↦ k(r).

    ``realization_defect`` is the profile value at r = E.
    """
    Y = sorted(set(int(y) for y in Y))
    if not Y:
        raise ValueError("empty subset")
    per = {}
    for w in m.sig.ids:
        per[str(w)] = quasiconvexity_constant(m.spaces[w], m.d_space(w), m.image(w, Y))
    k0 = max(per.values())
    reach = np.zeros(m.ambient.n)
    for w in m.sig.ids:
        reach = np.maximum(reach, m.to_space(w)[:, m.image(w, Y)].min(axis=1))
    dY = m.d_ambient[:, Y].min(axis=1)
    if radii is None:
        radii = sorted({0.0, m.E} | {float(r) for r in range(int(np.ceil(reach.max())) + 1)})
    profile = []
    for r in radii:
        mask = reach <= r + TOL
        profile.append([float(r), float(dY[mask].max()) if mask.any() else 0.0])
    at_e = float(dY[reach <= m.E + TOL].max())
    return HqcResult(k0, at_e, profile, per)


@dataclass
class DichotomyResult:
    passed: bool
    witnesses: list

    def to_dict(self):
        return {"passed": self.passed, "witnesses": self.witnesses}


def check_orthogonal_projection_dichotomy(m, Y, B):
    """Large projection to W forces B-coarse surjectivity onto every V ⊥ W."""
    Y = sorted(set(int(y) for y in Y))
    if not Y:
        raise ValueError("empty subset")
    witnesses = []
    for w in m.sig.ids:
        dw = m.d_space(w)
        if set_diameter(dw, m.image(w, Y)) <= B + TOL:
            continue
        for v in sorted(m.sig.orthogonal_to(w)):
            gap = float(m.d_space(v)[:, m.image(v, Y)].min(axis=1).max())
            if gap > B + TOL:
                witnesses.append({"W": w, "V": v, "density_gap": gap})
    return DichotomyResult(not witnesses, witnesses)


def closest_projection_images(m, Y, x):
    """Per-domain closest-point projections of π_W(x) onto π_W(Y) (for gate comparisons)."""
    return {w: closest_point_projection(m.d_space(w), m.image(w, Y), m.proj[w][x][0]) for w in m.sig.ids}
