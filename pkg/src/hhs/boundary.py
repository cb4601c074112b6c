"""Class-level simplicial boundary: one vertex class per unbounded domain.

Two classes span an edge when their domains are orthogonal, and simplices are
the cliques.  Bounded domains never appear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import ActionError, StructuralError
from .signature import GroupActionSpec, check_action


@dataclass(frozen=True)
class BoundaryComplex:
    classes: tuple
    edges: frozenset
    action: tuple = ()
    labels: dict = field(default_factory=dict, compare=False, hash=False)

    def neighbors(self, c):
        return sorted(b if a == c else a for a, b in self.edges if c in (a, b))

    def adjacent(self, a, b):
        return (min(a, b), max(a, b)) in self.edges

    def to_dict(self):
        comps = components(self)
        split = is_join(self) if len(self.classes) >= 2 else None
        return {
            "classes": [{"id": c, "label": self.labels.get(c, "")} for c in self.classes],
            "edges": [list(e) for e in sorted(self.edges)],
            "components": [c.to_dict() for c in comps],
            "joins": None if split is None else [list(split[0]), list(split[1])],
        }


def build_boundary_complex(sig, action=None):
    """Orthogonality flag complex on the unbounded domains, with the induced action."""
    classes = tuple(sorted(sig.unbounded))
    cls = set(classes)
    edges = frozenset((a, b) for a, b in sig.orth if a != b and a in cls and b in cls)
    act = action if action is not None else sig.action
    gens = ()
    if act is not None:
        if not isinstance(act, GroupActionSpec):
            act = GroupActionSpec(act)
        report = check_action(sig, act)
        if not report.ok:
            bad = [i for i, row in enumerate(report.per_generator) if not all(row.values())]
            raise ActionError(f"generators {bad} do not preserve the signature relations")
        gens = tuple(tuple(g[c] for c in classes) for g in act.generators)
    labels = {c: sig.label(c) for c in classes}
    return BoundaryComplex(classes, edges, gens, labels)


def subcomplex(bc, keep):
    keep = set(keep)
    classes = tuple(c for c in bc.classes if c in keep)
    edges = frozenset(e for e in bc.edges if e[0] in keep and e[1] in keep)
    return BoundaryComplex(classes, edges, (), {c: bc.labels.get(c, "") for c in classes})


@dataclass(frozen=True)
class Component:
    classes: tuple
    positive_dimensional: bool

    @property
    def isolated(self):
        return not self.positive_dimensional

    def to_dict(self):
        return {"classes": list(self.classes), "positive_dimensional": self.positive_dimensional,
                "kind": "positive-dimensional" if self.positive_dimensional else "isolated vertex class"}


def _union_find(nodes, pairs):
    parent = {v: v for v in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for v in nodes:
        groups.setdefault(find(v), []).append(v)
    return sorted(tuple(sorted(g)) for g in groups.values())


def components(bc):
    """Connected components, ordered by smallest class id."""
    out = []
    for comp in _union_find(bc.classes, bc.edges):
        members = set(comp)
        dim = any(a in members for a, _ in bc.edges)
        out.append(Component(comp, dim))
    return out


def is_join(bc):
    """A split (U1, U2) with every cross pair orthogonal, or ``None``.

    The split puts the complement-graph component of the smallest class on
    the left and everything else on the right.
    """
    if len(bc.classes) < 2:
        return None
    non_edges = [(a, b) for a, b in combinations(bc.classes, 2) if not bc.adjacent(a, b)]
    parts = _union_find(bc.classes, non_edges)
    if len(parts) < 2:
        return None
    left = parts[0]
    right = tuple(sorted(c for p in parts[1:] for c in p))
    return left, right


@dataclass
class EyrieReport:
    eyries: list
    valid: bool
    witness: tuple = ()
    note: str = "input domain subset is taken on trust"

    def to_dict(self):
        return {"eyries": self.eyries, "valid": self.valid,
                "witness": list(self.witness) if self.witness else None, "note": self.note}


def eyries(sig, H_domains):
    """⊑-maximal members of ``H_domains``; valid iff pairwise orthogonal and covering."""
    H = sorted(set(H_domains))
    if not H:
        raise ValueError("eyries of an empty domain subset")
    for v in H:
        sig._check_id(v)
        if not sig.is_unbounded(v):
            raise StructuralError(f"domain {v} in the subset is bounded")
    tops = [v for v in H if not any(w != v and sig.nested(v, w) for w in H)]
    for a, b in combinations(tops, 2):
        if not sig.orthogonal(a, b):
            return EyrieReport(tops, False, (a, b))
    for v in H:
        if not any(sig.nested(v, t) for t in tops):
            return EyrieReport(tops, False, (v,))
    return EyrieReport(tops, True)


def limit_set_subcomplex(sig, bc, Q_closure):
    """Full subcomplex on a subset that is downward closed inside the unbounded domains."""
    Q = set(Q_closure)
    cls = set(bc.classes)
    for q in sorted(Q):
        if q not in cls:
            raise StructuralError(f"domain {q} is not a boundary class")
        for v in bc.classes:
            if sig.nested(v, q) and v not in Q:
                raise StructuralError(f"subset is not downward closed: {v} ⊑ {q} is missing")
    return subcomplex(bc, Q)


def unbounded_closure(sig, q):
    """Unbounded domains nested into ``q``."""
    return sorted(v for v in sig.below(q) if sig.is_unbounded(v))


def invariant_components(bc, action=None):
    """Components mapped onto themselves by every generator."""
    gens = bc.action if action is None else _induced(bc, action)
    pos = {c: i for i, c in enumerate(bc.classes)}
    out = []
    for comp in components(bc):
        members = set(comp.classes)
        if all({g[pos[c]] for c in comp.classes} == members for g in gens):
            out.append(comp)
    return out


def _induced(bc, action):
    if not isinstance(action, GroupActionSpec):
        action = GroupActionSpec(action)
    return tuple(tuple(g[c] for c in bc.classes) for g in action.generators)
