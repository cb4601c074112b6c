"""Relational skeleton of a hierarchy: domains, nesting, orthogonality.

A signature is immutable once built.  Nesting is accepted in any form
(Hasse edges or a partial closure) and expanded to the full reflexive,
transitive closure in memory; documents always carry the transitive
reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import ActionError, StructuralError, UnknownDomainError

EQUAL = "equal"
NESTED_UP = "nested-up"  # V strictly nested in W
NESTED_DOWN = "nested-down"  # W strictly nested in V
ORTHOGONAL = "orthogonal"
TRANSVERSE = "transverse"


@dataclass(frozen=True)
class Domain:
    id: int
    unbounded: bool = True
    label: str = ""

    def to_dict(self):
        return {"id": self.id, "unbounded": self.unbounded, "label": self.label}


@dataclass(frozen=True)
class GroupActionSpec:
    """Generators given as image lists: ``generators[k][i]`` is the image of domain ``i``."""

    generators: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(tuple(int(x) for x in g) for g in self.generators))

    def to_dict(self):
        return {"generators": [list(g) for g in self.generators]}

    @classmethod
    def from_dict(cls, doc):
        return cls(tuple(doc.get("generators", ())))


def _orth_key(a, b):
    return (a, b) if a <= b else (b, a)


class HhsSignature:
    """Finite index set with nesting and orthogonality relations."""

    def __init__(self, domains, nest=(), orth=(), maximal=0, complexity=1, action=None):
        doms = []
        for d in domains:
            if isinstance(d, Domain):
                doms.append(d)
            elif isinstance(d, dict):
                doms.append(Domain(int(d["id"]), bool(d.get("unbounded", True)), str(d.get("label", ""))))
            else:
                doms.append(Domain(*d))
        doms.sort(key=lambda d: d.id)
        ids = [d.id for d in doms]
        if ids != list(range(len(ids))):
            raise StructuralError(f"domain ids must be exactly 0..{len(ids) - 1}, got {ids}")
        if not doms:
            raise StructuralError("signature has no domains")
        self.domains = tuple(doms)
        self.n = len(doms)
        if maximal not in range(self.n):
            raise StructuralError(f"maximal domain {maximal} is not a known id")
        self.maximal = int(maximal)
        self.complexity = int(complexity)
        if self.complexity < 1:
            raise StructuralError("complexity must be a positive integer")

        raw_nest = set()
        for pair in nest:
            v, w = (int(x) for x in pair)
            self._check_id(v)
            self._check_id(w)
            if v != w:
                raw_nest.add((v, w))
        self._raw_nest = frozenset(raw_nest)
        # reflexive-transitive closure by repeated BFS; n is small
        succ = {i: {w for (v, w) in raw_nest if v == i} for i in range(self.n)}
        up = {}
        for i in range(self.n):
            seen = {i}
            stack = [i]
            while stack:
                u = stack.pop()
                for w in succ[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            up[i] = frozenset(seen)
        self._up = up
        self._down = {i: frozenset(j for j in range(self.n) if i in up[j]) for i in range(self.n)}

        orth_pairs = set()
        self._orth_self = []
        for pair in orth:
            a, b = (int(x) for x in pair)
            self._check_id(a)
            self._check_id(b)
            if a == b:
                self._orth_self.append(a)
            orth_pairs.add(_orth_key(a, b))
        self.orth = frozenset(orth_pairs)
        self._orth_of = {i: frozenset({b for (a, b) in orth_pairs if a == i} | {a for (a, b) in orth_pairs if b == i})
                         for i in range(self.n)}
        self.action = action if action is None or isinstance(action, GroupActionSpec) else GroupActionSpec.from_dict(action)

    # -- basic queries ---------------------------------------------------

    def _check_id(self, v):
        if not isinstance(v, int) or not 0 <= v < len(self.domains):
            raise UnknownDomainError(f"unknown domain id {v!r}")

    def __contains__(self, v):
        return isinstance(v, int) and 0 <= v < self.n

    def __eq__(self, other):
        return isinstance(other, HhsSignature) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.domains, self.orth, frozenset(self.nest_closure())))

    def __repr__(self):
        return f"HhsSignature(n={self.n}, maximal={self.maximal}, orth={sorted(self.orth)})"

    @property
    def ids(self):
        return range(self.n)

    def label(self, v):
        return self.domains[v].label or str(v)

    def by_label(self, label):
        for d in self.domains:
            if d.label == label:
                return d.id
        raise UnknownDomainError(f"no domain labelled {label!r}")

    def is_unbounded(self, v):
        self._check_id(v)
        return self.domains[v].unbounded

    @property
    def unbounded(self):
        return tuple(d.id for d in self.domains if d.unbounded)

    def nested(self, v, w):
        """``v ⊑ w`` (reflexive)."""
        self._check_id(v)
        self._check_id(w)
        return w in self._up[v]

    def properly_nested(self, v, w):
        return v != w and self.nested(v, w)

    def orthogonal(self, v, w):
        self._check_id(v)
        self._check_id(w)
        return _orth_key(v, w) in self.orth

    def comparable(self, v, w):
        return self.nested(v, w) or self.nested(w, v)

    def transverse(self, v, w):
        return v != w and not self.comparable(v, w) and not self.orthogonal(v, w)

    def above(self, v):
        """All W with v ⊑ W."""
        self._check_id(v)
        return self._up[v]

    def below(self, w):
        """All V with V ⊑ w, written 𝔖_w."""
        self._check_id(w)
        return self._down[w]

    def orthogonal_to(self, v):
        self._check_id(v)
        return self._orth_of[v]

    def nest_closure(self):
        return {(v, w) for v in range(self.n) for w in self._up[v] if v != w}

    def nest_reduction(self):
        closure = self.nest_closure()
        out = set()
        for v, w in closure:
            if not any((v, u) in closure and (u, w) in closure for u in range(self.n) if u not in (v, w)):
                out.add((v, w))
        if not out and closure:
            return set(closure)
        return out

    # -- serialization ---------------------------------------------------

    def to_dict(self):
        doc = {
            "domains": [d.to_dict() for d in self.domains],
            "nest": sorted([list(p) for p in self.nest_reduction()]),
            "orth": sorted([list(p) for p in self.orth]),
            "maximal": self.maximal,
            "complexity": self.complexity,
        }
        if self.action is not None:
            doc["action"] = self.action.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(doc["domains"], doc.get("nest", ()), doc.get("orth", ()),
                       doc["maximal"], doc.get("complexity", 1), doc.get("action"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, StructuralError):
                raise
            raise StructuralError(f"malformed signature document: {exc}") from exc

    def with_action(self, action):
        return HhsSignature(self.domains, self.nest_closure(), self.orth, self.maximal, self.complexity, action)

    def relabel(self, perm):
        """Isomorphic copy with domain ``i`` renamed ``perm[i]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise ActionError("relabelling is not a permutation")
        doms = [Domain(perm[d.id], d.unbounded, d.label) for d in self.domains]
        nest = {(perm[v], perm[w]) for v, w in self.nest_closure()}
        orth = {(perm[a], perm[b]) for a, b in self.orth}
        action = None
        if self.action is not None:
            inv = [0] * self.n
            for i, p in enumerate(perm):
                inv[p] = i
            action = GroupActionSpec([[perm[g[inv[j]]] for j in range(self.n)] for g in self.action.generators])
        return HhsSignature(doms, nest, orth, perm[self.maximal], self.complexity, action)


# -- operations --------------------------------------------------------------


def relation_of(sig, v, w):
    """The unique relation between ``v`` and ``w``."""
    sig._check_id(v)
    sig._check_id(w)
    if v == w:
        return EQUAL
    if sig.nested(v, w):
        return NESTED_UP
    if sig.nested(w, v):
        return NESTED_DOWN
    if sig.orthogonal(v, w):
        return ORTHOGONAL
    return TRANSVERSE


def level(sig, w):
    """Number of domains in the longest chain from the maximal domain down to ``w``."""
    sig._check_id(w)
    ups = sorted(sig.above(w), key=lambda u: len(sig.above(u)))
    best = {}
    for u in ups:
        parents = [p for p in sig.above(u) if p != u and p in best]
        best[u] = 1 + max((best[p] for p in parents), default=0)
    return best[w]


@dataclass
class AxiomCheck:
    name: str
    passed: bool = True
    witnesses: list = field(default_factory=list)
    note: str = ""

    def fail(self, witness):
        self.passed = False
        self.witnesses.append(witness)

    def to_dict(self):
        doc = {"name": self.name, "passed": self.passed, "witnesses": self.witnesses}
        if self.note:
            doc["note"] = self.note
        return doc


@dataclass
class ValidationReport:
    checks: dict

    @property
    def ok(self):
        return all(c.passed for c in self.checks.values())

    def failed(self):
        return [name for name, c in self.checks.items() if not c.passed]

    def to_dict(self):
        return {"ok": self.ok, "checks": {k: v.to_dict() for k, v in sorted(self.checks.items())}}


def _longest_chain(sig):
    """Longest ⊑-chain as a list (top first).  Assumes antisymmetry."""
    order = sorted(range(sig.n), key=lambda u: len(sig.above(u)))
    best = {}
    for u in order:
        parents = [p for p in sig.above(u) if p != u]
        if parents:
            p = max(parents, key=lambda q: (len(best[q]), -q))
            best[u] = best[p] + [u]
        else:
            best[u] = [u]
    return max(best.values(), key=len)


def _containers(sig, check):
    for w in range(sig.n):
        sw = sig.below(w)
        for u in sorted(sw):
            need = sorted(v for v in sw if sig.orthogonal(v, u))
            if not need:
                continue
            candidates = [q for q in sw if q != w and all(sig.nested(v, q) for v in need)]
            if not candidates:
                check.fail({"U": u, "W": w, "uncontained": need})


def validate_signature(sig):
    """Check the relational axioms, reporting every failure with a witness."""
    nesting = AxiomCheck("nesting")
    antisym = True
    for v, w in combinations(range(sig.n), 2):
        if sig.nested(v, w) and sig.nested(w, v):
            antisym = False
            nesting.fail({"antisymmetry": [v, w]})
    for v in range(sig.n):
        if not sig.nested(v, sig.maximal):
            nesting.fail({"not_below_maximal": v})
    tops = [v for v in range(sig.n) if sig.above(v) == {v}]
    if tops != [sig.maximal] and antisym:
        others = [t for t in tops if t != sig.maximal]
        if others:
            nesting.fail({"other_maximal": others})

    orth = AxiomCheck("orthogonality")
    for a in sig._orth_self:
        orth.fail({"reflexive": a})
    for a, b in sorted(sig.orth):
        if a != b and sig.comparable(a, b):
            orth.fail({"orthogonal_and_comparable": [a, b]})
    for w in range(sig.n):
        for u in sorted(sig.orthogonal_to(w)):
            for v in sorted(sig.below(w)):
                if v != u and not sig.orthogonal(v, u) and not (v == w):
                    orth.fail({"closure": {"V": v, "W": w, "U": u}})

    transversality = AxiomCheck("transversality", note="derived relation; holds by definition")

    complexity = AxiomCheck("finite_complexity")
    if antisym:
        chain = _longest_chain(sig)
        if len(chain) > sig.complexity:
            complexity.fail({"chain": chain, "length": len(chain), "bound": sig.complexity})
    else:
        complexity.fail({"unavailable": "nesting is not antisymmetric"})

    containers = AxiomCheck("containers")
    _containers(sig, containers)

    checks = {c.name: c for c in (nesting, orth, transversality, complexity, containers)}
    return ValidationReport(checks)


@dataclass
class ActionReport:
    per_generator: list
    orbits: list

    @property
    def ok(self):
        return all(all(g.values()) for g in self.per_generator)

    def to_dict(self):
        return {"ok": self.ok, "per_generator": self.per_generator, "orbits": self.orbits}


def _check_perm(sig, g):
    if len(g) != sig.n or sorted(g) != list(range(sig.n)):
        raise ActionError(f"generator {list(g)} is not a bijection of the {sig.n} domains")


def check_action(sig, action=None):
    """Verify every generator preserves ⊑, ⊥ and the unbounded flag; report unbounded orbits."""
    action = action if action is not None else (sig.action or GroupActionSpec())
    if not isinstance(action, GroupActionSpec):
        action = GroupActionSpec(action)
    closure = sig.nest_closure()
    rows = []
    for g in action.generators:
        _check_perm(sig, g)
        nest_ok = all(((g[v], g[w]) in closure) == ((v, w) in closure)
                      for v in range(sig.n) for w in range(sig.n) if v != w)
        orth_ok = {_orth_key(g[a], g[b]) for a, b in sig.orth} == set(sig.orth)
        flag_ok = all(sig.domains[g[v]].unbounded == sig.domains[v].unbounded for v in range(sig.n))
        rows.append({"nest": nest_ok, "orth": orth_ok, "unbounded": flag_ok})

    parent = list(range(sig.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in action.generators:
        for v in range(sig.n):
            a, b = find(v), find(g[v])
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups = {}
    for v in sig.unbounded:
        groups.setdefault(find(v), []).append(v)
    orbits = sorted(sorted(o) for o in groups.values())
    return ActionReport(rows, orbits)


def apply_perm(g, domains):
    return frozenset(g[v] for v in domains)
