"""Command line entry point ``hhs``.

Every command prints one canonical report document (or writes it to
``--out``).  Exit codes: 0 pass, 1 fail with witness, 2 structural or input
error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io
from .errors import HhsError, InconclusiveError, StructuralError


def _domains(sig, text):
    out = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        out.append(int(tok) if tok.lstrip("-").isdigit() else sig.by_label(tok))
    for v in out:
        sig._check_id(v)
    return out


def _groups(sig, text):
    """``A1,B1;A2,B2`` or a JSON file holding a list of lists."""
    if text.endswith(".json"):
        doc = io.read_document(text)
        groups = doc.get("sets", doc) if isinstance(doc, dict) else doc
        return [[int(v) if isinstance(v, int) else sig.by_label(v) for v in g] for g in groups]
    return [_domains(sig, g) for g in text.split(";") if g.strip()]


def _vertices(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise StructuralError(f"vertex list must be integers: {text!r}") from exc


def _peripherals(path):
    from .horocusp import PeripheralSystem

    doc = io.read_document(path)
    if isinstance(doc, list):
        return PeripheralSystem(doc)
    return PeripheralSystem(doc["sets"], float(doc.get("C", 1.0)), doc.get("labels"))


def _cosets(path):
    from .transforms import CosetSpec

    doc = io.read_document(path)
    items = doc["cosets"] if isinstance(doc, dict) else doc
    return [CosetSpec.from_dict(c) for c in items]


def _status(ok):
    return "pass" if ok else "fail"


# -- command handlers: each returns (status, result, thresholds) ---------------------


def cmd_sig(args):
    from .signature import check_action, validate_signature

    sig = io.load_signature(args.sig)
    if args.action == "show":
        rel = {}
        from .signature import relation_of

        for v in sig.ids:
            for w in sig.ids:
                if v < w:
                    rel[f"{sig.label(v)},{sig.label(w)}"] = relation_of(sig, v, w)
        return "pass", {"signature": sig.to_dict(), "relations": rel}, {}
    rep = validate_signature(sig)
    result = {"validation": rep.to_dict()}
    ok = rep.ok
    if sig.action is not None:
        act = check_action(sig)
        result["action"] = act.to_dict()
        ok &= act.ok
    return _status(ok), result, {}


def cmd_metrics(args):
    from .metrics import closest_point_projection, four_point_delta, quasiconvexity_constant

    g = io.load_graph(args.graph)
    d = g.distances()
    if args.action == "delta":
        limit = None if args.exact else args.limit
        res = four_point_delta(d, exhaustive_limit=limit, samples=args.samples, seed=args.seed, workers=args.workers)
        return "pass", res.to_dict(), {"exhaustive_limit": limit, "samples": args.samples}
    subset = _vertices(args.subset)
    if args.action == "qc":
        some = quasiconvexity_constant(g, d, subset)
        every = quasiconvexity_constant(g, d, subset, strict=True)
        return "pass", {"constant": every if args.strict else some,
                        "mode": "strict" if args.strict else "some-geodesic",
                        "some_geodesic": some, "every_geodesic": every}, {}
    proj = closest_point_projection(d, subset, args.vertex)
    return "pass", {"vertex": args.vertex, "projection": proj, "slack": 1}, {}


def cmd_model(args):
    from .model import gate, product_region, verify_axioms

    m = io.load_model(args.model)
    if args.action == "verify":
        rep = verify_axioms(m)
        return _status(rep.ok), rep.to_dict(), {"E": m.E}
    if args.action == "region":
        w = _domains(m.sig, args.domain)[0]
        reg = product_region(m, w)
        return "pass", {"domain": w, **reg.to_dict()}, {"E": m.E}
    res = gate(m, _vertices(args.subset), args.vertex)
    return "pass", res.to_dict(), {"E": m.E}


def cmd_horoball(args):
    from .horocusp import build_horoball, default_depth, verify_distance_formula

    g = io.load_graph(args.graph)
    depth = args.depth if args.depth is not None else default_depth(float(g.distances().max()) if g.n else 0.0)
    h = build_horoball(g, depth)
    if args.action == "build":
        return "pass", {"depth": depth, "graph": h.graph.to_dict()}, {"depth": depth}
    rep = verify_distance_formula(h)
    ok = rep.c_observed <= args.bound
    return _status(ok), rep.to_dict(), {"depth": depth, "bound": args.bound}


def cmd_cusp(args):
    from .horocusp import boundary_proximity_profile, build_cusped_space

    g = io.load_graph(args.graph)
    per = _peripherals(args.peripherals)
    cs = build_cusped_space(g, per, args.depth)
    thresholds = {"C": per.C, "depths": [h.depth for h in cs.horoballs]}
    if args.action == "build":
        return "pass", cs.to_dict(), thresholds
    samples = args.samples
    rep = boundary_proximity_profile(cs, args.peripheral, args.basepoint, samples, args.tolerance)
    thresholds["tolerance"] = args.tolerance
    return _status(rep.monotone), rep.to_dict(), thresholds


def cmd_boundary(args):
    from .boundary import build_boundary_complex, components, eyries, is_join

    sig = io.load_signature(args.sig)
    bc = build_boundary_complex(sig)
    if args.action == "build":
        return "pass", bc.to_dict(), {}
    if args.action == "components":
        return "pass", {"components": [c.to_dict() for c in components(bc)]}, {}
    if args.action == "join":
        split = is_join(bc)
        return "pass", {"join": split is not None,
                        "split": None if split is None else [list(split[0]), list(split[1])]}, {}
    H = _domains(sig, args.subset) if args.subset else list(sig.unbounded)
    rep = eyries(sig, H)
    return _status(rep.valid), rep.to_dict(), {}


def cmd_transform(args):
    from .transforms import (add_hyperbolically_embedded, build_cusp_signature,
                             detect_isolated_orthogonality, electrify_maximal)

    if args.action == "electrify":
        m = io.load_model(args.input)
        return "pass", {"graph": electrify_maximal(m).to_dict()}, {"E": m.E}
    if args.action == "add-cosets":
        m = io.load_model(args.input)
        B = None if args.B in (None, "auto") else float(args.B)
        sig, rep = add_hyperbolically_embedded(m, _cosets(args.coset), B, tolerance=args.tolerance)
        return "pass", {"signature": sig.to_dict(), "provenance": rep}, {"B": rep["B"], "E": m.E}
    sig = io.load_signature(args.input)
    if args.action == "isolate":
        res = detect_isolated_orthogonality(sig, args.limit)
        return _status(res.found), res.to_dict(), {"search_limit": args.limit}
    if args.family:
        fam = _domains(sig, args.family)
    else:
        res = detect_isolated_orthogonality(sig, args.limit)
        if not res.found:
            from .errors import IsolationError

            raise IsolationError("no isolating family exists", res.witness)
        fam = res.family
    return "pass", build_cusp_signature(sig, fam).to_dict(), {"search_limit": args.limit}


def cmd_classify(args):
    from .classify import classify_geometry

    sig = io.load_signature(args.sig)
    model = io.load_model(args.model) if args.model else None
    v = classify_geometry(sig, model=model)
    return "pass", v.to_dict(), {}


def cmd_quotient(args):
    from .boundary import build_boundary_complex
    from .classify import quotient_boundary, rel_hyp_boundary_check

    sig = io.load_signature(args.sig)
    groups = _groups(sig, args.peripherals)
    bc = build_boundary_complex(sig)
    qc = quotient_boundary(bc, groups)
    cert = rel_hyp_boundary_check(sig, None, groups)
    return _status(cert.certified), {"quotient": qc.to_dict(), "certificate": cert.to_dict()}, {}


def cmd_thick(args):
    from .classify import ThickParams, thick_chain_audit

    g = io.load_graph(args.graph)
    per = _peripherals(args.peripherals)
    params = ThickParams(args.C, args.threshold, args.tau)
    rep = thick_chain_audit(g, per.sets, params)
    ok = rep.certified if args.tau is None else rep.strong["certified"]
    return _status(ok), rep.to_dict(), {"C": args.C, "threshold": rep.threshold, "tau": args.tau}


def cmd_fixture(args):
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise StructuralError(f"fixture parameter must be key=value, got {item!r}")
        k, v = item.split("=", 1)
        params[k] = v
    docs = io.generate_fixture(args.name, params, args.seed)
    if args.dir:
        out = Path(args.dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, doc in docs.items():
            io.write_document(out / name, doc)
    return "pass", {"fixture": args.name, "parameters": params, "files": sorted(docs),
                    "digests": {k: io.digest(v) for k, v in sorted(docs.items())},
                    "documents": None if args.dir else docs}, {}


def cmd_pipeline(args):
    from .pipeline import run_pipeline

    doc = run_pipeline(args.config, seed=args.seed, workers=args.workers)
    return doc["status"], doc, doc.get("thresholds", {})


HANDLERS = {"sig": cmd_sig, "metrics": cmd_metrics, "model": cmd_model, "horoball": cmd_horoball,
            "cusp": cmd_cusp, "boundary": cmd_boundary, "transform": cmd_transform,
            "classify": cmd_classify, "quotient": cmd_quotient, "thick": cmd_thick,
            "fixture": cmd_fixture, "pipeline": cmd_pipeline}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--tolerance", type=float, default=0.0)
    common.add_argument("--out", help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="hhs", description="Finite hierarchically hyperbolic structures toolkit.",
                                parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    s = add("sig", help="validate or show a signature")
    s.add_argument("action", choices=["validate", "show"])
    s.add_argument("sig")

    s = add("metrics", help="hyperbolicity, quasiconvexity and projections on a graph")
    s.add_argument("action", choices=["delta", "qc", "project"])
    s.add_argument("graph")
    s.add_argument("--exact", action="store_true", help="always enumerate every quadruple")
    s.add_argument("--limit", type=int, default=60)
    s.add_argument("--samples", type=int, default=10**6)
    s.add_argument("--subset", default="")
    s.add_argument("--strict", action="store_true")
    s.add_argument("--vertex", type=int, default=0)

    s = add("model", help="verify axioms, product regions and gates")
    s.add_argument("action", choices=["verify", "region", "gate"])
    s.add_argument("model")
    s.add_argument("--domain", default="0")
    s.add_argument("--subset", default="")
    s.add_argument("--vertex", type=int, default=0)

    s = add("horoball", help="build a horoball or check its distance formula")
    s.add_argument("action", choices=["build", "verify"])
    s.add_argument("graph")
    s.add_argument("--depth", type=int)
    s.add_argument("--bound", type=float, default=1.0, help="largest acceptable formula deviation")

    s = add("cusp", help="cusped spaces and boundary proximity")
    s.add_argument("action", choices=["build", "proximity"])
    s.add_argument("graph")
    s.add_argument("--peripherals", required=True)
    s.add_argument("--depth", type=int)
    s.add_argument("--peripheral", type=int, default=0)
    s.add_argument("--basepoint", type=int, default=0)
    s.add_argument("--samples", type=int)

    s = add("boundary", help="class-level simplicial boundary")
    s.add_argument("action", choices=["build", "join", "eyries", "components"])
    s.add_argument("sig")
    s.add_argument("--subset", default="")

    s = add("transform", help="electrify, add cosets, isolate orthogonality, cusp signature")
    s.add_argument("action", choices=["electrify", "add-cosets", "isolate", "cusp-sig"])
    s.add_argument("input")
    s.add_argument("--coset")
    s.add_argument("--B", default="auto")
    s.add_argument("--family", default="")
    s.add_argument("--limit", type=int, default=20)

    s = add("classify", help="wide / thick / rel-hyp verdict")
    s.add_argument("sig")
    s.add_argument("--model")

    s = add("quotient", help="collapse peripheral limit sets")
    s.add_argument("sig")
    s.add_argument("--peripherals", required=True, help="'A1,B1;A2,B2' or a JSON file")

    s = add("thick", help="coarse cover and thick-chain audit")
    s.add_argument("graph")
    s.add_argument("--peripherals", required=True)
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--tau", type=float)
    s.add_argument("--threshold", type=float)

    s = add("fixture", help="generate a named fixture")
    s.add_argument("name", choices=list(io.FIXTURES))
    s.add_argument("--param", action="append", help="key=value")
    s.add_argument("--dir", help="write the fixture files into this directory")

    s = add("pipeline", help="run a configured sequence of stages")
    s.add_argument("config")
    return p


PATH_ARGS = ("sig", "graph", "model", "input", "peripherals", "coset", "config", "dir")


def _input_paths(args):
    paths = []
    for k in PATH_ARGS:
        v = getattr(args, k, None)
        if v and Path(v).is_file():
            paths.append(v)
    return paths


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "workers") + PATH_ARGS}
    try:
        status, result, thresholds = HANDLERS[args.command](args)
    except InconclusiveError as exc:
        status, result, thresholds = "inconclusive", {"error": str(exc)}, {}
    except HhsError as exc:
        status = "fail" if exc.exit_code == 1 else "structural"
        result = {"error": str(exc), "type": type(exc).__name__}
        witness = getattr(exc, "witness", None) or getattr(exc, "report", None)
        if witness is not None:
            result["witness"] = witness
        thresholds = {}
    except (OSError, ValueError, KeyError) as exc:
        status, result, thresholds = "structural", {"error": str(exc), "type": type(exc).__name__}, {}
    thresholds = {**thresholds, "tolerance": args.tolerance}
    label = args.command + (f" {args.action}" if hasattr(args, "action") else "")
    report = io.ReportDocument(label, status, result, io.inputs_digest(_input_paths(args), params),
                               thresholds, args.seed)
    text = report.dumps()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
