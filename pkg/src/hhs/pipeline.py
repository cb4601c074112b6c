"""Named stage sequences producing one consolidated report.

A config is a JSON document::

    {"stages": ["verify", "add-cosets", "isolate", "classify", "quotient", "cusp"],
     "model": "model.json", "cosets": "cosets.json", "peripherals": "peripherals.json"}

Relative paths are resolved against the config's directory.  ``signature``
may replace ``model`` for signature-only runs.
"""

from __future__ import annotations

from pathlib import Path

from . import io
from .errors import HhsError, InconclusiveError, StructuralError

DEFAULT_STAGES = ("verify", "add-cosets", "isolate", "classify", "quotient", "cusp")


class _Abort(Exception):
    def __init__(self, status, stage, detail):
        super().__init__(stage)
        self.status = status
        self.stage = stage
        self.detail = detail


def run_pipeline(config, seed=0, workers=1):
    """Run the configured stages; any failure stops the run and names the stage."""
    if isinstance(config, (str, Path)):
        base = Path(config).parent
        cfg = io.read_document(config)
        paths = [config]
    else:
        base = Path(".")
        cfg = dict(config)
        paths = []
    stages = list(cfg.get("stages", DEFAULT_STAGES))

    def path(key):
        if key not in cfg:
            raise StructuralError(f"pipeline config lacks {key!r}")
        p = base / cfg[key]
        paths.append(p)
        return p

    state = {"model": None, "sig": None}
    out = {"stages": [], "status": "pass", "thresholds": {}, "seed": seed}
    try:
        if "model" in cfg:
            state["model"] = io.load_model(path("model"))
            state["sig"] = state["model"].sig
        elif "signature" in cfg:
            state["sig"] = io.load_signature(path("signature"))
        else:
            raise StructuralError("pipeline config needs a model or a signature")
        for stage in stages:
            fn = STAGES.get(stage)
            if fn is None:
                raise StructuralError(f"unknown pipeline stage {stage!r}")
            try:
                result = fn(state, cfg, path, out["thresholds"], seed)
            except InconclusiveError as exc:
                raise _Abort("inconclusive", stage, {"error": str(exc)}) from exc
            except HhsError as exc:
                detail = {"error": str(exc), "type": type(exc).__name__}
                witness = getattr(exc, "witness", None) or getattr(exc, "report", None)
                if witness is not None:
                    detail["witness"] = witness
                raise _Abort("fail" if exc.exit_code == 1 else "structural", stage, detail) from exc
            out["stages"].append({"stage": stage, **result})
            if result.get("stop"):
                out["stopped_at"] = stage
                break
            if result.get("passed") is False:
                raise _Abort("fail", stage, {"reason": "stage check failed"})
    except _Abort as exc:
        out["status"] = exc.status
        out["stopped_at"] = exc.stage
        out["error"] = exc.detail
    except HhsError as exc:
        out["status"] = "inconclusive" if isinstance(exc, InconclusiveError) else "structural"
        out["error"] = {"error": str(exc), "type": type(exc).__name__}
    out["inputs_digest"] = io.inputs_digest([p for p in paths if Path(p).is_file()])
    return io.loads(io.dumps(out))


def _need_model(state):
    if state["model"] is None:
        raise StructuralError("this stage needs a realized model")
    return state["model"]


def _verify(state, cfg, path, thresholds, seed):
    from .model import verify_axioms

    rep = verify_axioms(_need_model(state))
    thresholds["E"] = rep.E
    return {"passed": rep.ok, "failed": rep.failed(), "constants": rep.constants}


def _add_cosets(state, cfg, path, thresholds, seed):
    from .cli import _cosets
    from .transforms import add_hyperbolically_embedded

    m = _need_model(state)
    cosets = _cosets(path("cosets"))
    sig, rep = add_hyperbolically_embedded(m, cosets, cfg.get("B"), cfg.get("tolerance", 0.0))
    state["sig"] = sig
    state["cosets"] = cosets
    thresholds["B"] = rep["B"]
    return {"passed": True, "signature": sig.to_dict(), "margin": rep["margin"],
            "agreements": sum(r["agree"] for r in rep["pairs"]), "pairs": len(rep["pairs"])}


def _isolate(state, cfg, path, thresholds, seed):
    from .transforms import detect_isolated_orthogonality

    res = detect_isolated_orthogonality(state["sig"])
    state["family"] = res.family
    return {"passed": res.found, **res.to_dict()}


def _classify(state, cfg, path, thresholds, seed):
    from .classify import classify_geometry

    v = classify_geometry(state["sig"])
    state["verdict"] = v.verdict
    return {"verdict": v.verdict, "stop": v.verdict == "wide", "evidence": v.evidence}


def _quotient(state, cfg, path, thresholds, seed):
    from .boundary import build_boundary_complex, unbounded_closure
    from .classify import quotient_boundary, rel_hyp_boundary_check
    from .transforms import detect_isolated_orthogonality

    sig = state["sig"]
    fam = state.get("family")
    if fam is None:
        fam = detect_isolated_orthogonality(sig).family or []
    groups = [unbounded_closure(sig, i) for i in fam]
    qc = quotient_boundary(build_boundary_complex(sig), groups)
    cert = rel_hyp_boundary_check(sig, None, groups)
    state["quotient"] = qc
    residual = len(qc.nodes) - len(groups)
    return {"passed": cert.certified, "certificate": cert.to_dict(), "quotient": qc.to_dict(),
            "nodes": len(qc.nodes), "peripheral_nodes": len(groups), "residual_nodes": residual}


def _cusp(state, cfg, path, thresholds, seed):
    from .classify import verify_quotient_against_cusp
    from .cli import _peripherals
    from .horocusp import build_cusped_space
    from .metrics import four_point_delta

    m = _need_model(state)
    per = _peripherals(path("peripherals"))
    cs = build_cusped_space(m.ambient, per, cfg.get("depth"))
    dist = cs.graph.distances()
    delta = four_point_delta(dist, seed=seed)
    rep = verify_quotient_against_cusp(cs, state.get("quotient"), cfg.get("basepoint", 0), delta.delta, dist)
    thresholds["C"] = per.C
    thresholds["depths"] = [h.depth for h in cs.horoballs]
    thresholds["delta_exact"] = delta.exact
    return {"passed": rep.passed, "report": rep.to_dict()}


STAGES = {"verify": _verify, "add-cosets": _add_cosets, "isolate": _isolate, "classify": _classify,
          "quotient": _quotient, "cusp": _cusp}
