"""Command line interface with stable JSON input and output.

One job per invocation; the same job always produces byte-identical output
(keys sorted, deterministic basis orders, thread count irrelevant).
Exit codes: 0 success, 2 validation error, 3 size budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .branched import h1_sigma, link_det, qa_certify, rank_inequality_check
from .complexes import homology_ranks
from .diagram import ArcMarking, parse_pd
from .errors import SizeBudgetExceeded, ValidationError
from .khovanov import (
    grading_tables,
    hd_homology,
    kh_ranks,
    khr_ranks,
    set_thread_count,
    state_sum_det,
    twisted_total_ranks,
    weight_ss,
)
from .surgery import (
    FramedLinkPresentation,
    PlumbingGraph,
    euler_char_si,
    large_surgery_family,
    plumbing_lspace_check,
    surgered_h1,
)

COMMANDS = ("kh", "khr", "twisted", "hd", "ss", "det", "h1", "qa",
            "rankcheck", "surgery", "plumbing", "lspace", "selftest")


class JobError(ValidationError):
    pass


def _require(payload: dict, key: str):
    if key not in payload:
        raise JobError(f"payload is missing required key {key!r}")
    return payload[key]


def _diagram_from(payload: dict):
    pd = _require(payload, "pd")
    if not isinstance(pd, list) or any(not isinstance(c, list) or len(c) != 4
                                       for c in pd):
        raise JobError("'pd' must be a list of 4-element lists")
    return parse_pd(pd, free_loops=int(payload.get("free_loops", 0)),
                    orientation=payload.get("orientation"))


def _marking_from(payload: dict, d) -> ArcMarking:
    marking = payload.get("marking")
    if marking is None:
        return ArcMarking.zero(d)
    arcs = marking.get("arcs") if isinstance(marking, dict) else None
    if not isinstance(arcs, list):
        raise JobError("'marking' must be {\"arcs\": [0/1, ...]}")
    return ArcMarking(tuple(int(x) for x in arcs))


def _presentation_from(payload: dict) -> FramedLinkPresentation:
    linking = _require(payload, "linking")
    frames = payload.get("frames")
    if frames is not None:
        return FramedLinkPresentation.from_linking_and_frames(linking, frames)
    return FramedLinkPresentation.from_lists(linking)


def _group_json(g) -> dict:
    return {"invariant_factors": list(g.invariant_factors),
            "free_rank": g.free_rank,
            "order": g.order(),
            "pretty": str(g)}


def _rank_payload(theory: str, d, ranks: dict) -> dict:
    tabs = grading_tables(d, ranks)
    return {
        "theory": theory,
        "ranks": {"i": {str(k): v for k, v in tabs["i"].items()},
                  "h": {str(k): v for k, v in tabs["h"].items()}},
        "total": sum(ranks.values()),
    }


def run_job(command: str, payload: dict, basepoint: int = 1,
            max_crossings: int | None = None) -> dict:
    if command == "kh":
        d = _diagram_from(payload)
        return _rank_payload("kh", d, kh_ranks(d, max_crossings=max_crossings))
    if command == "khr":
        d = _diagram_from(payload)
        return _rank_payload(
            "khr", d, khr_ranks(d, basepoint=basepoint, max_crossings=max_crossings))
    if command == "twisted":
        d = _diagram_from(payload)
        m = _marking_from(payload, d)
        ranks = twisted_total_ranks(d, m, basepoint=basepoint,
                                    max_crossings=max_crossings)
        return {"theory": "twisted",
                "ranks": {"total_degree": {str(k): v for k, v in sorted(ranks.items())}},
                "total": sum(ranks.values())}
    if command == "hd":
        d = _diagram_from(payload)
        m = _marking_from(payload, d)
        hd = hd_homology(d, m, basepoint=basepoint, max_crossings=max_crossings)
        per_w: dict[int, int] = {}
        for (p, v), r in hd.items():
            per_w[p] = per_w.get(p, 0) + r
        out = _rank_payload("hd", d, per_w)
        out["bigraded"] = {f"({p},{v})": r for (p, v), r in sorted(hd.items())}
        return out
    if command == "ss":
        d = _diagram_from(payload)
        m = _marking_from(payload, d)
        pages = weight_ss(d, m, basepoint=basepoint, max_crossings=max_crossings)
        return {
            "theory": "ss",
            "pages": [{f"({p},{t})": v for (p, t), v in sorted(table.items())}
                      for table in pages.pages],
            "stabilization_index": pages.stabilization_index,
            "e_infinity": {f"({p},{t})": v
                           for (p, t), v in sorted(pages.e_infinity.items())},
            "total": sum(pages.e_infinity.values()),
        }
    if command == "det":
        d = _diagram_from(payload)
        ds = state_sum_det(d, max_crossings=max_crossings)
        dg = link_det(d)
        if ds != dg:
            raise ArithmeticError(f"det oracles disagree: {dg} vs {ds}")
        return {"det": ds, "oracles": {"state_sum": ds, "goeritz": dg}}
    if command == "h1":
        d = _diagram_from(payload)
        return {"h1": _group_json(h1_sigma(d))}
    if command == "qa":
        d = _diagram_from(payload)
        cert = qa_certify(d, budget=int(payload.get("budget", 20000)),
                          max_crossings=max_crossings)
        if cert is None:
            return {"verdict": "unknown"}
        return {"verdict": "certified", "certificate": cert.to_json()}
    if command == "rankcheck":
        d = _diagram_from(payload)
        rep = rank_inequality_check(d, max_crossings=max_crossings)
        return {"det": rep.det, "khr_mirror_rank": rep.khr_mirror_rank,
                "holds": rep.holds, "equality": rep.equality}
    if command == "surgery":
        pres = _presentation_from(payload)
        v = _require(payload, "v")
        g = surgered_h1(pres, v)
        return {"h1": _group_json(g), "euler": euler_char_si(pres, v)}
    if command == "plumbing":
        return _plumbing_job(payload)
    if command == "lspace":
        if "plumbing" in payload:
            return _plumbing_job(payload)
        if "large_surgery" in payload:
            spec = payload["large_surgery"]
            verdict = large_surgery_family(int(_require(spec, "p")),
                                           int(_require(spec, "q")),
                                           int(_require(spec, "n")))
            return _verdict_json(verdict)
        raise JobError("lspace payload needs 'plumbing' or 'large_surgery'")
    raise JobError(f"unknown command {command!r}")


def _plumbing_job(payload: dict) -> dict:
    spec = _require(payload, "plumbing")
    g = PlumbingGraph.from_lists(_require(spec, "mult"), spec.get("edges", []))
    verdict = plumbing_lspace_check(g)
    out = _verdict_json(verdict)
    out["h1"] = verdict.h1_order
    return out


def _verdict_json(verdict) -> dict:
    return {
        "verdict": verdict.verdict,
        "h1_order": verdict.h1_order,
        "derivation": [{"kind": s.kind, "description": s.description,
                        "orders": list(s.orders)} for s in verdict.derivation],
        "reverified": verdict.reverify(),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="cubekh",
        description="Khovanov-type homology and branched cover arithmetic over GF(2)")
    ap.add_argument("--command", required=True, choices=COMMANDS)
    ap.add_argument("--input", default="-",
                    help="JSON payload file, or - for stdin (default)")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--max-crossings", type=int, default=None)
    ap.add_argument("--basepoint", type=int, default=1)
    ap.add_argument("--json-indent", type=int, default=None)
    args = ap.parse_args(argv)

    set_thread_count(args.threads)

    def emit(obj) -> None:
        print(json.dumps(obj, sort_keys=True, indent=args.json_indent))

    if args.command == "selftest":
        from .acceptance import run_all
        results = run_all()
        failed = [r for r in results if not r.passed]
        emit({"passed": not failed,
              "criteria": [{"number": r.number, "name": r.name,
                            "passed": r.passed, "detail": r.detail}
                           for r in results]})
        return 1 if failed else 0

    try:
        if args.input == "-":
            raw = sys.stdin.read()
        else:
            with open(args.input, "r", encoding="utf-8") as fh:
                raw = fh.read()
        try:
            payload = json.loads(raw) if raw.strip() else {}
        except json.JSONDecodeError as e:
            raise JobError(f"input is not valid JSON: {e}") from e
        if not isinstance(payload, dict):
            raise JobError("input payload must be a JSON object")
        result = run_job(args.command, payload, basepoint=args.basepoint,
                         max_crossings=args.max_crossings)
    except SizeBudgetExceeded as e:
        emit({"error": {"kind": "budget", "detail": str(e)}})
        return 3
    except (ValidationError, OSError, ValueError, TypeError, KeyError) as e:
        emit({"error": {"kind": type(e).__name__, "detail": str(e)}})
        return 2
    except Exception as e:                     # pragma: no cover - safety net
        emit({"error": {"kind": "internal", "detail": f"{type(e).__name__}: {e}"}})
        return 1
    emit(result)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
