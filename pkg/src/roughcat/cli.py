"""Command line front end.

Usage::

    roughcat metric validate --in table.json
    roughcat subembed defect --metric c4.json --order a,b,c,d
    roughcat subembed check --metric c4.json --cert cert.json
    roughcat npoint --metric m.json --points 0,1,2,3,4
    roughcat rcat defect --space graph.json --budget 200 --eps 1
    roughcat glue dist --gluing squares.json --a -0.5,0.5 --b 0.5,0.5
    roughcat glue build --space graph.json --vertices 0,3,5,7
    roughcat glue convexify --gluing squares.json
    roughcat limit trend --config trend.json --csv trend.csv

Exit status is 0 when the computed condition holds, 1 when it fails and 2
on bad input.  ``ROUGHCAT_TOL`` sets the default tolerance for ``--tol``.
Output is JSON with every float written in shortest round-trip form, so a
fixed seed reproduces the same bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys

import numpy as np

from .errors import IoError, ParseError, RoughCatError
from .experiments import SpaceSequence, defect_trend, lattice_targets
from .metric_core import METRIC_TOL, GraphSpace, PlaneSpace, path_metric, tuple_distances, validate_metric
from .polygon_gluing import AlreadyConvex, GluedPolygon, build_ngon_embedding, convexify, glued_distance, verify_An
from .rcat_certify import HParams, rcat_space_defect
from .subembedding import TOL, ChainConfig, minimal_defect_ordered, minimal_defect_set, subembedding_slack

PASS, FAIL, BAD_INPUT = 0, 1, 2


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _field(doc, key, path):
    try:
        return doc[key]
    except (KeyError, TypeError):
        raise ParseError(f"{path}: missing field {key!r}") from None


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, allow_nan=False, default=_plain) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"{out}: {exc.strerror}") from None


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return list(v)
    raise TypeError(f"cannot serialise {type(v).__name__}")


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _point(text):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise ParseError(f"bad point {text!r}") from None
    if len(vals) != 2:
        raise ParseError(f"expected x,y, got {text!r}")
    return np.array(vals)


def load_metric(path, tol):
    """A metric table document, or a graph document read through its path metric."""
    doc = _read_json(path)
    if isinstance(doc, dict) and "edges" in doc:
        return path_metric(load_graph(doc, path))
    dist = _field(doc, "dist", path)
    n = doc.get("n")
    if n is not None and np.shape(dist) != (n, n):
        raise ParseError(f"{path}: n={n} but dist has shape {np.shape(dist)}")
    return validate_metric(dist, tol=METRIC_TOL if tol is None else tol, labels=doc.get("labels"))


def load_graph(doc, path):
    try:
        return GraphSpace.from_edges(_field(doc, "vertices", path), _field(doc, "edges", path),
                                     doc.get("coords"), doc.get("name", "graph"))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, RoughCatError):
            raise
        raise ParseError(f"{path}: {exc}") from None


def load_space(path):
    """Graph, gluing or plane document; returns the space and its default vertex list."""
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object")
    if "edges" in doc:
        g = load_graph(doc, path)
        return g, list(range(g.vertices))
    if "q1" in doc:
        return _gluing_doc(doc, path), None
    if "points" in doc:
        return PlaneSpace(), [np.asarray(p, float) for p in doc["points"]]
    raise ParseError(f"{path}: expected a graph, gluing or point-list document")


def _indices(metric, text):
    if text is None:
        return list(range(metric.n))
    return [metric.index(t.strip()) for t in text.split(",")]


def _label(metric, i):
    return metric.labels[i] if metric.labels else int(i)


def _search_args(args):
    return {"seed": args.seed, "restarts": args.restarts}


# subcommands

def cmd_metric_validate(args):
    m = load_metric(args.input, args.tol)
    _emit({"valid": True, "n": m.n}, args.out)
    return PASS


def cmd_subembed_defect(args):
    m = load_metric(args.metric, args.tol)
    idx = _indices(m, args.order)
    res = minimal_defect_ordered(tuple_distances(m, idx), tol=TOL if args.tol is None else args.tol,
                                 **_search_args(args))
    cert = res.certificate.to_json()
    cert["ordering"] = [_label(m, i) for i in idx]
    _emit(cert, args.out)
    ok = args.C is None or res.C <= args.C + res.certificate.tol
    return PASS if ok else FAIL


def cmd_subembed_check(args):
    m = load_metric(args.metric, args.tol)
    doc = _read_json(args.cert)
    order = [m.index(k) for k in _field(doc, "ordering", args.cert)]
    P = np.asarray(_field(doc, "points", args.cert), dtype=float)
    C = float(_field(doc, "C", args.cert) if args.C is None else args.C)
    cfg = ChainConfig(P, np.hypot(*(P[1:] - P[0]).T), ())
    cert = subembedding_slack(tuple_distances(m, order), cfg, C,
                              tol=TOL if args.tol is None else args.tol, ordering=order)
    out = cert.to_json()
    out["ordering"] = [_label(m, i) for i in order]
    out["tested_C"] = C
    out["passed"] = cert.passed
    _emit(out, args.out)
    return PASS if cert.passed else FAIL


def cmd_npoint(args):
    m = load_metric(args.metric, args.tol)
    idx = _indices(m, args.points)
    res = minimal_defect_set(m, idx, n=args.n, sample=args.sample, **_search_args(args))
    out = {"C": res.C, "worst_ordering": [_label(m, i) for i in res.worst_ordering],
           "orderings": len(res.results)}
    if res.results:
        out["certificate"] = res.results[res.worst_ordering].certificate.to_json()
        out["certificate"]["ordering"] = out["worst_ordering"]
    _emit(out, args.out)
    return PASS if args.C is None or res.C <= args.C + TOL else FAIL


def cmd_rcat_defect(args):
    space, points = load_space(args.space)
    if isinstance(space, GluedPolygon):
        raise ParseError(f"{args.space}: triangle sampling needs a graph or point list")
    kw = {} if isinstance(space, GraphSpace) else {"points": points}
    res = rcat_space_defect(space, args.budget, HParams(args.eps), samples=args.samples,
                            seed=args.seed, **kw)
    out = res.report.to_json()
    out["witness"] = res.to_json()["witness"]
    out["triangles"] = res.triangles
    out["C"] = args.C
    out["passed"] = None if args.C is None else res.defect <= args.C + 1e-9
    _emit(out, args.out)
    return FAIL if out["passed"] is False else PASS


def _gluing_doc(doc, path):
    try:
        return GluedPolygon.from_json(doc)
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"{path}: malformed gluing ({exc})") from None


def _gluing(path):
    return _gluing_doc(_read_json(path), path)


def cmd_glue_dist(args):
    g = _gluing(args.gluing)
    _emit(glued_distance(g, _point(args.a), _point(args.b)), args.out)
    return PASS


def cmd_glue_convexify(args):
    res = convexify(_gluing(args.gluing))
    if isinstance(res, AlreadyConvex):
        out = {"already_convex": True, "polygon": {"vertices": np.asarray(res.polygon).tolist()},
               "flat_vertices": res.flat_vertices}
    else:
        out = {"already_convex": False, **res.to_json(),
               "side_residuals": [float(r) for r in res.side_residuals]}
    _emit(out, args.out)
    return PASS


def cmd_glue_build(args):
    space, default = load_space(args.space)
    if args.vertices is None:
        raise ParseError("--vertices is required")
    if isinstance(space, GraphSpace):
        verts = [int(t) for t in args.vertices.split(",")]
    else:
        verts = [_point(t) for t in args.vertices.split(";")]
    emb = build_ngon_embedding(space, verts, C_prime=args.C_prime)
    report = verify_An(emb.descriptor, emb.C_n, samples=args.samples)
    out = emb.to_json()
    out["An"] = report.to_json()
    _emit(out, args.out)
    return PASS if report.passed else FAIL


def cmd_limit_trend(args):
    cfg = _read_json(args.config)
    seq = SpaceSequence.from_json(cfg)
    targets = cfg.get("targets")
    if isinstance(targets, dict):
        targets = lattice_targets(targets.get("count", 10), targets.get("seed", args.seed),
                                  targets.get("spacing", 0.2), targets.get("side", 1.0))
    elif targets is not None:
        targets = [np.asarray(t, float) for t in targets]
    tuples = cfg.get("tuples", len(targets) if targets is not None else 10)
    rep = defect_trend(seq, tuples, targets, seed=args.seed,
                       rcat_budget=cfg.get("rcat_budget", 0), restarts=args.restarts)
    out = rep.to_json()
    out["bound"] = [_finite(b) for b in out["bound"]]
    _emit(out, args.out)
    if args.csv:
        try:
            with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                fh.write(rep.to_csv())
        except OSError as exc:
            raise IoError(f"{args.csv}: {exc.strerror}") from None
    return PASS if rep.passed else FAIL


def _default_tol():
    env = os.environ.get("ROUGHCAT_TOL")
    if env is None:
        return None
    try:
        tol = float(env)
    except ValueError:
        raise ParseError(f"ROUGHCAT_TOL={env!r} is not a number") from None
    return tol


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive, default=None,
                        help=f"tolerance (default $ROUGHCAT_TOL, else {METRIC_TOL:g} for metrics)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write JSON here instead of stdout")

    p = argparse.ArgumentParser(prog="roughcat", description="Rough CAT(0) certificates for finite data.")
    sub = p.add_subparsers(dest="group", required=True)

    metric = sub.add_parser("metric").add_subparsers(dest="action", required=True)
    q = metric.add_parser("validate", parents=[common], help="check the metric axioms")
    q.add_argument("--in", dest="input", required=True)
    q.set_defaults(func=cmd_metric_validate)

    sube = sub.add_parser("subembed").add_subparsers(dest="action", required=True)
    q = sube.add_parser("defect", parents=[common], help="minimal constant of an ordered tuple")
    q.add_argument("--metric", required=True)
    q.add_argument("--order", help="comma separated labels or indices (default: all points)")
    q.add_argument("--restarts", type=int, default=16)
    q.add_argument("--C", type=float, help="fail when the minimal constant exceeds this")
    q.set_defaults(func=cmd_subembed_defect)
    q = sube.add_parser("check", parents=[common], help="re-validate a certificate")
    q.add_argument("--metric", required=True)
    q.add_argument("--cert", required=True)
    q.add_argument("--C", type=float, help="constant to test (default: the certificate's)")
    q.set_defaults(func=cmd_subembed_check)

    q = sub.add_parser("npoint", parents=[common], help="worst constant over all orderings")
    q.add_argument("--metric", required=True)
    q.add_argument("--points", help="comma separated labels or indices (default: all points)")
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--sample", type=int, default=None)
    q.add_argument("--restarts", type=int, default=16)
    q.add_argument("--C", type=float)
    q.set_defaults(func=cmd_npoint)

    rcat = sub.add_parser("rcat").add_subparsers(dest="action", required=True)
    q = rcat.add_parser("defect", parents=[common], help="sampled triangle defect of a space")
    q.add_argument("--space", required=True)
    q.add_argument("--budget", type=int, required=True)
    q.add_argument("--eps", type=float, default=1.0)
    q.add_argument("--samples", type=int, default=17)
    q.add_argument("--C", type=float)
    q.set_defaults(func=cmd_rcat_defect)

    glue = sub.add_parser("glue").add_subparsers(dest="action", required=True)
    q = glue.add_parser("dist", parents=[common], help="distance in two glued polygons")
    q.add_argument("--gluing", required=True)
    q.add_argument("--a", required=True)
    q.add_argument("--b", required=True)
    q.set_defaults(func=cmd_glue_dist)
    q = glue.add_parser("build", parents=[common], help="convex polygon for a closed chain")
    q.add_argument("--space", required=True)
    q.add_argument("--vertices", help="graph ids a,b,c or points x,y;x,y;x,y")
    q.add_argument("--C-prime", dest="C_prime", type=float, default=0.0)
    q.add_argument("--samples", type=int, default=16)
    q.set_defaults(func=cmd_glue_build)
    q = glue.add_parser("convexify", parents=[common], help="convexify a gluing")
    q.add_argument("--gluing", required=True)
    q.set_defaults(func=cmd_glue_convexify)

    lim = sub.add_parser("limit").add_subparsers(dest="action", required=True)
    q = lim.add_parser("trend", parents=[common], help="defect series along a space sequence")
    q.add_argument("--config", required=True)
    q.add_argument("--csv")
    q.add_argument("--restarts", type=int, default=16)
    q.set_defaults(func=cmd_limit_trend)
    return p


def _attach_negative_values(argv):
    # "--a -0.5,0.5" would otherwise read the coordinate as an option
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and re.match(r"-[\d.]", tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_attach_negative_values(argv))
    except SystemExit as exc:
        return BAD_INPUT if exc.code else PASS
    try:
        if args.tol is None:
            args.tol = _default_tol()
        return args.func(args)
    except RoughCatError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return BAD_INPUT


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
