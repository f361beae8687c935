"""
``ultragraph`` command line.

Every subcommand reads an edge list (``--input``) or draws a random
connected graph (``--random N --seed S``), and writes JSON (canonical) or
CSV to ``--output`` or stdout.  Exit status is 0 on success and 1 on input
errors.  Bound hypotheses that fail are reported as data; with ``--strict``
such a report still gets written but the exit status is 2.
"""

import argparse
import sys

import numpy as np

from . import heat as heat_mod
from .errors import UltragraphError
from .graph_core import (
    augmentation_factor,
    graph_distance,
    minimum_spanning_tree,
    parse_edge_list,
    random_connected_graph,
    subdominant_ultrametric,
)
from .hypergeom import b_coefficient, b_coefficient_hypergeometric, c_sequence
from .perturbation import (
    HypothesisFailed,
    error_bound,
    evaluate_series,
    perturbation_series,
    proposition_bound_check,
)
from .serialize import csv_text, dumps, fmt_float
from .spectral import KINDS, kernel_laplacian, parisi_distance, parisi_operator
from .vr_partition import build_partition, minimize_phi, partition_sweep
from .wavelets import dendrogram, haar_basis, local_wavelet_basis, with_eigenvalues

COMMANDS = ("ultrametric", "partition", "spectrum", "perturb", "heat", "sequences", "report")


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser():
    p = argparse.ArgumentParser(prog="ultragraph", description=__doc__.strip().splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--input", help="edge-list file ('u v w' per line, '#' comments)")
    src.add_argument("--random", type=int, metavar="N", help="use a random connected graph on N vertices")
    common.add_argument("--seed", type=int, default=0, help="seed for --random (default 0)")
    common.add_argument("--output", help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (default json; csv for sequences)")
    common.add_argument("--threads", type=int, default=None, help="worker cap (default: all cores)")
    common.add_argument("--strict", action="store_true", help="exit 2 when a bound hypothesis fails")

    alpha = argparse.ArgumentParser(add_help=False)
    alpha.add_argument("--alpha", type=float, default=1.0, help="kernel exponent (default 1)")

    eps = argparse.ArgumentParser(add_help=False)
    eps.add_argument("--epsilon", default="auto",
                     help="partition threshold, or 'auto' for the smallest minimizer of the sweep")

    s = sub.add_parser("ultrametric", parents=[common], help="graph distance, subdominant ultrametric, dendrogram")
    s.add_argument("--dendrogram", help="also write the dendrogram JSON here")

    s = sub.add_parser("partition", parents=[common, alpha], help="threshold sweep and genus report")
    s.add_argument("--compare", choices=("best", "previous"), default="best",
                   help="sweep comparison rule (default: running minimum)")
    s.add_argument("--no-genus", action="store_true", help="skip the genus report")

    s = sub.add_parser("spectrum", parents=[common, alpha, eps], help="operator eigenvalues")
    s.add_argument("--operator", choices=KINDS, default="graph_distance")
    s.add_argument("--eigenvectors", help="write eigenvectors as CSV here")
    s.add_argument("--wavelets", help="write the Haar-like basis as CSV here (ultrametric operators)")

    s = sub.add_parser("perturb", parents=[common, alpha, eps], help="perturbation series and bounds")
    s.add_argument("--order", type=int, default=8)
    s.add_argument("--t", type=_floats, default=[1e-2, 1e-1], help="comma-separated parameter values")
    s.add_argument("--variant", choices=("paper", "conservative"), default="paper")
    s.add_argument("--constant", type=float, default=1.0, help="bound constant C (default 1)")
    s.add_argument("--target", choices=("subdominant_ultrametric", "parisi_H"), default="subdominant_ultrametric",
                   help="operator reached at t=1 from the graph-distance Laplacian")

    s = sub.add_parser("heat", parents=[common, alpha, eps], help="heat-flow comparison")
    s.add_argument("--u0", default=None, help="file with one value per vertex line, or indicator:LABEL")
    s.add_argument("--t-grid", type=_floats, default=None, help="comma-separated times (default 0 and 32 geometric points)")
    s.add_argument("--constant", type=float, default=1.0, help="bound constant C (default 1)")

    s = sub.add_parser("sequences", parents=[common], help="c and b coefficient tables")
    s.add_argument("--order", type=int, default=10)

    s = sub.add_parser("report", parents=[common, alpha, eps], help="all of the above for one graph")
    s.add_argument("--order", type=int, default=8)
    s.add_argument("--u0", default=None)
    s.add_argument("--constant", type=float, default=1.0)
    return p


def load_graph(args):
    if getattr(args, "random", None) is not None:
        return random_connected_graph(args.random, np.random.default_rng(args.seed))
    if not args.input:
        raise UltragraphError("one of --input or --random is required")
    with open(args.input, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def resolve_epsilon(g, text, threads=None):
    if text == "auto":
        return minimize_phi(g, threads=threads).minimizers[0]
    return float(text)


def load_u0(g, spec):
    if spec is None:
        spec = f"indicator:{g.vertices[0]}"
    if spec.startswith("indicator:"):
        label = spec.split(":", 1)[1]
        if label not in g.index():
            raise UltragraphError(f"unknown vertex {label!r}")
        u0 = np.zeros(g.n)
        u0[g.index()[label]] = 1.0
        return u0
    with open(spec, encoding="utf-8") as fh:
        vals = [float(line) for line in fh if line.strip() and not line.lstrip().startswith("#")]
    if len(vals) != g.n:
        raise UltragraphError(f"{spec}: {len(vals)} values for {g.n} vertices")
    return np.array(vals)


def _write(path, text):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _has_failure(obj):
    if isinstance(obj, dict):
        return bool(obj.get("hypothesis_failed")) or any(_has_failure(v) for v in obj.values())
    if isinstance(obj, (list, tuple)):
        return any(_has_failure(v) for v in obj)
    return isinstance(obj, HypothesisFailed)


# ---------------------------------------------------------------- commands


def cmd_ultrametric(g, args):
    d = graph_distance(g)
    delta = subdominant_ultrametric(d)
    if getattr(args, "dendrogram", None):
        _write(args.dendrogram, dendrogram(delta).to_json() + "\n")
    if args.format == "csv":
        return delta.to_csv()
    return {
        "labels": list(d.labels),
        "distance": d.d,
        "ultrametric": delta.d,
        "tau": augmentation_factor(d, delta) if g.n > 1 else 1.0,
        "mst": [[u, v, w] for u, v, w in minimum_spanning_tree(g)],
    }


def partition_report(g, args):
    compare = getattr(args, "compare", "best")
    if getattr(args, "no_genus", False):
        sweep, gr = minimize_phi(g, threads=args.threads, compare=compare), None
    else:
        sweep, gr = partition_sweep(g, args.alpha, threads=args.threads, compare=compare)
    cand = [r.epsilon for r in sweep.trace]
    clusters_at, tau = {}, {}
    for r in sweep.trace:
        clusters_at[fmt_float(r.epsilon)] = [list(c) for c in r.clusters]
        tau[fmt_float(r.epsilon)] = {"tau_quotient": r.tau_quotient, "tau_clusters": [t for _, t in r.tau_clusters]}
    chosen = sweep.minimizers[0]
    part = build_partition(g, chosen)
    out = {
        "candidates": cand,
        "phi": [r.phi for r in sweep.trace],
        "minimizers": list(sweep.minimizers),
        "clusters_at": clusters_at,
        "quotient_epsilon": chosen,
        "quotient_edges": [[u, v, w] for u, v, w in part.quotient.edges],
        "tau": tau,
    }
    if gr is not None:
        out["genus"] = {
            "augmentation": gr.augmentation,
            "mumford": gr.mumford,
            "epsilon_augmentation": gr.epsilon_augmentation,
            "epsilon_mumford": gr.epsilon_mumford,
        }
    return out


def cmd_partition(g, args):
    out = partition_report(g, args)
    if args.format == "csv":
        return csv_text(["epsilon", "phi"], zip(out["candidates"], out["phi"]))
    return out


def _operator(g, kind, alpha, eps):
    d = graph_distance(g)
    if kind == "graph_distance":
        return kernel_laplacian(d, alpha), d, None
    if kind in ("subdominant_ultrametric", "scaled_ultrametric"):
        delta = subdominant_ultrametric(d)
        L = kernel_laplacian(delta, alpha, kind="subdominant_ultrametric")
        if kind == "scaled_ultrametric":
            L = L.scaled(augmentation_factor(d, delta) ** (-alpha), kind=kind)
        return L, delta, None
    part = build_partition(g, eps)
    inter = "metric" if kind == "parisi_H" else "ultrametric"
    return parisi_operator(d, part, alpha, inter), parisi_distance(d, part, inter), part


def cmd_spectrum(g, args):
    needs_eps = args.operator in ("parisi_H", "parisi_L")
    eps = resolve_epsilon(g, args.epsilon, args.threads) if needs_eps else None
    L, dist, part = _operator(g, args.operator, args.alpha, eps)
    es = L.eigensystem()
    if args.eigenvectors:
        header = ["label"] + [f"v{i}" for i in range(g.n)]
        _write(args.eigenvectors, csv_text(header, ([lab] + list(map(float, row))
                                                   for lab, row in zip(L.labels, es.eigenvectors))))
    if args.wavelets:
        if args.operator == "subdominant_ultrametric":
            basis = with_eigenvalues(haar_basis(dendrogram(dist)), dist, args.alpha)
        elif args.operator == "parisi_L":
            basis = local_wavelet_basis(part, labels=L.labels, dist=dist, alpha=args.alpha)
        else:
            raise UltragraphError("wavelet bases need the subdominant_ultrametric or parisi_L operator")
        _write(args.wavelets, basis.to_csv())
    if args.format == "csv":
        return csv_text(["k", "eigenvalue"], enumerate(map(float, es.eigenvalues)))
    out = {"alpha": args.alpha, "operator": args.operator}
    if eps is not None:
        out["epsilon"] = eps
    out["eigenvalues"] = es.eigenvalues
    return out


def perturb_report(g, args, target=None):
    target = target or args.target
    eps = resolve_epsilon(g, args.epsilon, args.threads) if target == "parisi_H" else None
    d = graph_distance(g)
    L0 = kernel_laplacian(d, args.alpha)
    L1, _, _ = _operator(g, target, args.alpha, eps)
    A0, A1 = L0.matrix, L1.matrix - L0.matrix
    s = perturbation_series(A0, A1, args.order)
    prop = proposition_bound_check(A0, A1, args.order)
    ts = list(args.t)
    exact = np.linalg.eigvalsh(A0[None] + np.asarray(ts)[:, None, None] * A1)
    evals = []
    for t, ex in zip(ts, exact):
        vals, _ = evaluate_series(s, t)
        evals.append({"t": t, "series": vals, "exact": ex, "max_error": float(np.max(np.abs(vals - ex)))})
    off = d.d[~np.eye(g.n, dtype=bool)]
    out = {
        "alpha": args.alpha,
        "target": target,
        "order": args.order,
        "a1_norm": s.a1_norm,
        "d_min_spectral": s.d_min,
        "d_min_adjacency": float(off.max() ** (-args.alpha)) if off.size else None,
        "C": args.constant,
        "variant": args.variant,
        "bound": error_bound(s.a1_norm, s.d_min, args.constant, args.variant),
        "coefficients": [
            {"k": r.k, "vector_norm": r.norm, "vector_bound": r.bound, "vector_margin": r.margin,
             "eigenvalue_norm": e.norm, "eigenvalue_bound": e.bound, "eigenvalue_margin": e.margin}
            for r, e in zip(prop.rows, prop.eigenvalue_rows)
        ],
        "violations": len(prop.violations),
        "evaluations": evals,
    }
    if eps is not None:
        out["epsilon"] = eps
    return out


def cmd_perturb(g, args):
    out = perturb_report(g, args)
    if args.format == "csv":
        return out, csv_text(["k", "vector_norm", "vector_bound", "eigenvalue_norm", "eigenvalue_bound"],
                        ([c["k"], c["vector_norm"], c["vector_bound"], c["eigenvalue_norm"], c["eigenvalue_bound"]]
                         for c in out["coefficients"]))
    return out


def _bound_entry(entry, empirical):
    if entry is None or isinstance(entry, HypothesisFailed):
        return entry
    b = entry["max"]
    return {"max": b, "per_eigenvalue": entry["per_eigenvalue"], "ratio": empirical / b if b > 0 else None}


def _pair_summary(pairs):
    out = {}
    for variant, pair in pairs.items():
        if pair is None:
            out[variant] = None
            continue
        out[variant] = {"psi_vector": pair.psi_vec.as_dict(), "psi_value": pair.psi_val.as_dict(),
                        "a_l1": pair.a_l1, "eigenvalues": pair.eigenvalues}
    return out


def heat_report(g, args, times=None):
    eps = resolve_epsilon(g, args.epsilon, args.threads)
    u0 = load_u0(g, args.u0)
    rep = heat_mod.compare_solutions(g, eps, args.alpha, u0, times, args.constant)
    rows = []
    for r in rep.rows:
        rows.append({
            "t": r.t,
            "empirical_full": r.empirical_full,
            "empirical_quotient": r.empirical_quotient,
            "bound_full": {v: _bound_entry(b, r.empirical_full) for v, b in r.bound_full.items()},
            "bound_quotient": {v: _bound_entry(b, r.empirical_quotient) for v, b in r.bound_quotient.items()},
        })
    return {
        "convention": "u(t) = exp(-t L) u0",
        "epsilon": rep.epsilon,
        "alpha": rep.alpha,
        "C": rep.C,
        "u0": u0,
        "clusters": [list(c) for c in rep.clusters],
        "full": _pair_summary(rep.full),
        "quotient": _pair_summary(rep.quotient),
        "rows": rows,
    }


def cmd_heat(g, args):
    out = heat_report(g, args, args.t_grid)
    if args.format == "csv":
        def val(b):
            return b["max"] if isinstance(b, dict) else ""
        return out, csv_text(
            ["t", "empirical_full", "bound_full_paper", "bound_full_conservative",
             "empirical_quotient", "bound_quotient_paper", "bound_quotient_conservative"],
            ([r["t"], r["empirical_full"], val(r["bound_full"]["paper"]), val(r["bound_full"]["conservative"]),
              r["empirical_quotient"], val(r["bound_quotient"]["paper"]), val(r["bound_quotient"]["conservative"])]
             for r in out["rows"]),
        )
    return out


def sequences_table(K):
    gf = c_sequence(K, "generating_function")
    st = c_sequence(K, "as_stated")
    return [[m, gf[m], st[m], b_coefficient(m), b_coefficient_hypergeometric(m)] for m in range(K + 1)]


SEQUENCE_HEADER = ["m", "c_generating_function", "c_as_stated", "b_direct", "b_hypergeometric"]


def cmd_sequences(g, args):
    rows = sequences_table(args.order)
    if args.format == "json":
        return {"columns": SEQUENCE_HEADER, "rows": rows}
    return csv_text(SEQUENCE_HEADER, rows)


def _guarded(fn):
    try:
        return fn()
    except UltragraphError as exc:
        return {"error": type(exc).__name__, "message": str(exc)}


def cmd_report(g, args):
    args.compare = "best"
    if args.epsilon == "auto":
        args.epsilon = fmt_float(minimize_phi(g, threads=args.threads).minimizers[0]) if g.n > 1 else "0"
    ns = argparse.Namespace(**vars(args))
    ns.t = [1e-2, 1e-1]
    ns.variant = "paper"
    out = {
        "vertices": list(g.vertices),
        "ultrametric": _guarded(lambda: cmd_ultrametric(g, argparse.Namespace(format="json"))),
        "partition": _guarded(lambda: partition_report(g, ns)),
        "spectrum": {},
        "perturb": {},
        "heat": _guarded(lambda: heat_report(g, ns)),
        "sequences": {"columns": SEQUENCE_HEADER, "rows": sequences_table(args.order)},
    }
    for kind in KINDS:
        def spec(kind=kind):
            eps = float(args.epsilon) if kind.startswith("parisi") else None
            return _operator(g, kind, args.alpha, eps)[0].eigensystem().eigenvalues
        out["spectrum"][kind] = _guarded(spec)
    for target in ("subdominant_ultrametric", "parisi_H"):
        out["perturb"][target] = _guarded(lambda target=target: perturb_report(g, ns, target))
    if args.format == "csv":
        raise UltragraphError("report is available as JSON only")
    return out


HANDLERS = {
    "ultrametric": cmd_ultrametric,
    "partition": cmd_partition,
    "spectrum": cmd_spectrum,
    "perturb": cmd_perturb,
    "heat": cmd_heat,
    "sequences": cmd_sequences,
    "report": cmd_report,
}


def run(argv=None):
    """Parse ``argv``, run one command and return the exit status."""
    args = build_parser().parse_args(argv)
    if getattr(args, "alpha", 1.0) <= 0:
        print("ultragraph: error: --alpha must be positive", file=sys.stderr)
        return 1
    if args.threads is not None and args.threads < 1:
        print("ultragraph: error: --threads must be at least 1", file=sys.stderr)
        return 1
    if args.format is None:
        args.format = "csv" if args.command == "sequences" else "json"
    try:
        g = None if args.command == "sequences" else load_graph(args)
        out = HANDLERS[args.command](g, args)
    except (UltragraphError, OSError) as exc:
        print(f"ultragraph: error: {exc}", file=sys.stderr)
        return 1
    # CSV handlers may return (report, text) so --strict still sees the report
    if isinstance(out, tuple):
        out, text = out
    else:
        text = out if isinstance(out, str) else dumps(out)
    _write(args.output, text)
    if args.strict and not isinstance(out, str) and _has_failure(out):
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
