"""Command-line driver: ``nrpembed {embed,eval-link,eval-reconstruct,ppr-exact}``."""
import argparse
import contextlib
import json
import logging
import os
import sys
import time

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .errors import ConfigError, NrpError
from .evaluate import candidate_pairs, link_prediction_auc, precision_at_k, split_edges
from .graph import from_edges, read_edge_list
from .nrp import NrpConfig, nrp_fit
from .ppr import exact_ppr

log = logging.getLogger("nrpembed")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _add_graph_args(p):
    p.add_argument("--input", required=True, help="edge list file (u v per line)")
    p.add_argument("--undirected", action="store_true", help="treat every edge as undirected")
    p.add_argument("--relabel", action="store_true", help="map arbitrary node tokens to dense ids")


def _add_nrp_args(p):
    p.add_argument("--k", type=int, default=128, help="total dimensionality (even)")
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--ell1", type=int, default=20)
    p.add_argument("--ell2", type=int, default=10)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--lambda", dest="lam", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deterministic", action="store_true",
                   help="pin BLAS and numba to one thread")
    p.add_argument("--threads", type=int, default=1, help="reserved; only 1 is supported")


def build_parser():
    parser = _Parser(prog="nrpembed", description="PPR-based node embeddings with degree reweighting.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log stage timings")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("embed", help="compute X.tsv, Y.tsv and manifest.json")
    _add_graph_args(p)
    _add_nrp_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--binary", action="store_true", help="reserved; not implemented")

    p = sub.add_parser("eval-link", help="link prediction AUC on a held-out edge split")
    _add_graph_args(p)
    _add_nrp_args(p)
    p.add_argument("--remove-ratio", type=float, default=0.3)
    p.add_argument("--out", help="write the metric TSV here instead of stdout")

    p = sub.add_parser("eval-reconstruct", help="graph reconstruction precision@K")
    _add_graph_args(p)
    _add_nrp_args(p)
    p.add_argument("--ks", default="10,100,1000", help="comma-separated K values")
    p.add_argument("--out", help="write the metric TSV here instead of stdout")

    p = sub.add_parser("ppr-exact", help="print one source node's exact PPR row")
    _add_graph_args(p)
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--L", type=int, default=None, help="truncation length (default: tail < 1e-12)")
    return parser


def _load(args):
    edges = read_edge_list(args.input, directed=not args.undirected, relabel=args.relabel)
    return from_edges(edges)


def _config(args):
    if args.threads != 1:
        raise ConfigError("--threads is reserved; only 1 is supported")
    return NrpConfig(k=args.k, alpha=args.alpha, ell1=args.ell1, ell2=args.ell2,
                     epsilon=args.eps, lam=args.lam, seed=args.seed)


def _limits(args):
    if getattr(args, "deterministic", False):
        return threadpool_limits(limits=1)
    return contextlib.nullcontext()


def _node_name(g, i):
    return g.labels[i] if g.labels is not None else str(i)


def _write_matrix(path, g, M):
    with open(path, "w") as fh:
        for i in range(M.shape[0]):
            fh.write(_node_name(g, i) + "\t" + "\t".join(f"{x:.9g}" for x in M[i]) + "\n")


def _emit(report, out):
    text = report.to_tsv()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    log.info("%s", report.summary())


def cmd_embed(args):
    if args.binary:
        raise ConfigError("--binary is reserved and not implemented")
    t0 = time.perf_counter()
    cfg = _config(args)
    timings = {}
    g = _load(args)
    timings["load"] = time.perf_counter() - t0
    marks = {}
    with _limits(args):
        t1 = time.perf_counter()
        res = nrp_fit(g, cfg, epoch_callback=lambda e, w: marks.setdefault(e, time.perf_counter()))
        t2 = time.perf_counter()
    timings["approx_ppr"] = marks[0] - t1
    timings["reweight"] = t2 - marks[0]
    os.makedirs(args.out, exist_ok=True)
    _write_matrix(os.path.join(args.out, "X.tsv"), g, res.embedding.X)
    _write_matrix(os.path.join(args.out, "Y.tsv"), g, res.embedding.Y)
    timings["write"] = time.perf_counter() - t2
    manifest = {
        "version": __version__,
        "command": "embed",
        "input": os.path.abspath(args.input),
        "undirected": args.undirected,
        "n": g.n,
        "m": g.m,
        "seed": cfg.seed,
        "deterministic": args.deterministic,
        "config": cfg.to_dict(),
        "timings": timings,
        "total_seconds": time.perf_counter() - t0,
    }
    with open(os.path.join(args.out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for stage, sec in timings.items():
        log.info("%s: %.3fs", stage, sec)


def cmd_eval_link(args):
    cfg = _config(args)
    g = _load(args)
    split = split_edges(g, args.remove_ratio, seed=cfg.seed)
    if split.train.m == 0:
        raise ConfigError("train graph is empty after the split; lower --remove-ratio")
    if len(split.test_pos) == 0:
        raise ConfigError("no test edges; raise --remove-ratio")
    with _limits(args):
        emb = nrp_fit(split.train, cfg).embedding
    _emit(link_prediction_auc(emb, split), args.out)


def cmd_eval_reconstruct(args):
    cfg = _config(args)
    try:
        ks = [int(k) for k in args.ks.split(",") if k.strip()]
    except ValueError:
        raise ConfigError(f"--ks must be comma-separated integers, got {args.ks!r}") from None
    g = _load(args)
    with _limits(args):
        emb = nrp_fit(g, cfg).embedding
    cand = candidate_pairs(g.n, seed=cfg.seed)
    _emit(precision_at_k(emb, g, cand, ks), args.out)


def cmd_ppr_exact(args):
    g = _load(args)
    if not 0 <= args.source < g.n:
        raise ConfigError(f"--source {args.source} out of range [0, {g.n})")
    row = exact_ppr(g, alpha=args.alpha, L=args.L).values[args.source]
    sys.stdout.write("".join(f"{_node_name(g, v)}\t{row[v]:.9g}\n" for v in range(g.n)))


COMMANDS = {
    "embed": cmd_embed,
    "eval-link": cmd_eval_link,
    "eval-reconstruct": cmd_eval_reconstruct,
    "ppr-exact": cmd_ppr_exact,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (NrpError, OSError, ValueError) as exc:
        msg = " ".join(str(exc).split())
        print(f"nrpembed {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
