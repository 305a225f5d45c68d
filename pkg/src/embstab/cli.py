"""Command-line interface: ``embstab <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

import numpy as np

from . import funcsim, harness, repsim
from .classify import DEFAULT_L2_GRID, TrainConfig, accuracy, predict_proba, save_model, select_l2, train_logreg
from .embed import Node2vecConfig, node2vec_lite, read_embedding, spectral_embed, write_embedding
from .errors import DataError, NumericError
from .graph import Graph, SbmConfig, generate_sbm, load_edge_list, load_labels, save_edge_list, save_labels, split_nodes

log = logging.getLogger("embstab")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(s: str) -> List[int]:
    try:
        return [int(x) for x in s.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _float_list(s: str) -> List[float]:
    try:
        return [float(x) for x in s.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _u64(s: str) -> int:
    v = int(s)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="embstab", description="Stability of node embeddings across dimensions.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS,
                        help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", metavar="{gen,embed,classify,repsim,funcsim,sweep}",
                           parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    g = sub.add_parser("gen", help="generate a stochastic block model graph")
    g.add_argument("--sbm", type=_int_list, required=True, metavar="SIZES",
                   help="comma-separated block sizes, e.g. 150,150")
    g.add_argument("--p-in", type=float, required=True, help="intra-block edge probability")
    g.add_argument("--p-out", type=float, required=True, help="inter-block edge probability")
    g.add_argument("--seed", type=_u64, default=0, help="generator seed (default 0)")
    g.add_argument("--edges", required=True, help="output edge-list path")
    g.add_argument("--labels", required=True, help="output label-file path")

    e = sub.add_parser("embed", help="train an embedding and write an EMB1 file")
    e.add_argument("--method", choices=("node2vec", "node2vec_lite", "spectral"), default="node2vec")
    e.add_argument("--edges", required=True, help="edge-list path")
    e.add_argument("--num-nodes", type=_positive, help="override node count")
    e.add_argument("--dim", type=_positive, required=True, help="embedding dimension")
    e.add_argument("--seed", type=_u64, default=0, help="training seed (default 0)")
    e.add_argument("--out", required=True, help="output .emb path")
    e.add_argument("--walks-per-node", type=_positive, default=10)
    e.add_argument("--walk-length", type=_positive, default=50)
    e.add_argument("--context-size", type=_positive, default=5)
    e.add_argument("--p", type=float, default=1.0, help="return parameter")
    e.add_argument("--q", type=float, default=1.0, help="in-out parameter")
    e.add_argument("--negative", type=_positive, default=5, help="negative samples per pair")
    e.add_argument("--epochs", type=_positive, default=1)
    e.add_argument("--lr", type=float, default=0.025, help="initial SGNS learning rate")

    c = sub.add_parser("classify", help="train logistic regression and write test-set outputs")
    c.add_argument("--emb", required=True, help="input .emb path")
    c.add_argument("--labels", required=True, help="node label file")
    c.add_argument("--seed", type=_u64, default=0, help="split seed (default 0)")
    c.add_argument("--fractions", type=_float_list, default=[0.7, 0.1, 0.2],
                   help="train,val,test fractions (default 0.7,0.1,0.2)")
    c.add_argument("--l2", type=float, help="fixed L2 strength; default selects from --grid")
    c.add_argument("--grid", type=_float_list, default=list(DEFAULT_L2_GRID),
                   help="L2 strengths to select from on validation accuracy (default 1e8..1e-5)")
    c.add_argument("--out", required=True, help="output .out path (test nodes, ascending)")
    c.add_argument("--eval-labels", help="also write the test nodes' labels in file order")
    c.add_argument("--model", help="also write the fitted LRM1 model")

    r = sub.add_parser("repsim", help="representational similarity of two .emb files")
    r.add_argument("--measure", required=True, choices=harness.REPRESENTATIONAL)
    r.add_argument("--k", type=_positive, default=repsim.DEFAULT_K, help="neighborhood size (default 10)")
    r.add_argument("a")
    r.add_argument("b")

    f = sub.add_parser("funcsim", help="functional similarity of .out files")
    f.add_argument("--measure", required=True,
                   choices=("disagreement", "norm_disagreement", "stable_core", "jsd", "accuracy"))
    f.add_argument("--labels", help="evaluation labels (needed by norm_disagreement and accuracy)")
    f.add_argument("outputs", nargs="+", help=".out files (one for accuracy, two+ for stable_core)")

    s = sub.add_parser("sweep", help="run a dimension sweep from a JSON config")
    s.add_argument("--config", required=True, help="sweep config (JSON)")
    s.add_argument("--workers", type=_positive,
                   help="worker threads (default: $EMBSTAB_WORKERS, else config, else CPU count)")
    s.add_argument("--format", choices=("csv", "json"), help="report format (default: config or csv)")
    s.add_argument("--out", help="report path (default: config 'output' or report.<format>)")
    s.add_argument("--seed", type=_u64, help="override the config base seed")
    return p


def _cmd_gen(args) -> int:
    g = generate_sbm(SbmConfig(tuple(args.sbm), args.p_in, args.p_out, args.seed))
    save_edge_list(g, args.edges)
    save_labels(g, args.labels)
    log.info("wrote %d nodes, %d edges", g.num_nodes, g.num_edges)
    return EXIT_OK


def _cmd_embed(args) -> int:
    g = load_edge_list(args.edges, args.num_nodes)
    if args.method == "spectral":
        z = spectral_embed(g, args.dim)
    else:
        cfg = Node2vecConfig(dim=args.dim, walks_per_node=args.walks_per_node, walk_length=args.walk_length,
                             context_size=args.context_size, p=args.p, q=args.q,
                             negative_samples=args.negative, epochs=args.epochs,
                             learning_rate=args.lr, seed=args.seed)
        z = node2vec_lite(g, cfg)
    write_embedding(z, args.out)
    return EXIT_OK


def _cmd_classify(args) -> int:
    z = read_embedding(args.emb)
    g = load_labels(args.labels, Graph(z.num_nodes, np.empty((0, 2), np.int64)))
    split = split_nodes(g, args.fractions, args.seed)
    l2 = args.l2 if args.l2 is not None else select_l2(z, g.labels, split, args.grid,
                                                       num_classes=g.num_classes)
    model = train_logreg(z, g.labels, split, TrainConfig(l2_strength=l2), g.num_classes)
    out = predict_proba(model, z, split.test_mask)
    funcsim.write_output(out, args.out)
    y = g.labels[split.test_mask]
    if args.eval_labels:
        funcsim.write_eval_labels(y, args.eval_labels)
    if args.model:
        save_model(model, args.model)
    log.info("l2=%g test accuracy=%.4f", l2, accuracy(out, y))
    return EXIT_OK


def _cmd_repsim(args) -> int:
    a, b = read_embedding(args.a), read_embedding(args.b)
    print(repr(repsim.compare(args.measure, a, b, args.k)))
    return EXIT_OK


def _cmd_funcsim(args) -> int:
    outs = [funcsim.read_output(p) for p in args.outputs]
    m = args.measure
    labels = funcsim.read_eval_labels(args.labels, outs[0].n) if args.labels else None
    if m in ("norm_disagreement", "accuracy") and labels is None:
        raise UsageError(f"--measure {m} needs --labels")
    if m == "accuracy":
        if len(outs) != 1:
            raise UsageError("accuracy takes exactly one output file")
        value = accuracy(outs[0], labels)
    elif m == "stable_core":
        if len(outs) < 2:
            raise UsageError("stable_core takes at least two output files")
        value = funcsim.stable_core(outs)
    else:
        if len(outs) != 2:
            raise UsageError(f"{m} takes exactly two output files")
        value = funcsim.PAIRWISE[m](outs[0], outs[1], labels)
    print(repr(value))
    return EXIT_OK


def _resolve_workers(flag: Optional[int]) -> Optional[int]:
    if flag is not None:
        return flag
    env = os.environ.get("EMBSTAB_WORKERS")
    if env:
        try:
            v = int(env)
        except ValueError:
            raise UsageError(f"EMBSTAB_WORKERS must be a positive integer, got {env!r}") from None
        if v < 1:
            raise UsageError("EMBSTAB_WORKERS must be >= 1")
        return v
    return None


def _cmd_sweep(args) -> int:
    with open(args.config) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.config}: invalid JSON: {exc}") from None
    cfg = harness.config_from_dict(doc, os.path.dirname(os.path.abspath(args.config)))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    workers = _resolve_workers(args.workers)
    if workers is None and "workers" not in doc:
        workers = os.cpu_count() or 1
    fmt = args.format or doc.get("format", "csv")
    out = args.out or doc.get("output") or f"report.{fmt}"
    if args.out is None and doc.get("output") and not os.path.isabs(out):
        out = os.path.join(os.path.dirname(os.path.abspath(args.config)), out)
    report = harness.run_sweep(cfg, workers)
    harness.emit_report(report, fmt, out)
    log.info("wrote %d report rows to %s", len(report.rows), out)
    return EXIT_OK


COMMANDS = {
    "gen": _cmd_gen,
    "embed": _cmd_embed,
    "classify": _cmd_classify,
    "repsim": _cmd_repsim,
    "funcsim": _cmd_funcsim,
    "sweep": _cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"embstab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"embstab {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"embstab {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
