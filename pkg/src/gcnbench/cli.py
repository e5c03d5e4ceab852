"""Command-line interface.

Subcommands: synth, build-graph, train, experiment, eval.  Usage errors
exit with 2; I/O and validation failures print a diagnostic on stderr and
exit with 1.
"""

from __future__ import annotations

import argparse
import sys

from . import checkpoint, harness
from .baseline import predict_logreg, train_logreg
from .dataset import build_label_matrix, full_truth, load_dataset, make_split, save_dataset, synth_blobs
from .gcn import Hyperparams, forward, init_model, predict, train
from .graph import GraphBuildConfig, build_graph, load_graph, normalize, save_graph
from .harness import accuracy


def _build_parser():
    parser = argparse.ArgumentParser(prog="gcnbench",
                                     description="Similarity-graph semi-supervised classification benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic blobs dataset as embedding CSV")
    p.add_argument("--n", type=int, required=True, help="number of points")
    p.add_argument("--d", type=int, required=True, help="embedding dimension")
    p.add_argument("--classes", type=int, required=True, help="class count")
    p.add_argument("--sep", type=float, default=6.0, help="center separation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("build-graph", help="build a similarity graph from an embedding CSV")
    p.add_argument("--data", required=True, help="embedding CSV path")
    p.add_argument("--method", choices=["knn", "epsilon", "full"], default="knn")
    p.add_argument("--k", type=int, default=5, help="neighbor count for knn")
    p.add_argument("--eps", type=float, default=None, help="distance threshold for epsilon")
    p.add_argument("--metric", choices=["euclidean", "cosine"], default="euclidean")
    p.add_argument("--out", required=True, help="output edge-list path")

    p = sub.add_parser("train", help="train one model on a labeled split and save a checkpoint")
    p.add_argument("--data", required=True, help="embedding CSV path (needs labels)")
    p.add_argument("--graph", default=None, help="edge-list path (required for gcn)")
    p.add_argument("--model", choices=["gcn", "logreg"], default="gcn")
    p.add_argument("--labeled", type=int, required=True, help="label budget l")
    p.add_argument("--seed", type=int, default=0, help="split seed")
    p.add_argument("--uniform", action="store_true", help="uniform instead of stratified split")
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--hidden", type=int, default=16, help="gcn hidden width")
    p.add_argument("--weight-decay", type=float, default=None)
    p.add_argument("--model-seed", type=int, default=0, help="gcn initialization seed")
    p.add_argument("--out", required=True, help="checkpoint path")

    p = sub.add_parser("experiment", help="run a label-budget sweep from a JSON config")
    p.add_argument("--config", required=True, help="experiment JSON path")
    p.add_argument("--out", required=True, help="raw report CSV path")
    p.add_argument("--agg-out", default=None, help="aggregate CSV path")
    p.add_argument("--md-out", default=None, help="markdown table path")

    p = sub.add_parser("eval", help="score a checkpoint on a labeled dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="embedding CSV path (needs labels)")
    p.add_argument("--graph", default=None, help="edge-list path (required for gcn)")
    return parser


def _hyperparams(args, model):
    if model == "gcn":
        hp = Hyperparams(seed=args.model_seed, hidden=args.hidden)
    else:
        hp = Hyperparams(lr=0.5, epochs=500, weight_decay=1e-4)
    if args.lr is not None:
        hp.lr = args.lr
    if args.epochs is not None:
        hp.epochs = args.epochs
    if args.weight_decay is not None:
        hp.weight_decay = args.weight_decay
    return hp


def _cmd_synth(args):
    ds = synth_blobs(n=args.n, d=args.d, C=args.classes, sep=args.sep, seed=args.seed)
    save_dataset(ds, args.out)
    print(f"wrote {args.out}: n={ds.n} d={ds.L1} classes={ds.C}")


def _cmd_build_graph(args):
    cfg = GraphBuildConfig(method=args.method, k=args.k, eps=args.eps, metric=args.metric)
    ds = load_dataset(args.data)
    A = build_graph(ds, cfg)
    save_graph(A, args.out)
    print(f"wrote {args.out}: n={A.n} edges={A.num_edges}")


def _fit(args, ds, S):
    split = make_split(ds, args.labeled, seed=args.seed, stratified=not args.uniform)
    hp = _hyperparams(args, args.model)
    if args.model == "gcn":
        model = init_model(ds.L1, hp.hidden, ds.C, hp.seed)
        trained, trace = train(model, S, ds.X, build_label_matrix(ds, split), split.labeled, hp)
        pred = predict(forward(trained, S, ds.X))
    else:
        truth = full_truth(ds)
        trained, trace = train_logreg(ds.X[split.labeled], truth[split.labeled], ds.C, hp)
        pred = predict_logreg(trained, ds.X)
    return split, hp, trained, trace, pred


def _cmd_train(args):
    ds = load_dataset(args.data)
    S = None
    if args.model == "gcn":
        if args.graph is None:
            raise ValueError("gcn training needs --graph")
        A = load_graph(args.graph)
        if A.n != ds.n:
            raise ValueError(f"graph has {A.n} nodes, dataset has {ds.n}")
        S = normalize(A)
    split, hp, trained, trace, pred = _fit(args, ds, S)
    checkpoint.save_checkpoint(trained, args.out, hyperparams=hp)
    print(f"wrote {args.out}: final loss {trace[-1]:.6f}")
    if len(split.unlabeled) and ds.truth is not None:
        truth = full_truth(ds)
        acc = accuracy(pred[split.unlabeled], truth[split.unlabeled])
        print(f"unlabeled accuracy: {acc:.2f}% over {split.u} nodes")


def _cmd_experiment(args):
    cfg = harness.load_config(args.config)
    report = harness.run_experiment(cfg)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(harness.render_report(report, "csv"))
    print(f"wrote {args.out}: {len(report.rows)} rows")
    if args.agg_out:
        with open(args.agg_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(harness.aggregate_csv(report))
        print(f"wrote {args.agg_out}")
    markdown = harness.render_report(report, "markdown")
    if args.md_out:
        with open(args.md_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(markdown)
        print(f"wrote {args.md_out}")
    print(markdown, end="")


def _cmd_eval(args):
    model, meta = checkpoint.load_checkpoint(args.checkpoint)
    ds = load_dataset(args.data)
    truth = full_truth(ds)
    if meta["kind"] == "gcn":
        if args.graph is None:
            raise ValueError("evaluating a gcn checkpoint needs --graph")
        A = load_graph(args.graph)
        if A.n != ds.n:
            raise ValueError(f"graph has {A.n} nodes, dataset has {ds.n}")
        pred = predict(forward(model, normalize(A), ds.X))
    else:
        pred = predict_logreg(model, ds.X)
    print(f"accuracy: {accuracy(pred, truth):.2f}% over {ds.n} nodes")


_COMMANDS = {
    "synth": _cmd_synth,
    "build-graph": _cmd_build_graph,
    "train": _cmd_train,
    "experiment": _cmd_experiment,
    "eval": _cmd_eval,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
