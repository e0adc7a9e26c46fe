"""Command-line entry point: ``dexpr run|mine|rank|fit|explain|list``.

Exit codes: 0 success, 2 invalid input or configuration, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .corpus import CorpusError, preprocess
from .expressions import Expression, matches, mine, select_top, vectorize
from .features import FeatureSet, Method
from .harness import fit_features, run, write_outputs
from .models import ForestModel, KnnModel, LogRegModel, ModelError, TreeModel, train_forest, train_knn, train_logreg, train_tree
from .ranking import TermStats, cficf_scores

log = logging.getLogger("dexpr")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


def _expr_repr(tokens) -> str:
    return "(" + ", ".join(json.dumps(t, ensure_ascii=False) for t in tokens) + ")"


def _with_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "out", None):
        config = replace(config, output_dir=args.out)
    if getattr(args, "seed", None) is not None:
        config = replace(config, cv=replace(config.cv, seed=args.seed))
    return config


def cmd_run(args) -> int:
    config = _with_overrides(load_config(args.config), args)
    report, manifest = run(config)
    paths = write_outputs(report, manifest, config.output_dir)
    if args.format == "json":
        print(report.to_json())
    else:
        print(f"{'method':8} {'classifier':10} {'nb':>3} {'k':>3} {'folds':>5} {'f1':>7} {'std':>7}")
        for agg in report.aggregates:
            f1 = agg.get("f1", {})
            nb = agg["neighbours"] if agg["neighbours"] is not None else "-"
            print(
                f"{agg['method']:8} {agg['classifier']:10} {nb:>3} {agg['k_features']:>3} "
                f"{agg['folds']:>5} {f1.get('mean', float('nan')):7.4f} {f1.get('std', float('nan')):7.4f}"
            )
    for w in manifest.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {', '.join(str(p) for p in paths.values())}", file=sys.stderr)
    return EXIT_OK


def _print_expressions(exprs: list[Expression], fmt: str) -> None:
    if fmt == "json":
        print(json.dumps([e.to_dict() for e in exprs], indent=2, ensure_ascii=False))
        return
    for e in exprs:
        print(f"{_expr_repr(e.tokens)} P={round(e.precision, 4)} R={round(e.recall, 4)}")


def cmd_mine(args) -> int:
    config = _with_overrides(load_config(args.config), args)
    corpus = config.load_corpus()
    exprs = mine(corpus, config.mining_config())
    if args.top:
        exprs = [e for e in exprs if e.tokens in set(select_top(exprs, args.top).expressions)]
    _print_expressions(exprs, args.format)
    if args.save:
        Path(args.save).write_text(json.dumps([e.to_dict() for e in exprs], indent=2, ensure_ascii=False), encoding="utf-8")
    return EXIT_OK


def cmd_list(args) -> int:
    data = json.loads(Path(args.expressions).read_text(encoding="utf-8"))
    exprs = [Expression(tuple(d["tokens"]), d.get("source_doc", -1), d["precision"], d["recall"]) for d in data]
    _print_expressions(exprs, args.format)
    return EXIT_OK


def cmd_rank(args) -> int:
    config = load_config(args.config)
    corpus = config.load_corpus()
    scores = cficf_scores(TermStats.from_corpus(corpus))
    top = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[: args.top]
    if args.format == "json":
        print(json.dumps([{"term": t, "cficf": s} for t, s in top], indent=2, ensure_ascii=False))
    else:
        for term, score in top:
            print(f"{term}\t{score:.6f}")
    return EXIT_OK


def _train(name: str, X, y, config: ExperimentConfig, seed: int):
    mc = config.models
    if name == "dt":
        return train_tree(X, y, max_depth=mc.tree_max_depth)
    if name == "rf":
        return train_forest(X, y, mc.forest_trees, mc.forest_max_features, seed=seed, max_depth=mc.tree_max_depth)
    if name == "logreg":
        return train_logreg(X, y, mc.logreg_lr, mc.logreg_iters, mc.logreg_l2)
    if name == "knn":
        return train_knn(X, y, min(mc.knn_k))
    raise ConfigError(f"unknown classifier {name!r}")


def cmd_fit(args) -> int:
    config = load_config(args.config)
    corpus = config.load_corpus()
    method = Method.parse(args.method) if args.method else config.fs_methods[0]
    k = args.k or max(config.k_features)
    fs = fit_features(config, method, corpus, k)
    X = vectorize(corpus, fs)
    model = _train(args.classifier, X, corpus.labels, config, seed=config.cv.seed)
    if isinstance(model, KnnModel):
        model_dict = {"type": "knn", "k": model.k, "X": model.X.tolist(), "y": model.y.tolist()}
    else:
        model_dict = model.to_dict()
    payload = {
        "language": config.dataset.language,
        "features": fs.to_dict(),
        "model": model_dict,
    }
    Path(args.out).write_text(json.dumps(payload, indent=2, ensure_ascii=False), encoding="utf-8")
    print(f"wrote {args.out} ({len(fs)} {method.value} features, {args.classifier})", file=sys.stderr)
    if isinstance(model, TreeModel):
        for line in model.rules(fs.names):
            print(line)
    return EXIT_OK


def _load_model(d: dict):
    kind = d.get("type")
    if kind == "tree":
        return TreeModel.from_dict(d)
    if kind == "forest":
        return ForestModel.from_dict(d)
    if kind == "logreg":
        return LogRegModel(np.asarray(d["weights"], dtype=float), float(d["bias"]), d["lr"], d["iters"], d["l2"])
    if kind == "knn":
        return KnnModel(np.asarray(d["X"], dtype=np.uint8), np.asarray(d["y"], dtype=bool), int(d["k"]))
    raise ConfigError(f"unknown model type {kind!r}")


def cmd_explain(args) -> int:
    path = Path(args.model)
    if not path.is_file():
        raise ConfigError(f"model file not found: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    fs = FeatureSet.from_dict(payload["features"])
    model = _load_model(payload["model"])
    tokens = preprocess(args.text, payload.get("language", "english"))
    row = np.array([1 if matches(e, tokens) else 0 for e in fs.expressions], dtype=np.uint8)
    proba = float(np.asarray(model.predict_proba(row[None, :]))[0])
    label = bool(np.asarray(model.predict(row[None, :]))[0])
    matched = [fs.features[j] for j in np.flatnonzero(row)]
    out = {
        "tokens": tokens,
        "class": "positive" if label else "negative",
        "probability": proba,
        "matched": [{"expression": f.name, "precision": f.precision, "recall": f.recall} for f in matched],
    }
    if isinstance(model, TreeModel):
        path_, leaf = model.decision_path(row)
        names = fs.names
        conds = [f"has({names[f]})" if present else f"NOT has({names[f]})" for f, present in path_]
        out["rule"] = f"IF {' AND '.join(conds) if conds else 'TRUE'} THEN {out['class']} (p={leaf.prob:.2f})"
    if args.format == "json":
        print(json.dumps(out, indent=2, ensure_ascii=False))
    else:
        print(f"{out['class']} (p={proba:.4f})")
        for m in out["matched"]:
            p = "" if m["precision"] is None else f" P={round(m['precision'], 4)} R={round(m['recall'], 4)}"
            print(f"  matched: {m['expression']}{p}")
        if "rule" in out:
            print(f"  rule: {out['rule']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dexpr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if seed:
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--out", default=None, help="output directory (overrides config and $DEXPR_OUTPUT_DIR)")

    p = sub.add_parser("run", help="run a full cross-validated experiment")
    p.add_argument("config")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("mine", help="mine discriminatory expressions from the whole dataset")
    p.add_argument("config")
    p.add_argument("--top", type=int, default=0, help="keep only the best N expressions")
    p.add_argument("--save", default=None, help="also write the expressions as JSON")
    common(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("rank", help="print the top CF-ICF terms")
    p.add_argument("config")
    p.add_argument("--top", type=int, default=20)
    common(p, seed=False)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("fit", help="select features and train one model on the whole dataset")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--method", default=None)
    p.add_argument("--classifier", choices=("dt", "rf", "logreg", "knn"), default="dt")
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("explain", help="classify one text with a saved model")
    p.add_argument("model")
    p.add_argument("text")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("list", help="print a saved expression set")
    p.add_argument("expressions")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CorpusError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, ValueError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
