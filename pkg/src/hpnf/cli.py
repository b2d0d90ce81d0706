"""Command line entry point: synth, extract, analyze, train, evaluate, importance.

Exit status is 0 on success, 1 on data errors and 2 on usage errors. Every
output file gets a ``<name>.manifest.json`` sibling recording the
configuration, the SHA-256 of each input file and the tool version.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import (
    FEATURE_GROUPS, KINDS, RandomForest, compute_metrics, gini_importance, load_model,
    repeated_holdout, save_model, select_feature_subset, subset_names, train_model,
)
from .features import (
    DEFAULT_BOT_THRESHOLD, extract_all, format_float, read_features_csv, to_arrays,
    write_features_csv,
)
from .ingestion import CORPUS_FILES, CorpusError, load_corpus
from .network import build_network
from .sentiment import MalformedLexiconLine, SentimentScorer, load_lexicon
from .stats import DEFAULT_ALPHA, boxplot_report, compare_groups
from .synthgen import InvalidParams, generate_corpus, preset_params

logger = logging.getLogger("hpnf")


class DataError(Exception):
    pass


def _round_floats(obj):
    """Floats re-parsed from 9-significant-digit text so JSON output is stable."""
    if isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            return None
        return float(format_float(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round_floats(obj.item())
    return obj


def _write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_round_floats(obj), indent=2, sort_keys=False) + "\n", encoding="utf-8")


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _input_files(args):
    files = []
    if getattr(args, "data_dir", None):
        files += [Path(args.data_dir) / f for f in CORPUS_FILES]
    for attr in ("input", "lexicon", "model_file"):
        if getattr(args, attr, None):
            files.append(Path(getattr(args, attr)))
    return files


def write_manifest(out_path, args):
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    inputs = {}
    for f in _input_files(args):
        if f.exists():
            inputs[str(f)] = _digest(f)
    manifest = {"tool": "hpnf", "version": __version__, "command": args.command,
                "config": config, "inputs": inputs}
    path = Path(str(out_path).rstrip("/"))
    target = path / "manifest.json" if path.is_dir() else path.with_name(path.name + ".manifest.json")
    target.write_text(json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8")


def _scorer(args):
    lexicon = load_lexicon(args.lexicon) if getattr(args, "lexicon", None) else None
    return SentimentScorer(lexicon)


def _vectors(args):
    """Feature vectors from --input features.csv or a corpus under --data-dir."""
    if getattr(args, "input", None):
        with open(args.input, encoding="utf-8") as fh:
            return read_features_csv(fh)
    corpus = load_corpus(args.data_dir)
    return extract_all(corpus, _scorer(args), args.bot_threshold, args.threads)


def _matrix(args):
    vectors = _vectors(args)
    if not vectors:
        raise DataError("no news items with a propagation network")
    X, mask, y = to_arrays(vectors)
    return vectors, X, mask, y


# -- subcommands -----------------------------------------------------------

def cmd_synth(args):
    if args.mixed:
        pf = preset_params("fake_like", args.seed, args.n_fake)
        pr = preset_params("real_like", args.seed, args.n_real)
        n_fake, n_real = args.n_fake, args.n_real
    else:
        # a single preset yields items of that preset's label only
        kind = args.preset.replace("-", "_")
        pf = pr = preset_params(kind, args.seed, args.n)
        n_fake, n_real = (args.n, 0) if kind == "fake_like" else (0, args.n)
    corpus = generate_corpus(pf, pr, n_fake, n_real, out_dir=args.out, confound=args.confound)
    write_manifest(args.out, args)
    logger.info("wrote %s to %s", corpus.counts(), args.out)


def cmd_extract(args):
    corpus = load_corpus(args.data_dir)
    vectors = extract_all(corpus, _scorer(args), args.bot_threshold, args.threads)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        write_features_csv(vectors, fh)
    write_manifest(out, args)
    if args.dump_networks:
        with open(args.dump_networks, "w", encoding="utf-8") as fh:
            for item in corpus:
                if not item.tweets:
                    continue
                net = build_network(item, corpus.users)
                fh.write(json.dumps({"news_id": item.news_id,
                                     "macro_edges": [list(e) for e in net.macro_edges()],
                                     "micro_edges": [list(e) for e in net.micro_edges()]}) + "\n")
        write_manifest(args.dump_networks, args)


def cmd_analyze(args):
    _, X, mask, y = _matrix(args)
    report = compare_groups(X, mask, y, alpha=args.alpha, pooled=args.pooled)
    _write_json(args.out, report.as_list())
    write_manifest(args.out, args)
    box_path = Path(args.boxplot_out) if args.boxplot_out else Path(args.out).with_name("boxplot.json")
    _write_json(box_path, boxplot_report(X, mask, y))
    write_manifest(box_path, args)


def cmd_train(args):
    _, X, _, y = _matrix(args)
    Xs = select_feature_subset(X, args.features)
    result = repeated_holdout(Xs, y, args.model, runs=args.runs, train_frac=args.split,
                              seed=args.seed, stratify=not args.no_stratify)
    payload = result.as_dict()
    payload["features"] = args.features
    _write_json(args.out, payload)
    write_manifest(args.out, args)
    if args.save_model:
        model = train_model(args.model, Xs, y, seed=args.seed)
        save_model(model, args.save_model)
        write_manifest(args.save_model, args)


def cmd_evaluate(args):
    _, X, _, y = _matrix(args)
    model = load_model(args.model_file)
    Xs = select_feature_subset(X, args.features)
    metrics = compute_metrics(model.predict(Xs), y)
    m = metrics.as_dict()
    payload = {"kind": model.kind, "runs": 1, "per_run": [m], "mean": m, "features": args.features,
               "confusion": {"tp": metrics.tp, "fp": metrics.fp, "tn": metrics.tn, "fn": metrics.fn}}
    _write_json(args.out, payload)
    write_manifest(args.out, args)


def cmd_importance(args):
    _, X, _, y = _matrix(args)
    Xs = select_feature_subset(X, args.features)
    if args.model_file:
        model = load_model(args.model_file)
        if not isinstance(model, RandomForest):
            raise DataError("importance needs a random forest model")
    else:
        model = train_model("rf", Xs, y, seed=args.seed)
    report = gini_importance(model, Xs, y, names=subset_names(args.features))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("feature,importance,rank\n")
        for rank, (name, imp) in enumerate(report.ranked(), start=1):
            fh.write(f"{name},{format_float(imp)},{rank}\n")
    write_manifest(out, args)


# -- parser ----------------------------------------------------------------

def _fraction(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _add_input(p, features_csv=True):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data-dir", help="corpus directory with the five JSONL files")
    if features_csv:
        src.add_argument("--input", help="features.csv written by 'extract'")
    _add_extract_opts(p)


def _add_extract_opts(p):
    p.add_argument("--lexicon", help="sentiment lexicon TSV (default: bundled)")
    p.add_argument("--bot-threshold", type=float, default=DEFAULT_BOT_THRESHOLD)
    p.add_argument("--threads", type=_positive_int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="hpnf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hpnf {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--preset", choices=["fake-like", "real-like"])
    kind.add_argument("--mixed", action="store_true", help="fake-like and real-like items together")
    p.add_argument("--n", type=int, default=200, help="items for --preset")
    p.add_argument("--n-fake", type=int, default=200)
    p.add_argument("--n-real", type=int, default=200)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--confound", action="store_true", help="add decoy friends to exercise parent inference")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="write features.csv")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-networks", help="also write macro/micro edge lists as JSONL")
    _add_extract_opts(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="fake vs. real comparison with t-tests and box plots")
    _add_input(p)
    p.add_argument("--out", required=True)
    p.add_argument("--boxplot-out", help="default: boxplot.json beside --out")
    p.add_argument("--alpha", type=_fraction, default=DEFAULT_ALPHA)
    p.add_argument("--pooled", action="store_true", help="pooled-variance t-test instead of Welch")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("train", help="repeated holdout evaluation of one classifier")
    _add_input(p)
    p.add_argument("--model", choices=KINDS, default="rf")
    p.add_argument("--features", choices=list(FEATURE_GROUPS), default="all")
    p.add_argument("--runs", type=_positive_int, default=5)
    p.add_argument("--split", type=_fraction, default=0.8)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--out", default="metrics.json")
    p.add_argument("--save-model", help="fit on all data and save the model here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model on a dataset")
    _add_input(p)
    p.add_argument("--model-file", required=True)
    p.add_argument("--features", choices=list(FEATURE_GROUPS), default="all")
    p.add_argument("--out", default="metrics.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("importance", help="random forest Gini importance")
    _add_input(p)
    p.add_argument("--model-file", help="saved random forest (default: fit one)")
    p.add_argument("--features", choices=list(FEATURE_GROUPS), default="all")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="importance.csv")
    p.set_defaults(func=cmd_importance)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (CorpusError, MalformedLexiconLine, InvalidParams, DataError, ValueError, OSError) as exc:
        print(f"hpnf {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
