"""Command-line entry point.

Subcommands mirror the pipeline stages (ingest, closure, label-seg,
mine-subgraphs, learn-constraints, train, infer, eval, synth) plus `run`,
which executes the whole sequence from a single JSON configuration.

Exit codes: 0 success, 2 configuration errors, 3 data validation errors,
4 missing input artifacts, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys

from .corpus import parse_corpus, serialize_corpus, transitive_closure
from .errors import (
    ConfigError,
    CorpusParseError,
    InconsistentAnnotationError,
    MissingArtifactError,
    ValidationError,
)
from .inference import evaluate_corpus, gold_relations, predict_relations
from .joint import load_checkpoint, save_model, train_joint
from .pipeline import (
    build_encoder,
    make_train_config,
    read_examples,
    run_pipeline,
    write_examples,
    write_predictions_tsv,
)
from .rectifier import extract_constraints, load_constraints, save_constraints
from .rectifier import train as train_constraints
from .segmentation import label_corpus_segments
from .subgraphs import mine_training_examples
from .synth import GenConfig, generate_corpus

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_MISSING = 4


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise MissingArtifactError(f"config file {path} not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


def cmd_ingest(args):
    corpus = parse_corpus(args.infile, split=args.split)
    serialize_corpus(corpus, args.out)
    print(f"ingested {len(corpus.documents)} documents -> {args.out}")


def cmd_closure(args):
    corpus = parse_corpus(args.infile, split=args.split)
    corpus.documents[:] = [transitive_closure(d) for d in corpus.documents]
    serialize_corpus(corpus, args.out)
    print(f"closure completed for {len(corpus.documents)} documents -> {args.out}")


def cmd_label_seg(args):
    corpus = parse_corpus(args.infile, split=args.split)
    labeled = label_corpus_segments(corpus)
    serialize_corpus(labeled, args.out)
    n_seg = sum(sum(d.boundaries) + 1 for d in labeled.documents if d.boundaries)
    print(f"labeled {len(labeled.documents)} documents "
          f"({n_seg} segments) -> {args.out}")


def cmd_mine(args):
    corpus = parse_corpus(args.infile, split=args.split)
    examples = mine_training_examples(corpus, neg_ratio=args.neg_ratio,
                                      seed=args.seed,
                                      max_triples_per_doc=args.max_triples)
    write_examples(examples, args.out)
    n_pos = sum(1 for e in examples if e.t == 1)
    print(f"mined {len(examples)} examples ({n_pos} positive) -> {args.out}")


def cmd_learn_constraints(args):
    examples = read_examples(args.infile)
    result = train_constraints(examples, k=args.k, lr=args.lr,
                               max_epochs=args.epochs, seed=args.seed,
                               batch_size=args.batch_size, margin=args.margin)
    meta = {"optimizer": "adam", "beta1": 0.9, "beta2": 0.999, "eps": 1e-8,
            "lr": args.lr, "epochs": args.epochs, "seed": args.seed,
            "batch_size": args.batch_size, "margin": args.margin,
            "heldout_accuracy": result.heldout_accuracy,
            "best_epoch": result.best_epoch}
    save_constraints(extract_constraints(result.net, meta=meta), args.out)
    print(f"learned {args.k} constraints "
          f"(held-out accuracy {result.heldout_accuracy:.4f}) -> {args.out}")


def cmd_train(args):
    train_cfg = _load_json(args.config) if args.config else {}
    if args.encoder:
        train_cfg["encoder"] = args.encoder
    if args.embeddings:
        train_cfg["embeddings"] = args.embeddings
    corpus = parse_corpus(args.corpus, split=args.split)
    cfg = make_train_config(train_cfg, args.seed)
    encoder = build_encoder(train_cfg, args.seed)
    constraints = load_constraints(args.constraints) if args.constraints else None
    result = train_joint(corpus, constraints, encoder, cfg)
    save_model(result, args.out, extra={"dev_f1": result.dev_f1,
                                        "best_epoch": result.best_epoch,
                                        "train_config": train_cfg,
                                        "seed": args.seed},
               encoder=encoder)
    print(f"trained joint model (dev micro-F1 {result.dev_f1:.4f}) -> {args.out}")


def _scored_corpus(args):
    from .encoders import TrainableEncoder

    train_cfg = _load_json(args.config) if args.config else {}
    if args.encoder:
        train_cfg["encoder"] = args.encoder
    if args.embeddings:
        train_cfg["embeddings"] = args.embeddings
    corpus = parse_corpus(args.corpus, split=args.split)
    model, enc_payload = load_checkpoint(args.model)
    if enc_payload:
        encoder = TrainableEncoder.from_dict(enc_payload)
    else:
        encoder = build_encoder(train_cfg, args.seed)
    return corpus, model, encoder


def _prediction_rows(model, encoder, docs):
    rows = []
    for doc in docs:
        preds = predict_relations(model, encoder, doc)
        gold = gold_relations(doc)
        for (i, j), label in sorted(preds.items()):
            rows.append((doc.id, doc.events[i].id, doc.events[j].id,
                         gold[(i, j)], label))
    return rows


def cmd_infer(args):
    corpus, model, encoder = _scored_corpus(args)
    docs = corpus.test_documents() if args.test_only else corpus.documents
    write_predictions_tsv(args.out, _prediction_rows(model, encoder, docs))
    if args.metrics:
        report = evaluate_corpus(model, encoder, docs, threshold=args.threshold)
        with open(args.metrics, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    print(f"wrote predictions for {len(docs)} documents -> {args.out}")


def cmd_eval(args):
    corpus, model, encoder = _scored_corpus(args)
    docs = corpus.test_documents() if args.test_only else corpus.documents
    report = evaluate_corpus(model, encoder, docs, threshold=args.threshold)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    if args.tsv:
        write_predictions_tsv(args.tsv, _prediction_rows(model, encoder, docs))
    print(report.to_json())


def cmd_synth(args):
    gen_cfg = _load_json(args.config) if args.config else {}
    for key in ("sentences_per_doc", "events_per_doc", "segments_per_doc",
                "coref_pairs_per_doc"):
        if key in gen_cfg:
            gen_cfg[key] = tuple(gen_cfg[key])
    if args.n_docs is not None:
        gen_cfg["n_docs"] = args.n_docs
    if args.seed is not None:
        gen_cfg["seed"] = args.seed
    corpus = generate_corpus(GenConfig(**gen_cfg))
    serialize_corpus(corpus, args.out)
    print(f"generated {len(corpus.documents)} documents -> {args.out}")


def cmd_run(args):
    config = _load_json(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    if args.out_dir:
        config["out_dir"] = args.out_dir
    manifest = run_pipeline(config)
    print(json.dumps(manifest, sort_keys=True, indent=2))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="evseg",
        description="Subevent relations with segment-aware learned constraints")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--split", type=float, default=0.2,
                       help="test fraction of documents (default 0.2)")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("ingest", help="validate and normalize a JSONL corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("closure", help="complete annotations under the rule set")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("label-seg", help="derive segment boundaries and pair flags")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_label_seg)

    p = sub.add_parser("mine-subgraphs", help="induce constraint-learning examples")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--neg-ratio", type=float, default=1.0)
    p.add_argument("--max-triples", type=int, default=5000)
    common(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("learn-constraints", help="train the rectifier constraint net")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--margin", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_learn_constraints)

    def scoring_args(p, needs_model=True):
        p.add_argument("--corpus", required=True)
        if needs_model:
            p.add_argument("--model", required=True)
        p.add_argument("--encoder", choices=["builtin", "external"], default=None)
        p.add_argument("--embeddings")
        p.add_argument("--config", help="JSON with encoder/training settings")
        common(p)

    p = sub.add_parser("train", help="train the joint relation/segment model")
    p.add_argument("--constraints")
    p.add_argument("--out", required=True)
    scoring_args(p, needs_model=False)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="predict relations (and optional metrics)")
    p.add_argument("--out", required=True)
    p.add_argument("--metrics")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--test-only", action="store_true")
    scoring_args(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="score predictions against gold labels")
    p.add_argument("--out", required=True)
    p.add_argument("--tsv")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--test-only", action="store_true")
    scoring_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="JSON generation settings")
    p.add_argument("--n-docs", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="execute the full pipeline from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CorpusParseError, ValidationError, InconsistentAnnotationError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (MissingArtifactError, FileNotFoundError) as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except Exception as exc:  # pragma: no cover
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
