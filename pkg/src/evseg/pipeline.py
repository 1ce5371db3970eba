"""End-to-end pipeline: ingest/synth -> closure -> segment labeling ->
subgraph mining -> constraint learning -> joint training -> inference ->
evaluation, with content-addressed artifacts and a deterministic manifest.

Every stage writes its artifact atomically (temp file + rename); a failed
stage leaves behind `<artifact>.partial` for inspection. Stages are
skipped on rerun when the artifact already exists and was produced under
the same configuration hash. The manifest records the configuration
hash, the seed and one SHA-256 per artifact, and contains no timestamps,
so identical configurations yield byte-identical manifests.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict

from . import __version__
from .corpus import parse_corpus, serialize_corpus, transitive_closure
from .encoders import BuiltinEncoder, ExternalEncoder, TrainableEncoder
from .errors import ConfigError, MissingArtifactError
from .inference import evaluate_corpus, gold_relations, predict_relations
from .joint import TrainConfig, load_checkpoint, save_model, train_joint
from .rectifier import extract_constraints, load_constraints, save_constraints, train as train_constraints
from .segmentation import label_corpus_segments
from .subgraphs import ConstraintExample, mine_training_examples
from .synth import GenConfig, generate_corpus

STAGES = ("corpus", "closure", "label-seg", "mine-subgraphs",
          "learn-constraints", "train", "infer", "eval")


def config_hash(config: dict) -> str:
    """Identity hash of a run configuration; the output location is not
    part of the identity, so reruns in fresh directories compare equal."""
    significant = {k: v for k, v in config.items() if k != "out_dir"}
    blob = json.dumps(significant, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_examples(examples, path):
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps({"x": list(ex.x), "t": ex.t}) + "\n")


def read_examples(path):
    examples = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                examples.append(ConstraintExample(x=tuple(rec["x"]), t=int(rec["t"])))
    return examples


def write_predictions_tsv(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("doc\te1\te2\tgold\tpred\n")
        for row in rows:
            fh.write("\t".join(str(v) for v in row) + "\n")


def build_encoder(train_cfg: dict, seed: int):
    kind = train_cfg.get("encoder", "builtin")
    if kind == "builtin":
        return BuiltinEncoder(hash_dim=int(train_cfg.get("hash_dim", 256)),
                              window=int(train_cfg.get("window", 3)),
                              seed=seed)
    if kind == "trainable":
        return TrainableEncoder(embed_dim=int(train_cfg.get("embed_dim", 32)),
                                vocab_size=int(train_cfg.get("vocab_size", 2048)),
                                window=int(train_cfg.get("window", 3)),
                                seed=seed)
    if kind == "external":
        path = train_cfg.get("embeddings")
        if not path:
            raise ConfigError("external encoder requires an 'embeddings' path")
        if not os.path.exists(path):
            raise MissingArtifactError(f"embedding file {path} not found")
        return ExternalEncoder(path)
    raise ConfigError(f"unknown encoder {kind!r}")


def make_train_config(train_cfg: dict, seed: int) -> TrainConfig:
    known = {f for f in TrainConfig.__dataclass_fields__}
    kwargs = {k: v for k, v in train_cfg.items() if k in known}
    kwargs.setdefault("seed", seed)
    if kwargs.get("class_weights") is not None:
        kwargs["class_weights"] = tuple(kwargs["class_weights"])
    return TrainConfig(**kwargs)


class PipelineRun:
    """One pipeline execution rooted at an output directory."""

    def __init__(self, config: dict):
        if "out_dir" not in config:
            raise ConfigError("run config needs an 'out_dir'")
        self.config = config
        self.seed = int(config.get("seed", 0))
        self.out_dir = config["out_dir"]
        self.hash = config_hash(config)
        os.makedirs(self.out_dir, exist_ok=True)
        self.state_path = os.path.join(self.out_dir, "stage_state.json")
        self.state = {}
        if os.path.exists(self.state_path):
            with open(self.state_path, "r", encoding="utf-8") as fh:
                self.state = json.load(fh)
        self.manifest = {"config_hash": self.hash, "seed": self.seed,
                         "version": __version__, "stages": {}}

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _record(self, stage: str, artifact: str):
        self.manifest["stages"][stage] = {
            "artifact": os.path.basename(artifact),
            "sha256": file_sha256(artifact),
        }

    def _save_state(self):
        with open(self.state_path, "w", encoding="utf-8") as fh:
            json.dump(self.state, fh, sort_keys=True)

    def stage(self, name: str, artifact: str, producer):
        """Run one stage through a temp file unless a current artifact exists."""
        final = self.path(artifact)
        if self.state.get(name) == self.hash and os.path.exists(final):
            self._record(name, final)
            return final
        temp = final + ".tmp"
        try:
            producer(temp)
        except BaseException:
            if os.path.exists(temp):
                os.replace(temp, final + ".partial")
            raise
        os.replace(temp, final)
        self.state[name] = self.hash
        self._save_state()
        self._record(name, final)
        return final

    def finish(self) -> str:
        manifest_path = self.path("manifest.json")
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(self.manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")
        return manifest_path


def run_pipeline(config: dict) -> dict:
    """Execute all stages; returns the manifest dict."""
    run = PipelineRun(config)
    seed = run.seed
    split = float(config.get("split", 0.2))

    if "synth" in config:
        gen_kwargs = dict(config["synth"])
        for key in ("sentences_per_doc", "events_per_doc", "segments_per_doc",
                    "coref_pairs_per_doc"):
            if key in gen_kwargs:
                gen_kwargs[key] = tuple(gen_kwargs[key])
        gen_kwargs.setdefault("seed", seed)
        gen_kwargs.setdefault("split", split)
        gen_cfg = GenConfig(**gen_kwargs)

        def produce_corpus(tmp):
            serialize_corpus(generate_corpus(gen_cfg), tmp)
    elif "corpus" in config:
        source = config["corpus"].get("path")
        if not source or not os.path.exists(source or ""):
            raise MissingArtifactError(f"corpus file {source!r} not found")

        def produce_corpus(tmp):
            serialize_corpus(parse_corpus(source, split=split), tmp)
    else:
        raise ConfigError("run config needs either a 'synth' or a 'corpus' section")

    corpus_path = run.stage("corpus", "corpus.raw.jsonl", produce_corpus)

    def produce_closure(tmp):
        corpus = parse_corpus(corpus_path, split=split)
        corpus.documents[:] = [transitive_closure(d) for d in corpus.documents]
        serialize_corpus(corpus, tmp)

    closed_path = run.stage("closure", "corpus.closed.jsonl", produce_closure)

    def produce_labels(tmp):
        corpus = parse_corpus(closed_path, split=split)
        serialize_corpus(label_corpus_segments(corpus), tmp)

    labeled_path = run.stage("label-seg", "corpus.labeled.jsonl", produce_labels)

    mine_cfg = config.get("mine", {})

    def produce_examples(tmp):
        corpus = parse_corpus(labeled_path, split=split)
        examples = mine_training_examples(
            corpus,
            neg_ratio=float(mine_cfg.get("neg_ratio", 1.0)),
            seed=int(mine_cfg.get("seed", seed)),
            max_triples_per_doc=int(mine_cfg.get("max_triples_per_doc", 5000)))
        write_examples(examples, tmp)

    examples_path = run.stage("mine-subgraphs", "examples.jsonl", produce_examples)

    cons_cfg = config.get("constraints", {})
    train_cfg = config.get("train", {})
    lambda_cons = float(train_cfg.get("lambda_cons", 1.0))

    def produce_constraints(tmp):
        examples = read_examples(examples_path)
        result = train_constraints(
            examples,
            k=int(cons_cfg.get("k", 10)),
            lr=float(cons_cfg.get("lr", 1e-3)),
            max_epochs=int(cons_cfg.get("epochs", 1000)),
            seed=int(cons_cfg.get("seed", seed)),
            batch_size=int(cons_cfg.get("batch_size", 128)),
            margin=float(cons_cfg.get("margin", 0.25)))
        meta = {
            "optimizer": "adam", "beta1": 0.9, "beta2": 0.999, "eps": 1e-8,
            "lr": float(cons_cfg.get("lr", 1e-3)),
            "epochs": int(cons_cfg.get("epochs", 1000)),
            "seed": int(cons_cfg.get("seed", seed)),
            "batch_size": int(cons_cfg.get("batch_size", 128)),
            "margin": float(cons_cfg.get("margin", 0.25)),
            "heldout_accuracy": result.heldout_accuracy,
            "best_epoch": result.best_epoch,
        }
        save_constraints(extract_constraints(result.net, meta=meta), tmp)

    constraints_path = None
    if lambda_cons > 0:
        constraints_path = run.stage("learn-constraints", "constraints.json",
                                     produce_constraints)

    encoder = build_encoder(train_cfg, seed)
    joint_cfg = make_train_config(train_cfg, seed)

    def produce_model(tmp):
        corpus = parse_corpus(labeled_path, split=split)
        constraints = load_constraints(constraints_path) if constraints_path else None
        result = train_joint(corpus, constraints, encoder, joint_cfg)
        save_model(result, tmp, extra={"dev_f1": result.dev_f1,
                                       "best_epoch": result.best_epoch,
                                       "config_hash": run.hash,
                                       "seed": seed},
                   encoder=encoder)

    model_path = run.stage("train", "model.json", produce_model)

    infer_cfg = config.get("infer", {})
    threshold = float(infer_cfg.get("threshold", 0.5))

    def scoring_state():
        model, enc_payload = load_checkpoint(model_path)
        scoring_encoder = TrainableEncoder.from_dict(enc_payload) \
            if enc_payload else encoder
        return model, scoring_encoder

    def produce_predictions(tmp):
        corpus = parse_corpus(labeled_path, split=split)
        model, scoring_encoder = scoring_state()
        rows = []
        for doc in corpus.test_documents():
            preds = predict_relations(model, scoring_encoder, doc)
            gold = gold_relations(doc)
            for (i, j), label in sorted(preds.items()):
                rows.append((doc.id, doc.events[i].id, doc.events[j].id,
                             gold[(i, j)], label))
        write_predictions_tsv(tmp, rows)

    run.stage("infer", "predictions.tsv", produce_predictions)

    def produce_metrics(tmp):
        corpus = parse_corpus(labeled_path, split=split)
        model, scoring_encoder = scoring_state()
        report = evaluate_corpus(model, scoring_encoder, corpus.test_documents(),
                                 threshold=threshold)
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
            fh.write("\n")

    run.stage("eval", "metrics.json", produce_metrics)
    run.finish()
    return run.manifest
