"""Compute per-event embedding vectors and write the binary container.

The tool reads the corpus JSONL interchange format (one document per
line with sentences, events and relations) and writes one vector per
event mention, keyed by (document id, event id):

    magic   b"EVEM"
    u32     format version (1)
    u32     vector dimension
    u32     vector count
    count x index records:
        u16   document-id byte length
        bytes document id (utf-8)
        u32   event id
        u64   byte offset of the vector inside the payload
    payload: count x dimension float32, little endian

Vectors describe an event in its own sentence context; pair combination
happens downstream, which keeps the cost linear in the number of events.
Two encoder families are available: `hash<dim>` (a deterministic seeded
random-projection bag of the trigger and its sentence, no external
downloads) and any local transformers checkpoint, where the vector is
the element-wise average of the subword states covering the trigger
span.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct

import numpy as np

MAGIC = b"EVEM"
FORMAT_VERSION = 1


class ExportError(Exception):
    pass


def read_corpus_events(path):
    """Yield (doc_id, event_id, sentence_tokens, span) from a corpus file."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExportError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            sentences = [[tok[0] for tok in sent["tokens"]]
                         for sent in record["sentences"]]
            for event in record.get("events", []):
                sent = event["sentence"]
                if not 0 <= sent < len(sentences):
                    raise ExportError(
                        f"{path}:{lineno}: event {event['id']} references "
                        f"missing sentence {sent}")
                yield record["id"], event["id"], sentences[sent], tuple(event["span"])


class HashEncoder:
    """Deterministic random-projection encoder; no external resources.

    Every token maps to a fixed unit Gaussian vector derived from its
    own hash; an event vector is the average of its trigger-span token
    vectors plus a damped average of the rest of the sentence.
    """

    def __init__(self, dim: int = 64, context_weight: float = 0.5):
        self.dim = dim
        self.context_weight = context_weight

    def _token_vector(self, token: str) -> np.ndarray:
        digest = hashlib.blake2b(token.lower().encode("utf-8"), digest_size=8).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "little"))
        vec = rng.standard_normal(self.dim)
        return vec / np.linalg.norm(vec)

    def encode_event(self, tokens, span) -> np.ndarray:
        start, end = span
        if not 0 <= start <= end < len(tokens):
            raise ExportError(f"span {span} outside sentence of {len(tokens)} tokens")
        trigger = np.mean([self._token_vector(t) for t in tokens[start:end + 1]], axis=0)
        rest = [self._token_vector(t) for i, t in enumerate(tokens)
                if i < start or i > end]
        if rest:
            trigger = trigger + self.context_weight * np.mean(rest, axis=0)
        return trigger.astype(np.float32)


class TransformerEncoder:
    """Span-averaged hidden states from a local transformers checkpoint."""

    def __init__(self, model_name: str):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:  # pragma: no cover
            raise ExportError(
                "transformers/torch are required for pretrained encoders; "
                "install the 'transformer' extra") from exc
        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModel.from_pretrained(model_name)
        self.model.eval()
        self.dim = int(self.model.config.hidden_size)

    def encode_event(self, tokens, span) -> np.ndarray:
        torch = self._torch
        start, end = span
        encoded = self.tokenizer(tokens, is_split_into_words=True,
                                 return_tensors="pt", truncation=True)
        word_ids = encoded.word_ids(0)
        rows = [pos for pos, wid in enumerate(word_ids)
                if wid is not None and start <= wid <= end]
        if not rows:
            raise ExportError(f"trigger span {span} produced no subwords")
        with torch.no_grad():
            states = self.model(**encoded).last_hidden_state[0]
        return states[rows].mean(dim=0).cpu().numpy().astype(np.float32)


def build_encoder(model_name: str):
    if model_name.startswith("hash"):
        suffix = model_name[4:] or "64"
        try:
            dim = int(suffix)
        except ValueError as exc:
            raise ExportError(f"bad hash encoder spec {model_name!r}") from exc
        return HashEncoder(dim=dim)
    return TransformerEncoder(model_name)


def write_container(path, entries, dim):
    """Atomically write the embedding container."""
    index_blob = bytearray()
    payload = bytearray()
    seen = set()
    for (doc_id, event_id), vec in entries:
        key = (doc_id, event_id)
        if key in seen:
            raise ExportError(f"duplicate event key {key}")
        seen.add(key)
        vec = np.asarray(vec, dtype="<f4")
        if vec.shape != (dim,):
            raise ExportError(f"vector for {key} has shape {vec.shape}, expected ({dim},)")
        doc_bytes = doc_id.encode("utf-8")
        index_blob += struct.pack("<H", len(doc_bytes)) + doc_bytes
        index_blob += struct.pack("<IQ", event_id, len(payload))
        payload += vec.tobytes()
    temp = f"{path}.tmp"
    with open(temp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, dim, len(seen)))
        fh.write(bytes(index_blob))
        fh.write(bytes(payload))
    os.replace(temp, path)


def export(corpus_path, model_name, out_path) -> int:
    """Encode every event of the corpus; returns the vector count."""
    encoder = build_encoder(model_name)
    entries = []
    for doc_id, event_id, tokens, span in read_corpus_events(corpus_path):
        try:
            vec = encoder.encode_event(tokens, span)
        except ExportError as exc:
            raise ExportError(
                f"event {event_id} of document {doc_id!r}: {exc}") from exc
        entries.append(((doc_id, event_id), vec))
    write_container(out_path, entries, encoder.dim)
    return len(entries)
