"""Per-event representations and the pair combination contract.

A pair encoder turns an event pair into one real vector by concatenating
the two event vectors with their element-wise product and difference, so
every encoder only has to produce per-event vectors.

Two encoders ship with the package: a deterministic hashed bag-of-words
encoder that needs no external resources, and a loader for pre-computed
embedding files keyed by (document id, event id). The embedding file is
a small binary container:

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
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .corpus import POS_INDEX, POS_TAGS
from .errors import ValidationError

MAGIC = b"EVEM"
FORMAT_VERSION = 1


def combine_pair(h_i: np.ndarray, h_j: np.ndarray) -> np.ndarray:
    """Pair representation: concatenation, Hadamard product, difference."""
    return np.concatenate([h_i, h_j, h_i * h_j, h_i - h_j])


class PairEncoder:
    """Interface: subclasses provide `event_dim` and `event_vector`."""

    event_dim = None

    def event_vector(self, doc, event_index: int) -> np.ndarray:
        raise NotImplementedError

    @property
    def pair_dim(self) -> int:
        return 4 * self.event_dim

    def pair_representation(self, doc, i: int, j: int) -> np.ndarray:
        return combine_pair(self.event_vector(doc, i), self.event_vector(doc, j))


class BuiltinEncoder(PairEncoder):
    """Hashed lexical features of trigger and context plus a POS one-hot.

    Token features are hashed into `hash_dim` signed buckets with a
    seeded stable hash; counts are kept unnormalized so the Hadamard
    block of a pair representation counts shared tokens directly. The
    trigger's POS tag is appended as an 18-dim one-hot.
    """

    def __init__(self, hash_dim: int = 256, window: int = 3, seed: int = 0):
        self.hash_dim = hash_dim
        self.window = window
        self.seed = seed
        self.event_dim = hash_dim + len(POS_TAGS)
        self._cache = {}

    def _bucket(self, feature: str):
        digest = hashlib.blake2b(
            f"{self.seed}|{feature}".encode("utf-8"), digest_size=8).digest()
        value = int.from_bytes(digest, "little")
        return (value >> 1) % self.hash_dim, 1.0 if value & 1 else -1.0

    def event_vector(self, doc, event_index: int) -> np.ndarray:
        key = (id(doc), event_index)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        event = doc.events[event_index]
        sentence = doc.sentences[event.sentence_index]
        start, end = event.token_span
        hashed = np.zeros(self.hash_dim)
        for t in range(start, end + 1):
            idx, sign = self._bucket(f"trig={sentence.tokens[t][0].lower()}")
            hashed[idx] += sign
        for offset in range(1, self.window + 1):
            for t in (start - offset, end + offset):
                if 0 <= t < len(sentence.tokens):
                    idx, sign = self._bucket(f"ctx={sentence.tokens[t][0].lower()}")
                    hashed[idx] += sign
        pos = np.zeros(len(POS_TAGS))
        pos[POS_INDEX[sentence.tokens[start][1]]] = 1.0
        vec = np.concatenate([hashed, pos])
        self._cache[key] = vec
        return vec


class TrainableEncoder(PairEncoder):
    """Token-embedding encoder whose table is fine-tuned by the joint loss.

    Tokens hash into a fixed bucket vocabulary; an event vector is the
    mean embedding of its trigger tokens plus a damped mean over a
    context window, with the trigger's POS one-hot appended. The
    embedding table is a parameter: the joint trainer backpropagates
    through the pair combination into the table, so both tasks and the
    constraint penalty shape one shared representation.
    """

    trainable = True

    def __init__(self, embed_dim: int = 32, vocab_size: int = 2048,
                 window: int = 3, context_weight: float = 0.5, seed: int = 0,
                 table=None):
        self.embed_dim = embed_dim
        self.vocab_size = vocab_size
        self.window = window
        self.context_weight = context_weight
        self.seed = seed
        self.event_dim = embed_dim + len(POS_TAGS)
        if table is not None:
            self.table = np.asarray(table, dtype=float)
            if self.table.shape != (vocab_size, embed_dim):
                raise ValidationError(
                    f"embedding table shape {self.table.shape} does not match "
                    f"({vocab_size}, {embed_dim})")
        else:
            rng = np.random.default_rng(seed)
            scale = 1.0 / np.sqrt(embed_dim)
            self.table = rng.uniform(-scale, scale, size=(vocab_size, embed_dim))
        self._bucket_cache = {}

    def _bucket(self, token: str) -> int:
        bucket = self._bucket_cache.get(token)
        if bucket is None:
            digest = hashlib.blake2b(
                f"{self.seed}|{token}".encode("utf-8"), digest_size=8).digest()
            bucket = int.from_bytes(digest, "little") % self.vocab_size
            self._bucket_cache[token] = bucket
        return bucket

    def event_buckets(self, doc, event_index: int):
        """(trigger bucket ids, context bucket ids, POS one-hot) for an event."""
        event = doc.events[event_index]
        sentence = doc.sentences[event.sentence_index]
        start, end = event.token_span
        trigger = [self._bucket(sentence.tokens[t][0].lower())
                   for t in range(start, end + 1)]
        context = []
        for offset in range(1, self.window + 1):
            for t in (start - offset, end + offset):
                if 0 <= t < len(sentence.tokens):
                    context.append(self._bucket(sentence.tokens[t][0].lower()))
        pos = np.zeros(len(POS_TAGS))
        pos[POS_INDEX[sentence.tokens[start][1]]] = 1.0
        return trigger, context, pos

    def embed_buckets(self, trigger, context, pos) -> np.ndarray:
        vec = self.table[trigger].mean(axis=0)
        if context:
            vec = vec + self.context_weight * self.table[context].mean(axis=0)
        return np.concatenate([vec, pos])

    def event_vector(self, doc, event_index: int) -> np.ndarray:
        return self.embed_buckets(*self.event_buckets(doc, event_index))

    def to_dict(self):
        return {
            "kind": "trainable",
            "embed_dim": self.embed_dim,
            "vocab_size": self.vocab_size,
            "window": self.window,
            "context_weight": self.context_weight,
            "seed": self.seed,
            "table": self.table.tolist(),
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(embed_dim=payload["embed_dim"], vocab_size=payload["vocab_size"],
                   window=payload["window"], context_weight=payload["context_weight"],
                   seed=payload.get("seed", 0), table=payload["table"])


class ExternalEncoder(PairEncoder):
    """Per-event vectors read from an embedding file."""

    def __init__(self, path):
        self.path = str(path)
        self._index, self._vectors = read_embeddings(path)
        self.event_dim = self._vectors.shape[1] if self._vectors.size else 0

    def event_vector(self, doc, event_index: int) -> np.ndarray:
        event = doc.events[event_index]
        key = (doc.id, event.id)
        if key not in self._index:
            raise KeyError(
                f"no embedding for event {event.id} of document {doc.id!r} in {self.path}")
        return self._vectors[self._index[key]]


def read_embeddings(path):
    """Load an embedding file into ({(doc_id, event_id): row}, matrix)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ValidationError(f"{path}: not an embedding file (bad magic)")
    version, dim, count = struct.unpack_from("<III", blob, 4)
    if version != FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported format version {version}")
    pos = 16
    index = {}
    offsets = []
    for _ in range(count):
        (doc_len,) = struct.unpack_from("<H", blob, pos)
        pos += 2
        doc_id = blob[pos:pos + doc_len].decode("utf-8")
        pos += doc_len
        event_id, offset = struct.unpack_from("<IQ", blob, pos)
        pos += 12
        key = (doc_id, event_id)
        if key in index:
            raise ValidationError(f"{path}: duplicate index key {key}")
        index[key] = len(offsets)
        offsets.append(offset)
    payload = blob[pos:]
    if len(payload) != count * dim * 4:
        raise ValidationError(
            f"{path}: payload holds {len(payload) // 4} floats, expected {count * dim}")
    vectors = np.zeros((count, dim), dtype=np.float32)
    for row, offset in enumerate(offsets):
        vectors[row] = np.frombuffer(payload, dtype="<f4", count=dim, offset=offset)
    return index, vectors.astype(float)


def write_embeddings(path, entries, dim):
    """Write an embedding file; `entries` is [((doc_id, event_id), vector)].

    The exporter tool ships its own writer; this one backs fixtures and
    round-trip tests on the loader side.
    """
    index_blob = bytearray()
    payload = bytearray()
    for (doc_id, event_id), vec in entries:
        vec = np.asarray(vec, dtype="<f4")
        if vec.shape != (dim,):
            raise ValidationError(f"vector for {(doc_id, event_id)} has shape {vec.shape}")
        doc_bytes = doc_id.encode("utf-8")
        index_blob += struct.pack("<H", len(doc_bytes)) + doc_bytes
        index_blob += struct.pack("<IQ", event_id, len(payload))
        payload += vec.tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, dim, len(entries)))
        fh.write(bytes(index_blob))
        fh.write(bytes(payload))
