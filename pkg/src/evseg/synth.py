"""Synthetic corpora with planted membership trees and segment structure.

Each document is partitioned into contiguous sentence segments. Every
segment hosts one membership tree whose root sits in the segment's first
sentence, so a labeler run on an unperturbed document recovers the
planted boundaries exactly. Cross-segment membership is created by
relocating leaf events into a neighboring segment; the per-leaf
relocation probability is calibrated per document so that the corpus
fraction of within-segment membership pairs matches the configured
target (0.6513 by default). Coreference pairs are planted on singleton
events, within one segment or across two, and share a trigger token.

Trigger and context tokens carry configurable signal: roots draw from a
parent vocabulary, other tree members from a child vocabulary, remaining
slots from an ambiguous pool, and filler words lean on a per-segment
topic so that same-segment pairs are lexically detectable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .corpus import Corpus, RelationLabel, build_document, transitive_closure
from .errors import ConfigError
from .segmentation import Segmentation, pairwise_same_segment

PARENT_VOCAB = [f"launch{n}" for n in range(24)]
MID_VOCAB = [f"phase{n}" for n in range(24)]
CHILD_VOCAB = [f"step{n}" for n in range(24)]
AMBIGUOUS_VOCAB = [f"event{n}" for n in range(24)]
SINGLETON_VOCAB = [f"happen{n}" for n in range(48)]
GENERIC_FILLERS = [("the", "DET"), ("of", "ADP"), ("a", "DET"), ("in", "ADP"),
                   ("was", "AUX"), ("very", "ADV")]
N_TOPICS = 8
TOPIC_WORDS = 6
TOPIC_SPAN = 3   # topic words visible per sentence
DRIFT_CAP = 3    # sentence offsets beyond this share one sliding window

# Each sentence of a segment sees a sliding window of its topic's word
# list, so lexical overlap between two positions decays with their
# distance: adjacent sentences share two words, sentences three or more
# apart share none. Relation evidence therefore weakens with distance
# while chain structure stays informative.


def _topic_words(topic, offset):
    lo = min(offset, DRIFT_CAP)
    return [f"t{topic}w{(lo + j) % TOPIC_WORDS}" for j in range(TOPIC_SPAN)]


@dataclass
class GenConfig:
    n_docs: int = 100
    sentences_per_doc: tuple = (11, 16)
    events_per_doc: tuple = (8, 14)
    segments_per_doc: tuple = (3, 5)  # uniform, mean 4
    within_membership_prob: float = 0.6513
    coref_within_prob: float = 0.47
    seed: int = 0
    trigger_signal: float = 0.85
    topic_signal: float = 0.85
    coref_pairs_per_doc: tuple = (0, 2)
    deep_tree_prob: float = 0.75
    split: float = 0.2

    def __post_init__(self):
        for name in ("within_membership_prob", "coref_within_prob",
                     "trigger_signal", "topic_signal"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name}={value} outside [0, 1]")
        if self.segments_per_doc[0] > self.sentences_per_doc[0]:
            raise ConfigError(
                f"cannot fit {self.segments_per_doc[0]} segments into "
                f"{self.sentences_per_doc[0]} sentences")
        if self.n_docs < 0:
            raise ConfigError("n_docs must be non-negative")


class _Event:
    __slots__ = ("handle", "sentence", "trigger", "pos", "order_in_sentence",
                 "home_segment")

    def __init__(self, handle, sentence, trigger, pos="VERB", home_segment=None):
        self.handle = handle
        self.sentence = sentence
        self.trigger = trigger
        self.pos = pos
        self.order_in_sentence = 0.0
        self.home_segment = home_segment


def _sample_segments(rng, m, lo, hi):
    n_seg = int(rng.integers(lo, hi + 1))
    n_seg = max(1, min(n_seg, m))
    cuts = sorted(rng.choice(np.arange(1, m), size=n_seg - 1, replace=False).tolist()) \
        if n_seg > 1 else []
    spans = []
    start = 0
    for cut in cuts + [m]:
        spans.append((start, cut - 1))
        start = cut
    return spans


def _pick(rng, vocab):
    return vocab[int(rng.integers(len(vocab)))]


def _build_trees(rng, cfg, spans, n_events):
    """Assign events to segments and sample one membership tree each.

    Returns (events, edges, singles) over event handles; roots sit in
    their segment's first sentence.
    """
    n_seg = len(spans)
    per_segment = [2] * n_seg
    spare = max(n_events - 2 * n_seg, 0)
    for _ in range(spare):
        per_segment[int(rng.integers(n_seg))] += 1

    events = []
    edges = []
    handle = 0
    for seg_idx, (lo, hi) in enumerate(spans):
        count = per_segment[seg_idx]
        root = _Event(handle, lo, None, home_segment=seg_idx)
        handle += 1
        members = [root]
        for _ in range(count - 1):
            sent = int(rng.integers(lo, hi + 1))
            members.append(_Event(handle, sent, None, home_segment=seg_idx))
            handle += 1
        children = members[1:]
        deep = cfg.deep_tree_prob > 0 and len(children) >= 2 \
            and rng.random() < cfg.deep_tree_prob
        if deep:
            # narrative chain: finer and finer events as the segment
            # progresses, so long-range ancestor pairs span the topic drift
            chain = children[: 3 if len(children) >= 3 else 2]
            for depth, node in enumerate(chain, start=1):
                node.sentence = min(lo + depth, hi)
            edges.append((root.handle, chain[0].handle))
            for parent, child in zip(chain, chain[1:]):
                edges.append((parent.handle, child.handle))
            for child in children[len(chain):]:
                edges.append((root.handle, child.handle))
        else:
            for child in children:
                edges.append((root.handle, child.handle))
        events.extend(members)
    return events, edges


def _closure_pairs(edges):
    children = {}
    for parent, child in edges:
        children.setdefault(parent, set()).add(child)
    pairs = set()
    for start in list(children):
        stack = list(children[start])
        while stack:
            node = stack.pop()
            pairs.add((start, node))
            stack.extend(children.get(node, ()))
    return pairs


def _relocate_leaves(rng, cfg, events, edges, spans):
    """Move leaf events to a neighboring segment to plant cross-segment pairs."""
    if len(spans) < 2 or cfg.within_membership_prob >= 1.0:
        return
    by_handle = {e.handle: e for e in events}
    parents = {p for p, _ in edges}
    descend = _closure_pairs(edges)
    depth = {}
    for anc, node in descend:
        depth[node] = depth.get(node, 0) + 1
    leaves = [h for h in depth if h not in parents]
    leaf_pairs = sum(depth[h] for h in leaves)
    if leaf_pairs == 0:
        return
    target_cross = len(descend) * (1.0 - cfg.within_membership_prob)
    q = min(1.0, target_cross / leaf_pairs)
    seg_of = {}
    for seg_idx, (lo, hi) in enumerate(spans):
        for e in events:
            if lo <= e.sentence <= hi:
                seg_of[e.handle] = seg_idx
    for h in leaves:
        if rng.random() >= q:
            continue
        seg = seg_of[h]
        options = [s for s in (seg - 1, seg + 1) if 0 <= s < len(spans)]
        new_seg = options[int(rng.integers(len(options)))]
        lo, hi = spans[new_seg]
        by_handle[h].sentence = int(rng.integers(lo, hi + 1))


def _plant_corefs(rng, cfg, spans, next_handle):
    events, pairs = [], []
    lo_n, hi_n = cfg.coref_pairs_per_doc
    n_pairs = int(rng.integers(lo_n, hi_n + 1))
    for _ in range(n_pairs):
        token = _pick(rng, SINGLETON_VOCAB)
        if rng.random() < cfg.coref_within_prob or len(spans) < 2:
            seg_a = seg_b = int(rng.integers(len(spans)))
        else:
            seg_a, seg_b = rng.choice(len(spans), size=2, replace=False).tolist()
        made = []
        for seg in (seg_a, seg_b):
            lo, hi = spans[seg]
            ev = _Event(next_handle, int(rng.integers(lo, hi + 1)), token)
            next_handle += 1
            events.append(ev)
            made.append(ev)
        pairs.append((made[0].handle, made[1].handle))
    return events, pairs, next_handle


def _assign_triggers(rng, cfg, events, edges):
    parents = {p for p, _ in edges}
    children = {c for _, c in edges}
    for e in events:
        if e.trigger is not None:
            continue  # coref mentions share a preset token
        if rng.random() >= cfg.trigger_signal:
            e.trigger = _pick(rng, AMBIGUOUS_VOCAB)
        elif e.handle in parents and e.handle in children:
            e.trigger = _pick(rng, MID_VOCAB)
        elif e.handle in parents:
            e.trigger = _pick(rng, PARENT_VOCAB)
        elif e.handle in children:
            e.trigger = _pick(rng, CHILD_VOCAB)
        else:
            e.trigger = _pick(rng, SINGLETON_VOCAB)


def _layout_tokens(rng, cfg, m, spans, events, topics):
    """Realize sentences as token lists and compute event spans."""
    seg_of_sentence = {}
    offset_of_sentence = {}
    for seg_idx, (lo, hi) in enumerate(spans):
        for s in range(lo, hi + 1):
            seg_of_sentence[s] = seg_idx
            offset_of_sentence[s] = s - lo
    for e in events:
        e.order_in_sentence = rng.random()
    by_sentence = {}
    for e in events:
        by_sentence.setdefault(e.sentence, []).append(e)

    raw_sentences = []
    raw_events = []
    for s in range(m):
        sentence_topic = topics[seg_of_sentence[s]]
        sentence_words = _topic_words(sentence_topic, offset_of_sentence[s])
        tokens = []

        def filler(words):
            if rng.random() < cfg.topic_signal:
                return (words[int(rng.integers(len(words)))], "NOUN")
            return GENERIC_FILLERS[int(rng.integers(len(GENERIC_FILLERS)))]

        tokens.append(filler(sentence_words))
        for e in sorted(by_sentence.get(s, []), key=lambda x: x.order_in_sentence):
            # a relocated member keeps talking about its home complex, so
            # its immediate context leans on the home segment's topic
            if e.home_segment is not None and e.home_segment != seg_of_sentence[s]:
                event_words = _topic_words(topics[e.home_segment], 0)
            else:
                event_words = sentence_words
            tokens.append(filler(event_words))
            raw_events.append({"id": None, "handle": e.handle, "sentence": s,
                               "span": [len(tokens), len(tokens)]})
            tokens.append((e.trigger, e.pos))
            tokens.append(filler(event_words))
        tokens.append(filler(sentence_words))
        raw_sentences.append({"tokens": [[w, p] for w, p in tokens]})
    return raw_sentences, raw_events


def _generate_document(doc_idx, cfg) -> "Document":
    rng = np.random.default_rng((cfg.seed, doc_idx))
    m = int(rng.integers(cfg.sentences_per_doc[0], cfg.sentences_per_doc[1] + 1))
    spans = _sample_segments(rng, m, *cfg.segments_per_doc)
    if len(spans) > m:
        raise ConfigError(f"doc {doc_idx}: more segments than sentences")

    n_events = int(rng.integers(cfg.events_per_doc[0], cfg.events_per_doc[1] + 1))
    events, edges = _build_trees(rng, cfg, spans, n_events)
    _relocate_leaves(rng, cfg, events, edges, spans)
    coref_events, coref_pairs, _ = _plant_corefs(
        rng, cfg, spans, max(e.handle for e in events) + 1)
    events = events + coref_events
    _assign_triggers(rng, cfg, events, edges)

    topics = [int(rng.integers(N_TOPICS)) for _ in spans]
    raw_sentences, raw_events = _layout_tokens(rng, cfg, m, spans, events, topics)

    # ids follow text order for reproducible tie-breaking downstream
    raw_events.sort(key=lambda ev: (ev["sentence"], ev["span"][0]))
    id_of_handle = {}
    for seq, ev in enumerate(raw_events, start=1):
        ev["id"] = seq
        id_of_handle[ev.pop("handle")] = seq

    raw_relations = [
        {"e1": id_of_handle[p], "e2": id_of_handle[c], "label": RelationLabel.PARENT_CHILD}
        for (p, c) in edges
    ] + [
        {"e1": id_of_handle[a], "e2": id_of_handle[b], "label": RelationLabel.COREF}
        for (a, b) in coref_pairs
    ]

    boundaries = [0] * (m - 1)
    for (_, hi) in spans[:-1]:
        boundaries[hi] = 1

    doc = build_document(f"synth-{doc_idx:05d}", raw_sentences, raw_events,
                         raw_relations, gold_boundaries=boundaries)
    doc = transitive_closure(doc)
    seg = Segmentation.from_boundaries(boundaries, m)
    doc = pairwise_same_segment(doc, seg)
    return replace(doc, gold_boundaries=boundaries)


def generate_corpus(cfg: GenConfig) -> Corpus:
    """Deterministically generate a closed, segment-labeled corpus."""
    documents = [_generate_document(i, cfg) for i in range(cfg.n_docs)]
    return Corpus(documents=documents, split=cfg.split)
