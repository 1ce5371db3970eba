"""Data model, ingestion and annotation completion for event-graph corpora.

A document is a list of sentences (token/POS pairs) with annotated event
mentions. Every ordered pair of distinct events carries a relation label
from {ParentChild, ChildParent, Coref, NoRel} plus an optional boolean
telling whether the two events share a descriptive segment. Pair labels
are stored for both orientations of a pair; the label of (j, i) is always
the converse of the label of (i, j).

Annotation completion (`transitive_closure`) saturates the labels under:

  R1  PC(a,b) and PC(b,c)       =>  PC(a,c)
  R2  Coref(a,b) and Coref(b,c) =>  Coref(a,c)
  R3  Coref(a,b) and PC(b,c)    =>  PC(a,c)   (and symmetrically on the right)
  R4  PC(a,b) <=> CP(b,a), Coref and NoRel are their own converses

Explicit NoRel entries are treated as absence of a relation: they never
block a derivation. Deriving two distinct non-NoRel labels for one pair,
or a self membership, is an inconsistency error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import CorpusParseError, InconsistentAnnotationError, ValidationError

# Coarse POS inventory used for the one-hot syntactic features (18 tags).
POS_TAGS = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "CONJ", "DET", "INTJ", "NOUN",
    "NUM", "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)
POS_INDEX = {tag: i for i, tag in enumerate(POS_TAGS)}


class RelationLabel:
    """Relation label constants with wire codes and converses."""

    PARENT_CHILD = "PC"
    CHILD_PARENT = "CP"
    COREF = "COREF"
    NO_REL = "NOREL"

    ALL = (PARENT_CHILD, CHILD_PARENT, COREF, NO_REL)
    _CONVERSE = {
        PARENT_CHILD: CHILD_PARENT,
        CHILD_PARENT: PARENT_CHILD,
        COREF: COREF,
        NO_REL: NO_REL,
    }

    @classmethod
    def converse(cls, label: str) -> str:
        return cls._CONVERSE[label]


# Fixed label order used by classifier outputs and argmax tie-breaking.
RELATION_ORDER = (
    RelationLabel.PARENT_CHILD,
    RelationLabel.CHILD_PARENT,
    RelationLabel.COREF,
    RelationLabel.NO_REL,
)
RELATION_INDEX = {r: i for i, r in enumerate(RELATION_ORDER)}


@dataclass(frozen=True)
class Sentence:
    index: int
    tokens: tuple  # tuple of (surface, pos) pairs


@dataclass(frozen=True)
class EventMention:
    id: int
    sentence_index: int
    token_span: tuple  # inclusive (start, end)


@dataclass
class PairLabel:
    relation: str
    same_segment: bool | None = None


@dataclass
class Document:
    """One document. Events are ordered by (sentence index, span start).

    `pair_labels` maps every ordered pair of event *indices* (positions in
    `events`, both orientations) to its label. `boundaries` holds the
    derived segmentation written back by the labeler; `gold_boundaries`
    holds a planted segmentation for synthetic documents.
    """

    id: str
    sentences: list
    events: list
    pair_labels: dict = field(default_factory=dict)
    boundaries: list | None = None
    gold_boundaries: list | None = None

    def event_index_by_id(self) -> dict:
        return {e.id: i for i, e in enumerate(self.events)}

    def ordered_pairs(self):
        """Text-ordered index pairs (i, j) with i < j."""
        n = len(self.events)
        for i in range(n):
            for j in range(i + 1, n):
                yield (i, j)

    def label(self, i: int, j: int) -> PairLabel:
        return self.pair_labels[(i, j)]


@dataclass
class Corpus:
    documents: list
    split: float = 0.20

    def __post_init__(self):
        if not 0.0 <= self.split <= 1.0:
            raise ValidationError(f"split fraction {self.split} outside [0, 1]")
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValidationError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def n_test(self) -> int:
        return int(round(len(self.documents) * self.split))

    def train_documents(self) -> list:
        n = len(self.documents)
        return self.documents[: n - self.n_test()]

    def test_documents(self) -> list:
        n = len(self.documents)
        return self.documents[n - self.n_test():]


def _validate_sentences(raw_sentences, doc_id):
    sentences = []
    for idx, raw in enumerate(raw_sentences):
        tokens = raw.get("tokens")
        if not tokens:
            raise ValidationError(f"doc {doc_id}: sentence {idx} has no tokens")
        cooked = []
        for tok in tokens:
            if len(tok) != 2:
                raise ValidationError(
                    f"doc {doc_id}: sentence {idx} token {tok!r} is not a [surface, pos] pair")
            surface, pos = tok
            if pos not in POS_INDEX:
                raise ValidationError(
                    f"doc {doc_id}: sentence {idx} has unknown POS tag {pos!r}")
            cooked.append((surface, pos))
        sentences.append(Sentence(index=idx, tokens=tuple(cooked)))
    return sentences


def _validate_events(raw_events, sentences, doc_id):
    events = []
    seen_ids = set()
    for raw in raw_events:
        eid, sent, span = raw["id"], raw["sentence"], raw["span"]
        if eid in seen_ids:
            raise ValidationError(f"doc {doc_id}: duplicate event id {eid}")
        seen_ids.add(eid)
        if not 0 <= sent < len(sentences):
            raise ValidationError(f"doc {doc_id}: event {eid} references sentence {sent}")
        start, end = span
        if not (0 <= start <= end < len(sentences[sent].tokens)):
            raise ValidationError(
                f"doc {doc_id}: event {eid} span {span} outside sentence {sent}")
        events.append(EventMention(id=eid, sentence_index=sent, token_span=(start, end)))
    events.sort(key=lambda e: (e.sentence_index, e.token_span[0], e.token_span[1]))
    # spans of distinct events in one sentence must not overlap
    for a, b in zip(events, events[1:]):
        if a.sentence_index == b.sentence_index and b.token_span[0] <= a.token_span[1]:
            raise ValidationError(
                f"doc {doc_id}: events {a.id} and {b.id} overlap in sentence {a.sentence_index}")
    return events


def build_document(doc_id, raw_sentences, raw_events, raw_relations,
                   boundaries=None, gold_boundaries=None) -> Document:
    """Construct and validate a Document from schema-level pieces.

    `raw_relations` entries are dicts with keys e1, e2, label and an
    optional same_segment flag. Unlabeled pairs default to NoRel; the
    converse orientation of every label is materialized.
    """
    sentences = _validate_sentences(raw_sentences, doc_id)
    events = _validate_events(raw_events, sentences, doc_id)
    index_of = {e.id: i for i, e in enumerate(events)}

    n = len(events)
    pair_labels = {}
    for i in range(n):
        for j in range(n):
            if i != j:
                pair_labels[(i, j)] = PairLabel(RelationLabel.NO_REL)

    explicit = {}
    for raw in raw_relations:
        e1, e2, label = raw["e1"], raw["e2"], raw["label"]
        if label not in RelationLabel.ALL:
            raise ValidationError(f"doc {doc_id}: unknown relation label {label!r}")
        for eid in (e1, e2):
            if eid not in index_of:
                raise ValidationError(
                    f"doc {doc_id}: relation references missing event id {eid}")
        if e1 == e2:
            raise ValidationError(f"doc {doc_id}: self relation on event {e1}")
        a, b = index_of[e1], index_of[e2]
        for key, lab in (((a, b), label), ((b, a), RelationLabel.converse(label))):
            if key in explicit and explicit[key] != lab:
                raise ValidationError(
                    f"doc {doc_id}: conflicting labels {explicit[key]}/{lab} "
                    f"for events ({events[key[0]].id}, {events[key[1]].id})")
            explicit[key] = lab
            pair_labels[key].relation = lab
        if raw.get("same_segment") is not None:
            pair_labels[(a, b)].same_segment = bool(raw["same_segment"])
            pair_labels[(b, a)].same_segment = bool(raw["same_segment"])

    doc = Document(id=doc_id, sentences=sentences, events=events,
                   pair_labels=pair_labels, boundaries=boundaries,
                   gold_boundaries=gold_boundaries)
    if boundaries is not None:
        if len(boundaries) != max(len(sentences) - 1, 0):
            raise ValidationError(
                f"doc {doc_id}: boundary vector length {len(boundaries)} "
                f"for {len(sentences)} sentences")
        _fill_same_segment_from_boundaries(doc)
    return doc


def _segment_of_sentence(boundaries):
    """Map sentence index -> segment index for a 0/1 boundary vector."""
    seg = []
    current = 0
    for i in range(len(boundaries) + 1):
        seg.append(current)
        if i < len(boundaries) and boundaries[i]:
            current += 1
    return seg


def _fill_same_segment_from_boundaries(doc):
    seg_of = _segment_of_sentence(doc.boundaries)
    for (i, j), lab in doc.pair_labels.items():
        lab.same_segment = (
            seg_of[doc.events[i].sentence_index] == seg_of[doc.events[j].sentence_index])


def parse_document(record: dict) -> Document:
    return build_document(
        doc_id=record["id"],
        raw_sentences=record["sentences"],
        raw_events=record["events"],
        raw_relations=record.get("relations", []),
        boundaries=record.get("boundaries"),
        gold_boundaries=record.get("gold_boundaries"),
    )


def parse_corpus(path, split: float = 0.20) -> Corpus:
    """Parse a JSONL corpus file, one document per line."""
    documents = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(str(exc), line=lineno) from exc
            try:
                documents.append(parse_document(record))
            except (ValidationError, KeyError, TypeError) as exc:
                raise CorpusParseError(f"invalid document: {exc}", line=lineno) from exc
    return Corpus(documents=documents, split=split)


def document_record(doc: Document) -> dict:
    """Schema-level dict for one document (inverse of parse_document)."""
    record = {
        "id": doc.id,
        "sentences": [{"tokens": [[s, p] for s, p in sent.tokens]} for sent in doc.sentences],
        "events": [{"id": e.id, "sentence": e.sentence_index,
                    "span": list(e.token_span)} for e in doc.events],
    }
    relations = []
    for (i, j) in sorted(k for k in doc.pair_labels if k[0] < k[1]):
        lab = doc.pair_labels[(i, j)]
        if lab.relation == RelationLabel.NO_REL:
            continue
        entry = {"e1": doc.events[i].id, "e2": doc.events[j].id, "label": lab.relation}
        if lab.same_segment is not None:
            entry["same_segment"] = lab.same_segment
        relations.append(entry)
    record["relations"] = relations
    if doc.boundaries is not None:
        record["boundaries"] = list(doc.boundaries)
    if doc.gold_boundaries is not None:
        record["gold_boundaries"] = list(doc.gold_boundaries)
    return record


def serialize_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            fh.write(json.dumps(document_record(doc), sort_keys=True) + "\n")


def _pair_name(doc, i, j):
    return f"doc {doc.id}: events ({doc.events[i].id}, {doc.events[j].id})"


def transitive_closure(doc: Document) -> Document:
    """Return a copy of `doc` whose labels are the least fixpoint of R1-R4.

    Implemented by collapsing coreference clusters (union-find) and taking
    the reachability closure of membership edges over clusters, which is
    equivalent to saturating the rule set directly.
    """
    n = len(doc.events)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    pc_pairs = []
    for (i, j), lab in doc.pair_labels.items():
        if lab.relation == RelationLabel.COREF:
            union(i, j)
        elif lab.relation == RelationLabel.PARENT_CHILD:
            pc_pairs.append((i, j))

    cluster_of = [find(i) for i in range(n)]
    edges = set()
    for (i, j) in pc_pairs:
        ci, cj = cluster_of[i], cluster_of[j]
        if ci == cj:
            raise InconsistentAnnotationError(
                f"{_pair_name(doc, i, j)} carry both membership and coreference")
        edges.add((ci, cj))

    # reachability closure over the cluster graph
    clusters = sorted({c for c in cluster_of})
    succ = {c: set() for c in clusters}
    for (a, b) in edges:
        succ[a].add(b)
    reach = {}
    for c in clusters:
        seen = set()
        stack = [c]
        while stack:
            node = stack.pop()
            for nxt in succ[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if c in seen:
            i = next(i for i in range(n) if cluster_of[i] == c)
            raise InconsistentAnnotationError(
                f"doc {doc.id}: membership cycle through event {doc.events[i].id}")
        reach[c] = seen

    new_labels = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            ci, cj = cluster_of[i], cluster_of[j]
            if ci == cj:
                rel = RelationLabel.COREF
            elif cj in reach[ci]:
                rel = RelationLabel.PARENT_CHILD
            elif ci in reach[cj]:
                rel = RelationLabel.CHILD_PARENT
            else:
                rel = RelationLabel.NO_REL
            new_labels[(i, j)] = PairLabel(rel, doc.pair_labels[(i, j)].same_segment)

    return Document(id=doc.id, sentences=doc.sentences, events=doc.events,
                    pair_labels=new_labels, boundaries=doc.boundaries,
                    gold_boundaries=doc.gold_boundaries)


def compute_stats(corpus: Corpus) -> dict:
    """Within/across-segment pair counts per relation, over text-ordered pairs.

    Returns {relation: (within, across)}. Requires same_segment to be
    filled for every pair (run the segmentation labeler first).
    """
    counts = {r: [0, 0] for r in RELATION_ORDER}
    for doc in corpus.documents:
        for (i, j) in doc.ordered_pairs():
            lab = doc.pair_labels[(i, j)]
            if lab.same_segment is None:
                raise ValidationError(
                    f"{_pair_name(doc, i, j)} lack a same_segment flag")
            counts[lab.relation][0 if lab.same_segment else 1] += 1
    return {r: tuple(v) for r, v in counts.items()}


def membership_within_fraction(stats: dict) -> float:
    """Fraction of membership (PC + CP) pairs that fall within one segment."""
    w = stats[RelationLabel.PARENT_CHILD][0] + stats[RelationLabel.CHILD_PARENT][0]
    a = stats[RelationLabel.PARENT_CHILD][1] + stats[RelationLabel.CHILD_PARENT][1]
    if w + a == 0:
        raise ValidationError("corpus has no membership pairs")
    return w / (w + a)
