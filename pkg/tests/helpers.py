"""Shared builders for hand-written test documents."""

from evseg.corpus import Corpus, build_document


def make_doc(doc_id="d0", n_sentences=3, events=(), relations=(),
             tokens_per_sentence=4, boundaries=None, gold_boundaries=None):
    """Build a small document from compact specs.

    `events` is a sequence of (event_id, sentence_index) pairs; triggers are
    laid out left to right inside each sentence. `relations` entries are
    (e1, e2, label) or (e1, e2, label, same_segment).
    """
    sentences = [{"tokens": [[f"w{s}_{t}", "NOUN"] for t in range(tokens_per_sentence)]}
                 for s in range(n_sentences)]
    per_sentence = {}
    raw_events = []
    for eid, sent in events:
        pos = per_sentence.get(sent, 0)
        per_sentence[sent] = pos + 1
        if pos >= tokens_per_sentence:
            raise ValueError("too many events for sentence width")
        raw_events.append({"id": eid, "sentence": sent, "span": [pos, pos]})
    raw_relations = []
    for rel in relations:
        entry = {"e1": rel[0], "e2": rel[1], "label": rel[2]}
        if len(rel) > 3:
            entry["same_segment"] = rel[3]
        raw_relations.append(entry)
    return build_document(doc_id, sentences, raw_events, raw_relations,
                          boundaries=boundaries, gold_boundaries=gold_boundaries)


def make_corpus(docs, split=0.2):
    return Corpus(documents=list(docs), split=split)
