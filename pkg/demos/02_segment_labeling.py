#!/usr/bin/env python3
"""Walkthrough: deriving segment boundaries from membership annotations.

Shows the three boundary situations the labeler distinguishes: disjoint
complex spans, overlaps that one ignored event resolves, and overlaps
that force a merge.
"""

from evseg import derive_segments, event_complexes, pairwise_same_segment
from evseg.corpus import build_document


def doc_from(events, relations, n_sentences, name):
    sentences = [{"tokens": [[f"w{s}{t}", "NOUN"] for t in range(6)]}
                 for s in range(n_sentences)]
    seen = {}
    raw_events = []
    for eid, sent in events:
        slot = seen.get(sent, 0)
        seen[sent] = slot + 1
        raw_events.append({"id": eid, "sentence": sent, "span": [slot, slot]})
    raw_relations = [{"e1": a, "e2": b, "label": "PC"} for a, b in relations]
    return build_document(name, sentences, raw_events, raw_relations)


def show(name, doc):
    seg = derive_segments(doc)
    print(f"{name}:")
    for complex_ in event_complexes(doc):
        print(f"  complex rooted at event {complex_.root}: "
              f"members {sorted(complex_.members)}, sentences {complex_.span}")
    print(f"  boundary vector: {list(seg.boundaries)}")
    print(f"  segments:        {list(seg.segments)}")
    print()


# 1. Two complexes with disjoint sentence spans: a boundary falls at the
#    end of the first span.
disjoint = doc_from(events=[(1, 0), (2, 1), (3, 2), (4, 4)],
                    relations=[(1, 2), (3, 4)], n_sentences=5, name="disjoint")
show("disjoint spans", disjoint)

# 2. Interlocking spans [0,2] and [1,3]: ignoring the two boundary events
#    (chosen to shrink total overlap the most) separates them cleanly.
removable = doc_from(events=[(0, 0), (1, 1), (5, 2), (2, 1), (6, 2), (7, 3)],
                     relations=[(0, 1), (0, 5), (2, 6), (2, 7)],
                     n_sentences=4, name="removable")
show("removable overlap", removable)

# 3. A one-sentence complex swallowed by a three-sentence complex: no
#    single event removal helps, so the contexts merge into one segment.
merged = doc_from(events=[(1, 0), (2, 1), (3, 2), (4, 1), (5, 1)],
                  relations=[(1, 2), (1, 3), (4, 5)],
                  n_sentences=3, name="merged")
show("irreducible overlap", merged)

# The pairwise same-segment flags line up with the derived boundaries.
labeled = pairwise_same_segment(disjoint, derive_segments(disjoint))
flags = {(labeled.events[i].id, labeled.events[j].id): lab.same_segment
         for (i, j), lab in labeled.pair_labels.items() if i < j}
print("same-segment flags for the disjoint example:", flags)
