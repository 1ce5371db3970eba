"""Derive gold segmentations and same-segment labels from membership links.

Membership (ParentChild) annotations induce a directed acyclic event graph
per document. Each weakly connected component is an event complex with a
sentence span. Segment boundaries are read off the complex spans:

  1. components -> complexes with [min, max] sentence spans;
  2. if the whole graph is a single component, its root node(s) are
     dropped and the remainder re-split into complexes;
  3. disjoint spans become segments, a boundary after each span;
  4. overlapping spans are resolved by ignoring, one at a time, the event
     whose removal shrinks the total span overlap the most (ties broken
     by smallest event id), as long as that strictly helps;
  5. complexes whose spans cannot be made disjoint are merged into one
     segment;
  6. sentences covered by no complex join the preceding segment (leading
     ones join the first).

The derived boundary vector has one entry per sentence except the last;
entry i is 1 iff sentence i ends a segment.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .corpus import Document, PairLabel, RelationLabel
from .errors import InconsistentAnnotationError


@dataclass(frozen=True)
class Segmentation:
    boundaries: tuple  # 0/1 per sentence except the last
    segments: tuple    # inclusive (start, end) sentence ranges

    @classmethod
    def from_boundaries(cls, boundaries, n_sentences):
        boundaries = tuple(int(b) for b in boundaries)
        if len(boundaries) != max(n_sentences - 1, 0):
            raise ValueError(
                f"boundary vector length {len(boundaries)} for {n_sentences} sentences")
        segments = []
        start = 0
        for i, b in enumerate(boundaries):
            if b:
                segments.append((start, i))
                start = i + 1
        if n_sentences > 0:
            segments.append((start, n_sentences - 1))
        return cls(boundaries=boundaries, segments=tuple(segments))

    def segment_of_sentence(self, sentence_index: int) -> int:
        for k, (start, end) in enumerate(self.segments):
            if start <= sentence_index <= end:
                return k
        raise IndexError(f"sentence {sentence_index} outside segmentation")


@dataclass(frozen=True)
class EventComplex:
    root: int          # event id of a top node (smallest if several)
    members: frozenset  # event ids
    span: tuple        # inclusive (first, last) sentence index


def build_membership_dag(doc: Document):
    """Parent->child edge lists over event indices; only linked events appear.

    Returns (nodes, children) where `children[i]` lists the child indices
    of event i. Raises on cycles.
    """
    children = {}
    nodes = set()
    for (i, j), lab in doc.pair_labels.items():
        if lab.relation == RelationLabel.PARENT_CHILD:
            children.setdefault(i, []).append(j)
            nodes.add(i)
            nodes.add(j)
    for kids in children.values():
        kids.sort()

    # Kahn's algorithm for cycle detection
    indeg = {v: 0 for v in nodes}
    for parent, kids in children.items():
        for kid in kids:
            indeg[kid] += 1
    queue = sorted(v for v in nodes if indeg[v] == 0)
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for kid in children.get(v, ()):
            indeg[kid] -= 1
            if indeg[kid] == 0:
                queue.append(kid)
    if seen != len(nodes):
        offending = sorted(doc.events[v].id for v in nodes if indeg[v] > 0)
        raise InconsistentAnnotationError(
            f"doc {doc.id}: membership relations form a cycle through events {offending}")
    return sorted(nodes), children


def _components(nodes, children):
    """Weakly connected components as sorted lists of event indices."""
    neighbours = {v: set() for v in nodes}
    for parent, kids in children.items():
        for kid in kids:
            neighbours[parent].add(kid)
            neighbours[kid].add(parent)
    seen = set()
    comps = []
    for start in nodes:
        if start in seen:
            continue
        comp = []
        stack = [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in neighbours[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


class _Complex:
    """Mutable complex used while resolving span overlaps."""

    def __init__(self, members):
        self.members = set(members)   # event indices
        self.ignored = set()          # excluded from span computation only

    def active(self):
        return self.members - self.ignored

    def span(self, doc):
        sents = [doc.events[i].sentence_index for i in self.active()]
        return (min(sents), max(sents))


def _overlap(span_a, span_b):
    return max(0, min(span_a[1], span_b[1]) - max(span_a[0], span_b[0]) + 1)


def _total_overlap(doc, complexes):
    total = 0
    spans = [c.span(doc) for c in complexes]
    for a in range(len(spans)):
        for b in range(a + 1, len(spans)):
            total += _overlap(spans[a], spans[b])
    return total


def _resolve_overlaps(doc, complexes):
    """Ignore events / merge complexes until all spans are disjoint."""
    while True:
        spans = [c.span(doc) for c in complexes]
        overlapping = [
            (a, b) for a in range(len(complexes)) for b in range(a + 1, len(complexes))
            if _overlap(spans[a], spans[b]) > 0
        ]
        if not overlapping:
            return complexes
        current = _total_overlap(doc, complexes)

        best = None  # (resulting_overlap, event_id, complex, event_index)
        for comp in complexes:
            if len(comp.active()) < 2:
                continue
            for idx in sorted(comp.active()):
                comp.ignored.add(idx)
                result = _total_overlap(doc, complexes)
                comp.ignored.discard(idx)
                key = (result, doc.events[idx].id)
                if best is None or key < best[0]:
                    best = (key, comp, idx)
        if best is not None and best[0][0] < current:
            best[1].ignored.add(best[2])
            continue

        # no single removal helps: merge the first overlapping pair
        order = sorted(range(len(complexes)),
                       key=lambda k: (spans[k][0], spans[k][1],
                                      min(doc.events[i].id for i in complexes[k].members)))
        rank = {k: r for r, k in enumerate(order)}
        a, b = min(overlapping, key=lambda ab: (rank[ab[0]], rank[ab[1]]))
        keep, drop = complexes[a], complexes[b]
        keep.members |= drop.members
        keep.ignored |= drop.ignored
        complexes = [c for k, c in enumerate(complexes) if k != b]


def event_complexes(doc: Document):
    """Event complexes (over event ids) after overlap resolution."""
    resolved = _resolved_complexes(doc)
    out = []
    for comp in resolved:
        span = comp.span(doc)
        ids = frozenset(doc.events[i].id for i in comp.members)
        roots = _roots_of(doc, comp.members)
        out.append(EventComplex(root=min(roots) if roots else min(ids),
                                members=ids, span=span))
    out.sort(key=lambda c: (c.span, c.root))
    return out


def _roots_of(doc, member_indices):
    members = set(member_indices)
    roots = []
    for i in members:
        has_parent = any(
            doc.pair_labels[(j, i)].relation == RelationLabel.PARENT_CHILD
            for j in members if j != i)
        if not has_parent:
            roots.append(doc.events[i].id)
    return roots


def _resolved_complexes(doc):
    nodes, children = build_membership_dag(doc)
    if not nodes:
        return []
    comps = _components(nodes, children)
    if len(comps) == 1:
        # a single complex covering every linked event carries no boundary
        # information; drop its top node(s) and re-split
        member_set = set(comps[0])
        roots = [v for v in comps[0]
                 if not any(v in kids for p, kids in children.items() if p in member_set)]
        remaining = [v for v in comps[0] if v not in roots]
        if remaining:
            sub_children = {
                p: [k for k in kids if k in remaining]
                for p, kids in children.items() if p in remaining
            }
            comps = _components(remaining, sub_children)
        # else: nothing left to split, keep the single complex
    complexes = [_Complex(c) for c in comps]
    return _resolve_overlaps(doc, complexes)


def derive_segments(doc: Document) -> Segmentation:
    """Segment the document according to resolved complex spans."""
    m = len(doc.sentences)
    resolved = _resolved_complexes(doc)
    if not resolved:
        return Segmentation.from_boundaries([0] * max(m - 1, 0), m)

    spans = sorted(c.span(doc) for c in resolved)
    assignment = []
    current = 0
    for s in range(m):
        while current + 1 < len(spans) and spans[current + 1][0] <= s:
            current += 1
        assignment.append(current)
    boundaries = [1 if assignment[s + 1] != assignment[s] else 0 for s in range(m - 1)]
    return Segmentation.from_boundaries(boundaries, m)


def pairwise_same_segment(doc: Document, seg: Segmentation) -> Document:
    """Copy of `doc` with same_segment filled for every pair from `seg`."""
    seg_of = [seg.segment_of_sentence(s) for s in range(len(doc.sentences))]
    new_labels = {}
    for (i, j), lab in doc.pair_labels.items():
        same = seg_of[doc.events[i].sentence_index] == seg_of[doc.events[j].sentence_index]
        new_labels[(i, j)] = PairLabel(lab.relation, same)
    return replace(doc, pair_labels=new_labels, boundaries=list(seg.boundaries))


def label_corpus_segments(corpus):
    """Run segment labeling over every document, returning a new corpus."""
    docs = [pairwise_same_segment(doc, derive_segments(doc)) for doc in corpus.documents]
    return replace(corpus, documents=docs)
