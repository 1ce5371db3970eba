"""Encode three-event subgraphs into the 42-dimensional constraint space.

A three-event subgraph over text-ordered events (i, j, k) is featurized as
two pair-assignment blocks plus a value-set block for the third pair:

  positions 0..4    pair (i, j): one-hot relation [PC, CP, Coref, NoRel]
                    followed by the same-segment flag
  positions 5..9    pair (j, k), same layout
  positions 10..41  32 subset indicators over the 5-element universe
                    {PC, CP, Coref, NoRel, Z} encoding the set of values
                    the pair (i, k) may take

Subset indices use the bit order Z=1, NoRel=2, Coref=4, CP=8, PC=16, so an
assignment (relation r, same-segment s) lands at local index bit(r) + s.
Only the 8 subsets with exactly one relation bit are well formed; the
remaining 24 slots stay zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .corpus import RELATION_INDEX, RELATION_ORDER, RelationLabel

PAIR_BLOCK = 5
VALUE_SLOTS = 32
FEATURE_DIM = 2 * PAIR_BLOCK + VALUE_SLOTS

_RELATION_BIT = {
    RelationLabel.PARENT_CHILD: 16,
    RelationLabel.CHILD_PARENT: 8,
    RelationLabel.COREF: 4,
    RelationLabel.NO_REL: 2,
}
_Z_BIT = 1


class PairAssignment(NamedTuple):
    relation: str
    same_segment: bool


# the 8 well-formed assignments in slot order
WELL_FORMED = tuple(sorted(
    (PairAssignment(r, bool(z)) for r in RELATION_ORDER for z in (0, 1)),
    key=lambda a: _RELATION_BIT[a.relation] + (a.same_segment and _Z_BIT),
))


def assignment_slot(assignment: PairAssignment) -> int:
    """Local index of an assignment inside the 32 value slots."""
    return _RELATION_BIT[assignment.relation] + (_Z_BIT if assignment.same_segment else 0)


def encode_pair(assignment: PairAssignment) -> np.ndarray:
    vec = np.zeros(PAIR_BLOCK)
    vec[RELATION_INDEX[assignment.relation]] = 1.0
    if assignment.same_segment:
        vec[4] = 1.0
    return vec


def encode_powerset(values) -> np.ndarray:
    vec = np.zeros(VALUE_SLOTS)
    for assignment in values:
        vec[assignment_slot(PairAssignment(*assignment))] = 1.0
    return vec


def featurize_subgraph(a_ij: PairAssignment, a_jk: PairAssignment, values_ik) -> np.ndarray:
    return np.concatenate([encode_pair(a_ij), encode_pair(a_jk), encode_powerset(values_ik)])


def validate_feature(x) -> None:
    """Assert the structural invariants of a hard subgraph feature vector."""
    x = np.asarray(x)
    if x.shape != (FEATURE_DIM,):
        raise ValueError(f"expected {FEATURE_DIM}-dim vector, got shape {x.shape}")
    if not np.isin(x, (0.0, 1.0)).all():
        raise ValueError("feature vector is not binary")
    for offset in (0, PAIR_BLOCK):
        if x[offset:offset + 4].sum() != 1:
            raise ValueError(f"pair block at {offset} is not one-hot")
    for local in range(VALUE_SLOTS):
        if x[2 * PAIR_BLOCK + local]:
            relation_bits = [r for r, bit in _RELATION_BIT.items() if local & bit]
            if len(relation_bits) != 1:
                raise ValueError(f"set subset indicator {local} is not a well-formed assignment")


@dataclass(frozen=True)
class ConstraintExample:
    x: tuple  # 42 binary values
    t: int


def _assignment_of(doc, i, j) -> PairAssignment:
    lab = doc.pair_labels[(i, j)]
    if lab.same_segment is None:
        raise ValueError(
            f"doc {doc.id}: pair ({doc.events[i].id}, {doc.events[j].id}) "
            "has no same_segment flag; run the segment labeler first")
    return PairAssignment(lab.relation, lab.same_segment)


def _sample_triples(n, cap, rng):
    triples = [(i, j, k) for i in range(n) for j in range(i + 1, n) for k in range(j + 1, n)]
    if len(triples) > cap:
        triples = rng.sample(triples, cap)
        triples.sort()
    return triples


def _mask_of(values) -> int:
    mask = 0
    for a in values:
        mask |= 1 << WELL_FORMED.index(PairAssignment(*a))
    return mask


def _values_of(mask) -> tuple:
    return tuple(a for b, a in enumerate(WELL_FORMED) if mask & (1 << b))


def mine_training_examples(corpus, neg_ratio: float = 1.0, seed: int = 0,
                           max_triples_per_doc: int = 5000):
    """Induce constraint-learning examples from a labeled training corpus.

    For every antecedent configuration (assignment of pairs (i,j) and
    (j,k)) observed among text-ordered event triples of the training
    split, one positive example carries the union of third-pair
    assignments observed for that configuration. Per positive,
    ceil(neg_ratio) negatives are drawn uniformly among value sets that
    are not subsets of the observed union.
    """
    import math
    import random

    rng = random.Random(seed)
    observed = {}
    docs = corpus.train_documents()
    if all(len(doc.events) < 3 for doc in docs):
        warnings.warn("no document has three events; no subgraphs to mine")
        return []
    for doc in docs:
        for (i, j, k) in _sample_triples(len(doc.events), max_triples_per_doc, rng):
            key = (_assignment_of(doc, i, j), _assignment_of(doc, j, k))
            observed.setdefault(key, set()).add(_assignment_of(doc, i, k))

    n_neg = math.ceil(neg_ratio)
    examples = []
    for (a_ij, a_jk) in sorted(observed):
        union = observed[(a_ij, a_jk)]
        x = featurize_subgraph(a_ij, a_jk, union)
        examples.append(ConstraintExample(x=tuple(int(v) for v in x), t=1))
        if n_neg <= 0:
            continue
        union_mask = _mask_of(union)
        candidates = [m for m in range(1 << len(WELL_FORMED)) if m | union_mask != union_mask]
        for mask in sorted(rng.sample(candidates, min(n_neg, len(candidates)))):
            x = featurize_subgraph(a_ij, a_jk, _values_of(mask))
            examples.append(ConstraintExample(x=tuple(int(v) for v in x), t=0))
    return examples


def examples_to_arrays(examples):
    """Stack examples into (X, t) float64 arrays for training."""
    X = np.array([e.x for e in examples], dtype=float)
    t = np.array([e.t for e in examples], dtype=float)
    return X, t
