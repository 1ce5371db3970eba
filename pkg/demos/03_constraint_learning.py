#!/usr/bin/env python3
"""Walkthrough: the 42-dim subgraph feature space and constraint learning.

Featurizes three-event structures, trains the rectifier network on
structures labeled by an explicit transitivity/symmetry rule check, and
inspects what the learned inequalities reject.
"""

import numpy as np

from evseg import PairAssignment, RelationLabel, encode_pair, featurize_subgraph
from evseg.rectifier import check_structure, extract_constraints, forward, train
from evseg.subgraphs import WELL_FORMED

PC = RelationLabel.PARENT_CHILD
CP = RelationLabel.CHILD_PARENT
COREF = RelationLabel.COREF
NOREL = RelationLabel.NO_REL

print("pair assignments encode as [PC, CP, Coref, NoRel, same-segment]:")
print(f"  (PC, within)  -> {encode_pair(PairAssignment(PC, True)).astype(int)}")
print(f"  (CP, across)  -> {encode_pair(PairAssignment(CP, False)).astype(int)}")
print()

x = featurize_subgraph(PairAssignment(CP, True), PairAssignment(CP, True),
                       [PairAssignment(CP, True)])
print("a chain CP(i,j), CP(j,k) with value set {(CP, within)} activates")
print(f"features {np.flatnonzero(x).tolist()} of the 42-dim vector")
print()

# Label every possible structure with a tiny rule check: a value set is
# legitimate when every relation it contains can coexist with the two
# antecedent relations under transitivity and converse symmetry.
COMPOSES = {
    (PC, PC): {PC}, (CP, CP): {CP}, (COREF, COREF): {COREF},
}


def consistent(r1, r2, r3):
    # brute force: grow the six directed labels under transitivity
    conv = {PC: CP, CP: PC, COREF: COREF, NOREL: NOREL}
    labels = {(0, 1): {r1}, (1, 2): {r2}, (0, 2): {r3}}
    for (a, b), s in list(labels.items()):
        labels[(b, a)] = {conv[next(iter(s))]}
    changed = True
    while changed:
        changed = False
        for (a, b) in list(labels):
            for (b2, c) in list(labels):
                if b2 != b or c == a:
                    continue
                for r in (PC, CP, COREF):
                    if r in labels[(a, b)] and r in labels[(b, c)]:
                        for (x_, y_, lab) in ((a, c, r), (c, a, conv[r])):
                            group = labels.setdefault((x_, y_), set())
                            if lab not in group:
                                group.add(lab)
                                changed = True
    for group in labels.values():
        non_norel = group - {NOREL}
        if len(non_norel) > 1 or (NOREL in group and non_norel):
            return False
    return True


X_rows, labels = [], []
for a_ij in WELL_FORMED:
    for a_jk in WELL_FORMED:
        for mask in range(256):
            values = [a for b, a in enumerate(WELL_FORMED) if mask & (1 << b)]
            ok = bool(values) and all(
                consistent(a_ij.relation, a_jk.relation, v.relation) for v in values)
            X_rows.append(featurize_subgraph(a_ij, a_jk, values))
            labels.append(float(ok))
X_rows = np.array(X_rows)
labels = np.array(labels)
print(f"rule-labeled structures: {len(labels)}, {labels.mean():.1%} legitimate")

result = train((X_rows, labels), k=10, lr=1e-3, max_epochs=300, seed=0)
print(f"rectifier net held-out accuracy after 300 epochs: "
      f"{result.heldout_accuracy:.4f}")
print()

violating = featurize_subgraph(PairAssignment(PC, True), PairAssignment(PC, True),
                               [PairAssignment(NOREL, True)])
satisfying = featurize_subgraph(PairAssignment(PC, True), PairAssignment(PC, True),
                                [PairAssignment(PC, True)])
print("scoring a PC-transitivity violation vs. a consistent completion:")
print(f"  p(violating)  = {forward(result.net, violating):.4f}"
      f"   hard check: {check_structure(result.net, violating, 'hard')}")
print(f"  p(satisfying) = {forward(result.net, satisfying):.4f}"
      f"   hard check: {check_structure(result.net, satisfying, 'hard')}")
print()

cons = extract_constraints(result.net)
row_w, row_b = cons.rows[0]
print(f"exported {cons.k} inequalities over {cons.dim} features; "
      f"first row bias {row_b:+.3f}, weight range "
      f"[{row_w.min():+.3f}, {row_w.max():+.3f}]")
