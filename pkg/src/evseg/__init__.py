"""Subevent relation extraction with segment-aware learned constraints."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    Corpus,
    Document,
    EventMention,
    PairLabel,
    RelationLabel,
    Sentence,
    compute_stats,
    membership_within_fraction,
    parse_corpus,
    serialize_corpus,
    transitive_closure,
)
from .segmentation import (  # noqa: F401
    EventComplex,
    Segmentation,
    build_membership_dag,
    derive_segments,
    event_complexes,
    label_corpus_segments,
    pairwise_same_segment,
)
from .subgraphs import (  # noqa: F401
    ConstraintExample,
    PairAssignment,
    encode_pair,
    encode_powerset,
    featurize_subgraph,
    mine_training_examples,
)
from .rectifier import (  # noqa: F401
    ConstraintSet,
    RectifierNet,
    check_structure,
    extract_constraints,
    forward,
    load_constraints,
    save_constraints,
)
from .encoders import BuiltinEncoder, ExternalEncoder, PairEncoder  # noqa: F401
from .joint import (  # noqa: F401
    JointModel,
    TrainConfig,
    loss_cons,
    loss_total,
    predict_pair,
    soft_featurize,
    train_joint,
)
from .inference import (  # noqa: F401
    MetricsReport,
    eval_relations,
    eval_segmentation,
    evaluate_corpus,
    predict_relations,
    predict_segments,
)
from .synth import GenConfig, generate_corpus  # noqa: F401
