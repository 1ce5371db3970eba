import numpy as np
import pytest

from evseg.corpus import POS_TAGS
from evseg.encoders import (
    BuiltinEncoder,
    ExternalEncoder,
    combine_pair,
    read_embeddings,
    write_embeddings,
)
from evseg.errors import ValidationError

from helpers import make_doc


class TestBuiltinEncoder:
    def test_dimensions(self):
        enc = BuiltinEncoder(hash_dim=64)
        assert enc.event_dim == 64 + len(POS_TAGS)
        assert enc.pair_dim == 4 * enc.event_dim

    def test_deterministic_per_seed(self):
        doc = make_doc(events=[(1, 0), (2, 1)])
        a = BuiltinEncoder(hash_dim=32, seed=5).event_vector(doc, 0)
        b = BuiltinEncoder(hash_dim=32, seed=5).event_vector(doc, 0)
        c = BuiltinEncoder(hash_dim=32, seed=6).event_vector(doc, 0)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_pos_one_hot_block(self):
        doc = make_doc(events=[(1, 0)])
        vec = BuiltinEncoder(hash_dim=16, seed=0).event_vector(doc, 0)
        pos_block = vec[16:]
        assert pos_block.sum() == 1.0  # tokens in make_doc are all NOUN
        assert pos_block[POS_TAGS.index("NOUN")] == 1.0

    def test_combine_pair_layout(self):
        h1 = np.array([1.0, 2.0])
        h2 = np.array([3.0, 5.0])
        assert combine_pair(h1, h2).tolist() == [1, 2, 3, 5, 3, 10, -2, -3]


class TestEmbeddingFile:
    def entries(self):
        rng = np.random.default_rng(0)
        return [
            (("docA", 1), rng.normal(size=8).astype(np.float32)),
            (("docA", 2), rng.normal(size=8).astype(np.float32)),
            (("docB", 7), rng.normal(size=8).astype(np.float32)),
        ]

    def test_round_trip(self, tmp_path):
        path = tmp_path / "vecs.emb"
        entries = self.entries()
        write_embeddings(path, entries, dim=8)
        index, vectors = read_embeddings(path)
        assert set(index) == {("docA", 1), ("docA", 2), ("docB", 7)}
        for key, vec in entries:
            assert np.allclose(vectors[index[key]], vec, atol=1e-7)

    def test_external_encoder_lookup(self, tmp_path):
        doc = make_doc(doc_id="docA", events=[(1, 0), (2, 1)])
        path = tmp_path / "vecs.emb"
        write_embeddings(path, self.entries(), dim=8)
        enc = ExternalEncoder(path)
        assert enc.event_dim == 8
        assert enc.pair_representation(doc, 0, 1).shape == (32,)

    def test_missing_event_named_in_error(self, tmp_path):
        doc = make_doc(doc_id="docC", events=[(9, 0), (2, 1)])
        path = tmp_path / "vecs.emb"
        write_embeddings(path, self.entries(), dim=8)
        enc = ExternalEncoder(path)
        with pytest.raises(KeyError, match="event 9 of document 'docC'"):
            enc.event_vector(doc, 0)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.emb"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ValidationError, match="magic"):
            read_embeddings(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "vecs.emb"
        write_embeddings(path, self.entries(), dim=8)
        blob = path.read_bytes()
        path.write_bytes(blob[:-4])
        with pytest.raises(ValidationError, match="payload"):
            read_embeddings(path)
