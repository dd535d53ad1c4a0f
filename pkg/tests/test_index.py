import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contractqa.errors import DimensionMismatch
from contractqa.index import IndexEntry, MetadataFilter, VectorIndex
from contractqa.ingest import Chunk, ChunkMetadata


def make_chunk(cid, contract="", source="doc.pdf", clause="", text=None,
               prev=None, nxt=None) -> Chunk:
    return Chunk(
        id=cid,
        text=text if text is not None else f"text of {cid}",
        metadata=ChunkMetadata(
            source=source, contract=contract, clause=clause, section_index=0,
            neighbor_prev=prev, neighbor_next=nxt,
        ),
    )


def make_entry(cid, vector, **kw) -> IndexEntry:
    return IndexEntry(chunk=make_chunk(cid, **kw), vector=np.asarray(vector, dtype=np.float32))


def brute_force_cosine(entries, query, k):
    """Independent oracle: exhaustive scan with the same tie rule."""
    query = np.asarray(query, dtype=np.float64)
    qnorm = np.sqrt(query @ query)
    scored = []
    for entry in entries:
        vec = np.asarray(entry.vector, dtype=np.float64)
        norm = np.sqrt(vec @ vec)
        score = float(vec @ query / (norm * qnorm)) if norm * qnorm > 0 else 0.0
        scored.append((entry.chunk.id, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [cid for cid, _ in scored[:k]]


def brute_force_distance(entries, query, k, order):
    query = np.asarray(query, dtype=np.float64)
    scored = []
    for entry in entries:
        vec = np.asarray(entry.vector, dtype=np.float64)
        if order == "euclidean":
            score = -float(np.sqrt(((vec - query) ** 2).sum()))
        else:
            score = -float(np.abs(vec - query).sum())
        scored.append((entry.chunk.id, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [cid for cid, _ in scored[:k]]


def random_entries(n, d, seed):
    rng = np.random.default_rng(seed)
    vectors = rng.normal(size=(n, d))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    return [make_entry(f"c{i:04d}", vectors[i]) for i in range(n)]


class TestUpsert:
    def test_insert_then_replace_counts(self):
        index = VectorIndex(dimension=4)
        entries = [make_entry(f"c{i}", [i, 1, 0, 0]) for i in range(3)]
        result = index.upsert(entries)
        assert (result.inserted, result.replaced) == (3, 0)
        result = index.upsert([make_entry("c1", [9, 9, 9, 9])])
        assert (result.inserted, result.replaced) == (0, 1)
        assert len(index) == 3

    def test_dimension_mismatch_rejected(self):
        index = VectorIndex(dimension=64)
        with pytest.raises(DimensionMismatch):
            index.upsert([make_entry("c0", np.ones(8))])

    def test_non_finite_vector_rejected(self):
        index = VectorIndex(dimension=3)
        with pytest.raises(ValueError):
            index.upsert([make_entry("c0", [1.0, float("nan"), 0.0])])


class TestQuery:
    def test_self_query_scores_one(self):
        index = VectorIndex(dimension=8)
        entries = random_entries(20, 8, seed=3)
        index.upsert(entries)
        results = index.query(entries[7].vector, k=1)
        assert results[0].chunk.id == entries[7].chunk.id
        assert results[0].score == pytest.approx(1.0, abs=1e-9)

    def test_oracle_equivalence_cosine(self):
        entries = random_entries(60, 12, seed=11)
        index = VectorIndex(dimension=12)
        index.upsert(entries)
        rng = np.random.default_rng(99)
        for _ in range(10):
            query = rng.normal(size=12)
            for k in (1, 5, 10):
                got = [r.chunk.id for r in index.query(query, k=k)]
                assert got == brute_force_cosine(entries, query, k)

    @pytest.mark.parametrize("metric", ["euclidean", "manhattan"])
    def test_oracle_equivalence_distance_metrics(self, metric):
        entries = random_entries(40, 6, seed=5)
        index = VectorIndex(dimension=6, metric=metric)
        index.upsert(entries)
        rng = np.random.default_rng(17)
        for _ in range(5):
            query = rng.normal(size=6)
            got = [r.chunk.id for r in index.query(query, k=7)]
            assert got == brute_force_distance(entries, query, 7, metric)

    def test_ties_break_by_chunk_id_ascending(self):
        vec = [1.0, 0.0, 0.0]
        index = VectorIndex(dimension=3)
        index.upsert([make_entry(cid, vec) for cid in ("zz", "aa", "mm")])
        results = index.query(vec, k=3)
        assert [r.chunk.id for r in results] == ["aa", "mm", "zz"]

    def test_empty_index_returns_empty(self):
        index = VectorIndex(dimension=3)
        assert index.query([1, 0, 0], k=4) == []

    def test_k_must_be_positive(self):
        index = VectorIndex(dimension=3)
        with pytest.raises(ValueError):
            index.query([1, 0, 0], k=0)

    def test_unknown_metric_rejected(self):
        with pytest.raises(ValueError):
            VectorIndex(dimension=3, metric="chebyshev")


class TestFilter:
    def _two_contract_index(self):
        index = VectorIndex(dimension=4)
        entries = [
            make_entry("a0", [1, 0, 0, 0], contract="278/2023", clause="CLÁUSULA PRIMEIRA - OBJETO"),
            make_entry("a1", [0.9, 0.1, 0, 0], contract="278/2023", clause="CLÁUSULA SEGUNDA - VIGÊNCIA"),
            make_entry("b0", [1, 0.01, 0, 0], contract="159/2021", clause="CLÁUSULA PRIMEIRA - OBJETO"),
            make_entry("b1", [0.8, 0.2, 0, 0], contract="159/2021", clause="CLÁUSULA TERCEIRA - VALOR"),
        ]
        index.upsert(entries)
        return index

    def test_contract_filter_applies_before_similarity(self):
        index = self._two_contract_index()
        results = index.query([1, 0, 0, 0], filter=MetadataFilter(contract="278/2023"), k=4)
        assert results
        assert all(r.chunk.metadata.contract == "278/2023" for r in results)

    def test_clause_filter_is_case_insensitive_substring(self):
        index = self._two_contract_index()
        results = index.query([1, 0, 0, 0], filter=MetadataFilter(clause="objeto"), k=4)
        assert {r.chunk.id for r in results} == {"a0", "b0"}

    def test_source_filter_exact(self):
        index = self._two_contract_index()
        assert index.query([1, 0, 0, 0], filter=MetadataFilter(source="nope.pdf"), k=4) == []
        results = index.query([1, 0, 0, 0], filter=MetadataFilter(source="doc.pdf"), k=10)
        assert len(results) == 4

    def test_empty_filter_matches_everything(self):
        index = self._two_contract_index()
        assert len(index.query([1, 0, 0, 0], filter=MetadataFilter(), k=10)) == 4

    def test_no_candidates_empty_result(self):
        index = self._two_contract_index()
        assert index.query([1, 0, 0, 0], filter=MetadataFilter(contract="999/2099"), k=4) == []


class TestNeighborExpansion:
    def _chained_index(self):
        index = VectorIndex(dimension=3)
        chunks = [
            make_entry("s0", [1, 0, 0], contract="1/2020", nxt="s1"),
            make_entry("s1", [0, 1, 0], contract="1/2020", prev="s0", nxt="s2"),
            make_entry("s2", [0, 0, 1], contract="1/2020", prev="s1"),
        ]
        index.upsert(chunks)
        return index

    def test_neighbors_appended_flagged_not_counted(self):
        index = self._chained_index()
        results = index.query([0, 1, 0], k=1, expand_neighbors=True)
        assert [r.chunk.id for r in results] == ["s1", "s0", "s2"]
        assert [r.neighbor for r in results] == [False, True, True]

    def test_neighbors_deduplicated_against_main_results(self):
        index = self._chained_index()
        results = index.query([0.7, 0.7, 0], k=2, expand_neighbors=True)
        ids = [r.chunk.id for r in results]
        assert sorted(ids) == ["s0", "s1", "s2"]
        assert len(ids) == len(set(ids))

    def test_expansion_off_returns_only_main(self):
        index = self._chained_index()
        results = index.query([0, 1, 0], k=1, expand_neighbors=False)
        assert [r.chunk.id for r in results] == ["s1"]


class TestPersistence:
    def test_round_trip_preserves_query_results(self, tmp_path):
        entries = random_entries(30, 8, seed=23)
        index = VectorIndex(dimension=8, directory=tmp_path / "idx")
        index.upsert(entries)
        query = np.random.default_rng(1).normal(size=8)
        before = [(r.chunk.id, r.score) for r in index.query(query, k=8)]
        reloaded = VectorIndex.load(tmp_path / "idx")
        after = [(r.chunk.id, r.score) for r in reloaded.query(query, k=8)]
        assert after == before
        assert len(reloaded) == 30

    def test_append_compaction_later_record_wins(self, tmp_path):
        directory = tmp_path / "idx"
        index = VectorIndex(dimension=3, directory=directory)
        index.upsert([make_entry("c0", [1, 0, 0])])
        index.upsert([make_entry("c0", [0, 1, 0])])
        reloaded = VectorIndex.load(directory)
        assert len(reloaded) == 1
        results = reloaded.query([0, 1, 0], k=1)
        assert results[0].score == pytest.approx(1.0, abs=1e-9)

    def test_compact_shrinks_file(self, tmp_path):
        directory = tmp_path / "idx"
        index = VectorIndex(dimension=3, directory=directory)
        for _ in range(5):
            index.upsert([make_entry("c0", [1, 0, 0])])
        size_before = (directory / "entries.bin").stat().st_size
        index.compact()
        assert (directory / "entries.bin").stat().st_size < size_before
        assert len(VectorIndex.load(directory)) == 1

    def test_load_missing_directory_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            VectorIndex.load(tmp_path / "nothing")

    def test_meta_written(self, tmp_path):
        VectorIndex(dimension=5, metric="cosine", provider_name="local-hash-5",
                    directory=tmp_path / "idx")
        meta = (tmp_path / "idx" / "index.meta").read_text(encoding="utf-8")
        assert '"dimension": 5' in meta
        assert '"provider": "local-hash-5"' in meta


def test_concurrent_reads_during_writes():
    index = VectorIndex(dimension=8)
    index.upsert(random_entries(50, 8, seed=2))
    errors = []
    stop = threading.Event()

    def reader():
        rng = np.random.default_rng(3)
        while not stop.is_set():
            try:
                results = index.query(rng.normal(size=8), k=5)
                assert len(results) == 5
            except Exception as exc:  # surfaced after join
                errors.append(exc)
                return

    threads = [threading.Thread(target=reader) for _ in range(4)]
    for t in threads:
        t.start()
    for i in range(20):
        index.upsert(random_entries(5, 8, seed=100 + i))
    stop.set()
    for t in threads:
        t.join()
    assert not errors


@given(
    st.lists(
        st.tuples(
            st.sampled_from(["278/2023", "159/2021", "412/2022", ""]),
            st.sampled_from(["a.pdf", "b.pdf", "c.pdf"]),
            st.sampled_from(["OBJETO", "VIGÊNCIA", "VALOR", ""]),
        ),
        min_size=1, max_size=25,
    ),
    st.sampled_from([None, "278/2023", "159/2021", "999/2099"]),
    st.sampled_from([None, "a.pdf", "b.pdf"]),
    st.sampled_from([None, "objeto", "VALOR", "zzz"]),
)
@settings(max_examples=80, deadline=None)
def test_filter_soundness_property(metas, contract, source, clause):
    rng = np.random.default_rng(len(metas))
    index = VectorIndex(dimension=4)
    index.upsert([
        make_entry(f"c{i:03d}", rng.normal(size=4), contract=c, source=s, clause=cl)
        for i, (c, s, cl) in enumerate(metas)
    ])
    flt = MetadataFilter(contract=contract, source=source, clause=clause)
    for result in index.query(rng.normal(size=4), filter=flt, k=10):
        assert flt.matches(result.chunk.metadata)
