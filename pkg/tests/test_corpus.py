import json

import pytest

from collidekit.corpus import (Corpus, CorpusError, filter_min_queries,
                               load_collection, load_corpus, normalize_text,
                               save_corpus_jsonl)

from conftest import make_corpus


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


class TestNormalize:
    def test_punctuation_and_case(self):
        assert normalize_text("What's  the Weather?") == "what s the weather"

    def test_empty(self):
        assert normalize_text("") == ""

    def test_already_normal(self):
        assert normalize_text("set alarm tomorrow at 6 am") == "set alarm tomorrow at 6 am"

    def test_deterministic(self):
        assert normalize_text("A -- b!") == normalize_text("A -- b!")


class TestLoad:
    def test_single_record(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [{"dataset": "clinc150", "intent": "weather",
                         "text": "what's the weather like today"}])
        corpus = load_corpus(p)
        assert corpus.dataset_id == "clinc150"
        assert list(corpus.intents) == ["weather"]
        q = corpus.intents["weather"].queries[0]
        assert q.id == "clinc150/weather/0"
        assert q.norm_text == "what s the weather like today"

    def test_empty_file_errors(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text("")
        with pytest.raises(CorpusError, match="no records"):
            load_corpus(p)

    def test_grouping(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [
            {"dataset": "d", "intent": "x", "text": "one"},
            {"dataset": "d", "intent": "y", "text": "two"},
            {"dataset": "d", "intent": "x", "text": "three"},
        ])
        corpus = load_corpus(p)
        assert sorted(len(it) for it in corpus.intents.values()) == [1, 2]
        assert corpus.intents["x"].queries[1].id == "d/x/1"

    def test_malformed_line_reports_number(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text('{"dataset":"d","intent":"x","text":"ok"}\n{broken\n')
        with pytest.raises(CorpusError, match=":2"):
            load_corpus(p)

    def test_empty_text_rejected(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [{"dataset": "d", "intent": "x", "text": "   "}])
        with pytest.raises(CorpusError, match="empty text"):
            load_corpus(p)

    def test_conflicting_dataset_ids(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [{"dataset": "d1", "intent": "x", "text": "a"},
                        {"dataset": "d2", "intent": "x", "text": "b"}])
        with pytest.raises(CorpusError, match="conflicts"):
            load_corpus(p)

    def test_csv(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("text,intent\nhello there,greet\nbye now,farewell\n")
        corpus = load_corpus(p, format="csv", dataset_id="mycsv")
        assert corpus.dataset_id == "mycsv"
        assert set(corpus.intents) == {"greet", "farewell"}

    def test_csv_requires_dataset_id(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("text,intent\na,b\n")
        with pytest.raises(CorpusError):
            load_corpus(p, format="csv")

    def test_total_count_equals_records(self, tmp_path):
        p = tmp_path / "c.jsonl"
        rows = [{"dataset": "d", "intent": f"i{i % 3}", "text": f"text {i}"}
                for i in range(17)]
        write_jsonl(p, rows)
        assert load_corpus(p).num_queries == 17


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path, tiny_corpus):
        p = tmp_path / "out.jsonl"
        save_corpus_jsonl(tiny_corpus, p)
        reloaded = load_corpus(p)
        assert reloaded.dataset_id == tiny_corpus.dataset_id
        assert list(reloaded.intents) == list(tiny_corpus.intents)
        for name in tiny_corpus.intents:
            assert [q.id for q in reloaded.intents[name].queries] == \
                   [q.id for q in tiny_corpus.intents[name].queries]
            assert [q.text for q in reloaded.intents[name].queries] == \
                   [q.text for q in tiny_corpus.intents[name].queries]

    def test_reserialize_is_stable(self, tmp_path, tiny_corpus):
        p1 = tmp_path / "a.jsonl"
        p2 = tmp_path / "b.jsonl"
        save_corpus_jsonl(tiny_corpus, p1)
        save_corpus_jsonl(load_corpus(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestCollection:
    def test_multi_dataset_file(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_jsonl(p, [{"dataset": "d1", "intent": "x", "text": "a"},
                        {"dataset": "d2", "intent": "y", "text": "b"},
                        {"dataset": "d1", "intent": "x", "text": "c"}])
        corpora = load_collection(p)
        assert [c.dataset_id for c in corpora] == ["d1", "d2"]
        assert corpora[0].num_queries == 2


class TestFilter:
    def test_below_threshold_removed(self):
        corpus = make_corpus("d", {"small": [f"q {i}" for i in range(9)],
                                   "big": [f"r {i}" for i in range(10)]})
        out = filter_min_queries([corpus], 10)
        assert list(out[0].intents) == ["big"]

    def test_min_one_is_noop(self, tiny_corpus):
        out = filter_min_queries([tiny_corpus], 1)
        assert list(out[0].intents) == list(tiny_corpus.intents)

    def test_threshold_comparison(self):
        corpus = make_corpus("d", {
            "a": [f"q {i}" for i in range(5)],
            "b": [f"q {i}" for i in range(50)],
            "c": [f"q {i}" for i in range(150)],
        })
        out = filter_min_queries([corpus], 50)
        assert sorted(len(it) for it in out[0].intents.values()) == [50, 150]

    def test_empty_corpus_dropped(self):
        corpus = make_corpus("d", {"a": ["one query"]})
        assert filter_min_queries([corpus], 2) == []

    def test_idempotent(self, tiny_corpus):
        once = filter_min_queries([tiny_corpus], 3)
        twice = filter_min_queries(once, 3)
        assert [list(c.intents) for c in once] == [list(c.intents) for c in twice]

    def test_rejects_bad_min(self, tiny_corpus):
        with pytest.raises(ValueError):
            filter_min_queries([tiny_corpus], 0)
