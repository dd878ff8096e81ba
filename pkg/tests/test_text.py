import collections

from hypothesis import given, strategies as st

from mediasent.text import Vocabulary, build_vocabulary, tokenize, vectorize


class TestTokenize:
    def test_letters_and_digits(self):
        assert tokenize("Stark tillväxt 2017!") == ["stark", "tillväxt", "2017"]

    def test_empty(self):
        assert tokenize("") == []

    def test_case_folding_and_punctuation(self):
        assert tokenize("MSEK, MSEK") == ["msek", "msek"]

    def test_single_characters_dropped(self):
        assert tokenize("a b c de - Å år") == ["de", "år"]

    def test_diacritics_kept(self):
        assert tokenize("Återhämtning även Café") == ["återhämtning", "även", "café"]

    def test_underscore_splits(self):
        assert tokenize("foo_bar") == ["foo", "bar"]

    @given(st.text())
    def test_idempotent_on_joined_output(self, s):
        toks = tokenize(s)
        assert tokenize(" ".join(toks)) == toks

    @given(st.text())
    def test_tokens_nonempty_lowercase(self, s):
        for t in tokenize(s):
            assert len(t) >= 2
            assert t == t.lower()


class TestVocabulary:
    def test_size_of_distinct(self):
        assert len(build_vocabulary([["a", "b"], ["b", "c"]])) == 3

    def test_empty(self):
        assert len(build_vocabulary([])) == 0

    def test_first_occurrence_order(self):
        v = build_vocabulary([["ekonomi", "kris"], ["kris", "bnp"]])
        assert v.words == ("ekonomi", "kris", "bnp")

    def test_matches_set_oracle(self, rng):
        words = [f"w{i}" for i in range(800)]
        docs = [list(rng.choice(words, size=rng.integers(5, 60))) for _ in range(500)]
        v = build_vocabulary(docs)
        assert len(v) == len({w for d in docs for w in d})

    @given(st.lists(st.lists(st.text(min_size=1, max_size=5), max_size=8), max_size=8))
    def test_round_trip(self, docs):
        v = build_vocabulary(docs)
        for i in range(len(v)):
            assert v.lookup(v.word_of(i)) == i

    def test_unknown_lookup(self):
        assert Vocabulary(["a"]).lookup("zz") is None

    def test_csv_export(self, tmp_path):
        v = Vocabulary(["tillväxt", "kris"])
        p = tmp_path / "vocab.csv"
        v.to_csv(p)
        assert p.read_text(encoding="utf-8").splitlines() == ["index,word", "0,tillväxt", "1,kris"]


class TestVectorize:
    def test_direct_count(self):
        vec = vectorize(["growth", "growth", "weak"], Vocabulary(["growth", "weak"]))
        assert vec.counts == {0: 2, 1: 1}
        assert vec.n_tokens == 3
        assert vec.oov == 0

    def test_all_unseen(self):
        vec = vectorize(["x1", "x2"], Vocabulary(["growth"]))
        assert vec.counts == {}
        assert vec.oov == vec.n_tokens == 2

    def test_brute_force_tally(self, rng):
        words = [f"w{i}" for i in range(300)]
        vocab = Vocabulary(words[:200])
        doc = list(rng.choice(words, size=1000))
        vec = vectorize(doc, vocab)
        tally = collections.Counter(doc)
        assert vec.counts == {vocab.lookup(w): c for w, c in tally.items() if vocab.lookup(w) is not None}
        assert sum(vec.counts.values()) + vec.oov == len(doc)

    @given(st.lists(st.sampled_from(["aa", "bb", "cc", "dd", "ee"]), max_size=50))
    def test_count_conservation(self, doc):
        vec = vectorize(doc, Vocabulary(["aa", "cc"]))
        assert sum(vec.counts.values()) + vec.oov == len(doc)
        assert all(c >= 1 for c in vec.counts.values())
