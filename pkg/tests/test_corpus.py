import datetime as dt
import io

import pytest
from hypothesis import given, settings, strategies as st

from mediasent.corpus import (And, MediaItem, Not, Or, Term, filter_corpus, format_query, ingest_directory,
                              matches, parse_batch, parse_query, read_corpus_csv, serialize_batch,
                              sort_corpus, write_corpus_csv)
from mediasent.errors import BatchFormatError, DataError, QuerySyntaxError
from mediasent.text import tokenize

APPENDIX_ITEM = """==== ITEM ====
Media: Affärsvärlden
Datum: 2017-04-10, 16:37:00
Publiceringsställe: webb
Rubrik: Konjunkturinstitutet höjer prognosen
----
Svensk ekonomi växer snabbare än väntat enligt den senaste rapporten.
"""


def record(media="Dagens Industri", datum="2017-04-10", place="print", body="Ekonomi och prognos.", head=None):
    lines = ["==== ITEM ===="]
    if media is not None:
        lines.append(f"Media: {media}")
    if datum is not None:
        lines.append(f"Datum: {datum}")
    lines.append(f"Publiceringsställe: {place}")
    if head:
        lines.append(f"Rubrik: {head}")
    lines.append("----")
    lines.append(body)
    return "\n".join(lines) + "\n"


def item(i, text, date=dt.date(2017, 1, 1), channel="print"):
    return MediaItem(f"id{i}", "Outlet", date, None, channel, "", text)


class TestParseBatch:
    def test_appendix_item(self):
        res = parse_batch(APPENDIX_ITEM.encode("utf-8"))
        assert res.errors == []
        (it,) = res.items
        assert it.outlet == "Affärsvärlden"
        assert it.channel == "online"
        assert it.date == dt.date(2017, 4, 10)
        assert it.time == dt.time(16, 37)
        assert it.headline == "Konjunkturinstitutet höjer prognosen"
        assert it.word_count == len(tokenize(it.headline + " " + it.body))

    def test_empty_file(self):
        res = parse_batch(b"")
        assert res.items == [] and res.errors == []

    def test_missing_datum_collected(self):
        data = record(body="första") + record(datum=None, body="andra") + record(body="tredje")
        res = parse_batch(data.encode())
        assert [it.body for it in res.items] == ["första", "tredje"]
        assert len(res.errors) == 1
        assert res.errors[0].record == 2
        assert "Datum" in res.errors[0].message
        assert res.errors[0].offset == len(record(body="första").encode())

    def test_missing_body_and_bad_date(self):
        data = record(body="") + record(datum="2017-02-30") + record(place="radio")
        res = parse_batch(data.encode())
        assert res.items == []
        assert [e.record for e in res.errors] == [1, 2, 3]

    def test_print_channel(self):
        (it,) = parse_batch(record().encode()).items
        assert it.channel == "print" and it.time is None

    def test_malformed_delimiter_offset(self):
        good = record()
        data = good + "==== ITEM ===\n" + record()[len("==== ITEM ====\n"):]
        with pytest.raises(BatchFormatError) as exc:
            parse_batch(data.encode())
        assert exc.value.offset == len(good.encode())
        assert f"byte offset {len(good.encode())}" in str(exc.value)

    def test_too_many_records(self):
        with pytest.raises(BatchFormatError):
            parse_batch((record() * 501).encode())

    def test_invalid_utf8(self):
        with pytest.raises(BatchFormatError):
            parse_batch(b"\xff\xfe")

    def test_default_ids(self):
        res = parse_batch((record() * 2).encode(), source="b7")
        assert [it.id for it in res.items] == ["b7#1", "b7#2"]


safe_text = st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc", "Zl", "Zp"),
                                           blacklist_characters="\r\n\x85"),
                    min_size=1, max_size=30).map(str.strip).filter(lambda s: s and not s.startswith("===="))
body_text = st.lists(safe_text, min_size=1, max_size=4).map("\n".join)
items_st = st.lists(
    st.builds(
        MediaItem,
        id=st.from_regex(r"[a-z][a-z0-9]{0,8}", fullmatch=True),
        outlet=safe_text,
        date=st.dates(dt.date(1990, 1, 1), dt.date(2030, 12, 31)),
        time=st.one_of(st.none(), st.times().map(lambda t: t.replace(microsecond=0))),
        channel=st.sampled_from(["print", "online"]),
        headline=st.one_of(st.just(""), safe_text),
        body=body_text,
    ),
    max_size=6,
)


class TestRoundTrip:
    @given(items_st)
    @settings(max_examples=150)
    def test_parse_inverts_serialize(self, items):
        res = parse_batch(serialize_batch(items))
        assert res.errors == []
        assert res.items == items

    @given(items_st)
    @settings(max_examples=50)
    def test_csv_round_trip(self, items):
        buf = io.StringIO()
        write_corpus_csv(items, buf, ["meta"])
        buf.seek(0)
        assert read_corpus_csv(buf) == items


class TestQueryParser:
    def test_appendix_query(self):
        q = parse_query('"ekonomi" AND ("prognos" OR "rapport")')
        assert q == And((Term("ekonomi"), Or((Term("prognos"), Term("rapport")))))

    def test_single_term(self):
        assert parse_query('"a"') == Term("a")

    def test_not_binds_tighter_than_and(self):
        assert parse_query('NOT "x" AND "y"') == And((Not(Term("x")), Term("y")))

    def test_and_binds_tighter_than_or(self):
        assert parse_query('"a" OR "b" AND "c"') == Or((Term("a"), And((Term("b"), Term("c")))))

    def test_parentheses_override(self):
        assert parse_query('("a" OR "b") AND "c"') == And((Or((Term("a"), Term("b"))), Term("c")))

    def test_typographic_quotes_and_phrases(self):
        assert parse_query("“svensk ekonomi” OR bnp") == Or((Term("svensk ekonomi"), Term("bnp")))

    @pytest.mark.parametrize("text,pos", [
        ('("a" OR "b"', 0),
        ('"a" OR "b")', 10),
        ('"a" AND', 7),
        ('AND "a"', 0),
        ("", 0),
        ('"a" "b"', 4),
        ('"abc', 0),
    ])
    def test_syntax_errors_carry_position(self, text, pos):
        with pytest.raises(QuerySyntaxError) as exc:
            parse_query(text)
        assert exc.value.position == pos

    def test_format_reparses(self):
        q = parse_query('NOT "a" AND ("b c" OR "d") OR "e"')
        assert parse_query(format_query(q)) == q

    def test_sample_query_ships(self):
        from importlib.resources import files
        text = files("mediasent").joinpath("data/sample_query.txt").read_text(encoding="utf-8")
        q = parse_query(text)
        assert isinstance(q, And) and q.children[0] == Term("ekonomi")


class TestMatches:
    q = parse_query('"ekonomi" AND ("prognos" OR "rapport")')

    def test_conjunction_met(self):
        assert matches(self.q, "Ekonomi: ny rapport idag")

    def test_unmet_conjunct(self):
        assert not matches(self.q, "bara ekonomi här")

    def test_negation(self):
        assert not matches(parse_query('NOT "kris"'), "en kris")

    def test_whole_tokens_only(self):
        assert not matches(parse_query('"kris"'), "kriser och krisen")

    def test_headline_participates(self):
        it = MediaItem("x", "O", dt.date(2017, 1, 1), None, "print", "Ekonomi prognos", "inget")
        assert matches(self.q, it)

    def test_phrase_contiguous(self):
        q = parse_query('"svensk ekonomi"')
        assert matches(q, "den svensk ekonomi växer")
        assert not matches(q, "ekonomi svensk")

    words = st.lists(st.sampled_from(["aa", "bb", "cc", "dd"]), max_size=6)

    @given(words, st.sampled_from(["aa", "bb"]), st.sampled_from(["cc", "dd"]))
    def test_de_morgan(self, toks, a, b):
        lhs = Not(And((Term(a), Term(b))))
        rhs = Or((Not(Term(a)), Not(Term(b))))
        assert matches(lhs, toks) == matches(rhs, toks)

    @given(st.lists(words, max_size=8))
    def test_filter_idempotent(self, docs):
        corpus = [item(i, " ".join(d)) for i, d in enumerate(docs)]
        q = parse_query('"aa" OR NOT "bb"')
        once = filter_corpus(corpus, q)
        assert filter_corpus(once, q) == once
        assert len(once) <= len(corpus)


class TestFilterCorpus:
    def test_subset_in_order(self):
        corpus = [item(0, "ekonomi rapport"), item(1, "sport"), item(2, "ekonomi prognos")]
        assert [it.id for it in filter_corpus(corpus, TestMatches.q)] == ["id0", "id2"]

    def test_always_true_identity(self):
        corpus = [item(i, f"ekonomi {i}") for i in range(4)]
        assert filter_corpus(corpus, parse_query('"ekonomi"')) == corpus

    def test_large_corpus_matches_linear_scan(self, rng):
        vocab = ["prognos", "ekonomi", "rapport", "kris", "bnp", "sport", "väder", "tillväxt"]
        n = 179_846
        picks = rng.integers(0, len(vocab), size=(n, 4))
        corpus = [item(i, " ".join(vocab[j] for j in row)) for i, row in enumerate(picks)]
        got = filter_corpus(corpus, parse_query('"prognos"'))
        expected = sum(1 for row in picks if 0 in row)
        assert len(got) == expected


class TestCorpusOrdering:
    def test_sorted_by_date_then_id(self):
        a = item("b", "x", dt.date(2017, 1, 2))
        b = item("a", "x", dt.date(2017, 1, 2))
        c = item("c", "x", dt.date(2016, 12, 31))
        assert [it.id for it in sort_corpus([a, b, c])] == ["idc", "ida", "idb"]

    def test_duplicate_ids_rejected(self):
        with pytest.raises(DataError):
            sort_corpus([item(1, "x"), item(1, "y")])

    def test_ingest_directory(self, tmp_path):
        (tmp_path / "b1.txt").write_text(record(datum="2017-05-02") + record(datum=None), encoding="utf-8")
        (tmp_path / "a0.txt").write_text(record(datum="2017-05-01"), encoding="utf-8")
        items, problems = ingest_directory(tmp_path)
        assert [it.id for it in items] == ["a0#1", "b1#1"]
        assert len(problems) == 1 and problems[0].startswith("b1.txt")

    def test_ingest_reports_file_on_format_error(self, tmp_path):
        (tmp_path / "bad.txt").write_text("==== ITEM\n", encoding="utf-8")
        with pytest.raises(BatchFormatError, match="bad.txt"):
            ingest_directory(tmp_path)
