import io
import re

import pytest
from hypothesis import given, strategies as st

from wsd_ensemble.corpus import (
    Corpus,
    Instance,
    corpus_from_records,
    normalize,
    parse_corpus,
    sense_distribution,
    uniform_subsample,
    write_corpus,
)
from wsd_ensemble.errors import (
    CorpusParseError,
    DuplicateIdError,
    EmptyCorpusError,
    InsufficientDataError,
)
from wsd_ensemble.synthetic import INTEREST_SENSES, LINE_SENSES, table_corpus


def reference_filter(raw):
    # character-at-a-time reimplementation of the normalization rule
    out = []
    for piece in raw.split():
        kept = "".join(ch for ch in piece.lower() if ch in "abcdefghijklmnopqrstuvwxyz0123456789")
        if kept:
            out.append(kept)
    return out


class TestNormalize:
    def test_sentence(self):
        assert normalize("Interest rates rose.") == ["interest", "rates", "rose"]

    def test_all_punctuation_drops_out(self):
        assert normalize("--") == []

    def test_internal_punctuation(self):
        assert reference_filter("U.S.-based firm's") == ["usbased", "firms"]
        assert normalize("U.S.-based firm's") == ["usbased", "firms"]

    def test_digits_kept(self):
        assert normalize("4.5% in 1987") == ["45", "in", "1987"]

    def test_empty(self):
        assert normalize("") == []
        assert normalize("   \t ") == []

    @given(st.text())
    def test_matches_reference(self, raw):
        assert normalize(raw) == reference_filter(raw)

    @given(st.text())
    def test_idempotent(self, raw):
        once = normalize(raw)
        assert normalize(" ".join(once)) == once

    @given(st.text())
    def test_tokens_are_clean(self, raw):
        for tok in normalize(raw):
            assert tok and re.fullmatch(r"[a-z0-9]+", tok)


class TestParse:
    def test_marked_record(self):
        corpus = parse_corpus(["i1\tproduct\tthe @@line@@ of products\n"])
        assert corpus.instances == (Instance("i1", "product", ("the", "line", "of", "products"), 1),)
        assert corpus.target_word == "line"

    def test_marked_normalizes_context(self):
        corpus = parse_corpus(["i1\tqueue\tThe @@LINE@@, please.\n"])
        inst = corpus.instances[0]
        assert inst.tokens == ("the", "line", "please")
        assert inst.target_index == 1

    def test_punctuation_only_tokens_shift_index(self):
        corpus = parse_corpus(["a\ts\t-- `` @@Line@@'s end\n"])
        inst = corpus.instances[0]
        assert inst.tokens == ("lines", "end")
        assert inst.target_index == 0

    def test_comments_and_blank_lines(self):
        text = "# header\n\ni1\ta\t@@x@@ y\n  # indented comment\ni2\tb\ty @@x@@\n"
        corpus = parse_corpus(io.StringIO(text))
        assert corpus.ids == ["i1", "i2"]
        assert corpus.sense_inventory == ("a", "b")

    def test_inventory_first_appearance(self):
        lines = [f"i{n}\t{s}\t@@w@@\n" for n, s in enumerate("cabac")]
        assert parse_corpus(lines).sense_inventory == ("c", "a", "b")

    def test_pretokenized(self):
        corpus = parse_corpus(["i1\tcord\ta thin line here\t2\n"], "pretokenized")
        assert corpus.instances[0].tokens == ("a", "thin", "line", "here")
        assert corpus.instances[0].target_index == 2

    @pytest.mark.parametrize("line, fragment", [
        ("i1\tproduct\n", "expected 3"),
        ("i1\tproduct\tno marker here\n", "missing"),
        ("i1\tproduct\t@@a@@ @@b@@\n", "more than one"),
        ("i1\tproduct\t@@--@@ b\n", "empty"),
        ("\tproduct\t@@a@@\n", "empty instance id"),
        ("i1\t \t@@a@@\n", "empty sense"),
    ])
    def test_malformed_marked(self, line, fragment):
        with pytest.raises(CorpusParseError, match=fragment) as info:
            parse_corpus(["# c\n", line])
        assert info.value.line_number == 2
        assert "line 2" in str(info.value)

    @pytest.mark.parametrize("line", [
        "i1\ts\ta b\n",
        "i1\ts\ta b\tx\n",
        "i1\ts\ta b\t2\n",
        "i1\ts\ta b\t-1\n",
        "i1\ts\tA b\t0\n",
    ])
    def test_malformed_pretokenized(self, line):
        with pytest.raises(CorpusParseError):
            parse_corpus([line], "pretokenized")

    def test_duplicate_id(self):
        with pytest.raises(DuplicateIdError, match="line 2"):
            parse_corpus(["i1\ta\t@@x@@\n", "i1\tb\t@@x@@\n"])

    def test_empty_stream(self):
        with pytest.raises(EmptyCorpusError):
            parse_corpus([])
        with pytest.raises(EmptyCorpusError):
            parse_corpus(["# only a comment\n"])
        assert len(parse_corpus([], allow_empty=True)) == 0

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            parse_corpus(["x"], "xml")

    def test_line_sized_file(self):
        corpus = table_corpus(LINE_SENSES, seed=1)
        buf = io.StringIO()
        write_corpus(corpus, buf)
        parsed = parse_corpus(io.StringIO(buf.getvalue()))
        assert len(parsed) == 4148
        assert sense_distribution(parsed) == {
            "product": 2218, "text": 405, "phone": 429,
            "queue": 349, "division": 376, "cord": 371,
        }


tokens = st.lists(st.from_regex(r"[a-z0-9]{1,6}", fullmatch=True), min_size=1, max_size=8)


@st.composite
def corpora(draw):
    n = draw(st.integers(1, 8))
    records = []
    for i in range(n):
        toks = draw(tokens)
        records.append((f"id{i}", draw(st.sampled_from(["a b", "b", "c-1"])), toks,
                        draw(st.integers(0, len(toks) - 1))))
    return corpus_from_records(records, target_word="")


class TestRoundTrip:
    @pytest.mark.parametrize("fmt", ["marked", "pretokenized"])
    @given(corpus=corpora())
    def test_write_then_parse(self, fmt, corpus):
        buf = io.StringIO()
        write_corpus(corpus, buf, fmt)
        back = parse_corpus(io.StringIO(buf.getvalue()), fmt)
        assert back.instances == corpus.instances
        assert back.sense_inventory == corpus.sense_inventory


class TestCorpusInvariants:
    def test_unknown_sense_rejected(self):
        with pytest.raises(ValueError):
            Corpus("w", ("a",), (Instance("1", "b", ("w",), 0),))

    def test_bad_target_index(self):
        with pytest.raises(ValueError):
            Instance("1", "a", ("w",), 1)
        with pytest.raises(ValueError):
            Instance("1", "a", (), 0)

    def test_subset_keeps_inventory(self):
        corpus = corpus_from_records([("1", "a", ["w"], 0), ("2", "b", ["w"], 0)])
        sub = corpus.subset(["2"])
        assert sub.sense_inventory == ("a", "b")
        assert sense_distribution(sub) == {"a": 0, "b": 1}


class TestSenseDistribution:
    def test_interest_counts(self):
        corpus = table_corpus(INTEREST_SENSES, seed=0, target="interest")
        dist = sense_distribution(corpus)
        assert dist == {"money": 1252, "share": 500, "attention": 361,
                        "advantage": 178, "activity": 66, "cause": 11}
        assert sum(dist.values()) == 2368

    def test_empty_corpus_lists_every_sense(self):
        assert sense_distribution(Corpus("w", ("s1", "s2"), ())) == {"s1": 0, "s2": 0}


@pytest.fixture(scope="module")
def line():
    return table_corpus(LINE_SENSES, seed=2)


class TestUniformSubsample:
    def test_line_subset(self, line):
        sample = uniform_subsample(line, 349, seed=0)
        assert len(sample) == 2094
        assert set(sense_distribution(sample).values()) == {349}

    def test_deterministic(self, line):
        a = uniform_subsample(line, 349, seed=5)
        b = uniform_subsample(line, 349, seed=5)
        assert a.ids == b.ids
        assert uniform_subsample(line, 349, seed=6).ids != a.ids

    def test_already_uniform_is_permutation(self, line):
        uniform = uniform_subsample(line, 349, seed=1)
        again = uniform_subsample(uniform, 349, seed=9)
        assert sorted(again.ids) == sorted(uniform.ids)

    def test_without_replacement(self, line):
        sample = uniform_subsample(line, 349, seed=3)
        assert len(set(sample.ids)) == len(sample)
        assert all(line[i] == sample[i] for i in sample.ids)

    def test_insufficient(self, line):
        with pytest.raises(InsufficientDataError) as info:
            uniform_subsample(line, 350, seed=0)
        assert info.value.sense == "queue"
        assert "queue" in str(info.value)

    @given(st.lists(st.integers(1, 6), min_size=1, max_size=4), st.integers(0, 2**32), st.data())
    def test_stratification(self, sizes, seed, data):
        records = [(f"{s}-{i}", f"s{s}", ["w"], 0) for s, n in enumerate(sizes) for i in range(n)]
        corpus = corpus_from_records(records)
        per = data.draw(st.integers(1, min(sizes)))
        sample = uniform_subsample(corpus, per, seed)
        assert set(sense_distribution(sample).values()) == {per}
        assert sample.ids == uniform_subsample(corpus, per, seed).ids
