import io
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from wsd_ensemble.corpus import Instance, corpus_from_records
from wsd_ensemble.errors import (
    ModelChecksumError,
    ModelFormatError,
    ModelTruncatedError,
    ModelVersionError,
    TrainingError,
    UnknownSenseError,
)
from wsd_ensemble.features import WindowSpec, extract, grid_specs
from wsd_ensemble.naive_bayes import (
    classify,
    classify_features,
    dumps_model,
    load_model,
    loads_model,
    log_joint,
    pick_best,
    save_model,
    train,
    train_many,
)
from wsd_ensemble.synthetic import noisy_corpus

EPS = 1e-6
LEFT1 = WindowSpec(1, 0)


@pytest.fixture
def model(two_instance_corpus):
    return train(two_instance_corpus, LEFT1)


def probe(*left_words):
    return Instance("p", "A", (*left_words, "line"), len(left_words))


class TestTrain:
    def test_two_instance_parameters(self, model):
        assert model.prior == (0.5, 0.5)
        assert model.vocabulary == ("x", "y")
        assert model.conditional[0] == (1 - EPS, EPS)
        assert model.conditional[1] == (EPS, 1 - EPS)
        assert model.word_counts == ((1, 0), (0, 1))

    def test_zero_window_has_no_vocabulary(self, two_instance_corpus):
        m = train(two_instance_corpus, WindowSpec(0, 0))
        assert m.vocabulary == ()
        assert m.prior == (0.5, 0.5)

    def test_one_class_corpus(self):
        records = [(str(i), "a", ["w", "t"], 1) for i in range(4)]
        corpus = corpus_from_records(records, sense_inventory=("a", "b", "c"))
        m = train(corpus, LEFT1)
        k = 3
        expected = 1 / (1 + (k - 1) * EPS)
        assert m.prior[0] == pytest.approx(expected, rel=0, abs=1e-15)
        assert m.prior[0] == pytest.approx(1 - (k - 1) * EPS / (1 + (k - 1) * EPS), abs=1e-15)
        assert m.prior[1] == m.prior[2] < m.prior[0]
        assert math.fsum(m.prior) == pytest.approx(1.0, abs=1e-15)
        # unseen senses: every conditional floored
        assert m.conditional[0] == (1 - EPS, EPS, EPS)

    def test_priors_untouched_without_zero(self):
        corpus = corpus_from_records([("1", "a", ["t"], 0), ("2", "b", ["t"], 0),
                                      ("3", "a", ["t"], 0)])
        assert train(corpus, LEFT1).prior == (2 / 3, 1 / 3)

    def test_rejects_bad_inputs(self, two_instance_corpus):
        with pytest.raises(TrainingError):
            train(two_instance_corpus, LEFT1, epsilon=0.0)
        with pytest.raises(TrainingError):
            train(corpus_from_records([], sense_inventory=("a",)), LEFT1)

    def test_deterministic(self):
        corpus = noisy_corpus(seed=4)
        assert train(corpus, WindowSpec(3, 10)) == train(corpus, WindowSpec(3, 10))


class TestLogJoint:
    def test_empty_vocabulary_is_log_prior(self, two_instance_corpus):
        m = train(two_instance_corpus, WindowSpec(0, 0))
        assert log_joint(m, {"x"}, "A") == math.log(0.5)

    def test_two_instance_arithmetic(self, model):
        a = math.log(0.5) + math.log(1 - EPS) + math.log(1 - EPS)
        # y is absent and p(y | B) = 1 - EPS, so its factor is EPS as well
        b = math.log(0.5) + math.log(EPS) + math.log(1 - (1 - EPS))
        assert log_joint(model, {"x"}, "A") == pytest.approx(a, abs=1e-12)
        assert log_joint(model, {"x"}, "B") == pytest.approx(b, abs=1e-12)
        assert log_joint(model, {"x"}, "A") > log_joint(model, {"x"}, "B")

    def test_unknown_sense(self, model):
        with pytest.raises(UnknownSenseError):
            log_joint(model, set(), "C")

    def test_presence_scoring_ignores_absent_words(self, model):
        presence = model.with_scoring("presence")
        assert log_joint(presence, {"x"}, "A") == pytest.approx(math.log(0.5) + math.log(1 - EPS))
        assert log_joint(presence, set(), "B") == math.log(0.5)

    def test_finite_everywhere(self):
        m = train(noisy_corpus(seed=1), WindowSpec(2, 2))
        for p in m.prior:
            assert 0 < p < 1
        for row in m.conditional:
            assert all(0 < p < 1 for p in row)
        assert all(math.isfinite(s) for s in m.scores(m.vocabulary))


class TestClassify:
    def test_two_instance(self, model):
        assert classify(model, probe("x")) == "A"
        assert classify(model, probe("y")) == "B"

    def test_oov_matches_empty_window(self, model):
        assert classify(model, probe("zzz")) == classify(model, probe())

    def test_zero_window_is_majority(self):
        corpus = corpus_from_records(
            [(str(i), s, ["w", "t"], 1) for i, s in enumerate("abbcbb")])
        m = train(corpus, WindowSpec(0, 0))
        assert {classify(m, inst) for inst in corpus} == {"b"}

    def test_tie_goes_to_larger_training_count_then_order(self):
        assert pick_best([-1.0, -1.0, -2.0], [3, 5, 9]) == 1
        assert pick_best([-1.0, -1.0], [4, 4]) == 0
        assert pick_best([-1.0, -1.0 - 1e-12], [1, 2]) == 1
        assert pick_best([-1.0, -1.0 - 1e-6], [1, 2]) == 0

    @given(st.floats(-1e3, 1e3))
    def test_shift_invariance(self, shift):
        rng = random.Random(0)
        scores = [rng.uniform(-50, 0) for _ in range(5)]
        counts = [rng.randint(1, 9) for _ in range(5)]
        shifted = [s + shift for s in scores]
        assert pick_best(scores, counts) == pick_best(shifted, counts)

    def test_label_permutation_equivariance(self):
        corpus = noisy_corpus({"a": 40, "b": 30, "c": 20}, seed=2)
        rename = {"a": "c", "b": "a", "c": "b"}
        renamed = corpus_from_records(
            [(i.id, rename[i.sense], list(i.tokens), i.target_index) for i in corpus],
            sense_inventory=tuple(rename[s] for s in corpus.sense_inventory),
        )
        for spec in (WindowSpec(0, 0), WindowSpec(2, 3), WindowSpec(10, 25)):
            m, m2 = train(corpus, spec), train(renamed, spec)
            for inst in corpus:
                assert rename[classify(m, inst)] == classify(m2, inst)


class TestTrainMany:
    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**6))
    def test_equals_per_spec_training(self, seed):
        rng = random.Random(seed)
        records = []
        for n in range(rng.randint(1, 12)):
            toks = [rng.choice("abcdefgh") for _ in range(rng.randint(1, 70))]
            records.append((str(n), rng.choice("xyz"), toks, rng.randrange(len(toks))))
        corpus = corpus_from_records(records)
        models = train_many(corpus, grid_specs())
        for spec in grid_specs():
            assert models[spec] == train(corpus, spec)

    def test_noisy_corpus(self):
        corpus = noisy_corpus(seed=3)
        models = train_many(corpus, grid_specs())
        for spec in grid_specs()[::7]:
            assert models[spec] == train(corpus, spec)


class TestPersistence:
    def test_round_trip(self, model, tmp_path):
        path = tmp_path / "m.model"
        save_model(model, path)
        back = load_model(path)
        assert back == model
        assert back.prior == model.prior
        assert back.conditional == model.conditional
        assert back.vocabulary == model.vocabulary
        assert back.spec == model.spec

    def test_round_trip_keeps_scores(self):
        m = train(noisy_corpus(seed=5), WindowSpec(4, 25))
        back = loads_model(dumps_model(m))
        inst = noisy_corpus(seed=6).instances[0]
        assert back.scores(extract(inst, m.spec)) == m.scores(extract(inst, m.spec))

    def test_stream(self, model):
        buf = io.StringIO()
        save_model(model, buf)
        assert load_model(io.StringIO(buf.getvalue())) == model

    def test_version(self, model):
        text = dumps_model(model).replace("wsd-nb-model\t1", "wsd-nb-model\t2", 1)
        with pytest.raises(ModelVersionError):
            loads_model(text)

    def test_truncated_mid_table(self):
        m = train(noisy_corpus(seed=0), WindowSpec(2, 2))
        text = dumps_model(m)
        cut = text[: len(text) // 2]
        with pytest.raises(ModelTruncatedError):
            loads_model(cut)
        with pytest.raises(ModelTruncatedError):
            loads_model("")

    def test_missing_rows_with_valid_checksum(self, model):
        import hashlib
        lines = dumps_model(model).splitlines()[:-2]
        body = "\n".join(lines) + "\n"
        text = body + "checksum\tsha256:" + hashlib.sha256(body.encode()).hexdigest() + "\n"
        with pytest.raises(ModelTruncatedError):
            loads_model(text)

    def test_tampered(self, model):
        text = dumps_model(model).replace("\tx\t", "\tq\t").replace("\nx\t", "\nq\t")
        with pytest.raises(ModelChecksumError):
            loads_model(text)

    def test_not_a_model(self):
        with pytest.raises(ModelFormatError):
            loads_model("hello\n")

    def test_error_hierarchy(self):
        assert issubclass(ModelVersionError, ModelFormatError)
        assert issubclass(ModelTruncatedError, ModelFormatError)
        assert issubclass(ModelChecksumError, ModelFormatError)


def test_classify_features_accepts_any_iterable(model):
    assert classify_features(model, ["x", "x"]) == "A"
